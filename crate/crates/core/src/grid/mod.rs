//! Scalar fields on uniform box lattices.
//!
//! Lattice points are stored row-major with the first coordinate slowest. The outermost
//! layer of points is the boundary layer; every other point has the full 3ⁿ stencil.

mod analysis;
mod supconv;

pub use analysis::{
    comparison_check, largest_eigenvalue_k, quasiconvex_modulus, subaffine_report, type_report,
    AnalysisReport, ProbeReport, ProbeSettings,
};
pub use supconv::sup_convolution;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symmat::SymMatrix;

/// Relative slack when checking that the box side is a whole number of steps.
const SPACING_TOL: f64 = 1e-9;

/// Axis-aligned box `[lo, hi]` in two or three dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl GridBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || !(2..=3).contains(&lo.len()) {
            return Err(Error::InvalidGrid(format!(
                "box needs 2 or 3 matching coordinates, got {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) || lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(Error::InvalidGrid(format!("degenerate box {lo:?}..{hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    /// `[a, b]ⁿ`.
    pub fn cube(n: usize, a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a; n], vec![b; n])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// Values on the lattice `lo + h·k`, `0 ≤ kᵢ < shape[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    lo: Vec<f64>,
    h: f64,
    shape: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<f64>,
}

fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Sidecar metadata written next to a CSV field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridMeta {
    #[serde(rename = "box")]
    pub bbox: GridBox,
    pub h: f64,
    pub n: usize,
    pub shape: Vec<usize>,
    #[serde(default)]
    pub provenance: serde_json::Value,
}

impl GridField {
    /// Lattice with the given origin, spacing and extents; values start at zero.
    pub fn zeros(lo: Vec<f64>, h: f64, shape: Vec<usize>) -> Result<Self> {
        if !(2..=3).contains(&lo.len()) || lo.len() != shape.len() {
            return Err(Error::InvalidGrid(format!(
                "grid needs 2 or 3 dimensions, got origin {lo:?} and shape {shape:?}"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        if shape.iter().any(|&m| m < 3) {
            return Err(Error::InvalidGrid(format!(
                "every side needs at least 3 points, got {shape:?}"
            )));
        }
        let len = shape.iter().product();
        Ok(Self {
            strides: strides_of(&shape),
            lo,
            h,
            shape,
            values: vec![0.0; len],
        })
    }

    /// Lattice covering `b` with spacing `h`; each side must be a whole number of steps.
    pub fn on_box(b: &GridBox, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        let shape = b
            .lo
            .iter()
            .zip(&b.hi)
            .map(|(l, u)| {
                let steps = (u - l) / h;
                let k = steps.round();
                if (steps - k).abs() > SPACING_TOL * steps.max(1.0) {
                    Err(Error::InvalidGrid(format!(
                        "side {} is not a multiple of h = {h}",
                        u - l
                    )))
                } else {
                    Ok(k as usize + 1)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::zeros(b.lo.clone(), h, shape)
    }

    /// Samples `f` at every lattice point.
    pub fn from_fn(b: &GridBox, h: f64, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut g = Self::on_box(b, h)?;
        g.fill(f)?;
        Ok(g)
    }

    /// Same lattice, new values from `f(x)`.
    pub fn fill(&mut self, f: impl Fn(&[f64]) -> f64) -> Result<()> {
        for k in 0..self.values.len() {
            let x = self.coord(k);
            let v = f(&x);
            if !v.is_finite() {
                return Err(Error::InvalidGrid(format!("non-finite value {v} at {x:?}")));
            }
            self.values[k] = v;
        }
        Ok(())
    }

    pub fn from_values(lo: Vec<f64>, h: f64, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let mut g = Self::zeros(lo, h, shape)?;
        if values.len() != g.values.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                g.values.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value {v}")));
        }
        g.values = values;
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.shape)
            .map(|(l, m)| l + (m - 1) as f64 * self.h)
            .collect()
    }

    pub fn grid_box(&self) -> GridBox {
        GridBox {
            lo: self.lo.clone(),
            hi: self.hi(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn set(&mut self, k: usize, v: f64) {
        self.values[k] = v;
    }

    pub(crate) fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Multi-index of flat index `k`.
    pub fn index_of(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (i, s) in self.strides.iter().enumerate() {
            idx[i] = k / s;
            k %= s;
        }
        idx
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn coord(&self, k: usize) -> Vec<f64> {
        self.index_of(k)
            .iter()
            .zip(&self.lo)
            .map(|(&i, l)| l + i as f64 * self.h)
            .collect()
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.index_of(k)
            .iter()
            .zip(&self.shape)
            .any(|(&i, &m)| i == 0 || i + 1 == m)
    }

    /// Flat indices of points off the boundary layer, in storage order.
    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| !self.is_boundary(k)).collect()
    }

    pub fn boundary_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.is_boundary(k)).collect()
    }

    pub fn same_lattice(&self, other: &GridField) -> bool {
        self.shape == other.shape && self.h == other.h && self.lo == other.lo
    }

    fn check_same(&self, other: &GridField) -> Result<()> {
        if !self.same_lattice(other) {
            return Err(Error::InvalidGrid("fields live on different lattices".into()));
        }
        Ok(())
    }

    /// Pointwise `f(self, other)` on a shared lattice.
    pub fn zip_with(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<GridField> {
        self.check_same(other)?;
        let mut g = self.clone();
        g.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(a, b)| *a = f(*a, *b));
        Ok(g)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        let mut g = self.clone();
        g.values.iter_mut().for_each(|v| *v = f(*v));
        g
    }

    /// Adds `q(x)` at every lattice point.
    pub fn add_fn(&self, q: impl Fn(&[f64]) -> f64) -> GridField {
        let mut g = self.clone();
        for k in 0..g.len() {
            let x = g.coord(k);
            g.values[k] += q(&x);
        }
        g
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup-norm distance to a field on the same lattice.
    pub fn max_abs_diff(&self, other: &GridField) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    fn check_stencil(&self, k: usize) -> Result<()> {
        if k >= self.len() || self.is_boundary(k) {
            return Err(Error::StencilOutOfBounds {
                index: if k < self.len() { self.index_of(k) } else { vec![k] },
            });
        }
        Ok(())
    }

    /// Centered second differences at interior point `k`.
    pub fn discrete_hessian(&self, k: usize) -> Result<SymMatrix> {
        self.check_stencil(k)?;
        Ok(self.hessian_with_center(k, self.values[k]))
    }

    /// Discrete Hessian at `k` with the center value replaced by `center`.
    ///
    /// The center enters only through `−2·center/h²` on the diagonal.
    pub(crate) fn hessian_with_center(&self, k: usize, center: f64) -> SymMatrix {
        let n = self.dim();
        let u = &self.values;
        let h2 = self.h * self.h;
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            let si = self.strides[i];
            m.set(i, i, (u[k + si] - 2.0 * center + u[k - si]) / h2);
            for j in (i + 1)..n {
                let sj = self.strides[j];
                let v = (u[k + si + sj] + u[k - si - sj] - u[k + si - sj] - u[k - si + sj]) / (4.0 * h2);
                m.set(i, j, v);
            }
        }
        m
    }

    /// Lattice-exact grid of `self` restricted to the index box `[from, to]`.
    pub fn sub_grid(&self, from: &[usize], to: &[usize]) -> Result<GridField> {
        let n = self.dim();
        if from.len() != n || to.len() != n || (0..n).any(|i| to[i] >= self.shape[i] || to[i] < from[i] + 2) {
            return Err(Error::InvalidGrid(format!("bad index box {from:?}..{to:?}")));
        }
        let shape: Vec<usize> = (0..n).map(|i| to[i] - from[i] + 1).collect();
        let lo: Vec<f64> = (0..n).map(|i| self.lo[i] + from[i] as f64 * self.h).collect();
        let mut g = GridField::zeros(lo, self.h, shape)?;
        for k in 0..g.len() {
            let idx: Vec<usize> = g.index_of(k).iter().zip(from).map(|(a, b)| a + b).collect();
            g.values[k] = self.values[self.flat(&idx)];
        }
        Ok(g)
    }

    pub fn meta(&self, provenance: serde_json::Value) -> GridMeta {
        GridMeta {
            bbox: self.grid_box(),
            h: self.h,
            n: self.dim(),
            shape: self.shape.clone(),
            provenance,
        }
    }

    /// CSV with header `x1,…,xn,value`, one row per point in storage order, 17 significant digits.
    pub fn to_csv_string(&self) -> String {
        let n = self.dim();
        let mut out = String::with_capacity(self.len() * 24 * (n + 1));
        let header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        out.push_str(&header.join(","));
        out.push_str(",value\n");
        for k in 0..self.len() {
            for x in self.coord(k) {
                out.push_str(&format!("{x:.16e},"));
            }
            out.push_str(&format!("{:.16e}\n", self.values[k]));
        }
        out
    }

    /// Inverse of [`to_csv_string`](Self::to_csv_string); the lattice is recovered from the coordinates.
    pub fn from_csv_str(src: &str) -> Result<GridField> {
        let mut lines = src.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidGrid("empty CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let n = cols.len().saturating_sub(1);
        let expected: Vec<String> = (1..=n).map(|i| format!("x{i}")).chain(["value".into()]).collect();
        if cols != expected.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::InvalidGrid(format!("unexpected CSV header '{header}'")));
        }
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line_no, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidGrid(format!("row {}: {e}", line_no + 2)))?;
            if row.len() != n + 1 {
                return Err(Error::InvalidGrid(format!(
                    "row {} has {} columns, expected {}",
                    line_no + 2,
                    row.len(),
                    n + 1
                )));
            }
            rows.push(row);
        }
        if rows.len() < 2 {
            return Err(Error::InvalidGrid("CSV needs at least two rows".into()));
        }
        let lo: Vec<f64> = rows[0][..n].to_vec();
        let hi: Vec<f64> = rows[rows.len() - 1][..n].to_vec();
        // the last coordinate varies fastest, so the second row fixes h
        let h = rows[1][n - 1] - rows[0][n - 1];
        if !(h > 0.0) {
            return Err(Error::InvalidGrid("cannot infer a positive spacing".into()));
        }
        let shape: Vec<usize> = (0..n).map(|i| ((hi[i] - lo[i]) / h).round() as usize + 1).collect();
        let values: Vec<f64> = rows.iter().map(|r| r[n]).collect();
        let g = GridField::from_values(lo, h, shape, values)?;
        for (k, r) in rows.iter().enumerate() {
            let x = g.coord(k);
            if x.iter().zip(r).any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + a.abs()) + 1e-6 * h) {
                return Err(Error::InvalidGrid(format!(
                    "row {} at {:?} is off the lattice (expected {x:?})",
                    k + 2,
                    &r[..n]
                )));
            }
        }
        Ok(g)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<GridField> {
        GridField::from_csv_str(&std::fs::read_to_string(path)?)
    }
}
