//! Pointwise and probe-based reports on grid fields.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::GridField;
use crate::cones::{sample_member, ConeSet};
use crate::error::{Error, Result};
use crate::sampling::{rng, SampleRng, DEFAULT_SEED};

/// Outcome of a grid check; `pass ⟺ worst_margin ≥ −tolerance` on the pointwise margin.
/// A probe, when present, is reported alongside and never changes the verdict.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub property: String,
    pub worst_point: Vec<f64>,
    pub worst_margin: f64,
    pub pass: bool,
    pub tolerance: f64,
    pub points_checked: usize,
    /// Randomized probe results, when the check runs one.
    pub probe: Option<ProbeReport>,
}

/// Randomized companion to a pointwise check.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub trials: usize,
    pub violations: usize,
    pub worst_margin: f64,
    pub worst_point: Vec<f64>,
    /// False when the probe and the pointwise test reach different verdicts.
    pub agrees_with_pointwise: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ProbeSettings {
    pub trials: usize,
    pub seed: u64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: DEFAULT_SEED,
        }
    }
}

struct Worst {
    margin: f64,
    k: usize,
}

fn pointwise_min(u: &GridField, f: impl Fn(usize) -> Result<f64> + Sync) -> Result<(Worst, usize)> {
    let idx = u.interior_indices();
    let worst = idx
        .par_iter()
        .map(|&k| Ok::<_, Error>(Worst { margin: f(k)?, k }))
        .try_reduce(
            || Worst {
                margin: f64::INFINITY,
                k: usize::MAX,
            },
            |a, b| Ok(if b.margin < a.margin || (b.margin == a.margin && b.k < a.k) { b } else { a }),
        )?;
    Ok((worst, idx.len()))
}

fn finish(
    property: &str,
    u: &GridField,
    w: Worst,
    points: usize,
    tol: f64,
    probe: Option<ProbeReport>,
) -> AnalysisReport {
    let worst_margin = w.margin;
    let worst_point = if w.k == usize::MAX { Vec::new() } else { u.coord(w.k) };
    AnalysisReport {
        property: property.into(),
        worst_point,
        worst_margin,
        pass: worst_margin >= -tol,
        tolerance: tol,
        points_checked: points,
        probe,
    }
}

/// Discrete maximum-principle probe: on random index boxes `K` and random slopes `g`,
/// the affine `a = g·x + c` with `c` tight on `∂K` must dominate `u` inside `K`.
/// Margins are `(a − u)/max(1, sup_K |a|)`.
fn affine_probe(u: &GridField, settings: ProbeSettings, tol: f64) -> Result<(usize, f64, Vec<f64>)> {
    let mut r: SampleRng = rng(settings.seed);
    let n = u.dim();
    let shape = u.shape().to_vec();
    let range = u.values().iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
        - u.values().iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let width = u.h() * (shape.iter().copied().max().unwrap_or(3) - 1) as f64;
    let slope = range / width + 1.0;
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut worst_point = Vec::new();
    for _ in 0..settings.trials {
        let mut from = vec![0; n];
        let mut to = vec![0; n];
        for i in 0..n {
            let a = r.gen_range(0..shape[i] - 2);
            let b = r.gen_range(a + 2..shape[i]);
            from[i] = a;
            to[i] = b;
        }
        let g: Vec<f64> = (0..n).map(|_| r.gen_range(-slope..=slope)).collect();
        let k_grid = u.sub_grid(&from, &to)?;
        let lin = |k: usize| -> f64 { k_grid.coord(k).iter().zip(&g).map(|(x, gi)| x * gi).sum() };
        let c = k_grid
            .boundary_indices()
            .into_iter()
            .map(|k| k_grid.get(k) - lin(k))
            .fold(f64::NEG_INFINITY, f64::max);
        let norm = (0..k_grid.len())
            .map(|k| (lin(k) + c).abs())
            .fold(1.0, f64::max);
        let mut trial_worst = f64::INFINITY;
        let mut trial_point = Vec::new();
        for k in k_grid.interior_indices() {
            let m = (lin(k) + c - k_grid.get(k)) / norm;
            if m < trial_worst {
                trial_worst = m;
                trial_point = k_grid.coord(k);
            }
        }
        if trial_worst < -tol {
            violations += 1;
        }
        if trial_worst < worst {
            worst = trial_worst;
            worst_point = trial_point;
        }
    }
    Ok((violations, worst, worst_point))
}

/// Subaffinity: `λ_max(D²u) ≥ −tol` at every interior point, plus the affine probe.
pub fn subaffine_report(u: &GridField, tol: f64, settings: ProbeSettings) -> Result<AnalysisReport> {
    let (w, points) = pointwise_min(u, |k| u.discrete_hessian(k)?.lambda_max())?;
    let pointwise_pass = w.margin >= -tol;
    let (violations, pw, pp) = affine_probe(u, settings, tol)?;
    let probe = ProbeReport {
        trials: settings.trials,
        violations,
        worst_margin: pw,
        worst_point: pp,
        agrees_with_pointwise: (violations == 0) == pointwise_pass,
    };
    Ok(finish("subaffine", u, w, points, tol, Some(probe)))
}

/// Type `F`: `defect_F(D²u) ≥ −tol` at every interior point. The probe adds random
/// quadratics `½(x − x̄)ᵀB(x − x̄)` with `B ∈ F̃` and requires `u + B` to be subaffine.
pub fn type_report(
    u: &GridField,
    f: &ConeSet,
    tol: f64,
    dual_probes: usize,
    settings: ProbeSettings,
) -> Result<AnalysisReport> {
    if f.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: f.dim(),
        });
    }
    let (w, points) = pointwise_min(u, |k| f.defect(&u.discrete_hessian(k)?))?;
    if dual_probes == 0 {
        return Ok(finish(&format!("type {}", f.name()), u, w, points, tol, None));
    }
    let pointwise_pass = w.margin >= -tol;
    let dual = f.dual();
    let mut r = rng(settings.seed);
    let hi = u.hi();
    let mid: Vec<f64> = u.lo().iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut worst_point = Vec::new();
    for t in 0..dual_probes {
        let b = sample_member(&dual, &mut r)?;
        let shifted = u.add_fn(|x| {
            let d: Vec<f64> = x.iter().zip(&mid).map(|(p, q)| p - q).collect();
            0.5 * b.quad(&d)
        });
        let rep = subaffine_report(
            &shifted,
            tol,
            ProbeSettings {
                trials: settings.trials,
                seed: settings.seed.wrapping_add(t as u64 + 1),
            },
        )?;
        if !rep.pass {
            violations += 1;
        }
        if rep.worst_margin < worst {
            worst = rep.worst_margin;
            worst_point = rep.worst_point;
        }
    }
    let probe = ProbeReport {
        trials: dual_probes,
        violations,
        worst_margin: worst,
        worst_point,
        agrees_with_pointwise: (violations == 0) == pointwise_pass,
    };
    Ok(finish(&format!("type {}", f.name()), u, w, points, tol, Some(probe)))
}

/// `max(0, −min λ_min(D²u))`: the smallest `λ` making `u + λ½|x|²` convex at grid scale.
pub fn quasiconvex_modulus(u: &GridField) -> Result<f64> {
    let (w, _) = pointwise_min(u, |k| u.discrete_hessian(k)?.lambda_min())?;
    Ok((-w.margin).max(0.0))
}

/// Estimate of the largest Hessian eigenvalue at lattice point `k` from second-order
/// increments `2|z|⁻²(v(x + z) − v(x) − ∇v·z)` over lattice shells `|z| ≈ ε`,
/// `ε ∈ {4h, 8h, 16h}`. Returns `+∞` when one-sided slopes keep a jump that does not
/// shrink with `ε`, the signature of a kink.
pub fn largest_eigenvalue_k(v: &GridField, k: usize) -> Result<f64> {
    let n = v.dim();
    let idx = v.index_of(k);
    let reach = 16;
    if idx.iter().zip(v.shape()).any(|(&i, &m)| i < reach || i + reach >= m) {
        return Err(Error::StencilOutOfBounds { index: idx });
    }
    let h = v.h();
    let at = |off: &[i64]| -> f64 {
        let j: Vec<usize> = idx.iter().zip(off).map(|(&i, &o)| (i as i64 + o) as usize).collect();
        v.get(v.flat(&j))
    };
    let zero = vec![0i64; n];
    let v0 = at(&zero);
    let grad: Vec<f64> = (0..n)
        .map(|i| {
            let mut p = zero.clone();
            p[i] = 1;
            let a = at(&p);
            p[i] = -1;
            (a - at(&p)) / (2.0 * h)
        })
        .collect();
    let mut jumps = Vec::new();
    let mut estimates = Vec::new();
    for m in [4i64, 8, 16] {
        let eps = m as f64 * h;
        let mut jump: f64 = 0.0;
        for i in 0..n {
            let mut p = zero.clone();
            p[i] = m;
            let fwd = (at(&p) - v0) / eps;
            p[i] = -m;
            let bwd = (v0 - at(&p)) / eps;
            jump = jump.max((fwd - bwd).abs());
        }
        jumps.push(jump);
        // lattice offsets with m ≤ |z|/h < m + 1
        let mut best = f64::NEG_INFINITY;
        let side = 2 * m + 3;
        let count = (side as usize).pow(n as u32);
        for c in 0..count {
            let mut rem = c;
            let z: Vec<i64> = (0..n)
                .map(|_| {
                    let o = (rem % side as usize) as i64 - (m + 1);
                    rem /= side as usize;
                    o
                })
                .collect();
            let r2: i64 = z.iter().map(|o| o * o).sum();
            if r2 < m * m || r2 >= (m + 1) * (m + 1) {
                continue;
            }
            let zz: Vec<f64> = z.iter().map(|&o| o as f64 * h).collect();
            let lin: f64 = grad.iter().zip(&zz).map(|(g, d)| g * d).sum();
            let len2: f64 = zz.iter().map(|d| d * d).sum();
            best = best.max(2.0 * (at(&z) - v0 - lin) / len2);
        }
        estimates.push(best);
    }
    let scale = 1.0 + grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    // smooth fields give jumps proportional to ε; a kink keeps a jump of fixed size
    if jumps[0] > 1e-6 * scale && jumps[0] >= 0.5 * jumps[2] {
        return Ok(f64::INFINITY);
    }
    Ok(estimates.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Comparison on a box: if `u` is of type `F`, `−v` of type `F̃`, and `u ≤ v` on the
/// boundary layer, then `u ≤ v + tol` everywhere.
pub fn comparison_check(
    u: &GridField,
    v: &GridField,
    f: &ConeSet,
    tol: f64,
    type_tol: f64,
) -> Result<AnalysisReport> {
    if !u.same_lattice(v) {
        return Err(Error::InvalidGrid("fields live on different lattices".into()));
    }
    let none = ProbeSettings::default();
    let tu = type_report(u, f, type_tol, 0, none)?;
    if !tu.pass {
        return Err(Error::Precondition(format!(
            "u is not of type {} (margin {:e} at {:?})",
            f.name(),
            tu.worst_margin,
            tu.worst_point
        )));
    }
    let tv = type_report(&v.map(|x| -x), &f.dual(), type_tol, 0, none)?;
    if !tv.pass {
        return Err(Error::Precondition(format!(
            "-v is not of the dual type (margin {:e} at {:?})",
            tv.worst_margin, tv.worst_point
        )));
    }
    for k in u.boundary_indices() {
        if u.get(k) > v.get(k) {
            return Err(Error::Precondition(format!(
                "u > v on the boundary at {:?}",
                u.coord(k)
            )));
        }
    }
    let (w, points) = pointwise_min(u, |k| Ok(v.get(k) - u.get(k)))?;
    Ok(finish("comparison", u, w, points, tol, None))
}
