//! Lattice sup-convolution.

use rayon::prelude::*;

use super::GridField;
use crate::error::{Error, Result};

/// `u^ε(x) = max_z u(x − z) − |z|²/ε` over lattice offsets `z`.
///
/// With `|u| ≤ bound` the maximizer satisfies `|z| ≤ δ = √(2ε·bound)`, so the result lives
/// on the grid shrunk by `⌈δ/h⌉` points per side and the maximum over the lattice ball is
/// exact there.
pub fn sup_convolution(u: &GridField, eps: f64, bound: f64) -> Result<GridField> {
    if !(eps > 0.0) || !(bound >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sup-convolution needs eps > 0 and bound >= 0, got {eps}, {bound}"
        )));
    }
    if u.max_abs() > bound {
        return Err(Error::InvalidParameter(format!(
            "|u| reaches {} above the bound {bound}",
            u.max_abs()
        )));
    }
    let n = u.dim();
    let h = u.h();
    let delta = (2.0 * eps * bound).sqrt();
    let reach = (delta / h - 1e-9).ceil().max(0.0) as usize;
    let shape: Vec<usize> = u
        .shape()
        .iter()
        .map(|&m| m.saturating_sub(2 * reach))
        .collect();
    if shape.iter().any(|&m| m < 3) {
        return Err(Error::InvalidGrid(format!(
            "shrinking by {reach} points per side leaves {shape:?}"
        )));
    }
    let lo: Vec<f64> = u.lo().iter().map(|a| a + reach as f64 * h).collect();
    let mut out = GridField::zeros(lo, h, shape)?;

    let r = reach as i64;
    let side = (2 * r + 1) as usize;
    let offsets: Vec<(Vec<i64>, f64)> = (0..side.pow(n as u32))
        .filter_map(|c| {
            let mut rem = c;
            let z: Vec<i64> = (0..n)
                .map(|_| {
                    let o = (rem % side) as i64 - r;
                    rem /= side;
                    o
                })
                .collect();
            let len2 = h * h * z.iter().map(|o| (o * o) as f64).sum::<f64>();
            (len2 <= delta * delta + 1e-12 * h * h).then_some((z, len2 / eps))
        })
        .collect();

    let strides = u.strides().to_vec();
    let src = u.values();
    let vals: Vec<f64> = (0..out.len())
        .into_par_iter()
        .map(|k| {
            let idx = out.index_of(k);
            let base: i64 = idx
                .iter()
                .zip(&strides)
                .map(|(&i, &s)| ((i + reach) * s) as i64)
                .sum();
            offsets
                .iter()
                .map(|(z, pen)| {
                    let off: i64 = z.iter().zip(&strides).map(|(o, &s)| o * s as i64).sum();
                    src[(base - off) as usize] - pen
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    out.values_mut().copy_from_slice(&vals);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{quasiconvex_modulus, GridBox};

    #[test]
    fn dominates_and_shrinks() {
        let b = GridBox::cube(2, -1.0, 1.0).unwrap();
        let u = GridField::from_fn(&b, 1.0 / 32.0, |x| (3.0 * x[0]).sin() * x[1]).unwrap();
        let eps = 0.01;
        let s = sup_convolution(&u, eps, 1.0).unwrap();
        let reach = ((2.0f64 * eps).sqrt() * 32.0).ceil() as usize;
        assert_eq!(s.shape()[0], 65 - 2 * reach);
        for k in 0..s.len() {
            let x = s.coord(k);
            let idx: Vec<usize> = s.index_of(k).iter().map(|i| i + reach).collect();
            assert_eq!(u.coord(u.flat(&idx)), x);
            assert!(s.get(k) >= u.get(u.flat(&idx)));
        }
    }

    #[test]
    fn concave_quadratic_gains_bounded_modulus() {
        // for −c|x|²/2 the sup-convolution is −c|x|²/(2(1 + cε/2)) up to lattice effects
        let b = GridBox::cube(2, -1.0, 1.0).unwrap();
        let u = GridField::from_fn(&b, 1.0 / 32.0, |x| -2.0 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let eps = 0.05;
        let s = sup_convolution(&u, eps, 4.0).unwrap();
        let m = quasiconvex_modulus(&s).unwrap();
        assert!(m <= 2.0 / eps + 1e-9, "{m}");
    }

    #[test]
    fn rejects_bad_input() {
        let b = GridBox::cube(2, 0.0, 1.0).unwrap();
        let u = GridField::from_fn(&b, 0.125, |_| 1.0).unwrap();
        assert!(sup_convolution(&u, 0.1, 0.5).is_err());
        assert!(sup_convolution(&u, 0.0, 1.0).is_err());
        assert!(matches!(sup_convolution(&u, 10.0, 1.0), Err(Error::InvalidGrid(_))));
    }
}
