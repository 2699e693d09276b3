//! C² regularized maximum.
//!
//! `M_ε(t₁, t₂) = t₂ + h_ε(t₁ − t₂)` where `h_ε` is the hinge `max(s, 0)` convolved with
//! the biweight kernel `(15/16)(1 − u²)²` scaled to `[−ε, ε]`. The kernel is C¹, so `h_ε`
//! is C³; `h_ε(s) = max(s, 0)` for `|s| ≥ ε` and the largest gap, at `s = 0`, is `5ε/32`.

use crate::error::{Error, Result};

/// Value and derivatives of `M_ε` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothMax {
    pub value: f64,
    /// `∂M/∂t₁`; `∂M/∂t₂ = 1 − d1`.
    pub d1: f64,
    pub d2: f64,
    /// `∂²M/∂t₁²`; the Hessian in `(t₁, t₂)` is `curvature · [[1, −1], [−1, 1]]`.
    pub curvature: f64,
}

pub fn smooth_max(t1: f64, t2: f64, eps: f64) -> Result<SmoothMax> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("smoothing width must be positive, got {eps}")));
    }
    let s = t1 - t2;
    if s >= eps {
        return Ok(SmoothMax {
            value: t1,
            d1: 1.0,
            d2: 0.0,
            curvature: 0.0,
        });
    }
    if s <= -eps {
        return Ok(SmoothMax {
            value: t2,
            d1: 0.0,
            d2: 1.0,
            curvature: 0.0,
        });
    }
    let v = s / eps;
    let v2 = v * v;
    let c = 15.0 / 16.0;
    // antiderivative of the kernel's CDF, normalized to vanish at v = −1
    let h = v / 2.0 + c * (v2 / 2.0 - v2 * v2 / 6.0 + v2 * v2 * v2 / 30.0) + 5.0 / 32.0;
    let cdf = 0.5 + c * (v - 2.0 * v2 * v / 3.0 + v2 * v2 * v / 5.0);
    let kernel = c * (1.0 - v2) * (1.0 - v2);
    Ok(SmoothMax {
        value: t2 + eps * h,
        d1: cdf,
        d2: 1.0 - cdf,
        curvature: kernel / eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equals_max_off_the_strip() {
        for (a, b) in [(2.0, 0.0), (0.0, 2.0), (1.0, 0.5), (-3.0, -3.5)] {
            assert_eq!(smooth_max(a, b, 0.5).unwrap().value, f64::max(a, b));
        }
    }

    #[test]
    fn partials_sum_to_one_and_are_nonnegative() {
        for k in -100..=100 {
            let s = k as f64 / 80.0;
            let m = smooth_max(0.3 + s, 0.3, 1.0).unwrap();
            assert!(m.d1 >= 0.0 && m.d2 >= 0.0);
            assert!((m.d1 + m.d2 - 1.0).abs() <= 1e-9);
            assert!(m.curvature >= 0.0);
        }
    }

    #[test]
    fn uniform_gap_is_five_thirty_seconds() {
        let eps = 0.2;
        let mut worst: f64 = 0.0;
        for k in -400..=400 {
            let s = k as f64 / 1000.0;
            worst = worst.max(smooth_max(s, 0.0, eps).unwrap().value - s.max(0.0));
        }
        assert!((worst - 5.0 * eps / 32.0).abs() < 1e-15);
        assert!(worst <= eps / 2.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let eps = 0.7;
        for k in -20..=20 {
            let s = k as f64 / 25.0;
            let m = smooth_max(s, 0.1, eps).unwrap();
            let hstep = 1e-6;
            let p = smooth_max(s + hstep, 0.1, eps).unwrap();
            let q = smooth_max(s - hstep, 0.1, eps).unwrap();
            assert!(((p.value - q.value) / (2.0 * hstep) - m.d1).abs() < 1e-8);
            assert!(((p.d1 - q.d1) / (2.0 * hstep) - m.curvature).abs() < 1e-6);
        }
    }

    #[test]
    fn continuous_across_strip_edges() {
        let eps = 0.3;
        for s in [eps, -eps] {
            let inner = smooth_max(s * (1.0 - 1e-12), 0.0, eps).unwrap();
            let outer = smooth_max(s, 0.0, eps).unwrap();
            assert!((inner.value - outer.value).abs() < 1e-12);
            assert!((inner.d1 - outer.d1).abs() < 1e-9);
            assert!(inner.curvature.abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_nonpositive_width() {
        assert!(smooth_max(0.0, 0.0, 0.0).is_err());
        assert!(smooth_max(0.0, 0.0, -1.0).is_err());
    }
}
