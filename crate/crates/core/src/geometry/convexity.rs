//! Strict boundary convexity through the normal ladder `Hess ρ + t·P_n`.

use rayon::prelude::*;
use serde::Serialize;

use super::Domain;
use crate::cones::{ray_defect, ConeSet};
use crate::error::Result;
use crate::symmat::SymMatrix;

/// Doublings of `t₀` over which strictness must persist.
pub const PERSISTENCE_DOUBLINGS: u32 = 8;
const LADDER_MIN_EXP: i32 = -20;
const LADDER_MAX_EXP: i32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Strict,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    /// Smallest ray defect over the persistence ladder; on failure, the ray defect at the
    /// largest `t` tested.
    pub margin: f64,
    /// First ladder rung where strictness held and persisted.
    pub t_star: Option<f64>,
    /// Range of `t` searched.
    pub tested_range: (f64, f64),
    pub verdict: Verdict,
}

/// Searches `t = s·2ᵏ`, `s = max(1, |Hess ρ|_max)`, for the first rung where
/// `Hess ρ + t·P_n` lies in the interior of the ray set for `t, 2t, …, 2⁸t`.
pub fn strict_convexity_at(d: &Domain, ray_set: &ConeSet, x: &[f64]) -> Result<ConvexityReport> {
    let der = d.derivatives(x)?;
    let normal = d.unit_normal(x)?;
    let h = der.hessian;
    let pn = SymMatrix::outer(&normal);
    let s = h.max_abs().max(1.0);
    let rung = |k: i32| s * 2f64.powi(k);
    let at = |t: f64| ray_defect(ray_set, &(&h + &(&pn * t)));
    let tested_range = (rung(LADDER_MIN_EXP), rung(LADDER_MAX_EXP));
    let mut last = f64::NEG_INFINITY;
    for k in LADDER_MIN_EXP..=LADDER_MAX_EXP {
        let t0 = rung(k);
        last = at(t0)?;
        if last <= 0.0 {
            continue;
        }
        let mut margin = last;
        for j in 1..=PERSISTENCE_DOUBLINGS {
            margin = margin.min(at(t0 * 2f64.powi(j as i32))?);
        }
        if margin > 0.0 {
            return Ok(ConvexityReport {
                point: x.to_vec(),
                normal,
                margin,
                t_star: Some(t0),
                tested_range,
                verdict: Verdict::Strict,
            });
        }
    }
    Ok(ConvexityReport {
        point: x.to_vec(),
        normal,
        margin: last,
        t_star: None,
        tested_range,
        verdict: Verdict::Fail,
    })
}

/// Convexity check at `count` boundary samples, in sample order.
pub fn boundary_sweep(
    d: &Domain,
    ray_set: &ConeSet,
    count: usize,
    seed: Option<u64>,
) -> Result<Vec<ConvexityReport>> {
    let pts = d.boundary_samples(count, seed)?;
    pts.par_iter()
        .map(|x| strict_convexity_at(d, ray_set, x))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr;
    use crate::geometry::BoundingBox;

    fn dumbbell() -> Domain {
        Domain::from_expr(
            expr::parse("x2^2 + (x1^2 - 1)^2 - 1.2").unwrap(),
            2,
            BoundingBox {
                lo: vec![-2.0, -1.5],
                hi: vec![2.0, 1.5],
            },
            vec![0.0, 0.0],
        )
        .unwrap()
    }

    fn first_entry() -> ConeSet {
        ConeSet::psd(1).product_extend(2, &[0]).unwrap()
    }

    #[test]
    fn ball_is_strict_for_psd() {
        let d = Domain::unit_ball(2).unwrap();
        for r in boundary_sweep(&d, &ConeSet::psd(2), 32, None).unwrap() {
            assert_eq!(r.verdict, Verdict::Strict);
            assert!(r.margin > 0.0);
        }
    }

    #[test]
    fn dumbbell_waist_fails_for_first_entry() {
        let d = dumbbell();
        let f = first_entry();
        for y in [0.2f64.sqrt(), -(0.2f64.sqrt())] {
            let r = strict_convexity_at(&d, &f, &[0.0, y]).unwrap();
            assert_eq!(r.verdict, Verdict::Fail);
            assert!((r.margin + 4.0).abs() < 1e-9, "{r:?}");
        }
        // a point whose normal has an e₁ component recovers once t is large
        let x = d.boundary_project(&[0.05, 0.5]).unwrap();
        let r = strict_convexity_at(&d, &f, &x).unwrap();
        assert_eq!(r.verdict, Verdict::Strict);
    }

    #[test]
    fn verdict_ignores_positive_factor() {
        let d = Domain::ellipsoid(&[0.0, 0.0], &[2.0, 1.0]).unwrap();
        let du = d.with_factor("2 + sin(x1)").unwrap();
        for f in [ConeSet::psd(2), first_entry(), ConeSet::harm(2)] {
            for x in d.boundary_samples(20, None).unwrap() {
                let a = strict_convexity_at(&d, &f, &x).unwrap().verdict;
                let b = strict_convexity_at(&du, &f, &x).unwrap().verdict;
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn ladder_agrees_with_normal_shift_search() {
        // a B ∈ Int F⃗ with the same tangential block exists iff the ladder passes
        let d = dumbbell();
        let f = first_entry();
        for x in d.boundary_samples(64, None).unwrap() {
            let der = d.derivatives(&x).unwrap();
            let pn = SymMatrix::outer(&d.unit_normal(&x).unwrap());
            let found = (-10..=40).any(|k| {
                let s = 2f64.powi(k);
                ray_defect(&f, &(&der.hessian + &(&pn * s))).unwrap() > 0.0
            });
            let ladder = strict_convexity_at(&d, &f, &x).unwrap().verdict == Verdict::Strict;
            assert_eq!(found, ladder, "{x:?}");
        }
    }
}
