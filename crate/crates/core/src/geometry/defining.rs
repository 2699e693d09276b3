//! Global defining functions that are strict of ray type on all of `Ω̄`.
//!
//! The construction repairs `ρ` near the boundary with `ρ̃ = (e^{Cρ} − 1)/C`, whose Hessian
//! `e^{Cρ}(Hess ρ + C∇ρ∇ρᵀ)` is a positive multiple of the normal ladder at every point.
//! Deep inside, where `ρ̃` may fail, it is replaced by the bowl `ψ = −r + δ|x − x₀|²`
//! through the regularized maximum. Every stage is verified on samples.

use rayon::prelude::*;
use serde::Serialize;

use super::{smooth_max, Domain};
use crate::cones::{ray_defect, ray_scales, ConeSet};
use crate::error::{ConstructionStage, Error, Result};
use crate::expr::Derivatives;
use crate::symmat::SymMatrix;

#[derive(Debug, Clone, Serialize)]
pub struct DefiningConfig {
    pub boundary_samples: usize,
    /// Lattice points per box side for the interior sample.
    pub interior_per_axis: usize,
    /// Inward offsets of the collar sample, as fractions of the box diameter.
    pub collar_offsets: Vec<f64>,
    /// The repair constant is tried at `0` and `2ᵏ`, `k = 0..=max_repair_doublings`.
    pub max_repair_doublings: u32,
    /// Doublings of the scale `C′` in the final membership check.
    pub scale_doublings: u32,
    pub seed: Option<u64>,
}

impl DefiningConfig {
    pub fn for_dim(n: usize) -> Self {
        Self {
            boundary_samples: super::DEFAULT_BOUNDARY_SAMPLES,
            interior_per_axis: match n {
                1 | 2 => 161,
                3 => 41,
                _ => 11,
            },
            collar_offsets: vec![1e-4, 1e-3, 1e-2],
            max_repair_doublings: 40,
            scale_doublings: 8,
            seed: None,
        }
    }
}

/// `M_ε(ρ̃, ψ)`: equals `ρ̃` near `∂Ω` and `ψ` deep inside.
#[derive(Debug, Clone)]
pub struct GlobalDefining {
    domain: Domain,
    repair: f64,
    center: Vec<f64>,
    r: f64,
    delta: f64,
    eps: f64,
}

impl GlobalDefining {
    fn repaired(&self, x: &[f64]) -> Result<Derivatives> {
        repaired(&self.domain, self.repair, x)
    }

    pub fn derivatives(&self, x: &[f64]) -> Result<Derivatives> {
        let a = self.repaired(x)?;
        let n = x.len();
        let d2: f64 = x.iter().zip(&self.center).map(|(p, c)| (p - c) * (p - c)).sum();
        let psi = -self.r + self.delta * d2;
        let psi_grad: Vec<f64> = x
            .iter()
            .zip(&self.center)
            .map(|(p, c)| 2.0 * self.delta * (p - c))
            .collect();
        let m = smooth_max(a.value, psi, self.eps)?;
        let gradient: Vec<f64> = (0..n)
            .map(|i| m.d1 * a.gradient[i] + m.d2 * psi_grad[i])
            .collect();
        let diff: Vec<f64> = (0..n).map(|i| a.gradient[i] - psi_grad[i]).collect();
        let mut hessian = a.hessian.scaled(m.d1).add_scaled_identity(2.0 * self.delta * m.d2);
        hessian += &SymMatrix::outer(&diff).scaled(m.curvature);
        Ok(Derivatives {
            value: m.value,
            gradient,
            hessian,
        })
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.derivatives(x)?.value)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
}

/// `(e^{Cρ} − 1)/C` and its derivatives; `C = 0` returns `ρ`.
fn repaired(d: &Domain, c: f64, x: &[f64]) -> Result<Derivatives> {
    let base = d.derivatives(x)?;
    if c == 0.0 {
        return Ok(base);
    }
    let e = (c * base.value).exp();
    let gradient = base.gradient.iter().map(|g| e * g).collect();
    let mut hessian = base.hessian.clone();
    hessian += &SymMatrix::outer(&base.gradient).scaled(c);
    Ok(Derivatives {
        value: (c * base.value).exp_m1() / c,
        gradient,
        hessian: hessian.scaled(e),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GlobalDefiningReport {
    /// Repair constant `C`.
    pub repair_constant: f64,
    /// Width `c₀` of the sampled collar `{−c₀ ≤ ρ̃ ≤ 0}` where `ρ̃` is strict.
    pub collar_width: f64,
    pub r: f64,
    pub delta: f64,
    pub blend_eps: f64,
    pub center: Vec<f64>,
    pub boundary_samples: usize,
    pub collar_samples: usize,
    pub interior_samples: usize,
    /// Smallest ray defect of the final Hessian over all samples.
    pub min_ray_defect: f64,
    pub worst_point: Vec<f64>,
    /// `ε′` with `C′·Hess(ρ̂ − ε′½|x|²) ∈ F` on the scale ladder.
    pub eps_prime: f64,
    /// Base `R′` of the scale ladder `R′·2ᵏ`.
    pub r_prime: f64,
    pub scale_doublings: u32,
}

struct Sample {
    x: Vec<f64>,
    value: f64,
    margin: f64,
}

fn worst<'a>(s: impl Iterator<Item = &'a Sample>) -> Option<&'a Sample> {
    s.min_by(|a, b| a.margin.total_cmp(&b.margin))
}

fn failure(stage: ConstructionStage, s: Option<&Sample>) -> Error {
    match s {
        Some(s) => Error::ConstructionFailed {
            stage,
            point: s.x.clone(),
            value: s.margin,
        },
        None => Error::ConstructionFailed {
            stage,
            point: Vec::new(),
            value: f64::NAN,
        },
    }
}

/// Builds and verifies a global defining function strict of ray type.
///
/// `ray_set` is queried only through the ray defect, so passing `F` itself tests
/// membership in `F⃗`. The last stage checks `C′(Hess ρ̂ − ε′I) ∈ F` for
/// `C′ ∈ {R′, 2R′, …, 2⁸R′}`.
pub fn construct_global_defining(
    d: &Domain,
    ray_set: &ConeSet,
    f: &ConeSet,
    cfg: &DefiningConfig,
) -> Result<(GlobalDefining, GlobalDefiningReport)> {
    let n = d.dim();
    for set in [ray_set, f] {
        if set.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: set.dim(),
            });
        }
    }
    let mut boundary = d.axis_boundary_points()?;
    boundary.extend(d.boundary_samples(cfg.boundary_samples, cfg.seed)?);
    let diam = d.bounding_box().diameter();
    let mut collar = boundary.clone();
    for x in &boundary {
        let nu = d.unit_normal(x)?;
        for &s in &cfg.collar_offsets {
            let y: Vec<f64> = x.iter().zip(&nu).map(|(p, q)| p - s * diam * q).collect();
            if d.value(&y)? < 0.0 {
                collar.push(y);
            }
        }
    }
    let measure = |c: f64, pts: &[Vec<f64>]| -> Result<Vec<Sample>> {
        pts.par_iter()
            .map(|x| {
                let r = repaired(d, c, x)?;
                // for cones the factor e^{Cρ} cannot change the sign, and dropping it avoids underflow
                let h = if ray_set.is_cone() && c > 0.0 {
                    let base = d.derivatives(x)?;
                    let mut h = base.hessian;
                    h += &SymMatrix::outer(&base.gradient).scaled(c);
                    h
                } else {
                    r.hessian
                };
                Ok(Sample {
                    x: x.clone(),
                    value: r.value,
                    margin: ray_defect(ray_set, &h)?,
                })
            })
            .collect()
    };

    // (i) boundary repair
    let ladder = std::iter::once(0.0).chain((0..=cfg.max_repair_doublings).map(|k| 2f64.powi(k as i32)));
    let mut repair = None;
    let mut last = Vec::new();
    for c in ladder {
        last = measure(c, &collar)?;
        if last.iter().all(|s| s.margin > 0.0) {
            repair = Some(c);
            break;
        }
    }
    let repair = repair.ok_or_else(|| failure(ConstructionStage::BoundaryRepair, worst(last.iter())))?;

    // (ii) collar width from the first non-strict interior level
    let interior = d.interior_grid(cfg.interior_per_axis)?;
    let inner = measure(repair, &interior)?;
    let identity_margin = ray_defect(ray_set, &SymMatrix::identity(n))?;
    if !(identity_margin > 0.0) {
        return Err(Error::ConstructionFailed {
            stage: ConstructionStage::Collar,
            point: d.interior_point().to_vec(),
            value: identity_margin,
        });
    }
    let depth = inner
        .iter()
        .chain(&last)
        .map(|s| -s.value)
        .fold(0.0, f64::max);
    let first_bad = inner
        .iter()
        .filter(|s| s.margin <= 0.0)
        .map(|s| -s.value)
        .fold(f64::INFINITY, f64::min);
    let c0 = if first_bad.is_finite() { 0.9 * first_bad } else { depth };
    if !(c0 > 0.0) {
        return Err(failure(ConstructionStage::Collar, worst(inner.iter())));
    }
    let center = d.interior_point().to_vec();
    let reach = boundary
        .iter()
        .chain(&interior)
        .map(|x| x.iter().zip(&center).map(|(p, q)| (p - q) * (p - q)).sum::<f64>())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    // ψ ≤ −c₀/2 wherever ρ̃ ≥ −c₀/4, and ψ ≥ ρ̃ + c₀/4 wherever ρ̃ ≤ −c₀
    let delta = c0 / (4.0 * reach);
    let r = 0.75 * c0;
    let eps = c0 / 8.0;
    let g = GlobalDefining {
        domain: d.clone(),
        repair,
        center: center.clone(),
        r,
        delta,
        eps,
    };

    // (iii) the blend must still define Ω on the samples
    let all: Vec<Vec<f64>> = boundary.iter().chain(&collar[boundary.len()..]).chain(&interior).cloned().collect();
    let finals: Vec<(Sample, SymMatrix)> = all
        .par_iter()
        .map(|x| {
            let v = g.derivatives(x)?;
            let m = ray_defect(ray_set, &v.hessian)?;
            Ok((
                Sample {
                    x: x.clone(),
                    value: v.value,
                    margin: m,
                },
                v.hessian,
            ))
        })
        .collect::<Result<_>>()?;
    for (k, (s, _)) in finals.iter().enumerate() {
        let on_boundary = k < boundary.len();
        let ok = if on_boundary {
            s.value.abs() <= 1e-9
        } else {
            s.value < 0.0 || d.value(&s.x)? == 0.0
        };
        if !ok {
            return Err(Error::ConstructionFailed {
                stage: ConstructionStage::Blend,
                point: s.x.clone(),
                value: s.value,
            });
        }
    }

    // (iv) interior verification
    let w = worst(finals.iter().map(|(s, _)| s)).expect("sample set is nonempty");
    if !(w.margin > 0.0) {
        return Err(failure(ConstructionStage::InteriorVerification, Some(w)));
    }
    let (min_ray_defect, worst_point) = (w.margin, w.x.clone());

    // (v) scaled membership of Hess(ρ̂ − ε′½|x|²)
    let margins: Vec<f64> = finals
        .par_iter()
        .map(|(_, h)| {
            if f.is_cone() {
                Ok(-f.edge_threshold(h)?)
            } else {
                ray_defect(f, h)
            }
        })
        .collect::<Result<_>>()?;
    let (k_min, m_min) = margins
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("sample set is nonempty");
    if !(m_min > 0.0) {
        return Err(Error::ConstructionFailed {
            stage: ConstructionStage::ScaledMembership,
            point: finals[k_min].0.x.clone(),
            value: m_min,
        });
    }
    let eps_prime = 0.5 * m_min;
    let r_prime = ray_scales(f)[0];
    for (s, h) in &finals {
        let shifted = h.add_scaled_identity(-eps_prime);
        for k in 0..=cfg.scale_doublings {
            let c = r_prime * 2f64.powi(k as i32);
            let v = f.defect(&shifted.scaled(c))?;
            if v < 0.0 {
                return Err(Error::ConstructionFailed {
                    stage: ConstructionStage::ScaledMembership,
                    point: s.x.clone(),
                    value: v,
                });
            }
        }
    }

    let report = GlobalDefiningReport {
        repair_constant: repair,
        collar_width: c0,
        r,
        delta,
        blend_eps: eps,
        center,
        boundary_samples: boundary.len(),
        collar_samples: collar.len() - boundary.len(),
        interior_samples: interior.len(),
        min_ray_defect,
        worst_point,
        eps_prime,
        r_prime,
        scale_doublings: cfg.scale_doublings,
    };
    Ok((g, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr;
    use crate::geometry::BoundingBox;

    fn small_cfg(n: usize) -> DefiningConfig {
        DefiningConfig {
            boundary_samples: 128,
            interior_per_axis: 61,
            ..DefiningConfig::for_dim(n)
        }
    }

    #[test]
    fn ball_field_is_strictly_convex() {
        let d = Domain::from_expr(
            expr::parse("x1^2 + x2^2 - 1").unwrap(),
            2,
            BoundingBox {
                lo: vec![-1.5, -1.5],
                hi: vec![1.5, 1.5],
            },
            vec![0.0, 0.0],
        )
        .unwrap();
        let p = ConeSet::psd(2);
        let (g, rep) = construct_global_defining(&d, &p, &p, &small_cfg(2)).unwrap();
        assert!(rep.min_ray_defect > 0.0);
        assert!(rep.eps_prime > 0.0);
        for x in d.interior_grid(21).unwrap() {
            assert!(g.derivatives(&x).unwrap().hessian.lambda_min().unwrap() > 0.0);
        }
    }

    #[test]
    fn corrupted_ellipse_is_repaired() {
        let d = Domain::ellipsoid(&[0.0, 0.0], &[2.0, 1.0]).unwrap();
        let bad = d.with_factor("3 + x1").unwrap();
        let p = ConeSet::psd(2);
        let (_, rep) = construct_global_defining(&bad, &p, &p, &small_cfg(2)).unwrap();
        assert!(rep.repair_constant > 0.0);
        assert!(rep.min_ray_defect > 0.0);
    }

    #[test]
    fn dumbbell_fails_at_boundary_repair() {
        let d = Domain::from_expr(
            expr::parse("x2^2 + (x1^2 - 1)^2 - 1.2").unwrap(),
            2,
            BoundingBox {
                lo: vec![-2.0, -1.5],
                hi: vec![2.0, 1.5],
            },
            vec![0.0, 0.0],
        )
        .unwrap();
        let f = ConeSet::psd(1).product_extend(2, &[0]).unwrap();
        let mut cfg = small_cfg(2);
        cfg.max_repair_doublings = 12;
        match construct_global_defining(&d, &f, &f, &cfg) {
            Err(Error::ConstructionFailed { stage, .. }) => {
                assert_eq!(stage, ConstructionStage::BoundaryRepair)
            }
            other => panic!("{:?}", other.map(|r| r.1)),
        }
    }

    #[test]
    fn blend_matches_repair_near_boundary() {
        let d = Domain::ellipsoid(&[0.0, 0.0], &[2.0, 1.0]).unwrap();
        let p = ConeSet::psd(2);
        let (g, _) = construct_global_defining(&d, &p, &p, &small_cfg(2)).unwrap();
        for x in d.boundary_samples(32, None).unwrap() {
            let a = g.derivatives(&x).unwrap();
            let b = repaired(&d, g.repair, &x).unwrap();
            assert_eq!(a.value, b.value);
            assert!((&a.hessian - &b.hessian).max_abs() == 0.0);
        }
    }
}
