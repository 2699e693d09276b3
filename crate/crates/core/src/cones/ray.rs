//! Ray sets and free dimension.
//!
//! For a cone the ray set is the set itself. For other sets, membership of `A` in the
//! interior of the ray set is certified at scale: `C(A − εI) ∈ F` for every `C` on a
//! doubling ladder starting at a large `R`. The reported margin is the largest such `ε`.

use serde::Serialize;

use super::ConeSet;
use crate::error::Result;
use crate::sampling::{random_orthonormal, rng, DEFAULT_SEED};
use crate::symmat::{orthogonal_complement, SymMatrix};

/// Number of doublings after `R` on the scale ladder.
pub const RAY_LADDER_STEPS: u32 = 10;

const RAY_BASE_SCALE: f64 = 1e6;
const RAY_RESOLUTION: f64 = 1e-6;

/// Threshold above which a ray defect counts as an interior certificate.
pub(crate) const STRICT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct RayDefectReport {
    /// Defect for cones; the strictness margin `ε` otherwise.
    pub value: f64,
    pub cone: bool,
    /// Smallest and largest scale tested (`R` and `2¹⁰R`); zero for cones.
    pub ladder: (f64, f64),
    /// Bisection interval `[−E, E]` for the margin; zero for cones.
    pub search_bound: f64,
}

/// Scale ladder `R·2ᵏ`, `k = 0..=10`, with `R = 10⁶·max(1, |b₀|)` for the vertex
/// threshold `b₀` of `F` at zero. Cones have the single scale 1.
pub fn ray_scales(f: &ConeSet) -> Vec<f64> {
    if f.is_cone() {
        return vec![1.0];
    }
    let vertex = f.edge_threshold(&SymMatrix::zeros(f.dim())).unwrap_or(0.0);
    let r = RAY_BASE_SCALE * vertex.abs().max(1.0);
    (0..=RAY_LADDER_STEPS).map(|k| r * 2f64.powi(k as i32)).collect()
}

/// Ray defect: positive certifies `A ∈ Int F⃗`, negative certifies failure at the tested scale.
pub fn ray_defect(f: &ConeSet, a: &SymMatrix) -> Result<f64> {
    Ok(ray_defect_report(f, a)?.value)
}

pub fn ray_defect_report(f: &ConeSet, a: &SymMatrix) -> Result<RayDefectReport> {
    if f.is_cone() {
        return Ok(RayDefectReport {
            value: f.defect(a)?,
            cone: true,
            ladder: (0.0, 0.0),
            search_bound: 0.0,
        });
    }
    let scales = ray_scales(f);
    let holds = |eps: f64| -> Result<bool> {
        let shifted = a.add_scaled_identity(-eps);
        for &c in &scales {
            if f.defect(&shifted.scaled(c))? < 0.0 {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let bound = 1.0 + a.max_abs();
    let report = |value| RayDefectReport {
        value,
        cone: false,
        ladder: (scales[0], scales[scales.len() - 1]),
        search_bound: bound,
    };
    if !holds(-bound)? {
        return Ok(report(-bound));
    }
    if holds(bound)? {
        return Ok(report(bound));
    }
    let (mut lo, mut hi) = (-bound, bound);
    let resolution = RAY_RESOLUTION * bound;
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(report(lo))
}

#[derive(Debug, Clone, Serialize)]
pub struct FreeDimReport {
    pub free_dim: usize,
    /// Orthonormal basis of a maximal free subspace `W = N⊥`.
    pub witness_free_subspace: Vec<Vec<f64>>,
    /// Orthonormal basis of `N` with `P_N ∈ Int F⃗`.
    pub witness_strict_normal: Vec<Vec<f64>>,
    /// Ray defect at `P_N`.
    pub witness_margin: f64,
    pub samples_used: usize,
}

/// Random frames tried per subspace dimension after the coordinate subspaces.
pub const FREE_DIM_RANDOM_FRAMES: usize = 1000;

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `n − min{dim N : P_N ∈ Int F⃗}`, searching coordinate subspaces and then seeded random
/// frames in each dimension. For random frames the answer is a lower bound.
pub fn free_dim(f: &ConeSet, seed: Option<u64>) -> Result<FreeDimReport> {
    let n = f.dim();
    let mut rng = rng(seed.unwrap_or(DEFAULT_SEED));
    let mut samples = 0;
    for k in 1..=n {
        let mut candidates: Vec<Vec<Vec<f64>>> = combinations(n, k)
            .into_iter()
            .map(|c| {
                c.iter()
                    .map(|&i| {
                        let mut e = vec![0.0; n];
                        e[i] = 1.0;
                        e
                    })
                    .collect()
            })
            .collect();
        if k < n {
            candidates.extend((0..FREE_DIM_RANDOM_FRAMES).map(|_| random_orthonormal(&mut rng, n, k)));
        }
        for basis in candidates {
            samples += 1;
            let p = SymMatrix::projection(&basis, n)?;
            let margin = ray_defect(f, &p)?;
            if margin > STRICT_TOL {
                return Ok(FreeDimReport {
                    free_dim: n - k,
                    witness_free_subspace: orthogonal_complement(&basis, n),
                    witness_strict_normal: basis,
                    witness_margin: margin,
                    samples_used: samples,
                });
            }
        }
    }
    Ok(FreeDimReport {
        free_dim: 0,
        witness_free_subspace: Vec::new(),
        witness_strict_normal: Vec::new(),
        witness_margin: f64::NAN,
        samples_used: samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_sym;
    use crate::symmat::Field;

    #[test]
    fn cone_ray_defect_is_defect() {
        let f = ConeSet::psd(3);
        let a = SymMatrix::diag(&[0.2, 1.0, 3.0]);
        assert_eq!(ray_defect(&f, &a).unwrap(), 0.2);
    }

    #[test]
    fn translate_of_psd_has_psd_ray_set() {
        let mut r = rng(31);
        for _ in 0..5 {
            let a0 = random_sym(&mut r, 3).scaled(5.0);
            let f = ConeSet::psd(3).translate(&a0).unwrap();
            let m = ray_defect(&f, &SymMatrix::identity(3)).unwrap();
            assert!(m > 0.0);
            // F⃗ = 𝒫 regardless of the vertex, so the margin tracks λ_min
            let b = SymMatrix::diag(&[0.5, 2.0, 4.0]);
            let rep = ray_defect_report(&f, &b).unwrap();
            assert!((rep.value - 0.5).abs() < 1e-4, "{rep:?}");
            let c = SymMatrix::diag(&[-0.5, 2.0, 4.0]);
            assert!(ray_defect(&f, &c).unwrap() < 0.0);
        }
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(3, 1).len(), 3);
    }

    #[test]
    fn free_dimensions_of_psd_and_ptilde() {
        assert_eq!(free_dim(&ConeSet::psd(3), None).unwrap().free_dim, 0);
        let r = free_dim(&ConeSet::ptilde(3), None).unwrap();
        assert_eq!(r.free_dim, 2);
        assert_eq!(r.witness_free_subspace.len(), 2);
    }

    #[test]
    fn free_dimension_of_complex_lines() {
        let f = ConeSet::geometric(1, Field::Complex, 4).unwrap();
        let r = free_dim(&f, None).unwrap();
        assert_eq!(r.free_dim, 2);
        assert!(r.witness_margin > 0.0);
    }

    #[test]
    fn free_dimension_of_lag() {
        let r = free_dim(&ConeSet::lag(4).unwrap(), None).unwrap();
        assert_eq!(r.free_dim, 2);
    }
}
