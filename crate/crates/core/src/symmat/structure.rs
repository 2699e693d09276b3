//! Complex and quaternionic structures on ℝᴺ and the hermitian/skew parts they induce.
//!
//! Coordinates are grouped per 𝕂-coordinate. For ℂⁿ ≅ ℝ²ⁿ the pair `(e₂ₖ, e₂ₖ₊₁)` is one
//! complex coordinate and `J e₂ₖ = e₂ₖ₊₁`. For ℍⁿ ≅ ℝ⁴ⁿ a quaternion `a + bi + cj + dk`
//! occupies four consecutive slots; `I` and `J` are right multiplication by `i` and `j`,
//! and `K = IJ` (which is right multiplication by `-k`).

use serde::{Deserialize, Serialize};

use super::{Mat, SymMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    #[default]
    Real,
    Complex,
    Quaternionic,
}

impl Field {
    /// Real dimension of one 𝕂-coordinate.
    pub fn real_dim(self) -> usize {
        match self {
            Field::Real => 1,
            Field::Complex => 2,
            Field::Quaternionic => 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ComplexStructure {
    field: Field,
    k_dim: usize,
    /// `[]`, `[J]`, or `[I, J, K]`.
    ops: Vec<Mat>,
}

impl ComplexStructure {
    /// Structure on 𝕂ⁿ with `n = k_dim`, acting on ℝ^{n·dim 𝕂}.
    pub fn new(field: Field, k_dim: usize) -> Self {
        let real = k_dim * field.real_dim();
        let ops = match field {
            Field::Real => Vec::new(),
            Field::Complex => {
                let mut j = Mat::zeros(real, real);
                for b in 0..k_dim {
                    let (x, y) = (2 * b, 2 * b + 1);
                    j[(y, x)] = 1.0;
                    j[(x, y)] = -1.0;
                }
                vec![j]
            }
            Field::Quaternionic => {
                // right multiplication on (a, b, c, d):
                //   q·i = (-b, a, d, -c),  q·j = (-c, -d, a, b)
                let mut ri = Mat::zeros(real, real);
                let mut rj = Mat::zeros(real, real);
                for blk in 0..k_dim {
                    let o = 4 * blk;
                    let set = |m: &mut Mat, out: usize, inp: usize, s: f64| m[(o + out, o + inp)] = s;
                    set(&mut ri, 0, 1, -1.0);
                    set(&mut ri, 1, 0, 1.0);
                    set(&mut ri, 2, 3, 1.0);
                    set(&mut ri, 3, 2, -1.0);
                    set(&mut rj, 0, 2, -1.0);
                    set(&mut rj, 1, 3, -1.0);
                    set(&mut rj, 2, 0, 1.0);
                    set(&mut rj, 3, 1, 1.0);
                }
                let rk = ri.matmul(&rj);
                vec![ri, rj, rk]
            }
        };
        Self { field, k_dim, ops }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Number of 𝕂-coordinates.
    pub fn k_dim(&self) -> usize {
        self.k_dim
    }

    pub fn real_dim(&self) -> usize {
        self.k_dim * self.field.real_dim()
    }

    /// The structure matrices: empty, `[J]`, or `[I, J, K]`.
    pub fn operators(&self) -> &[Mat] {
        &self.ops
    }

    fn check_dim(&self, a: &SymMatrix) -> Result<()> {
        if a.dim() != self.real_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.real_dim(),
                found: a.dim(),
            });
        }
        Ok(())
    }
}

/// `X A X` for a signed permutation `X`; exact.
fn sandwich(a: &SymMatrix, x: &Mat) -> SymMatrix {
    let m = x.matmul(&a.to_mat()).matmul(x);
    SymMatrix::symmetrize(&m)
}

/// Hermitian part `A_𝕂`: `A`, `½(A − JAJ)`, or `¼(A − IAI − JAJ − KAK)`.
pub fn hermitian_part(a: &SymMatrix, s: &ComplexStructure) -> Result<SymMatrix> {
    s.check_dim(a)?;
    if s.ops.is_empty() {
        return Ok(a.clone());
    }
    let mut acc = a.clone();
    for x in &s.ops {
        acc = &acc - &sandwich(a, x);
    }
    Ok(acc.scaled(1.0 / (s.ops.len() + 1) as f64))
}

/// Skew-hermitian part `½(A + JAJ)`; only defined for complex structures.
pub fn skew_hermitian_part(a: &SymMatrix, s: &ComplexStructure) -> Result<SymMatrix> {
    s.check_dim(a)?;
    if s.field != Field::Complex {
        return Err(Error::InvalidParameter(
            "skew-hermitian part needs a complex structure".into(),
        ));
    }
    let jaj = sandwich(a, &s.ops[0]);
    Ok((a + &jaj).scaled(0.5))
}

/// The `n` 𝕂-eigenvalues of `A_𝕂`, ascending: one representative per multiplicity cluster.
///
/// Eigenvalues of `A_𝕂` come in clusters of size `dim 𝕂`; each representative is the
/// cluster mean.
pub fn k_eigenvalues(a: &SymMatrix, s: &ComplexStructure) -> Result<Vec<f64>> {
    let ak = hermitian_part(a, s)?;
    let ev = ak.eig_sorted()?;
    let m = s.field.real_dim();
    Ok(ev
        .chunks(m)
        .map(|c| c.iter().sum::<f64>() / m as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_dev(a: &Mat, b: &Mat) -> f64 {
        a.max_abs_diff(b)
    }

    #[test]
    fn complex_j_squares_to_minus_identity() {
        let s = ComplexStructure::new(Field::Complex, 3);
        let j = &s.operators()[0];
        assert!(max_dev(&j.matmul(j), &Mat::identity(6).scaled(-1.0)) == 0.0);
        assert!(max_dev(&j.matmul(&j.transpose()), &Mat::identity(6)) == 0.0);
    }

    #[test]
    fn quaternion_relations() {
        let s = ComplexStructure::new(Field::Quaternionic, 2);
        let [i, j, k] = [&s.operators()[0], &s.operators()[1], &s.operators()[2]];
        let minus_id = Mat::identity(8).scaled(-1.0);
        for x in [i, j, k] {
            assert_eq!(max_dev(&x.matmul(x), &minus_id), 0.0);
            assert_eq!(max_dev(&x.matmul(&x.transpose()), &Mat::identity(8)), 0.0);
        }
        assert_eq!(max_dev(&i.matmul(j), k), 0.0);
        assert_eq!(max_dev(&i.matmul(j), &j.matmul(i).scaled(-1.0)), 0.0);
        assert_eq!(max_dev(&j.matmul(k), &k.matmul(j).scaled(-1.0)), 0.0);
        assert_eq!(max_dev(&k.matmul(i), &i.matmul(k).scaled(-1.0)), 0.0);
    }

    #[test]
    fn real_hermitian_part_is_identity_map() {
        let a = SymMatrix::from_fn(3, |i, j| (i + 2 * j) as f64);
        let s = ComplexStructure::new(Field::Real, 3);
        assert_eq!(hermitian_part(&a, &s).unwrap(), a);
    }

    #[test]
    fn complex_hermitian_part_of_diag() {
        let s = ComplexStructure::new(Field::Complex, 1);
        let h = hermitian_part(&SymMatrix::diag(&[2.0, 0.0]), &s).unwrap();
        assert_eq!(h, SymMatrix::identity(2));
    }

    #[test]
    fn skew_part_of_diag_and_scalar() {
        let s = ComplexStructure::new(Field::Complex, 1);
        let (a, b) = (3.0, -1.0);
        let k = skew_hermitian_part(&SymMatrix::diag(&[a, b]), &s).unwrap();
        assert_eq!(k, SymMatrix::diag(&[(a - b) / 2.0, (b - a) / 2.0]));
        let z = skew_hermitian_part(&SymMatrix::scalar(2, 4.0), &s).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let s = ComplexStructure::new(Field::Complex, 2);
        assert!(matches!(
            hermitian_part(&SymMatrix::identity(3), &s),
            Err(Error::DimensionMismatch { .. })
        ));
        let r = ComplexStructure::new(Field::Real, 2);
        assert!(skew_hermitian_part(&SymMatrix::identity(2), &r).is_err());
    }
}
