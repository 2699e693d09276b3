//! Catalog of Dirichlet sets from calibrated and hermitian geometry.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use super::{check_dim, ConeSet, Node};
use crate::error::{Error, Result};
use crate::sampling::{random_sym, rng};
use crate::symmat::{
    char_poly_shifted, k_eigenvalues, skew_hermitian_part, sturm_largest_root,
    ComplexStructure, Field, Poly, SymMatrix,
};

type PolyFn = dyn Fn(&SymMatrix) -> Result<Vec<f64>> + Send + Sync;

/// A hyperbolic polynomial `M`, given through `A ↦ coefficients of t ↦ M(tI + A)`.
#[derive(Clone)]
pub enum GardingPoly {
    /// `det`, whose Gårding cone is 𝒫.
    Det,
    /// Elementary symmetric `σ_k` of the eigenvalues, normalized so that `M(I) = 1`.
    Sigma(usize),
    Custom(Arc<PolyFn>),
}

impl fmt::Debug for GardingPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GardingPoly::Det => f.write_str("Det"),
            GardingPoly::Sigma(k) => write!(f, "Sigma({k})"),
            GardingPoly::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl GardingPoly {
    /// Ascending coefficients of `t ↦ M(tI + A)`.
    pub fn pencil(&self, a: &SymMatrix) -> Result<Vec<f64>> {
        match self {
            GardingPoly::Det => Ok(char_poly_shifted(a).coeffs().to_vec()),
            GardingPoly::Sigma(k) => {
                let n = a.dim();
                // σ_k(tI + A) = (1/(n−k)!) d^{n−k}/dt^{n−k} det(tI + A)
                let mut p = char_poly_shifted(a);
                for _ in 0..(n - k) {
                    p = p.derivative();
                }
                let norm = binomial(n, *k) * factorial(n - k);
                Ok(p.scale(1.0 / norm).coeffs().to_vec())
            }
            GardingPoly::Custom(f) => f(a),
        }
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn structure(field: Field, n: usize) -> Result<ComplexStructure> {
    let m = field.real_dim();
    if !n.is_multiple_of(m) {
        return Err(Error::InvalidParameter(format!(
            "dimension {n} is not a multiple of {m} for the {field:?} field"
        )));
    }
    Ok(ComplexStructure::new(field, n / m))
}

fn field_tag(field: Field) -> &'static str {
    match field {
        Field::Real => "R",
        Field::Complex => "C",
        Field::Quaternionic => "H",
    }
}

impl ConeSet {
    /// 𝒫 = {A ⪰ 0}, defect `λ_min`.
    pub fn psd(n: usize) -> ConeSet {
        Self::from_node(n, true, "P".into(), Node::Psd)
    }

    /// 𝒫̃ = {λ_max ≥ 0}, the subaffine set.
    pub fn ptilde(n: usize) -> ConeSet {
        Self::from_node(n, true, "Ptilde".into(), Node::PsdTilde)
    }

    /// {tr A ≥ 0}, defect `tr(A)/n`.
    pub fn harm(n: usize) -> ConeSet {
        Self::from_node(n, true, "harm".into(), Node::Harm)
    }

    /// Half-space `{⟨A₀, A⟩ ≥ c}`; Dirichlet exactly when `A₀ ⪰ 0`, `A₀ ≠ 0`.
    pub fn halfspace(a0: &SymMatrix, c: f64) -> Result<ConeSet> {
        check_dim(a0.dim())?;
        if !c.is_finite() || !a0.is_finite() {
            return Err(Error::InvalidParameter("half-space data must be finite".into()));
        }
        if !a0.is_psd(1e-12 * a0.max_abs().max(1.0))? || a0.trace() <= 0.0 {
            return Err(Error::InvalidParameter(
                "half-space normal must be positive semidefinite and nonzero".into(),
            ));
        }
        Ok(Self::from_node(
            a0.dim(),
            c == 0.0,
            format!("halfspace(c={c})"),
            Node::Halfspace { a0: a0.clone(), c },
        ))
    }

    /// Branch `P_q = {λ_{q+1}(A_𝕂) ≥ 0}` of the (𝕂-)Monge–Ampère equation.
    pub fn branch(q: usize, field: Field, n: usize) -> Result<ConeSet> {
        check_dim(n)?;
        let s = structure(field, n)?;
        if q >= s.k_dim() {
            return Err(Error::InvalidParameter(format!(
                "branch index q = {q} must be below {}",
                s.k_dim()
            )));
        }
        Ok(Self::from_node(
            n,
            true,
            format!("branch_{q}({})", field_tag(field)),
            Node::Branch { q, s },
        ))
    }

    /// Geometric set `𝒫(G(p, 𝕂ⁿ))`: sum of the `p` smallest 𝕂-eigenvalues is `≥ 0`.
    pub fn geometric(p: usize, field: Field, n: usize) -> Result<ConeSet> {
        check_dim(n)?;
        let s = structure(field, n)?;
        if p == 0 || p > s.k_dim() {
            return Err(Error::InvalidParameter(format!(
                "p = {p} must lie in 1..={}",
                s.k_dim()
            )));
        }
        Ok(Self::from_node(
            n,
            true,
            format!("PG({p},{})", field_tag(field)),
            Node::Geometric { p, s },
        ))
    }

    /// Next-tier set `P_q(G(p, ℝⁿ)) = {λ_{q+1} + ⋯ + λ_{q+p} ≥ 0}`.
    pub fn next_tier(p: usize, q: usize, n: usize) -> Result<ConeSet> {
        check_dim(n)?;
        if p == 0 || p + q > n {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= p and p + q <= n, got p = {p}, q = {q}, n = {n}"
            )));
        }
        Ok(Self::from_node(
            n,
            true,
            format!("PqG(p={p},q={q})"),
            Node::NextTier { p, q },
        ))
    }

    /// Lagrangian set on `ℂᵐ = ℝⁿ`: `tr(A)/2 − (sum of the nonnegative eigenvalues of A_skew) ≥ 0`.
    pub fn lag(n: usize) -> Result<ConeSet> {
        check_dim(n)?;
        let s = structure(Field::Complex, n)?;
        Ok(Self::from_node(n, true, "LAG".into(), Node::Lag { s }))
    }

    /// Isotropic set `ISO_p = {tr_ξ A ≥ 0 for every isotropic p-plane ξ}` on `ℂᵐ = ℝⁿ`.
    ///
    /// Closed forms exist at the two ends: every line is isotropic, so `ISO_1 = 𝒫`, and
    /// isotropic `m`-planes are Lagrangian, so `ISO_m = LAG`. The formula
    /// `(p/n)·tr A − (top p skew eigenvalues)` is not monotone for `1 < p < m` (it is
    /// negative at a rank-one projection), so those `p` are rejected.
    pub fn iso(p: usize, n: usize) -> Result<ConeSet> {
        check_dim(n)?;
        let s = structure(Field::Complex, n)?;
        if p != 1 && p != s.k_dim() {
            return Err(Error::InvalidParameter(format!(
                "ISO_p has a closed form only for p = 1 or p = {}, got p = {p}",
                s.k_dim()
            )));
        }
        let node = if p == s.k_dim() {
            Node::Lag { s }
        } else {
            Node::Psd
        };
        Ok(Self::from_node(n, true, format!("ISO({p})"), node))
    }

    /// Special Lagrangian set `{Σ arctan λᵢ ≥ c}`, `|c| < nπ/2`.
    ///
    /// The defect is not homogeneous; the set is a cone only for `c = 0` and `n ≤ 2`.
    pub fn special_lagrangian(c: f64, n: usize) -> Result<ConeSet> {
        check_dim(n)?;
        if !(c.abs() < n as f64 * FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!(
                "special Lagrangian phase {c} must satisfy |c| < {n}π/2"
            )));
        }
        Ok(Self::from_node(
            n,
            c == 0.0 && n <= 2,
            format!("SL({c})"),
            Node::SpecialLagrangian { c },
        ))
    }

    /// Gårding cone of `det`; equals 𝒫, computed through the pencil polynomial.
    pub fn garding_det(n: usize) -> Result<ConeSet> {
        check_dim(n)?;
        Ok(Self::from_node(
            n,
            true,
            "garding(det)".into(),
            Node::Garding {
                poly: GardingPoly::Det,
            },
        ))
    }

    /// Gårding cone `Γ_k` of the elementary symmetric function `σ_k`.
    pub fn sigma_k(k: usize, n: usize) -> Result<ConeSet> {
        check_dim(n)?;
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!("sigma_k needs 1 <= k <= n, got k = {k}")));
        }
        Ok(Self::from_node(
            n,
            true,
            format!("sigma_{k}"),
            Node::Garding {
                poly: GardingPoly::Sigma(k),
            },
        ))
    }

    /// Gårding cone of a user polynomial, given through its pencil `A ↦ M(tI + A)`.
    ///
    /// The pencil is checked on seeded samples: `M(I) = 1` and all roots real.
    pub fn garding(
        n: usize,
        name: impl Into<String>,
        pencil: impl Fn(&SymMatrix) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Result<ConeSet> {
        check_dim(n)?;
        let poly = GardingPoly::Custom(Arc::new(pencil));
        let at_zero = Poly::new(poly.pencil(&SymMatrix::zeros(n))?);
        if at_zero.degree() == 0 {
            return Err(Error::ConstantPolynomial);
        }
        let m_of_identity = at_zero.eval(1.0);
        let mut r = rng(0x6a7d);
        for _ in 0..64 {
            let a = random_sym(&mut r, n);
            sturm_largest_root(&poly.pencil(&a)?)?;
        }
        if (m_of_identity - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "Gårding polynomial must satisfy M(I) = 1, found {m_of_identity}"
            )));
        }
        Ok(Self::from_node(n, true, name.into(), Node::Garding { poly }))
    }
}

/// Top `k` values of an ascending list.
fn top_sum(sorted: &[f64], k: usize) -> f64 {
    sorted[sorted.len() - k..].iter().sum()
}

pub(super) fn leaf_defect(node: &Node, a: &SymMatrix) -> Result<f64> {
    Ok(match node {
        Node::Psd => a.lambda_min()?,
        Node::PsdTilde => a.lambda_max()?,
        Node::Harm => a.trace() / a.dim() as f64,
        Node::Halfspace { a0, c } => a0.inner(a) - c,
        Node::Branch { q, s } => match s.field() {
            Field::Real => a.eig_sorted()?[*q],
            _ => k_eigenvalues(a, s)?[*q],
        },
        Node::Geometric { p, s } => match s.field() {
            Field::Real => a.eig_sorted()?[..*p].iter().sum(),
            _ => k_eigenvalues(a, s)?[..*p].iter().sum(),
        },
        Node::NextTier { p, q } => a.eig_sorted()?[*q..q + p].iter().sum(),
        Node::Lag { s } => {
            let skew = skew_hermitian_part(a, s)?.eig_sorted()?;
            0.5 * a.trace() - top_sum(&skew, s.k_dim())
        }
        Node::SpecialLagrangian { c } => a.eig_sorted()?.iter().map(|l| l.atan()).sum::<f64>() - c,
        Node::Garding { poly } => -sturm_largest_root(&poly.pencil(a)?)?,
        _ => unreachable!("composite node passed to leaf_defect"),
    })
}

/// `d/dt defect(B + tI)` for leaves whose defect is affine along the identity.
pub(super) fn identity_rate(node: &Node, n: usize) -> f64 {
    match node {
        Node::Psd | Node::PsdTilde | Node::Harm | Node::Branch { .. } | Node::Garding { .. } => 1.0,
        Node::Halfspace { a0, .. } => a0.trace(),
        Node::Geometric { p, .. } | Node::NextTier { p, .. } => *p as f64,
        Node::Lag { .. } => (n / 2) as f64,
        _ => unreachable!("no closed-form rate for this node"),
    }
}

/// Solves `Σ arctan(λᵢ + t) = c` by Newton steps safeguarded inside a bracket.
pub(super) fn sl_threshold(b: &SymMatrix, c: f64) -> Result<f64> {
    let lam = b.eig_sorted()?;
    let n = lam.len() as f64;
    let shift = (c / n).tan();
    let mut lo = shift - lam[lam.len() - 1];
    let mut hi = shift - lam[0];
    let g = |t: f64| lam.iter().map(|l| (l + t).atan()).sum::<f64>() - c;
    let dg = |t: f64| lam.iter().map(|l| 1.0 / (1.0 + (l + t) * (l + t))).sum::<f64>();
    if hi - lo <= 0.0 {
        return Ok(lo);
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let v = g(t);
        if v == 0.0 {
            return Ok(t);
        }
        if v > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let newton = t - v / dg(t);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - t).abs() <= 1e-15 * (1.0 + t.abs()) || hi - lo <= 1e-15 * (1.0 + t.abs()) {
            return Ok(next);
        }
        t = next;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_psd, random_sym, rng};

    #[test]
    fn branch_zero_is_psd() {
        let mut r = rng(21);
        let b = ConeSet::branch(0, Field::Real, 4).unwrap();
        let p = ConeSet::psd(4);
        for _ in 0..200 {
            let a = random_sym(&mut r, 4);
            assert_eq!(b.defect(&a).unwrap(), p.defect(&a).unwrap());
        }
    }

    #[test]
    fn det_garding_matches_lambda_min() {
        let mut r = rng(22);
        let g = ConeSet::garding_det(4).unwrap();
        for _ in 0..500 {
            let a = random_sym(&mut r, 4);
            let d = g.defect(&a).unwrap();
            assert!((d - a.lambda_min().unwrap()).abs() <= 1e-8);
        }
    }

    #[test]
    fn sl_zero_in_2d_is_trace_sign() {
        let mut r = rng(23);
        let f = ConeSet::special_lagrangian(0.0, 2).unwrap();
        assert!(f.is_cone());
        for _ in 0..500 {
            let a = random_sym(&mut r, 2);
            let d = f.defect(&a).unwrap();
            if a.trace().abs() > 1e-9 {
                assert_eq!(d > 0.0, a.trace() > 0.0);
            }
        }
        let z = SymMatrix::diag(&[1.5, -1.5]);
        assert!(f.defect(&z).unwrap().abs() < 1e-15);
    }

    #[test]
    fn sigma_one_is_harm_and_sigma_n_is_psd() {
        let mut r = rng(24);
        let s1 = ConeSet::sigma_k(1, 3).unwrap();
        let s3 = ConeSet::sigma_k(3, 3).unwrap();
        for _ in 0..200 {
            let a = random_sym(&mut r, 3);
            assert!((s1.defect(&a).unwrap() - a.trace() / 3.0).abs() < 1e-9);
            assert!((s3.defect(&a).unwrap() - a.lambda_min().unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn sigma_two_membership_by_symmetric_functions() {
        let mut r = rng(25);
        let s2 = ConeSet::sigma_k(2, 3).unwrap();
        for _ in 0..500 {
            let a = random_sym(&mut r, 3);
            let l = a.eig_sorted().unwrap();
            let e1: f64 = l.iter().sum();
            let e2 = l[0] * l[1] + l[0] * l[2] + l[1] * l[2];
            let d = s2.defect(&a).unwrap();
            if d.abs() > 1e-6 {
                assert_eq!(d > 0.0, e1 > 0.0 && e2 > 0.0, "{l:?}");
            }
        }
    }

    #[test]
    fn non_hyperbolic_polynomial_is_rejected() {
        // M(A) = (a11² + a22²)/2 is not hyperbolic in the direction I
        let r = ConeSet::garding(2, "sumsq", |a| {
            let (x, y) = (a.get(0, 0), a.get(1, 1));
            Ok(vec![0.5 * (x * x + y * y), x + y, 1.0])
        });
        assert!(matches!(r, Err(Error::NotHyperbolic { .. })));
    }

    #[test]
    fn custom_det_pencil_is_accepted() {
        let f = ConeSet::garding(3, "det", |a| Ok(char_poly_shifted(a).coeffs().to_vec())).unwrap();
        let a = SymMatrix::diag(&[0.5, -0.25, 2.0]);
        assert!((f.defect(&a).unwrap() + 0.25).abs() < 1e-10);
    }

    #[test]
    fn parameter_ranges() {
        assert!(ConeSet::branch(3, Field::Real, 3).is_err());
        assert!(ConeSet::branch(2, Field::Complex, 4).is_err());
        assert!(ConeSet::special_lagrangian(std::f64::consts::PI, 2).is_err());
        assert!(ConeSet::lag(3).is_err());
        assert!(ConeSet::halfspace(&SymMatrix::diag(&[1.0, -1.0]), 0.0).is_err());
        assert!(ConeSet::next_tier(2, 2, 3).is_err());
        assert!(ConeSet::geometric(3, Field::Quaternionic, 8).is_err());
    }

    #[test]
    fn halfspace_rate_and_threshold() {
        let mut r = rng(26);
        let a0 = random_psd(&mut r, 3).add_scaled_identity(0.1);
        let f = ConeSet::halfspace(&a0, 0.7).unwrap();
        for _ in 0..50 {
            let b = random_sym(&mut r, 3);
            let t = f.edge_threshold(&b).unwrap();
            assert!(f.defect(&b.add_scaled_identity(t)).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn lag_examples() {
        let f = ConeSet::lag(4).unwrap();
        // complex line span(e1, e2): hermitian, so A_skew = 0 and defect = tr/2
        let p = SymMatrix::diag(&[1.0, 1.0, 0.0, 0.0]);
        assert!((f.defect(&p).unwrap() - 1.0).abs() < 1e-15);
        // real line: boundary of LAG
        let v = SymMatrix::diag(&[1.0, 0.0, 0.0, 0.0]);
        assert!(f.defect(&v).unwrap().abs() < 1e-15);
        // dual adds the skew eigenvalues instead of subtracting
        let d = f.dual().defect(&v).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn iso_ends_of_the_range() {
        let mut r = rng(27);
        let lag = ConeSet::lag(6).unwrap();
        let iso3 = ConeSet::iso(3, 6).unwrap();
        let iso1 = ConeSet::iso(1, 6).unwrap();
        for _ in 0..100 {
            let a = random_sym(&mut r, 6);
            assert_eq!(lag.defect(&a).unwrap(), iso3.defect(&a).unwrap());
            assert_eq!(iso1.defect(&a).unwrap(), a.lambda_min().unwrap());
        }
        assert!(ConeSet::iso(2, 6).is_err());
    }

    #[test]
    fn middle_iso_formula_is_not_monotone() {
        // (p/2m)·t − (top p skew eigenvalues) at 0 and at a rank-one projection, m = 3, p = 2
        let s = ComplexStructure::new(Field::Complex, 3);
        let f = |a: &SymMatrix| {
            let skew = skew_hermitian_part(a, &s).unwrap().eig_sorted().unwrap();
            (2.0 / 6.0) * a.trace() - top_sum(&skew, 2)
        };
        let mut e = SymMatrix::zeros(6);
        e.set(0, 0, 1.0);
        assert_eq!(f(&SymMatrix::zeros(6)), 0.0);
        assert!(f(&e) < 0.0);
    }
}
