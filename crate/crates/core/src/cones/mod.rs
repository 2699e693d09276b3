//! Dirichlet sets encoded by monotone defect functions.
//!
//! A set `F ⊂ Sym²(ℝⁿ)` is stored as a defect `f` with `F = {f ≥ 0}` and interior
//! `{f > 0}`. Every construction in the algebra (dual, translate, conjugate, ∩, ∪,
//! product extension) is a transform of `f`, and the edge threshold along the identity
//! direction is the single query the solver needs.

mod catalog;
mod ray;
mod spec;
mod verify;

pub use catalog::GardingPoly;
pub use ray::{free_dim, ray_defect, ray_defect_report, ray_scales, FreeDimReport, RayDefectReport, RAY_LADDER_STEPS};
pub use spec::{SetOp, SetSpec};
pub use verify::{
    catalog_sets, quadratic_duality_check, sample_member, verify_battery, BatteryConfig, CheckReport,
    DualityCheckReport,
};

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::symmat::{ComplexStructure, Mat, SymMatrix, MAX_DIM};

/// Bracket bound for the generic edge-threshold search.
pub const THRESHOLD_BRACKET_BOUND: f64 = 1e9;

type DefectFn = dyn Fn(&SymMatrix) -> Result<f64> + Send + Sync;

pub(crate) enum Node {
    Psd,
    PsdTilde,
    Harm,
    Halfspace { a0: SymMatrix, c: f64 },
    Branch { q: usize, s: ComplexStructure },
    Geometric { p: usize, s: ComplexStructure },
    NextTier { p: usize, q: usize },
    Lag { s: ComplexStructure },
    SpecialLagrangian { c: f64 },
    Garding { poly: GardingPoly },
    Custom { f: Arc<DefectFn> },
    Dual(ConeSet),
    Translate(ConeSet, SymMatrix),
    Conjugate { inner: ConeSet, g_inv: Mat },
    Intersect(Vec<ConeSet>),
    Union(Vec<ConeSet>),
    ProductExtend { inner: ConeSet, coords: Vec<usize> },
}

/// A Dirichlet set `F = {defect ≥ 0}`; cheap to clone and safe to share across threads.
#[derive(Clone)]
pub struct ConeSet {
    n: usize,
    is_cone: bool,
    name: String,
    node: Arc<Node>,
}

/// Where the zero matrix sits relative to the set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPosition {
    Exterior,
    Boundary,
    Interior,
}

impl ZeroPosition {
    fn from_sign(v: f64) -> Self {
        match v.partial_cmp(&0.0) {
            Some(Ordering::Greater) => ZeroPosition::Interior,
            Some(Ordering::Less) => ZeroPosition::Exterior,
            _ => ZeroPosition::Boundary,
        }
    }

    fn reversed(self) -> Self {
        match self {
            ZeroPosition::Exterior => ZeroPosition::Interior,
            ZeroPosition::Boundary => ZeroPosition::Boundary,
            ZeroPosition::Interior => ZeroPosition::Exterior,
        }
    }
}

impl fmt::Debug for ConeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConeSet")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("is_cone", &self.is_cone)
            .finish()
    }
}

impl fmt::Display for ConeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "dimension must be in 1..={MAX_DIM}, got {n}"
        )));
    }
    Ok(())
}

impl ConeSet {
    pub(crate) fn from_node(n: usize, is_cone: bool, name: String, node: Node) -> Self {
        Self {
            n,
            is_cone,
            name,
            node: Arc::new(node),
        }
    }

    /// Ambient dimension `n` of `Sym²(ℝⁿ)`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// True when `F` is invariant under positive scaling.
    pub fn is_cone(&self) -> bool {
        self.is_cone
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// True when the edge threshold has a closed form rather than a bracketed search.
    pub fn has_analytic_threshold(&self) -> bool {
        match &*self.node {
            Node::Custom { .. } | Node::Conjugate { .. } => false,
            Node::Dual(f) | Node::Translate(f, _) => f.has_analytic_threshold(),
            Node::ProductExtend { inner, .. } => inner.has_analytic_threshold(),
            Node::Intersect(v) | Node::Union(v) => v.iter().all(ConeSet::has_analytic_threshold),
            _ => true,
        }
    }

    fn check(&self, a: &SymMatrix) -> Result<()> {
        if a.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: a.dim(),
            });
        }
        Ok(())
    }

    /// Signed defect: `≥ 0` on `F`, `> 0` on `Int F`, `< 0` off `F`.
    pub fn defect(&self, a: &SymMatrix) -> Result<f64> {
        self.check(a)?;
        self.defect_unchecked(a)
    }

    /// Membership `A ∈ F`.
    pub fn contains(&self, a: &SymMatrix) -> Result<bool> {
        Ok(self.defect(a)? >= 0.0)
    }

    pub(crate) fn defect_unchecked(&self, a: &SymMatrix) -> Result<f64> {
        match &*self.node {
            Node::Dual(f) => Ok(-f.defect_unchecked(&-a)?),
            Node::Translate(f, a0) => f.defect_unchecked(&(a - a0)),
            Node::Conjugate { inner, g_inv } => inner.defect_unchecked(&a.congruence(g_inv)),
            Node::Intersect(v) => {
                let mut m = f64::INFINITY;
                for f in v {
                    m = m.min(f.defect_unchecked(a)?);
                }
                Ok(m)
            }
            Node::Union(v) => {
                let mut m = f64::NEG_INFINITY;
                for f in v {
                    m = m.max(f.defect_unchecked(a)?);
                }
                Ok(m)
            }
            Node::ProductExtend { inner, coords } => inner.defect_unchecked(&a.principal(coords)),
            Node::Custom { f } => f(a),
            leaf => catalog::leaf_defect(leaf, a),
        }
    }

    /// The `b` with `{t : B + tI ∈ F} = [b, ∞)`.
    pub fn edge_threshold(&self, b: &SymMatrix) -> Result<f64> {
        self.check(b)?;
        self.threshold_unchecked(b)
    }

    pub(crate) fn threshold_unchecked(&self, b: &SymMatrix) -> Result<f64> {
        match &*self.node {
            Node::Dual(f) => Ok(-f.threshold_unchecked(&-b)?),
            Node::Translate(f, a0) => f.threshold_unchecked(&(b - a0)),
            Node::Intersect(v) => {
                let mut m = f64::NEG_INFINITY;
                for f in v {
                    m = m.max(f.threshold_unchecked(b)?);
                }
                Ok(m)
            }
            Node::Union(v) => {
                let mut m = f64::INFINITY;
                for f in v {
                    m = m.min(f.threshold_unchecked(b)?);
                }
                Ok(m)
            }
            Node::ProductExtend { inner, coords } => inner.threshold_unchecked(&b.principal(coords)),
            Node::Custom { .. } | Node::Conjugate { .. } => self.bracketed_threshold(b),
            Node::SpecialLagrangian { c } => catalog::sl_threshold(b, *c),
            leaf => {
                let rate = catalog::identity_rate(leaf, self.n);
                Ok(-catalog::leaf_defect(leaf, b)? / rate)
            }
        }
    }

    /// Expanding bracket plus bisection on the increasing map `t ↦ defect(B + tI)`.
    fn bracketed_threshold(&self, b: &SymMatrix) -> Result<f64> {
        let f = |t: f64| self.defect_unchecked(&b.add_scaled_identity(t));
        let (mut lo, mut hi);
        if f(0.0)? >= 0.0 {
            hi = 0.0;
            lo = -1.0;
            while f(lo)? >= 0.0 {
                hi = lo;
                lo *= 2.0;
                if lo < -THRESHOLD_BRACKET_BOUND {
                    return Err(Error::DegenerateSet {
                        bound: THRESHOLD_BRACKET_BOUND,
                    });
                }
            }
        } else {
            lo = 0.0;
            hi = 1.0;
            while f(hi)? < 0.0 {
                lo = hi;
                hi *= 2.0;
                if hi > THRESHOLD_BRACKET_BOUND {
                    return Err(Error::DegenerateSet {
                        bound: THRESHOLD_BRACKET_BOUND,
                    });
                }
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid)? >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Where `0` sits: on `∂F` for cones, decided analytically wherever possible.
    pub fn zero_position(&self) -> Result<ZeroPosition> {
        if self.is_cone {
            return Ok(ZeroPosition::Boundary);
        }
        Ok(match &*self.node {
            Node::Halfspace { c, .. } | Node::SpecialLagrangian { c } => ZeroPosition::from_sign(-c),
            Node::Dual(f) => f.zero_position()?.reversed(),
            Node::Intersect(v) => {
                let mut m = ZeroPosition::Interior;
                for f in v {
                    m = m.min(f.zero_position()?);
                }
                m
            }
            Node::Union(v) => {
                let mut m = ZeroPosition::Exterior;
                for f in v {
                    m = m.max(f.zero_position()?);
                }
                m
            }
            Node::Conjugate { inner, .. } | Node::ProductExtend { inner, .. } => inner.zero_position()?,
            _ => ZeroPosition::from_sign(self.defect_unchecked(&SymMatrix::zeros(self.n))?),
        })
    }

    /// Maximum principle holds for `F`-subharmonic functions iff `0 ∉ Int F`.
    pub fn satisfies_maximum_principle(&self) -> Result<bool> {
        Ok(self.zero_position()? != ZeroPosition::Interior)
    }

    /// A `λ ≥ 0` with `F + λI ⊂ 𝒫̃`: the threshold of `λI` in the dual set, floored at 0.
    pub fn subaffine_shift(&self) -> Result<f64> {
        Ok(self.dual().edge_threshold(&SymMatrix::zeros(self.n))?.max(0.0))
    }

    /// Dirichlet dual `F̃ = ∼(−Int F)` with defect `A ↦ −f(−A)`.
    pub fn dual(&self) -> ConeSet {
        if let Node::Dual(inner) = &*self.node {
            return inner.clone();
        }
        Self::from_node(
            self.n,
            self.is_cone,
            format!("dual({})", self.name),
            Node::Dual(self.clone()),
        )
    }

    /// `F + A₀`, with defect `A ↦ f(A − A₀)`.
    pub fn translate(&self, a0: &SymMatrix) -> Result<ConeSet> {
        self.check(a0)?;
        let is_cone = self.is_cone && a0.max_abs() == 0.0;
        Ok(Self::from_node(
            self.n,
            is_cone,
            format!("translate({})", self.name),
            Node::Translate(self.clone(), a0.clone()),
        ))
    }

    /// `gᵀ F g`, with defect `A ↦ f(g⁻ᵀ A g⁻¹)`.
    pub fn conjugate(&self, g: &Mat) -> Result<ConeSet> {
        if g.rows() != self.n || g.cols() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: g.rows(),
            });
        }
        let g_inv = g.inverse()?;
        Ok(Self::from_node(
            self.n,
            self.is_cone,
            format!("conjugate({})", self.name),
            Node::Conjugate {
                inner: self.clone(),
                g_inv,
            },
        ))
    }

    fn combine(sets: &[ConeSet], union: bool) -> Result<ConeSet> {
        let first = sets.first().ok_or(Error::EmptySetList)?;
        for s in sets {
            if s.n != first.n {
                return Err(Error::DimensionMismatch {
                    expected: first.n,
                    found: s.n,
                });
            }
        }
        let names: Vec<&str> = sets.iter().map(|s| s.name.as_str()).collect();
        let op = if union { "union" } else { "intersect" };
        let node = if union {
            Node::Union(sets.to_vec())
        } else {
            Node::Intersect(sets.to_vec())
        };
        Ok(Self::from_node(
            first.n,
            sets.iter().all(|s| s.is_cone),
            format!("{op}({})", names.join(", ")),
            node,
        ))
    }

    /// `F₁ ∩ … ∩ F_k`: defect is the minimum.
    pub fn intersect(sets: &[ConeSet]) -> Result<ConeSet> {
        Self::combine(sets, false)
    }

    /// `F₁ ∪ … ∪ F_k`: defect is the maximum.
    pub fn union(sets: &[ConeSet]) -> Result<ConeSet> {
        Self::combine(sets, true)
    }

    /// Extends a set on the coordinate subspace `W = span{e_i : i ∈ coords}` to `ℝⁿ`,
    /// constraining only the principal block `A|_W`.
    pub fn product_extend(&self, n: usize, coords: &[usize]) -> Result<ConeSet> {
        check_dim(n)?;
        if coords.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: coords.len(),
            });
        }
        if self.n >= n {
            return Err(Error::InvalidParameter(format!(
                "subspace dimension {} must be below the ambient dimension {n}",
                self.n
            )));
        }
        let mut seen = vec![false; n];
        for &c in coords {
            if c >= n || seen[c] {
                return Err(Error::InvalidParameter(format!(
                    "coordinates {coords:?} do not name distinct axes of ℝ^{n}"
                )));
            }
            seen[c] = true;
        }
        Ok(Self::from_node(
            n,
            self.is_cone,
            format!("extend({}, {coords:?} in R^{n})", self.name),
            Node::ProductExtend {
                inner: self.clone(),
                coords: coords.to_vec(),
            },
        ))
    }

    /// Set given by an arbitrary defect closure; the caller vouches for monotonicity.
    pub fn custom(
        n: usize,
        name: impl Into<String>,
        is_cone: bool,
        f: impl Fn(&SymMatrix) -> Result<f64> + Send + Sync + 'static,
    ) -> Result<ConeSet> {
        check_dim(n)?;
        Ok(Self::from_node(
            n,
            is_cone,
            name.into(),
            Node::Custom { f: Arc::new(f) },
        ))
    }
}
