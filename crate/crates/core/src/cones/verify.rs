//! Randomized property battery for the set algebra and catalog.

use rand::Rng;
use serde::Serialize;

use super::ray::STRICT_TOL;
use super::{ray_defect, ConeSet, Node};
use crate::error::{Error, Result};
use crate::sampling::{random_orthonormal, random_psd, random_sym, rng, SampleRng};
use crate::symmat::{orthogonal_complement, Field, SymMatrix};

/// Outcome of one property over a sample.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub property: String,
    pub set: String,
    pub samples: usize,
    pub violations: usize,
    /// Largest violation observed (0 when none).
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    fn new(property: &str, set: &str, tolerance: f64) -> Self {
        Self {
            property: property.into(),
            set: set.into(),
            samples: 0,
            violations: 0,
            worst: 0.0,
            tolerance,
            pass: true,
        }
    }

    /// Records a sample whose violation amount is `excess` (≤ tolerance is fine).
    fn record(&mut self, excess: f64) {
        self.samples += 1;
        if excess > self.tolerance || excess.is_nan() {
            self.violations += 1;
            self.pass = false;
        }
        if excess > self.worst || excess.is_nan() {
            self.worst = excess;
        }
    }

    fn record_bool(&mut self, ok: bool) {
        self.record(if ok { 0.0 } else { f64::INFINITY });
    }
}

#[derive(Debug, Clone)]
pub struct BatteryConfig {
    pub samples: usize,
    pub seed: u64,
    /// Restricts the catalog checks to sets whose name contains this string.
    pub set_filter: Option<String>,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: crate::sampling::DEFAULT_SEED,
            set_filter: None,
        }
    }
}

/// Representative catalog entries, one per family and field.
pub fn catalog_sets() -> Result<Vec<ConeSet>> {
    let a0 = SymMatrix::from_rows(&[
        vec![2.0, 0.5, 0.0],
        vec![0.5, 1.0, 0.2],
        vec![0.0, 0.2, 0.5],
    ])?;
    Ok(vec![
        ConeSet::psd(3),
        ConeSet::ptilde(3),
        ConeSet::harm(3),
        ConeSet::halfspace(&a0, 0.3)?,
        ConeSet::halfspace(&a0, 0.0)?,
        ConeSet::branch(1, Field::Real, 3)?,
        ConeSet::branch(0, Field::Complex, 4)?,
        ConeSet::branch(1, Field::Quaternionic, 8)?,
        ConeSet::geometric(2, Field::Real, 3)?,
        ConeSet::geometric(1, Field::Complex, 4)?,
        ConeSet::geometric(1, Field::Quaternionic, 8)?,
        ConeSet::next_tier(2, 1, 4)?,
        ConeSet::lag(4)?,
        ConeSet::iso(1, 4)?,
        ConeSet::special_lagrangian(0.6, 3)?,
        ConeSet::special_lagrangian(-0.4, 2)?,
        ConeSet::special_lagrangian(0.0, 2)?,
        ConeSet::garding_det(3)?,
        ConeSet::sigma_k(2, 3)?,
    ])
}

/// Draws a member of `F`: rejection first, then the candidate is moved along the identity
/// line to `b + r` with `r ≥ 0` (and `r = 0` one time in five, landing on `∂F`).
pub fn sample_member(f: &ConeSet, rng: &mut SampleRng) -> Result<SymMatrix> {
    const REJECTION_ATTEMPTS: usize = 16;
    let n = f.dim();
    for _ in 0..REJECTION_ATTEMPTS {
        let a = random_sym(rng, n);
        if f.defect(&a)? >= 0.0 {
            return Ok(a);
        }
    }
    let a = random_sym(rng, n);
    let b = f.edge_threshold(&a).map_err(|e| {
        Error::SamplerExhausted(format!("no member of {} near the sample scale: {e}", f.name()))
    })?;
    let r = if rng.gen_bool(0.2) {
        0.0
    } else {
        rng.gen_range(0.0..1.0)
    };
    let m = a.add_scaled_identity(b + r);
    if f.defect(&m)? < 0.0 {
        // rounding on the boundary; step inside by one ulp-scale nudge
        return Ok(m.add_scaled_identity(1e-12 * (1.0 + b.abs())));
    }
    Ok(m)
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityCheckReport {
    pub set: String,
    pub samples: usize,
    pub violations: usize,
    /// Smallest `λ_max(A + B)` seen.
    pub min_lambda_max: f64,
    pub pass: bool,
}

/// Samples `A ∈ F`, `B ∈ F̃` and checks `A + B ∈ 𝒫̃`, i.e. `λ_max(A + B) ≥ −1e−8`.
pub fn quadratic_duality_check(
    f: &ConeSet,
    samples: usize,
    rng: &mut SampleRng,
) -> Result<DualityCheckReport> {
    let dual = f.dual();
    let mut violations = 0;
    let mut min_lambda_max = f64::INFINITY;
    for _ in 0..samples {
        let a = sample_member(f, rng)?;
        let b = sample_member(&dual, rng)?;
        let l = (&a + &b).lambda_max()?;
        min_lambda_max = min_lambda_max.min(l);
        if l < -1e-8 {
            violations += 1;
        }
    }
    Ok(DualityCheckReport {
        set: f.name().into(),
        samples,
        violations,
        min_lambda_max,
        pass: violations == 0,
    })
}

fn double_dual_uncollapsed(f: &ConeSet) -> ConeSet {
    let once = ConeSet::from_node(f.dim(), f.is_cone(), format!("dual({})", f.name()), Node::Dual(f.clone()));
    ConeSet::from_node(
        f.dim(),
        f.is_cone(),
        format!("dual(dual({}))", f.name()),
        Node::Dual(once),
    )
}

fn homogeneous(f: &ConeSet) -> bool {
    f.is_cone() && !f.name().starts_with("SL")
}

/// Runs every set-level invariant. Each report covers one property on one set.
pub fn verify_battery(cfg: &BatteryConfig) -> Result<Vec<CheckReport>> {
    let mut r = rng(cfg.seed);
    let n_samples = cfg.samples;
    let mut out = Vec::new();
    let sets: Vec<ConeSet> = catalog_sets()?
        .into_iter()
        .filter(|f| cfg.set_filter.as_ref().is_none_or(|s| f.name().contains(s.as_str())))
        .collect();

    for f in &sets {
        let n = f.dim();
        let dd = double_dual_uncollapsed(f);
        let mut invol = CheckReport::new("involution", f.name(), 0.0);
        let mut pos = CheckReport::new("positivity", f.name(), 1e-9);
        let mut edge = CheckReport::new("edge_threshold_consistency", f.name(), 1e-9);
        let mut strict = CheckReport::new("identity_strict_monotone", f.name(), 0.0);
        let mut norm = CheckReport::new("cone_normalization", f.name(), 1e-9);
        for _ in 0..n_samples {
            let a = random_sym(&mut r, n);
            let p = random_psd(&mut r, n);
            let d = f.defect(&a)?;
            invol.record(if dd.defect(&a)? == d { 0.0 } else { f64::INFINITY });
            pos.record(d - f.defect(&(&a + &p))?);
            let t = f.edge_threshold(&a)?;
            edge.record(f.defect(&a.add_scaled_identity(t))?.abs());
            let step = r.gen_range(1e-3..1.0);
            strict.record_bool(f.defect(&a.add_scaled_identity(step))? > d);
            if f.is_cone() {
                let s = r.gen_range(0.1..10.0);
                let ds = f.defect(&a.scaled(s))?;
                if homogeneous(f) {
                    norm.record((ds - s * d).abs() / (1.0 + s * d.abs()));
                } else {
                    norm.record_bool(d.abs() < 1e-12 || (ds > 0.0) == (d > 0.0));
                }
            }
        }
        if f.is_cone() {
            norm.record(f.defect(&SymMatrix::zeros(n))?.abs());
        }
        out.extend([invol, pos, edge, strict]);
        if f.is_cone() {
            out.push(norm);
        }

        // maximum principle flag against the sign of defect(0)
        let mut mp = CheckReport::new("maximum_principle_flag", f.name(), 0.0);
        let d0 = f.defect(&SymMatrix::zeros(n))?;
        mp.record_bool((d0 <= 0.0) == f.satisfies_maximum_principle()?);
        out.push(mp);

        // subaffine shift: F + λI ⊂ 𝒫̃
        let lam = f.subaffine_shift()?;
        let mut shift = CheckReport::new("subaffine_shift", f.name(), 1e-9);
        if f.is_cone() {
            shift.record(lam);
        }
        for _ in 0..(n_samples / 10).max(1) {
            let a = sample_member(f, &mut r)?;
            shift.record(-a.add_scaled_identity(lam).lambda_max()?);
        }
        out.push(shift);

        // quadratic duality: A ∈ F, B ∈ F̃ ⇒ A + B ∈ 𝒫̃
        let q = quadratic_duality_check(f, n_samples, &mut r)?;
        let mut qr = CheckReport::new("quadratic_duality", f.name(), 1e-8);
        qr.samples = q.samples;
        qr.violations = q.violations;
        qr.worst = (-q.min_lambda_max).max(0.0);
        qr.pass = q.pass;
        out.push(qr);
    }

    if cfg.set_filter.is_none() {
        out.extend(identity_checks(&mut r, n_samples)?);
    }
    Ok(out)
}

/// Cross-set identities that do not belong to a single catalog entry.
fn identity_checks(r: &mut SampleRng, n_samples: usize) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();

    // P̃_q = P_{n−q−1}, real and complex
    for (field, n) in [(Field::Real, 4), (Field::Complex, 6)] {
        let k = n / field.real_dim();
        for q in 0..k {
            let lhs = ConeSet::branch(q, field, n)?.dual();
            let rhs = ConeSet::branch(k - q - 1, field, n)?;
            out.push(compare(r, &lhs, &rhs, 1e-9, n_samples, "branch_duality")?);
        }
    }
    // dual(P_q(G(p))) = P_{n−q−p}(G(p))
    let n = 4;
    for p in 1..=n {
        for q in 0..=(n - p) {
            let lhs = ConeSet::next_tier(p, q, n)?.dual();
            let rhs = ConeSet::next_tier(p, n - q - p, n)?;
            out.push(compare(r, &lhs, &rhs, 1e-9, n_samples, "next_tier_duality")?);
        }
    }
    // SL duality F̃_c = F_{−c}
    for (c, n) in [(0.6, 3), (-1.1, 2), (2.0, 4)] {
        let lhs = ConeSet::special_lagrangian(c, n)?.dual();
        let rhs = ConeSet::special_lagrangian(-c, n)?;
        out.push(compare(r, &lhs, &rhs, 1e-10, n_samples, "special_lagrangian_duality")?);
    }
    // garding(det) = λ₁
    let g = ConeSet::garding_det(4)?;
    out.push(compare(r, &g, &ConeSet::psd(4), 1e-8, n_samples, "garding_det_is_lambda_min")?);
    // self-dual half-space {⟨A₀, A⟩ ≥ 0}
    let mut hs = CheckReport::new("halfspace_self_dual", "halfspace(c=0)", 0.0);
    for _ in 0..10 {
        let a0 = random_psd(r, 3).add_scaled_identity(1e-3);
        let h = ConeSet::halfspace(&a0, 0.0)?;
        let hd = h.dual();
        for _ in 0..n_samples / 10 {
            let a = random_sym(r, 3);
            hs.record(if h.defect(&a)? == hd.defect(&a)? { 0.0 } else { f64::INFINITY });
        }
    }
    out.push(hs);
    // algebra duality laws
    let f1 = ConeSet::branch(1, Field::Real, 3)?;
    let f2 = ConeSet::special_lagrangian(0.3, 3)?;
    let lhs = ConeSet::intersect(&[f1.clone(), f2.clone()])?.dual();
    let rhs = ConeSet::union(&[f1.dual(), f2.dual()])?;
    out.push(compare(r, &lhs, &rhs, 0.0, n_samples, "dual_of_intersection")?);
    let a0 = random_sym(r, 3);
    let lhs = f2.translate(&a0)?.dual();
    let rhs = f2.dual().translate(&-&a0)?;
    out.push(compare(r, &lhs, &rhs, 0.0, n_samples, "dual_of_translate")?);
    // free-subspace criterion against an explicit witness family
    for f in [
        ConeSet::psd(3),
        ConeSet::ptilde(3),
        ConeSet::harm(3),
        ConeSet::geometric(1, Field::Complex, 4)?,
        ConeSet::branch(1, Field::Real, 3)?,
    ] {
        out.push(free_subspace_equivalence(r, &f, (n_samples / 50).max(10))?);
    }
    Ok(out)
}

fn compare(
    r: &mut SampleRng,
    lhs: &ConeSet,
    rhs: &ConeSet,
    tol: f64,
    samples: usize,
    property: &str,
) -> Result<CheckReport> {
    let mut rep = CheckReport::new(property, &format!("{} vs {}", lhs.name(), rhs.name()), tol);
    for _ in 0..samples.max(1) {
        let a = random_sym(r, lhs.dim());
        rep.record((lhs.defect(&a)? - rhs.defect(&a)?).abs());
    }
    Ok(rep)
}

/// For random `W`: some `A ∈ F` has `A|_W ≺ 0` exactly when `P_{W⊥} ∈ Int F⃗`.
///
/// The left side is tested on the family `−P_W + s·P_{W⊥}` for `s` up to `10⁸`;
/// samples where the right side sits within `1e−6` of the boundary are skipped.
fn free_subspace_equivalence(r: &mut SampleRng, f: &ConeSet, samples: usize) -> Result<CheckReport> {
    let n = f.dim();
    let mut rep = CheckReport::new("free_subspace_equivalence", f.name(), 0.0);
    for _ in 0..samples {
        let k = r.gen_range(1..n);
        let w = random_orthonormal(r, n, k);
        let wp = orthogonal_complement(&w, n);
        let pw = SymMatrix::projection(&w, n)?;
        let pn = SymMatrix::projection(&wp, n)?;
        let rd = ray_defect(f, &pn)?;
        if rd.abs() < 1e-6 {
            continue;
        }
        let mut lhs = false;
        let mut s = 1.0;
        while s <= 1e8 {
            if f.defect(&(&pn.scaled(s) - &pw))? >= 0.0 {
                lhs = true;
                break;
            }
            s *= 4.0;
        }
        rep.record_bool(lhs == (rd > STRICT_TOL));
    }
    Ok(rep)
}
