//! Cross-checks built from several solves: nesting, duality reflection, restarts.

use serde::Serialize;

use super::{resolve_tolerances, solve, DirichletProblem, Init, SolveReport, SolverOptions};
use crate::cones::{sample_member, ConeSet};
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::sampling::{rng, DEFAULT_SEED};

/// Samples used to certify `F₁ ⊂ F₂` before a nesting run.
pub const INCLUSION_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Serialize)]
pub struct NestingLink {
    pub inner: String,
    pub outer: String,
    /// `sup (u_inner − u_outer)`; non-positive when the solutions are ordered.
    pub max_violation: f64,
    pub allowed: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NestingReport {
    pub links: Vec<NestingLink>,
    pub solves: Vec<SolveReport>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    pub set: String,
    pub dual: String,
    /// `sup |u_{F,φ} + u_{F̃,−φ}|`.
    pub sup_sum: f64,
    pub allowed: f64,
    pub pass: bool,
    pub solves: [SolveReport; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub set: String,
    pub inits: Vec<String>,
    pub max_distance: f64,
    /// Restarts realizing `max_distance`.
    pub worst_pair: (String, String),
    pub allowed: f64,
    pub pass: bool,
    pub solves: Vec<SolveReport>,
}

fn converged(p: &DirichletProblem, o: &SolverOptions) -> Result<(GridField, SolveReport)> {
    let (u, r) = solve(p, o)?;
    if !r.converged {
        return Err(Error::SolveFailed(format!(
            "{}: {}",
            p.set.name(),
            r.failure.as_deref().unwrap_or("unknown")
        )));
    }
    Ok((u, r))
}

/// Refuses unless every sampled member of `inner` lies in `outer`.
fn certify_inclusion(inner: &ConeSet, outer: &ConeSet, samples: usize, seed: u64) -> Result<()> {
    let mut r = rng(seed);
    for _ in 0..samples {
        let a = sample_member(inner, &mut r)?;
        let d = outer.defect(&a)?;
        if d < -1e-9 * a.max_abs().max(1.0) {
            return Err(Error::Precondition(format!(
                "{} is not contained in {}: defect {d:e} at {:?}",
                inner.name(),
                outer.name(),
                a.to_rows()
            )));
        }
    }
    Ok(())
}

/// Solves along an increasing chain `F₁ ⊂ F₂ ⊂ …` and checks `u₁ ≤ u₂ ≤ …` up to
/// `2·tol_residual·h²`. Each inclusion is certified on sampled members first.
pub fn nesting_check(chain: &[ConeSet], base: &DirichletProblem, o: &SolverOptions) -> Result<NestingReport> {
    if chain.len() < 2 {
        return Err(Error::InvalidParameter("nesting needs at least two sets".into()));
    }
    let seed = o.seed.unwrap_or(DEFAULT_SEED);
    for w in chain.windows(2) {
        certify_inclusion(&w[0], &w[1], INCLUSION_SAMPLES, seed)?;
    }
    let mut fields = Vec::new();
    let mut solves = Vec::new();
    let mut allowed = Vec::new();
    for f in chain {
        let p = base.with_set(f.clone())?;
        let phi = p.boundary_field()?;
        let scale = phi.max_abs().max(1.0);
        let tol = resolve_tolerances(&p, o, scale)?;
        allowed.push(2.0 * tol.tol_residual * p.h * p.h);
        let (u, r) = converged(&p, o)?;
        fields.push(u);
        solves.push(r);
    }
    let mut links = Vec::new();
    for i in 0..chain.len() - 1 {
        let (a, b) = (&fields[i], &fields[i + 1]);
        let max_violation = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| x - y)
            .fold(f64::NEG_INFINITY, f64::max);
        let tol = allowed[i].max(allowed[i + 1]);
        links.push(NestingLink {
            inner: chain[i].name().into(),
            outer: chain[i + 1].name().into(),
            max_violation,
            allowed: tol,
            pass: max_violation <= tol,
        });
    }
    let pass = links.iter().all(|l| l.pass);
    Ok(NestingReport { links, solves, pass })
}

/// Solves `(F, φ)` and `(F̃, −φ)` and checks `u_{F̃,−φ} = −u_{F,φ}` up to
/// `2·tol_update + 10·tol_residual·h²`.
pub fn duality_reflection_check(p: &DirichletProblem, o: &SolverOptions) -> Result<DualityReport> {
    let q = p.reflected();
    let scale = p.boundary_field()?.max_abs().max(1.0);
    let tol = resolve_tolerances(p, o, scale)?;
    let (u, ru) = converged(p, o)?;
    let (v, rv) = converged(&q, o)?;
    let sup_sum = u.zip_with(&v, |a, b| a + b)?.max_abs();
    let allowed = 2.0 * tol.tol_update + 10.0 * tol.tol_residual * p.h * p.h;
    Ok(DualityReport {
        set: p.set.name().into(),
        dual: q.set.name().into(),
        sup_sum,
        allowed,
        pass: sup_sum <= allowed,
        solves: [ru, rv],
    })
}

/// Restarts from five initial fields and checks pairwise agreement within `5·tol_update`.
pub fn uniqueness_probe(p: &DirichletProblem, o: &SolverOptions) -> Result<UniquenessReport> {
    let inits = [
        Init::AffineInterp,
        Init::BoundaryMin,
        Init::BoundaryMax,
        Init::Harmonic,
        Init::Random,
    ];
    let scale = p.boundary_field()?.max_abs().max(1.0);
    let tol = resolve_tolerances(p, o, scale)?;
    let mut fields = Vec::new();
    let mut solves = Vec::new();
    for init in inits {
        let run = SolverOptions { init, ..o.clone() };
        let (u, r) = converged(p, &run)?;
        fields.push(u);
        solves.push(r);
    }
    let mut max_distance = 0.0;
    let mut worst_pair = (inits[0].name().to_string(), inits[1].name().to_string());
    for i in 0..fields.len() {
        for j in i + 1..fields.len() {
            let d = fields[i].max_abs_diff(&fields[j])?;
            if d > max_distance {
                max_distance = d;
                worst_pair = (inits[i].name().into(), inits[j].name().into());
            }
        }
    }
    let allowed = 5.0 * tol.tol_update;
    Ok(UniquenessReport {
        set: p.set.name().into(),
        inits: inits.iter().map(|i| i.name().to_string()).collect(),
        max_distance,
        worst_pair,
        allowed,
        pass: max_distance <= allowed,
        solves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr;
    use crate::grid::GridBox;

    fn base(phi: &str) -> DirichletProblem {
        DirichletProblem::new(
            ConeSet::harm(2),
            GridBox::cube(2, 0.0, 1.0).unwrap(),
            0.125,
            expr::parse(phi).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn chain_is_ordered() {
        let chain = [ConeSet::psd(2), ConeSet::harm(2), ConeSet::ptilde(2)];
        let r = nesting_check(&chain, &base("sin(3*x1)*x2 + x2^2"), &SolverOptions::default()).unwrap();
        assert!(r.pass, "{:?}", r.links);
    }

    #[test]
    fn trivial_inclusion_gives_equality() {
        let chain = [ConeSet::harm(2), ConeSet::harm(2)];
        let r = nesting_check(&chain, &base("x1*x2"), &SolverOptions::default()).unwrap();
        assert!(r.links[0].max_violation.abs() < 1e-12);
    }

    #[test]
    fn reversed_chain_is_refused() {
        let chain = [ConeSet::harm(2), ConeSet::psd(2)];
        assert!(matches!(
            nesting_check(&chain, &base("x1"), &SolverOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn harmonic_reflection_and_restarts() {
        let p = base("exp(x1)*cos(x2)");
        let d = duality_reflection_check(&p, &SolverOptions::default()).unwrap();
        assert!(d.pass, "{d:?}");
        let u = uniqueness_probe(&p, &SolverOptions::default()).unwrap();
        assert!(u.pass && u.max_distance <= 1e-8, "{u:?}");
    }
}
