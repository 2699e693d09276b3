//! Gauss–Seidel solver for the Dirichlet problem `D²u ∈ ∂F` on box grids.
//!
//! The center value enters the centered Hessian only through `−(2v/h²)·I`, so each
//! pointwise equation is solved exactly by one edge-threshold query.

mod harness;

pub use harness::{
    duality_reflection_check, nesting_check, uniqueness_probe, DualityReport, NestingLink,
    NestingReport, UniquenessReport,
};

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cones::{ConeSet, SetSpec};
use crate::config::from_json_str;
use crate::error::{Error, Result};
use crate::expr::{self, Expr, ExprKind};
use crate::grid::{GridBox, GridField};
use crate::sampling::{random_sym, rng, DEFAULT_SEED};
use crate::symmat::SymMatrix;

/// Sweeps over which contraction is estimated.
const RATE_WINDOW: usize = 20;
const DEFAULT_MAX_ITERS: usize = 200_000;
const CROSS_DAMPING: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Average over axes of the linear interpolation between opposite boundary faces.
    #[default]
    AffineInterp,
    /// Constant `min φ`, below every boundary value.
    BoundaryMin,
    /// Constant `max φ`.
    BoundaryMax,
    /// Output of a loose Laplace solve with the same boundary data.
    Harmonic,
    /// Affine interpolation plus seeded uniform noise.
    Random,
}

impl Init {
    pub fn name(self) -> &'static str {
        match self {
            Init::AffineInterp => "affine_interp",
            Init::BoundaryMin => "boundary_min",
            Init::BoundaryMax => "boundary_max",
            Init::Harmonic => "harmonic",
            Init::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    #[default]
    Lexicographic,
    /// Points are split into `2ⁿ` classes by index parity. No stencil offset keeps every
    /// parity, so a class is updated in parallel from frozen neighbors.
    #[serde(alias = "parity")]
    RedBlack,
}

/// Iteration controls; `None` selects the documented default.
#[derive(Debug, Clone, Serialize)]
pub struct SolverOptions {
    pub init: Init,
    pub sweep: Sweep,
    /// θ in `(0, 1]`; defaults to 1 for sets that ignore off-diagonal entries, 0.8 otherwise.
    pub damping: Option<f64>,
    pub max_iters: usize,
    /// Defaults to `1e−9·max(1, sup|φ|)`.
    pub tol_update: Option<f64>,
    /// Defaults to `1e−6/h²`.
    pub tol_residual: Option<f64>,
    pub seed: Option<u64>,
}

fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            init: Init::default(),
            sweep: Sweep::default(),
            damping: None,
            max_iters: DEFAULT_MAX_ITERS,
            tol_update: None,
            tol_residual: None,
            seed: None,
        }
    }
}

/// JSON form of a solve: set, lattice, boundary expression and options.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub set: SetSpec,
    #[serde(rename = "box")]
    pub grid_box: GridBox,
    pub h: f64,
    /// Boundary data `φ(x1, …, xn)`.
    pub boundary: String,
    #[serde(default)]
    pub init: Init,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub damping: Option<f64>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub tol_update: Option<f64>,
    #[serde(default)]
    pub tol_residual: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl SolveConfig {
    pub fn from_json(src: &str) -> Result<SolveConfig> {
        from_json_str(src)
    }

    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            init: self.init,
            sweep: self.sweep,
            damping: self.damping,
            max_iters: self.max_iters,
            tol_update: self.tol_update,
            tol_residual: self.tol_residual,
            seed: self.seed,
        }
    }

    /// Builds the set, lattice and boundary expression, locating errors by pointer.
    pub fn problem(&self) -> Result<DirichletProblem> {
        let set = self.set.build().map_err(|e| match e {
            Error::Config { pointer, message } => Error::Config {
                pointer: format!("/set{pointer}"),
                message,
            },
            other => other,
        })?;
        let at = |pointer: &str, e: Error| Error::Config {
            pointer: pointer.into(),
            message: e.to_string(),
        };
        let grid_box = GridBox::new(self.grid_box.lo.clone(), self.grid_box.hi.clone()).map_err(|e| at("/box", e))?;
        let boundary = expr::parse(&self.boundary).map_err(|e| at("/boundary", e.into()))?;
        DirichletProblem::new(set, grid_box, self.h, boundary).map_err(|e| match e {
            Error::InvalidGrid(_) => at("/h", e),
            Error::DimensionMismatch { .. } => at("/set", e),
            Error::InvalidParameter(_) => at("/boundary", e),
            other => other,
        })
    }
}

/// A resolved problem: `D²u ∈ ∂F` inside the box, `u = φ` on the boundary layer.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub set: ConeSet,
    pub grid_box: GridBox,
    pub h: f64,
    pub boundary: Expr,
}

impl DirichletProblem {
    pub fn new(set: ConeSet, grid_box: GridBox, h: f64, boundary: Expr) -> Result<Self> {
        if set.dim() != grid_box.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid_box.dim(),
                found: set.dim(),
            });
        }
        if boundary.arity() > grid_box.dim() {
            return Err(Error::InvalidParameter(format!(
                "boundary data uses x{} in dimension {}",
                boundary.arity(),
                grid_box.dim()
            )));
        }
        GridField::on_box(&grid_box, h)?;
        Ok(Self {
            set,
            grid_box,
            h,
            boundary,
        })
    }

    /// Same lattice and boundary data with another set.
    pub fn with_set(&self, set: ConeSet) -> Result<Self> {
        Self::new(set, self.grid_box.clone(), self.h, self.boundary.clone())
    }

    /// The reflected problem `(F̃, −φ)`.
    pub fn reflected(&self) -> Self {
        let span = self.boundary.span.clone();
        Self {
            set: self.set.dual(),
            grid_box: self.grid_box.clone(),
            h: self.h,
            boundary: Expr {
                kind: ExprKind::Neg(Box::new(self.boundary.clone())),
                span,
            },
        }
    }

    /// Lattice carrying `φ` on the boundary layer and zeros inside.
    pub fn boundary_field(&self) -> Result<GridField> {
        let mut u = GridField::on_box(&self.grid_box, self.h)?;
        for k in u.boundary_indices() {
            let v = self.boundary.eval(&u.coord(k))?;
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "boundary data is {v} at {:?}",
                    u.coord(k)
                )));
            }
            u.set(k, v);
        }
        Ok(u)
    }
}

/// Diagnostics of one solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_max_update: f64,
    /// `sup |defect(F, D²u)|` over the interior.
    pub residual_sup: f64,
    /// `sup |defect(F̃, −D²u)|` over the interior.
    pub dual_residual: f64,
    /// Seconds; left out when byte-stable output is wanted.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time: Option<f64>,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<String>,
}

/// Tolerances and damping after defaults are applied.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResolvedTolerances {
    pub tol_update: f64,
    pub tol_residual: f64,
    pub damping: f64,
}

/// True when the defect changes with off-diagonal entries on a seeded sample.
pub fn couples_cross_terms(f: &ConeSet) -> Result<bool> {
    let mut r = rng(DEFAULT_SEED ^ 0xd1a9);
    for _ in 0..32 {
        let a = random_sym(&mut r, f.dim());
        let d = SymMatrix::diag(&(0..f.dim()).map(|i| a.get(i, i)).collect::<Vec<_>>());
        let (x, y) = (f.defect(&a)?, f.defect(&d)?);
        if (x - y).abs() > 1e-12 * (1.0 + x.abs()) {
            return Ok(true);
        }
    }
    Ok(false)
}

pub fn resolve_tolerances(p: &DirichletProblem, o: &SolverOptions, phi_scale: f64) -> Result<ResolvedTolerances> {
    let damping = match o.damping {
        Some(t) => t,
        None if couples_cross_terms(&p.set)? => CROSS_DAMPING,
        None => 1.0,
    };
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::InvalidParameter(format!("damping {damping} outside (0, 1]")));
    }
    let tol_update = o.tol_update.unwrap_or(1e-9 * phi_scale);
    if !(tol_update > 0.0) {
        return Err(Error::InvalidParameter(format!("tol_update {tol_update} must be positive")));
    }
    let tol_residual = o.tol_residual.unwrap_or(1e-6 / (p.h * p.h));
    if !(tol_residual > 0.0) {
        return Err(Error::InvalidParameter(format!("tol_residual {tol_residual} must be positive")));
    }
    Ok(ResolvedTolerances {
        tol_update,
        tol_residual,
        damping,
    })
}

fn phi_scale(u: &GridField) -> f64 {
    u.boundary_indices()
        .into_iter()
        .map(|k| u.get(k).abs())
        .fold(1.0, f64::max)
}

fn initialize(p: &DirichletProblem, o: &SolverOptions, u: &mut GridField) -> Result<()> {
    let bidx = u.boundary_indices();
    let (lo, hi) = bidx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &k| {
        (a.min(u.get(k)), b.max(u.get(k)))
    });
    match o.init {
        Init::BoundaryMin | Init::BoundaryMax => {
            let c = if o.init == Init::BoundaryMin { lo } else { hi };
            for k in u.interior_indices() {
                u.set(k, c);
            }
        }
        Init::AffineInterp | Init::Random => {
            let shape = u.shape().to_vec();
            for k in u.interior_indices() {
                let idx = u.index_of(k);
                let mut acc = 0.0;
                for i in 0..idx.len() {
                    let mut a = idx.clone();
                    a[i] = 0;
                    let mut b = idx.clone();
                    b[i] = shape[i] - 1;
                    let t = idx[i] as f64 / (shape[i] - 1) as f64;
                    acc += (1.0 - t) * u.get(u.flat(&a)) + t * u.get(u.flat(&b));
                }
                u.set(k, acc / idx.len() as f64);
            }
            if o.init == Init::Random {
                let mut r = rng(o.seed.unwrap_or(DEFAULT_SEED));
                let amp = 0.5 * (hi - lo).max(1.0);
                for k in u.interior_indices() {
                    let v = u.get(k) + r.gen_range(-amp..=amp);
                    u.set(k, v);
                }
            }
        }
        Init::Harmonic => {
            let lap = p.with_set(ConeSet::harm(p.set.dim()))?;
            let loose = SolverOptions {
                init: Init::AffineInterp,
                sweep: o.sweep,
                damping: Some(1.0),
                max_iters: o.max_iters,
                tol_update: Some(1e-6 * phi_scale(u)),
                tol_residual: Some(f64::INFINITY),
                seed: None,
            };
            let (v, _) = solve(&lap, &loose)?;
            u.values_mut().copy_from_slice(v.values());
        }
    }
    Ok(())
}

/// Center value `v*` making the stencil Hessian lie on `∂F` with neighbors frozen.
fn pointwise_target(f: &ConeSet, u: &GridField, k: usize) -> Result<f64> {
    let h0 = u.hessian_with_center(k, 0.0);
    let b = f.edge_threshold(&h0)?;
    if !b.is_finite() {
        return Err(Error::DegenerateSet { bound: b.abs() });
    }
    let h = u.h();
    Ok(-(h * h / 2.0) * b)
}

fn parity_classes(u: &GridField) -> Vec<Vec<usize>> {
    let n = u.dim();
    let mut classes = vec![Vec::new(); 1 << n];
    for k in u.interior_indices() {
        let c = u
            .index_of(k)
            .iter()
            .enumerate()
            .fold(0, |c, (i, &j)| c | ((j & 1) << i));
        classes[c].push(k);
    }
    classes
}

/// One sweep; returns the largest change.
fn sweep_once(f: &ConeSet, u: &mut GridField, order: &[Vec<usize>], theta: f64, parallel: bool) -> Result<f64> {
    let mut max_change: f64 = 0.0;
    for class in order {
        if parallel {
            let updates: Vec<(usize, f64)> = class
                .par_iter()
                .map(|&k| {
                    let old = u.get(k);
                    Ok((k, (1.0 - theta) * old + theta * pointwise_target(f, u, k)?))
                })
                .collect::<Result<_>>()?;
            for (k, v) in updates {
                max_change = max_change.max((v - u.get(k)).abs());
                u.set(k, v);
            }
        } else {
            for &k in class {
                let old = u.get(k);
                let v = (1.0 - theta) * old + theta * pointwise_target(f, u, k)?;
                max_change = max_change.max((v - old).abs());
                u.set(k, v);
            }
        }
    }
    Ok(max_change)
}

/// `(sup |defect(F, D²u)|, sup |defect(F̃, −D²u)|)` over the interior.
pub fn residuals(f: &ConeSet, u: &GridField) -> Result<(f64, f64)> {
    let dual = f.dual();
    u.interior_indices()
        .par_iter()
        .map(|&k| {
            let a = u.discrete_hessian(k)?;
            Ok((f.defect(&a)?.abs(), dual.defect(&-&a)?.abs()))
        })
        .try_reduce(|| (0.0, 0.0), |a, b| Ok((a.0.max(b.0), a.1.max(b.1))))
}

/// Stops once the update is below `tol` and the tail `d·q/(1 − q)` predicted from the
/// recent contraction rate `q` is too. A window without contraction means round-off
/// dominates and further sweeps cannot help.
struct StopRule {
    tol: f64,
    last: Option<f64>,
    ratios: Vec<f64>,
}

impl StopRule {
    fn new(tol: f64) -> Self {
        Self {
            tol,
            last: None,
            ratios: Vec::with_capacity(RATE_WINDOW),
        }
    }

    fn done(&mut self, d: f64) -> bool {
        if let Some(prev) = self.last {
            if prev > 0.0 {
                if self.ratios.len() == RATE_WINDOW {
                    self.ratios.remove(0);
                }
                self.ratios.push(d / prev);
            }
        }
        self.last = Some(d);
        if d == 0.0 {
            return true;
        }
        if d > self.tol || self.ratios.len() < RATE_WINDOW {
            return false;
        }
        let q = self.ratios.iter().copied().fold(0.0, f64::max);
        q >= 1.0 || d * q / (1.0 - q) <= self.tol
    }
}

/// Solves the problem from the configured initial field.
pub fn solve(p: &DirichletProblem, o: &SolverOptions) -> Result<(GridField, SolveReport)> {
    let start = Instant::now();
    let mut u = p.boundary_field()?;
    let tol = resolve_tolerances(p, o, phi_scale(&u))?;
    initialize(p, o, &mut u)?;
    let parallel = o.sweep == Sweep::RedBlack;
    let order = if parallel {
        parity_classes(&u)
    } else {
        vec![u.interior_indices()]
    };
    let mut rule = StopRule::new(tol.tol_update);
    let mut iterations = 0;
    let mut last = f64::INFINITY;
    let mut stopped = false;
    while iterations < o.max_iters {
        last = sweep_once(&p.set, &mut u, &order, tol.damping, parallel)?;
        iterations += 1;
        if rule.done(last) {
            stopped = true;
            break;
        }
    }
    let (residual_sup, dual_residual) = residuals(&p.set, &u)?;
    let failure = if !stopped {
        Some(format!(
            "max_iters {} reached with update {last:e} above {:e}",
            o.max_iters, tol.tol_update
        ))
    } else if !(residual_sup <= tol.tol_residual) {
        Some(format!(
            "residual {residual_sup:e} above tol_residual {:e}",
            tol.tol_residual
        ))
    } else {
        None
    };
    let report = SolveReport {
        iterations,
        final_max_update: last,
        residual_sup,
        dual_residual,
        wall_time: Some(start.elapsed().as_secs_f64()),
        converged: failure.is_none(),
        failure,
    };
    Ok((u, report))
}

/// Builds the problem from a config and solves it.
pub fn solve_dirichlet(cfg: &SolveConfig) -> Result<(GridField, SolveReport)> {
    solve(&cfg.problem()?, &cfg.options())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(set: ConeSet, a: f64, b: f64, h: f64, phi: &str) -> DirichletProblem {
        DirichletProblem::new(set, GridBox::cube(2, a, b).unwrap(), h, expr::parse(phi).unwrap()).unwrap()
    }

    fn first_entry() -> ConeSet {
        ConeSet::psd(1).product_extend(2, &[0]).unwrap()
    }

    #[test]
    fn slice_linear_interpolation() {
        let p = problem(first_entry(), 0.0, 1.0, 0.0625, "(1 - x1)*x2^2 + x1*(1 + x2)");
        let (u, r) = solve(&p, &SolverOptions::default()).unwrap();
        assert!(r.converged, "{r:?}");
        for k in 0..u.len() {
            let x = u.coord(k);
            let exact = (1.0 - x[0]) * x[1] * x[1] + x[0] * (1.0 + x[1]);
            assert!((u.get(k) - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn sweeps_agree_and_keep_boundary() {
        let p = problem(ConeSet::psd(2), -1.0, 1.0, 0.125, "sin(x1)*x2 + x1^2");
        let mut o = SolverOptions::default();
        let (a, ra) = solve(&p, &o).unwrap();
        o.sweep = Sweep::RedBlack;
        let (b, rb) = solve(&p, &o).unwrap();
        assert!(ra.converged && rb.converged);
        assert!(a.max_abs_diff(&b).unwrap() < 1e-7);
        let phi = p.boundary_field().unwrap();
        for k in b.boundary_indices() {
            assert_eq!(b.get(k), phi.get(k));
        }
    }

    #[test]
    fn pointwise_update_lands_on_the_boundary_of_f() {
        let p = problem(ConeSet::special_lagrangian(0.4, 2).unwrap(), 0.0, 1.0, 0.125, "x1*x2 + x1^3");
        let mut u = p.boundary_field().unwrap();
        initialize(&p, &SolverOptions::default(), &mut u).unwrap();
        let h = u.h();
        for k in u.interior_indices() {
            let v = pointwise_target(&p.set, &u, k).unwrap();
            u.set(k, v);
            let d = p.set.defect(&u.discrete_hessian(k).unwrap()).unwrap();
            assert!(d.abs() <= 1e-9 / (h * h), "{d}");
        }
    }

    #[test]
    fn constant_data_is_a_fixed_point() {
        for f in [ConeSet::psd(2), ConeSet::ptilde(2), ConeSet::harm(2)] {
            let p = problem(f, 0.0, 1.0, 0.125, "0.7");
            let (u, r) = solve(&p, &SolverOptions::default()).unwrap();
            assert_eq!(r.iterations, 1);
            assert!(u.values().iter().all(|&v| v == 0.7));
        }
    }

    #[test]
    fn max_iters_is_reported() {
        let p = problem(ConeSet::harm(2), 0.0, 1.0, 0.0625, "x1^2 - x2^2 + x1");
        let o = SolverOptions {
            max_iters: 3,
            ..Default::default()
        };
        let (_, r) = solve(&p, &o).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
        assert!(r.failure.unwrap().contains("max_iters"));
    }

    #[test]
    fn damping_defaults_follow_cross_coupling() {
        assert!(!couples_cross_terms(&ConeSet::harm(2)).unwrap());
        assert!(!couples_cross_terms(&first_entry()).unwrap());
        assert!(couples_cross_terms(&ConeSet::psd(2)).unwrap());
        let p = problem(ConeSet::harm(2), 0.0, 1.0, 0.125, "x1");
        let bad = SolverOptions {
            damping: Some(1.5),
            ..Default::default()
        };
        assert!(solve(&p, &bad).is_err());
    }

    #[test]
    fn config_errors_carry_pointers() {
        let src = r#"{"set": {"name": "harm", "params": {"dim": 2}}, "box": {"lo": [0, 0], "hi": [1, 1]},
                      "h": 0.3, "boundary": "x1"}"#;
        match SolveConfig::from_json(src).unwrap().problem() {
            Err(Error::Config { pointer, .. }) => assert_eq!(pointer, "/h"),
            other => panic!("{other:?}"),
        }
        let src = r#"{"set": {"name": "harm", "params": {"dim": 2}}, "box": {"lo": [0, 0], "hi": [1, 1]},
                      "h": 0.25, "boundary": "x1", "sweep": "diagonal"}"#;
        match SolveConfig::from_json(src) {
            Err(Error::Config { pointer, .. }) => assert_eq!(pointer, "/sweep"),
            other => panic!("{other:?}"),
        }
        let src = r#"{"set": {"name": "harm", "params": {"dim": 2}}, "box": {"lo": [0, 0], "hi": [1, 1]},
                      "h": 0.25, "boundary": "x1 +"}"#;
        match SolveConfig::from_json(src).unwrap().problem() {
            Err(Error::Config { pointer, .. }) => assert_eq!(pointer, "/boundary"),
            other => panic!("{other:?}"),
        }
    }
}
