use dirset_core::expr::parse;
use dirset_core::grid::{comparison_check, type_report, GridBox, ProbeSettings};
use dirset_core::solver::{
    residuals, resolve_tolerances, solve, solve_dirichlet, uniqueness_probe, DirichletProblem, Init, SolveConfig,
    SolverOptions, Sweep,
};
use dirset_core::symmat::Field;
use dirset_core::{ConeSet, Error, SymMatrix};
use proptest::prelude::*;

fn problem(set: ConeSet, h: f64, phi: &str) -> DirichletProblem {
    DirichletProblem::new(set, GridBox::cube(2, 0.0, 1.0).unwrap(), h, parse(phi).unwrap()).unwrap()
}

fn boundary_phi() -> impl Strategy<Value = String> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, 1.0f64..4.0)
        .prop_map(|(a, b, c, w)| format!("{a:.3}*x1*x2 + {b:.3}*sin({w:.3}*x1) + {c:.3}*x2^2"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn boundary_values_are_attained_and_type_holds(phi in boundary_phi()) {
        for set in [ConeSet::harm(2), ConeSet::psd(2), ConeSet::ptilde(2)] {
            let p = problem(set.clone(), 0.125, &phi);
            let o = SolverOptions::default();
            let (u, r) = solve(&p, &o).unwrap();
            prop_assert!(r.converged, "{:?}", r);
            let b = p.boundary_field().unwrap();
            for k in 0..u.len() {
                if u.is_boundary(k) {
                    prop_assert_eq!(u.get(k), b.get(k));
                }
            }
            let tol = resolve_tolerances(&p, &o, b.max_abs().max(1.0)).unwrap();
            let s = ProbeSettings::default();
            let t = 10.0 * tol.tol_residual;
            prop_assert!(type_report(&u, &set, t, 0, s).unwrap().pass);
            prop_assert!(type_report(&u.map(|v| -v), &set.dual(), t, 0, s).unwrap().pass);
        }
    }

    #[test]
    fn solutions_are_monotone_in_boundary_data(phi in boundary_phi(), c in 0.01f64..0.5) {
        // diagonal-determined sets: raising φ by c raises u by exactly c
        for set in [ConeSet::harm(2), ConeSet::psd(2)] {
            let lo = problem(set.clone(), 0.125, &phi);
            let hi = problem(set.clone(), 0.125, &format!("{phi} + {c}"));
            let (u, _) = solve(&lo, &SolverOptions::default()).unwrap();
            let (v, _) = solve(&hi, &SolverOptions::default()).unwrap();
            let diff = v.zip_with(&u, |a, b| a - b).unwrap();
            prop_assert!(diff.values().iter().all(|d| (d - c).abs() <= 1e-7), "{}", set.name());
        }
    }
}

#[test]
fn comparison_against_a_shifted_copy() {
    let p = problem(ConeSet::harm(2), 0.0625, "exp(x1)*sin(x2)");
    let (u, _) = solve(&p, &SolverOptions::default()).unwrap();
    let v = u.map(|x| x + 0.25);
    let r = comparison_check(&u, &v, &ConeSet::harm(2), 1e-9, 1e-4).unwrap();
    assert!(r.pass, "{r:?}");
    // the reversed pair breaks the boundary ordering, which is refused
    assert!(matches!(comparison_check(&v, &u, &ConeSet::harm(2), 1e-9, 1e-4), Err(Error::Precondition(_))));
}

#[test]
fn restarts_agree_on_three_sets() {
    let concave = ConeSet::branch(1, Field::Real, 2).unwrap();
    let tilted = ConeSet::halfspace(&SymMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap(), 0.0).unwrap();
    for set in [ConeSet::harm(2), concave, tilted] {
        let p = problem(set, 0.125, "x1^2 - x2*x1 + 0.5*cos(2*x2)");
        let r = uniqueness_probe(&p, &SolverOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn parity_sweep_matches_lexicographic() {
    let p = problem(ConeSet::special_lagrangian(0.6, 2).unwrap(), 0.125, "x1^2 - x2^2 + x1*x2");
    let a = solve(&p, &SolverOptions::default()).unwrap().0;
    let b = solve(&p, &SolverOptions { sweep: Sweep::RedBlack, ..Default::default() }).unwrap().0;
    assert!(a.max_abs_diff(&b).unwrap() <= 1e-7);
}

#[test]
fn residuals_are_small_at_convergence() {
    let p = problem(ConeSet::psd(2), 0.125, "sqrt(1 + x1^2 + x2^2)");
    let o = SolverOptions { init: Init::BoundaryMin, ..Default::default() };
    let (u, r) = solve(&p, &o).unwrap();
    let (primal, dual) = residuals(&p.set, &u).unwrap();
    assert!(primal <= 1e-6 / (p.h * p.h) && dual <= 1e-6 / (p.h * p.h), "{primal} {dual}");
    assert!(r.converged && r.failure.is_none());
}

#[test]
fn json_config_solves_and_reports_pointers() {
    let src = r#"{"set": {"name": "harm", "params": {"dim": 2}}, "box": {"lo": [0, 0], "hi": [1, 1]}, "h": 0.25, "boundary": "x1*x2"}"#;
    let cfg = SolveConfig::from_json(src).unwrap();
    let (u, r) = solve_dirichlet(&cfg).unwrap();
    assert!(r.converged);
    // x1·x2 is harmonic and the stencil is exact on quadratics
    for k in 0..u.len() {
        let x = u.coord(k);
        assert!((u.get(k) - x[0] * x[1]).abs() < 1e-8);
    }
    let bad = src.replace("\"h\": 0.25", "\"h\": -1");
    let err = SolveConfig::from_json(&bad).and_then(|c| c.problem()).unwrap_err();
    assert!(err.to_string().contains("/h"), "{err}");
}
