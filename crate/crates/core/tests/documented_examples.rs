use std::f64::consts::PI;

use dirset_core::cones::{free_dim, ray_defect};
use dirset_core::expr::parse;
use dirset_core::geometry::{smooth_max, BoundingBox, Domain, Verdict, strict_convexity_at};
use dirset_core::symmat::{
    char_poly_shifted, hermitian_part, skew_hermitian_part, sturm_largest_root, trace_on, ComplexStructure, Field,
};
use dirset_core::{ConeSet, Error, SymMatrix};
use proptest::prelude::*;

fn sym(rows: &[&[f64]]) -> SymMatrix {
    SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn sym3() -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-2.0f64..2.0, 6).prop_map(|v| {
        sym(&[&[v[0], v[1], v[2]], &[v[1], v[3], v[4]], &[v[2], v[4], v[5]]])
    })
}

#[test]
fn eigenvalues_of_small_matrices() {
    assert_eq!(SymMatrix::diag(&[3.0, 1.0, 2.0]).eig_sorted().unwrap(), vec![1.0, 2.0, 3.0]);
    let e = sym(&[&[0.0, 1.0], &[1.0, 0.0]]).eig_sorted().unwrap();
    assert!((e[0] + 1.0).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
}

#[test]
fn hermitian_and_skew_parts() {
    let real = ComplexStructure::new(Field::Real, 2);
    let a = sym(&[&[1.0, 2.0], &[2.0, -3.0]]);
    assert_eq!(hermitian_part(&a, &real).unwrap(), a);
    let cx = ComplexStructure::new(Field::Complex, 1);
    assert_eq!(hermitian_part(&SymMatrix::diag(&[2.0, 0.0]), &cx).unwrap(), SymMatrix::identity(2));
    let s = skew_hermitian_part(&SymMatrix::diag(&[5.0, 1.0]), &cx).unwrap();
    assert_eq!(s, SymMatrix::diag(&[2.0, -2.0]));
    assert_eq!(skew_hermitian_part(&SymMatrix::scalar(2, 7.0), &cx).unwrap(), SymMatrix::zeros(2));
}

#[test]
fn trace_on_subspaces() {
    let a = SymMatrix::diag(&[1.0, 2.0, 3.0]);
    let e = |i: usize| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect::<Vec<_>>();
    assert!((trace_on(&a, &[e(0), e(1)]).unwrap() - 3.0).abs() < 1e-14);
    assert!((trace_on(&a, &[e(0), e(1), e(2)]).unwrap() - a.trace()).abs() < 1e-14);
}

#[test]
fn largest_real_root() {
    assert!((sturm_largest_root(&[-1.0, 0.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
    assert!(sturm_largest_root(&[1.0, 0.0, 1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_matches_the_characteristic_polynomial(a in sym3()) {
        // det(tI + A) has roots −λᵢ, so the largest root is −λ_min
        let root = sturm_largest_root(char_poly_shifted(&a).coeffs()).unwrap();
        prop_assert!((root + a.lambda_min().unwrap()).abs() <= 1e-9 * a.max_abs().max(1.0));
    }

    #[test]
    fn dual_is_an_involution(a in sym3()) {
        for f in [ConeSet::psd(3), ConeSet::branch(1, Field::Real, 3).unwrap(), ConeSet::special_lagrangian(0.4, 3).unwrap()] {
            prop_assert_eq!(f.dual().dual().defect(&a).unwrap(), f.defect(&a).unwrap());
        }
    }

    #[test]
    fn branch_duality(a in sym3()) {
        let ev = a.eig_sorted().unwrap();
        for q in 0..3 {
            let d = ConeSet::branch(q, Field::Real, 3).unwrap().dual().defect(&a).unwrap();
            prop_assert!((d - ev[2 - q]).abs() <= 1e-9);
            let other = ConeSet::branch(2 - q, Field::Real, 3).unwrap().defect(&a).unwrap();
            prop_assert!((d - other).abs() <= 1e-9);
        }
    }

    #[test]
    fn garding_det_is_lambda_min(a in sym3()) {
        let d = ConeSet::garding_det(3).unwrap().defect(&a).unwrap();
        prop_assert!((d - a.lambda_min().unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn smooth_max_properties(t1 in -3.0f64..3.0, t2 in -3.0f64..3.0, eps in 0.01f64..1.0) {
        let m = smooth_max(t1, t2, eps).unwrap();
        prop_assert!(m.d1 >= 0.0 && m.d2 >= 0.0 && (m.d1 + m.d2 - 1.0).abs() <= 1e-9);
        prop_assert!((m.value - t1.max(t2)).abs() <= eps / 2.0);
        if (t1 - t2).abs() >= eps {
            prop_assert_eq!(m.value, t1.max(t2));
        }
    }
}

#[test]
fn defects_and_thresholds() {
    assert_eq!(ConeSet::psd(2).defect(&SymMatrix::diag(&[1.0, 2.0])).unwrap(), 1.0);
    assert_eq!(ConeSet::ptilde(2).defect(&SymMatrix::diag(&[-1.0, -2.0])).unwrap(), -1.0);
    assert_eq!(ConeSet::special_lagrangian(0.0, 2).unwrap().defect(&SymMatrix::zeros(2)).unwrap(), 0.0);
    assert_eq!(ConeSet::psd(2).dual().defect(&SymMatrix::diag(&[-1.0, 5.0])).unwrap(), 5.0);
    let shifted = ConeSet::psd(2).translate(&SymMatrix::identity(2)).unwrap();
    assert_eq!(shifted.defect(&SymMatrix::identity(2)).unwrap(), 0.0);

    assert!((ConeSet::psd(2).edge_threshold(&SymMatrix::diag(&[-2.0, 3.0])).unwrap() - 2.0).abs() < 1e-12);
    let b = SymMatrix::diag(&[-1.0, -1.0, -1.0]);
    assert!((ConeSet::harm(3).edge_threshold(&b).unwrap() - 1.0).abs() < 1e-12);
    let sl = ConeSet::special_lagrangian(PI / 4.0, 2).unwrap();
    assert!((sl.edge_threshold(&SymMatrix::zeros(2)).unwrap() - (PI / 8.0).tan()).abs() < 1e-9);
}

#[test]
fn set_algebra() {
    let a11 = ConeSet::halfspace(&SymMatrix::diag(&[1.0, 0.0]), 0.0).unwrap();
    let a22 = ConeSet::halfspace(&SymMatrix::diag(&[0.0, 1.0]), 0.0).unwrap();
    let both = ConeSet::intersect(&[a11.clone(), a22.clone()]).unwrap();
    assert_eq!(both.defect(&SymMatrix::diag(&[1.0, -1.0])).unwrap(), -1.0);
    assert!(matches!(ConeSet::intersect(&[]), Err(Error::EmptySetList)));

    // {a ≥ 0} on ℝ extended to ℝ² reads a₁₁ only
    let line = ConeSet::psd(1).product_extend(2, &[0]).unwrap();
    let a = sym(&[&[0.7, 5.0], &[5.0, -9.0]]);
    assert_eq!(line.defect(&a).unwrap(), 0.7);
    let ext_dual = ConeSet::psd(1).dual().product_extend(2, &[0]).unwrap();
    assert_eq!(line.dual().defect(&a).unwrap(), ext_dual.defect(&a).unwrap());

    assert_eq!(ray_defect(&ConeSet::psd(2), &a).unwrap(), ConeSet::psd(2).defect(&a).unwrap());
    let far = ConeSet::psd(2).translate(&SymMatrix::diag(&[7.0, -3.0])).unwrap();
    assert!(ray_defect(&far, &SymMatrix::identity(2)).unwrap() > 0.0);
}

#[test]
fn free_dimensions() {
    assert_eq!(free_dim(&ConeSet::psd(3), None).unwrap().free_dim, 0);
    assert_eq!(free_dim(&ConeSet::geometric(1, Field::Complex, 4).unwrap(), None).unwrap().free_dim, 2);
    assert_eq!(free_dim(&ConeSet::lag(4).unwrap(), None).unwrap().free_dim, 2);
}

#[test]
fn projection_and_curvature() {
    let ball = Domain::unit_ball(2).unwrap();
    let p = ball.boundary_project(&[2.0, 0.0]).unwrap();
    assert!((p[0] - 1.0).abs() < 1e-10 && p[1].abs() < 1e-10);
    assert_eq!(ball.boundary_project(&[0.0, 1.0]).unwrap(), vec![0.0, 1.0]);

    let ellipse = Domain::ellipsoid(&[0.0, 0.0], &[2.0, 1.0]).unwrap();
    let q = ellipse.boundary_project(&[0.0, 3.0]).unwrap();
    assert!(q[0].abs() < 1e-10 && (q[1] - 1.0).abs() < 1e-10);
    // plane-curve curvature of x²/4 + y² = 1 at (2, 0) is a/b² = 2
    let ii = ellipse.second_fundamental_form(&[2.0, 0.0]).unwrap().ii;
    assert!((ii.get(0, 0) - 2.0).abs() < 1e-9);

    let r = 3.0;
    let sphere = Domain::ball(&[0.0, 0.0, 0.0], r).unwrap();
    let ii = sphere.second_fundamental_form(&[0.0, 0.0, r]).unwrap().ii;
    assert!(ii.scaled(r).add_scaled_identity(-1.0).max_abs() < 1e-9);
}

#[test]
fn dumbbell_waist_fails_and_flanks_pass() {
    let a11 = ConeSet::halfspace(&SymMatrix::diag(&[1.0, 0.0]), 0.0).unwrap();
    let rho = parse("x2^2 + (x1^2 - 1)^2 - 1.2").unwrap();
    let bbox = BoundingBox { lo: vec![-2.0, -2.0], hi: vec![2.0, 2.0] };
    let d = Domain::from_expr(rho, 2, bbox, vec![1.0, 0.0]).unwrap();
    let waist = strict_convexity_at(&d, &a11, &[0.0, 0.2f64.sqrt()]).unwrap();
    assert_eq!(waist.verdict, Verdict::Fail);
    let x = d.boundary_project(&[1.3, 0.6]).unwrap();
    assert_eq!(strict_convexity_at(&d, &a11, &x).unwrap().verdict, Verdict::Strict);
    let ball = Domain::unit_ball(2).unwrap();
    assert_eq!(strict_convexity_at(&ball, &a11, &[0.6, 0.8]).unwrap().verdict, Verdict::Strict);
}
