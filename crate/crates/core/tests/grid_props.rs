use dirset_core::grid::{
    comparison_check, quasiconvex_modulus, subaffine_report, sup_convolution, type_report, GridBox, GridField,
    ProbeSettings,
};
use dirset_core::{ConeSet, SymMatrix};
use proptest::prelude::*;

fn square(h: f64, f: impl Fn(&[f64]) -> f64) -> GridField {
    GridField::from_fn(&GridBox::cube(2, -1.0, 1.0).unwrap(), h, f).unwrap()
}

fn sym2() -> impl Strategy<Value = SymMatrix> {
    (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b, c)| SymMatrix::from_rows(&[vec![a, b], vec![b, c]]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stencil_is_exact_on_quadratics(a in sym2(), g in (-2.0f64..2.0, -2.0f64..2.0)) {
        let u = square(0.125, |x| 0.5 * a.quad(x) + g.0 * x[0] + g.1 * x[1]);
        for k in u.interior_indices() {
            let d = u.discrete_hessian(k).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((d.get(i, j) - a.get(i, j)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn sup_convolution_is_monotone_in_eps(c in prop::collection::vec(-1.0f64..1.0, 4)) {
        let u = square(1.0 / 16.0, |x| c[0] * (2.0 * x[0]).sin() + c[1] * x[0] * x[1] + c[2] * x[1].abs() + c[3]);
        let n = u.max_abs();
        let small = sup_convolution(&u, 0.01, n).unwrap();
        let large = sup_convolution(&u, 0.04, n).unwrap();
        let h = u.h();
        let shift = |g: &GridField| ((large.lo()[0] - g.lo()[0]) / h).round() as usize;
        for k in 0..large.len() {
            let idx = large.index_of(k);
            let at = |g: &GridField| g.get(g.flat(&[idx[0] + shift(g), idx[1] + shift(g)]));
            prop_assert!(at(&u) <= at(&small));
            prop_assert!(at(&small) <= at(&large));
        }
    }

    #[test]
    fn maximum_of_typed_fields_stays_typed(a in sym2(), b in sym2()) {
        // shift both into P by their smallest eigenvalue
        let pa = a.add_scaled_identity((-a.lambda_min().unwrap()).max(0.0));
        let pb = b.add_scaled_identity((-b.lambda_min().unwrap()).max(0.0));
        let h = 1.0 / 16.0;
        let u1 = square(h, |x| 0.5 * pa.quad(x) + 0.3 * x[0]);
        let u2 = square(h, |x| 0.5 * pb.quad(x) - 0.2 * x[1] + 0.1);
        let m = u1.zip_with(&u2, f64::max).unwrap();
        let f = ConeSet::psd(2);
        let s = ProbeSettings::default();
        prop_assert!(type_report(&u1, &f, 1e-7, 0, s).unwrap().pass);
        prop_assert!(type_report(&u2, &f, 1e-7, 0, s).unwrap().pass);
        // the cross stencil reads a gradient jump as curvature of order jump/h, so the
        // lattice certifies the maximum through directional second differences instead
        let at = |g: &GridField, i: i64, j: i64| g.get(g.flat(&[i as usize, j as usize]));
        let shape = m.shape().to_vec();
        for i in 1..shape[0] as i64 - 1 {
            for j in 1..shape[1] as i64 - 1 {
                for (di, dj) in [(1i64, 0i64), (0, 1), (1, 1), (1, -1)] {
                    let d2 = at(&m, i + di, j + dj) - 2.0 * at(&m, i, j) + at(&m, i - di, j - dj);
                    prop_assert!(d2 >= -1e-12, "({i},{j}) along ({di},{dj}): {d2}");
                }
                let one_branch = (-1..=1).all(|a| (-1..=1).all(|b| at(&u1, i + a, j + b) >= at(&u2, i + a, j + b)))
                    || (-1..=1).all(|a| (-1..=1).all(|b| at(&u1, i + a, j + b) <= at(&u2, i + a, j + b)));
                if one_branch {
                    let k = m.flat(&[i as usize, j as usize]);
                    prop_assert!(f.defect(&m.discrete_hessian(k).unwrap()).unwrap() >= -1e-7);
                }
            }
        }
    }
}

#[test]
fn documented_subaffine_examples() {
    let s = ProbeSettings::default();
    let saddle = square(0.0625, |x| x[0] * x[0] - x[1] * x[1]);
    let r = subaffine_report(&saddle, 1e-7, s).unwrap();
    assert!(r.pass && (r.worst_margin - 2.0).abs() < 1e-9);
    let bowl = square(0.0625, |x| -(x[0] * x[0] + x[1] * x[1]));
    assert!(!subaffine_report(&bowl, 1e-7, s).unwrap().pass);
    let kink = square(0.0625, |x| x[0].max(-x[0]));
    assert!(subaffine_report(&kink, 1e-7, s).unwrap().pass);
}

#[test]
fn report_invariant_pass_iff_margin_within_tolerance() {
    let u = square(0.125, |x| -0.5 * x[0] * x[0] + 0.5 * x[1] * x[1] - 0.01 * (x[0] * x[0] + x[1] * x[1]));
    for tol in [1e-3, 0.01, 0.02, 0.1] {
        let r = subaffine_report(&u, tol, ProbeSettings::default()).unwrap();
        assert_eq!(r.pass, r.worst_margin >= -tol);
        assert_eq!(r.tolerance, tol);
    }
}

#[test]
fn decreasing_sequences_keep_type() {
    // uₖ = |x|²/2 + |x₁|/k decreases to |x|²/2; every term and the limit are convex
    let f = ConeSet::psd(2);
    let h = 1.0 / 16.0;
    let mut prev: Option<GridField> = None;
    for k in 1..=3 {
        let u = square(h, |x| 0.5 * (x[0] * x[0] + x[1] * x[1]) + x[0].abs() / k as f64);
        assert!(type_report(&u, &f, 1e-7, 0, ProbeSettings::default()).unwrap().pass);
        if let Some(p) = &prev {
            assert!(u.values().iter().zip(p.values()).all(|(a, b)| a <= b));
        }
        prev = Some(u);
    }
    let limit = square(h, |x| 0.5 * (x[0] * x[0] + x[1] * x[1]));
    assert!(type_report(&limit, &f, 1e-7, 0, ProbeSettings::default()).unwrap().pass);
}

#[test]
fn sparse_flagged_points_still_pass_the_probe() {
    // λ_max ≥ 0 everywhere except at a few points patched to a local maximum of neighbors
    let h = 1.0 / 16.0;
    let mut u = square(h, |x| x[0] * x[0] - 0.5 * x[1] * x[1]);
    for idx in [[8usize, 8usize], [20, 11], [27, 25]] {
        let k = u.flat(&idx);
        let nb = [[1i64, 0], [-1, 0], [0, 1], [0, -1]]
            .iter()
            .map(|o| u.get(u.flat(&[(idx[0] as i64 + o[0]) as usize, (idx[1] as i64 + o[1]) as usize])))
            .fold(f64::NEG_INFINITY, f64::max);
        u.set(k, u.get(k).max(nb));
    }
    let r = subaffine_report(&u, 1e-7, ProbeSettings::default()).unwrap();
    let probe = r.probe.unwrap();
    assert_eq!(probe.violations, 0, "{probe:?}");
}

#[test]
fn sup_convolution_documented_examples() {
    let c = square(1.0 / 16.0, |_| 0.4);
    let s = sup_convolution(&c, 0.05, 0.4).unwrap();
    assert!(s.values().iter().all(|&v| v == 0.4));

    // 1D profile −a x² in x1: closed form −a x²/(1 + aε) up to lattice resolution
    let a = 1.0;
    let eps = 0.05;
    let h = 1.0 / 64.0;
    let u = square(h, |x| -a * x[0] * x[0]);
    let s = sup_convolution(&u, eps, 1.0).unwrap();
    for k in 0..s.len() {
        let x = s.coord(k);
        let exact = -a * x[0] * x[0] / (1.0 + a * eps);
        assert!((s.get(k) - exact).abs() <= h, "{x:?}");
    }
}

#[test]
fn sup_convolution_keeps_a_lattice_modulus_of_two_over_eps() {
    // u^ε + |x|²/ε is a maximum of affine functions, so second differences stay above −2/ε
    let u = square(1.0 / 32.0, |x| -0.1 * (14.0 * x[1]).cos() - 2.0 * x[0] * x[0]);
    for eps in [0.02, 0.05, 0.1] {
        let s = sup_convolution(&u, eps, u.max_abs()).unwrap();
        let m = quasiconvex_modulus(&s).unwrap();
        assert!(m <= 2.0 / eps + 1e-9, "eps {eps}: {m}");
        assert!(m <= quasiconvex_modulus(&u).unwrap() + 1e-9);
    }
}

#[test]
fn comparison_on_ordered_harmonic_fields() {
    let f = ConeSet::harm(2);
    let u = square(0.125, |x| x[0] * x[1] + x[0]);
    let v = square(0.125, |x| x[0] * x[1] + x[0] + 0.1 + 0.05 * (x[0] * x[0] - x[1] * x[1]));
    let r = comparison_check(&u, &v, &f, 1e-9, 1e-9).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn csv_roundtrip_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    let u = square(0.25, |x| (x[0] * 3.0).sin() * x[1] + 1e-17);
    u.write_csv(&path).unwrap();
    let back = GridField::read_csv(&path).unwrap();
    assert_eq!(back, u);
}
