//! Shared fixtures for the benchmarks.

use dirset_core::expr::parse;
use dirset_core::sampling::{random_sym, rng};
use dirset_core::solver::DirichletProblem;
use dirset_core::{ConeSet, GridBox, SymMatrix};

/// Fixed batch of random symmetric matrices.
pub fn matrices(n: usize, count: usize) -> Vec<SymMatrix> {
    let mut r = rng(7);
    (0..count).map(|_| random_sym(&mut r, n)).collect()
}

/// Unit-square problem with smooth boundary data.
pub fn square_problem(set: ConeSet, h: f64) -> DirichletProblem {
    DirichletProblem::new(
        set,
        GridBox::cube(2, 0.0, 1.0).expect("valid box"),
        h,
        parse("sin(3*x1)*x2 + x2^2 - x1*x2").expect("valid expression"),
    )
    .expect("valid problem")
}
