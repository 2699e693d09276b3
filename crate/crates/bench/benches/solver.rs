use criterion::{criterion_group, criterion_main, Criterion};
use dirset_bench::square_problem;
use dirset_core::solver::{solve, Sweep};
use dirset_core::{ConeSet, SolverOptions};

fn sweeps(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve h=1/16");
    g.sample_size(10);
    for set in [ConeSet::harm(2), ConeSet::psd(2), ConeSet::special_lagrangian(0.6, 2).unwrap()] {
        let p = square_problem(set, 1.0 / 16.0);
        for sweep in [Sweep::Lexicographic, Sweep::RedBlack] {
            let o = SolverOptions { sweep, ..Default::default() };
            g.bench_function(format!("{} {sweep:?}", p.set.name()), |b| {
                b.iter(|| solve(&p, &o).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
