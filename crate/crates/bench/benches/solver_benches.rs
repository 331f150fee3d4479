use criterion::{black_box, criterion_group, criterion_main, Criterion};

use cauchy_reg::harness::{self, ExperimentConfig};
use cauchy_reg::kernels;
use cauchy_reg::model::BenchmarkProblem;
use cauchy_reg::solver::{self, Grid};
use cauchy_reg::spectral::{EigenBasis, QuadratureRule};
use cauchy_reg::RegParams;

fn bench_kernels(c: &mut Criterion) {
    let lambda = (20.0 * std::f64::consts::PI).powi(2);
    c.bench_function("cosh_reg", |b| {
        b.iter(|| kernels::cosh_reg(black_box(1e-4), black_box(lambda), 0.5, 1.0).unwrap())
    });
    c.bench_function("sinh_reg_diff_moments", |b| {
        b.iter(|| {
            kernels::sinh_reg_diff_moments(black_box(1e-4), black_box(lambda), 0.9, 0.5, 0.6, 1.0)
                .unwrap()
        })
    });
}

fn bench_projection(c: &mut Criterion) {
    let basis = EigenBasis::dirichlet_sine(20).unwrap();
    let rule = QuadratureRule::for_modes(80).unwrap();
    c.bench_function("forward_coeff_mode20", |b| {
        b.iter(|| {
            basis
                .forward_coeff(&rule, black_box(20), |x| x * x * (1.0 - x))
                .unwrap()
        })
    });
}

fn bench_march(c: &mut Criterion) {
    let problem = BenchmarkProblem::new(1.0).unwrap();
    let source = problem.source_spec();

    // Coarse table-sized march.
    let basis_small = EigenBasis::dirichlet_sine(2).unwrap();
    let rule_small = QuadratureRule::trapezoid(20).unwrap();
    let g_small = basis_small.project_fn(&rule_small, |x| problem.g_data(x)).unwrap();
    let params = RegParams::new(1e-4, 1.0).unwrap();
    let grid_small = Grid::new(2, 12, 20).unwrap();
    c.bench_function("march_n2_m12", |b| {
        b.iter(|| {
            solver::regularized_march(
                &basis_small,
                &rule_small,
                &source,
                black_box(&[0.0, 0.0]),
                &g_small,
                &vec![0.0; rule_small.len()],
                &params,
                &grid_small,
            )
            .unwrap()
        })
    });

    // Rate-sweep-sized march.
    let basis = EigenBasis::dirichlet_sine(20).unwrap();
    let rule = QuadratureRule::for_modes(80).unwrap();
    let g_modes = basis.project_fn(&rule, |x| problem.g_data(x)).unwrap();
    let grid = Grid::new(20, 60, 80).unwrap();
    c.bench_function("march_n20_m60", |b| {
        b.iter(|| {
            solver::regularized_march(
                &basis,
                &rule,
                &source,
                black_box(&[0.0; 20]),
                &g_modes,
                &vec![0.0; rule.len()],
                &params,
                &grid,
            )
            .unwrap()
        })
    });
}

fn bench_table_run(c: &mut Criterion) {
    let mut config = ExperimentConfig::table1_defaults();
    config.epsilons = vec![1e-3];
    c.bench_function("run_table_single_eps", |b| {
        b.iter(|| harness::run_table(black_box(&config)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_kernels,
    bench_projection,
    bench_march,
    bench_table_run
);
criterion_main!(benches);
