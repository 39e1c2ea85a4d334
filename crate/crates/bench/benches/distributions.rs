use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use shrinkdist::impossibility::estimator_worst_case;
use shrinkdist::montecarlo::ks_distance;
use shrinkdist::normal::cdf;
use shrinkdist::{
    canonical_scenarios, finite_sample_dist, simulate_estimates, CdfEstimatorSpec, SimConfig, TuningPath,
};
use shrinkdist_bench::{figure_config, KINDS};

fn normal_cdf(c: &mut Criterion) {
    c.bench_function("normal_cdf_1k", |b| {
        b.iter(|| (0..1000).map(|i| cdf(black_box(-8.0 + 0.016 * i as f64))).sum::<f64>())
    });
}

fn closed_form(c: &mut Criterion) {
    let (p, t) = figure_config();
    let mut g = c.benchmark_group("finite_sample_dist");
    for kind in KINDS {
        g.bench_with_input(BenchmarkId::new("build_and_eval_100", kind), &kind, |b, &k| {
            b.iter(|| {
                let d = finite_sample_dist(k, &p, &t).unwrap();
                (0..100).map(|i| d.cdf(-5.0 + 0.1 * i as f64)).sum::<f64>()
            })
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let (p, t) = figure_config();
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    for kind in KINDS {
        let cfg = SimConfig { seed: 1, replications: 100_000, point: p, tuning: t };
        let d = finite_sample_dist(kind, &p, &t).unwrap();
        g.bench_with_input(BenchmarkId::new("simulate_and_ks_1e5", kind), &kind, |b, &k| {
            b.iter(|| ks_distance(&simulate_estimates(k, &cfg).unwrap(), &d))
        });
    }
    g.finish();
}

fn experiments(c: &mut Criterion) {
    let mut g = c.benchmark_group("experiments");
    g.sample_size(10);
    let scenarios = canonical_scenarios(3.7).unwrap();
    g.bench_function("limit_scenarios", |b| {
        b.iter(|| scenarios.iter().map(|s| s.check(&[1_000, 1_000_000]).unwrap().rows.len()).sum::<usize>())
    });
    let path = TuningPath::new(1.0, 0.25).unwrap();
    let spec = CdfEstimatorSpec::PretestPlugin { gamma: 0.25 };
    g.bench_function("pretest_worst_case", |b| {
        b.iter(|| estimator_worst_case(&spec, KINDS[0], 10_000, 0.0, &path, 2.0, 21, 1, 2_000).unwrap().summary.sup)
    });
    g.finish();
}

criterion_group!(benches, normal_cdf, closed_form, monte_carlo, experiments);
criterion_main!(benches);
