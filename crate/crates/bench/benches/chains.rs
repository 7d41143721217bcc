use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use measchain::distributions::{fit_gmm_random_search, kld_estimate, FitTarget, GmmParams, LmmParams};
use measchain::network::{build_delay_schedule, BufferModel, LatencyModel};
use measchain::pipeline::{load_history, load_truth, simulate_pmu, simulate_scada, RunConfig};
use measchain::pmu::{estimate_phasor, make_filter, synth_waveform, FilterOverrides, TimingErrorModel};
use measchain::rng::seeded;

fn example_config() -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/example.toml");
    RunConfig::load(&path).expect("example config")
}

fn distributions(c: &mut Criterion) {
    let g = GmmParams::new(vec![0.3, 0.7], vec![-0.004, 0.002], vec![0.002, 0.005]).unwrap();
    let (mu, sigma) = g.total_moments();
    c.bench_function("gmm_sample_100k", |b| {
        let mut rng = seeded(1);
        b.iter(|| black_box(g.sample(100_000, &mut rng)))
    });
    c.bench_function("kld_estimate_100k", |b| {
        let mut rng = seeded(2);
        b.iter(|| black_box(kld_estimate(&g, mu, sigma, 100_000, &mut rng).unwrap()))
    });
    let target = FitTarget {
        k_components: 3,
        total_std: 0.01,
        total_mean: 0.0,
        similarity_threshold: 0.1,
        sample_count: 10_000,
        max_iterations: 10_000,
    };
    // fixed seed so every iteration repeats the same search
    c.bench_function("fit_gmm_k3", |b| {
        b.iter(|| black_box(fit_gmm_random_search(&target, &mut seeded(3)).unwrap()))
    });
}

fn network(c: &mut Criterion) {
    let latency = LatencyModel::Lmm(LmmParams::new(vec![0.5, 0.5], vec![-3.0, -0.5], vec![0.3, 0.9]).unwrap());
    c.bench_function("delay_schedule_10k", |b| {
        let (mut lat, mut buf) = (seeded(4), seeded(5));
        b.iter(|| {
            black_box(
                build_delay_schedule(&latency, 0.25, 10_000, 0.0, BufferModel::Uniform, &mut lat, &mut buf).unwrap(),
            )
        })
    });
}

fn pmu(c: &mut Criterion) {
    let spec = make_filter(60.0, 60.0, &FilterOverrides::default()).unwrap();
    let x = synth_waveform(1.0, 0.3, 59.5, spec.sampling_freq, 1.0, &TimingErrorModel::default()).unwrap();
    c.bench_function("estimate_phasor_n70", |b| {
        b.iter(|| black_box(estimate_phasor(&x, 480, &spec).unwrap()))
    });
}

fn pipeline(c: &mut Criterion) {
    let config = example_config();
    let truth = load_truth(&config.truth_path).unwrap();
    let history = load_history(config.history_path.as_deref().expect("history_path")).unwrap();
    c.bench_function("scada_run_example", |b| {
        b.iter_batched(
            || history.clone(),
            |h| black_box(simulate_scada(&config, &truth, Some(h)).unwrap()),
            BatchSize::SmallInput,
        )
    });
    let mut group = c.benchmark_group("pmu");
    group.sample_size(10);
    group.bench_function("pmu_run_example", |b| {
        b.iter(|| black_box(simulate_pmu(&config, &truth).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, distributions, network, pmu, pipeline);
criterion_main!(benches);
