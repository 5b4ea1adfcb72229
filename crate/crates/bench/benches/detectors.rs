use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mcmc_mimo::detect::{ml_bruteforce, rmcmc, rmcmc_with_restarts, DetectorParams, GibbsChain, ML_SEARCH_CAP};
use mcmc_mimo::rng::stream_rng;
use mcmc_mimo::system::{generate_flat_channel, mmse_detect, transmit_flat, FlatObservation, PowerImbalance, SnrConvention};
use mcmc_mimo::{ModAlphabet, NoiseStats};

fn instance(k: usize, a: &ModAlphabet, snr_db: f64, seed: u64) -> FlatObservation {
    let mut rng = stream_rng(seed, &[]);
    let ch = generate_flat_channel(k, k, PowerImbalance::None, &mut rng).unwrap();
    let s2 = SnrConvention::PerReceiveAntenna.sigma2(snr_db, k, a);
    transmit_flat(&ch, a, s2, &mut rng).unwrap()
}

fn gibbs_sweep(c: &mut Criterion) {
    let a = ModAlphabet::new(4).unwrap();
    let mut group = c.benchmark_group("gibbs_sweep");
    for k in [16, 32, 64, 128] {
        let obs = instance(k, &a, 8.0, 1);
        let start = vec![0u8; 2 * k];
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, _| {
            let mut chain = GibbsChain::new(obs.system.problem(), &a, &start, 1.0);
            let mut rng = stream_rng(2, &[]);
            b.iter(|| {
                chain.sweep(&mut rng);
                black_box(chain.cost())
            })
        });
    }
    group.finish();
}

fn rmcmc_detect(c: &mut Criterion) {
    let a = ModAlphabet::new(4).unwrap();
    let mut group = c.benchmark_group("rmcmc_4qam_9db");
    group.sample_size(20);
    for k in [8, 16, 32, 64] {
        let obs = instance(k, &a, 9.0, 3);
        let params = DetectorParams::rmcmc_preset(&a, k);
        let problem = obs.system.problem();
        let (start, _) = mmse_detect(&problem, &a).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, _| {
            let mut rng = stream_rng(4, &[]);
            b.iter(|| black_box(rmcmc(problem, &a, &start, &params, NoiseStats::PerfectCsi, &mut rng)))
        });
    }
    group.finish();
}

fn restarts_detect(c: &mut Criterion) {
    let mut group = c.benchmark_group("rmcmc_r_k16");
    group.sample_size(20);
    for (m, snr) in [(4, 9.0), (16, 17.0)] {
        let a = ModAlphabet::new(m).unwrap();
        let obs = instance(16, &a, snr, 5);
        let params = DetectorParams::restart_defaults(&a, 16);
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            let mut rng = stream_rng(6, &[]);
            b.iter(|| {
                black_box(rmcmc_with_restarts(obs.system.problem(), &a, &params, NoiseStats::PerfectCsi, &mut rng).unwrap())
            })
        });
    }
    group.finish();
}

fn ml_oracle(c: &mut Criterion) {
    let a = ModAlphabet::new(4).unwrap();
    let obs = instance(4, &a, 11.0, 7);
    c.bench_function("ml_bruteforce_4x4_4qam", |b| {
        b.iter(|| black_box(ml_bruteforce(obs.system.problem(), &a, ML_SEARCH_CAP).unwrap()))
    });
}

criterion_group!(benches, gibbs_sweep, rmcmc_detect, restarts_detect, ml_oracle);
criterion_main!(benches);
