use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mcmc_mimo::chanest::{
    channel_to_g, gibbs_channel_estimate, initial_estimate, transmit_matrix, vectorize_frame, generate_frame,
    FrameConfig, VarianceForm,
};
use mcmc_mimo::cpsc::{build_freq_model, generate_cpsc_frame, generate_fs_channel, CpscConfig};
use mcmc_mimo::rng::stream_rng;
use mcmc_mimo::system::{generate_flat_channel, lift_matrix, ObservationModel, PowerImbalance, SnrConvention};
use mcmc_mimo::ModAlphabet;

fn gibbs_estimator(c: &mut Criterion) {
    let a = ModAlphabet::new(4).unwrap();
    let cfg = FrameConfig::new(16, 16, 9, a.clone()).unwrap();
    let mut rng = stream_rng(1, &[]);
    let ch = generate_flat_channel(16, 16, PowerImbalance::None, &mut rng).unwrap();
    let s2 = SnrConvention::PerReceiveAntenna.sigma2(8.0, 16, &a);
    let frame = generate_frame(&cfg, ch, s2, &mut rng).unwrap();
    let x_tot = transmit_matrix(&cfg, &frame.data);
    let vm = vectorize_frame(&frame.received, &x_tot).unwrap();
    let h0 = initial_estimate(&frame.pilot_block(&cfg), cfg.pilot_amplitude()).unwrap();
    let g0 = channel_to_g(&lift_matrix(&h0));
    c.bench_function("gibbs_channel_estimate_k16_q9", |b| {
        let mut rng = stream_rng(2, &[]);
        b.iter(|| {
            black_box(gibbs_channel_estimate(&vm, vm.r(), s2, &g0, 2, VarianceForm::Augmented, &mut rng))
        })
    });
}

fn cpsc_model(c: &mut Criterion) {
    let a = ModAlphabet::new(4).unwrap();
    let cfg = CpscConfig::uniform(8, 8, 4, 32, 1, a).unwrap();
    let mut rng = stream_rng(3, &[]);
    let ch = generate_fs_channel(&cfg, &mut rng);
    let frame = generate_cpsc_frame(&cfg, ch.clone(), cfg.sigma2(10.0), &mut rng).unwrap();
    c.bench_function("cpsc_build_freq_model_k8_i32", |b| b.iter(|| black_box(build_freq_model(&ch, 32))));
    let model = build_freq_model(&ch, 32);
    c.bench_function("cpsc_mmse_solve_k8_i32", |b| {
        b.iter(|| black_box(model.regularized_solve(&frame.z[0], 0.5).unwrap()))
    });
}

criterion_group!(benches, gibbs_estimator, cpsc_model);
criterion_main!(benches);
