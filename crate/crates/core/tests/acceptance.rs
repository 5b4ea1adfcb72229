//! End-to-end acceptance checks. Each test writes one `PASS`/`FAIL` line
//! straight to stdout (bypassing the test harness capture) and then asserts.

use std::io::Write;
use std::sync::OnceLock;

use mcmc_mimo::chanest::{crlb_mse, CrlbMode, GibbsEstimator, VarianceForm};
use mcmc_mimo::cpsc::*;
use mcmc_mimo::detect::{rmcmc_traced, rmcmc_with_restarts, DetectorParams, GibbsChain};
use mcmc_mimo::harness::*;
use mcmc_mimo::rng::stream_rng;
use mcmc_mimo::system::{
    channel::complex_gaussian, generate_flat_channel, lift_matrix, siso_awgn_ber, transmit_flat, DenseModel,
    ObservationModel, PowerImbalance, Problem, SnrConvention,
};
use mcmc_mimo::{ModAlphabet, NoiseStats};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

fn report(pass: bool, name: &str, detail: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    let _ = out.flush();
}

fn config(sets: &[&str]) -> SimConfig {
    let mut cfg = SimConfig::default();
    for kv in sets {
        cfg.apply_override(kv).unwrap();
    }
    cfg
}

fn snr_at(result: &SweepResult, iteration: usize, ber: f64) -> f64 {
    interpolate_snr_at_ber(&result.curve(iteration), ber).unwrap_or(f64::NAN)
}

/// Like [`snr_at`], but a curve that stays above `ber` over the whole grid
/// crosses beyond it, reported as +inf.
fn crossing(result: &SweepResult, iteration: usize, ber: f64) -> f64 {
    let curve = result.curve(iteration);
    match interpolate_snr_at_ber(&curve, ber) {
        Ok(s) => s,
        Err(_) if !curve.is_empty() && curve.iter().all(|&(_, b)| b > ber) => f64::INFINITY,
        Err(_) => f64::NAN,
    }
}

/// Linear interpolation of `f` over the SNR grid of `rows` at `snr`.
fn value_at(rows: &[SweepRow], snr: f64, f: impl Fn(&SweepRow) -> f64) -> f64 {
    for w in rows.windows(2) {
        if w[0].snr_db <= snr && snr <= w[1].snr_db {
            let t = (snr - w[0].snr_db) / (w[1].snr_db - w[0].snr_db);
            return f(&w[0]) + t * (f(&w[1]) - f(&w[0]));
        }
    }
    f64::NAN
}

/// SNR where the exact AWGN BER equals `target`, by bisection.
fn awgn_snr_at(alphabet: &ModAlphabet, target: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if siso_awgn_ber(alphabet, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn oracle_equivalence_4qam() {
    let mut lines = Vec::new();
    let mut ok = true;
    for kind in ["rmcmc", "rmcmc-r"] {
        let kv = format!("detector.kind={kind}");
        let cfg = config(&["system.k=4", "system.n=4", "sim.snr_db=11", "sim.max_trials=100000", "sim.seed=101", &kv]);
        let cmp = compare_with_ml(&cfg).unwrap();
        ok &= cmp.within(3.0);
        lines.push(format!(
            "{kind} BER {:.4e} vs ML {:.4e} ({:.2} sigma)",
            cmp.detector.ber,
            cmp.ml.ber,
            cmp.deviation()
        ));
    }
    report(ok, "oracle equivalence, K=N=4 4-QAM 11 dB, 1e5 trials", lines.join("; "));
    assert!(ok);
}

#[test]
fn oracle_equivalence_16qam() {
    let cfg = config(&[
        "system.k=4",
        "system.n=4",
        "system.modulation=16",
        "sim.snr_db=18",
        "sim.max_trials=100000",
        "sim.seed=102",
        "detector.kind=rmcmc-r",
    ]);
    let cmp = compare_with_ml(&cfg).unwrap();
    let ok = cmp.within(3.0);
    report(
        ok,
        "oracle equivalence, K=N=4 16-QAM 18 dB, 1e5 trials",
        format!(
            "rmcmc-r BER {:.4e} vs ML {:.4e} ({:.2} sigma)",
            cmp.detector.ber,
            cmp.ml.ber,
            cmp.deviation()
        ),
    );
    assert!(ok);
}

#[test]
fn operating_points_at_one_percent() {
    let base = ["system.k=16", "system.n=16", "sim.target_errors=500", "sim.max_trials=20000", "sim.seed=103"];
    let mut q4 = config(&base);
    q4.apply_override("sim.snr_db=7:1:11").unwrap();
    let mut q16 = config(&base);
    q16.apply_override("system.modulation=16").unwrap();
    q16.apply_override("sim.snr_db=15:1:19").unwrap();
    let s4 = snr_at(&run_sweep(&q4).unwrap(), 0, 1e-2);
    let s16 = snr_at(&run_sweep(&q16).unwrap(), 0, 1e-2);
    let gap = s16 - s4;
    let ok = (s4 - 9.0).abs() <= 0.7 && (s16 - 17.0).abs() <= 0.7 && (gap - 8.0).abs() <= 0.5;
    report(
        ok,
        "R-MCMC-R 1e-2 operating points, K=N=16",
        format!("4-QAM {s4:.2} dB, 16-QAM {s16:.2} dB, gap {gap:.2} dB"),
    );
    assert!(ok);
}

#[test]
fn conventional_mcmc_stalls_at_high_snr() {
    let base = ["system.k=16", "system.n=16", "sim.target_errors=300", "sim.max_trials=20000", "sim.seed=104"];
    let mut conv = config(&base);
    for kv in ["detector.kind=conv-mcmc", "detector.alpha=1", "sim.snr_db=11,13"] {
        conv.apply_override(kv).unwrap();
    }
    let mut rm = config(&base);
    for kv in ["detector.kind=rmcmc", "sim.snr_db=13"] {
        rm.apply_override(kv).unwrap();
    }
    let c = run_sweep(&conv).unwrap();
    let r = run_sweep(&rm).unwrap();
    let (c11, c13, r13) = (c.rows[0].ber, c.rows[1].ber, r.rows[0].ber);
    let ok = c13 > c11 || c13 >= 5.0 * r13;
    report(
        ok,
        "conventional MCMC stalling, K=N=16 4-QAM",
        format!("conv 11 dB {c11:.3e}, conv 13 dB {c13:.3e}, R-MCMC 13 dB {r13:.3e}"),
    );
    assert!(ok);
}

#[test]
fn rmcmc_complexity_scaling() {
    let mut pts = Vec::new();
    for k in [8usize, 16, 32, 64] {
        let ks = format!("system.k={k}");
        let ns = format!("system.n={k}");
        let cfg = config(&[
            &ks,
            &ns,
            "detector.kind=rmcmc",
            "sim.snr_db=7:1:11",
            "sim.target_errors=500",
            "sim.max_trials=20000",
            "sim.seed=105",
        ]);
        let res = run_sweep(&cfg).unwrap();
        let snr = snr_at(&res, 0, 1e-2);
        let ops = value_at(&res.rows, snr, |r| r.avg_real_ops_per_bit);
        pts.push((k as f64, ops));
    }
    // least-squares slope on log-log axes
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x.ln() - mx) * (y.ln() - my), b + (x.ln() - mx).powi(2))
    });
    let slope = num / den;
    let ok = (1.9..=2.1).contains(&slope);
    let table: Vec<String> = pts.iter().map(|(k, o)| format!("K={k} {o:.0}")).collect();
    report(
        ok,
        "R-MCMC ops/bit scaling at 1e-2 BER",
        format!("exponent {slope:.3} from [{}]", table.join(", ")),
    );
    assert!(ok);
}

#[test]
fn large_system_near_awgn() {
    let cfg = config(&[
        "system.k=128",
        "system.n=128",
        "detector.kind=rmcmc",
        "sim.snr_db=9,10,11",
        "sim.target_errors=500",
        "sim.max_trials=8000",
        "sim.seed=106",
    ]);
    let s = snr_at(&run_sweep(&cfg).unwrap(), 0, 1e-3);
    let awgn = awgn_snr_at(&ModAlphabet::new(4).unwrap(), 1e-3);
    let ok = (s - awgn).abs() <= 1.0;
    report(
        ok,
        "K=N=128 R-MCMC near SISO AWGN at 1e-3",
        format!("R-MCMC {s:.2} dB, AWGN {awgn:.2} dB"),
    );
    assert!(ok);
}

/// Estimated-CSI sweep and its perfect-CSI reference, shared by two checks.
fn flat_estimation_runs() -> &'static (SimConfig, SweepResult, SweepResult) {
    static RUNS: OnceLock<(SimConfig, SweepResult, SweepResult)> = OnceLock::new();
    RUNS.get_or_init(|| {
        let est = config(&[
            "sim.scenario=flat-estimated",
            "system.k=16",
            "system.n=16",
            "frame.q=9",
            "sim.snr_db=2:1:12",
            "sim.target_errors=0",
            "sim.max_trials=200",
            "sim.seed=107",
        ]);
        let mut perfect = est.clone();
        perfect.apply_override("frame.csi=perfect").unwrap();
        let a = run_sweep(&est).unwrap();
        let b = run_sweep(&perfect).unwrap();
        (est, a, b)
    })
}

#[test]
fn channel_estimation_mse_ordering() {
    let (cfg, est, _) = flat_estimation_runs();
    let plan = SweepPlan::new(cfg).unwrap();
    let frame = plan.frame.clone().unwrap();
    let mut ok = true;
    let mut worst = Vec::new();
    for &snr in &cfg.snr_db {
        let mse: Vec<f64> = est.rows.iter().filter(|r| r.snr_db == snr).map(|r| r.mse.unwrap()).collect();
        let bound = crlb_mse(&frame, plan.sigma2(snr), CrlbMode::FullFrame);
        let good = mse.len() == 3 && mse[0] > mse[1] && mse[1] > mse[2] && mse[2] >= bound;
        ok &= good;
        if !good || snr == cfg.snr_db[cfg.snr_db.len() - 1] {
            worst.push(format!(
                "{snr} dB: {:.3e} > {:.3e} > {:.3e} >= {bound:.3e}",
                mse[0], mse[1], mse[2]
            ));
        }
    }
    report(
        ok,
        "Gibbs channel estimation MSE ordering, K=N=16 Q=9, 2..12 dB",
        worst.join("; "),
    );
    assert!(ok);
}

#[test]
fn estimated_csi_gap() {
    let (_, est, perfect) = flat_estimation_runs();
    let s_est = snr_at(est, 2, 1e-2);
    let s_perf = snr_at(perfect, 0, 1e-2);
    let gap = s_est - s_perf;
    let ok = gap <= 2.0;
    report(
        ok,
        "estimated-CSI BER gap at 1e-2, K=N=16 Q=9",
        format!("2 iterations {s_est:.2} dB, perfect CSI {s_perf:.2} dB, gap {gap:.2} dB"),
    );
    assert!(ok);
}

#[test]
fn cpsc_structural_identities() {
    let mut worst_diag = 0f64;
    for (i, seed) in [(4usize, 1u64), (8, 2), (64, 3)] {
        let mut rng = stream_rng(seed, &[]);
        for l in [1, 2, i.min(5)] {
            let taps: Vec<Complex64> = (0..l).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let f = dft_matrix(i);
            let d = &f * circulant(&taps, i) * f.adjoint();
            let spec = DMatrix::from_diagonal(&DVector::from_vec(tap_spectrum(&taps, i)));
            worst_diag = worst_diag.max((d - spec).iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
    }

    let (n, k, l, i) = (3, 2, 4, 32);
    let mut rng = stream_rng(4, &[]);
    let ch = FreqSelChannel::new(n, k, l, (0..n * k * l).map(|_| complex_gaussian(&mut rng, 1.0)).collect()).unwrap();
    let x: Vec<Vec<Complex64>> = (0..k).map(|_| (0..i).map(|_| complex_gaussian(&mut rng, 2.0)).collect()).collect();
    let rx = convolve_block(&ch, &x, DMatrix::from_element(n, i + l - 1, Complex64::new(0.0, 0.0)));
    let y = remove_cyclic_prefix(&rx.samples, l);
    let mut worst_cp = 0f64;
    for j in 0..n {
        let mut expect = DVector::from_element(i, Complex64::new(0.0, 0.0));
        for (u, xu) in x.iter().enumerate() {
            let taps: Vec<Complex64> = (0..l).map(|t| ch.tap(j, u, t)).collect();
            expect += circulant(&taps, i) * DVector::from_vec(xu.clone());
        }
        for t in 0..i {
            worst_cp = worst_cp.max((y[(j, t)] - expect[t]).norm());
        }
    }

    let mut mismatches = 0;
    let mut blocks = 0;
    let alphabet = ModAlphabet::new(4).unwrap();
    for seed in 0..50u64 {
        let cfg = CpscConfig::uniform(4, 4, 1, 1, 4, alphabet.clone()).unwrap();
        let mut rng = stream_rng(seed, &[5]);
        let ch = generate_fs_channel(&cfg, &mut rng);
        let frame = generate_cpsc_frame(&cfg, ch, cfg.sigma2(8.0), &mut rng).unwrap();
        let freq = build_freq_model(&frame.channel, 1);
        let flat = DenseModel::new(lift_matrix(&frame.channel.tap_matrix(0)));
        let params = DetectorParams::restart_defaults(&alphabet, 4);
        for (b, z) in frame.z.iter().enumerate() {
            let run = |m: &dyn ObservationModel| {
                let mut rng = stream_rng(seed, &[6, b as u64]);
                let p = Problem { model: m, y: z, sigma2: frame.sigma2 };
                rmcmc_with_restarts(p, &alphabet, &params, NoiseStats::PilotCsi, &mut rng).unwrap()
            };
            let (a, f) = (run(&freq), run(&flat));
            blocks += 1;
            if a.x_hat != f.x_hat
                || a.best_cost.to_bits() != f.best_cost.to_bits()
                || a.sweeps_used != f.sweeps_used
                || a.restarts_used != f.restarts_used
            {
                mismatches += 1;
            }
        }
    }
    let ok = worst_diag < 1e-10 && worst_cp < 1e-10 && mismatches == 0;
    report(
        ok,
        "CPSC structural identities",
        format!(
            "diagonalization residual {worst_diag:.2e}, CP residual {worst_cp:.2e}, L=1 I=1 mismatches {mismatches}/{blocks}"
        ),
    );
    assert!(ok);
}

#[test]
fn cpsc_iterative_receiver() {
    let est = config(&[
        "sim.scenario=cpsc",
        "system.k=8",
        "system.n=8",
        "frame.l=4",
        "frame.i=32",
        "frame.q=9",
        "sim.snr_db=7:1:12",
        "sim.target_errors=0",
        "sim.max_trials=40",
        "sim.seed=110",
    ]);
    let mut perfect = est.clone();
    perfect.apply_override("frame.csi=perfect").unwrap();
    let e = run_sweep(&est).unwrap();
    let p = run_sweep(&perfect).unwrap();
    let s: Vec<f64> = (0..3).map(|it| crossing(&e, it, 1e-2)).collect();
    let sp = snr_at(&p, 0, 1e-2);
    let errors: Vec<u64> = (0..3).map(|it| e.rows_for(it).map(|r| r.bit_errors).sum()).collect();
    let gap = s[2] - sp;
    let monotone = errors[0] > errors[1] && errors[1] > errors[2] && s[0] >= s[1] && s[1] >= s[2];
    let ok = gap <= 2.0 && monotone;
    report(
        ok,
        "CPSC iterative estimation/detection, K=N=8 L=4 I=32 Q=9",
        format!(
            "1e-2 SNR by iteration {:.2}/{:.2}/{:.2} dB, perfect CSI {sp:.2} dB, gap {gap:.2} dB, errors {:?}",
            s[0], s[1], s[2], errors
        ),
    );
    assert!(ok);
}

/// Largest total-variation distance between the pure Gibbs chain's empirical
/// state distribution and the exact posterior on 2-coordinate binary systems.
fn gibbs_stationary_tv() -> f64 {
    let alphabet = ModAlphabet::new(4).unwrap();
    let mut worst = 0f64;
    for seed in 0..3u64 {
        let mut rng = stream_rng(seed, &[11]);
        let ch = generate_flat_channel(1, 1, PowerImbalance::None, &mut rng).unwrap();
        let sigma2 = SnrConvention::PerReceiveAntenna.sigma2(2.0, 1, &alphabet);
        let obs = transmit_flat(&ch, &alphabet, sigma2, &mut rng).unwrap();
        let p = obs.system.problem();
        let states: Vec<[u8; 2]> = vec![[0, 0], [0, 1], [1, 0], [1, 1]];
        let weights: Vec<f64> = states.iter().map(|s| (-p.cost(&alphabet.values(s)) / sigma2).exp()).collect();
        let z: f64 = weights.iter().sum();
        let mut chain = GibbsChain::new(p, &alphabet, &[0, 0], 1.0);
        for _ in 0..1000 {
            chain.sweep(&mut rng);
        }
        let samples = 1_000_000;
        let mut counts = [0u64; 4];
        for _ in 0..samples {
            chain.sweep(&mut rng);
            let s = chain.state();
            counts[(s[0] * 2 + s[1]) as usize] += 1;
        }
        let tv = 0.5
            * counts
                .iter()
                .zip(&weights)
                .map(|(&c, w)| (c as f64 / samples as f64 - w / z).abs())
                .sum::<f64>();
        worst = worst.max(tv);
    }
    worst
}

/// Largest deviation of the estimator's (mean, variance) from a grid scan of
/// the exact one-coordinate posterior.
fn estimator_grid_error() -> f64 {
    let mut rng = stream_rng(12, &[]);
    let s = DMatrix::from_fn(12, 4, |_, _| complex_gaussian(&mut rng, 1.0).re);
    let r: Vec<f64> = (0..12).map(|_| complex_gaussian(&mut rng, 2.0).re).collect();
    let model = DenseModel::new(s);
    let sigma2 = 0.8;
    let g0 = [0.3, -0.2, 0.5, 0.1];
    let est = GibbsEstimator::new(&model, &r, sigma2, &g0, VarianceForm::Augmented);
    let mut worst = 0f64;
    for i in 0..4 {
        let logp = |t: f64| {
            let mut g = g0;
            g[i] = t;
            let e: f64 = model.residual(&r, &g).iter().map(|v| v * v).sum();
            -e / sigma2 - t * t
        };
        let steps = 20_000;
        let (lo, hi) = (-8.0, 8.0);
        let h = (hi - lo) / steps as f64;
        let pts: Vec<(f64, f64)> = (0..=steps).map(|k| lo + k as f64 * h).map(|t| (t, logp(t))).collect();
        let top = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = pts.iter().map(|p| (p.1 - top).exp()).collect();
        let z: f64 = w.iter().sum();
        let mean = pts.iter().zip(&w).map(|(p, w)| p.0 * w).sum::<f64>() / z;
        let var = pts.iter().zip(&w).map(|(p, w)| (p.0 - mean).powi(2) * w).sum::<f64>() / z;
        let (m, v) = est.conditional_params(i);
        worst = worst.max((m - mean).abs()).max((v - var).abs());
    }
    worst
}

/// Largest |frequency − 1/(2K)| in standard errors over all coordinates.
fn randomization_rate_z() -> f64 {
    let alphabet = ModAlphabet::new(16).unwrap();
    let mut rng = stream_rng(13, &[]);
    let ch = generate_flat_channel(4, 4, PowerImbalance::None, &mut rng).unwrap();
    let obs = transmit_flat(&ch, &alphabet, 1.0, &mut rng).unwrap();
    let sweeps = 100_000;
    // a stalling floor equal to the budget keeps the run going for every sweep
    let params = DetectorParams {
        c_min: sweeps as f64,
        max_iter: sweeps,
        ..DetectorParams::restart_defaults(&alphabet, 4)
    };
    let (res, trace) = rmcmc_traced(obs.system.problem(), &alphabet, &[0; 8], &params, NoiseStats::PerfectCsi, &mut rng);
    let t = res.sweeps_used as f64;
    let p = 1.0 / 8.0;
    let se = (p * (1.0 - p) / t).sqrt();
    trace
        .random_updates
        .iter()
        .map(|&c| (c as f64 / t - p).abs() / se)
        .fold(0.0, f64::max)
}

#[test]
fn sampler_correctness() {
    let tv = gibbs_stationary_tv();
    let grid = estimator_grid_error();
    let z = randomization_rate_z();
    let ok = tv <= 0.02 && grid <= 1e-6 && z <= 3.0;
    report(
        ok,
        "sampler correctness",
        format!("Gibbs TV {tv:.4}, estimator grid error {grid:.2e}, randomization rate {z:.2} SE"),
    );
    assert!(ok);
}
