use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mcmc_mimo::harness::{
    compare_with_ml, emit_csv, run_sweep_with_threads, default_threads, DetectorKind, FrameRecord, SimConfig,
    SweepPlan, CONFIG_KEYS,
};

#[derive(Parser)]
#[command(name = "mcmc-mimo", version, about = "MCMC receivers for large-scale uplink MU-MIMO")]
struct Cli {
    /// Worker threads (defaults to MIMO_MCMC_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file with [sim], [system], [detector] and [frame] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set system.k=32. Repeatable; applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => SimConfig::load(path)?,
            None => SimConfig::default(),
        };
        for kv in &self.set {
            cfg.apply_override(kv).with_context(|| format!("--set {kv}"))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a BER/MSE/complexity sweep and write one CSV row per SNR point and iteration.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
        /// Record per-point wall time (makes the CSV non-reproducible).
        #[arg(long)]
        wall_time: bool,
    },
    /// Compare R-MCMC or R-MCMC-R against exhaustive ML on small flat systems.
    OracleCheck {
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long = "mod", default_value_t = 4)]
        modulation: usize,
        #[arg(long, default_value_t = 11.0)]
        snr: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// rmcmc or rmcmc-r.
        #[arg(long, default_value = "rmcmc-r")]
        detector: String,
        /// Allowed deviation in binomial standard deviations of the ML BER.
        #[arg(long, default_value_t = 3.0)]
        sigmas: f64,
    },
    /// Write the binary record of one trial for replay.
    DumpFrame {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        snr_index: usize,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the configured receiver on a recorded trial.
    Replay {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        record: PathBuf,
    },
    /// List the accepted config keys.
    Keys,
}

fn run(cli: Cli) -> Result<bool> {
    let threads = cli.threads.or_else(default_threads);
    match cli.command {
        Command::Simulate { config, out, wall_time } => {
            let mut cfg = config.load()?;
            cfg.wall_time |= wall_time;
            let result = run_sweep_with_threads(&cfg, threads)?;
            emit_csv(&result, &out)?;
            for r in &result.rows {
                eprintln!(
                    "snr {:>6} dB  iter {}  trials {:>8}  ber {:.3e}  ops/bit {:.3e}",
                    r.snr_db, r.iteration, r.trials, r.ber, r.avg_real_ops_per_bit
                );
            }
            Ok(true)
        }
        Command::OracleCheck { k, modulation, snr, trials, seed, detector, sigmas } => {
            let mut cfg = SimConfig::default();
            for kv in [
                format!("system.k={k}"),
                format!("system.n={k}"),
                format!("system.modulation={modulation}"),
                format!("sim.snr_db={snr}"),
                format!("sim.max_trials={trials}"),
                format!("sim.seed={seed}"),
                format!("detector.kind={detector}"),
            ] {
                cfg.apply_override(&kv)?;
            }
            if !matches!(cfg.detector, DetectorKind::Rmcmc | DetectorKind::RmcmcR) {
                bail!("--detector must be rmcmc or rmcmc-r");
            }
            cfg.validate()?;
            let cmp = compare_with_ml(&cfg)?;
            let pass = cmp.within(sigmas);
            println!(
                "{} {detector} ber {:.4e} vs ml {:.4e} ({} bits, {:.2} sigma)",
                if pass { "PASS" } else { "FAIL" },
                cmp.detector.ber,
                cmp.ml.ber,
                cmp.ml.bits,
                cmp.deviation()
            );
            Ok(pass)
        }
        Command::DumpFrame { config, snr_index, trial, out } => {
            let plan = SweepPlan::new(&config.load()?)?;
            FrameRecord::capture(&plan, snr_index, trial)?.write(&out)?;
            Ok(true)
        }
        Command::Replay { config, record } => {
            let plan = SweepPlan::new(&config.load()?)?;
            let rec = FrameRecord::read(&record)?;
            for (j, it) in rec.replay(&plan)?.iterations.iter().enumerate() {
                println!(
                    "iter {j}  bits {}  errors {}  ops {}  sweeps {}  restarts {}{}",
                    it.bits,
                    it.bit_errors,
                    it.real_ops,
                    it.sweeps,
                    it.restarts,
                    it.mse.map(|m| format!("  mse {m:e}")).unwrap_or_default()
                );
            }
            Ok(true)
        }
        Command::Keys => {
            CONFIG_KEYS.iter().for_each(|k| println!("{k}"));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
