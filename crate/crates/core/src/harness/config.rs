use std::path::Path;

use ini::Ini;

use crate::chanest::VarianceForm;
use crate::detect::{DetectorParams, RandomizationSchedule, ML_SEARCH_CAP};
use crate::error::{Error, Result};
use crate::system::{ModAlphabet, NoiseStats, PowerImbalance, SnrConvention};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// One channel use per trial, detector given the true channel.
    FlatPerfectCsi,
    /// One pilot-plus-data frame per trial with iterative channel estimation.
    FlatEstimated,
    /// One cyclic-prefixed single-carrier frame per trial.
    Cpsc,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DetectorKind {
    ConvMcmc { alpha: f64 },
    Rmcmc,
    RmcmcR,
    Mmse,
    MlOracle,
}

/// Initial vector of the single-run MCMC detectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StartVector {
    #[default]
    Mmse,
    Random,
}

/// Channel knowledge of the receiver in the frame scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CsiMode {
    Perfect,
    #[default]
    Estimated,
}

/// Optional replacements for the detector's preset parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DetectorOverrides {
    /// Temperature α; also carried by [`DetectorKind::ConvMcmc`].
    pub alpha: Option<f64>,
    pub c_min: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub max_iter: Option<usize>,
    pub r_max: Option<usize>,
    pub neighbor_restricted: Option<bool>,
    pub randomization: Option<RandomizationSchedule>,
}

/// Frame-level settings for the estimated-CSI and CPSC scenarios.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameParams {
    pub q: usize,
    pub l: usize,
    pub i: usize,
    /// Power-delay profile; unit-power taps when absent.
    pub omega2: Option<Vec<f64>>,
    pub iterations: usize,
    pub max_sweeps: usize,
    pub variance: VarianceForm,
    pub csi: CsiMode,
    pub noise_stats: NoiseStats,
}

impl Default for FrameParams {
    fn default() -> Self {
        Self {
            q: 9,
            l: 4,
            i: 32,
            omega2: None,
            iterations: 2,
            max_sweeps: 2,
            variance: VarianceForm::default(),
            csi: CsiMode::default(),
            noise_stats: NoiseStats::PilotCsi,
        }
    }
}

/// Everything needed to reproduce a Monte Carlo sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub k: usize,
    pub n: usize,
    /// QAM order M.
    pub order: usize,
    pub snr_db: Vec<f64>,
    pub snr_convention: SnrConvention,
    pub imbalance: PowerImbalance,
    /// Bit errors per SNR point after which trials stop; 0 disables the target.
    pub target_errors: u64,
    pub max_trials: u64,
    pub detector: DetectorKind,
    pub start: StartVector,
    pub overrides: DetectorOverrides,
    pub frame: FrameParams,
    pub master_seed: u64,
    /// Adds a wall_time column to the CSV. Off by default so output is reproducible.
    pub wall_time: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::FlatPerfectCsi,
            k: 16,
            n: 16,
            order: 4,
            snr_db: vec![10.0],
            snr_convention: SnrConvention::default(),
            imbalance: PowerImbalance::None,
            target_errors: 200,
            max_trials: 10_000,
            detector: DetectorKind::RmcmcR,
            start: StartVector::default(),
            overrides: DetectorOverrides::default(),
            frame: FrameParams::default(),
            master_seed: 1,
            wall_time: false,
        }
    }
}

/// Every key accepted in a config file or through `--set`.
pub const CONFIG_KEYS: &[&str] = &[
    "sim.scenario",
    "sim.seed",
    "sim.snr_db",
    "sim.snr_convention",
    "sim.target_errors",
    "sim.max_trials",
    "sim.wall_time",
    "system.k",
    "system.n",
    "system.modulation",
    "system.imbalance",
    "detector.kind",
    "detector.alpha",
    "detector.start",
    "detector.c_min",
    "detector.c1",
    "detector.c2",
    "detector.max_iter",
    "detector.r_max",
    "detector.neighbor_restricted",
    "detector.randomization",
    "frame.q",
    "frame.l",
    "frame.i",
    "frame.omega2",
    "frame.iterations",
    "frame.max_sweeps",
    "frame.variance",
    "frame.csi",
    "frame.noise_stats",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::invalid(key, format!("cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::invalid(key, format!("expected true or false, got `{value}`"))),
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| parse_num::<f64>(key, s.trim()))
        .collect()
}

/// `a:step:b` (inclusive) or a comma-separated list.
fn parse_grid(key: &str, value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [_] => parse_list(key, value),
        [a, step, b] => {
            let (a, step, b): (f64, f64, f64) =
                (parse_num(key, a)?, parse_num(key, step)?, parse_num(key, b)?);
            if !(step > 0.0) || b < a {
                return Err(Error::invalid(key, "range needs a positive step and start <= end"));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|j| a + j as f64 * step).collect())
        }
        _ => Err(Error::invalid(key, "expected a list `a,b,c` or a range `start:step:end`")),
    }
}

impl SimConfig {
    /// Parses a config file over the defaults.
    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config {
            line: e.line,
            message: e.msg.to_string(),
        })?;
        let mut cfg = Self::default();
        for (section, props) in ini.iter() {
            for (key, value) in props.iter() {
                let full = match section {
                    Some(s) => format!("{s}.{key}"),
                    None => key.to_string(),
                };
                cfg.set(&full, value)?;
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_ini_str(&text)
    }

    /// Applies a `section.key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::invalid(assignment, "expected section.key=value"))?;
        self.set(key.trim(), value.trim())
    }

    /// Sets one `section.key` field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let o = &mut self.overrides;
        let f = &mut self.frame;
        match key {
            "sim.scenario" => {
                self.scenario = match value {
                    "flat" => Scenario::FlatPerfectCsi,
                    "flat-estimated" => Scenario::FlatEstimated,
                    "cpsc" => Scenario::Cpsc,
                    _ => return Err(Error::invalid(key, "expected flat, flat-estimated or cpsc")),
                }
            }
            "sim.seed" => self.master_seed = parse_num(key, value)?,
            "sim.snr_db" => self.snr_db = parse_grid(key, value)?,
            "sim.snr_convention" => {
                self.snr_convention = match value {
                    "per-antenna" => SnrConvention::PerReceiveAntenna,
                    "per-bit" => SnrConvention::PerBit,
                    _ => return Err(Error::invalid(key, "expected per-antenna or per-bit")),
                }
            }
            "sim.target_errors" => self.target_errors = parse_num(key, value)?,
            "sim.max_trials" => self.max_trials = parse_num(key, value)?,
            "sim.wall_time" => self.wall_time = parse_bool(key, value)?,
            "system.k" => self.k = parse_num(key, value)?,
            "system.n" => self.n = parse_num(key, value)?,
            "system.modulation" => self.order = parse_num(key, value)?,
            "system.imbalance" => {
                self.imbalance = if value == "none" {
                    PowerImbalance::None
                } else {
                    match parse_list(key, value)?.as_slice() {
                        &[lo_db, hi_db] => PowerImbalance::UniformDb { lo_db, hi_db },
                        _ => return Err(Error::invalid(key, "expected `none` or `lo_db,hi_db`")),
                    }
                }
            }
            "detector.kind" => {
                let alpha = o.alpha.unwrap_or(1.0);
                self.detector = match value {
                    "conv-mcmc" => DetectorKind::ConvMcmc { alpha },
                    "rmcmc" => DetectorKind::Rmcmc,
                    "rmcmc-r" => DetectorKind::RmcmcR,
                    "mmse" => DetectorKind::Mmse,
                    "ml" => DetectorKind::MlOracle,
                    _ => {
                        return Err(Error::invalid(key, "expected conv-mcmc, rmcmc, rmcmc-r, mmse or ml"))
                    }
                }
            }
            "detector.alpha" => {
                let a: f64 = parse_num(key, value)?;
                o.alpha = Some(a);
                if let DetectorKind::ConvMcmc { alpha } = &mut self.detector {
                    *alpha = a;
                }
            }
            "detector.start" => {
                self.start = match value {
                    "mmse" => StartVector::Mmse,
                    "random" => StartVector::Random,
                    _ => return Err(Error::invalid(key, "expected mmse or random")),
                }
            }
            "detector.c_min" => o.c_min = Some(parse_num(key, value)?),
            "detector.c1" => o.c1 = Some(parse_num(key, value)?),
            "detector.c2" => o.c2 = Some(parse_num(key, value)?),
            "detector.max_iter" => o.max_iter = Some(parse_num(key, value)?),
            "detector.r_max" => o.r_max = Some(parse_num(key, value)?),
            "detector.neighbor_restricted" => o.neighbor_restricted = Some(parse_bool(key, value)?),
            "detector.randomization" => {
                o.randomization = Some(match value {
                    "per-coordinate" => RandomizationSchedule::PerCoordinate,
                    "one-per-sweep" => RandomizationSchedule::OnePerSweep,
                    _ => return Err(Error::invalid(key, "expected per-coordinate or one-per-sweep")),
                })
            }
            "frame.q" => f.q = parse_num(key, value)?,
            "frame.l" => f.l = parse_num(key, value)?,
            "frame.i" => f.i = parse_num(key, value)?,
            "frame.omega2" => f.omega2 = Some(parse_list(key, value)?),
            "frame.iterations" => f.iterations = parse_num(key, value)?,
            "frame.max_sweeps" => f.max_sweeps = parse_num(key, value)?,
            "frame.variance" => {
                f.variance = match value {
                    "augmented" => VarianceForm::Augmented,
                    "unaugmented" => VarianceForm::Unaugmented,
                    _ => return Err(Error::invalid(key, "expected augmented or unaugmented")),
                }
            }
            "frame.csi" => {
                f.csi = match value {
                    "perfect" => CsiMode::Perfect,
                    "estimated" => CsiMode::Estimated,
                    _ => return Err(Error::invalid(key, "expected perfect or estimated")),
                }
            }
            "frame.noise_stats" => {
                f.noise_stats = match value {
                    "perfect" => NoiseStats::PerfectCsi,
                    "pilot" => NoiseStats::PilotCsi,
                    _ => return Err(Error::invalid(key, "expected perfect or pilot")),
                }
            }
            _ => return Err(Error::invalid(key, "unknown config key")),
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Result<ModAlphabet> {
        ModAlphabet::new(self.order).map_err(|_| Error::invalid("system.modulation", "expected 4, 16 or 64"))
    }

    /// Complex unknowns per detection problem: K, or K·I for CPSC blocks.
    pub fn detection_users(&self) -> usize {
        match self.scenario {
            Scenario::Cpsc => self.k * self.frame.i,
            _ => self.k,
        }
    }

    /// Preset parameters for the configured detector with the overrides applied.
    pub fn detector_params(&self) -> Result<DetectorParams> {
        let a = self.alphabet()?;
        let k = self.detection_users();
        let mut p = match self.detector {
            DetectorKind::Rmcmc | DetectorKind::ConvMcmc { .. } => DetectorParams::rmcmc_preset(&a, k),
            _ => DetectorParams::restart_defaults(&a, k),
        };
        if let DetectorKind::ConvMcmc { alpha } = self.detector {
            p.alpha = alpha;
        }
        let o = &self.overrides;
        p.alpha = o.alpha.unwrap_or(p.alpha);
        p.c_min = o.c_min.unwrap_or(p.c_min);
        p.c1 = o.c1.unwrap_or(p.c1);
        p.c2 = o.c2.unwrap_or(p.c2);
        p.max_iter = o.max_iter.unwrap_or(p.max_iter);
        p.r_max = o.r_max.unwrap_or(p.r_max);
        p.neighbor_restricted_random = o.neighbor_restricted.unwrap_or(p.neighbor_restricted_random);
        p.randomization = o.randomization.unwrap_or(p.randomization);
        p.validate().map_err(|e| match e {
            Error::InvalidParameter { field, reason } => Error::InvalidParameter {
                field: format!("detector.{field}"),
                reason,
            },
            e => e,
        })?;
        Ok(p)
    }

    /// Tap powers of the CPSC channel.
    pub fn omega2(&self) -> Vec<f64> {
        self.frame.omega2.clone().unwrap_or_else(|| vec![1.0; self.frame.l])
    }

    /// Rejects inconsistent or unsupported settings, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        let a = self.alphabet()?;
        if self.k == 0 {
            return Err(Error::invalid("system.k", "must be at least 1"));
        }
        if self.n == 0 {
            return Err(Error::invalid("system.n", "must be at least 1"));
        }
        if self.scenario != Scenario::Cpsc && self.k > self.n {
            return Err(Error::invalid("system.k", "must not exceed system.n"));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("sim.snr_db", "need at least one finite SNR"));
        }
        if let PowerImbalance::UniformDb { lo_db, hi_db } = self.imbalance {
            if !(lo_db <= hi_db) {
                return Err(Error::invalid("system.imbalance", "lower bound exceeds upper bound"));
            }
        }
        match (self.scenario, self.detector) {
            (Scenario::FlatPerfectCsi, DetectorKind::MlOracle) => {
                let size = (a.size() as f64).powi(2 * self.k as i32);
                if size > ML_SEARCH_CAP as f64 {
                    return Err(Error::SearchSpaceTooLarge { size, cap: ML_SEARCH_CAP });
                }
            }
            (Scenario::FlatPerfectCsi, _) | (_, DetectorKind::RmcmcR) => {}
            _ => {
                return Err(Error::invalid(
                    "detector.kind",
                    "frame scenarios run the restart detector; use rmcmc-r",
                ))
            }
        }
        let f = &self.frame;
        if self.scenario != Scenario::FlatPerfectCsi {
            if f.q == 0 {
                return Err(Error::invalid("frame.q", "need at least one data block"));
            }
            if self.scenario == Scenario::FlatEstimated && f.max_sweeps == 0 && f.iterations > 0 {
                return Err(Error::invalid("frame.max_sweeps", "must be at least 1"));
            }
        }
        if self.scenario == Scenario::Cpsc {
            if f.l == 0 {
                return Err(Error::invalid("frame.l", "must be at least 1"));
            }
            if f.i < f.l {
                return Err(Error::invalid("frame.i", "block length must be at least frame.l"));
            }
            if self.k * f.l > f.q * f.i {
                return Err(Error::invalid("frame.q", "need Q·I >= K·L to estimate the taps from data"));
            }
            let omega = self.omega2();
            if omega.len() != f.l || omega.iter().any(|w| !(*w >= 0.0)) || omega.iter().sum::<f64>() <= 0.0 {
                return Err(Error::invalid("frame.omega2", "need frame.l non-negative tap powers with positive sum"));
            }
            if f.max_sweeps == 0 && f.iterations > 0 && f.csi == CsiMode::Estimated {
                return Err(Error::invalid("frame.max_sweeps", "must be at least 1"));
            }
        }
        self.detector_params()?;
        Ok(())
    }
}
