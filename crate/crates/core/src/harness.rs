//! Monte Carlo campaigns over channel and error realizations.
//!
//! A campaign sweeps one parameter. For every sweep value it averages the
//! realized rate, SINR and primary-receiver interference over
//! `trials_outer` channel realizations, each evaluated under `trials_inner`
//! error realizations drawn uniformly from the uncertainty balls.
//!
//! Every realization draws from its own ChaCha stream keyed by
//! `(kind, outer, inner)`, independent of the sweep index, so all sweep values
//! see the same channels. Outer trials run in parallel and are reduced in
//! index order, which keeps output bit-identical for a given seed.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::allocator::{fair_split, optimal_split, per_user_gain, AllocationResult};
use crate::beamformer::{closed_form_transmit, realized_performance, BeamformerPair};
use crate::channel::{
    build_robust_matrices, default_regularization, draw_channels, draw_multiuser_channels,
    redraw_multiuser_errors, stream_rng, ChannelSet, ErrorSampling, RobustMatrices, SystemConfig,
    UncertaintyModel,
};
use crate::error::{Error, Result};
use crate::sdp::solve_case2;

/// Fraction of failed outer trials tolerated per sweep value.
pub const FAILURE_BUDGET: f64 = 0.01;
/// Relative slack before realized interference counts as a violation.
pub const VIOLATION_SLACK: f64 = 1e-10;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Single user, sweep the interference limit (linear).
    SingleUserVsI,
    /// Single user, sweep the error radius `e`.
    SingleUserVsE,
    /// Orthogonal sub-bands with the equal-rate split, sweep the interference limit.
    MultiuserFair,
    /// Orthogonal sub-bands with the sum-rate optimal split, sweep the interference limit.
    MultiuserOptimal,
    /// Per-slot design rates of both splits; the sweep values are slot labels.
    FairnessTrace,
    /// Full-band users with inter-user interference control, sweep `I′` (linear).
    Case2Sweep,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::SingleUserVsI,
        Scenario::SingleUserVsE,
        Scenario::MultiuserFair,
        Scenario::MultiuserOptimal,
        Scenario::FairnessTrace,
        Scenario::Case2Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SingleUserVsI => "single_user_vs_I",
            Scenario::SingleUserVsE => "single_user_vs_e",
            Scenario::MultiuserFair => "multiuser_fair",
            Scenario::MultiuserOptimal => "multiuser_optimal",
            Scenario::FairnessTrace => "fairness_trace",
            Scenario::Case2Sweep => "case2_sweep",
        }
    }

    /// Whether sweep values are power levels (entered in dB on the command line).
    pub fn sweeps_power(self) -> bool {
        !matches!(self, Scenario::SingleUserVsE | Scenario::FairnessTrace)
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                Error::validation(format!("unknown scenario '{s}', expected one of {}", names.join(", ")))
            })
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct Campaign {
    pub scenario: Scenario,
    /// Strictly increasing sweep values in linear units.
    pub sweep: Vec<f64>,
    /// Channel realizations per sweep value.
    pub trials_outer: usize,
    /// Error realizations per channel realization.
    pub trials_inner: usize,
    pub seed: u64,
    pub cfg: SystemConfig,
    pub uncertainty: UncertaintyModel,
    /// Cap on the leakage into each other secondary receiver (full-band design).
    pub i_prime: f64,
    /// Round cap for the full-band alternating optimization.
    pub case2_rounds: usize,
}

impl Campaign {
    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        self.uncertainty.validate()?;
        if self.trials_outer == 0 || self.trials_inner == 0 {
            return Err(Error::validation("trial counts must be >= 1"));
        }
        if self.trials_outer >= 1 << 30 || self.trials_inner >= 1 << 30 {
            return Err(Error::validation("trial counts must be below 2^30"));
        }
        if self.sweep.is_empty() {
            return Err(Error::validation("sweep must not be empty"));
        }
        if self.sweep.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("sweep values must be finite"));
        }
        if self.sweep.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("sweep must be strictly increasing"));
        }
        match self.scenario {
            Scenario::SingleUserVsE if self.sweep.iter().any(|&e| e < 0.0) => {
                return Err(Error::validation("error radius sweep must be >= 0"))
            }
            Scenario::FairnessTrace if self.sweep.iter().any(|&s| s < 0.0 || s.fract() != 0.0) => {
                return Err(Error::validation("fairness trace sweep values are slot indices >= 0"))
            }
            s if s.sweeps_power() && self.sweep.iter().any(|&v| v <= 0.0) => {
                return Err(Error::validation("power sweep values must be > 0 (linear)"))
            }
            _ => {}
        }
        if !(self.i_prime > 0.0 && self.i_prime.is_finite()) {
            return Err(Error::validation("i_prime must be > 0"));
        }
        Ok(())
    }

    /// Labels for the per-user columns this campaign emits.
    pub fn per_user_columns(&self) -> Vec<String> {
        let n = self.cfg.n_sec;
        match self.scenario {
            Scenario::SingleUserVsI | Scenario::SingleUserVsE => Vec::new(),
            Scenario::FairnessTrace => (1..=n)
                .map(|k| format!("fair_rate_{k}"))
                .chain((1..=n).map(|k| format!("optimal_rate_{k}")))
                .collect(),
            _ => (1..=n).map(|k| format!("rate_user_{k}")).collect(),
        }
    }

    /// A campaign for `scenario` at the default operating point with a natural sweep.
    pub fn preset(scenario: Scenario) -> Campaign {
        let mut c = default_presets();
        c.scenario = scenario;
        let power_sweep: Vec<f64> = (-2..=4).map(|k| db_to_linear(5.0 * k as f64)).collect();
        c.sweep = match scenario {
            Scenario::SingleUserVsI | Scenario::MultiuserFair | Scenario::MultiuserOptimal => power_sweep,
            Scenario::SingleUserVsE => (1..=16).map(|k| 0.25 * k as f64).collect(),
            Scenario::FairnessTrace => {
                c.cfg.i_limit = 1.0;
                (1..=10).map(f64::from).collect()
            }
            Scenario::Case2Sweep => (-4..=2).map(|k| db_to_linear(5.0 * k as f64)).collect(),
        };
        c
    }
}

/// The simulation setup of the reference campaign: 5×5 antennas, 20 dB
/// transmit powers over unit noise, a 5 dB interference limit, three
/// secondary users, `σ = σ′ = 1` and 1000×1000 trials.
pub fn default_presets() -> Campaign {
    Campaign {
        scenario: Scenario::SingleUserVsI,
        sweep: (-2..=4).map(|k| db_to_linear(5.0 * k as f64)).collect(),
        trials_outer: 1000,
        trials_inner: 1000,
        seed: 1,
        cfg: SystemConfig {
            nt: 5,
            nr: 5,
            p_su: db_to_linear(20.0),
            p_pu: db_to_linear(20.0),
            noise_power: db_to_linear(0.0),
            i_limit: db_to_linear(5.0),
            n_sec: 3,
        },
        uncertainty: UncertaintyModel {
            e: 0.5,
            sigma: 1.0,
            sigma_prime: 1.0,
        },
        i_prime: db_to_linear(0.0),
        case2_rounds: 20,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    /// Bits per channel use.
    pub mean_rate: f64,
    pub mean_realized_sinr: f64,
    pub mean_pu_interference: f64,
    /// Realizations whose primary-receiver interference exceeded the limit.
    pub violation_count: u64,
    pub per_user_rates: Option<Vec<f64>>,
    /// Outer trials skipped because a design step failed.
    pub failures: usize,
}

const NOMINAL_STREAM: u64 = 1;
const ERROR_STREAM: u64 = 2;

fn stream_id(kind: u64, outer: u64, inner: u64) -> u64 {
    (kind << 60) | (outer << 30) | inner
}

#[derive(Debug, Clone, Default)]
struct TrialStats {
    rate: f64,
    sinr: f64,
    pu: f64,
    violations: u64,
    samples: u64,
    per_user: Vec<f64>,
}

impl TrialStats {
    fn with_users(n: usize) -> Self {
        TrialStats {
            per_user: vec![0.0; n],
            ..Default::default()
        }
    }

    fn merge(&mut self, other: &TrialStats) {
        self.rate += other.rate;
        self.sinr += other.sinr;
        self.pu += other.pu;
        self.violations += other.violations;
        self.samples += other.samples;
        if self.per_user.len() < other.per_user.len() {
            self.per_user.resize(other.per_user.len(), 0.0);
        }
        for (a, b) in self.per_user.iter_mut().zip(&other.per_user) {
            *a += b;
        }
    }
}

fn violates(pu: f64, limit: f64) -> bool {
    pu > limit * (1.0 + VIOLATION_SLACK)
}

fn robust_matrices(cs: &ChannelSet, cfg: &SystemConfig) -> Result<RobustMatrices> {
    build_robust_matrices(cs, cfg, Some(default_regularization(&cs.h0)))
}

/// Runs every sweep value in order.
pub fn run_campaign(c: &Campaign) -> Result<Vec<ResultRow>> {
    c.validate()?;
    c.sweep.iter().map(|&v| run_sweep_point(c, v)).collect()
}

fn run_sweep_point(c: &Campaign, value: f64) -> Result<ResultRow> {
    let (cfg, u) = match c.scenario {
        Scenario::SingleUserVsE => (c.cfg, c.uncertainty.with_e(value)),
        Scenario::SingleUserVsI | Scenario::MultiuserFair | Scenario::MultiuserOptimal => {
            (c.cfg.with_i_limit(value), c.uncertainty)
        }
        Scenario::FairnessTrace | Scenario::Case2Sweep => (c.cfg, c.uncertainty),
    };

    if c.scenario == Scenario::FairnessTrace {
        return fairness_slot(c, &cfg, &u, value);
    }

    let outcomes: Vec<Result<TrialStats>> = (0..c.trials_outer as u64)
        .into_par_iter()
        .map(|outer| match c.scenario {
            Scenario::SingleUserVsI | Scenario::SingleUserVsE => single_user_trial(c, &cfg, &u, outer),
            Scenario::MultiuserFair => case1_trial(c, &cfg, &u, outer, fair_split),
            Scenario::MultiuserOptimal => case1_trial(c, &cfg, &u, outer, optimal_split),
            Scenario::Case2Sweep => case2_trial(c, &cfg, &u, outer, value),
            Scenario::FairnessTrace => unreachable!("handled above"),
        })
        .collect();

    let mut total = TrialStats::default();
    let mut failures = 0;
    let mut last_error = None;
    for outcome in outcomes {
        match outcome {
            Ok(stats) => total.merge(&stats),
            Err(e) => {
                failures += 1;
                last_error = Some(e.to_string());
            }
        }
    }
    check_failures(failures, c.trials_outer, last_error)?;

    let per_user = match c.scenario {
        Scenario::SingleUserVsI | Scenario::SingleUserVsE => None,
        _ => Some(total.per_user.iter().map(|r| mean(*r, total.samples)).collect()),
    };
    let sinr_samples = match c.scenario {
        Scenario::SingleUserVsI | Scenario::SingleUserVsE => total.samples,
        _ => total.samples * c.cfg.n_sec as u64,
    };
    Ok(ResultRow {
        sweep_value: value,
        mean_rate: mean(total.rate, total.samples),
        mean_realized_sinr: mean(total.sinr, sinr_samples),
        mean_pu_interference: mean(total.pu, total.samples),
        violation_count: total.violations,
        per_user_rates: per_user,
        failures,
    })
}

fn mean(sum: f64, count: u64) -> f64 {
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

fn check_failures(failures: usize, total: usize, last_error: Option<String>) -> Result<()> {
    if failures as f64 > FAILURE_BUDGET * total as f64 {
        return Err(Error::FailureBudget {
            failed: failures,
            total,
            budget_percent: FAILURE_BUDGET * 100.0,
            last: last_error.unwrap_or_default(),
        });
    }
    if failures > 0 {
        log::warn!(
            "{failures} of {total} trials failed; last error: {}",
            last_error.unwrap_or_default()
        );
    }
    Ok(())
}

fn single_user_trial(
    c: &Campaign,
    cfg: &SystemConfig,
    u: &UncertaintyModel,
    outer: u64,
) -> Result<TrialStats> {
    let mut rng = stream_rng(c.seed, stream_id(NOMINAL_STREAM, outer, 0));
    let mut cs = draw_channels(cfg, u, &mut rng);
    let rm = robust_matrices(&cs, cfg)?;
    let report = closed_form_transmit(&rm, cfg)?;
    let mut stats = TrialStats::default();
    for inner in 0..c.trials_inner as u64 {
        let mut err_rng = stream_rng(c.seed, stream_id(ERROR_STREAM, outer, inner));
        cs.redraw_errors(&mut err_rng, ErrorSampling::Ball);
        let perf = realized_performance(&cs, &report.pair, cfg);
        stats.rate += perf.rate;
        stats.sinr += perf.sinr;
        stats.pu += perf.pu_interference;
        stats.violations += violates(perf.pu_interference, cfg.i_limit) as u64;
        stats.samples += 1;
    }
    Ok(stats)
}

/// Per-user designs for a sub-band split; dropped users get no beamformer.
fn case1_designs(
    rms: &[RobustMatrices],
    cfg: &SystemConfig,
    alloc: &AllocationResult,
) -> Result<Vec<Option<BeamformerPair>>> {
    rms.iter()
        .enumerate()
        .map(|(k, rm)| {
            if alloc.dropped.contains(&k) {
                return Ok(None);
            }
            // Routes through the relaxation when ‖w1‖ would exceed 1.
            let report = closed_form_transmit(rm, &cfg.with_i_limit(alloc.budgets[k]))?;
            Ok(Some(report.pair))
        })
        .collect()
}

fn case1_gains(rms: &[RobustMatrices], cfg: &SystemConfig) -> Result<Vec<f64>> {
    rms.iter().map(|rm| per_user_gain(rm, cfg)).collect()
}

fn case1_trial(
    c: &Campaign,
    cfg: &SystemConfig,
    u: &UncertaintyModel,
    outer: u64,
    split: fn(&[f64], f64) -> Result<AllocationResult>,
) -> Result<TrialStats> {
    let mut rng = stream_rng(c.seed, stream_id(NOMINAL_STREAM, outer, 0));
    let mut users = draw_multiuser_channels(cfg, u, &mut rng);
    let rms = users
        .iter()
        .map(|cs| robust_matrices(cs, cfg))
        .collect::<Result<Vec<_>>>()?;
    let gains = case1_gains(&rms, cfg)?;
    let alloc = split(&gains, cfg.i_limit)?;
    let designs = case1_designs(&rms, cfg, &alloc)?;
    let mut stats = TrialStats::with_users(users.len());
    accumulate_case1(c, cfg, outer, &mut users, &designs, &mut stats);
    Ok(stats)
}

fn accumulate_case1(
    c: &Campaign,
    cfg: &SystemConfig,
    outer: u64,
    users: &mut [ChannelSet],
    designs: &[Option<BeamformerPair>],
    stats: &mut TrialStats,
) {
    let n = users.len() as f64;
    for inner in 0..c.trials_inner as u64 {
        let mut err_rng = stream_rng(c.seed, stream_id(ERROR_STREAM, outer, inner));
        redraw_multiuser_errors(users, &mut err_rng, ErrorSampling::Ball);
        let mut rate = 0.0;
        let mut pu = 0.0;
        for (k, (cs, design)) in users.iter().zip(designs).enumerate() {
            if let Some(pair) = design {
                let perf = realized_performance(cs, pair, cfg);
                rate += perf.rate;
                pu += perf.pu_interference;
                stats.sinr += perf.sinr;
                stats.per_user[k] += perf.rate;
            }
        }
        stats.rate += rate / n;
        stats.pu += pu;
        stats.violations += violates(pu, cfg.i_limit) as u64;
        stats.samples += 1;
    }
}

fn fairness_slot(c: &Campaign, cfg: &SystemConfig, u: &UncertaintyModel, slot: f64) -> Result<ResultRow> {
    let slot_index = slot as u64;
    let mut rng = stream_rng(c.seed, stream_id(NOMINAL_STREAM, slot_index, 0));
    let mut users = draw_multiuser_channels(cfg, u, &mut rng);
    let rms = users
        .iter()
        .map(|cs| robust_matrices(cs, cfg))
        .collect::<Result<Vec<_>>>()?;
    let gains = case1_gains(&rms, cfg)?;
    let fair = fair_split(&gains, cfg.i_limit)?;
    let optimal = optimal_split(&gains, cfg.i_limit)?;

    let mut stats = TrialStats::with_users(users.len());
    let fair_designs = case1_designs(&rms, cfg, &fair)?;
    accumulate_case1(c, cfg, slot_index, &mut users, &fair_designs, &mut stats);
    let mut opt_stats = TrialStats::with_users(users.len());
    let opt_designs = case1_designs(&rms, cfg, &optimal)?;
    accumulate_case1(c, cfg, slot_index, &mut users, &opt_designs, &mut opt_stats);

    let rates = fair.rates.iter().chain(&optimal.rates).copied().collect();
    Ok(ResultRow {
        sweep_value: slot,
        mean_rate: fair.sum_rate,
        mean_realized_sinr: mean(stats.sinr, stats.samples * users.len() as u64),
        mean_pu_interference: mean(stats.pu, stats.samples),
        violation_count: stats.violations + opt_stats.violations,
        per_user_rates: Some(rates),
        failures: 0,
    })
}

fn case2_trial(
    c: &Campaign,
    cfg: &SystemConfig,
    u: &UncertaintyModel,
    outer: u64,
    i_prime: f64,
) -> Result<TrialStats> {
    let mut rng = stream_rng(c.seed, stream_id(NOMINAL_STREAM, outer, 0));
    let mut users = draw_multiuser_channels(cfg, u, &mut rng);
    let outcome = solve_case2(&users, cfg, i_prime, c.case2_rounds)?;
    let pairs: Vec<&BeamformerPair> = outcome.reports.iter().map(|r| &r.pair).collect();
    let mut stats = TrialStats::with_users(users.len());
    for inner in 0..c.trials_inner as u64 {
        let mut err_rng = stream_rng(c.seed, stream_id(ERROR_STREAM, outer, inner));
        redraw_multiuser_errors(&mut users, &mut err_rng, ErrorSampling::Ball);
        let mut rate = 0.0;
        let mut pu = 0.0;
        for (k, cs) in users.iter().enumerate() {
            let sinr = realized_full_band_sinr(cs, &pairs, k, cfg);
            let r = (1.0 + sinr).log2();
            rate += r;
            pu += cfg.p_su * pairs[k].w1.dotc(&cs.h_true).norm_sqr();
            stats.sinr += sinr;
            stats.per_user[k] += r;
        }
        stats.rate += rate;
        stats.pu += pu;
        stats.violations += violates(pu, cfg.i_limit) as u64;
        stats.samples += 1;
    }
    Ok(stats)
}

/// Realized SINR of user `k` when every user transmits over the full band.
pub fn realized_full_band_sinr(
    cs: &ChannelSet,
    pairs: &[&BeamformerPair],
    k: usize,
    cfg: &SystemConfig,
) -> f64 {
    let w2 = &pairs[k].w2;
    let gain = |w1| cfg.p_su * w2.dotc(&(&cs.hs * w1)).norm_sqr();
    let cross: f64 = (0..pairs.len()).filter(|&j| j != k).map(|j| gain(&pairs[j].w1)).sum();
    let denom = cfg.p_pu * w2.dotc(&cs.h_prime_true).norm_sqr()
        + cfg.noise_power * w2.norm_squared()
        + cross;
    if denom > 0.0 {
        gain(&pairs[k].w1) / denom
    } else {
        0.0
    }
}

pub const CSV_COLUMNS: [&str; 5] = [
    "sweep_value",
    "mean_rate",
    "mean_realized_sinr",
    "mean_pu_interference",
    "violation_count",
];

/// Renders rows as CSV with generic per-user column names.
pub fn csv_string(rows: &[ResultRow]) -> String {
    let n = rows
        .first()
        .and_then(|r| r.per_user_rates.as_ref())
        .map_or(0, Vec::len);
    let labels: Vec<String> = (1..=n).map(|k| format!("rate_user_{k}")).collect();
    csv_string_labeled(rows, &labels)
}

pub fn csv_string_labeled(rows: &[ResultRow], per_user_labels: &[String]) -> String {
    let mut out = String::new();
    let header: Vec<&str> = CSV_COLUMNS
        .iter()
        .copied()
        .chain(per_user_labels.iter().map(String::as_str))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let _ = write!(
            out,
            "{:.12e},{:.12e},{:.12e},{:.12e},{}",
            row.sweep_value,
            row.mean_rate,
            row.mean_realized_sinr,
            row.mean_pu_interference,
            row.violation_count
        );
        if let Some(rates) = &row.per_user_rates {
            for r in rates {
                let _ = write!(out, ",{r:.12e}");
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &csv_string(rows))
}

pub fn write_csv_labeled(
    rows: &[ResultRow],
    per_user_labels: &[String],
    path: impl AsRef<Path>,
) -> Result<()> {
    write_text(path.as_ref(), &csv_string_labeled(rows, per_user_labels))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses `start:stop:step` into an inclusive, strictly increasing list.
pub fn parse_sweep(arg: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = arg.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(Error::validation(format!("sweep '{arg}' is not start:stop:step")));
    };
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::validation(format!("sweep '{arg}': '{s}' is not a number")))
    };
    let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
    if !(step > 0.0) || !(stop >= start) {
        return Err(Error::validation(format!("sweep '{arg}' needs step > 0 and stop >= start")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(Error::validation(format!("sweep '{arg}' has too many points")));
    }
    Ok((0..count).map(|k| start + step * k as f64).collect())
}

/// Applies a flat `key = value` configuration to a campaign.
///
/// Keys: `nt`, `nr`, `p_su_db`, `p_pu_db`, `i_limit_db`, `noise_db`, `n_sec`,
/// `e`, `sigma`, `sigma_prime`, `i_prime_db`. Blank lines and lines starting
/// with `#` are ignored.
pub fn apply_config(c: &mut Campaign, text: &str, path: &Path) -> Result<()> {
    let err = |line: usize, message: String| Error::Config {
        path: path.to_path_buf(),
        line,
        message,
    };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(line_no, format!("expected 'key = value', got '{line}'")));
        };
        let key = key.trim();
        let value = value.trim();
        let real = || {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(line_no, format!("'{value}' is not a number")))
        };
        let count = || {
            value
                .parse::<usize>()
                .map_err(|_| err(line_no, format!("'{value}' is not a non-negative integer")))
        };
        match key {
            "nt" => c.cfg.nt = count()?,
            "nr" => c.cfg.nr = count()?,
            "n_sec" => c.cfg.n_sec = count()?,
            "p_su_db" => c.cfg.p_su = db_to_linear(real()?),
            "p_pu_db" => c.cfg.p_pu = db_to_linear(real()?),
            "i_limit_db" => c.cfg.i_limit = db_to_linear(real()?),
            "noise_db" => c.cfg.noise_power = db_to_linear(real()?),
            "e" => c.uncertainty.e = real()?,
            "sigma" => c.uncertainty.sigma = real()?,
            "sigma_prime" => c.uncertainty.sigma_prime = real()?,
            "i_prime_db" => c.i_prime = db_to_linear(real()?),
            other => return Err(err(line_no, format!("unknown key '{other}'"))),
        }
    }
    Ok(())
}
