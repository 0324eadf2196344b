//! Library side of the `softkey` command: configuration resolution and the
//! four commands, each rendering its CSV in memory.

pub mod config;
pub mod error;

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use softkey::sim::{
    estimate_security, run_protocol, run_seed, KeyOutcome, ProtocolConfig, ProtocolSetup,
    SecurityConfig, Transcript,
};
use softkey::{
    optimal_block_length, snr_nnr_to_params, soft_rate_lower_bound, tail_mass_bound,
    validate_thresholds, ConversionMode,
};

pub use config::{Cli, Command};
use config::{CompareConfig, SecurityCheckConfig, SimulateConfig, SweepConfig};
pub use error::{CliError, CliResult};

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Output {
    pub csv: String,
    /// Lines for the terminal (verdicts, summaries).
    pub notes: Vec<String>,
    /// Run log to be written next to the CSV.
    pub log: Option<(PathBuf, String)>,
}

/// Hex SHA-256 of the canonical JSON of a resolved configuration.
pub fn config_hash<T: Serialize>(command: &str, cfg: &T) -> String {
    let json = serde_json::to_string(&(command, cfg)).expect("config serialises");
    Sha256::digest(json.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn header<T: Serialize>(command: &str, cfg: &T, mode: ConversionMode) -> String {
    format!(
        "# softkey {command} config_sha256={} mode={} tail_mass_bound={:e}\n",
        config_hash(command, cfg),
        mode.as_str(),
        tail_mass_bound()
    )
}

fn finite(v: f64, what: &str) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Numerical(format!("{what} is not finite")))
    }
}

/// One grid point of the soft/hard comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub snr_db: f64,
    pub nnr: f64,
    pub rate_soft: f64,
    pub rate_hard_n1: f64,
    pub rate_hard_best: f64,
    pub best_block_len: usize,
}

impl RateRow {
    pub fn soft_wins(&self) -> bool {
        self.rate_soft >= self.rate_hard_best - 1e-9
    }
}

fn rate_rows(
    points: &[(f64, f64)],
    thresholds: &[f64],
    n_max: usize,
    mode: ConversionMode,
) -> CliResult<Vec<RateRow>> {
    let t = validate_thresholds(thresholds)?;
    points
        .par_iter()
        .map(|&(snr_db, nnr)| {
            let p = snr_nnr_to_params(snr_db, nnr)?;
            let soft = soft_rate_lower_bound(&p, &t)?;
            let hard = optimal_block_length(&p, n_max, mode)?;
            Ok(RateRow {
                snr_db,
                nnr,
                rate_soft: finite(soft.soft_rate, "soft rate")?,
                rate_hard_n1: finite(hard.rate_n1(), "hard rate")?,
                rate_hard_best: finite(hard.best_rate, "hard rate")?,
                best_block_len: hard.best_n,
            })
        })
        .collect()
}

const RATE_COLUMNS: &str = "snr_db,nnr,rate_soft,rate_hard_n1,rate_hard_best,best_block_len";

fn write_rate_row(out: &mut String, r: &RateRow) {
    let _ = write!(
        out,
        "{},{},{},{},{},{}",
        r.snr_db, r.nnr, r.rate_soft, r.rate_hard_n1, r.rate_hard_best, r.best_block_len
    );
}

fn sorted_unique(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

pub fn rate_sweep(cfg: &SweepConfig) -> CliResult<Output> {
    let c = &cfg.common;
    let nnrs = sorted_unique(&c.nnr);
    let points: Vec<(f64, f64)> = sorted_unique(&c.snr_db)
        .into_iter()
        .flat_map(|s| nnrs.iter().map(move |&n| (s, n)))
        .collect();
    let rows = rate_rows(&points, &c.thresholds, c.n_max, c.mode)?;
    let mut csv = header("rate-sweep", cfg, c.mode);
    csv.push_str(RATE_COLUMNS);
    csv.push('\n');
    for r in &rows {
        write_rate_row(&mut csv, r);
        csv.push('\n');
    }
    Ok(Output {
        csv,
        ..Default::default()
    })
}

pub fn compare(cfg: &CompareConfig) -> CliResult<Output> {
    let c = &cfg.common;
    let points: Vec<(f64, f64)> = sorted_unique(&c.nnr)
        .into_iter()
        .map(|n| (cfg.snr_db, n))
        .collect();
    let rows = rate_rows(&points, &c.thresholds, c.n_max, c.mode)?;
    let mut csv = header("compare", cfg, c.mode);
    csv.push_str(RATE_COLUMNS);
    csv.push_str(",soft_ge_hard\n");
    for r in &rows {
        write_rate_row(&mut csv, r);
        let _ = writeln!(csv, ",{}", r.soft_wins());
    }
    let wins = rows.iter().filter(|r| r.soft_wins()).count();
    let verdict = format!(
        "verdict: rate_soft >= rate_hard_best - 1e-9 at {wins}/{} NNR points (fraction {})",
        rows.len(),
        wins as f64 / rows.len() as f64
    );
    let _ = writeln!(csv, "# {verdict}");
    Ok(Output {
        csv,
        notes: vec![verdict],
        log: None,
    })
}

/// Aggregate of many protocol runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub trials: usize,
    pub n: usize,
    pub keyed_runs: usize,
    pub mismatches: usize,
    pub decode_failures: usize,
    pub kept_fraction: f64,
    pub key_bits_per_symbol: f64,
    pub theoretical_rate: f64,
}

impl SimulationSummary {
    /// Empirical `Pr[S ≠ S′]` over runs that produced a key.
    pub fn mismatch_rate(&self) -> f64 {
        if self.keyed_runs == 0 {
            0.0
        } else {
            self.mismatches as f64 / self.keyed_runs as f64
        }
    }
}

pub fn summarize(n: usize, theoretical_rate: f64, runs: &[Transcript]) -> SimulationSummary {
    let trials = runs.len();
    let mut s = SimulationSummary {
        trials,
        n,
        keyed_runs: 0,
        mismatches: 0,
        decode_failures: 0,
        kept_fraction: 0.0,
        key_bits_per_symbol: 0.0,
        theoretical_rate,
    };
    let (mut kept, mut key_bits) = (0usize, 0usize);
    for tr in runs {
        kept += tr.x_kept.len() + tr.y_kept.len();
        s.decode_failures += usize::from(tr.decode_failed_x) + usize::from(tr.decode_failed_y);
        if let KeyOutcome::Key { s: a, s_prime: b } = &tr.outcome {
            s.keyed_runs += 1;
            s.mismatches += usize::from(a != b);
            key_bits += a.len();
        }
    }
    if trials > 0 {
        let symbols = (trials * n) as f64;
        s.kept_fraction = kept as f64 / symbols;
        s.key_bits_per_symbol = key_bits as f64 / symbols;
    }
    s
}

pub fn simulate(cfg: &SimulateConfig) -> CliResult<Output> {
    let p = snr_nnr_to_params(cfg.snr_db, cfg.nnr)?;
    let t = validate_thresholds(&cfg.thresholds)?;
    let setup = ProtocolSetup::new(&p, &t)?;
    let proto = ProtocolConfig {
        gamma: cfg.gamma,
        delta: cfg.delta,
        decoder: cfg.decoder,
        full_disclosure: cfg.full_disclosure,
        key_len: cfg.key_len,
    };
    let runs: Vec<Transcript> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| run_protocol(cfg.n, &setup, &proto, run_seed(cfg.seed, i)))
        .collect::<Result<_, _>>()?;
    let summary = summarize(cfg.n, setup.report.soft_rate, &runs);

    let mut csv = header("simulate", cfg, ConversionMode::default());
    csv.push_str(
        "n,trials,keyed_runs,mismatches,pr_mismatch,decode_failures,kept_fraction,key_bits_per_symbol,rate_soft\n",
    );
    if summary.trials > 0 {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            summary.n,
            summary.trials,
            summary.keyed_runs,
            summary.mismatches,
            summary.mismatch_rate(),
            summary.decode_failures,
            summary.kept_fraction,
            summary.key_bits_per_symbol,
            summary.theoretical_rate
        );
    }
    let note = format!(
        "simulate: {} runs, {} with a key, Pr[S != S'] = {}, {} key bits/symbol (bound {})",
        summary.trials,
        summary.keyed_runs,
        summary.mismatch_rate(),
        summary.key_bits_per_symbol,
        summary.theoretical_rate
    );
    let log = match &cfg.log {
        Some(path) => {
            #[derive(Serialize)]
            struct RunLog<'a> {
                config: &'a SimulateConfig,
                summary: &'a SimulationSummary,
                runs: &'a [Transcript],
            }
            let json = serde_json::to_string_pretty(&RunLog {
                config: cfg,
                summary: &summary,
                runs: &runs,
            })
            .map_err(|e| CliError::Numerical(e.to_string()))?;
            Some((path.clone(), json))
        }
        None => None,
    };
    Ok(Output {
        csv,
        notes: vec![note],
        log,
    })
}

pub fn security_check(cfg: &SecurityCheckConfig) -> CliResult<Output> {
    let p = snr_nnr_to_params(cfg.snr_db, cfg.nnr)?;
    let t = validate_thresholds(&cfg.thresholds)?;
    let setup = ProtocolSetup::new(&p, &t)?;
    let est = estimate_security(
        &setup,
        &SecurityConfig {
            n: cfg.n,
            out_len: cfg.out_len,
            z_samples: cfg.z_samples,
            f_samples: cfg.f_samples,
            gamma: cfg.gamma,
            message_bits: cfg.message_bits,
            delta: cfg.delta,
            alpha: cfg.alpha,
            seed: cfg.seed,
        },
    )?;
    let pass = est.distance_bound_holds();
    let mut csv = header("security-check", cfg, ConversionMode::default());
    csv.push_str("n,alpha,delta_mean,delta_stderr,bound_rhs,entropy_floor,exact_conditional_entropy,verdict\n");
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{},{}",
        est.n,
        est.alpha,
        est.delta_mean,
        est.delta_stderr,
        est.bound_rhs,
        est.entropy_floor,
        est.exact_conditional_entropy,
        if pass { "PASS" } else { "FAIL" }
    );
    let note = format!(
        "security-check: delta_mean {} <= bound_rhs {} + 3*{}: {}; entropy {} vs floor {}",
        est.delta_mean,
        est.bound_rhs,
        est.delta_stderr,
        if pass { "PASS" } else { "FAIL" },
        est.exact_conditional_entropy,
        est.entropy_floor
    );
    Ok(Output {
        csv,
        notes: vec![note],
        log: None,
    })
}

/// Resolves configuration and runs one command.
pub fn execute(command: &Command) -> CliResult<(Output, Option<PathBuf>)> {
    Ok(match command {
        Command::RateSweep(a) => (rate_sweep(&SweepConfig::resolve(a)?)?, a.out.clone()),
        Command::Compare(a) => (compare(&CompareConfig::resolve(a)?)?, a.out.clone()),
        Command::Simulate(a) => (simulate(&SimulateConfig::resolve(a)?)?, a.common.out.clone()),
        Command::SecurityCheck(a) => (
            security_check(&SecurityCheckConfig::resolve(a)?)?,
            a.common.out.clone(),
        ),
    })
}
