//! Flag and JSON-file configuration; flags override file values.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use softkey::sim::Decoder;
use softkey::ConversionMode;

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "softkey", version, about = "Soft-decision secret key agreement: rates, baselines and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Soft and hard key rates over an SNR × NNR grid.
    RateSweep(CommonArgs),
    /// Soft versus best hard rate at one SNR, with a verdict line.
    Compare(CommonArgs),
    /// Monte-Carlo runs of the full protocol.
    Simulate(SimulateArgs),
    /// Exact small-block check of the leftover-hash bound.
    SecurityCheck(SecurityArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// SNR in dB: a value, a comma list, or start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    /// Comma-separated NNR values (v_e / v_b).
    #[arg(long)]
    pub nnr: Option<String>,
    /// Comma-separated thresholds (fractions like 1/3 allowed); empty for hard-only.
    #[arg(long, allow_hyphen_values = true)]
    pub thresholds: Option<String>,
    /// Gaussian-to-BSC conversion for the hard baseline.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<ConversionMode>,
    /// Largest repetition block length in the hard baseline.
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Satellite symbols per run.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Bin-rate margin in bits per symbol.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Key-size back-off in bits per symbol.
    #[arg(long)]
    pub delta: Option<f64>,
    /// `ml` or `typicality`.
    #[arg(long)]
    pub decoder: Option<String>,
    /// Per-symbol surprisal bound of the typicality decoder, in bits.
    #[arg(long)]
    pub typicality_threshold: Option<f64>,
    /// Disclose every kept bit instead of sizing the bins.
    #[arg(long)]
    pub full_disclosure: bool,
    /// Fixed key length in bits instead of the key-size rule.
    #[arg(long)]
    pub key_len: Option<usize>,
    /// Write every transcript as JSON to this path.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SecurityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub n: Option<usize>,
    /// Key bits.
    #[arg(long)]
    pub out_len: Option<usize>,
    #[arg(long)]
    pub z_samples: Option<usize>,
    #[arg(long)]
    pub f_samples: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Message bits per party instead of the protocol's bin sizing.
    #[arg(long)]
    pub message_bits: Option<u32>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Min-entropy threshold in bits per symbol.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
}

fn parse_mode(s: &str) -> Result<ConversionMode, String> {
    s.parse().map_err(|e: softkey::Error| e.to_string())
}

/// `snr_db` in a config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SnrSpec {
    One(f64),
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum NumOrList {
    One(f64),
    List(Vec<f64>),
}

/// Keys accepted in a JSON config file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub snr_db: Option<SnrSpec>,
    pub nnr: Option<NumOrList>,
    pub thresholds: Option<Vec<f64>>,
    pub mode: Option<ConversionMode>,
    pub nmax: Option<usize>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub decoder: Option<String>,
    pub typicality_threshold: Option<f64>,
    pub full_disclosure: Option<bool>,
    pub key_len: Option<usize>,
    pub message_bits: Option<u32>,
    pub out_len: Option<usize>,
    pub z_samples: Option<usize>,
    pub f_samples: Option<usize>,
    pub alpha: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    fn for_args(common: &CommonArgs) -> CliResult<Self> {
        common
            .config
            .as_deref()
            .map(Self::load)
            .transpose()
            .map(Option::unwrap_or_default)
    }
}

fn parse_number(s: &str) -> CliResult<f64> {
    let s = s.trim();
    let bad = || CliError::Config(format!("not a number: {s:?}"));
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a / b
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Comma-separated numbers; an empty string (or `none`) is the empty list.
pub fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("none") {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_number).collect()
}

/// `start..=stop` in steps of `step`, computed as `start + i·step`.
pub fn expand_range(start: f64, stop: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(CliError::Config(format!(
            "SNR range needs step > 0 and stop ≥ start, got {start}:{stop}:{step}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(CliError::Config(format!("SNR range has {count} points")));
    }
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

pub fn parse_snr(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, c] => expand_range(parse_number(a)?, parse_number(b)?, parse_number(c)?),
        [_] => parse_list(s),
        _ => Err(CliError::Config(format!("bad SNR specification {s:?}"))),
    }
}

fn snr_from_file(spec: &SnrSpec) -> CliResult<Vec<f64>> {
    match *spec {
        SnrSpec::One(v) => Ok(vec![v]),
        SnrSpec::List(ref v) => Ok(v.clone()),
        SnrSpec::Range { start, stop, step } => expand_range(start, stop, step),
    }
}

fn list_from_file(v: &NumOrList) -> Vec<f64> {
    match v {
        NumOrList::One(x) => vec![*x],
        NumOrList::List(v) => v.clone(),
    }
}

/// Shared settings after merging file and flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Common {
    pub snr_db: Vec<f64>,
    pub nnr: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub mode: ConversionMode,
    pub n_max: usize,
    pub seed: u64,
}

/// Values used when neither the file nor the flags set a key.
#[derive(Debug, Clone)]
pub struct Defaults {
    pub snr_db: Vec<f64>,
    pub nnr: Vec<f64>,
    pub thresholds: Vec<f64>,
}

impl Defaults {
    pub fn paper_grid() -> Self {
        Self {
            snr_db: vec![1.0, 5.0, 7.0],
            nnr: vec![0.5, 1.0, 2.0, 5.0, 10.0],
            thresholds: vec![1.0 / 3.0, 2.0 / 3.0, 1.0],
        }
    }
}

fn resolve_common(args: &CommonArgs, file: &FileConfig, d: Defaults) -> CliResult<Common> {
    let snr_db = match (&args.snr_db, &file.snr_db) {
        (Some(s), _) => parse_snr(s)?,
        (None, Some(s)) => snr_from_file(s)?,
        (None, None) => d.snr_db,
    };
    let nnr = match (&args.nnr, &file.nnr) {
        (Some(s), _) => parse_list(s)?,
        (None, Some(v)) => list_from_file(v),
        (None, None) => d.nnr,
    };
    let thresholds = match (&args.thresholds, &file.thresholds) {
        (Some(s), _) => parse_list(s)?,
        (None, Some(v)) => v.clone(),
        (None, None) => d.thresholds,
    };
    let common = Common {
        snr_db,
        nnr,
        thresholds,
        mode: args.mode.or(file.mode).unwrap_or_default(),
        n_max: args.nmax.or(file.nmax).unwrap_or(10),
        seed: args.seed.or(file.seed).unwrap_or(0),
    };
    if common.snr_db.is_empty() || common.snr_db.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Config("SNR list must be nonempty and finite".into()));
    }
    if common.nnr.is_empty() || common.nnr.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(CliError::Config("NNR list must be nonempty with positive entries".into()));
    }
    if common.n_max == 0 {
        return Err(CliError::Config("nmax must be ≥ 1".into()));
    }
    softkey::validate_thresholds(&common.thresholds)?;
    Ok(common)
}

fn single(values: &[f64], what: &str) -> CliResult<f64> {
    match values {
        [v] => Ok(*v),
        _ => Err(CliError::Config(format!("{what} takes a single value here"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    #[serde(flatten)]
    pub common: Common,
}

impl SweepConfig {
    pub fn resolve(args: &CommonArgs) -> CliResult<Self> {
        let file = FileConfig::for_args(args)?;
        Ok(Self {
            common: resolve_common(args, &file, Defaults::paper_grid())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareConfig {
    pub snr_db: f64,
    #[serde(flatten)]
    pub common: Common,
}

impl CompareConfig {
    pub fn resolve(args: &CommonArgs) -> CliResult<Self> {
        let file = FileConfig::for_args(args)?;
        let d = Defaults {
            snr_db: vec![5.0],
            ..Defaults::paper_grid()
        };
        let common = resolve_common(args, &file, d)?;
        Ok(Self {
            snr_db: single(&common.snr_db, "--snr-db")?,
            common,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateConfig {
    pub snr_db: f64,
    pub nnr: f64,
    pub thresholds: Vec<f64>,
    pub n: usize,
    pub trials: usize,
    pub gamma: f64,
    pub delta: f64,
    pub decoder: Decoder,
    pub full_disclosure: bool,
    pub key_len: Option<usize>,
    pub seed: u64,
    #[serde(skip)]
    pub log: Option<PathBuf>,
}

fn parse_decoder(name: &str, threshold: Option<f64>, gamma: f64) -> CliResult<Decoder> {
    match name.trim().to_ascii_lowercase().as_str() {
        "ml" => Ok(Decoder::Ml),
        "typicality" => Ok(Decoder::Typicality {
            threshold: threshold.unwrap_or(1.0 + gamma),
        }),
        other => Err(CliError::Config(format!(
            "unknown decoder {other:?} (expected ml or typicality)"
        ))),
    }
}

impl SimulateConfig {
    pub fn resolve(args: &SimulateArgs) -> CliResult<Self> {
        let file = FileConfig::for_args(&args.common)?;
        let d = Defaults {
            snr_db: vec![5.0],
            nnr: vec![10.0],
            ..Defaults::paper_grid()
        };
        let common = resolve_common(&args.common, &file, d)?;
        let gamma = args.gamma.or(file.gamma).unwrap_or(0.3);
        let delta = args.delta.or(file.delta).unwrap_or(0.01);
        let decoder_name = args
            .decoder
            .clone()
            .or(file.decoder.clone())
            .unwrap_or_else(|| "ml".into());
        let threshold = args.typicality_threshold.or(file.typicality_threshold);
        let cfg = Self {
            snr_db: single(&common.snr_db, "--snr-db")?,
            nnr: single(&common.nnr, "--nnr")?,
            thresholds: common.thresholds,
            n: args.n.or(file.n).unwrap_or(16),
            trials: args.trials.or(file.trials).unwrap_or(1000),
            gamma,
            delta,
            decoder: parse_decoder(&decoder_name, threshold, gamma)?,
            full_disclosure: args.full_disclosure || file.full_disclosure.unwrap_or(false),
            key_len: args.key_len.or(file.key_len),
            seed: common.seed,
            log: args.log.clone(),
        };
        if cfg.n == 0 {
            return Err(CliError::Config("n must be ≥ 1".into()));
        }
        if !(cfg.gamma >= 0.0 && cfg.delta >= 0.0) {
            return Err(CliError::Config("gamma and delta must be nonnegative".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecurityCheckConfig {
    pub snr_db: f64,
    pub nnr: f64,
    pub thresholds: Vec<f64>,
    pub n: usize,
    pub out_len: usize,
    pub z_samples: usize,
    pub f_samples: usize,
    pub gamma: f64,
    pub message_bits: Option<u32>,
    pub delta: f64,
    pub alpha: Option<f64>,
    pub seed: u64,
}

impl SecurityCheckConfig {
    pub fn resolve(args: &SecurityArgs) -> CliResult<Self> {
        let file = FileConfig::for_args(&args.common)?;
        let d = Defaults {
            snr_db: vec![0.0],
            nnr: vec![1.0],
            thresholds: vec![1.0],
        };
        let common = resolve_common(&args.common, &file, d)?;
        let cfg = Self {
            snr_db: single(&common.snr_db, "--snr-db")?,
            nnr: single(&common.nnr, "--nnr")?,
            thresholds: common.thresholds,
            n: args.n.or(file.n).unwrap_or(2),
            out_len: args.out_len.or(file.out_len).unwrap_or(1),
            z_samples: args.z_samples.or(file.z_samples).unwrap_or(1000),
            f_samples: args.f_samples.or(file.f_samples).unwrap_or(100),
            gamma: args.gamma.or(file.gamma).unwrap_or(0.3),
            message_bits: args.message_bits.or(file.message_bits),
            delta: args.delta.or(file.delta).unwrap_or(0.05),
            alpha: args.alpha.or(file.alpha),
            seed: common.seed,
        };
        if cfg.n == 0 || cfg.z_samples == 0 || cfg.f_samples == 0 {
            return Err(CliError::Config("n and sample counts must be ≥ 1".into()));
        }
        Ok(cfg)
    }
}
