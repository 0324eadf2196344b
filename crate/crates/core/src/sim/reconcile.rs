//! Repeated bin-coding reconciliation on blocks of a fixed kept length.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binning::{bin_encode, decode_in_bin, Decoder, SideInfo, SwCode};
use super::channel::sample_symbol;
use super::protocol::ProtocolSetup;
use super::rng::{stream, Purpose};
use crate::entropy::{CellLabel, Party};
use crate::error::{Error, Result};
use crate::quantizer::{hard_bit, reliability_level};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconcileConfig {
    /// Number of kept positions per block.
    pub kept_len: usize,
    pub gamma: f64,
    pub decoder: Decoder,
    pub full_disclosure: bool,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconcileStats {
    pub kept_len: usize,
    /// `H(X̃ | Y, W)` per kept symbol of set A.
    pub cond_entropy: f64,
    pub message_bits: u32,
    pub trials: usize,
    /// Blocks whose decoded sequence differs from the truth.
    pub errors: usize,
    /// Blocks where the decoder declared failure (counted in `errors`).
    pub failures: usize,
}

impl ReconcileStats {
    pub fn error_rate(&self) -> f64 {
        self.errors as f64 / self.trials as f64
    }

    /// Binomial standard error of `error_rate`.
    pub fn stderr(&self) -> f64 {
        let p = self.error_rate();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Reconciles Alice's kept bits to Bob `trials` times. Each block draws
/// channel symbols until `kept_len` of them fall in set A, then bins Alice's
/// bits with `floor(L·(H + γ)) + 1` message bits (`L` without full-disclosure
/// capping) and lets Bob decode from his own observations.
pub fn reconciliation_error_rate(setup: &ProtocolSetup, config: &ReconcileConfig) -> Result<ReconcileStats> {
    let report = &setup.report;
    let mass = report.label_mass(CellLabel::UseX);
    if mass <= 0.0 {
        return Err(Error::ParameterDomain("set A is empty at these parameters".into()));
    }
    if config.trials == 0 {
        return Err(Error::ParameterDomain("trials must be ≥ 1".into()));
    }
    let len = config.kept_len;
    let cond_entropy = report.h_x_kept_given_y / mass;
    let message_bits = if config.full_disclosure {
        len as u32
    } else {
        SwCode::sized_bits(len, cond_entropy, config.gamma, len)
    };
    let table = &setup.table;
    let t = table.thresholds();
    let classification = &report.classification;

    let outcomes: Vec<(bool, bool)> = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(config.seed, Purpose::Channel, i);
            let (mut bits, mut obs, mut pairs) = (Vec::new(), Vec::new(), Vec::new());
            while bits.len() < len {
                let (_, x, y, _) = sample_symbol(&mut rng, table.params());
                let pair = (reliability_level(x, t), reliability_level(y, t));
                if classification.label(pair.0, pair.1) == CellLabel::UseX {
                    bits.push(hard_bit(x));
                    obs.push(y);
                    pairs.push(pair);
                }
            }
            let code_seed = stream(config.seed, Purpose::BinCode, i).random();
            let code = SwCode::with_bits(message_bits, code_seed, config.gamma)?;
            let bin = bin_encode(&bits, &code)?;
            let side = SideInfo {
                target: Party::Alice,
                obs: &obs,
                pairs: &pairs,
            };
            let decoded = decode_in_bin(bin, &side, &code, table, config.decoder)?;
            Ok((decoded.as_deref() != Some(bits.as_slice()), decoded.is_none()))
        })
        .collect::<Result<_>>()?;

    Ok(ReconcileStats {
        kept_len: len,
        cond_entropy,
        message_bits,
        trials: config.trials,
        errors: outcomes.iter().filter(|o| o.0).count(),
        failures: outcomes.iter().filter(|o| o.1).count(),
    })
}
