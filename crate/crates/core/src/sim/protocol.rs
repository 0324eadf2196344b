//! One end-to-end run of the key-agreement protocol.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::binning::{bin_encode, decode_in_bin, Decoder, SideInfo, SwCode};
use super::channel::sample_round;
use super::distill::distill;
use super::rng::{stream, Purpose};
use super::toeplitz::ToeplitzHash;
use crate::entropy::{build_cell_table, rate_from_table, CellTable, Party, RateReport};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quantizer::Thresholds;

/// Knobs of a protocol run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Bin-rate slack above the conditional entropy, bits per symbol.
    pub gamma: f64,
    /// Key-size back-off, bits per symbol (subtracted twice).
    pub delta: f64,
    pub decoder: Decoder,
    /// Send every kept bit (one bin per sequence) instead of sizing the bins.
    pub full_disclosure: bool,
    /// Hash to this many bits instead of applying the key-size rule.
    pub key_len: Option<usize>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            gamma: 0.3,
            delta: 0.01,
            decoder: Decoder::Ml,
            full_disclosure: false,
            key_len: None,
        }
    }
}

/// Precomputed cell table and rate report shared by many runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolSetup {
    pub table: CellTable,
    pub report: RateReport,
}

impl ProtocolSetup {
    pub fn new(params: &ModelParams, t: &Thresholds) -> Result<Self> {
        let table = build_cell_table(params, t)?;
        let report = rate_from_table(&table)?;
        Ok(Self { table, report })
    }

    /// Message bits for `kept` bits of `party` in a block of `n` symbols.
    pub fn message_bits(&self, party: Party, n: usize, kept: usize, config: &ProtocolConfig) -> u32 {
        if config.full_disclosure {
            return kept as u32;
        }
        let h = match party {
            Party::Alice => self.report.h_x_kept_given_y,
            Party::Bob => self.report.h_y_kept_given_x,
        };
        SwCode::sized_bits(n, h, config.gamma, kept)
    }

    /// `floor(n·(H(X_Δ Y_Δ | Z W) − 2δ) − log|M_A| − log|M_B|)`, possibly ≤ 0.
    pub fn key_length_rule(&self, n: usize, bits_a: u32, bits_b: u32, delta: f64) -> i64 {
        let raw = n as f64 * (self.report.h_kept_given_eve - 2.0 * delta)
            - f64::from(bits_a)
            - f64::from(bits_b);
        raw.floor() as i64
    }
}

/// Result of privacy amplification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KeyOutcome {
    /// Alice's key `s` and Bob's key `s_prime`.
    Key { s: Vec<u8>, s_prime: Vec<u8> },
    /// The key-size rule leaves nothing to extract at this block length.
    NoKey { rule_bits: i64 },
}

impl KeyOutcome {
    pub fn agrees(&self) -> Option<bool> {
        match self {
            KeyOutcome::Key { s, s_prime } => Some(s == s_prime),
            KeyOutcome::NoKey { .. } => None,
        }
    }
}

/// Everything produced and exchanged in one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub n: usize,
    pub seed: u64,
    pub u: Vec<i8>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub w_a: Vec<usize>,
    pub w_b: Vec<usize>,
    pub x_tilde: Vec<u8>,
    pub y_tilde: Vec<u8>,
    pub keep_x: Vec<bool>,
    pub keep_y: Vec<bool>,
    pub x_kept: Vec<u8>,
    pub y_kept: Vec<u8>,
    pub code_a: SwCode,
    pub code_b: SwCode,
    pub m_a: u64,
    pub m_b: u64,
    /// Bob's estimate of Alice's kept bits.
    pub x_hat: Vec<u8>,
    /// Alice's estimate of Bob's kept bits.
    pub y_hat: Vec<u8>,
    /// Bob's decoder reported failure (his estimate is then all zeros).
    pub decode_failed_x: bool,
    /// Alice's decoder reported failure.
    pub decode_failed_y: bool,
    /// Output length of the hash (rule or fixed length, capped at the input length).
    pub key_len: usize,
    pub hash_seed: Vec<u8>,
    pub outcome: KeyOutcome,
}

impl Transcript {
    /// Both parties reconstructed each other's kept bits exactly.
    pub fn reconciled(&self) -> bool {
        self.x_hat == self.x_kept && self.y_hat == self.y_kept
    }
}

fn gather<T: Copy>(v: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| v[i]).collect()
}

/// Runs steps 1–7 on a fresh block of `n` symbols.
pub fn run_protocol(
    n: usize,
    setup: &ProtocolSetup,
    config: &ProtocolConfig,
    seed: u64,
) -> Result<Transcript> {
    if !(config.gamma >= 0.0 && config.delta >= 0.0) {
        return Err(Error::ParameterDomain(
            "gamma and delta must be nonnegative".into(),
        ));
    }
    let table = &setup.table;
    let t = table.thresholds();
    let round = sample_round(n, table.params(), seed)?;
    let d = distill(&round.x, &round.y, t, &setup.report.classification)?;

    let xs = d.x_positions();
    let ys = d.y_positions();
    let x_kept = gather(&d.x_tilde, &xs);
    let y_kept = gather(&d.y_tilde, &ys);

    let mut bin_rng = stream(seed, Purpose::BinCode, 0);
    let bits_a = setup.message_bits(Party::Alice, n, x_kept.len(), config);
    let bits_b = setup.message_bits(Party::Bob, n, y_kept.len(), config);
    let code_a = SwCode::with_bits(bits_a, bin_rng.random(), config.gamma)?;
    let code_b = SwCode::with_bits(bits_b, bin_rng.random(), config.gamma)?;
    let m_a = bin_encode(&x_kept, &code_a)?;
    let m_b = bin_encode(&y_kept, &code_b)?;

    let pairs = d.pairs();
    let bob_side = SideInfo {
        target: Party::Alice,
        obs: &gather(&round.y, &xs),
        pairs: &gather(&pairs, &xs),
    };
    let x_hat = decode_in_bin(m_a, &bob_side, &code_a, table, config.decoder)?;
    let alice_side = SideInfo {
        target: Party::Bob,
        obs: &gather(&round.x, &ys),
        pairs: &gather(&pairs, &ys),
    };
    let y_hat = decode_in_bin(m_b, &alice_side, &code_b, table, config.decoder)?;
    let decode_failed_x = x_hat.is_none();
    let decode_failed_y = y_hat.is_none();
    let x_hat = x_hat.unwrap_or_else(|| vec![0; x_kept.len()]);
    let y_hat = y_hat.unwrap_or_else(|| vec![0; y_kept.len()]);

    let in_len = x_kept.len() + y_kept.len();
    let rule_bits = setup.key_length_rule(n, bits_a, bits_b, config.delta);
    let key_len = match config.key_len {
        Some(k) => k.min(in_len),
        None => rule_bits.clamp(0, in_len as i64) as usize,
    };
    let hash = ToeplitzHash::random(in_len, key_len, &mut stream(seed, Purpose::Hash, 0));
    let outcome = if key_len == 0 {
        KeyOutcome::NoKey { rule_bits }
    } else {
        let alice_in = [x_kept.as_slice(), y_hat.as_slice()].concat();
        let bob_in = [x_hat.as_slice(), y_kept.as_slice()].concat();
        KeyOutcome::Key {
            s: hash.hash(&alice_in)?,
            s_prime: hash.hash(&bob_in)?,
        }
    };

    Ok(Transcript {
        n,
        seed,
        u: round.u,
        x: round.x,
        y: round.y,
        z: round.z,
        w_a: d.w_a,
        w_b: d.w_b,
        x_tilde: d.x_tilde,
        y_tilde: d.y_tilde,
        keep_x: d.keep_x,
        keep_y: d.keep_y,
        x_kept,
        y_kept,
        code_a,
        code_b,
        m_a,
        m_b,
        x_hat,
        y_hat,
        decode_failed_x,
        decode_failed_y,
        key_len,
        hash_seed: hash.seed().to_vec(),
        outcome,
    })
}
