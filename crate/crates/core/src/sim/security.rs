//! Exact small-block evaluation of the leftover-hash security bound.
//!
//! For each sampled `(z, w)` the law of the kept bits given Eve's view is a
//! product of per-position posteriors, so the joint law of key and public
//! messages can be enumerated exactly for every sampled hash function.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binning::{bin_of_packed, SwCode};
use super::channel::sample_round_with;
use super::protocol::{ProtocolConfig, ProtocolSetup};
use super::rng::{stream, Purpose};
use super::toeplitz::ToeplitzHash;
use crate::entropy::{CellLabel, Observer, Party};
use crate::error::{Error, Result};
use crate::model::entropy_of_weights;
use crate::quantizer::reliability_level;

/// Longest block the estimator accepts.
pub const MAX_SECURITY_LEN: usize = 4;

/// Lower bound `(1 − Δ)·log2|S| − Δ·log2(1/Δ)` on the key's
/// conditional entropy, with `Δ` clamped to `[0, 1]` and `0·log(1/0) = 0`.
pub fn entropy_security_floor(delta: f64, key_size: u64) -> f64 {
    let d = delta.clamp(0.0, 1.0);
    let log_s = (key_size.max(1) as f64).log2();
    let tail = if d > 0.0 { d * (1.0 / d).log2() } else { 0.0 };
    (1.0 - d) * log_s - tail
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityConfig {
    /// Block length, at most [`MAX_SECURITY_LEN`].
    pub n: usize,
    /// Key bits; `|S| = 2^out_len`.
    pub out_len: usize,
    pub z_samples: usize,
    pub f_samples: usize,
    /// Bin sizing slack, as in the protocol.
    pub gamma: f64,
    /// Message bits per party, overriding the protocol's sizing (capped at the
    /// party's kept length).
    pub message_bits: Option<u32>,
    /// Back-off used for the default `α`.
    pub delta: f64,
    /// Min-entropy threshold in bits per symbol; defaults to `H(X_Δ Y_Δ|Z W) − δ`.
    pub alpha: Option<f64>,
    pub seed: u64,
}

impl Default for SecurityConfig {
    fn default() -> Self {
        Self {
            n: 2,
            out_len: 1,
            z_samples: 1000,
            f_samples: 100,
            gamma: 0.3,
            message_bits: None,
            delta: 0.05,
            alpha: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityEstimate {
    pub n: usize,
    pub out_len: usize,
    pub alpha: f64,
    /// Mean over sampled `(z, w)` of `E_f[Δ_f]`, with Δ the L1 distance in `[0, 2]`.
    pub delta_mean: f64,
    pub delta_stderr: f64,
    /// `√(|S||M| / 2^(αn)) + 2·P[−(1/n)·log2 P(r|z,w) < α]`, averaged over samples.
    pub bound_rhs: f64,
    pub bound_rhs_stderr: f64,
    /// Floor at `delta_mean`.
    pub entropy_floor: f64,
    /// Stderr of the floor propagated from `delta_stderr`.
    pub entropy_floor_stderr: f64,
    /// `delta_mean` was outside `[0, 1]` when evaluating the floor.
    pub delta_clamped: bool,
    /// Average of the exact `H(S | z, w, m, f)`.
    pub exact_conditional_entropy: f64,
    pub exact_entropy_stderr: f64,
    /// Average `log2 |M_A||M_B|`.
    pub mean_message_bits: f64,
    pub z_samples: usize,
    pub f_samples: usize,
}

impl SecurityEstimate {
    /// `delta_mean ≤ bound_rhs + 3·delta_stderr`.
    pub fn distance_bound_holds(&self) -> bool {
        self.delta_mean <= self.bound_rhs + 3.0 * self.delta_stderr
    }

    /// Combined standard error of `exact_conditional_entropy − entropy_floor`.
    pub fn entropy_gap_stderr(&self) -> f64 {
        self.exact_entropy_stderr.hypot(self.entropy_floor_stderr)
    }

    /// `exact_conditional_entropy ≥ entropy_floor − 3·entropy_gap_stderr`.
    pub fn entropy_floor_holds(&self) -> bool {
        self.exact_conditional_entropy >= self.entropy_floor - 3.0 * self.entropy_gap_stderr()
    }
}

struct Sample {
    delta: f64,
    rhs: f64,
    entropy: f64,
    message_bits: f64,
}

fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte-Carlo over Eve's view and the hash, exact enumeration inside.
pub fn estimate_security(setup: &ProtocolSetup, config: &SecurityConfig) -> Result<SecurityEstimate> {
    let n = config.n;
    let levels = setup.table.levels();
    if n == 0 || config.z_samples == 0 || config.f_samples == 0 {
        return Err(Error::ParameterDomain(
            "block length and sample counts must be ≥ 1".into(),
        ));
    }
    let cells = (2 * levels) as f64;
    if n > MAX_SECURITY_LEN || cells.powi(2 * n as i32) > (1u64 << 24) as f64 {
        return Err(Error::Capacity(format!(
            "security enumeration at n = {n} with {levels} levels"
        )));
    }
    if config.out_len > 16 {
        return Err(Error::Capacity(format!("{} key bits", config.out_len)));
    }
    let alpha = config
        .alpha
        .unwrap_or(setup.report.h_kept_given_eve - config.delta);

    let samples: Vec<Sample> = (0..config.z_samples)
        .into_par_iter()
        .map(|i| one_sample(setup, config, alpha, i as u64))
        .collect::<Result<_>>()?;

    let pick = |f: fn(&Sample) -> f64| samples.iter().map(f).collect::<Vec<_>>();
    let (delta_mean, delta_stderr) = mean_stderr(&pick(|s| s.delta));
    let (bound_rhs, bound_rhs_stderr) = mean_stderr(&pick(|s| s.rhs));
    let (exact_h, exact_se) = mean_stderr(&pick(|s| s.entropy));
    let (msg_bits, _) = mean_stderr(&pick(|s| s.message_bits));

    let key_size = 1u64 << config.out_len;
    let d = delta_mean.clamp(0.0, 1.0);
    // d/dΔ of the floor is −log2|S| + log2 Δ + 1/ln 2 inside (0, 1)
    let slope = if d > 0.0 && d < 1.0 {
        -(config.out_len as f64) + d.log2() + std::f64::consts::LOG2_E
    } else {
        0.0
    };
    Ok(SecurityEstimate {
        n,
        out_len: config.out_len,
        alpha,
        delta_mean,
        delta_stderr,
        bound_rhs,
        bound_rhs_stderr,
        entropy_floor: entropy_security_floor(delta_mean, key_size),
        entropy_floor_stderr: slope.abs() * delta_stderr,
        delta_clamped: !(0.0..=1.0).contains(&delta_mean),
        exact_conditional_entropy: exact_h,
        exact_entropy_stderr: exact_se,
        mean_message_bits: msg_bits,
        z_samples: config.z_samples,
        f_samples: config.f_samples,
    })
}

fn one_sample(
    setup: &ProtocolSetup,
    config: &SecurityConfig,
    alpha: f64,
    index: u64,
) -> Result<Sample> {
    let n = config.n;
    let table = &setup.table;
    let t = table.thresholds();
    let classification = &setup.report.classification;
    let round = sample_round_with(
        &mut stream(config.seed, Purpose::Security, index),
        n,
        table.params(),
    );

    // kept positions: (bit index in the 2n-bit word, P(bit = 1 | z, w), owner)
    let mut kept: Vec<(usize, f64, Party)> = Vec::new();
    for i in 0..n {
        let pair = (
            reliability_level(round.x[i], t),
            reliability_level(round.y[i], t),
        );
        let (party, slot) = match classification.label(pair.0, pair.1) {
            CellLabel::UseX => (Party::Alice, i),
            CellLabel::UseY => (Party::Bob, n + i),
            CellLabel::Discard => continue,
        };
        let p1 = table.posterior_bit(party, Observer::Eve, round.z[i], pair)?;
        kept.push((slot, p1, party));
    }
    let kx = kept.iter().filter(|k| k.2 == Party::Alice).count();
    let ky = kept.len() - kx;

    let proto = ProtocolConfig {
        gamma: config.gamma,
        ..Default::default()
    };
    let (bits_a, bits_b) = match config.message_bits {
        Some(b) => (b.min(kx as u32), b.min(ky as u32)),
        None => (
            setup.message_bits(Party::Alice, n, kx, &proto),
            setup.message_bits(Party::Bob, n, ky, &proto),
        ),
    };
    let mut bin_rng = stream(config.seed, Purpose::BinCode, index);
    let code_a = SwCode::with_bits(bits_a, bin_rng.random(), config.gamma)?;
    let code_b = SwCode::with_bits(bits_b, bin_rng.random(), config.gamma)?;

    // enumerate r: full 2n-bit word, probability, message pair
    let threshold = alpha * n as f64;
    let mut atypical = 0.0;
    let mut support = Vec::with_capacity(1 << kept.len());
    for pattern in 0u64..(1 << kept.len()) {
        let (mut word, mut xa, mut yb, mut prob) = (0u64, 0u64, 0u64, 1.0);
        let (mut ia, mut ib) = (0, 0);
        for (j, &(slot, p1, party)) in kept.iter().enumerate() {
            let bit = (pattern >> j) & 1;
            prob *= if bit == 1 { p1 } else { 1.0 - p1 };
            word |= bit << slot;
            match party {
                Party::Alice => {
                    xa |= bit << ia;
                    ia += 1;
                }
                Party::Bob => {
                    yb |= bit << ib;
                    ib += 1;
                }
            }
        }
        if prob <= 0.0 {
            continue;
        }
        if -prob.log2() < threshold {
            atypical += prob;
        }
        let m = (bin_of_packed(xa, kx, &code_a), bin_of_packed(yb, ky, &code_b));
        support.push((word, prob, m));
    }

    let key_size = 1usize << config.out_len;
    let message_bits = f64::from(bits_a + bits_b);
    let rhs = ((key_size as f64).log2() + message_bits - threshold).exp2().sqrt() + 2.0 * atypical;

    let mut hash_rng = stream(config.seed, Purpose::Hash, index);
    let (mut delta_sum, mut entropy_sum) = (0.0, 0.0);
    for _ in 0..config.f_samples {
        let f = ToeplitzHash::random(2 * n, config.out_len, &mut hash_rng);
        let mut joint: BTreeMap<(u64, u64), Vec<f64>> = BTreeMap::new();
        for &(word, prob, m) in &support {
            let s = f.hash_packed(word) as usize;
            joint.entry(m).or_insert_with(|| vec![0.0; key_size])[s] += prob;
        }
        let uniform = 1.0 / key_size as f64;
        for row in joint.values() {
            let pm: f64 = row.iter().sum();
            delta_sum += row.iter().map(|&p| (p - pm * uniform).abs()).sum::<f64>();
            entropy_sum += pm * entropy_of_weights(row);
        }
    }
    let fs = config.f_samples as f64;
    Ok(Sample {
        delta: delta_sum / fs,
        rhs,
        entropy: entropy_sum / fs,
        message_bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_values() {
        assert_eq!(entropy_security_floor(0.0, 256), 8.0);
        assert!(entropy_security_floor(1.0, 256).abs() < 1e-15);
        let v = entropy_security_floor(0.01, 256);
        assert!((v - (0.99 * 8.0 - 0.01 * 100f64.log2())).abs() < 1e-12);
        assert!((v - 7.8536).abs() < 1e-4);
        assert_eq!(entropy_security_floor(1.7, 4), 0.0);
    }
}
