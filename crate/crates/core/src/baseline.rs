//! Hard-decision comparison baseline.
//!
//! Block length 1 keeps Eve's continuous observation and reuses the entropy
//! engine with the K = 0 quantizer. Longer blocks use the repetition-code
//! advantage distillation protocol on the three binary symmetric channels
//! obtained by hard-detecting each Gaussian channel: Alice draws a uniform bit
//! C and publishes `X^N ⊕ (C,…,C)`; Bob accepts iff `Y^N ⊕ message` is constant
//! and takes that constant as his bit. The rate of an accepted block is the
//! one-way bound `H(C | Eve) − H(C | Bob)`, scaled by `P_accept / N`.
//!
//! The rate expression is a reconstruction of the classic repetition protocol,
//! not a formula taken from a reference implementation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::soft_rate_lower_bound;
use crate::error::{Error, Result};
use crate::model::{entropy_of_weights, erfc, h2, ModelParams};
use crate::quantizer::Thresholds;

/// How a Gaussian channel is mapped to a crossover probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConversionMode {
    /// `½·erfc(1/√(2v))`: the actual sign-error probability of a unit signal.
    #[default]
    Exact,
    /// `½·erfc(√(1/v))`, the closed form used for the published comparison plots.
    PaperErfc,
}

impl ConversionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConversionMode::Exact => "exact",
            ConversionMode::PaperErfc => "paper-erfc",
        }
    }
}

impl std::str::FromStr for ConversionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ConversionMode::Exact),
            "paper-erfc" | "paper" => Ok(ConversionMode::PaperErfc),
            other => Err(Error::ParameterDomain(format!(
                "unknown conversion mode {other:?} (expected exact or paper-erfc)"
            ))),
        }
    }
}

/// Crossover probability of the hard-detected channel with noise variance `v`.
pub fn bsc_crossover(v: f64, mode: ConversionMode) -> Result<f64> {
    if !(v > 0.0) || v.is_nan() {
        return Err(Error::ParameterDomain(format!(
            "variance must be positive, got {v}"
        )));
    }
    let z = match mode {
        ConversionMode::Exact => 1.0 / (2.0 * v).sqrt(),
        ConversionMode::PaperErfc => (1.0 / v).sqrt(),
    };
    Ok(0.5 * erfc(z))
}

/// Crossover probabilities of the satellite-to-party binary channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BscTriple {
    pub eps_a: f64,
    pub eps_b: f64,
    pub eps_e: f64,
}

impl BscTriple {
    pub fn new(eps_a: f64, eps_b: f64, eps_e: f64) -> Result<Self> {
        for (name, e) in [("eps_a", eps_a), ("eps_b", eps_b), ("eps_e", eps_e)] {
            if !(e > 0.0 && e <= 0.5) {
                return Err(Error::ParameterDomain(format!(
                    "{name} must lie in (0, 0.5], got {e}"
                )));
            }
        }
        Ok(Self {
            eps_a,
            eps_b,
            eps_e,
        })
    }

    pub fn from_params(params: &ModelParams, mode: ConversionMode) -> Result<Self> {
        Self::new(
            bsc_crossover(params.v_a, mode)?,
            bsc_crossover(params.v_b, mode)?,
            bsc_crossover(params.v_e, mode)?,
        )
    }

    /// Crossover between Alice's and Bob's bits.
    pub fn eps_xy(&self) -> f64 {
        xor_crossover(self.eps_a, self.eps_b)
    }

    /// Crossover between Alice's and Eve's bits.
    pub fn eps_xz(&self) -> f64 {
        xor_crossover(self.eps_a, self.eps_e)
    }
}

fn xor_crossover(p: f64, q: f64) -> f64 {
    p * (1.0 - q) + q * (1.0 - p)
}

/// Joint law of one distilled block: Alice's bit C, Bob's bit, and Eve's
/// count of ones in `Z^N ⊕ message`, conditioned on acceptance.
#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionLaw {
    pub n_rep: usize,
    pub p_accept: f64,
    /// `[c][bob_bit]`, conditional on acceptance.
    pub c_bob: [[f64; 2]; 2],
    /// `[c][k]` for `k = 0..=N`, conditional on acceptance.
    pub c_eve: [Vec<f64>; 2],
}

impl RepetitionLaw {
    pub fn h_c_given_bob(&self) -> f64 {
        conditional_entropy_of_c(&[
            [self.c_bob[0][0], self.c_bob[1][0]],
            [self.c_bob[0][1], self.c_bob[1][1]],
        ])
    }

    pub fn h_c_given_eve(&self) -> f64 {
        let cols: Vec<[f64; 2]> = (0..=self.n_rep)
            .map(|k| [self.c_eve[0][k], self.c_eve[1][k]])
            .collect();
        conditional_entropy_of_c(&cols)
    }

    pub fn total_mass(&self) -> f64 {
        self.c_bob.iter().flatten().sum()
    }
}

/// `H(C | O)` from columns `[P(C=0, o), P(C=1, o)]`.
fn conditional_entropy_of_c(cols: &[[f64; 2]]) -> f64 {
    cols.iter()
        .map(|col| {
            let m = col[0] + col[1];
            if m > 0.0 {
                m * entropy_of_weights(col)
            } else {
                0.0
            }
        })
        .sum()
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let lg = |m: usize| libm::lgamma(m as f64 + 1.0);
    lg(n) - lg(k) - lg(n - k)
}

/// Exact joint law of the repetition protocol by binomial aggregation.
pub fn repetition_law(n_rep: usize, t: &BscTriple) -> Result<RepetitionLaw> {
    if n_rep == 0 {
        return Err(Error::ParameterDomain("block length must be ≥ 1".into()));
    }
    let BscTriple {
        eps_a,
        eps_b,
        eps_e,
    } = *t;
    // p[d][e]: probability that n_A⊕n_B = d and n_A⊕n_E = e at one position
    let mut p = [[0.0f64; 2]; 2];
    for na in 0..2usize {
        for nb in 0..2usize {
            for ne in 0..2usize {
                let pr = (if na == 1 { eps_a } else { 1.0 - eps_a })
                    * (if nb == 1 { eps_b } else { 1.0 - eps_b })
                    * (if ne == 1 { eps_e } else { 1.0 - eps_e });
                p[na ^ nb][na ^ ne] += pr;
            }
        }
    }
    let n = n_rep;
    let mut c_bob = [[0.0; 2]; 2];
    let mut c_eve = [vec![0.0; n + 1], vec![0.0; n + 1]];
    let mut p_accept = 0.0;
    for d in 0..2 {
        let pd = p[d][0] + p[d][1];
        if pd <= 0.0 {
            continue;
        }
        let accept_d = pd.powi(n as i32);
        p_accept += accept_d;
        let q = p[d][1] / pd;
        for m in 0..=n {
            // m positions with Eve's bit disagreeing with Alice's
            let pm = binomial_pmf(n, m, q);
            for c in 0..2 {
                let w = 0.5 * accept_d * pm;
                let k = if c == 0 { m } else { n - m };
                c_bob[c][c ^ d] += w;
                c_eve[c][k] += w;
            }
        }
    }
    if p_accept > 0.0 {
        for row in c_bob.iter_mut() {
            for v in row.iter_mut() {
                *v /= p_accept;
            }
        }
        for row in c_eve.iter_mut() {
            for v in row.iter_mut() {
                *v /= p_accept;
            }
        }
    }
    Ok(RepetitionLaw {
        n_rep,
        p_accept,
        c_bob,
        c_eve,
    })
}

fn binomial_pmf(n: usize, k: usize, q: f64) -> f64 {
    if q <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if q >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_binomial(n, k) + k as f64 * q.ln() + (n - k) as f64 * (1.0 - q).ln()).exp()
}

/// Key rate of repetition-code advantage distillation, bits per satellite symbol.
pub fn bsc_repetition_rate(n_rep: usize, t: &BscTriple) -> Result<f64> {
    let law = repetition_law(n_rep, t)?;
    let gain = (law.h_c_given_eve() - law.h_c_given_bob()).max(0.0);
    Ok(law.p_accept / n_rep as f64 * gain)
}

/// Block-length-1 rate with Eve keeping her continuous observation.
pub fn hard_rate_n1(params: &ModelParams) -> Result<f64> {
    Ok(soft_rate_lower_bound(params, &Thresholds::hard_only())?.soft_rate)
}

/// `max{0, h(ε_XZ) − h(ε_XY)}`: the one-shot binary rate.
pub fn bsc_rate_n1_closed_form(t: &BscTriple) -> f64 {
    (h2(t.eps_xz()) - h2(t.eps_xy())).max(0.0)
}

/// Rates for block lengths `1..=n_max` and the best among them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub mode: ConversionMode,
    pub triple: BscTriple,
    /// `(N, rate)` for `N = 1..=n_max`.
    pub rate_per_n: Vec<(usize, f64)>,
    pub best_n: usize,
    pub best_rate: f64,
}

impl BaselineReport {
    pub fn rate_n1(&self) -> f64 {
        self.rate_per_n[0].1
    }
}

/// Evaluates every block length up to `n_max`; ties keep the smallest N.
pub fn optimal_block_length(
    params: &ModelParams,
    n_max: usize,
    mode: ConversionMode,
) -> Result<BaselineReport> {
    if n_max == 0 {
        return Err(Error::ParameterDomain("n_max must be ≥ 1".into()));
    }
    let triple = BscTriple::from_params(params, mode)?;
    let n1 = hard_rate_n1(params)?;
    let rest: Vec<(usize, f64)> = (2..=n_max)
        .into_par_iter()
        .map(|n| bsc_repetition_rate(n, &triple).map(|r| (n, r)))
        .collect::<Result<_>>()?;
    let mut rate_per_n = Vec::with_capacity(n_max);
    rate_per_n.push((1, n1));
    rate_per_n.extend(rest);
    let (best_n, best_rate) = rate_per_n
        .iter()
        .copied()
        .fold((1, n1), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(BaselineReport {
        mode,
        triple,
        rate_per_n,
        best_n,
        best_rate,
    })
}
