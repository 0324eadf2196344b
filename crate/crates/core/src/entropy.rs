//! Quadrature evaluation of the per-cell conditional entropies and the
//! soft-decision secret-key-rate lower bound.
//!
//! For a reliability pair `(w_a, w_b)` the rate bound weighs
//! `max{0, H(X̃|Z,·) − H(X̃|Y,·), H(Ỹ|Z,·) − H(Ỹ|X,·)}` by `P(w_a, w_b)`.
//! Every entropy is a one-dimensional integral over the conditioning
//! observation, because X, Y and Z are independent given U.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{h2, ln_normal_pdf, log_add_exp, std_normal_sf, ModelParams};
use crate::quadrature;
use crate::quantizer::{cell_prob_unchecked, Cell, Thresholds};

/// Half-width of the integration window, in noise standard deviations, beyond
/// the signal point (or the outermost threshold).
pub const TRUNCATION_SIGMAS: f64 = 8.0;

/// Absolute tolerance handed to the adaptive quadrature for each normalised entropy integral.
const QUAD_TOL: f64 = 1e-11;

/// Upper bound on the probability mass dropped by truncating an observation to
/// its integration window (two one-sided Gaussian tails at `TRUNCATION_SIGMAS`).
pub fn tail_mass_bound() -> f64 {
    2.0 * std_normal_sf(TRUNCATION_SIGMAS)
}

/// A legitimate party; Alice holds X, Bob holds Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Self {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

/// Whose continuous observation conditions a hard bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observer {
    /// The other legitimate party (Y for Alice's bit, X for Bob's).
    Partner,
    Eve,
}

/// Conditional cell laws of one party. Index order is `[u][bit][level]` with
/// `u = 0` meaning the signal −1.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PartyLaw {
    var: f64,
    cell: [[Vec<f64>; 2]; 2],
    level: [Vec<f64>; 2],
}

impl PartyLaw {
    fn new(var: f64, t: &Thresholds) -> Self {
        let sigma = var.sqrt();
        let cell = [-1.0, 1.0].map(|u| {
            [0u8, 1].map(|bit| {
                (0..t.levels())
                    .map(|level| cell_prob_unchecked(u, Cell { bit, level }, sigma, t))
                    .collect::<Vec<_>>()
            })
        });
        let level = [0, 1].map(|ui| {
            (0..t.levels())
                .map(|l| cell[ui][0][l] + cell[ui][1][l])
                .collect::<Vec<_>>()
        });
        Self { var, cell, level }
    }
}

#[inline]
fn u_index(u: i8) -> usize {
    usize::from(u > 0)
}

const SIGNALS: [f64; 2] = [-1.0, 1.0];

/// Exact cell probabilities for both legitimate channels and the joint law of
/// the published reliability pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellTable {
    params: ModelParams,
    thresholds: Thresholds,
    alice: PartyLaw,
    bob: PartyLaw,
    /// `P(W_A = w_a, W_B = w_b)`, row-major in `w_a`.
    joint: Vec<f64>,
}

/// Builds the cell table; `P(w_a, w_b) = Σ_u ½·P(w_a|u)·P(w_b|u)`.
pub fn build_cell_table(params: &ModelParams, t: &Thresholds) -> Result<CellTable> {
    let params = ModelParams::new(params.v_a, params.v_b, params.v_e)?;
    let alice = PartyLaw::new(params.v_a, t);
    let bob = PartyLaw::new(params.v_b, t);
    let n = t.levels();
    let mut joint = Vec::with_capacity(n * n);
    for wa in 0..n {
        for wb in 0..n {
            let p: f64 = (0..2)
                .map(|ui| 0.5 * alice.level[ui][wa] * bob.level[ui][wb])
                .sum();
            joint.push(p);
        }
    }
    Ok(CellTable {
        params,
        thresholds: t.clone(),
        alice,
        bob,
        joint,
    })
}

impl CellTable {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    pub fn levels(&self) -> usize {
        self.thresholds.levels()
    }

    /// `P(W_A = w_a, W_B = w_b)`.
    pub fn joint(&self, w_a: usize, w_b: usize) -> f64 {
        self.joint[w_a * self.levels() + w_b]
    }

    pub fn joint_weights(&self) -> &[f64] {
        &self.joint
    }

    /// `P(bit, level | U = u)` on `party`'s channel.
    pub fn cond(&self, party: Party, u: i8, cell: Cell) -> f64 {
        self.law(party).cell[u_index(u)][usize::from(cell.bit)][cell.level]
    }

    fn law(&self, party: Party) -> &PartyLaw {
        match party {
            Party::Alice => &self.alice,
            Party::Bob => &self.bob,
        }
    }

    fn check_pair(&self, pair: (usize, usize)) -> Result<()> {
        let n = self.levels();
        if pair.0 >= n || pair.1 >= n {
            return Err(Error::ParameterDomain(format!(
                "reliability pair ({}, {}) outside 0..={}",
                pair.0,
                pair.1,
                n - 1
            )));
        }
        Ok(())
    }

    /// Levels `(target's, other's)` for a pair given as `(w_a, w_b)`.
    fn split_pair(target: Party, pair: (usize, usize)) -> (usize, usize) {
        match target {
            Party::Alice => pair,
            Party::Bob => (pair.1, pair.0),
        }
    }

    fn observer_var(&self, target: Party, observer: Observer) -> f64 {
        match observer {
            Observer::Eve => self.params.v_e,
            Observer::Partner => self.law(target.other()).var,
        }
    }

    /// Log-weights `(ln Σ_u …bit=1…, ln Σ_u …any bit…)` at observation `obs`.
    fn log_weights(
        &self,
        target: Party,
        observer: Observer,
        obs: f64,
        pair: (usize, usize),
    ) -> (f64, f64) {
        let (wt, wo) = Self::split_pair(target, pair);
        let tl = self.law(target);
        let ol = self.law(target.other());
        let var = self.observer_var(target, observer);
        let mut num = f64::NEG_INFINITY;
        let mut den = f64::NEG_INFINITY;
        for (ui, &u) in SIGNALS.iter().enumerate() {
            let mut base = ln_normal_pdf(obs - u, var);
            if observer == Observer::Eve {
                base += ol.level[ui][wo].ln();
            }
            num = log_add_exp(num, base + tl.cell[ui][1][wt].ln());
            den = log_add_exp(den, base + tl.level[ui][wt].ln());
        }
        (num, den)
    }

    /// `P(target's hard bit = 1 | observation, W_A = w_a, W_B = w_b)`.
    ///
    /// For the partner the observation's own level is implied by its value, so
    /// only the target's level enters; Eve's observation carries no level, so
    /// both parties' level likelihoods weight the two hypotheses.
    pub fn posterior_bit(
        &self,
        target: Party,
        observer: Observer,
        obs: f64,
        pair: (usize, usize),
    ) -> Result<f64> {
        self.check_pair(pair)?;
        if !obs.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "observation must be finite, got {obs}"
            )));
        }
        let (num, den) = self.log_weights(target, observer, obs, pair);
        if den == f64::NEG_INFINITY {
            return Err(Error::UndefinedConditional(pair.0, pair.1));
        }
        Ok((num - den).exp().clamp(0.0, 1.0))
    }

    /// Finite integration windows for the conditioning observation.
    fn windows(&self, target: Party, observer: Observer, pair: (usize, usize)) -> Vec<(f64, f64)> {
        let sigma = self.observer_var(target, observer).sqrt();
        match observer {
            Observer::Eve => {
                let r = 1.0 + TRUNCATION_SIGMAS * sigma;
                vec![(-r, 0.0), (0.0, r)]
            }
            Observer::Partner => {
                let (_, wo) = Self::split_pair(target, pair);
                let (lo, hi) = self.thresholds.level_range(wo);
                let hi = if hi.is_finite() {
                    hi
                } else {
                    lo.max(1.0) + TRUNCATION_SIGMAS * sigma
                };
                vec![(-hi, -lo), (lo, hi)]
            }
        }
    }

    /// `H(target bit | observer's observation, W_A = w_a, W_B = w_b)` in bits.
    pub fn conditional_bit_entropy(
        &self,
        target: Party,
        observer: Observer,
        pair: (usize, usize),
    ) -> Result<f64> {
        self.check_pair(pair)?;
        let weight = self.joint(pair.0, pair.1);
        if weight <= 0.0 {
            return Err(Error::UndefinedConditional(pair.0, pair.1));
        }
        let ln_norm = weight.ln() - 0.5f64.ln();
        let integrand = |obs: f64| {
            let (num, den) = self.log_weights(target, observer, obs, pair);
            if den == f64::NEG_INFINITY {
                return 0.0;
            }
            let density = (den - ln_norm).exp();
            density * h2((num - den).exp())
        };
        let sigma = self.observer_var(target, observer).sqrt();
        let total: f64 = self
            .windows(target, observer, pair)
            .into_iter()
            .map(|(a, b)| quadrature::integrate(&integrand, a, b, sigma, QUAD_TOL))
            .sum();
        Ok(total.clamp(0.0, 1.0))
    }

    /// All four entropies of one reliability pair.
    pub fn entropy_quad(&self, pair: (usize, usize)) -> Result<EntropyQuad> {
        Ok(EntropyQuad {
            h_x_given_z: self.conditional_bit_entropy(Party::Alice, Observer::Eve, pair)?,
            h_x_given_y: self.conditional_bit_entropy(Party::Alice, Observer::Partner, pair)?,
            h_y_given_z: self.conditional_bit_entropy(Party::Bob, Observer::Eve, pair)?,
            h_y_given_x: self.conditional_bit_entropy(Party::Bob, Observer::Partner, pair)?,
        })
    }
}

/// Builds a table and evaluates one posterior.
pub fn posterior_bit(
    target: Party,
    observer: Observer,
    obs: f64,
    pair: (usize, usize),
    params: &ModelParams,
    t: &Thresholds,
) -> Result<f64> {
    build_cell_table(params, t)?.posterior_bit(target, observer, obs, pair)
}

/// Builds a table and evaluates one conditional entropy.
pub fn conditional_bit_entropy(
    target: Party,
    observer: Observer,
    pair: (usize, usize),
    params: &ModelParams,
    t: &Thresholds,
) -> Result<f64> {
    build_cell_table(params, t)?.conditional_bit_entropy(target, observer, pair)
}

/// The four conditional entropies of one reliability pair, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyQuad {
    /// H(X̃ | Z, cell)
    pub h_x_given_z: f64,
    /// H(X̃ | Y, cell)
    pub h_x_given_y: f64,
    /// H(Ỹ | Z, cell)
    pub h_y_given_z: f64,
    /// H(Ỹ | X, cell)
    pub h_y_given_x: f64,
}

impl EntropyQuad {
    /// Eve's minus Bob's ambiguity about Alice's bit.
    pub fn diff_x(&self) -> f64 {
        self.h_x_given_z - self.h_x_given_y
    }

    /// Eve's minus Alice's ambiguity about Bob's bit.
    pub fn diff_y(&self) -> f64 {
        self.h_y_given_z - self.h_y_given_x
    }
}

/// Which hard bit, if any, a reliability pair contributes to the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellLabel {
    /// Keep Alice's bit (set A).
    UseX,
    /// Keep Bob's bit (set B).
    UseY,
    Discard,
}

/// Set A takes ties (`≥`), set B needs a strict advantage (`>`).
pub fn classify_cell(q: &EntropyQuad) -> CellLabel {
    let dx = q.diff_x();
    let dy = q.diff_y();
    if dx >= dy.max(0.0) {
        CellLabel::UseX
    } else if dy > dx.max(0.0) {
        CellLabel::UseY
    } else {
        CellLabel::Discard
    }
}

/// One classified reliability pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedCell {
    pub w_a: usize,
    pub w_b: usize,
    pub label: CellLabel,
    /// `None` for zero-probability pairs.
    pub entropies: Option<EntropyQuad>,
}

/// Labels for every pair in `{0..K}²`, row-major in `w_a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellClassification {
    pub levels: usize,
    pub cells: Vec<ClassifiedCell>,
}

impl CellClassification {
    pub fn label(&self, w_a: usize, w_b: usize) -> CellLabel {
        self.cells[w_a * self.levels + w_b].label
    }

    pub fn get(&self, w_a: usize, w_b: usize) -> &ClassifiedCell {
        &self.cells[w_a * self.levels + w_b]
    }

    /// A classification that discards everything.
    pub fn discard_all(levels: usize) -> Self {
        let cells = (0..levels * levels)
            .map(|i| ClassifiedCell {
                w_a: i / levels,
                w_b: i % levels,
                label: CellLabel::Discard,
                entropies: None,
            })
            .collect();
        Self { levels, cells }
    }
}

/// Result of the soft-decision rate evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport {
    pub params: ModelParams,
    pub thresholds: Thresholds,
    /// Lower bound on the secret key rate, bits per satellite symbol.
    pub soft_rate: f64,
    /// `P(w_a, w_b)`, row-major in `w_a`.
    pub weights: Vec<f64>,
    /// `P(w_a, w_b)·max{0, diff_x, diff_y}`, same order.
    pub contributions: Vec<f64>,
    pub classification: CellClassification,
    /// H(X_Δ Y_Δ | Z W_A W_B): Eve's total ambiguity about the kept bits per symbol.
    pub h_kept_given_eve: f64,
    /// H(X_Δ | Y W_A W_B).
    pub h_x_kept_given_y: f64,
    /// H(Y_Δ | X W_A W_B).
    pub h_y_kept_given_x: f64,
    /// Probability of a kept position, `P(A ∪ B)`.
    pub keep_fraction: f64,
    /// Bound on the Gaussian mass dropped by the integration windows.
    pub tail_mass_bound: f64,
}

impl RateReport {
    pub fn levels(&self) -> usize {
        self.thresholds.levels()
    }

    /// Probability that a position is kept for Alice's (set A) or Bob's (set B) bit.
    pub fn label_mass(&self, label: CellLabel) -> f64 {
        self.classification
            .cells
            .iter()
            .zip(&self.weights)
            .filter(|(c, _)| c.label == label)
            .map(|(_, w)| *w)
            .sum()
    }
}

/// Evaluates the soft-decision lower bound over all pairs in `{0..K}²`.
pub fn soft_rate_lower_bound(params: &ModelParams, t: &Thresholds) -> Result<RateReport> {
    let table = build_cell_table(params, t)?;
    rate_from_table(&table)
}

/// Same as [`soft_rate_lower_bound`] on a prebuilt table.
pub fn rate_from_table(table: &CellTable) -> Result<RateReport> {
    let n = table.levels();
    let cells: Vec<ClassifiedCell> = (0..n * n)
        .into_par_iter()
        .map(|i| {
            let (w_a, w_b) = (i / n, i % n);
            if table.joint(w_a, w_b) <= 0.0 {
                return Ok(ClassifiedCell {
                    w_a,
                    w_b,
                    label: CellLabel::Discard,
                    entropies: None,
                });
            }
            let q = table.entropy_quad((w_a, w_b))?;
            Ok(ClassifiedCell {
                w_a,
                w_b,
                label: classify_cell(&q),
                entropies: Some(q),
            })
        })
        .collect::<Result<_>>()?;

    let weights = table.joint_weights().to_vec();
    let mut contributions = Vec::with_capacity(n * n);
    let (mut h_eve, mut h_x, mut h_y, mut keep) = (0.0, 0.0, 0.0, 0.0);
    for (c, &w) in cells.iter().zip(&weights) {
        let contrib = match (c.label, c.entropies) {
            (CellLabel::UseX, Some(q)) => {
                h_eve += w * q.h_x_given_z;
                h_x += w * q.h_x_given_y;
                keep += w;
                w * q.diff_x().max(0.0)
            }
            (CellLabel::UseY, Some(q)) => {
                h_eve += w * q.h_y_given_z;
                h_y += w * q.h_y_given_x;
                keep += w;
                w * q.diff_y().max(0.0)
            }
            _ => 0.0,
        };
        contributions.push(contrib);
    }
    let soft_rate = contributions.iter().sum::<f64>().max(0.0);
    Ok(RateReport {
        params: *table.params(),
        thresholds: table.thresholds().clone(),
        soft_rate,
        weights,
        contributions,
        classification: CellClassification { levels: n, cells },
        h_kept_given_eve: h_eve,
        h_x_kept_given_y: h_x,
        h_y_kept_given_x: h_y,
        keep_fraction: keep,
        tail_mass_bound: tail_mass_bound(),
    })
}
