//! Reliability levels and hard decisions.
//!
//! With thresholds `0 < a_1 < … < a_K`, a received value `x` gets level 0 when
//! `|x| ≤ a_1`, level `j` when `a_j < |x| ≤ a_{j+1}` and level `K` when
//! `|x| > a_K`. Its hard bit is 1 iff `x ≥ 0`. Each `(bit, level)` pair is one
//! of `2(K+1)` intervals partitioning the real line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::std_normal_interval;

/// A validated, strictly increasing list of positive thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Thresholds {
    a: Vec<f64>,
}

impl Thresholds {
    /// The K = 0 quantizer: one reliability level, hard decisions only.
    pub fn hard_only() -> Self {
        Self { a: Vec::new() }
    }

    /// Number of thresholds K; levels run over `0..=K`.
    pub fn k(&self) -> usize {
        self.a.len()
    }

    /// Number of reliability levels, `K + 1`.
    pub fn levels(&self) -> usize {
        self.a.len() + 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    /// Magnitude range `(lo, hi]` of a level; `hi` is infinite for level K.
    pub fn level_range(&self, level: usize) -> (f64, f64) {
        let lo = if level == 0 { 0.0 } else { self.a[level - 1] };
        let hi = self.a.get(level).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }
}

impl TryFrom<Vec<f64>> for Thresholds {
    type Error = Error;

    fn try_from(raw: Vec<f64>) -> Result<Self> {
        validate_thresholds(&raw)
    }
}

impl From<Thresholds> for Vec<f64> {
    fn from(t: Thresholds) -> Self {
        t.a
    }
}

impl std::fmt::Display for Thresholds {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.a.iter().map(|v| format!("{v}")).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Checks that `raw` is finite, positive and strictly increasing.
pub fn validate_thresholds(raw: &[f64]) -> Result<Thresholds> {
    for (i, &v) in raw.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::InvalidThresholds {
                index: i,
                reason: format!("non-finite value {v}"),
            });
        }
        if v <= 0.0 {
            return Err(Error::InvalidThresholds {
                index: i,
                reason: format!("non-positive value {v}"),
            });
        }
        if i > 0 && v <= raw[i - 1] {
            return Err(Error::InvalidThresholds {
                index: i,
                reason: format!("{v} does not exceed previous value {}", raw[i - 1]),
            });
        }
    }
    Ok(Thresholds { a: raw.to_vec() })
}

/// A (hard bit, reliability level) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub bit: u8,
    pub level: usize,
}

impl Cell {
    pub fn new(bit: u8, level: usize) -> Self {
        Self { bit, level }
    }

    /// The cell a received value falls in.
    pub fn of(x: f64, t: &Thresholds) -> Self {
        Self {
            bit: hard_bit(x),
            level: reliability_level(x, t),
        }
    }

    /// All `2(K+1)` cells, bit-major.
    pub fn all(t: &Thresholds) -> impl Iterator<Item = Cell> + '_ {
        (0..2u8).flat_map(move |bit| (0..t.levels()).map(move |level| Cell { bit, level }))
    }

    /// Interval of the real line covered by the cell. Endpoint inclusion is not
    /// represented; it follows `reliability_level` / `hard_bit`.
    pub fn interval(&self, t: &Thresholds) -> (f64, f64) {
        let (lo, hi) = t.level_range(self.level);
        if self.bit == 1 {
            (lo, hi)
        } else {
            (-hi, -lo)
        }
    }
}

/// Reliability level of `x`; depends on `x` only through `|x|`.
pub fn reliability_level(x: f64, t: &Thresholds) -> usize {
    let m = x.abs();
    // number of thresholds strictly below |x|
    t.a.partition_point(|&a| a < m)
}

/// Hard decision: 1 iff `x ≥ 0`.
pub fn hard_bit(x: f64) -> u8 {
    u8::from(x >= 0.0)
}

/// P(X ∈ cell | U = u) for X = u + N, N ~ normal(0, v).
pub fn cell_prob(u: i8, cell: Cell, v: f64, t: &Thresholds) -> Result<f64> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "variance must be finite and positive, got {v}"
        )));
    }
    if u != 1 && u != -1 {
        return Err(Error::ParameterDomain(format!("signal must be ±1, got {u}")));
    }
    if cell.bit > 1 || cell.level > t.k() {
        return Err(Error::ParameterDomain(format!(
            "cell ({}, {}) outside alphabet for K = {}",
            cell.bit,
            cell.level,
            t.k()
        )));
    }
    Ok(cell_prob_unchecked(f64::from(u), cell, v.sqrt(), t))
}

pub(crate) fn cell_prob_unchecked(u: f64, cell: Cell, sigma: f64, t: &Thresholds) -> f64 {
    let (lo, hi) = cell.interval(t);
    std_normal_interval((lo - u) / sigma, (hi - u) / sigma)
}
