use serde::{Deserialize, Serialize};

use crate::entropy::{CellClassification, CellLabel};
use crate::error::{Error, Result};
use crate::quantizer::{hard_bit, reliability_level, Thresholds};

/// Reliability exchange and bit selection for one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distilled {
    pub w_a: Vec<usize>,
    pub w_b: Vec<usize>,
    pub x_tilde: Vec<u8>,
    pub y_tilde: Vec<u8>,
    /// Position's pair is in set A: Alice's bit is kept.
    pub keep_x: Vec<bool>,
    /// Position's pair is in set B: Bob's bit is kept.
    pub keep_y: Vec<bool>,
}

impl Distilled {
    pub fn len(&self) -> usize {
        self.w_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w_a.is_empty()
    }

    pub fn x_positions(&self) -> Vec<usize> {
        positions(&self.keep_x)
    }

    pub fn y_positions(&self) -> Vec<usize> {
        positions(&self.keep_y)
    }

    /// Alice's kept hard bits, in position order.
    pub fn x_kept(&self) -> Vec<u8> {
        self.x_positions().into_iter().map(|i| self.x_tilde[i]).collect()
    }

    /// Bob's kept hard bits, in position order.
    pub fn y_kept(&self) -> Vec<u8> {
        self.y_positions().into_iter().map(|i| self.y_tilde[i]).collect()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.w_a.iter().copied().zip(self.w_b.iter().copied()).collect()
    }
}

fn positions(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(i, &k)| k.then_some(i))
        .collect()
}

/// Quantises both observation sequences and marks the positions whose
/// reliability pair is in set A (keep X) or set B (keep Y).
pub fn distill(
    x: &[f64],
    y: &[f64],
    t: &Thresholds,
    classification: &CellClassification,
) -> Result<Distilled> {
    if x.len() != y.len() {
        return Err(Error::ParameterDomain(format!(
            "sequence lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if classification.levels != t.levels() {
        return Err(Error::ParameterDomain(
            "classification does not match the threshold set".into(),
        ));
    }
    let n = x.len();
    let mut d = Distilled {
        w_a: Vec::with_capacity(n),
        w_b: Vec::with_capacity(n),
        x_tilde: Vec::with_capacity(n),
        y_tilde: Vec::with_capacity(n),
        keep_x: Vec::with_capacity(n),
        keep_y: Vec::with_capacity(n),
    };
    for (&xi, &yi) in x.iter().zip(y) {
        let wa = reliability_level(xi, t);
        let wb = reliability_level(yi, t);
        let label = classification.label(wa, wb);
        d.w_a.push(wa);
        d.w_b.push(wb);
        d.x_tilde.push(hard_bit(xi));
        d.y_tilde.push(hard_bit(yi));
        d.keep_x.push(label == CellLabel::UseX);
        d.keep_y.push(label == CellLabel::UseY);
    }
    Ok(d)
}
