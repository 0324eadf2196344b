use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng::{stream, Purpose};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// One block of satellite symbols and the three received sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub u: Vec<i8>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

/// Draws `n` uniform ±1 symbols and their noisy observations.
pub fn sample_round(n: usize, params: &ModelParams, seed: u64) -> Result<Round> {
    if n == 0 {
        return Err(Error::ParameterDomain("round length must be ≥ 1".into()));
    }
    let mut rng = stream(seed, Purpose::Channel, 0);
    Ok(sample_round_with(&mut rng, n, params))
}

pub(crate) fn sample_symbol<R: Rng>(rng: &mut R, params: &ModelParams) -> (i8, f64, f64, f64) {
    let u: i8 = if rng.random::<bool>() { 1 } else { -1 };
    let uf = f64::from(u);
    let na: f64 = rng.sample(StandardNormal);
    let nb: f64 = rng.sample(StandardNormal);
    let ne: f64 = rng.sample(StandardNormal);
    (
        u,
        uf + params.v_a.sqrt() * na,
        uf + params.v_b.sqrt() * nb,
        uf + params.v_e.sqrt() * ne,
    )
}

pub(crate) fn sample_round_with<R: Rng>(rng: &mut R, n: usize, params: &ModelParams) -> Round {
    let mut round = Round {
        u: Vec::with_capacity(n),
        x: Vec::with_capacity(n),
        y: Vec::with_capacity(n),
        z: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let (u, x, y, z) = sample_symbol(rng, params);
        round.u.push(u);
        round.x.push(x);
        round.y.push(y);
        round.z.push(z);
    }
    round
}
