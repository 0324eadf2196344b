//! Channel-model parameters and the scalar Gaussian / entropy primitives used
//! throughout the crate.
//!
//! The satellite emits `U ∈ {-1, +1}` with equal priors; Alice, Bob and Eve see
//! `U + N` with independent zero-mean Gaussian noise of variance `v_a`, `v_b`
//! and `v_e`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Noise variances of the three satellite channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub v_a: f64,
    pub v_b: f64,
    pub v_e: f64,
    /// Constellation magnitude; always 1.
    pub amplitude: f64,
}

impl ModelParams {
    pub fn new(v_a: f64, v_b: f64, v_e: f64) -> Result<Self> {
        for (name, v) in [("v_a", v_a), ("v_b", v_b), ("v_e", v_e)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::ParameterDomain(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(Self {
            v_a,
            v_b,
            v_e,
            amplitude: 1.0,
        })
    }

    /// The same model with Alice and Bob exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            v_a: self.v_b,
            v_b: self.v_a,
            ..*self
        }
    }

    /// SNR of Alice's channel in dB, `10·log10(1/v_a)`.
    pub fn snr_db(&self) -> f64 {
        -10.0 * self.v_a.log10()
    }

    /// Eve-to-Bob noise ratio `v_e / v_b`.
    pub fn nnr(&self) -> f64 {
        self.v_e / self.v_b
    }
}

/// Builds the symmetric (`v_a = v_b`) model from an SNR in dB and a noise-to-noise ratio.
pub fn snr_nnr_to_params(snr_db: f64, nnr: f64) -> Result<ModelParams> {
    if !snr_db.is_finite() {
        return Err(Error::ParameterDomain(format!(
            "snr_db must be finite, got {snr_db}"
        )));
    }
    if !(nnr.is_finite() && nnr > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "nnr must be finite and positive, got {nnr}"
        )));
    }
    let v = 10f64.powf(-snr_db / 10.0);
    ModelParams::new(v, v, nnr * v)
}

/// Complementary error function `(2/√π)∫_z^∞ e^{-t²} dt`.
pub fn erfc(z: f64) -> f64 {
    libm::erfc(z)
}

/// Standard normal CDF Φ(x), accurate in relative terms far into the lower tail.
pub(crate) fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail 1 − Φ(x).
pub(crate) fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// P(lo < N ≤ hi) for a standard normal N, evaluated on whichever side of the
/// origin avoids cancellation.
pub(crate) fn std_normal_interval(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let p = if lo >= 0.0 {
        std_normal_sf(lo) - std_normal_sf(hi)
    } else if hi <= 0.0 {
        std_normal_cdf(hi) - std_normal_cdf(lo)
    } else {
        1.0 - std_normal_cdf(lo) - std_normal_sf(hi)
    };
    p.max(0.0)
}

/// P(N ≤ x) for N ~ normal(mean, var).
pub fn gaussian_cdf(x: f64, mean: f64, var: f64) -> Result<f64> {
    if !(var.is_finite() && var > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "variance must be finite and positive, got {var}"
        )));
    }
    if x.is_nan() || mean.is_nan() {
        return Err(Error::ParameterDomain("NaN argument to gaussian_cdf".into()));
    }
    Ok(std_normal_cdf((x - mean) / var.sqrt()))
}

/// Natural log of the normal density with the given variance at offset `d` from the mean.
#[inline]
pub(crate) fn ln_normal_pdf(d: f64, var: f64) -> f64 {
    -0.5 * d * d / var - 0.5 * (2.0 * std::f64::consts::PI * var).ln()
}

/// Binary entropy in bits, with 0·log 0 = 0.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ParameterDomain(format!(
            "probability must lie in [0, 1], got {p}"
        )));
    }
    Ok(h2(p))
}

/// Unchecked binary entropy; arguments are clamped to [0, 1].
#[inline]
pub(crate) fn h2(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let q = 1.0 - p;
    let mut acc = 0.0;
    if p > 0.0 {
        acc -= p * p.ln();
    }
    if q > 0.0 {
        acc -= q * q.ln();
    }
    acc / std::f64::consts::LN_2
}

/// Shannon entropy (bits) of an unnormalised weight vector.
pub(crate) fn entropy_of_weights(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for &w in weights {
        if w > 0.0 {
            let p = w / total;
            acc -= p * p.ln();
        }
    }
    acc / std::f64::consts::LN_2
}

/// `ln(e^a + e^b)` without overflow; handles `-inf` operands.
#[inline]
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_conversion_examples() {
        let p = snr_nnr_to_params(0.0, 1.0).unwrap();
        assert_eq!((p.v_a, p.v_b, p.v_e), (1.0, 1.0, 1.0));
        let p = snr_nnr_to_params(10.0, 1.0).unwrap();
        assert!((p.v_a - 0.1).abs() < 1e-15 && (p.v_e - 0.1).abs() < 1e-15);
        let p = snr_nnr_to_params(5.0, 10.0).unwrap();
        // 10^-0.5 = 1/sqrt(10)
        let r = 1.0 / 10f64.sqrt();
        assert!((p.v_a - r).abs() < 1e-15);
        assert!((p.v_e - 10.0 * r).abs() < 1e-14);
        assert!((p.v_a - 0.316228).abs() < 1e-6);
        assert!((p.v_e - 3.16228).abs() < 1e-5);
    }

    #[test]
    fn snr_conversion_rejects_bad_input() {
        assert!(snr_nnr_to_params(1.0, 0.0).is_err());
        assert!(snr_nnr_to_params(1.0, -2.0).is_err());
        assert!(snr_nnr_to_params(f64::NAN, 1.0).is_err());
        assert!(snr_nnr_to_params(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn cdf_trivial_points() {
        assert_eq!(gaussian_cdf(0.0, 0.0, 1.0).unwrap(), 0.5);
        assert_eq!(gaussian_cdf(f64::INFINITY, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(gaussian_cdf(f64::NEG_INFINITY, 0.0, 1.0).unwrap(), 0.0);
        assert!(gaussian_cdf(0.0, 0.0, 0.0).is_err());
        assert!(gaussian_cdf(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn erfc_trivial_points() {
        assert_eq!(erfc(0.0), 1.0);
        assert_eq!(erfc(f64::INFINITY), 0.0);
        assert_eq!(erfc(f64::NEG_INFINITY), 2.0);
    }

    #[test]
    fn entropy_points() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn interval_far_tail_keeps_precision() {
        // both endpoints deep in the upper tail
        let p = std_normal_interval(30.0, 31.0);
        assert!(p > 0.0);
        let q = std_normal_sf(30.0);
        assert!((p / q - 1.0).abs() < 1e-6);
    }

    #[test]
    fn swap_and_ratios() {
        let p = ModelParams::new(0.5, 2.0, 4.0).unwrap();
        let s = p.swapped();
        assert_eq!((s.v_a, s.v_b, s.v_e), (2.0, 0.5, 4.0));
        assert!((p.nnr() - 2.0).abs() < 1e-15);
        assert!(ModelParams::new(1.0, 0.0, 1.0).is_err());
    }
}
