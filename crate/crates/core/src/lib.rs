//! Secret-key rates and desk-scale protocol simulation for soft-decision key
//! agreement over the Gaussian satellite model.
//!
//! A satellite broadcasts `U = ±1`; Alice, Bob and Eve receive it through
//! independent Gaussian channels. Alice and Bob publish the reliability level
//! of each observation, keep the positions where one of them has an entropy
//! advantage over Eve, reconcile with bin coding and hash the result into a
//! key. This crate evaluates the resulting rate bound, the hard-decision
//! repetition-code baseline, and runs the protocol itself on short blocks.

pub mod baseline;
pub mod entropy;
pub mod error;
pub mod model;
pub mod quadrature;
pub mod quantizer;
pub mod sim;

pub use baseline::{
    bsc_crossover, bsc_rate_n1_closed_form, bsc_repetition_rate, hard_rate_n1,
    optimal_block_length, repetition_law, BaselineReport, BscTriple, ConversionMode,
    RepetitionLaw,
};
pub use entropy::{
    build_cell_table, classify_cell, conditional_bit_entropy, posterior_bit, rate_from_table,
    soft_rate_lower_bound, tail_mass_bound, CellClassification, CellLabel, CellTable,
    ClassifiedCell, EntropyQuad, Observer, Party, RateReport,
};
pub use error::{Error, Result};
pub use model::{binary_entropy, erfc, gaussian_cdf, snr_nnr_to_params, ModelParams};
pub use quantizer::{
    cell_prob, hard_bit, reliability_level, validate_thresholds, Cell, Thresholds,
};
