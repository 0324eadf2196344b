//! Per-purpose random streams derived from one master seed.
//!
//! Every consumer gets its own ChaCha stream, selected by a purpose label and
//! an index (typically the trial number), so changing how much randomness one
//! component draws never shifts another component's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Channel = 1,
    BinCode = 2,
    Hash = 3,
    Decoder = 4,
    Security = 5,
    Run = 6,
}

pub fn stream(master: u64, purpose: Purpose, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master);
    rng.set_stream(((purpose as u64) << 56) | (index & ((1 << 56) - 1)));
    rng
}

/// Seed of the `index`-th independent run under one master seed.
pub fn run_seed(master: u64, index: u64) -> u64 {
    use rand::Rng;
    stream(master, Purpose::Run, index).random()
}
