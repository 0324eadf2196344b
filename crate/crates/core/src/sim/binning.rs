//! Random bin coding for reconciliation.
//!
//! A kept bit sequence is sent as the index of a pseudo-random bin; the
//! receiver searches the bin for the sequence most consistent with its own
//! observation. Bin membership comes from a seeded 64-bit mix of the packed
//! sequence, so no table over all sequences is stored.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::entropy::{CellTable, Observer, Party};
use crate::error::{Error, Result};

/// Longest kept sequence the exhaustive decoder will search.
pub const MAX_DECODE_LEN: usize = 24;

/// Bin code parameters; bins are numbered `1..=bin_count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwCode {
    pub bin_count: u64,
    pub seed: u64,
    /// Rate slack above the conditional entropy, bits per symbol.
    pub gamma: f64,
}

impl SwCode {
    pub fn new(bin_count: u64, seed: u64, gamma: f64) -> Result<Self> {
        if bin_count == 0 {
            return Err(Error::ParameterDomain("bin_count must be ≥ 1".into()));
        }
        Ok(Self {
            bin_count,
            seed,
            gamma,
        })
    }

    /// A code with `2^bits` bins.
    pub fn with_bits(bits: u32, seed: u64, gamma: f64) -> Result<Self> {
        if bits > 63 {
            return Err(Error::Capacity(format!("{bits} message bits")));
        }
        Self::new(1u64 << bits, seed, gamma)
    }

    /// Message bits for `len` symbols at `cond_entropy` bits per symbol plus
    /// `gamma`: the smallest integer strictly above `len·(H + γ)`, capped at `cap`.
    pub fn sized_bits(len: usize, cond_entropy: f64, gamma: f64, cap: usize) -> u32 {
        let target = len as f64 * (cond_entropy + gamma);
        let bits = if target < 0.0 { 0.0 } else { target.floor() + 1.0 };
        (bits as usize).min(cap) as u32
    }

    /// `log2(bin_count)`.
    pub fn bits(&self) -> f64 {
        (self.bin_count as f64).log2()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn pack_bits(bits: &[u8]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &b)| acc | (u64::from(b & 1) << i))
}

fn unpack_bits(word: u64, len: usize) -> Vec<u8> {
    (0..len).map(|i| ((word >> i) & 1) as u8).collect()
}

/// Bin index (1-based) of a packed sequence of `len ≤ 64` bits.
///
/// When there are at least `2^len` bins the map is a seeded bijection onto the
/// first `2^len` bins (full disclosure); otherwise it is a seeded hash reduced
/// to `1..=bin_count`.
pub(crate) fn bin_of_packed(word: u64, len: usize, code: &SwCode) -> u64 {
    if let Some(mask) = disclosure_mask(len, code) {
        return (word ^ mask) + 1;
    }
    let h = splitmix64(sequence_key(len, code) ^ splitmix64(word));
    (((h as u128) * (code.bin_count as u128)) >> 64) as u64 + 1
}

fn sequence_key(len: usize, code: &SwCode) -> u64 {
    splitmix64(code.seed ^ splitmix64(len as u64 ^ 0xA076_1D64_78BD_642F))
}

/// XOR mask of the bijective map, if `code` has at least `2^len` bins.
fn disclosure_mask(len: usize, code: &SwCode) -> Option<u64> {
    if len >= 64 || code.bin_count >> len == 0 {
        return None;
    }
    let key = sequence_key(len, code);
    Some(if len == 0 { 0 } else { key & (u64::MAX >> (64 - len)) })
}

/// The unique member of `bin` when the code discloses sequences of `len`
/// bits completely.
fn invert_full(bin: u64, len: usize, code: &SwCode) -> Option<u64> {
    let mask = disclosure_mask(len, code)?;
    let word = bin.checked_sub(1)? ^ mask;
    (word >> len == 0).then_some(word)
}

/// `−log2 P(bits | side information)` under the per-position posteriors.
fn sequence_surprisal(bits: &[u8], side: &SideInfo<'_>, table: &CellTable) -> Result<f64> {
    let mut total = 0.0;
    for ((&b, &obs), &pair) in bits.iter().zip(side.obs).zip(side.pairs) {
        let p1 = table.posterior_bit(side.target, Observer::Partner, obs, pair)?;
        let p = if b == 1 { p1 } else { 1.0 - p1 };
        total -= p.log2();
    }
    Ok(total)
}

/// Bin index of a kept bit sequence.
pub fn bin_encode(bits: &[u8], code: &SwCode) -> Result<u64> {
    if bits.len() > 64 {
        return Err(Error::Capacity(format!(
            "cannot bin {} bits (limit 64)",
            bits.len()
        )));
    }
    Ok(bin_of_packed(pack_bits(bits), bits.len(), code))
}

/// The receiver's knowledge about the sequence it decodes.
#[derive(Debug, Clone, Copy)]
pub struct SideInfo<'a> {
    /// Owner of the encoded bits.
    pub target: Party,
    /// The decoder's own observation at each kept position.
    pub obs: &'a [f64],
    /// Published `(w_a, w_b)` at each kept position.
    pub pairs: &'a [(usize, usize)],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Decoder {
    /// Most probable sequence in the bin.
    Ml,
    /// Unique bin member whose per-symbol surprisal is at most `threshold` bits.
    Typicality { threshold: f64 },
}

#[derive(Clone, Copy, PartialEq)]
struct Cost(f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Enumerates flip patterns of independent binary positions in nondecreasing
/// total cost, where flipping position `i` costs `costs[i] ≥ 0`.
struct FlipEnumerator {
    order: Vec<usize>,
    sorted: Vec<f64>,
    heap: BinaryHeap<Reverse<(Cost, u32, usize)>>,
    started: bool,
}

impl FlipEnumerator {
    fn new(costs: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..costs.len()).collect();
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
        let sorted = order.iter().map(|&i| costs[i]).collect();
        Self {
            order,
            sorted,
            heap: BinaryHeap::new(),
            started: false,
        }
    }

    /// Next `(cost, mask over original positions)`.
    fn next(&mut self) -> Option<(f64, u64)> {
        if !self.started {
            self.started = true;
            if !self.sorted.is_empty() {
                self.heap.push(Reverse((Cost(self.sorted[0]), 1, 0)));
            }
            return Some((0.0, 0));
        }
        let Reverse((Cost(cost), set, last)) = self.heap.pop()?;
        let next = last + 1;
        if next < self.sorted.len() {
            let add = self.sorted[next];
            self.heap
                .push(Reverse((Cost(cost + add), set | (1 << next), next)));
            self.heap.push(Reverse((
                Cost(cost - self.sorted[last] + add),
                (set & !(1 << last)) | (1 << next),
                next,
            )));
        }
        let mut mask = 0u64;
        for (k, &pos) in self.order.iter().enumerate() {
            if set >> k & 1 == 1 {
                mask |= 1 << pos;
            }
        }
        Some((cost, mask))
    }
}

/// Searches the bin `bin` for the encoded sequence given the side information.
///
/// Returns `Ok(None)` when the typicality decoder finds zero or several
/// candidates, or when no bin member is possible.
pub fn decode_in_bin(
    bin: u64,
    side: &SideInfo<'_>,
    code: &SwCode,
    table: &CellTable,
    decoder: Decoder,
) -> Result<Option<Vec<u8>>> {
    let len = side.obs.len();
    if side.pairs.len() != len {
        return Err(Error::ParameterDomain(
            "side information lengths differ".into(),
        ));
    }
    if let Some(word) = invert_full(bin, len, code) {
        return Ok(match decoder {
            Decoder::Ml => Some(unpack_bits(word, len)),
            Decoder::Typicality { threshold } => {
                let bits = unpack_bits(word, len);
                let surprisal = sequence_surprisal(&bits, side, table)?;
                (surprisal <= len as f64 * threshold).then_some(bits)
            }
        });
    }
    if len > MAX_DECODE_LEN {
        return Err(Error::Capacity(format!(
            "kept length {len} exceeds the exhaustive decoder limit {MAX_DECODE_LEN}"
        )));
    }

    // per-position most likely bit and natural-log cost of flipping it
    let mut best = 0u64;
    let mut costs = Vec::with_capacity(len);
    let mut best_surprisal = 0.0;
    for (i, (&obs, &pair)) in side.obs.iter().zip(side.pairs).enumerate() {
        let p1 = table.posterior_bit(side.target, Observer::Partner, obs, pair)?;
        let (p_hi, p_lo) = if p1 > 0.5 {
            best |= 1 << i;
            (p1, 1.0 - p1)
        } else {
            (1.0 - p1, p1)
        };
        best_surprisal -= p_hi.ln();
        costs.push(if p_lo > 0.0 {
            (p_hi / p_lo).ln()
        } else {
            f64::INFINITY
        });
    }

    let mut candidates = FlipEnumerator::new(&costs);
    match decoder {
        Decoder::Ml => {
            let mut found: Option<(f64, Vec<u8>)> = None;
            while let Some((cost, flips)) = candidates.next() {
                if cost.is_infinite() {
                    break;
                }
                if let Some((c, _)) = &found {
                    if cost > *c {
                        break;
                    }
                }
                let word = best ^ flips;
                if bin_of_packed(word, len, code) == bin {
                    let seq = unpack_bits(word, len);
                    found = match found {
                        Some((c, prev)) if prev <= seq => Some((c, prev)),
                        _ => Some((cost, seq)),
                    };
                }
            }
            Ok(found.map(|(_, s)| s))
        }
        Decoder::Typicality { threshold } => {
            if len == 0 {
                return Ok(Some(Vec::new()));
            }
            // surprisal in nats of (best ^ flips) is best_surprisal + cost
            let budget = len as f64 * threshold * std::f64::consts::LN_2 - best_surprisal;
            let mut hit: Option<u64> = None;
            while let Some((cost, flips)) = candidates.next() {
                if cost > budget || cost.is_infinite() {
                    break;
                }
                let word = best ^ flips;
                if bin_of_packed(word, len, code) == bin {
                    if hit.is_some() {
                        return Ok(None);
                    }
                    hit = Some(word);
                }
            }
            Ok(hit.map(|w| unpack_bits(w, len)))
        }
    }
}
