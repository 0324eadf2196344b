//! Toeplitz-matrix hashing over GF(2), a two-universal family.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed length for an `in_len → out_len` Toeplitz hash.
pub fn seed_len(in_len: usize, out_len: usize) -> usize {
    (in_len + out_len).saturating_sub(1)
}

/// `T·bits` over GF(2) with `T[i][j] = seed[i − j + in_len − 1]`.
pub fn toeplitz_hash(bits: &[u8], seed: &[u8], out_len: usize) -> Result<Vec<u8>> {
    let n = bits.len();
    if out_len == 0 {
        return Ok(Vec::new());
    }
    if seed.len() != seed_len(n, out_len) {
        return Err(Error::ParameterDomain(format!(
            "Toeplitz seed has {} bits, expected {}",
            seed.len(),
            seed_len(n, out_len)
        )));
    }
    Ok((0..out_len)
        .map(|i| {
            bits.iter()
                .enumerate()
                .fold(0u8, |acc, (j, &b)| acc ^ (b & seed[i + n - 1 - j] & 1))
        })
        .collect())
}

/// A fixed member of the family, with rows packed into words for inputs of
/// at most 64 bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToeplitzHash {
    in_len: usize,
    out_len: usize,
    seed: Vec<u8>,
    #[serde(skip)]
    rows: Vec<u64>,
}

impl ToeplitzHash {
    pub fn new(in_len: usize, out_len: usize, seed: Vec<u8>) -> Result<Self> {
        if out_len > 0 && seed.len() != seed_len(in_len, out_len) {
            return Err(Error::ParameterDomain(format!(
                "Toeplitz seed has {} bits, expected {}",
                seed.len(),
                seed_len(in_len, out_len)
            )));
        }
        let rows = if in_len <= 64 {
            (0..out_len)
                .map(|i| {
                    (0..in_len).fold(0u64, |acc, j| {
                        acc | (u64::from(seed[i + in_len - 1 - j] & 1) << j)
                    })
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            in_len,
            out_len,
            seed,
            rows,
        })
    }

    /// Uniformly random member.
    pub fn random<R: Rng + ?Sized>(in_len: usize, out_len: usize, rng: &mut R) -> Self {
        let len = if out_len == 0 { 0 } else { seed_len(in_len, out_len) };
        let seed = (0..len).map(|_| rng.random::<bool>() as u8).collect();
        Self::new(in_len, out_len, seed).expect("seed length matches")
    }

    pub fn in_len(&self) -> usize {
        self.in_len
    }

    pub fn out_len(&self) -> usize {
        self.out_len
    }

    pub fn seed(&self) -> &[u8] {
        &self.seed
    }

    pub fn hash(&self, bits: &[u8]) -> Result<Vec<u8>> {
        if bits.len() != self.in_len {
            return Err(Error::ParameterDomain(format!(
                "hash input has {} bits, expected {}",
                bits.len(),
                self.in_len
            )));
        }
        toeplitz_hash(bits, &self.seed, self.out_len)
    }

    /// Hash of a packed input (bit `j` of `word` is input bit `j`); output bit
    /// `i` is bit `i` of the result. Requires `in_len ≤ 64` and `out_len ≤ 64`.
    pub fn hash_packed(&self, word: u64) -> u64 {
        debug_assert!(self.in_len <= 64 && self.out_len <= 64);
        self.rows
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &row)| {
                acc | (u64::from((row & word).count_ones() & 1) << i)
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::{stream, Purpose};

    #[test]
    fn zero_input_and_wrong_seed() {
        assert_eq!(toeplitz_hash(&[0; 5], &[1; 7], 3).unwrap(), vec![0; 3]);
        assert!(toeplitz_hash(&[0; 5], &[1; 6], 3).is_err());
        assert!(ToeplitzHash::new(5, 3, vec![0; 8]).is_err());
    }

    #[test]
    fn explicit_matrix() {
        // in_len 3, out_len 2, seed s0..s3: rows [s2 s1 s0], [s3 s2 s1]
        let seed = [1, 0, 1, 1];
        assert_eq!(toeplitz_hash(&[1, 0, 0], &seed, 2).unwrap(), vec![1, 1]);
        assert_eq!(toeplitz_hash(&[0, 1, 0], &seed, 2).unwrap(), vec![0, 1]);
        assert_eq!(toeplitz_hash(&[0, 0, 1], &seed, 2).unwrap(), vec![1, 0]);
    }

    #[test]
    fn packed_matches_bitwise() {
        let mut rng = stream(7, Purpose::Hash, 0);
        for (n, m) in [(1, 1), (5, 3), (13, 7), (40, 20)] {
            let h = ToeplitzHash::random(n, m, &mut rng);
            for w in [0u64, 1, 0b1011, (1u64 << n) - 1, 0x5555_5555_5555 & ((1u64 << n) - 1)] {
                let bits: Vec<u8> = (0..n).map(|j| ((w >> j) & 1) as u8).collect();
                let out = h.hash(&bits).unwrap();
                let packed = h.hash_packed(w);
                for (i, &b) in out.iter().enumerate() {
                    assert_eq!(u64::from(b), (packed >> i) & 1);
                }
            }
        }
    }
}
