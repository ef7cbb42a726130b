//! Toeplitz hashing for privacy amplification.

use crate::error::{Error, Result};

/// Widest supported secret, in bits.
pub const MAX_SECRET_BITS: usize = 64;

/// Bits used to write one symbol of an alphabet of size `levels`.
pub fn bits_per_symbol(levels: usize) -> usize {
    (usize::BITS - (levels.max(2) - 1).leading_zeros()) as usize
}

/// Expands symbols into little-endian bit groups of `width` bits each.
pub fn symbols_to_bits(symbols: &[u8], width: usize) -> Vec<bool> {
    symbols
        .iter()
        .flat_map(|&s| (0..width).map(move |b| (s >> b) & 1 == 1))
        .collect()
}

/// Seed length `m + k − 1` for an `m`-bit input and `k`-bit output (0 when `k = 0`).
pub fn seed_length(m: usize, k: usize) -> usize {
    if k == 0 {
        0
    } else {
        m + k - 1
    }
}

/// `k`-bit Toeplitz hash of `input`; bit `i` of the result is
/// `⊕_j seed[i + m − 1 − j] · input[j]`.
pub fn toeplitz_hash(input: &[bool], seed: &[bool], k: usize) -> Result<u64> {
    let m = input.len();
    if k > m || k > MAX_SECRET_BITS {
        return Err(Error::KTooLarge {
            k,
            available: m.min(MAX_SECRET_BITS),
        });
    }
    if seed.len() != seed_length(m, k) {
        return Err(Error::InvalidConfig(format!(
            "hash seed has {} bits, expected {}",
            seed.len(),
            seed_length(m, k)
        )));
    }
    let mut out = 0u64;
    for i in 0..k {
        let bit = input
            .iter()
            .enumerate()
            .filter(|(_, &x)| x)
            .fold(false, |acc, (j, _)| acc ^ seed[i + m - 1 - j]);
        out |= (bit as u64) << i;
    }
    Ok(out)
}

/// Bits of `value`, least significant first.
pub fn u64_bits(value: u64, len: usize) -> Vec<bool> {
    (0..len).map(|b| b < 64 && (value >> b) & 1 == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_input_hashes_to_zero() {
        let seed = [true; 8];
        assert_eq!(toeplitz_hash(&[false; 8], &seed[..8], 1).unwrap(), 0);
    }

    #[test]
    fn linear_in_input() {
        let seed = u64_bits(0b1011_0110_1101, 11);
        let a = u64_bits(0b1001_0110, 8);
        let b = u64_bits(0b0111_0011, 8);
        let xor: Vec<bool> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let ha = toeplitz_hash(&a, &seed, 4).unwrap();
        let hb = toeplitz_hash(&b, &seed, 4).unwrap();
        assert_eq!(toeplitz_hash(&xor, &seed, 4).unwrap(), ha ^ hb);
    }

    #[test]
    fn matrix_entries() {
        // m = 2, k = 2: T = [[s1, s0], [s2, s1]].
        let seed = vec![true, false, false];
        assert_eq!(toeplitz_hash(&[true, false], &seed, 2).unwrap(), 0b00);
        assert_eq!(toeplitz_hash(&[false, true], &seed, 2).unwrap(), 0b01);
    }

    #[test]
    fn sizes() {
        assert_eq!(bits_per_symbol(2), 1);
        assert_eq!(bits_per_symbol(3), 2);
        assert_eq!(bits_per_symbol(4), 2);
        assert_eq!(bits_per_symbol(5), 3);
        assert_eq!(seed_length(8, 0), 0);
        assert_eq!(seed_length(8, 2), 9);
        assert_eq!(toeplitz_hash(&[true; 4], &[], 0).unwrap(), 0);
        assert!(matches!(
            toeplitz_hash(&[true; 2], &[true; 4], 3),
            Err(Error::KTooLarge { .. })
        ));
        assert_eq!(symbols_to_bits(&[2, 1], 2), vec![false, true, true, false]);
    }
}
