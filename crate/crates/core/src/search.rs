//! Exhaustive codeword enumeration.
//!
//! Messages are visited as base-p integers with the first message symbol most
//! significant, so "smallest index" coincides with "lexicographically smallest
//! message". Binary codes of length up to 1024 use a packed Gray-code walk.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Upper bound on the number of codewords any brute-force routine will visit.
pub const MAX_ENUMERATION: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Best {
    pub message_index: u64,
    pub distance: u32,
}

pub(crate) fn codebook_size(p: u32, k: usize) -> Option<u64> {
    let mut total: u64 = 1;
    for _ in 0..k {
        total = total.checked_mul(p as u64)?;
        if total > MAX_ENUMERATION {
            return None;
        }
    }
    Some(total)
}

pub(crate) fn check_capacity(p: u32, k: usize) -> Result<u64> {
    codebook_size(p, k).ok_or_else(|| {
        Error::Capacity(format!(
            "{p}^{k} codewords exceeds the enumeration cap of {MAX_ENUMERATION}"
        ))
    })
}

/// Base-p digits of a message index, most significant first.
pub(crate) fn message_digits(p: u32, k: usize, mut index: u64) -> Vec<u32> {
    let mut digits = vec![0u32; k];
    for d in digits.iter_mut().rev() {
        *d = (index % p as u64) as u32;
        index /= p as u64;
    }
    digits
}

/// Closest codeword to `target` (minimum Hamming distance, smallest message
/// index on ties). With `skip_zero` the zero message is excluded, which turns
/// a search against the zero word into a minimum-weight search.
pub(crate) fn closest(g: &Matrix, target: &[u32], skip_zero: bool) -> Result<Best> {
    let p = g.field().modulus();
    let k = g.rows();
    let total = check_capacity(p, k)?;
    debug_assert_eq!(target.len(), g.cols());
    if skip_zero && total == 1 {
        return Err(Error::ZeroCode);
    }
    if p == 2 {
        let words = g.cols().div_ceil(64);
        match words {
            0 | 1 => return Ok(gray_binary::<1>(g, target, skip_zero)),
            2 => return Ok(gray_binary::<2>(g, target, skip_zero)),
            3 | 4 => return Ok(gray_binary::<4>(g, target, skip_zero)),
            5..=8 => return Ok(gray_binary::<8>(g, target, skip_zero)),
            9..=16 => return Ok(gray_binary::<16>(g, target, skip_zero)),
            _ => {}
        }
    }
    Ok(odometer(g, target, skip_zero, total))
}

fn pack<const W: usize>(bits: &[u32]) -> [u64; W] {
    let mut out = [0u64; W];
    for (i, &b) in bits.iter().enumerate() {
        if b & 1 == 1 {
            out[i / 64] |= 1 << (i % 64);
        }
    }
    out
}

#[inline]
fn xor_weight<const W: usize>(a: &[u64; W], b: &[u64; W]) -> u32 {
    let mut w = 0;
    for i in 0..W {
        w += (a[i] ^ b[i]).count_ones();
    }
    w
}

fn gray_binary<const W: usize>(g: &Matrix, target: &[u32], skip_zero: bool) -> Best {
    let k = g.rows();
    // Gray bit t toggles message symbol k-1-t.
    let rows: Vec<[u64; W]> = (0..k).map(|t| pack::<W>(g.row(k - 1 - t))).collect();
    let target = pack::<W>(target);
    let mut current = [0u64; W];
    let mut gray: u64 = 0;
    let mut best = Best {
        message_index: 0,
        distance: if skip_zero {
            u32::MAX
        } else {
            xor_weight(&current, &target)
        },
    };
    for step in 1u64..(1u64 << k) {
        let t = step.trailing_zeros() as usize;
        gray ^= 1 << t;
        let row = &rows[t];
        for i in 0..W {
            current[i] ^= row[i];
        }
        let d = xor_weight(&current, &target);
        if d < best.distance || (d == best.distance && gray < best.message_index) {
            best = Best {
                message_index: gray,
                distance: d,
            };
        }
    }
    best
}

fn odometer(g: &Matrix, target: &[u32], skip_zero: bool, total: u64) -> Best {
    let f = g.field();
    let p = f.modulus();
    let k = g.rows();
    let n = g.cols();
    let mut digits = vec![0u32; k];
    let mut current = vec![0u32; n];
    let hamming = |c: &[u32]| c.iter().zip(target).filter(|(a, b)| a != b).count() as u32;
    let mut best = Best {
        message_index: 0,
        distance: if skip_zero {
            u32::MAX
        } else {
            hamming(&current)
        },
    };
    for index in 1..total {
        let mut j = k - 1;
        loop {
            // Incrementing a digit adds its row once, including the p-1 -> 0
            // wrap because p * row = 0.
            for (c, &r) in current.iter_mut().zip(g.row(j)) {
                *c = f.add(*c, r);
            }
            digits[j] += 1;
            if digits[j] == p {
                digits[j] = 0;
                j -= 1;
            } else {
                break;
            }
        }
        let d = hamming(&current);
        if d < best.distance {
            best = Best {
                message_index: index,
                distance: d,
            };
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    fn brute(g: &Matrix, target: &[u32], skip_zero: bool) -> Best {
        let p = g.field().modulus();
        let total = (p as u64).pow(g.rows() as u32);
        let start = u64::from(skip_zero);
        let mut best: Option<Best> = None;
        for idx in start..total {
            let c = g.left_mul(&message_digits(p, g.rows(), idx)).unwrap();
            let d = c.iter().zip(target).filter(|(a, b)| a != b).count() as u32;
            if best.as_ref().is_none_or(|b| d < b.distance) {
                best = Some(Best {
                    message_index: idx,
                    distance: d,
                });
            }
        }
        best.unwrap()
    }

    #[test]
    fn packed_and_generic_paths_match_direct_enumeration() {
        let f2 = PrimeField::binary();
        let f3 = PrimeField::new(3).unwrap();
        let g2 = Matrix::from_rows(
            f2,
            &[
                vec![1, 0, 0, 0, 1, 1, 0],
                vec![0, 1, 0, 0, 1, 0, 1],
                vec![0, 0, 1, 0, 0, 1, 1],
                vec![0, 0, 0, 1, 1, 1, 1],
            ],
        )
        .unwrap();
        let g3 = Matrix::from_rows(f3, &[vec![1, 0, 2, 1], vec![0, 1, 1, 2]]).unwrap();
        for seed in 0..128u32 {
            let t2: Vec<u32> = (0..7).map(|i| (seed >> i) & 1).collect();
            for skip in [false, true] {
                assert_eq!(closest(&g2, &t2, skip).unwrap(), brute(&g2, &t2, skip));
            }
            let t3: Vec<u32> = (0..4).map(|i| (seed / 3u32.pow(i)) % 3).collect();
            for skip in [false, true] {
                assert_eq!(closest(&g3, &t3, skip).unwrap(), brute(&g3, &t3, skip));
            }
        }
    }

    #[test]
    fn capacity_guard() {
        assert!(codebook_size(2, 24).is_some());
        assert!(codebook_size(2, 25).is_none());
        assert!(codebook_size(65521, 2).is_none());
    }
}
