//! Mixed-radix encoding of fixed-length symbol sequences.
//!
//! A length-`m` sequence over an alphabet of size `s` is stored at index
//!
//! ```text
//! idx = x_1 * s^(m-1) + x_2 * s^(m-2) + ... + x_m
//! ```
//!
//! i.e. the first position is the most significant digit. This makes the
//! block of all continuations of a fixed prefix contiguous, which the
//! conditional-law code exploits.

use crate::error::{Error, Result};

/// `s^m` as usize, or a size-guard error naming the offending exponent.
pub fn checked_table_len(what: &'static str, s: usize, m: usize, cap: usize) -> Result<usize> {
    let needed = (s as u128)
        .checked_pow(m as u32)
        .ok_or(Error::SizeGuardExceeded {
            what,
            base: s,
            exponent: m as u32,
            needed: u128::MAX,
            cap,
        })?;
    if needed > cap as u128 {
        return Err(Error::SizeGuardExceeded {
            what,
            base: s,
            exponent: m as u32,
            needed,
            cap,
        });
    }
    Ok(needed as usize)
}

/// Encode a sequence of symbol indices (first position most significant).
pub fn encode(s: usize, seq: &[usize]) -> usize {
    seq.iter().fold(0, |acc, &x| acc * s + x)
}

/// Decode `idx` into a length-`m` sequence of symbol indices.
pub fn decode(s: usize, m: usize, mut idx: usize) -> Vec<usize> {
    let mut out = vec![0usize; m];
    for slot in out.iter_mut().rev() {
        *slot = idx % s;
        idx /= s;
    }
    out
}

/// Iterator over all length-`m` sequences in index order.
///
/// Yields a shared scratch buffer via the callback to avoid one allocation
/// per sequence.
pub fn for_each(s: usize, m: usize, mut f: impl FnMut(usize, &[usize])) {
    let total = s.pow(m as u32);
    let mut seq = vec![0usize; m];
    for idx in 0..total {
        f(idx, &seq);
        // increment the mixed-radix counter (least significant digit last)
        for pos in (0..m).rev() {
            seq[pos] += 1;
            if seq[pos] < s {
                break;
            }
            seq[pos] = 0;
        }
    }
}
