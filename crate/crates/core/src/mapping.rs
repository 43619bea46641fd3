//! Bit/index maps for the three symbol parts.
//!
//! MPPM patterns are ranked lexicographically on their ascending list of
//! active slots (combinadic ranking), so only the first `2^q_MPPM` ranks are
//! ever transmitted. OSSK indices use binary-reflected Gray code over the
//! amplitude order; FSK indices are natural binary.

use std::fmt;

use crate::error::{Error, Result};
use crate::system::{binomial, floor_log2};

/// Slot activation vector `d` of an MPPM symbol, stored as a bit mask with
/// bit `k` set when slot `k` carries a pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MppmPattern {
    slots: u32,
    mask: u64,
}

impl MppmPattern {
    pub fn from_mask(slots: u32, mask: u64) -> Result<Self> {
        if slots == 0 || slots > 64 || (slots < 64 && mask >> slots != 0) {
            return Err(Error::OutOfRange(format!(
                "mask {mask:#x} does not fit in {slots} slots"
            )));
        }
        Ok(MppmPattern { slots, mask })
    }

    /// Builds a pattern from active slot indices (any order, no duplicates).
    pub fn from_active(slots: u32, active: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &k in active {
            if k >= slots as usize || mask & (1 << k) != 0 {
                return Err(Error::OutOfRange(format!("bad active slot {k}")));
            }
            mask |= 1 << k;
        }
        MppmPattern::from_mask(slots, mask)
    }

    pub fn slots(&self) -> u32 {
        self.slots
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn weight(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn is_active(&self, k: usize) -> bool {
        self.mask >> k & 1 == 1
    }

    /// Active slots in ascending order.
    pub fn active(&self) -> Vec<usize> {
        (0..self.slots as usize).filter(|&k| self.is_active(k)).collect()
    }
}

impl fmt::Display for MppmPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.slots as usize {
            f.write_str(if self.is_active(k) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// `floor(log2(C(N, w)))`
pub fn mppm_bits(slots: u32, pulses: u32) -> u32 {
    floor_log2(binomial(slots, pulses))
}

/// Combinadic rank of a weight-`w` pattern among all `C(N, w)` patterns.
pub fn mppm_rank(pattern: &MppmPattern) -> u128 {
    let n = pattern.slots();
    let mut k = pattern.weight();
    let mut rank = 0u128;
    for x in 0..n {
        if k == 0 {
            break;
        }
        if pattern.is_active(x as usize) {
            k -= 1;
        } else {
            rank += binomial(n - 1 - x, k - 1);
        }
    }
    rank
}

/// Pattern of rank `value` in the expurgated set.
pub fn mppm_encode(value: u64, slots: u32, pulses: u32) -> Result<MppmPattern> {
    if pulses == 0 || pulses > slots || slots > 64 {
        return Err(Error::OutOfRange(format!("bad MPPM shape N={slots}, w={pulses}")));
    }
    let q = mppm_bits(slots, pulses);
    if (value as u128) >> q != 0 {
        return Err(Error::OutOfRange(format!(
            "MPPM value {value} needs more than {q} bits"
        )));
    }
    let mut rank = value as u128;
    let mut k = pulses;
    let mut mask = 0u64;
    for x in 0..slots {
        if k == 0 {
            break;
        }
        let here = binomial(slots - 1 - x, k - 1);
        if rank < here {
            mask |= 1 << x;
            k -= 1;
        } else {
            rank -= here;
        }
    }
    MppmPattern::from_mask(slots, mask)
}

/// Recovers the MPPM bits of a pattern. Patterns of legal weight that lie
/// outside the expurgated set fold back as `rank mod 2^q_MPPM`.
pub fn mppm_decode(pattern: &MppmPattern, pulses: u32) -> Result<u64> {
    if pattern.weight() != pulses {
        return Err(Error::OutOfRange(format!(
            "pattern {pattern} has weight {}, expected {pulses}",
            pattern.weight()
        )));
    }
    let q = mppm_bits(pattern.slots(), pulses);
    let rank = mppm_rank(pattern);
    Ok((rank & ((1u128 << q) - 1)) as u64)
}

fn check_width(value: u64, width: u32, what: &str) -> Result<()> {
    if width < 64 && value >> width != 0 {
        return Err(Error::OutOfRange(format!(
            "{what} value {value} exceeds {width} bits"
        )));
    }
    Ok(())
}

/// Transmitter index whose Gray label is `bits`.
pub fn ossk_encode(bits: u64, spatial_bits: u32) -> Result<usize> {
    check_width(bits, spatial_bits, "OSSK")?;
    let mut j = bits;
    let mut shift = bits >> 1;
    while shift != 0 {
        j ^= shift;
        shift >>= 1;
    }
    Ok(j as usize)
}

/// Gray label of transmitter index `j`.
pub fn ossk_decode(j: usize, spatial_bits: u32) -> Result<u64> {
    check_width(j as u64, spatial_bits, "OSSK index")?;
    Ok((j ^ (j >> 1)) as u64)
}

pub fn fsk_encode(bits: u64, frequency_bits: u32) -> Result<usize> {
    check_width(bits, frequency_bits, "FSK")?;
    Ok(bits as usize)
}

pub fn fsk_decode(i: usize, frequency_bits: u32) -> Result<u64> {
    check_width(i as u64, frequency_bits, "FSK index")?;
    Ok(i as u64)
}
