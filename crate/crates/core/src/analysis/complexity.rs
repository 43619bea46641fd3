//! Receiver operation counts and latency bounds.
//!
//! A dimension that is absent (a single transmitter or a single tone)
//! contributes no operations: its sort, its filters and its share of the
//! sampling bandwidth are all zero.

use serde::Serialize;

use crate::system::{bits_per_symbol, SystemConfig};

/// Latency in units of `T_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatencyBounds {
    /// Symbol duration, `N`.
    pub lower: u32,
    /// Filtering overlapped with reception, `N + 1`.
    pub parallel: u32,
    /// Filtering and decoding serialized, `2 N`.
    pub sequential: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub samples_per_slot: u64,
    pub matched_filter: u64,
    /// Heap selection of the `w` largest slots plus one table lookup.
    pub mppm_sort: u64,
    /// Tone correlators on the `w` selected slots.
    pub fsk_filters: u64,
    /// Tone correlators on all `N` slots (low-latency receiver).
    pub fsk_filters_low_latency: u64,
    pub fsk_sort: u64,
    pub ossk_sort: u64,
    /// `fsk_filters + fsk_sort`
    pub fsk_total: u64,
    pub ops_per_bit: f64,
    pub latency: LatencyBounds,
}

pub fn complexity_report(cfg: &SystemConfig) -> ComplexityReport {
    let n = cfg.slots() as u64;
    let w = cfg.pulses() as u64;
    let mf = if cfg.frequencies() == 1 { 0 } else { cfg.frequencies() as u64 };
    let ms = if cfg.transmitters() == 1 { 0 } else { cfg.transmitters() as u64 };
    let ns = 4 * (mf + 1);
    let ln_w = (w as f64).ln();

    let matched_filter = n * ns;
    let mppm_sort = (n as f64 * ln_w).ceil() as u64 + 1;
    let fsk_filters = 2 * mf * ns * w;
    let fsk_filters_low_latency = 2 * mf * ns * n;
    let fsk_sort = mf * w;
    let ossk_sort = ms * w;

    let q = bits_per_symbol(cfg).q_total as f64;
    let ops = matched_filter as f64
        + n as f64 * ln_w
        + fsk_filters_low_latency as f64
        + fsk_sort as f64
        + ossk_sort as f64;

    let n32 = cfg.slots();
    ComplexityReport {
        samples_per_slot: ns,
        matched_filter,
        mppm_sort,
        fsk_filters,
        fsk_filters_low_latency,
        fsk_sort,
        ossk_sort,
        fsk_total: fsk_filters + fsk_sort,
        ops_per_bit: ops / q,
        latency: LatencyBounds {
            lower: n32,
            parallel: n32 + 1,
            sequential: 2 * n32,
        },
    }
}
