//! Average symbol and bit error probabilities.
//!
//! The conditional error probability of a symbol depends only on the
//! multiset of transmitter levels it uses, so both averages run over the
//! `C(M_S + w - 1, w)` non-decreasing level tuples. Each tuple needs one
//! numerical integral for the MPPM part; the OSSK and FSK parts are closed
//! form.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use libm::erfc;

use super::quadrature::{integrate, QuadOptions};
use crate::error::{Error, Result};
use crate::system::{amplitude_levels, binomial, bits_per_symbol, LinkBudget, SystemConfig};

/// Quadrature window half-width beyond the metric means, in noise standard
/// deviations.
const WINDOW_SIGMAS: f64 = 10.0;

/// Slack tolerated outside `[0, 1]` before a probability is treated as a
/// numerical failure.
const RANGE_SLACK: f64 = 1e-9;

fn clamp_probability(p: f64) -> Result<f64> {
    if (-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&p) {
        Ok(p.clamp(0.0, 1.0))
    } else {
        Err(Error::ProbabilityRange(p))
    }
}

/// Symbol error probability of the nearest-level OSSK decision for level `j`
/// (equally spaced PAM): edge levels have one neighbour, inner levels two.
pub fn pe_ossk(j: usize, cfg: &SystemConfig, lb: &LinkBudget) -> f64 {
    let ms = cfg.transmitters() as usize;
    if ms == 1 {
        return 0.0;
    }
    let gap = lb.slot_duration * lb.peak_current.powi(2) * cfg.span().powi(2)
        / (4.0 * lb.n0 * ((ms - 1) as f64).powi(2));
    let edge = 0.5 * erfc(gap.sqrt());
    if j == 0 || j == ms - 1 {
        edge
    } else {
        2.0 * edge
    }
}

/// Non-coherent orthogonal FSK symbol error probability at amplitude `h`,
/// with `E_s,FSK = T_s h^2 m^2 / 2`.
pub fn pe_fsk(h: f64, cfg: &SystemConfig, lb: &LinkBudget) -> f64 {
    let mf = cfg.frequencies();
    if mf == 1 {
        return 0.0;
    }
    let m = cfg.mod_index();
    let snr = lb.slot_duration * h * h * m * m / 2.0 / lb.n0;
    let sum: f64 = (1..mf)
        .map(|k| {
            let kf = k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign / (kf + 1.0) * binomial(mf - 1, k) as f64 * (-kf / (kf + 1.0) * snr).exp()
        })
        .sum();
    sum.clamp(0.0, 1.0)
}

struct MppmIntegrand {
    means: Vec<f64>,
    /// sqrt(N0)
    scale: f64,
    idle: i32,
}

impl MppmIntegrand {
    fn new(levels: &[f64], cfg: &SystemConfig, lb: &LinkBudget) -> Self {
        let st = lb.slot_duration.sqrt();
        MppmIntegrand {
            means: levels.iter().map(|h| st * h).collect(),
            scale: lb.n0.sqrt(),
            idle: (cfg.slots() - cfg.pulses()) as i32,
        }
    }

    fn window(&self) -> (f64, f64) {
        let sigma = self.scale / 2f64.sqrt();
        let top = self.means.iter().cloned().fold(0.0, f64::max);
        (-WINDOW_SIGMAS * sigma, top + WINDOW_SIGMAS * sigma)
    }

    /// Density of the smallest signal-slot metric at `x`.
    fn min_signal_density(&self, x: f64) -> f64 {
        let z: Vec<f64> = self.means.iter().map(|mu| (x - mu) / self.scale).collect();
        let tails: Vec<f64> = z.iter().map(|&zl| 0.5 * erfc(zl)).collect();
        let norm = 1.0 / (PI.sqrt() * self.scale);
        (0..z.len())
            .map(|n| {
                let others: f64 = tails
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| l != n)
                    .map(|(_, t)| t)
                    .product();
                norm * (-z[n] * z[n]).exp() * others
            })
            .sum()
    }

    /// Probability that every idle slot stays at or below `x`.
    fn idle_below(&self, x: f64) -> f64 {
        (0.5 * erfc(-x / self.scale)).powi(self.idle)
    }

    /// Probability that some idle slot exceeds `x`, without cancellation.
    fn idle_above(&self, x: f64) -> f64 {
        let tail = 0.5 * erfc(x / self.scale);
        -(self.idle as f64 * (-tail).ln_1p()).exp_m1()
    }
}

/// Probability that the `w` signal slots, received at `levels` (A), are
/// exactly the `w` largest matched-filter outputs.
pub fn pc_mppm(levels: &[f64], cfg: &SystemConfig, lb: &LinkBudget) -> Result<f64> {
    check_levels(levels, cfg)?;
    if cfg.pulses() == cfg.slots() {
        return Ok(1.0);
    }
    let f = MppmIntegrand::new(levels, cfg, lb);
    let (a, b) = f.window();
    let r = integrate(
        |x| f.min_signal_density(x) * f.idle_below(x),
        a,
        b,
        QuadOptions::default(),
    )?;
    clamp_probability(r.value)
}

/// Complement of [`pc_mppm`], integrated directly so that small error
/// probabilities keep full relative accuracy.
pub fn pe_mppm(levels: &[f64], cfg: &SystemConfig, lb: &LinkBudget) -> Result<f64> {
    check_levels(levels, cfg)?;
    if cfg.pulses() == cfg.slots() {
        return Ok(0.0);
    }
    let f = MppmIntegrand::new(levels, cfg, lb);
    let (a, b) = f.window();
    let r = integrate(
        |x| f.min_signal_density(x) * f.idle_above(x),
        a,
        b,
        QuadOptions {
            abs_tol: 1e-300,
            rel_tol: 1e-9,
            initial_pieces: 32,
            max_pieces: 8000,
        },
    )?;
    clamp_probability(r.value)
}

fn check_levels(levels: &[f64], cfg: &SystemConfig) -> Result<()> {
    if levels.len() != cfg.pulses() as usize {
        return Err(Error::LengthMismatch {
            expected: cfg.pulses() as usize,
            actual: levels.len(),
        });
    }
    if levels.iter().any(|&h| !h.is_finite() || h <= 0.0) {
        return Err(Error::OutOfRange("signal amplitudes must be positive".into()));
    }
    Ok(())
}

/// All non-decreasing `w`-tuples over `0..M_S`, in lexicographic order.
pub fn level_multisets(transmitters: u32, pulses: u32) -> Vec<Vec<usize>> {
    let ms = transmitters as usize;
    let w = pulses as usize;
    let mut out = Vec::new();
    let mut cur = vec![0usize; w];
    loop {
        out.push(cur.clone());
        // advance the rightmost position that can still grow
        let Some(pos) = (0..w).rev().find(|&p| cur[p] + 1 < ms) else {
            return out;
        };
        let next = cur[pos] + 1;
        for v in &mut cur[pos..] {
            *v = next;
        }
    }
}

/// Per-multiset intermediates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultisetTerm {
    pub levels: Vec<usize>,
    pub pc_mppm: f64,
    pub pe_mppm: f64,
    pub pc_ossk: f64,
    pub pc_fsk: f64,
    /// Conditional symbol error probability.
    pub pe: f64,
    /// Conditional bit error probability.
    pub pb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorProbabilityReport {
    pub pe: f64,
    pub pb: f64,
    pub terms: Vec<MultisetTerm>,
}

/// Average bits in error per FSK symbol error: `n_F 2^(n_F-1) / (2^n_F - 1)`.
fn fsk_bits_per_error(frequency_bits: u32) -> f64 {
    if frequency_bits == 0 {
        return 0.0;
    }
    let half = 2f64.powi(frequency_bits as i32 - 1);
    frequency_bits as f64 * half / (2.0 * half - 1.0)
}

/// Average bits in error after an MPPM error: `q 2^(q-1) / (2^q - 1)`.
fn mppm_bits_per_error(q_mppm: u32) -> f64 {
    fsk_bits_per_error(q_mppm)
}

/// Evaluates both averages, sharing the per-multiset integrals.
pub fn error_probabilities(cfg: &SystemConfig, lb: &LinkBudget) -> Result<ErrorProbabilityReport> {
    let amps = amplitude_levels(cfg, lb.peak_current)?;
    let budget = bits_per_symbol(cfg);
    let n = cfg.slots();
    let w = cfg.pulses();
    let ns = cfg.spatial_bits() as f64;
    let nf = cfg.frequency_bits() as f64;
    let q = budget.q_total as f64;

    let ossk: Vec<f64> = (0..amps.len()).map(|j| pe_ossk(j, cfg, lb)).collect();
    let fsk: Vec<f64> = amps.levels.iter().map(|&h| pe_fsk(h, cfg, lb)).collect();
    let c_fsk = fsk_bits_per_error(cfg.frequency_bits());
    let ne_mppm = mppm_bits_per_error(budget.q_mppm);

    // K_l weights: l signal slots missed, uniform over all wrong patterns
    let wrong = binomial(n, w) as f64 - 1.0;
    let k_weights: Vec<(f64, f64)> = (1..=w.min(n - w))
        .map(|l| {
            let k = binomial(w, l) as f64 * binomial(n - w, l) as f64 / wrong;
            (l as f64, k)
        })
        .collect();

    let terms = level_multisets(cfg.transmitters(), w)
        .into_par_iter()
        .map(|set| {
            let hs: Vec<f64> = set.iter().map(|&j| amps.get(j)).collect();
            let pe_m = pe_mppm(&hs, cfg, lb)?;
            let pc_m = pc_mppm(&hs, cfg, lb)?;
            let log_ossk: f64 = set.iter().map(|&j| (-ossk[j]).ln_1p()).sum();
            let log_fsk: f64 = set.iter().map(|&j| (-fsk[j]).ln_1p()).sum();
            let pe = -((-pe_m).ln_1p() + log_ossk + log_fsk).exp_m1();

            let slot_bits: f64 = set.iter().map(|&j| ossk[j] + c_fsk * fsk[j]).sum();
            let missed: f64 = k_weights
                .iter()
                .map(|&(l, k)| k * ((w as f64 - l) / w as f64 * slot_bits + (ns + nf) / 2.0 * l))
                .sum();
            let pb = ((1.0 - pe_m) * slot_bits + pe_m * (ne_mppm + missed)) / q;
            Ok(MultisetTerm {
                levels: set,
                pc_mppm: pc_m,
                pe_mppm: pe_m,
                pc_ossk: log_ossk.exp(),
                pc_fsk: log_fsk.exp(),
                pe: clamp_probability(pe)?,
                pb: clamp_probability(pb)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // fixed enumeration order keeps the sums reproducible
    let count = terms.len() as f64;
    let pe = terms.iter().map(|t| t.pe).sum::<f64>() / count;
    let pb = terms.iter().map(|t| t.pb).sum::<f64>() / count;
    Ok(ErrorProbabilityReport {
        pe: clamp_probability(pe)?,
        pb: clamp_probability(pb)?,
        terms,
    })
}

pub fn avg_symbol_error_prob(cfg: &SystemConfig, lb: &LinkBudget) -> Result<f64> {
    error_probabilities(cfg, lb).map(|r| r.pe)
}

pub fn avg_bit_error_prob(cfg: &SystemConfig, lb: &LinkBudget) -> Result<f64> {
    error_probabilities(cfg, lb).map(|r| r.pb)
}
