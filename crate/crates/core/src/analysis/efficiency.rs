//! Spectral and asymptotic power efficiency.

use num_bigint::BigUint;
use serde::Serialize;
use libm::lgamma as ln_gamma;

use crate::system::{bits_per_symbol, LinkBudget, SystemConfig};

/// Bits per hertz: `q_F-S / (N (M_F + 1))`, the occupied bandwidth being
/// `(M_F + 1) / T_s`.
pub fn spectral_efficiency(cfg: &SystemConfig) -> f64 {
    let q = bits_per_symbol(cfg).q_total as f64;
    q / (cfg.slots() as f64 * (cfg.frequencies() as f64 + 1.0))
}

/// Normalized power-efficiency figures. Distances and energies are expressed
/// in units of `T_s I_m^2`, so none of them depend on the operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerEfficiency {
    pub eta: f64,
    /// `d_min^2 / (T_s I_m^2)`
    pub d_min_sq_norm: f64,
    /// `E_s / (T_s I_m^2)`
    pub symbol_energy_norm: f64,
}

/// `E[H_j^2] / I_m^2 = 1 - L_m + L_m^2 (1/3 + 1/(6 (M_S - 1)))`.
fn mean_square_level(transmitters: u32, span: f64) -> f64 {
    if transmitters == 1 {
        return 1.0;
    }
    1.0 + span * span * (1.0 / 3.0 + 1.0 / (6.0 * (transmitters as f64 - 1.0))) - span
}

/// `d_min^2 / (T_s I_m^2)`: the smaller of one-level OSSK and one-tone FSK
/// separations. With neither dimension present it is the distance of moving a
/// single pulse, `2`.
fn min_distance_norm(transmitters: u32, frequencies: u32, mod_index: f64, span: f64) -> f64 {
    let mut d = f64::INFINITY;
    if transmitters > 1 {
        d = d.min((span / (transmitters as f64 - 1.0)).powi(2));
    }
    if frequencies > 1 {
        d = d.min((1.0 - span).powi(2) * mod_index * mod_index);
    }
    if d.is_infinite() {
        2.0
    } else {
        d
    }
}

fn power_efficiency_raw(
    pulses: u32,
    transmitters: u32,
    frequencies: u32,
    mod_index: f64,
    span: f64,
    q_total: f64,
) -> PowerEfficiency {
    let d = min_distance_norm(transmitters, frequencies, mod_index, span);
    let e = pulses as f64
        * mean_square_level(transmitters, span)
        * (1.0 + mod_index * mod_index / 2.0);
    PowerEfficiency {
        eta: d * q_total / (4.0 * e),
        d_min_sq_norm: d,
        symbol_energy_norm: e,
    }
}

pub fn power_efficiency(cfg: &SystemConfig) -> PowerEfficiency {
    power_efficiency_raw(
        cfg.pulses(),
        cfg.transmitters(),
        cfg.frequencies(),
        cfg.mod_index(),
        cfg.span(),
        bits_per_symbol(cfg).q_total as f64,
    )
}

/// Efficiency figures in physical units at an operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub rho: f64,
    pub eta: f64,
    /// A^2 s
    pub d_min_sq: f64,
    /// A^2 s
    pub symbol_energy: f64,
    /// Hz
    pub bandwidth: f64,
}

pub fn efficiency_report(cfg: &SystemConfig, lb: &LinkBudget) -> EfficiencyReport {
    let p = power_efficiency(cfg);
    let unit = lb.slot_duration * lb.peak_current * lb.peak_current;
    EfficiencyReport {
        rho: spectral_efficiency(cfg),
        eta: p.eta,
        d_min_sq: p.d_min_sq_norm * unit,
        symbol_energy: p.symbol_energy_norm * unit,
        bandwidth: (cfg.frequencies() as f64 + 1.0) / lb.slot_duration,
    }
}

fn exact_binomial(n: u32, k: u32) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `floor(log2(C(n, k)))` for large `n`, via log-gamma. When the estimate
/// lies within rounding distance of an integer the floor is settled with an
/// exact big-integer comparison.
pub fn log2_binomial_floor(n: u32, k: u32) -> u32 {
    assert!(k <= n, "k must not exceed n");
    if k == 0 || k == n {
        return 0;
    }
    let ln_c = ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0);
    let est = ln_c / std::f64::consts::LN_2;
    let nearest = est.round();
    if (est - nearest).abs() > 1e-8 {
        return est.floor().max(0.0) as u32;
    }
    let c = exact_binomial(n, k);
    (c.bits() - 1) as u32
}

/// One point of a large-N efficiency sweep (no simulation limits on `n`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub slots: u32,
    pub pulses: u32,
    pub q_total: u32,
    pub rho: f64,
    pub eta: f64,
}

impl SweepPoint {
    /// `-10 log10(eta)`, the abscissa of the efficiency plane.
    pub fn inverse_eta_db(&self) -> f64 {
        -10.0 * self.eta.log10()
    }
}

/// `(rho, eta)` for every `1 <= w <= N <= max_slots` with the remaining
/// parameters fixed. The caller guarantees powers of two for the counts.
pub fn efficiency_sweep(
    max_slots: u32,
    transmitters: u32,
    frequencies: u32,
    mod_index: f64,
    span: f64,
) -> Vec<SweepPoint> {
    let n_s = transmitters.trailing_zeros();
    let n_f = frequencies.trailing_zeros();
    let mut out = Vec::new();
    for n in 1..=max_slots {
        for w in 1..=n {
            let q = w * (n_s + n_f) + log2_binomial_floor(n, w);
            let pe = power_efficiency_raw(w, transmitters, frequencies, mod_index, span, q as f64);
            out.push(SweepPoint {
                slots: n,
                pulses: w,
                q_total: q,
                rho: q as f64 / (n as f64 * (frequencies as f64 + 1.0)),
                eta: pe.eta,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{binomial, floor_log2};
    use proptest::prelude::*;

    fn cfg(ms: u32, mf: u32, m: f64, lm: f64) -> SystemConfig {
        SystemConfig::new(8, 4, ms, mf, m, lm).unwrap()
    }

    fn round3(x: f64) -> f64 {
        (x * 1000.0).round() / 1000.0
    }

    #[test]
    fn spectral_examples() {
        assert!((spectral_efficiency(&cfg(4, 4, 0.9, 0.7)) - 0.55).abs() < 1e-12);
        assert!((spectral_efficiency(&cfg(16, 1, 0.0, 0.7)) - 1.375).abs() < 1e-12);
        assert!((spectral_efficiency(&cfg(1, 16, 0.9, 0.0)) - 22.0 / 136.0).abs() < 1e-12);
    }

    #[test]
    fn power_examples() {
        assert_eq!(round3(power_efficiency(&cfg(4, 4, 0.5, 0.7)).eta), 0.056);
        assert_eq!(round3(power_efficiency(&cfg(4, 4, 0.9, 0.7)).eta), 0.109);
        assert_eq!(round3(power_efficiency(&cfg(16, 1, 0.9, 0.7)).eta), 0.006);
        assert_eq!(round3(power_efficiency(&cfg(1, 16, 0.5, 0.7)).eta), 0.306);
        let e = power_efficiency(&cfg(1, 16, 0.9, 0.0)).eta;
        let m2: f64 = 0.81;
        assert!((e - m2 * 22.0 / (16.0 * (1.0 + m2 / 2.0))).abs() < 1e-12);
        assert_eq!(round3(e), 0.793);
    }

    #[test]
    fn mean_square_level_matches_direct_average() {
        for ms in [2u32, 4, 8, 16, 32] {
            for lm in [0.1, 0.3, 0.7, 0.9] {
                let direct: f64 = (0..ms)
                    .map(|j| (1.0 - lm * j as f64 / (ms - 1) as f64).powi(2))
                    .sum::<f64>()
                    / ms as f64;
                assert!((mean_square_level(ms, lm) - direct).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mppm_only_point() {
        let c = SystemConfig::new(8, 4, 1, 1, 0.0, 0.0).unwrap();
        let p = power_efficiency(&c);
        assert_eq!(p.d_min_sq_norm, 2.0);
        assert!((p.eta - 2.0 * 6.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn log_gamma_floor_matches_exact() {
        for n in 1..=64u32 {
            for k in 0..=n {
                assert_eq!(log2_binomial_floor(n, k), floor_log2(binomial(n, k)), "C({n},{k})");
            }
        }
        // powers of two sit exactly on the boundary
        assert_eq!(log2_binomial_floor(512, 1), 9);
        assert_eq!(log2_binomial_floor(256, 255), 8);
    }

    #[test]
    fn sweep_shape() {
        let pts = efficiency_sweep(16, 4, 4, 0.9, 0.7);
        assert_eq!(pts.len(), 16 * 17 / 2);
        let p = pts.iter().find(|p| p.slots == 8 && p.pulses == 4).unwrap();
        assert_eq!(p.q_total, 22);
        assert!((p.rho - 0.55).abs() < 1e-12);
        assert!((p.eta - power_efficiency(&cfg(4, 4, 0.9, 0.7)).eta).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn eta_free_of_operating_point(ms_exp in 1u32..5, mf_exp in 1u32..5, m in 0.05f64..1.0, lm in 0.05f64..0.95, scale in 1e-6f64..1e3) {
            let c = SystemConfig::new(8, 4, 1 << ms_exp, 1 << mf_exp, m, lm).unwrap();
            let lb = LinkBudget {
                slot_duration: 27.5e-9 * scale,
                peak_current: 1e-5 * scale,
                n0: 1e-21,
                idc: 0.0,
                iph: 0.0,
                popt: 0.0,
                rate: 1.0,
                sample_rate: 1.0,
                samples_per_slot: 4,
            };
            let r = efficiency_report(&c, &lb);
            prop_assert!((r.eta - power_efficiency(&c).eta).abs() < 1e-15);
            prop_assert!(r.d_min_sq <= 4.0 * r.symbol_energy);
            prop_assert!(r.eta >= 0.0 && r.rho >= 0.0);
        }
    }
}
