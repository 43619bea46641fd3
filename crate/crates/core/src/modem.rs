//! FH-SMPPM modulator, waveform synthesis, correlator bank and demodulator.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mapping::{
    fsk_decode, fsk_encode, mppm_decode, mppm_encode, ossk_decode, ossk_encode, MppmPattern,
};
use crate::system::{amplitude_levels, bits_per_symbol, AmplitudeSet, BitBudget, LinkBudget, SystemConfig};

/// Integer tone cycles per slot for each FSK index; adjacent tones are `1 / T_s`
/// apart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyPlan {
    pub cycles: Vec<u32>,
    /// Hz
    pub spacing: f64,
}

impl FrequencyPlan {
    /// `n_i = M_F + 2 + i`. The highest tone, `2 M_F + 1` cycles, stays below
    /// the `N_s / 2 = 2 M_F + 2` Nyquist limit, and every sum and difference
    /// of two tones is a nonzero cycle count below `N_s`.
    pub fn standard(cfg: &SystemConfig, lb: &LinkBudget) -> Self {
        let mf = cfg.frequencies();
        FrequencyPlan {
            cycles: (0..mf).map(|i| mf + 2 + i).collect(),
            spacing: 1.0 / lb.slot_duration,
        }
    }

    pub fn validate(&self, cfg: &SystemConfig, lb: &LinkBudget) -> Result<()> {
        if self.cycles.len() != cfg.frequencies() as usize {
            return Err(Error::LengthMismatch {
                expected: cfg.frequencies() as usize,
                actual: self.cycles.len(),
            });
        }
        if self.cycles.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidConfig("tone cycles must be strictly increasing".into()));
        }
        if self.cycles[0] < 2 {
            return Err(Error::InvalidConfig("tones need at least 2 cycles per slot".into()));
        }
        let ns = lb.samples_per_slot as u32;
        if 2 * self.cycles[self.cycles.len() - 1] >= ns {
            return Err(Error::InvalidConfig(format!(
                "highest tone violates Nyquist at {ns} samples per slot"
            )));
        }
        if (self.spacing * lb.slot_duration - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig("tone spacing must equal 1/T_s".into()));
        }
        Ok(())
    }
}

/// One transmitted FH-SMPPM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct FhSmppmSymbol {
    pub pattern: MppmPattern,
    /// Transmitter index per signal slot, ascending slot order.
    pub ossk: Vec<usize>,
    /// Tone index per signal slot, ascending slot order.
    pub fsk: Vec<usize>,
    /// Electrical-domain phase per signal slot, radians in `[0, 2 pi)`.
    pub phases: Vec<f64>,
    pub bits: Vec<u8>,
}

/// Real-valued samples covering one symbol (`N * N_s` entries).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    pub samples_per_slot: usize,
}

/// Receiver sufficient statistics for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricFrame {
    /// Matched-filter output per slot, A*sqrt(s).
    pub r: Vec<f64>,
    /// Tone energies, row-major `N x M_F`, A^2*s.
    pub x: Vec<f64>,
    /// The in-phase/quadrature pairs behind `x`, same layout.
    pub iq: Vec<(f64, f64)>,
    pub frequencies: usize,
}

impl MetricFrame {
    pub fn energy(&self, slot: usize, tone: usize) -> f64 {
        self.x[slot * self.frequencies + tone]
    }

    pub fn slot_energies(&self, slot: usize) -> &[f64] {
        &self.x[slot * self.frequencies..(slot + 1) * self.frequencies]
    }

    /// Recomputes `x` from `iq`.
    pub fn refresh_energies(&mut self) {
        self.x.clear();
        self.x.extend(self.iq.iter().map(|(i, q)| i * i + q * q));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    /// Detected signal slots, ascending.
    pub slots: Vec<usize>,
    pub ossk: Vec<usize>,
    pub fsk: Vec<usize>,
    pub mppm_value: u64,
    pub bits: Vec<u8>,
}

/// A configuration bound to an operating point: everything the modem and
/// channel need per symbol, precomputed once.
#[derive(Debug, Clone)]
pub struct Link {
    pub cfg: SystemConfig,
    pub budget: LinkBudget,
    pub bits: BitBudget,
    pub levels: AmplitudeSet,
    pub plan: FrequencyPlan,
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
}

impl Link {
    pub fn new(cfg: SystemConfig, budget: LinkBudget) -> Result<Self> {
        let plan = FrequencyPlan::standard(&cfg, &budget);
        Link::with_plan(cfg, budget, plan)
    }

    pub fn with_plan(cfg: SystemConfig, budget: LinkBudget, plan: FrequencyPlan) -> Result<Self> {
        if budget.samples_per_slot != cfg.samples_per_slot() {
            return Err(Error::InvalidConfig(
                "link budget sampling does not match the configuration".into(),
            ));
        }
        plan.validate(&cfg, &budget)?;
        let levels = amplitude_levels(&cfg, budget.peak_current)?;
        let ns = budget.samples_per_slot;
        let mut cos_table = Vec::with_capacity(plan.cycles.len() * ns);
        let mut sin_table = Vec::with_capacity(plan.cycles.len() * ns);
        for &n in &plan.cycles {
            for u in 0..ns {
                let phi = TAU * ((n as usize * u) % ns) as f64 / ns as f64;
                cos_table.push(phi.cos());
                sin_table.push(phi.sin());
            }
        }
        Ok(Link {
            cfg,
            bits: bits_per_symbol(&cfg),
            budget,
            levels,
            plan,
            cos_table,
            sin_table,
        })
    }

    pub fn samples_per_slot(&self) -> usize {
        self.budget.samples_per_slot
    }

    /// `sqrt(T_s) H_j`: noiseless matched-filter output for level `j`.
    pub fn level_metric(&self, j: usize) -> f64 {
        self.budget.slot_duration.sqrt() * self.levels.get(j)
    }

    /// `E_s,FSK(H) = T_s H^2 m^2 / 2`
    pub fn tone_energy(&self, amplitude: f64) -> f64 {
        let m = self.cfg.mod_index();
        self.budget.slot_duration * amplitude * amplitude * m * m / 2.0
    }

    /// Maps `q_F-S` bits onto a symbol. Field order is the MPPM value, then
    /// the OSSK label of every signal slot, then the FSK label of every
    /// signal slot; all fields MSB first.
    pub fn modulate<R: Rng + ?Sized>(&self, bits: &[u8], rng: &mut R) -> Result<FhSmppmSymbol> {
        let b = &self.bits;
        if bits.len() != b.q_total as usize {
            return Err(Error::LengthMismatch {
                expected: b.q_total as usize,
                actual: bits.len(),
            });
        }
        if bits.iter().any(|&x| x > 1) {
            return Err(Error::OutOfRange("bits must be 0 or 1".into()));
        }
        let w = self.cfg.pulses() as usize;
        let ns = self.cfg.spatial_bits() as usize;
        let nf = self.cfg.frequency_bits() as usize;
        let (mppm_bits, rest) = bits.split_at(b.q_mppm as usize);
        let (ossk_bits, fsk_bits) = rest.split_at(w * ns);

        let pattern = mppm_encode(pack(mppm_bits), self.cfg.slots(), self.cfg.pulses())?;
        let ossk = chunks(ossk_bits, ns, w)
            .map(|c| ossk_encode(pack(c), ns as u32))
            .collect::<Result<Vec<_>>>()?;
        let fsk = chunks(fsk_bits, nf, w)
            .map(|c| fsk_encode(pack(c), nf as u32))
            .collect::<Result<Vec<_>>>()?;
        let phases = (0..w).map(|_| rng.random_range(0.0..TAU)).collect();
        Ok(FhSmppmSymbol {
            pattern,
            ossk,
            fsk,
            phases,
            bits: bits.to_vec(),
        })
    }

    /// Samples `H_j (1 + m cos(2 pi n_i u / N_s + theta))` in signal slots and
    /// zeros elsewhere.
    pub fn synthesize_waveform(&self, sym: &FhSmppmSymbol) -> SampleBuffer {
        let ns = self.samples_per_slot();
        let n = self.cfg.slots() as usize;
        let m = self.cfg.mod_index();
        let mut samples = vec![0.0; n * ns];
        for (idx, k) in sym.pattern.active().into_iter().enumerate() {
            let h = self.levels.get(sym.ossk[idx]);
            let cycles = self.plan.cycles[sym.fsk[idx]] as f64;
            let theta = sym.phases[idx];
            for (u, s) in samples[k * ns..(k + 1) * ns].iter_mut().enumerate() {
                *s = h * (1.0 + m * (2.0 * PI * cycles * u as f64 / ns as f64 + theta).cos());
            }
        }
        SampleBuffer {
            samples,
            sample_rate: self.budget.sample_rate,
            samples_per_slot: ns,
        }
    }

    /// Discrete correlator bank: every integral over a slot becomes
    /// `(T_s / N_s) * sum`.
    pub fn metrics_from_waveform(&self, buf: &SampleBuffer) -> Result<MetricFrame> {
        let ns = self.samples_per_slot();
        let n = self.cfg.slots() as usize;
        let mf = self.cfg.frequencies() as usize;
        if buf.samples.len() != n * ns || buf.samples_per_slot != ns {
            return Err(Error::LengthMismatch {
                expected: n * ns,
                actual: buf.samples.len(),
            });
        }
        let ts = self.budget.slot_duration;
        let dc_gain = ts.sqrt() / ns as f64;
        let tone_gain = (2.0 * ts).sqrt() / ns as f64;
        let mut r = Vec::with_capacity(n);
        let mut iq = Vec::with_capacity(n * mf);
        for slot in buf.samples.chunks_exact(ns) {
            r.push(dc_gain * slot.iter().sum::<f64>());
            for i in 0..mf {
                let c = &self.cos_table[i * ns..(i + 1) * ns];
                let s = &self.sin_table[i * ns..(i + 1) * ns];
                let mut acc_i = 0.0;
                let mut acc_q = 0.0;
                for u in 0..ns {
                    acc_i += slot[u] * c[u];
                    acc_q += slot[u] * s[u];
                }
                iq.push((tone_gain * acc_i, tone_gain * acc_q));
            }
        }
        let mut frame = MetricFrame {
            r,
            x: Vec::new(),
            iq,
            frequencies: mf,
        };
        frame.refresh_energies();
        Ok(frame)
    }

    /// Closed-form noiseless metrics of a symbol.
    pub fn expected_metrics(&self, sym: &FhSmppmSymbol) -> MetricFrame {
        let n = self.cfg.slots() as usize;
        let mf = self.cfg.frequencies() as usize;
        let mut r = vec![0.0; n];
        let mut iq = vec![(0.0, 0.0); n * mf];
        for (idx, k) in sym.pattern.active().into_iter().enumerate() {
            let j = sym.ossk[idx];
            r[k] = self.level_metric(j);
            let amp = self.tone_energy(self.levels.get(j)).sqrt();
            let theta = sym.phases[idx];
            iq[k * mf + sym.fsk[idx]] = (amp * theta.cos(), -amp * theta.sin());
        }
        let mut frame = MetricFrame {
            r,
            x: Vec::new(),
            iq,
            frequencies: mf,
        };
        frame.refresh_energies();
        frame
    }

    /// Top-w slot selection, then nearest-level OSSK and max-energy FSK
    /// decisions per selected slot. All ties go to the lowest index.
    pub fn demodulate(&self, frame: &MetricFrame) -> Result<Decision> {
        let n = self.cfg.slots() as usize;
        let w = self.cfg.pulses() as usize;
        let mf = self.cfg.frequencies() as usize;
        if frame.r.len() != n || frame.x.len() != n * mf || frame.frequencies != mf {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: frame.r.len(),
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| frame.r[b].total_cmp(&frame.r[a]).then(a.cmp(&b)));
        let mut slots = order[..w].to_vec();
        slots.sort_unstable();

        let ossk: Vec<usize> = slots
            .iter()
            .map(|&k| {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for j in 0..self.levels.len() {
                    let d = (frame.r[k] - self.level_metric(j)).abs();
                    if d < best_d {
                        best_d = d;
                        best = j;
                    }
                }
                best
            })
            .collect();
        let fsk: Vec<usize> = slots
            .iter()
            .map(|&k| {
                let e = frame.slot_energies(k);
                let mut best = 0;
                for i in 1..mf {
                    if e[i] > e[best] {
                        best = i;
                    }
                }
                best
            })
            .collect();

        let pattern = MppmPattern::from_active(self.cfg.slots(), &slots)?;
        let mppm_value = mppm_decode(&pattern, self.cfg.pulses())?;
        let ns = self.cfg.spatial_bits();
        let nf = self.cfg.frequency_bits();
        let mut bits = Vec::with_capacity(self.bits.q_total as usize);
        unpack(mppm_value, self.bits.q_mppm, &mut bits);
        for &j in &ossk {
            unpack(ossk_decode(j, ns)?, ns, &mut bits);
        }
        for &i in &fsk {
            unpack(fsk_decode(i, nf)?, nf, &mut bits);
        }
        Ok(Decision {
            slots,
            ossk,
            fsk,
            mppm_value,
            bits,
        })
    }
}

fn chunks(bits: &[u8], width: usize, count: usize) -> impl Iterator<Item = &[u8]> {
    (0..count).map(move |c| &bits[c * width..(c + 1) * width])
}

/// MSB-first bits to integer.
pub fn pack(bits: &[u8]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| acc << 1 | b as u64)
}

/// Appends the low `width` bits of `value`, MSB first.
pub fn unpack(value: u64, width: u32, out: &mut Vec<u8>) {
    for s in (0..width).rev() {
        out.push((value >> s & 1) as u8);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{link_budget, PhysicalNoiseParams};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn link(n: u32, w: u32, ms: u32, mf: u32, m: f64, lm: f64) -> Link {
        let cfg = SystemConfig::new(n, w, ms, mf, m, lm).unwrap();
        let lb = link_budget(&cfg, &PhysicalNoiseParams::default(), 1e-5, 1e8).unwrap();
        Link::new(cfg, lb).unwrap()
    }

    fn word(value: u64, len: u32) -> Vec<u8> {
        let mut v = Vec::new();
        unpack(value, len, &mut v);
        v
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn standard_plan_is_valid() {
        for mf in [1, 2, 4, 8, 16, 32] {
            let l = link(8, 4, 4, mf, 0.9, 0.7);
            assert_eq!(l.plan.cycles.len(), mf as usize);
            assert!(*l.plan.cycles.iter().max().unwrap() < (l.samples_per_slot() / 2) as u32);
        }
        let l = link(8, 4, 4, 4, 0.9, 0.7);
        let mut bad = l.plan.clone();
        bad.cycles = vec![3, 5, 7, 10];
        assert!(Link::with_plan(l.cfg, l.budget, bad).is_err());
    }

    #[test]
    fn all_zero_word() {
        let l = link(4, 2, 2, 2, 0.9, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sym = l.modulate(&[0; 6], &mut rng).unwrap();
        assert_eq!(sym.pattern.to_string(), "1100");
        assert_eq!(sym.ossk, vec![0, 0]);
        assert_eq!(sym.fsk, vec![0, 0]);
        assert!(sym.phases.iter().all(|&p| (0.0..TAU).contains(&p)));
        assert!(l.modulate(&[0; 5], &mut rng).is_err());
    }

    #[test]
    fn full_weight_ignores_nothing() {
        let l = link(4, 4, 2, 2, 0.9, 0.5);
        assert_eq!(l.bits.q_mppm, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sym = l.modulate(&[1; 8], &mut rng).unwrap();
        assert_eq!(sym.pattern.to_string(), "1111");
    }

    #[test]
    fn exhaustive_noiseless_round_trip_metric_and_waveform() {
        let l = link(4, 2, 2, 2, 0.9, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for v in 0..64u64 {
            let bits = word(v, 6);
            let sym = l.modulate(&bits, &mut rng).unwrap();
            let d = l.demodulate(&l.expected_metrics(&sym)).unwrap();
            assert_eq!(d.bits, bits);
            let frame = l.metrics_from_waveform(&l.synthesize_waveform(&sym)).unwrap();
            assert_eq!(l.demodulate(&frame).unwrap().bits, bits);
        }
    }

    #[test]
    fn waveform_slot_properties() {
        let l = link(8, 4, 4, 4, 0.9, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bits = word(0b10_1101_1011_0010_1001_1101, 22);
        let sym = l.modulate(&bits, &mut rng).unwrap();
        let buf = l.synthesize_waveform(&sym);
        let ns = l.samples_per_slot();
        assert_eq!(buf.samples.len(), 8 * ns);
        assert!(buf.samples.iter().all(|&s| s >= 0.0));
        let active = sym.pattern.active();
        for k in 0..8 {
            let slot = &buf.samples[k * ns..(k + 1) * ns];
            match active.iter().position(|&a| a == k) {
                None => assert!(slot.iter().all(|&s| s == 0.0)),
                Some(idx) => {
                    let mean = slot.iter().sum::<f64>() / ns as f64;
                    assert!(rel(mean, l.levels.get(sym.ossk[idx])) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn flat_slots_without_subcarrier() {
        let l = link(8, 4, 16, 1, 0.9, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sym = l.modulate(&word(0x2a_5a5a, 22), &mut rng).unwrap();
        let buf = l.synthesize_waveform(&sym);
        let ns = l.samples_per_slot();
        for (idx, k) in sym.pattern.active().into_iter().enumerate() {
            let h = l.levels.get(sym.ossk[idx]);
            assert!(buf.samples[k * ns..(k + 1) * ns].iter().all(|&s| s == h));
        }
    }

    #[test]
    fn correlators_match_closed_form() {
        let l = link(8, 4, 4, 4, 0.9, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let bits: Vec<u8> = (0..22).map(|_| rng.random_range(0..2)).collect();
            let sym = l.modulate(&bits, &mut rng).unwrap();
            let got = l.metrics_from_waveform(&l.synthesize_waveform(&sym)).unwrap();
            let want = l.expected_metrics(&sym);
            let r_scale = l.level_metric(0);
            let x_scale = l.tone_energy(l.levels.get(0));
            for k in 0..8 {
                if want.r[k] == 0.0 {
                    assert!(got.r[k].abs() < 1e-12 * r_scale);
                } else {
                    assert!(rel(got.r[k], want.r[k]) < 1e-9);
                }
                for i in 0..4 {
                    let (g, w) = (got.energy(k, i), want.energy(k, i));
                    if w == 0.0 {
                        assert!(g.abs() < 1e-12 * x_scale);
                    } else {
                        assert!(rel(g, w) < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn tone_energy_example() {
        let l = link(8, 4, 1, 4, 0.9, 0.0);
        // I_m = 1 A scaled version: E = T_s * 0.405 * I_m^2
        let ts = l.budget.slot_duration;
        let im = l.budget.peak_current;
        assert!(rel(l.tone_energy(im), ts * 0.405 * im * im) < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sym = l.modulate(&word(0x12345, 14), &mut rng).unwrap();
        let frame = l.metrics_from_waveform(&l.synthesize_waveform(&sym)).unwrap();
        let k = sym.pattern.active()[0];
        assert!(rel(frame.energy(k, sym.fsk[0]), ts * 0.405 * im * im) < 1e-9);
    }

    #[test]
    fn order_statistics_and_nearest_level() {
        let l = link(4, 2, 2, 2, 0.9, 0.5);
        let st = l.budget.slot_duration.sqrt();
        let im = l.budget.peak_current;
        let frame = MetricFrame {
            r: vec![3.0 * st * im, st * im, 0.0, 0.0],
            x: vec![0.0; 8],
            iq: vec![(0.0, 0.0); 8],
            frequencies: 2,
        };
        assert_eq!(l.demodulate(&frame).unwrap().slots, vec![0, 1]);

        let frame = MetricFrame {
            r: vec![0.76 * st * im, 0.74 * st * im, 0.0, 0.0],
            ..frame
        };
        let d = l.demodulate(&frame).unwrap();
        assert_eq!(d.ossk, vec![0, 1]);
    }

    #[test]
    fn ties_go_low() {
        let l = link(4, 2, 2, 2, 0.9, 0.5);
        let frame = MetricFrame {
            r: vec![1.0; 4],
            x: vec![1.0; 8],
            iq: vec![(1.0, 0.0); 8],
            frequencies: 2,
        };
        let d = l.demodulate(&frame).unwrap();
        assert_eq!(d.slots, vec![0, 1]);
        assert_eq!(d.fsk, vec![0, 0]);
    }

    #[test]
    fn randomized_round_trip_large() {
        let l = link(8, 4, 4, 4, 0.9, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10_000 {
            let bits: Vec<u8> = (0..22).map(|_| rng.random_range(0..2)).collect();
            let sym = l.modulate(&bits, &mut rng).unwrap();
            let frame = l.metrics_from_waveform(&l.synthesize_waveform(&sym)).unwrap();
            assert_eq!(l.demodulate(&frame).unwrap().bits, bits);
        }
    }

    proptest! {
        #[test]
        fn scale_and_phase_invariance(v in 0u64..1 << 22, c in 0.01f64..100.0, seed: u64) {
            let l = link(8, 4, 4, 4, 0.9, 0.7);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bits = word(v, 22);
            let sym = l.modulate(&bits, &mut rng).unwrap();
            let buf = l.synthesize_waveform(&sym);
            let base = l.metrics_from_waveform(&buf).unwrap();
            let mut scaled = buf.clone();
            scaled.samples.iter_mut().for_each(|s| *s *= c);
            let f = l.metrics_from_waveform(&scaled).unwrap();
            for k in 0..8 {
                prop_assert!((f.r[k] - c * base.r[k]).abs() <= 1e-9 * c * l.level_metric(0));
            }
            for (a, b) in f.x.iter().zip(&base.x) {
                prop_assert!((a - c * c * b).abs() <= 1e-9 * c * c * l.tone_energy(l.levels.get(0)));
            }

            // rotate phases: sent-tone energy and every decision unchanged
            let mut turned = sym.clone();
            turned.phases.iter_mut().for_each(|p| *p = (*p + 1.234) % TAU);
            let g = l.metrics_from_waveform(&l.synthesize_waveform(&turned)).unwrap();
            for (idx, k) in sym.pattern.active().into_iter().enumerate() {
                let i = sym.fsk[idx];
                prop_assert!(rel(g.energy(k, i), base.energy(k, i)) < 1e-9);
            }
            prop_assert_eq!(&l.demodulate(&g).unwrap().bits, &bits);
        }
    }
}
