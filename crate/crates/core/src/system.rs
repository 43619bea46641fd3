//! Waveform configuration, bit budget, amplitude ladder and physical link budget.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest slot count accepted for simulation configurations. Binomials up to
/// `C(64, 32)` fit comfortably in 128-bit integers.
pub const MAX_SLOTS: u32 = 64;

/// Boltzmann constant (J/K), exact SI value.
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Elementary charge (C), exact SI value.
pub const ELECTRON_CHARGE: f64 = 1.602176634e-19;

/// Shape of the FH-SMPPM waveform.
///
/// `slots` (N) time slots per symbol, `pulses` (w) of them carrying light,
/// `transmitters` (M_S) OSSK amplitude levels and `frequencies` (M_F) FSK
/// tones. A single transmitter or a single tone are the degenerate I-TFH and
/// SMPPM configurations; validation zeroes the span or the modulation index
/// for them so every downstream formula reduces without special cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystemConfig", into = "RawSystemConfig")]
pub struct SystemConfig {
    slots: u32,
    pulses: u32,
    transmitters: u32,
    frequencies: u32,
    mod_index: f64,
    span: f64,
}

/// Unvalidated wire form of [`SystemConfig`], keyed by the conventional symbols.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSystemConfig {
    #[serde(rename = "N")]
    pub n: u32,
    pub w: u32,
    #[serde(rename = "M_S")]
    pub m_s: u32,
    #[serde(rename = "M_F")]
    pub m_f: u32,
    #[serde(default)]
    pub m: f64,
    #[serde(rename = "L_m", default)]
    pub l_m: f64,
}

impl TryFrom<RawSystemConfig> for SystemConfig {
    type Error = Error;

    fn try_from(raw: RawSystemConfig) -> Result<Self> {
        SystemConfig::new(raw.n, raw.w, raw.m_s, raw.m_f, raw.m, raw.l_m)
    }
}

impl From<SystemConfig> for RawSystemConfig {
    fn from(cfg: SystemConfig) -> Self {
        RawSystemConfig {
            n: cfg.slots,
            w: cfg.pulses,
            m_s: cfg.transmitters,
            m_f: cfg.frequencies,
            m: cfg.mod_index,
            l_m: cfg.span,
        }
    }
}

impl SystemConfig {
    /// Validates and builds a configuration.
    ///
    /// `mod_index` is ignored (forced to 0) when `frequencies == 1`, and `span`
    /// is ignored (forced to 0) when `transmitters == 1`.
    pub fn new(
        slots: u32,
        pulses: u32,
        transmitters: u32,
        frequencies: u32,
        mod_index: f64,
        span: f64,
    ) -> Result<Self> {
        if slots < 2 {
            return Err(Error::InvalidConfig(format!("N must be > 1, got {slots}")));
        }
        if slots > MAX_SLOTS {
            return Err(Error::InvalidConfig(format!(
                "N must be <= {MAX_SLOTS}, got {slots}"
            )));
        }
        if pulses < 1 || pulses > slots {
            return Err(Error::InvalidConfig(format!(
                "w must satisfy 1 <= w <= N = {slots}, got {pulses}"
            )));
        }
        if !transmitters.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "M_S must be a power of two, got {transmitters}"
            )));
        }
        if !frequencies.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "M_F must be a power of two, got {frequencies}"
            )));
        }
        let mod_index = if frequencies == 1 {
            0.0
        } else if mod_index > 0.0 && mod_index <= 1.0 {
            mod_index
        } else {
            return Err(Error::InvalidConfig(format!(
                "m must satisfy 0 < m <= 1 when M_F > 1, got {mod_index}"
            )));
        };
        let span = if transmitters == 1 {
            0.0
        } else if span > 0.0 && span < 1.0 {
            span
        } else {
            return Err(Error::InvalidConfig(format!(
                "L_m must satisfy 0 < L_m < 1 when M_S > 1, got {span}"
            )));
        };
        Ok(SystemConfig {
            slots,
            pulses,
            transmitters,
            frequencies,
            mod_index,
            span,
        })
    }

    /// N
    pub fn slots(&self) -> u32 {
        self.slots
    }

    /// w
    pub fn pulses(&self) -> u32 {
        self.pulses
    }

    /// M_S
    pub fn transmitters(&self) -> u32 {
        self.transmitters
    }

    /// M_F
    pub fn frequencies(&self) -> u32 {
        self.frequencies
    }

    /// m
    pub fn mod_index(&self) -> f64 {
        self.mod_index
    }

    /// L_m
    pub fn span(&self) -> f64 {
        self.span
    }

    /// n_S = log2(M_S)
    pub fn spatial_bits(&self) -> u32 {
        self.transmitters.trailing_zeros()
    }

    /// n_F = log2(M_F)
    pub fn frequency_bits(&self) -> u32 {
        self.frequencies.trailing_zeros()
    }

    /// Samples per slot, `4 (M_F + 1)`: twice the Nyquist minimum for the
    /// `(M_F + 1) / T_s` occupied bandwidth.
    pub fn samples_per_slot(&self) -> usize {
        4 * (self.frequencies as usize + 1)
    }
}

/// Bits carried by each part of one symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BitBudget {
    pub q_mppm: u32,
    pub q_ossk: u32,
    pub q_fsk: u32,
    pub q_total: u32,
}

impl BitBudget {
    /// Binary rate for a given slot duration.
    pub fn rate(&self, cfg: &SystemConfig, slot_duration: f64) -> f64 {
        self.q_total as f64 / (cfg.slots() as f64 * slot_duration)
    }
}

/// Exact binomial coefficient. Panics on 128-bit overflow, which cannot happen
/// for `n <= 128`.
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc
            .checked_mul((n - i) as u128)
            .expect("binomial overflow")
            / (i as u128 + 1);
    }
    acc
}

/// `floor(log2(x))` for `x >= 1`.
pub fn floor_log2(x: u128) -> u32 {
    debug_assert!(x > 0);
    127 - x.leading_zeros()
}

pub fn bits_per_symbol(cfg: &SystemConfig) -> BitBudget {
    let q_mppm = floor_log2(binomial(cfg.slots(), cfg.pulses()));
    let q_ossk = cfg.pulses() * cfg.spatial_bits();
    let q_fsk = cfg.pulses() * cfg.frequency_bits();
    BitBudget {
        q_mppm,
        q_ossk,
        q_fsk,
        q_total: q_mppm + q_ossk + q_fsk,
    }
}

/// Received signal-slot amplitudes `H_j`, index 0 being the strongest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeSet {
    pub levels: Vec<f64>,
}

impl AmplitudeSet {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn get(&self, j: usize) -> f64 {
        self.levels[j]
    }
}

/// Evenly spread ladder `H_j = I_m (1 - L_m j / (M_S - 1))`.
pub fn amplitude_levels(cfg: &SystemConfig, peak_current: f64) -> Result<AmplitudeSet> {
    if !(peak_current > 0.0 && peak_current.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "I_m must be positive, got {peak_current}"
        )));
    }
    let ms = cfg.transmitters();
    if ms == 1 {
        return Ok(AmplitudeSet {
            levels: vec![peak_current],
        });
    }
    let step = cfg.span() / (ms - 1) as f64;
    let levels = (0..ms)
        .map(|j| peak_current * (1.0 - step * j as f64))
        .collect();
    Ok(AmplitudeSet { levels })
}

/// Receiver noise parameters. RIN is kept linear (1/Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalNoiseParams {
    /// J/K
    pub boltzmann: f64,
    /// Reference temperature, K
    pub temperature: f64,
    /// Linear noise factor
    pub noise_factor: f64,
    /// Load resistance, ohm
    pub load_resistance: f64,
    /// C
    pub electron_charge: f64,
    /// Relative-intensity noise, 1/Hz
    pub rin: f64,
    /// Photodiode responsivity, A/W
    pub responsivity: f64,
}

impl Default for PhysicalNoiseParams {
    /// 290 K, 50 ohm, NF = 10 dB, RIN = -155 dB/Hz, 0.5 A/W.
    fn default() -> Self {
        PhysicalNoiseParams::from_db(290.0, 10.0, 50.0, -155.0, 0.5)
    }
}

impl PhysicalNoiseParams {
    /// Builds the parameter set from the customary logarithmic figures.
    pub fn from_db(
        temperature: f64,
        noise_figure_db: f64,
        load_resistance: f64,
        rin_db_hz: f64,
        responsivity: f64,
    ) -> Self {
        PhysicalNoiseParams {
            boltzmann: BOLTZMANN,
            temperature,
            noise_factor: db_to_linear(noise_figure_db),
            load_resistance,
            electron_charge: ELECTRON_CHARGE,
            rin: db_to_linear(rin_db_hz),
            responsivity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("k_B", self.boltzmann),
            ("T_R", self.temperature),
            ("F", self.noise_factor),
            ("R_L", self.load_resistance),
            ("q_e", self.electron_charge),
            ("responsivity", self.responsivity),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidPhysics(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.rin >= 0.0 && self.rin.is_finite()) {
            return Err(Error::InvalidPhysics(format!(
                "RIN must be non-negative, got {}",
                self.rin
            )));
        }
        Ok(())
    }

    /// Thermal term `4 k_B T_R F / R_L`.
    pub fn thermal_psd(&self) -> f64 {
        4.0 * self.boltzmann * self.temperature * self.noise_factor / self.load_resistance
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * db_to_linear(dbm)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

/// Unilateral noise PSD (A^2/Hz): thermal + shot + RIN.
pub fn noise_psd(idc: f64, phys: &PhysicalNoiseParams) -> Result<f64> {
    if !(idc >= 0.0 && idc.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "I_DC must be non-negative, got {idc}"
        )));
    }
    Ok(phys.thermal_psd() + 2.0 * phys.electron_charge * idc + phys.rin * idc * idc)
}

/// Inverts [`noise_psd`]: the non-negative root of
/// `RIN I^2 + 2 q I + (thermal - N0) = 0`.
pub fn idc_from_n0(n0: f64, phys: &PhysicalNoiseParams) -> Result<f64> {
    let floor = phys.thermal_psd();
    if !n0.is_finite() || n0 < floor {
        return Err(Error::BelowThermalFloor { n0, floor });
    }
    let a = phys.rin;
    let b = 2.0 * phys.electron_charge;
    let c = n0 - floor;
    // Cancellation-free form of the positive root; reduces to c / b when a = 0.
    Ok(2.0 * c / (b + (b * b + 4.0 * a * c).sqrt()))
}

/// Operating point of the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudget {
    /// T_s, s
    pub slot_duration: f64,
    /// I_m, A
    pub peak_current: f64,
    /// N0, A^2/Hz
    pub n0: f64,
    /// I_DC, A
    pub idc: f64,
    /// I_ph, A
    pub iph: f64,
    /// P_opt, W
    pub popt: f64,
    /// R_b, bit/s
    pub rate: f64,
    /// f_s, Hz
    pub sample_rate: f64,
    /// N_s
    pub samples_per_slot: usize,
}

impl LinkBudget {
    pub fn popt_dbm(&self) -> f64 {
        watts_to_dbm(self.popt)
    }
}

/// Builds the operating point from the received optical power (W) and the
/// binary rate (bit/s).
pub fn link_budget(
    cfg: &SystemConfig,
    phys: &PhysicalNoiseParams,
    popt: f64,
    rate: f64,
) -> Result<LinkBudget> {
    phys.validate()?;
    if !(popt > 0.0 && popt.is_finite()) {
        return Err(Error::OutOfRange(format!("P_opt must be positive, got {popt}")));
    }
    let idc = phys.responsivity * popt;
    let n0 = noise_psd(idc, phys)?;
    assemble(cfg, phys, idc, n0, rate, Some(popt))
}

/// Dual entry point: operating point from the noise PSD, recovering `I_DC`
/// through [`idc_from_n0`].
pub fn link_budget_from_n0(
    cfg: &SystemConfig,
    phys: &PhysicalNoiseParams,
    n0: f64,
    rate: f64,
) -> Result<LinkBudget> {
    phys.validate()?;
    let idc = idc_from_n0(n0, phys)?;
    if idc <= 0.0 {
        return Err(Error::OutOfRange(
            "N0 at the thermal floor leaves no signal current".into(),
        ));
    }
    assemble(cfg, phys, idc, n0, rate, None)
}

fn assemble(
    cfg: &SystemConfig,
    phys: &PhysicalNoiseParams,
    idc: f64,
    n0: f64,
    rate: f64,
    popt: Option<f64>,
) -> Result<LinkBudget> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::OutOfRange(format!("R_b must be positive, got {rate}")));
    }
    let n = cfg.slots() as f64;
    let w = cfg.pulses() as f64;
    let iph = idc * n / w;
    let peak_current = iph / (1.0 - cfg.span() / 2.0);
    let q = bits_per_symbol(cfg).q_total as f64;
    let slot_duration = q / (n * rate);
    let samples_per_slot = cfg.samples_per_slot();
    Ok(LinkBudget {
        slot_duration,
        peak_current,
        n0,
        idc,
        iph,
        popt: popt.unwrap_or(idc / phys.responsivity),
        rate,
        sample_rate: samples_per_slot as f64 / slot_duration,
        samples_per_slot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(n: u32, w: u32, ms: u32, mf: u32) -> SystemConfig {
        SystemConfig::new(n, w, ms, mf, 0.9, 0.7).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn bit_budget_examples() {
        let b = bits_per_symbol(&cfg(8, 4, 4, 4));
        assert_eq!((b.q_mppm, b.q_ossk, b.q_fsk, b.q_total), (6, 8, 8, 22));
        assert_eq!(bits_per_symbol(&cfg(2, 1, 1, 1)).q_total, 1);
        assert_eq!(binomial(16, 8), 12870);
        let b = bits_per_symbol(&cfg(16, 8, 4, 8));
        assert_eq!(b.q_mppm, 13);
        assert_eq!(b.q_total, 53);
    }

    #[test]
    fn binomial_large() {
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
        assert_eq!(binomial(64, 0), 1);
        assert_eq!(binomial(5, 7), 0);
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            SystemConfig::new(1, 1, 1, 1, 0.0, 0.0),
            SystemConfig::new(8, 0, 4, 4, 0.9, 0.7),
            SystemConfig::new(8, 9, 4, 4, 0.9, 0.7),
            SystemConfig::new(8, 4, 3, 4, 0.9, 0.7),
            SystemConfig::new(8, 4, 4, 6, 0.9, 0.7),
            SystemConfig::new(8, 4, 4, 4, 0.0, 0.7),
            SystemConfig::new(8, 4, 4, 4, 1.2, 0.7),
            SystemConfig::new(8, 4, 4, 4, 0.9, 1.0),
            SystemConfig::new(65, 4, 4, 4, 0.9, 0.5),
        ];
        for c in cases {
            assert!(matches!(c, Err(Error::InvalidConfig(_))), "{c:?}");
        }
        let e = SystemConfig::new(8, 4, 3, 4, 0.9, 0.7).unwrap_err();
        assert!(e.to_string().contains("M_S"));
    }

    #[test]
    fn degenerate_configs_force_zero() {
        let c = SystemConfig::new(8, 4, 1, 16, 0.9, 0.7).unwrap();
        assert_eq!(c.span(), 0.0);
        let c = SystemConfig::new(8, 4, 16, 1, 0.9, 0.7).unwrap();
        assert_eq!(c.mod_index(), 0.0);
    }

    #[test]
    fn config_from_json() {
        let c: SystemConfig =
            serde_json::from_str(r#"{"N":8,"w":4,"M_S":4,"M_F":4,"m":0.9,"L_m":0.7}"#).unwrap();
        assert_eq!(c, cfg(8, 4, 4, 4));
        let bad = serde_json::from_str::<SystemConfig>(r#"{"N":8,"w":4,"M_S":4,"M_F":4,"m":0.9,"Lm":0.7}"#);
        assert!(bad.unwrap_err().to_string().contains("Lm"));
    }

    #[test]
    fn amplitude_examples() {
        let c = SystemConfig::new(8, 4, 4, 4, 0.9, 0.7).unwrap();
        let h = amplitude_levels(&c, 1.0).unwrap().levels;
        let want = [1.0, 0.766667, 0.533333, 0.3];
        for (a, b) in h.iter().zip(want) {
            assert!((a - b).abs() < 1e-6);
        }
        let c = SystemConfig::new(8, 4, 1, 4, 0.9, 0.0).unwrap();
        assert_eq!(amplitude_levels(&c, 2.0).unwrap().levels, vec![2.0]);
        let c = SystemConfig::new(8, 4, 2, 4, 0.9, 0.5).unwrap();
        assert_eq!(amplitude_levels(&c, 1.0).unwrap().levels, vec![1.0, 0.5]);
        assert!(amplitude_levels(&c, 0.0).is_err());
    }

    #[test]
    fn thermal_floor_value() {
        let p = PhysicalNoiseParams::default();
        let n0 = noise_psd(0.0, &p).unwrap();
        let want = 4.0 * 1.380649e-23 * 290.0 * 10.0 / 50.0;
        assert!(rel(n0, want) < 1e-14);
        assert!(rel(n0, 3.2031e-21) < 1e-4);
        assert!((p.rin - 10f64.powf(-15.5)).abs() < 1e-28);

        let mut q = p;
        q.rin = 0.0;
        q.noise_factor = 1.0;
        assert_eq!(noise_psd(0.0, &q).unwrap(), 4.0 * q.boltzmann * q.temperature / q.load_resistance);
        assert!(noise_psd(-1e-9, &p).is_err());
    }

    #[test]
    fn idc_inversion() {
        let p = PhysicalNoiseParams::default();
        let floor = p.thermal_psd();
        assert_eq!(idc_from_n0(floor, &p).unwrap(), 0.0);
        assert!(matches!(
            idc_from_n0(floor * 0.999, &p),
            Err(Error::BelowThermalFloor { .. })
        ));
        let i = idc_from_n0(2.0 * floor, &p).unwrap();
        assert!(i > 0.0);
        assert!(rel(noise_psd(i, &p).unwrap(), 2.0 * floor) < 1e-12);

        // RIN = 0 takes the linear branch.
        let mut q = p;
        q.rin = 0.0;
        let i = idc_from_n0(2.0 * floor, &q).unwrap();
        assert!(rel(i, floor / (2.0 * q.electron_charge)) < 1e-14);
    }

    #[test]
    fn link_budget_examples() {
        let p = PhysicalNoiseParams::default();
        let c = SystemConfig::new(8, 8, 1, 4, 0.9, 0.0).unwrap();
        let lb = link_budget(&c, &p, 1e-5, 1e8).unwrap();
        assert!(rel(lb.peak_current, lb.idc) < 1e-15);

        let c = cfg(8, 4, 4, 4);
        let lb = link_budget(&c, &p, dbm_to_watts(-17.0), 1e8).unwrap();
        assert!(rel(lb.slot_duration, 27.5e-9) < 1e-12);
        assert!(rel(lb.idc, 0.5 * 1.9952623149688797e-5) < 1e-12);
        assert!(rel(lb.n0, noise_psd(lb.idc, &p).unwrap()) < 1e-15);
        assert!((lb.popt_dbm() + 17.0).abs() < 1e-12);
        assert_eq!(lb.samples_per_slot, 20);
        assert!(rel(lb.sample_rate, 20.0 / 27.5e-9) < 1e-12);
        assert!(rel(lb.iph, lb.idc * 2.0) < 1e-15);
        assert!(rel(lb.peak_current, lb.iph / 0.65) < 1e-15);

        let back = link_budget_from_n0(&c, &p, lb.n0, 1e8).unwrap();
        assert!(rel(back.idc, lb.idc) < 1e-9);
        assert!(link_budget(&c, &p, 0.0, 1e8).is_err());
        assert!(link_budget(&c, &p, 1e-5, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn ladder_spacing_uniform(ms_exp in 1u32..6, lm in 0.01f64..0.99, im in 1e-6f64..10.0) {
            let ms = 1u32 << ms_exp;
            let c = SystemConfig::new(8, 4, ms, 4, 0.9, lm).unwrap();
            let h = amplitude_levels(&c, im).unwrap().levels;
            let step = im * lm / (ms - 1) as f64;
            for pair in h.windows(2) {
                prop_assert!(pair[0] > pair[1]);
                prop_assert!(((pair[0] - pair[1]) - step).abs() <= 1e-12 * im);
            }
            prop_assert!(*h.last().unwrap() > 0.0);
        }

        #[test]
        fn bit_budget_monotone(n in 2u32..40, w in 1u32..20, ms_exp in 0u32..5, mf_exp in 0u32..5) {
            prop_assume!(w <= n);
            let b = |n, ms_exp: u32, mf_exp: u32| {
                bits_per_symbol(&SystemConfig::new(n, w, 1 << ms_exp, 1 << mf_exp, 0.5, 0.5).unwrap()).q_total
            };
            prop_assert!(b(n + 1, ms_exp, mf_exp) >= b(n, ms_exp, mf_exp));
            prop_assert!(b(n, ms_exp + 1, mf_exp) >= b(n, ms_exp, mf_exp));
            prop_assert!(b(n, ms_exp, mf_exp + 1) >= b(n, ms_exp, mf_exp));
        }

        // Relative round-trip holds where the signal-dependent terms are not
        // swamped by the thermal floor in the f64 representation of N0.
        #[test]
        fn psd_round_trip(idc in 1e-5f64..1.0) {
            let p = PhysicalNoiseParams::default();
            let back = idc_from_n0(noise_psd(idc, &p).unwrap(), &p).unwrap();
            prop_assert!(rel(back, idc) < 1e-12, "{idc} -> {back}");
        }

        #[test]
        fn psd_round_trip_small(idc in 0.0f64..1e-5) {
            let p = PhysicalNoiseParams::default();
            let back = idc_from_n0(noise_psd(idc, &p).unwrap(), &p).unwrap();
            // one ulp of the floor, mapped back through dN0/dI = 2q
            let ulp = f64::EPSILON * p.thermal_psd() / (2.0 * p.electron_charge);
            prop_assert!((back - idc).abs() <= 4.0 * ulp + 1e-12 * idc);
        }

        #[test]
        fn psd_increasing_convex(a in 0.0f64..1.0, d in 1e-6f64..0.5) {
            let p = PhysicalNoiseParams::default();
            let f = |x| noise_psd(x, &p).unwrap();
            prop_assert!(f(a + d) > f(a));
            prop_assert!(f(a) + f(a + 2.0 * d) >= 2.0 * f(a + d) * (1.0 - 1e-15));
        }

        #[test]
        fn popt_round_trip(dbm in -40.0f64..0.0) {
            let p = PhysicalNoiseParams::default();
            let c = cfg(8, 4, 4, 4);
            let w = dbm_to_watts(dbm);
            let lb = link_budget(&c, &p, w, 1e8).unwrap();
            prop_assert!(rel(lb.popt, w) < 1e-12);
            prop_assert!(rel(lb.idc / p.responsivity, w) < 1e-12);
        }
    }
}
