//! Seeded Monte Carlo estimation of symbol and bit error rates.
//!
//! Every batch of symbols draws from its own ChaCha stream, keyed by the
//! master seed with stream id `(point << 32) | batch`. Batches run in
//! parallel but are tallied in batch order, and early stopping truncates at
//! the first batch that reaches the error budget, so a result depends only on
//! the plan and never on the number of workers.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::error_probabilities;
use crate::channel::{awgn_metric_channel, awgn_sample_channel, NoiseDomain};
use crate::error::{Error, Result};
use crate::modem::Link;
use crate::system::{dbm_to_watts, link_budget, LinkBudget, PhysicalNoiseParams, SystemConfig};

pub const DEFAULT_MAX_ERRORS: u64 = 200;
pub const DEFAULT_BATCH_SIZE: u64 = 1000;
/// Normal quantile of a two-sided 95% interval.
pub const Z95: f64 = 1.959963984540054;

/// Batches dispatched together; fixed so the schedule is plan-determined.
const WAVE: u64 = 64;

/// Ascending P_opt grid `start, start + step, ...` up to `stop` inclusive
/// (with a small tolerance for accumulated rounding).
pub fn dbm_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::InvalidConfig("grid bounds must be finite".into()));
    }
    if stop < start {
        return Err(Error::EmptyGrid);
    }
    if step <= 0.0 {
        return Err(Error::InvalidConfig(format!("grid step must be positive, got {step}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    // snap to 1e-9 dB so printed grids do not carry rounding residue
    Ok((0..count)
        .map(|i| ((start + step * i as f64) * 1e9).round() / 1e9)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialPlan {
    pub cfg: SystemConfig,
    pub phys: PhysicalNoiseParams,
    /// R_b, bit/s
    pub rate: f64,
    /// Received optical powers, dBm.
    pub popt_dbm: Vec<f64>,
    pub domain: NoiseDomain,
    pub n_symbols: u64,
    /// Early stop once this many symbol errors are tallied; `None` runs all.
    pub max_errors: Option<u64>,
    pub seed: u64,
    pub batch_size: u64,
    /// Skip simulation and report closed-form values only.
    pub analytic_only: bool,
}

impl TrialPlan {
    pub fn new(cfg: SystemConfig, rate: f64, popt_dbm: Vec<f64>, n_symbols: u64, seed: u64) -> Self {
        TrialPlan {
            cfg,
            phys: PhysicalNoiseParams::default(),
            rate,
            popt_dbm,
            domain: NoiseDomain::Metric,
            n_symbols,
            max_errors: Some(DEFAULT_MAX_ERRORS),
            seed,
            batch_size: DEFAULT_BATCH_SIZE,
            analytic_only: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.popt_dbm.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if self.popt_dbm.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("P_opt grid contains a non-finite value".into()));
        }
        if self.n_symbols == 0 {
            return Err(Error::InvalidConfig("n_symbols must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
        }
        if self.max_errors == Some(0) {
            return Err(Error::InvalidConfig("max_errors must be at least 1".into()));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::InvalidConfig(format!("rate must be positive, got {}", self.rate)));
        }
        self.phys.validate()
    }

    pub fn budget(&self, point: usize) -> Result<LinkBudget> {
        let dbm = *self
            .popt_dbm
            .get(point)
            .ok_or_else(|| Error::OutOfRange(format!("grid point {point}")))?;
        link_budget(&self.cfg, &self.phys, dbm_to_watts(dbm), self.rate)
    }
}

/// Integer error counts; merging is associative and order-free.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub n_symbols: u64,
    pub n_symbol_errors: u64,
    pub n_bits: u64,
    pub n_bit_errors: u64,
    /// Sum over symbols of (bit errors in the symbol)^2.
    pub bit_errors_sq: u64,
}

impl Tally {
    pub fn record(&mut self, bits: u32, bit_errors: u32) {
        self.n_symbols += 1;
        self.n_bits += bits as u64;
        self.n_bit_errors += bit_errors as u64;
        self.bit_errors_sq += (bit_errors as u64).pow(2);
        self.n_symbol_errors += (bit_errors > 0) as u64;
    }

    pub fn merge(&mut self, other: &Tally) {
        self.n_symbols += other.n_symbols;
        self.n_symbol_errors += other.n_symbol_errors;
        self.n_bits += other.n_bits;
        self.n_bit_errors += other.n_bit_errors;
        self.bit_errors_sq += other.bit_errors_sq;
    }
}

/// Wilson score interval for `k` successes in `n` trials at normal quantile `z`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorStats {
    pub n_symbols: u64,
    pub n_symbol_errors: u64,
    pub n_bits: u64,
    pub n_bit_errors: u64,
    pub ser: f64,
    pub ber: f64,
    /// 95% Wilson interval on the SER.
    pub ser_ci: (f64, f64),
    /// 95% Wilson interval on the BER, treating bits as independent.
    pub ber_ci: (f64, f64),
    /// Standard error of the BER from the spread of per-symbol bit-error
    /// fractions; accounts for errors clustering within a symbol.
    pub ber_std_err: f64,
    /// Kept out of serialized output so artifacts are reproducible.
    #[serde(skip_serializing)]
    pub wall_time_s: f64,
}

/// Equality ignores the wall time.
impl PartialEq for ErrorStats {
    fn eq(&self, o: &Self) -> bool {
        self.n_symbols == o.n_symbols
            && self.n_symbol_errors == o.n_symbol_errors
            && self.n_bits == o.n_bits
            && self.n_bit_errors == o.n_bit_errors
            && self.ser.to_bits() == o.ser.to_bits()
            && self.ber.to_bits() == o.ber.to_bits()
            && self.ser_ci == o.ser_ci
            && self.ber_ci == o.ber_ci
            && self.ber_std_err.to_bits() == o.ber_std_err.to_bits()
    }
}

impl ErrorStats {
    pub fn from_tally(t: &Tally, wall_time_s: f64) -> Self {
        let ratio = |k: u64, n: u64| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        let ser = ratio(t.n_symbol_errors, t.n_symbols);
        let ber = ratio(t.n_bit_errors, t.n_bits);
        let ber_std_err = if t.n_symbols < 2 {
            0.0
        } else {
            let n = t.n_symbols as f64;
            let q = t.n_bits as f64 / n;
            let mean = t.n_bit_errors as f64 / n / q;
            let mean_sq = t.bit_errors_sq as f64 / n / (q * q);
            ((mean_sq - mean * mean).max(0.0) * n / (n - 1.0) / n).sqrt()
        };
        ErrorStats {
            n_symbols: t.n_symbols,
            n_symbol_errors: t.n_symbol_errors,
            n_bits: t.n_bits,
            n_bit_errors: t.n_bit_errors,
            ser,
            ber,
            ser_ci: wilson_interval(t.n_symbol_errors, t.n_symbols, Z95),
            ber_ci: wilson_interval(t.n_bit_errors, t.n_bits, Z95),
            ber_std_err,
            wall_time_s,
        }
    }

    /// Wilson interval on the SER at an arbitrary quantile.
    pub fn ser_interval(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.n_symbol_errors, self.n_symbols, z)
    }

    pub fn ber_interval(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.n_bit_errors, self.n_bits, z)
    }
}

/// Result of one simulated symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolOutcome {
    pub bits: u32,
    pub bit_errors: u32,
}

/// Independent stream for one batch of one grid point.
pub fn batch_rng(seed: u64, point: usize, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | (batch & 0xffff_ffff));
    rng
}

/// Runs `trial` over up to `n_symbols` symbols in batches, each with its own
/// stream. Stops after the first batch (in batch order) whose cumulative
/// symbol errors reach `max_errors`.
pub fn run_trials<F>(
    n_symbols: u64,
    max_errors: Option<u64>,
    batch_size: u64,
    seed: u64,
    point: usize,
    trial: F,
) -> Result<Tally>
where
    F: Fn(&mut ChaCha8Rng) -> Result<SymbolOutcome> + Sync,
{
    let batch_size = batch_size.max(1);
    let n_batches = n_symbols.div_ceil(batch_size);
    let mut total = Tally::default();
    let mut next = 0;
    while next < n_batches {
        let end = (next + WAVE).min(n_batches);
        let wave: Vec<Tally> = (next..end)
            .into_par_iter()
            .map(|b| {
                let mut rng = batch_rng(seed, point, b);
                let count = batch_size.min(n_symbols - b * batch_size);
                let mut t = Tally::default();
                for _ in 0..count {
                    let o = trial(&mut rng)?;
                    t.record(o.bits, o.bit_errors);
                }
                Ok(t)
            })
            .collect::<Result<_>>()?;
        for t in &wave {
            total.merge(t);
            if max_errors.is_some_and(|m| total.n_symbol_errors >= m) {
                return Ok(total);
            }
        }
        next = end;
    }
    Ok(total)
}

fn random_bits<R: Rng + ?Sized>(rng: &mut R, n: usize, out: &mut Vec<u8>) {
    out.clear();
    while out.len() < n {
        let word: u64 = rng.random();
        let take = (n - out.len()).min(64);
        out.extend((0..take).map(|s| (word >> s & 1) as u8));
    }
}

/// One modulate, channel, demodulate, compare cycle on uniform random bits.
pub fn simulate_symbol<R: Rng + ?Sized>(
    link: &Link,
    domain: NoiseDomain,
    rng: &mut R,
) -> Result<SymbolOutcome> {
    let mut bits = Vec::with_capacity(link.bits.q_total as usize);
    random_bits(rng, link.bits.q_total as usize, &mut bits);
    let sym = link.modulate(&bits, rng)?;
    let frame = match domain {
        NoiseDomain::Metric => awgn_metric_channel(link, &sym, rng),
        NoiseDomain::Sample => {
            let clean = link.synthesize_waveform(&sym);
            let noisy = awgn_sample_channel(&link.budget, &clean, rng);
            link.metrics_from_waveform(&noisy)?
        }
    };
    let decision = link.demodulate(&frame)?;
    let bit_errors = bits
        .iter()
        .zip(&decision.bits)
        .filter(|(a, b)| a != b)
        .count() as u32;
    Ok(SymbolOutcome {
        bits: bits.len() as u32,
        bit_errors,
    })
}

/// Simulates grid point `point` of the plan.
pub fn run_point(plan: &TrialPlan, point: usize) -> Result<ErrorStats> {
    plan.validate()?;
    let lb = plan.budget(point)?;
    let link = Link::new(plan.cfg, lb)?;
    let start = Instant::now();
    let tally = run_trials(
        plan.n_symbols,
        plan.max_errors,
        plan.batch_size,
        plan.seed,
        point,
        |rng| simulate_symbol(&link, plan.domain, rng),
    )?;
    Ok(ErrorStats::from_tally(&tally, start.elapsed().as_secs_f64()))
}

/// One row of a sweep. A failure at a point is kept in `failure` and leaves
/// the remaining fields of that row empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub point: usize,
    pub popt_dbm: f64,
    pub budget: Option<LinkBudget>,
    pub pe: Option<f64>,
    pub pb: Option<f64>,
    pub stats: Option<ErrorStats>,
    pub failure: Option<String>,
}

/// Runs every grid point in order and attaches the closed-form Pe and Pb.
pub fn run_sweep(plan: &TrialPlan) -> Result<Vec<SweepRecord>> {
    plan.validate()?;
    Ok((0..plan.popt_dbm.len()).map(|i| sweep_point(plan, i)).collect())
}

fn sweep_point(plan: &TrialPlan, point: usize) -> SweepRecord {
    let mut rec = SweepRecord {
        point,
        popt_dbm: plan.popt_dbm[point],
        budget: None,
        pe: None,
        pb: None,
        stats: None,
        failure: None,
    };
    let lb = match plan.budget(point) {
        Ok(lb) => lb,
        Err(e) => {
            rec.failure = Some(e.to_string());
            return rec;
        }
    };
    rec.budget = Some(lb);
    let mut failures = Vec::new();
    match error_probabilities(&plan.cfg, &lb) {
        Ok(r) => {
            rec.pe = Some(r.pe);
            rec.pb = Some(r.pb);
        }
        Err(e) => failures.push(format!("analysis: {e}")),
    }
    if !plan.analytic_only {
        match run_point(plan, point) {
            Ok(s) => rec.stats = Some(s),
            Err(e) => failures.push(format!("simulation: {e}")),
        }
    }
    if !failures.is_empty() {
        rec.failure = Some(failures.join("; "));
    }
    rec
}
