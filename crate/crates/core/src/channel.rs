//! Non-turbulent FSO channel with additive white Gaussian noise.
//!
//! Two equivalent realizations: noise added straight to the receiver
//! statistics (fast path), or to the sampled waveform before the correlator
//! bank (validation path).

use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::modem::{FhSmppmSymbol, Link, MetricFrame, SampleBuffer};
use crate::system::LinkBudget;

/// Where noise is injected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseDomain {
    #[default]
    Metric,
    Sample,
}

impl FromStr for NoiseDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "metric" => Ok(NoiseDomain::Metric),
            "sample" => Ok(NoiseDomain::Sample),
            other => Err(Error::InvalidConfig(format!(
                "unknown noise domain {other:?} (expected metric or sample)"
            ))),
        }
    }
}

/// Standard deviation of every correlator output: `sqrt(N0 / 2)`.
pub fn metric_sigma(lb: &LinkBudget) -> f64 {
    (lb.n0 / 2.0).sqrt()
}

/// Per-sample variance `N0 f_s / 2` of band-limited white noise.
pub fn sample_variance(lb: &LinkBudget) -> f64 {
    lb.n0 * lb.sample_rate / 2.0
}

/// Noisy receiver statistics for `sym`. The matched-filter noise and every
/// tone correlator noise are independent `Normal(0, N0/2)` draws.
pub fn awgn_metric_channel<R: Rng + ?Sized>(
    link: &Link,
    sym: &FhSmppmSymbol,
    rng: &mut R,
) -> MetricFrame {
    let mut frame = link.expected_metrics(sym);
    let sigma = metric_sigma(&link.budget);
    if sigma > 0.0 {
        for r in frame.r.iter_mut() {
            *r += sigma * rng.sample::<f64, _>(StandardNormal);
        }
        for (i, q) in frame.iq.iter_mut() {
            *i += sigma * rng.sample::<f64, _>(StandardNormal);
            *q += sigma * rng.sample::<f64, _>(StandardNormal);
        }
        frame.refresh_energies();
    }
    frame
}

/// Adds i.i.d. `Normal(0, N0 f_s / 2)` to every sample.
pub fn awgn_sample_channel<R: Rng + ?Sized>(
    lb: &LinkBudget,
    buf: &SampleBuffer,
    rng: &mut R,
) -> SampleBuffer {
    let mut out = buf.clone();
    let sigma = sample_variance(lb).sqrt();
    if sigma > 0.0 {
        for s in out.samples.iter_mut() {
            *s += sigma * rng.sample::<f64, _>(StandardNormal);
        }
    }
    out
}
