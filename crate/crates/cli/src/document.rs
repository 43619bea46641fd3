//! The run document: one JSON object with `system`, `physics`, `sweep` and
//! `output` groups. Only `system` is required.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fhsmppm::montecarlo::{dbm_grid, TrialPlan, DEFAULT_BATCH_SIZE, DEFAULT_MAX_ERRORS};
use fhsmppm::{NoiseDomain, PhysicalNoiseParams, SystemConfig};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDocument {
    pub system: SystemConfig,
    #[serde(default)]
    pub physics: PhysicsBlock,
    #[serde(default)]
    pub sweep: SweepBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Receiver noise parameters in the units they are usually quoted in.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsBlock {
    pub temperature_k: f64,
    pub noise_figure_db: f64,
    pub load_resistance_ohm: f64,
    pub rin_db_hz: f64,
    pub responsivity_a_w: f64,
}

impl Default for PhysicsBlock {
    fn default() -> Self {
        PhysicsBlock {
            temperature_k: 290.0,
            noise_figure_db: 10.0,
            load_resistance_ohm: 50.0,
            rin_db_hz: -155.0,
            responsivity_a_w: 0.5,
        }
    }
}

impl PhysicsBlock {
    pub fn params(&self) -> Result<PhysicalNoiseParams> {
        let p = PhysicalNoiseParams::from_db(
            self.temperature_k,
            self.noise_figure_db,
            self.load_resistance_ohm,
            self.rin_db_hz,
            self.responsivity_a_w,
        );
        p.validate().context("physics")?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    pub popt_dbm_start: f64,
    pub popt_dbm_stop: f64,
    pub popt_dbm_step: f64,
    pub rate_bps: f64,
    pub n_symbols: u64,
    pub seed: u64,
    pub domain: NoiseDomain,
    /// 0 disables early stopping.
    pub max_errors: u64,
    pub batch_size: u64,
}

impl Default for SweepBlock {
    fn default() -> Self {
        SweepBlock {
            popt_dbm_start: -30.0,
            popt_dbm_stop: -20.0,
            popt_dbm_step: 1.0,
            rate_bps: 100e6,
            n_symbols: 100_000,
            seed: 0,
            domain: NoiseDomain::Metric,
            max_errors: DEFAULT_MAX_ERRORS,
            batch_size: DEFAULT_BATCH_SIZE,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub path: Option<PathBuf>,
}

impl RunDocument {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: RunDocument = serde_json::from_str(text)?;
        doc.physics.params()?;
        Ok(doc)
    }

    pub fn plan(&self) -> Result<TrialPlan> {
        let s = &self.sweep;
        let grid = dbm_grid(s.popt_dbm_start, s.popt_dbm_stop, s.popt_dbm_step).context("sweep")?;
        let mut plan = TrialPlan::new(self.system, s.rate_bps, grid, s.n_symbols, s.seed);
        plan.phys = self.physics.params()?;
        plan.domain = s.domain;
        plan.max_errors = (s.max_errors > 0).then_some(s.max_errors);
        plan.batch_size = s.batch_size;
        plan.validate().context("sweep")?;
        Ok(plan)
    }
}
