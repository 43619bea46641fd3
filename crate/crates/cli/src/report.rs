//! Renders each subcommand's result as text. Floats use Rust's shortest
//! round-trip formatting, so output is locale-free and byte-stable.

use anyhow::Result;
use fhsmppm::analysis::{complexity_report, efficiency_sweep, power_efficiency, spectral_efficiency};
use fhsmppm::montecarlo::{run_sweep, TrialPlan};
use fhsmppm::system::{bits_per_symbol, MAX_SLOTS};
use fhsmppm::SystemConfig;
use serde_json::json;

use crate::document::RunDocument;

pub const CURVES_HEADER: [&str; 13] = [
    "popt_dbm", "n0", "ts", "pe", "pb", "ser", "ser_lo", "ser_hi", "ber", "ber_lo", "ber_hi",
    "n_symbols", "status",
];

fn sci(x: f64) -> String {
    format!("{x:e}")
}

fn csv_text(rows: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    rows(&mut w)?;
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn json_text(value: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn bits(doc: &RunDocument) -> Result<String> {
    let b = bits_per_symbol(&doc.system);
    let rate = doc.sweep.rate_bps;
    json_text(&json!({
        "q_mppm": b.q_mppm,
        "q_ossk": b.q_ossk,
        "q_fsk": b.q_fsk,
        "q_total": b.q_total,
        "rate_bps": rate,
        "slot_duration_s": b.q_total as f64 / (doc.system.slots() as f64 * rate),
    }))
}

pub fn efficiency(doc: &RunDocument) -> Result<String> {
    let p = power_efficiency(&doc.system);
    let rho = spectral_efficiency(&doc.system);
    csv_text(|w| {
        w.write_record(["rho", "eta", "d_min_sq_norm", "symbol_energy_norm"])?;
        w.write_record([rho, p.eta, p.d_min_sq_norm, p.symbol_energy_norm].map(|x| x.to_string()))?;
        Ok(())
    })
}

pub fn efficiency_grid(doc: &RunDocument, max_slots: u32) -> Result<String> {
    let c = &doc.system;
    let pts = efficiency_sweep(max_slots, c.transmitters(), c.frequencies(), c.mod_index(), c.span());
    csv_text(|w| {
        w.write_record(["N", "w", "q", "rho", "inv_eta_db"])?;
        for p in pts {
            w.write_record([
                p.slots.to_string(),
                p.pulses.to_string(),
                p.q_total.to_string(),
                p.rho.to_string(),
                p.inverse_eta_db().to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn complexity(doc: &RunDocument) -> Result<String> {
    json_text(&complexity_report(&doc.system))
}

/// Latency against ops per bit for every `1 <= w <= N <= 64`, the other
/// parameters taken from the document.
pub fn complexity_grid(doc: &RunDocument) -> Result<String> {
    let c = &doc.system;
    csv_text(|w| {
        w.write_record([
            "N",
            "w",
            "q",
            "latency_lower",
            "latency_parallel",
            "latency_sequential",
            "ops_per_bit",
        ])?;
        for n in 2..=MAX_SLOTS {
            for k in 1..=n {
                let cfg = SystemConfig::new(n, k, c.transmitters(), c.frequencies(), c.mod_index(), c.span())?;
                let r = complexity_report(&cfg);
                w.write_record([
                    n.to_string(),
                    k.to_string(),
                    bits_per_symbol(&cfg).q_total.to_string(),
                    r.latency.lower.to_string(),
                    r.latency.parallel.to_string(),
                    r.latency.sequential.to_string(),
                    r.ops_per_bit.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

/// One row per grid point. A point that fails keeps its row, with the
/// failure in `status` and the affected columns empty.
pub fn curves(plan: &TrialPlan) -> Result<String> {
    let records = run_sweep(plan)?;
    csv_text(|w| {
        w.write_record(CURVES_HEADER)?;
        for r in records {
            let opt = |x: Option<f64>| x.map(sci).unwrap_or_default();
            let lb = r.budget.as_ref();
            let s = r.stats.as_ref();
            w.write_record([
                r.popt_dbm.to_string(),
                opt(lb.map(|b| b.n0)),
                opt(lb.map(|b| b.slot_duration)),
                opt(r.pe),
                opt(r.pb),
                opt(s.map(|s| s.ser)),
                opt(s.map(|s| s.ser_ci.0)),
                opt(s.map(|s| s.ser_ci.1)),
                opt(s.map(|s| s.ber)),
                opt(s.map(|s| s.ber_ci.0)),
                opt(s.map(|s| s.ber_ci.1)),
                s.map(|s| s.n_symbols.to_string()).unwrap_or_default(),
                r.failure.unwrap_or_else(|| "ok".into()),
            ])?;
        }
        Ok(())
    })
}
