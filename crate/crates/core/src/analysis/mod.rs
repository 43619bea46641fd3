//! Closed-form and numerical performance analysis.

pub mod complexity;
pub mod efficiency;
pub mod error_prob;
pub mod quadrature;

pub use complexity::{complexity_report, ComplexityReport, LatencyBounds};
pub use efficiency::{
    efficiency_report, efficiency_sweep, power_efficiency, spectral_efficiency, EfficiencyReport,
    PowerEfficiency, SweepPoint,
};
pub use error_prob::{
    avg_bit_error_prob, avg_symbol_error_prob, error_probabilities, pc_mppm, pe_fsk, pe_mppm,
    pe_ossk, ErrorProbabilityReport, MultisetTerm,
};
