//! Link-level model of frequency-hopping spatial multi-pulse position
//! modulation (FH-SMPPM) over an IM/DD free-space optical channel.
//!
//! A symbol of `N` slots carries bits in three places at once: which `w`
//! slots are lit (MPPM), which of `M_S` transmitters lights each of them
//! (OSSK, seen as an amplitude level at the receiver) and which of `M_F`
//! subcarrier tones modulates each pulse (FSK).
//!
//! * [`system`]: configuration, bit budget, noise PSD and link budget.
//! * [`mapping`]: bit labels for the three dimensions.
//! * [`modem`]: modulation, waveform synthesis, correlators and detection.
//! * [`channel`]: AWGN on the receiver statistics or on samples.
//! * [`analysis`]: error probabilities, efficiencies and receiver cost.
//! * [`montecarlo`]: seeded, parallel SER/BER estimation.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod mapping;
pub mod modem;
pub mod montecarlo;
pub mod system;

pub use channel::NoiseDomain;
pub use error::{Error, Result};
pub use modem::Link;
pub use system::{BitBudget, LinkBudget, PhysicalNoiseParams, SystemConfig};
