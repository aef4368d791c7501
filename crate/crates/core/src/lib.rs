//! Rate / detection-error tradeoff regions for channels that carry data while a
//! detector, which knows the transmitted codeword, decides a binary state.
//!
//! * [`channels`]: likelihood pairs, communication channels, Gaussian quantization.
//! * [`exponent`]: LLR cumulant-generating function and tilted-family exponents.
//! * [`region_fixed`]: rate-exponent regions for a state fixed over the block.
//! * [`iid`]: ROC curves, false-alarm budget allocation and rate-probability
//!   regions for i.i.d. states.
//! * [`montecarlo`]: seeded simulation of the likelihood-ratio detectors.
//!
//! All internal quantities are in nats.

pub mod channels;
pub mod error;
pub mod exponent;
pub mod iid;
pub mod info;
pub mod montecarlo;
pub mod region_fixed;

pub use error::{Error, Result};
