//! Split-likelihood-ratio machinery and the composite-hypothesis tests
//! built on it: a normal-location closed form, a two-component normal
//! mixture test, and a monotone-density test, each paired with its
//! plausibility-based counterpart.

pub mod grenander;
pub mod kde;
pub mod mixture;
pub mod monotone;
pub mod slr;
