//! Valid plausibility-based inference from nested random sets.
//!
//! This crate turns existing frequentist procedures — nested families of
//! confidence regions, or families of tests indexed by size — into consonant
//! plausibility measures that are provably calibrated: the plausibility of
//! the true parameter falls below `alpha` with probability at most `alpha`.
//! The conversion never gives ground, either; its level sets sit inside the
//! input regions and its tests reject whenever the input tests do.
//!
//! The pieces:
//!
//! - [`contour`]: consonant plausibility measures, their capacities, level
//!   regions, and marginalization.
//! - [`association`]: sampling models written as `X = a(theta, U)` with a
//!   known auxiliary law and explicit data fibers.
//! - [`random_set`]: nested focal families on the auxiliary space and the
//!   fused plausibility they induce.
//! - [`algorithm`]: the constructive conversion — focal families from
//!   confidence or test families, level indices, fused contours, and
//!   compatibility checks.
//! - [`models`]: worked sampling models with closed-form contours (binomial
//!   counts, two normal samples with unequal variances, bivariate normal
//!   means and their ratio).
//! - [`nonparametric`]: distribution-level inference from the empirical CDF
//!   band.
//! - [`universal`]: split-likelihood-ratio procedures and their
//!   plausibility upgrades, including a Gaussian-mixture test and a
//!   monotone-density test.
//! - [`diagnostics`]: Monte Carlo validity curves, dominance checks, power
//!   comparisons, and the false-confidence demonstration.

pub mod algorithm;
pub mod association;
pub mod contour;
pub mod diagnostics;
pub mod dist;
pub mod error;
pub mod models;
pub mod nonparametric;
pub mod procedure;
pub mod random_set;
pub mod rng;
pub mod search;
pub mod universal;

pub use contour::{Assertion, ConsonantMeasure, Contour, Domain};
pub use error::{ImError, Result};
pub use rng::McConfig;
