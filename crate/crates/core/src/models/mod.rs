//! Worked sampling models with closed-form plausibility contours.

pub mod behrens_fisher;
pub mod binomial;
pub mod normal_means;
