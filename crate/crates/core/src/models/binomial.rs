//! Binomial counts: the equal-tailed exact interval and its plausibility
//! upgrade.
//!
//! The equal-tailed (Clopper–Pearson) family keeps a success probability
//! while both of its tail probabilities at the observed count stay at or
//! above half the level. Its level index has a plateau: over the
//! probabilities whose median equals the observed count, every level keeps
//! the count, and the index is one. The converted contour re-weights the
//! index by the actual probability of the acceptance event and is evaluated
//! exactly by summing the support atoms — no Monte Carlo — which makes it
//! pointwise no larger than the equal-tailed index while still reaching one
//! on the plateau.

use crate::contour::{Contour, Domain};
use crate::dist::BinomialDist;
use crate::error::{ImError, Result};
use crate::search;

/// A binomial experiment with an observed success count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialSetup {
    pub n: u64,
    pub x: u64,
}

impl BinomialSetup {
    pub fn new(n: u64, x: u64) -> Result<Self> {
        if n == 0 {
            return Err(ImError::invalid_parameter("trial count must be positive"));
        }
        if x > n {
            return Err(ImError::invalid_data(format!(
                "success count {x} exceeds trial count {n}"
            )));
        }
        Ok(BinomialSetup { n, x })
    }

    /// Half the equal-tailed level index: the smaller of the two tail
    /// probabilities at the observed count.
    fn min_tail(&self, d: &BinomialDist) -> f64 {
        let k = self.x as i64;
        d.cdf_at(k).min(1.0 - d.cdf_at(k - 1))
    }

    /// Level index of the equal-tailed family: twice the smaller tail
    /// probability, capped at one.
    pub fn cp_index(&self, theta: f64) -> f64 {
        let d = match BinomialDist::new(self.n, theta) {
            Ok(d) => d,
            Err(_) => return 0.0,
        };
        (2.0 * self.min_tail(&d)).min(1.0)
    }

    /// Equal-tailed contour over the unit interval: `theta` versus the level
    /// index.
    pub fn cp_contour(&self) -> Contour {
        let s = *self;
        Contour::new(Self::unit_domain(), move |t: &[f64]| s.cp_index(t[0]))
    }

    /// Exact equal-tailed interval at level `alpha`: the lower endpoint
    /// solves `1 - F_theta(x-1) = alpha/2`, the upper solves
    /// `F_theta(x) = alpha/2`, with the boundary counts pinned to 0 and 1.
    pub fn cp_interval(&self, alpha: f64) -> Result<(f64, f64)> {
        if !(0.0..1.0).contains(&alpha) || alpha <= 0.0 {
            return Err(ImError::invalid_parameter(
                "interval level must lie strictly between 0 and 1",
            ));
        }
        let (n, x) = (self.n, self.x);
        let half = alpha / 2.0;
        let lo = if x == 0 {
            0.0
        } else {
            // 1 - F_theta(x-1) grows from 0 to 1 in theta.
            search::bisect_boundary(
                |t| 1.0 - BinomialDist::new(n, t).unwrap().cdf_at(x as i64 - 1) < half,
                0.0,
                1.0,
                1e-12,
            )
        };
        let hi = if x == n {
            1.0
        } else {
            // F_theta(x) falls from 1 to 0 in theta.
            search::bisect_boundary(
                |t| BinomialDist::new(n, t).unwrap().cdf_at(x as i64) >= half,
                0.0,
                1.0,
                1e-12,
            )
        };
        Ok((lo, hi))
    }

    /// Fused plausibility of one success probability, exactly.
    ///
    /// On the plateau (observed count is the median) the value is one.
    /// Elsewhere it is the probability that a fresh count's smaller tail is
    /// no larger than the observed one — the total mass of the counts
    /// excluded from the acceptance event at the level index.
    pub fn im_value(&self, theta: f64) -> f64 {
        let d = match BinomialDist::new(self.n, theta) {
            Ok(d) => d,
            Err(_) => return 0.0,
        };
        let k = self.x as i64;
        let (fx, fxm1) = (d.cdf_at(k), d.cdf_at(k - 1));
        if fxm1 < 0.5 && 0.5 < fx {
            return 1.0;
        }
        let gamma = fx.min(1.0 - fxm1);
        let mut mass = 0.0;
        for y in 0..=self.n {
            let tail = d.cdf_at(y as i64).min(1.0 - d.cdf_at(y as i64 - 1));
            if tail <= gamma {
                mass += d.pmf(y);
            }
        }
        mass
    }

    /// Fused contour over the unit interval.
    pub fn im_contour(&self) -> Contour {
        let s = *self;
        Contour::new(Self::unit_domain(), move |t: &[f64]| s.im_value(t[0]))
    }

    /// The probabilities whose level index is one: counts with the observed
    /// value as their median. Empty only in edge configurations.
    pub fn plateau(&self) -> Option<(f64, f64)> {
        let s = *self;
        let on_plateau = |t: f64| {
            let d = BinomialDist::new(s.n, t).unwrap();
            let k = s.x as i64;
            d.cdf_at(k - 1) < 0.5 && 0.5 < d.cdf_at(k)
        };
        // F_theta(x) falls through 1/2 at the upper edge, F_theta(x-1) at
        // the lower edge.
        let lo = if self.x == 0 {
            0.0
        } else {
            search::bisect_boundary(
                |t| BinomialDist::new(s.n, t).unwrap().cdf_at(s.x as i64 - 1) >= 0.5,
                0.0,
                1.0,
                1e-12,
            )
        };
        let hi = if self.x == self.n {
            1.0
        } else {
            search::bisect_boundary(
                |t| BinomialDist::new(s.n, t).unwrap().cdf_at(s.x as i64) > 0.5,
                0.0,
                1.0,
                1e-12,
            )
        };
        if hi > lo && on_plateau(0.5 * (lo + hi)) {
            Some((lo, hi))
        } else {
            None
        }
    }

    fn unit_domain() -> Domain {
        Domain::new(vec![(0.0, 1.0)], 1001)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Reference tail probabilities for n = 25 (independent implementation).
    const F_05_17: f64 = 0.97835737466812134;
    const F_05_16: f64 = 0.94612392783164978;
    const F_068_17: f64 = 0.57472559696417502;
    const F_068_16: f64 = 0.40571731663222277;
    // Equal-tailed 95% interval for x = 17 out of 25 (reference root solve).
    const CP95_LO: f64 = 0.464999282502628;
    const CP95_HI: f64 = 0.85050457738643;
    // Plateau edges: where F_theta(16) and F_theta(17) cross one half.
    const PLATEAU_LO: f64 = 0.657846578340519;
    const PLATEAU_HI: f64 = 0.697304625267176;

    fn worked_setup() -> BinomialSetup {
        BinomialSetup::new(25, 17).unwrap()
    }

    #[test]
    fn cp_index_matches_reference_tails() {
        let s = worked_setup();
        let expect_half = 2.0 * (1.0 - F_05_16);
        assert_abs_diff_eq!(s.cp_index(0.5), expect_half, epsilon = 1e-12);
        // Inside the plateau both tails clear one half, so the index is one.
        assert!(F_068_16 < 0.5 && 0.5 < F_068_17);
        assert_eq!(s.cp_index(0.68), 1.0);
    }

    #[test]
    fn cp_index_vanishes_at_impossible_probabilities() {
        let s = worked_setup();
        assert_eq!(s.cp_index(0.0), 0.0);
        assert_eq!(s.cp_index(1.0), 0.0);
    }

    #[test]
    fn cp_interval_matches_reference_roots() {
        let s = worked_setup();
        let (lo, hi) = s.cp_interval(0.05).unwrap();
        assert_abs_diff_eq!(lo, CP95_LO, epsilon = 1e-9);
        assert_abs_diff_eq!(hi, CP95_HI, epsilon = 1e-9);
    }

    #[test]
    fn cp_interval_handles_boundary_counts() {
        let s = BinomialSetup::new(10, 0).unwrap();
        let (lo, hi) = s.cp_interval(0.05).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi < 0.4 && hi > 0.2); // 1 - 0.025^{1/10} ≈ 0.3085
        let s = BinomialSetup::new(10, 10).unwrap();
        let (lo, hi) = s.cp_interval(0.05).unwrap();
        assert!(lo > 0.6);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn fused_contour_is_one_on_the_plateau() {
        let s = worked_setup();
        let (lo, hi) = s.plateau().unwrap();
        assert_abs_diff_eq!(lo, PLATEAU_LO, epsilon = 1e-9);
        assert_abs_diff_eq!(hi, PLATEAU_HI, epsilon = 1e-9);
        for &t in &[lo + 1e-6, 0.68, hi - 1e-6] {
            assert_eq!(s.im_value(t), 1.0);
        }
    }

    #[test]
    fn fused_value_matches_smaller_tail_mass_at_half() {
        // Independent recomputation at theta = 0.5: total mass of counts
        // whose smaller tail is at most the observed one.
        let s = worked_setup();
        let d = BinomialDist::new(25, 0.5).unwrap();
        let gamma = d.cdf_at(17).min(1.0 - d.cdf_at(16));
        assert_abs_diff_eq!(gamma, F_05_17.min(1.0 - F_05_16), epsilon = 1e-12);
        let mut expect = 0.0;
        for y in 0..=25i64 {
            let tail = d.cdf_at(y).min(1.0 - d.cdf_at(y - 1));
            if tail <= gamma {
                expect += d.pmf(y as u64);
            }
        }
        assert_abs_diff_eq!(s.im_value(0.5), expect, epsilon = 1e-14);
        // And it improves on the equal-tailed index.
        assert!(s.im_value(0.5) < s.cp_index(0.5));
    }

    #[test]
    fn fused_never_exceeds_equal_tailed_index() {
        let s = worked_setup();
        for i in 0..=500 {
            let t = i as f64 / 500.0;
            assert!(
                s.im_value(t) <= s.cp_index(t) + 1e-12,
                "dominance violated at theta = {t}"
            );
        }
    }

    #[test]
    fn fused_region_sits_inside_equal_tailed_interval() {
        let s = worked_setup();
        let m = crate::contour::ConsonantMeasure::new(s.im_contour());
        let region = m.plausibility_region(0.05);
        assert_eq!(region.intervals.len(), 1);
        let [lo, hi] = region.intervals[0];
        let (cp_lo, cp_hi) = s.cp_interval(0.05).unwrap();
        assert!(lo >= cp_lo && hi <= cp_hi);
        // Strictly inside on both flanks for this configuration.
        assert!(lo > cp_lo + 1e-3 && hi < cp_hi - 1e-3);
    }

    #[test]
    fn invalid_setup_rejected() {
        assert!(BinomialSetup::new(0, 0).is_err());
        assert!(BinomialSetup::new(10, 11).is_err());
    }
}
