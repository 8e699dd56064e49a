//! Inference procedures given to the library from outside: nested families of
//! confidence regions and families of tests indexed by their error rate.
//!
//! Both are wrapped as closures so any existing procedure can be plugged in;
//! the library only ever asks "does the level-`alpha` region contain this
//! point for these data" or "does the level-`alpha` test reject these data".

use std::sync::Arc;

/// A family of confidence regions `C_alpha(x)` with coverage `1 - alpha`,
/// assumed nested: larger `alpha` gives a smaller region.
#[derive(Clone)]
pub struct ConfidenceFamily {
    /// `contains(alpha, x, theta)` is true when `theta` lies in `C_alpha(x)`.
    contains: Arc<dyn Fn(f64, &[f64], &[f64]) -> bool + Send + Sync>,
}

impl ConfidenceFamily {
    pub fn new(contains: impl Fn(f64, &[f64], &[f64]) -> bool + Send + Sync + 'static) -> Self {
        ConfidenceFamily {
            contains: Arc::new(contains),
        }
    }

    pub fn contains(&self, alpha: f64, x: &[f64], theta: &[f64]) -> bool {
        (self.contains)(alpha, x, theta)
    }

    /// Two-sided z-interval for a normal mean with known unit variance:
    /// `xbar +/- z_{alpha/2} / sqrt(n)`. The data vector holds the raw sample.
    pub fn z_interval(n: usize) -> Self {
        ConfidenceFamily::new(move |alpha, x: &[f64], theta: &[f64]| {
            let xbar = x.iter().sum::<f64>() / n as f64;
            let z = crate::dist::std_normal_quantile(1.0 - alpha / 2.0);
            (xbar - theta[0]).abs() <= z / (n as f64).sqrt()
        })
    }

    /// Equal-tailed exact binomial region: keeps `theta` when both tail
    /// probabilities at the observed count are at least `alpha/2`.
    pub fn binomial_equal_tail(n: u64) -> Self {
        ConfidenceFamily::new(move |alpha, x: &[f64], theta: &[f64]| {
            let count = x[0].round() as i64;
            let d = match crate::dist::BinomialDist::new(n, theta[0]) {
                Ok(d) => d,
                Err(_) => return false,
            };
            d.cdf_at(count) >= alpha / 2.0 && 1.0 - d.cdf_at(count - 1) >= alpha / 2.0
        })
    }
}

/// A family of tests `T_alpha` of a fixed null, indexed by size `alpha`:
/// `rejects(alpha, x)` is the level-`alpha` decision on data `x`.
#[derive(Clone)]
pub struct TestFamily {
    rejects: Arc<dyn Fn(f64, &[f64]) -> bool + Send + Sync>,
}

impl TestFamily {
    pub fn new(rejects: impl Fn(f64, &[f64]) -> bool + Send + Sync + 'static) -> Self {
        TestFamily {
            rejects: Arc::new(rejects),
        }
    }

    pub fn rejects(&self, alpha: f64, x: &[f64]) -> bool {
        (self.rejects)(alpha, x)
    }

    /// The p-value induced by the family: the smallest level at which it
    /// rejects, located by bisection.
    pub fn p_value(&self, x: &[f64]) -> f64 {
        if !self.rejects(1.0 - 1e-12, x) {
            return 1.0;
        }
        if self.rejects(0.0, x) {
            return 0.0;
        }
        crate::search::bisect_boundary(|a| !self.rejects(a, x), 0.0, 1.0, crate::search::LEVEL_TOL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn z_interval_contains_center_at_any_level() {
        let fam = ConfidenceFamily::z_interval(4);
        let x = [0.1, -0.3, 0.2, 0.4];
        let xbar = x.iter().sum::<f64>() / 4.0;
        assert!(fam.contains(0.5, &x, &[xbar]));
        assert!(fam.contains(0.99, &x, &[xbar]));
    }

    #[test]
    fn test_family_p_value_matches_closed_form() {
        // Reject when |z| exceeds the two-sided normal threshold.
        let fam = TestFamily::new(|alpha, x: &[f64]| {
            x[0].abs() > crate::dist::std_normal_quantile(1.0 - alpha / 2.0)
        });
        let p = fam.p_value(&[1.959963984540054]);
        assert_abs_diff_eq!(p, 0.05, epsilon = 1e-6);
        assert_eq!(fam.p_value(&[0.0]), 1.0);
    }
}
