//! Two normal samples with unequal, unknown variances: inference on the
//! difference of means.
//!
//! The input procedure is the classical conservative interval
//! `d ± t*_{alpha} f(v1, v2)` with `f(v1,v2) = sqrt(v1/n1 + v2/n2)` and the
//! Student-t quantile at `min(n1,n2) - 1` degrees of freedom. Its level
//! index depends on the parameter only through the mean difference. The
//! focal sets on the auxiliary space depend on the parameter only through
//! the variance mixing weight `lambda = {1 + (n1 s1^2)/(n2 s2^2)}^{-1}`, so
//! the converted contour splits into lambda-specific contours; each is
//! pointwise no larger than the input index, and their maximum over a
//! lambda grid recovers the input exactly (the extreme grid point matching
//! the smaller sample's degrees of freedom attains it).

use rand_distr::Distribution;

use crate::contour::{Contour, Domain};
use crate::dist::{student_t_cdf, student_t_quantile};
use crate::error::{ImError, Result};
use crate::rng::McConfig;

/// Summary statistics of the two samples, plus the mixing-weight grid used
/// when fusing.
#[derive(Debug, Clone, PartialEq)]
pub struct BehrensFisherSetup {
    pub n1: usize,
    pub n2: usize,
    pub m1: f64,
    pub m2: f64,
    pub v1: f64,
    pub v2: f64,
    pub lambda_grid: Vec<f64>,
}

/// Default resolution of the mixing-weight grid.
pub const DEFAULT_LAMBDA_GRID: usize = 41;

impl BehrensFisherSetup {
    pub fn new(n1: usize, n2: usize, m1: f64, m2: f64, v1: f64, v2: f64) -> Result<Self> {
        if n1 < 2 || n2 < 2 {
            return Err(ImError::invalid_parameter(
                "both groups need at least two observations",
            ));
        }
        if !(v1 > 0.0) || !(v2 > 0.0) {
            return Err(ImError::invalid_data("sample variances must be positive"));
        }
        let lambda_grid = (0..DEFAULT_LAMBDA_GRID)
            .map(|i| i as f64 / (DEFAULT_LAMBDA_GRID - 1) as f64)
            .collect();
        Ok(BehrensFisherSetup {
            n1,
            n2,
            m1,
            m2,
            v1,
            v2,
            lambda_grid,
        })
    }

    pub fn with_lambda_grid(mut self, grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(ImError::invalid_parameter(
                "mixing-weight grid must be nonempty within [0, 1]",
            ));
        }
        self.lambda_grid = grid;
        Ok(self)
    }

    /// Observed mean difference.
    pub fn d(&self) -> f64 {
        self.m1 - self.m2
    }

    /// Standard-error factor `sqrt(v1/n1 + v2/n2)`.
    pub fn f(&self) -> f64 {
        (self.v1 / self.n1 as f64 + self.v2 / self.n2 as f64).sqrt()
    }

    /// Degrees of freedom of the conservative reference t distribution.
    pub fn df(&self) -> f64 {
        (self.n1.min(self.n2) - 1) as f64
    }

    /// Studentized distance of a candidate mean difference.
    pub fn t_stat(&self, phi: f64) -> f64 {
        (self.d() - phi) / self.f()
    }

    /// Level index of the input interval: the two-sided t probability
    /// beyond the studentized distance.
    pub fn hs_index(&self, phi: f64) -> f64 {
        2.0 * (1.0 - student_t_cdf(self.t_stat(phi).abs(), self.df()))
    }

    /// The input interval at level `alpha`, in closed form.
    pub fn hs_interval(&self, alpha: f64) -> Result<(f64, f64)> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ImError::invalid_parameter(
                "interval level must lie strictly between 0 and 1",
            ));
        }
        let half = student_t_quantile(1.0 - alpha / 2.0, self.df()) * self.f();
        Ok((self.d() - half, self.d() + half))
    }

    /// Contour of the input interval's level index.
    pub fn hs_contour(&self) -> Contour {
        let s = self.clone();
        Contour::new(self.phi_domain(), move |p: &[f64]| s.hs_index(p[0]))
    }

    /// Default search domain for the mean difference: six standard-error
    /// factors either side of the observed difference.
    pub fn phi_domain(&self) -> Domain {
        let (d, f) = (self.d(), self.f());
        Domain::interval(d - 6.0 * f, d + 6.0 * f)
    }

    /// Mixing weight induced by a full parameter `(mu1, mu2, s1^2, s2^2)`:
    /// the share of the first group's per-mean variance in the total.
    pub fn lambda_of(&self, s1_sq: f64, s2_sq: f64) -> f64 {
        let a = s1_sq / self.n1 as f64;
        let b = s2_sq / self.n2 as f64;
        a / (a + b)
    }

    /// Contour of one lambda-specific converted measure, evaluated against
    /// a shared table of auxiliary statistics.
    ///
    /// The level index at `phi` equals the two-sided t probability beyond
    /// `|t(x, phi)|`, so the quantile the focal set compares against is
    /// `|t(x, phi)|` itself; the contour is the exceedance probability of
    /// that threshold, truncated by the index.
    pub fn lambda_contour(&self, table: &LambdaTable, grid_index: usize) -> Contour {
        assert!(grid_index < table.lambdas.len());
        let s = self.clone();
        let column = table.sorted_stats[grid_index].clone();
        Contour::new(self.phi_domain(), move |p: &[f64]| {
            let t_abs = s.t_stat(p[0]).abs();
            let exceed = exceedance(&column, t_abs);
            exceed.min(s.hs_index(p[0]))
        })
    }

    /// Fused marginal contour for the mean difference: the maximum of the
    /// lambda-specific contours over the grid, sharing one table of draws.
    pub fn im_marginal_contour(&self, table: &LambdaTable) -> Contour {
        let s = self.clone();
        let columns = table.sorted_stats.clone();
        Contour::new(self.phi_domain(), move |p: &[f64]| {
            let t_abs = s.t_stat(p[0]).abs();
            let best = columns
                .iter()
                .map(|c| exceedance(c, t_abs))
                .fold(0.0f64, f64::max);
            best.min(s.hs_index(p[0]))
        })
    }

    /// Shared table of auxiliary statistics for this setup's grid.
    pub fn table(&self, mc: &McConfig) -> Result<LambdaTable> {
        LambdaTable::build(self.df1(), self.df2(), &self.lambda_grid, mc)
    }

    fn df1(&self) -> f64 {
        (self.n1 - 1) as f64
    }

    fn df2(&self) -> f64 {
        (self.n2 - 1) as f64
    }
}

/// Auxiliary statistic draws `|Z| / sqrt(lambda W1 + (1-lambda) W2)` for
/// each grid weight, sorted for exceedance lookups, with all weights
/// sharing the same `(Z, W1, W2)` draws (common random numbers).
#[derive(Debug, Clone)]
pub struct LambdaTable {
    pub lambdas: Vec<f64>,
    sorted_stats: Vec<Vec<f64>>,
    pub n_rep: usize,
}

impl LambdaTable {
    pub fn build(df1: f64, df2: f64, lambdas: &[f64], mc: &McConfig) -> Result<Self> {
        mc.validate()?;
        if lambdas.is_empty() {
            return Err(ImError::invalid_parameter("empty mixing-weight grid"));
        }
        let mut rng = mc.substream(0);
        let chi1 = rand_distr::ChiSquared::new(df1)
            .map_err(|e| ImError::invalid_parameter(format!("bad degrees of freedom: {e}")))?;
        let chi2 = rand_distr::ChiSquared::new(df2)
            .map_err(|e| ImError::invalid_parameter(format!("bad degrees of freedom: {e}")))?;
        let draws: Vec<(f64, f64, f64)> = (0..mc.n_rep)
            .map(|_| {
                let z: f64 = rand_distr::StandardNormal.sample(&mut rng);
                let w1 = chi1.sample(&mut rng) / df1;
                let w2 = chi2.sample(&mut rng) / df2;
                (z.abs(), w1, w2)
            })
            .collect();
        let sorted_stats = lambdas
            .iter()
            .map(|&l| {
                let mut col: Vec<f64> = draws
                    .iter()
                    .map(|&(z, w1, w2)| z / (l * w1 + (1.0 - l) * w2).sqrt())
                    .collect();
                col.sort_by(|a, b| a.total_cmp(b));
                col
            })
            .collect();
        Ok(LambdaTable {
            lambdas: lambdas.to_vec(),
            sorted_stats,
            n_rep: mc.n_rep,
        })
    }

    /// Exceedance probability of `threshold` under grid weight `i`.
    pub fn exceed(&self, i: usize, threshold: f64) -> f64 {
        exceedance(&self.sorted_stats[i], threshold)
    }

    /// Index of the grid weight closest to `lambda`.
    pub fn nearest(&self, lambda: f64) -> usize {
        self.lambdas
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - lambda).abs().total_cmp(&(b.1 - lambda).abs()))
            .map(|(i, _)| i)
            .expect("nonempty grid")
    }
}

/// Add-one exceedance estimate: the observed value counts as one extra
/// null draw, so the estimate is strictly positive and the induced p-value
/// satisfies `P(p <= a) <= a` exactly at every level.
fn exceedance(sorted: &[f64], threshold: f64) -> f64 {
    let at_or_above = sorted.len() - sorted.partition_point(|&v| v < threshold);
    (at_or_above + 1) as f64 / (sorted.len() + 1) as f64
}

/// The travel-times illustration data.
pub fn travel_times_setup() -> BehrensFisherSetup {
    BehrensFisherSetup::new(5, 11, 7.580, 6.136, 2.237, 0.073).expect("valid summary data")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Reference 95% interval for the travel-times data.
    const HS95_LO: f64 = -0.42683036219748982;
    const HS95_HI: f64 = 3.3148303621974895;

    #[test]
    fn interval_matches_reference_endpoints() {
        let s = travel_times_setup();
        let (lo, hi) = s.hs_interval(0.05).unwrap();
        assert_abs_diff_eq!(lo, HS95_LO, epsilon = 1e-9);
        assert_abs_diff_eq!(hi, HS95_HI, epsilon = 1e-9);
        assert_eq!(s.df(), 4.0);
    }

    #[test]
    fn index_peaks_at_observed_difference() {
        let s = travel_times_setup();
        assert_abs_diff_eq!(s.hs_index(s.d()), 1.0, epsilon = 1e-12);
        // Interval endpoints carry index alpha.
        assert_abs_diff_eq!(s.hs_index(HS95_LO), 0.05, epsilon = 1e-9);
    }

    #[test]
    fn marginal_is_one_at_observed_difference() {
        let s = travel_times_setup();
        let table = s.table(&McConfig::new(2_000, 31)).unwrap();
        let marginal = s.im_marginal_contour(&table);
        assert_eq!(marginal.eval1(s.d()), 1.0);
    }

    #[test]
    fn lambda_contours_never_exceed_input_index() {
        let s = travel_times_setup();
        let table = s.table(&McConfig::new(2_000, 31)).unwrap();
        for gi in [0, 10, 20, 30, 40] {
            let c = s.lambda_contour(&table, gi);
            for &phi in &[-0.5, 0.5, 1.444, 2.5, 3.5] {
                assert!(c.eval1(phi) <= s.hs_index(phi) + 1e-12);
            }
        }
    }

    #[test]
    fn marginal_recovers_input_within_mc_error() {
        let s = travel_times_setup();
        let mc = McConfig::new(10_000, 31);
        let table = s.table(&mc).unwrap();
        let marginal = s.im_marginal_contour(&table);
        for &phi in &[-0.4, 0.2, 0.9, 2.0, 3.0, 3.3] {
            let hs = s.hs_index(phi);
            let got = marginal.eval1(phi);
            let tol = 3.0 * mc.proportion_stderr(hs).max(1e-4);
            assert!(
                (got - hs).abs() <= tol,
                "phi={phi}: marginal {got} vs input {hs} (tol {tol})"
            );
        }
    }

    #[test]
    fn extreme_weight_matches_smaller_sample_t() {
        // All weight on the chi-square with the smaller degrees of freedom
        // reproduces the reference t distribution exactly.
        let s = travel_times_setup();
        let mc = McConfig::new(20_000, 77);
        let table = s.table(&mc).unwrap();
        let gi = s.lambda_grid.len() - 1; // lambda = 1 -> W1 (df 4)
        assert_eq!(s.lambda_grid[gi], 1.0);
        for &q in &[0.5, 1.0, 2.0] {
            let expect = 2.0 * (1.0 - student_t_cdf(q, 4.0));
            assert_abs_diff_eq!(table.exceed(gi, q), expect, epsilon = 0.015);
        }
    }

    #[test]
    fn lambda_of_spans_unit_interval() {
        let s = travel_times_setup();
        assert!(s.lambda_of(1.0, 1e-9) > 0.999);
        assert!(s.lambda_of(1e-9, 1.0) < 1e-6);
        // Equal per-mean variances: s1^2 / n1 == s2^2 / n2.
        let mid = s.lambda_of(5.0, 11.0);
        assert_abs_diff_eq!(mid, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn invalid_setup_rejected() {
        assert!(BehrensFisherSetup::new(1, 5, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(BehrensFisherSetup::new(5, 5, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(travel_times_setup()
            .with_lambda_grid(vec![0.2, 1.4])
            .is_err());
    }
}
