//! Nonparametric plausibility for a distribution function from the
//! Kolmogorov–Smirnov distance and the Dvoretzky–Kiefer–Wolfowitz band.
//!
//! The DKW inequality turns the family of simultaneous confidence bands
//! around the empirical distribution function into a nested random set on
//! distribution space: the band at level `alpha` has half-width
//! `sqrt(log(2/alpha) / (2 n))`, so the index of a candidate distribution
//! `F` is `min(1, 2 exp(-2 n d^2))` where `d` is the sup distance between
//! `F` and the empirical cdf.  Because every band is centred at the same
//! empirical cdf, the focal family does not depend on the candidate, and the
//! fused plausibility reduces to the exact exceedance probability of the
//! Kolmogorov–Smirnov statistic at `d`, clamped by the index.

use std::sync::Arc;

use crate::error::ImError;
use crate::rng::McConfig;
use rand::Rng;

/// Sorted, finite, nonempty batch of observations with its empirical cdf.
#[derive(Debug, Clone)]
pub struct EmpiricalSample {
    sorted: Vec<f64>,
}

impl EmpiricalSample {
    /// Validates and sorts a batch of observations.
    pub fn new(data: &[f64]) -> Result<Self, ImError> {
        if data.is_empty() {
            return Err(ImError::invalid_data("empirical sample must be nonempty"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ImError::invalid_data("empirical sample must be finite"));
        }
        let mut sorted = data.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    /// True when the sample holds no observations (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Observations in nondecreasing order.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Right-continuous empirical cdf: fraction of observations `<= t`.
    pub fn ecdf(&self, t: f64) -> f64 {
        let count = self.sorted.partition_point(|&v| v <= t);
        count as f64 / self.sorted.len() as f64
    }

    /// Left limit of the empirical cdf: fraction of observations `< t`.
    pub fn ecdf_left(&self, t: f64) -> f64 {
        let count = self.sorted.partition_point(|&v| v < t);
        count as f64 / self.sorted.len() as f64
    }

    /// Wraps the empirical cdf as a distribution handle, including its left
    /// limits so that distances to step functions are computed exactly.
    pub fn ecdf_handle(&self) -> DistributionHandle {
        let right = self.clone();
        let left = self.clone();
        DistributionHandle {
            kind: HandleKind::Ecdf,
            cdf: Arc::new(move |t| right.ecdf(t)),
            cdf_left: Some(Arc::new(move |t| left.ecdf_left(t))),
        }
    }

    /// Sup distance between the empirical cdf and a candidate cdf.
    ///
    /// The supremum over the whole line is attained at a jump of one of the
    /// two functions, so it suffices to compare the two one-sided limits at
    /// each distinct observed value.  For a continuous candidate the left
    /// limit coincides with the value and this is the classical two-sided
    /// candidate list; for a step candidate (another empirical cdf) the left
    /// limits keep the distance exact — in particular the distance from a
    /// sample to its own empirical cdf is zero.
    pub fn ks_distance(&self, f: &DistributionHandle) -> f64 {
        self.ks_distance_impl(|t| (f.cdf)(t), |t| f.cdf_left(t))
    }

    /// Sup distance to a continuous candidate cdf given as a closure.
    pub fn ks_distance_to(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        self.ks_distance_impl(&cdf, &cdf)
    }

    fn ks_distance_impl(&self, f_value: impl Fn(f64) -> f64, f_left: impl Fn(f64) -> f64) -> f64 {
        let n = self.sorted.len() as f64;
        let mut best = 0.0f64;
        let mut i = 0;
        while i < self.sorted.len() {
            let v = self.sorted[i];
            let mut j = i;
            while j < self.sorted.len() && self.sorted[j] == v {
                j += 1;
            }
            let before = i as f64 / n;
            let at = j as f64 / n;
            best = best
                .max((f_value(v) - at).abs())
                .max((f_left(v) - before).abs());
            i = j;
        }
        best
    }
}

/// How a candidate distribution was produced, recorded for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HandleKind {
    /// A fully specified parametric cdf.
    Parametric,
    /// An empirical cdf of some sample.
    Ecdf,
    /// A monotone-density (least-concave-majorant) estimate.
    Grenander,
    /// A kernel density estimate.
    Kde,
}

/// A candidate distribution function presented as evaluable closures.
#[derive(Clone)]
pub struct DistributionHandle {
    /// Provenance tag for reports.
    pub kind: HandleKind,
    /// Right-continuous cdf.
    pub cdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Left limits of the cdf; `None` means the cdf is continuous and the
    /// left limit equals the value.
    pub cdf_left: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl DistributionHandle {
    /// Wraps a continuous cdf.
    pub fn continuous(cdf: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            kind: HandleKind::Parametric,
            cdf: Arc::new(cdf),
            cdf_left: None,
        }
    }

    /// Left limit of the cdf at `t`.
    pub fn cdf_left(&self, t: f64) -> f64 {
        match &self.cdf_left {
            Some(f) => f(t),
            None => (self.cdf)(t),
        }
    }
}

impl std::fmt::Debug for DistributionHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DistributionHandle")
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

/// Half-width of the level-`alpha` DKW confidence band for `n` observations.
///
/// Requires `alpha` strictly between zero and one; the endpoints give an
/// empty or unbounded band.
pub fn dkw_halfwidth(n: usize, alpha: f64) -> Result<f64, ImError> {
    if n == 0 {
        return Err(ImError::invalid_parameter(
            "band requires at least one observation",
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ImError::invalid_parameter(
            "band level must lie strictly between zero and one",
        ));
    }
    Ok(((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt())
}

/// A simultaneous confidence band around an empirical cdf, clamped to [0, 1].
#[derive(Debug, Clone)]
pub struct DkwBand {
    sample: EmpiricalSample,
    halfwidth: f64,
    level: f64,
}

impl DkwBand {
    /// Builds the level-`alpha` band around the empirical cdf of `sample`.
    pub fn new(sample: &EmpiricalSample, alpha: f64) -> Result<Self, ImError> {
        let halfwidth = dkw_halfwidth(sample.len(), alpha)?;
        Ok(Self {
            sample: sample.clone(),
            halfwidth,
            level: alpha,
        })
    }

    /// Band half-width.
    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    /// Nominal level of the band.
    pub fn level(&self) -> f64 {
        self.level
    }

    /// Lower and upper band edges at `t`.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let e = self.sample.ecdf(t);
        ((e - self.halfwidth).max(0.0), (e + self.halfwidth).min(1.0))
    }

    /// Rows `(t, lower, upper, ecdf)` at each distinct observed value, for
    /// tabular export.
    pub fn rows(&self) -> Vec<(f64, f64, f64, f64)> {
        let mut rows = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for &v in self.sample.sorted() {
            if v == last {
                continue;
            }
            last = v;
            let (lo, hi) = self.at(v);
            rows.push((v, lo, hi, self.sample.ecdf(v)));
        }
        rows
    }
}

/// Monte Carlo reference table for the null Kolmogorov–Smirnov statistic at
/// sample size `n`, used to recalibrate band membership into an exact
/// exceedance probability.
#[derive(Debug, Clone)]
pub struct KsNullTable {
    n: usize,
    sorted_stats: Vec<f64>,
}

impl KsNullTable {
    /// Simulates `mc.n_rep` null KS statistics for samples of size `n`.
    pub fn build(n: usize, mc: &McConfig) -> Result<Self, ImError> {
        if n == 0 {
            return Err(ImError::invalid_parameter(
                "table requires a positive sample size",
            ));
        }
        mc.validate()?;
        let mut rng = mc.substream(0);
        let mut stats = Vec::with_capacity(mc.n_rep);
        let mut u = vec![0.0f64; n];
        for _ in 0..mc.n_rep {
            for slot in u.iter_mut() {
                *slot = rng.random::<f64>();
            }
            u.sort_by(f64::total_cmp);
            stats.push(crate::dist::ks_uniform_distance_sorted(&u));
        }
        stats.sort_by(f64::total_cmp);
        Ok(Self {
            n,
            sorted_stats: stats,
        })
    }

    /// Sample size the table was simulated at.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of simulated replicates.
    pub fn n_rep(&self) -> usize {
        self.sorted_stats.len()
    }

    /// Add-one estimate of the probability that the null statistic reaches
    /// `d`: the observed value counts as one extra null draw, so the
    /// estimate is strictly positive and the induced p-value satisfies
    /// `P(p <= a) <= a` exactly at every level.
    pub fn exceed(&self, d: f64) -> f64 {
        let at_or_above = self.sorted_stats.len() - self.sorted_stats.partition_point(|&v| v < d);
        (at_or_above + 1) as f64 / (self.sorted_stats.len() + 1) as f64
    }
}

/// Index of the candidate `f` in the nested band family: the largest level
/// whose band still contains `f`, namely `min(1, 2 exp(-2 n d^2))`.
pub fn dkw_index(sample: &EmpiricalSample, f: &DistributionHandle) -> f64 {
    let d = sample.ks_distance(f);
    let n = sample.len() as f64;
    (2.0 * (-2.0 * n * d * d).exp()).min(1.0)
}

/// Distance below which a candidate sits inside every band in the family.
fn full_band_distance(n: usize) -> f64 {
    (std::f64::consts::LN_2 / (2.0 * n as f64)).sqrt()
}

/// Fused plausibility of the candidate distribution `f`.
///
/// A candidate within distance `sqrt(log 2 / (2 n))` of the empirical cdf
/// lies inside every band of the family, so its plausibility is one.
/// Otherwise the plausibility is the exceedance probability of the null KS
/// statistic at the observed distance, clamped by the band index so the
/// distribution-free bound is never violated by simulation noise.
pub fn dkw_plausibility(
    sample: &EmpiricalSample,
    f: &DistributionHandle,
    table: &KsNullTable,
) -> Result<f64, ImError> {
    if table.n() != sample.len() {
        return Err(ImError::invalid_parameter(format!(
            "reference table was built for n = {} but the sample has n = {}",
            table.n(),
            sample.len()
        )));
    }
    let d = sample.ks_distance(f);
    if d <= full_band_distance(sample.len()) {
        return Ok(1.0);
    }
    let index = dkw_index(sample, f);
    Ok(table.exceed(d).min(index))
}

/// Plausibility of the monotone-density hypothesis by plugging the
/// least-concave-majorant estimate into the band family.
///
/// This evaluates the candidate plausibility at a single data-driven
/// representative rather than maximising over every monotone-density
/// distribution, so it is an informal diagnostic, not a calibrated test of
/// the full hypothesis.
pub fn grenander_plugin_plausibility(
    sample: &EmpiricalSample,
    table: &KsNullTable,
) -> Result<f64, ImError> {
    let fit = crate::universal::grenander::fit_grenander(sample)?;
    dkw_plausibility(sample, &fit.handle(), table)
}
