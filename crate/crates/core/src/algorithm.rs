//! Conversion of existing procedures into plausibility-based inference.
//!
//! Given a nested confidence family (or a nested family of tests) together
//! with an association for the sampling model, this module builds the focal
//! family on the auxiliary space, the level index `alpha(x, theta)`, and the
//! fused plausibility contour. The construction never widens the input: the
//! output's level sets sit inside the input regions, and the output test
//! rejects whenever the input test does.

use std::sync::Arc;

use crate::association::Association;
use crate::contour::{Assertion, Contour, Domain};
use crate::error::Result;
use crate::procedure::{ConfidenceFamily, TestFamily};
use crate::random_set::{self, fused_contour, FocalFamily, IndexAlpha, IndexFn};
use crate::rng::McConfig;
use crate::search;

/// Feature of interest `phi(theta)` targeted by a confidence family.
#[derive(Clone)]
pub struct FeatureMap {
    map: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl FeatureMap {
    pub fn new(map: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        FeatureMap { map: Arc::new(map) }
    }

    /// The full parameter itself.
    pub fn identity() -> Self {
        FeatureMap::new(|theta: &[f64]| theta.to_vec())
    }

    /// A single coordinate of the parameter.
    pub fn coordinate(i: usize) -> Self {
        FeatureMap::new(move |theta: &[f64]| vec![theta[i]])
    }

    pub fn apply(&self, theta: &[f64]) -> Vec<f64> {
        (self.map)(theta)
    }
}

/// Focal family induced by a confidence family: `u` belongs to
/// `S_alpha(theta)` when the level-`alpha` region at the synthetic data
/// `a(theta, u)` contains the feature `phi(theta)`.
///
/// Topological closure of the focal sets is realized by using non-strict
/// inequalities inside the region membership itself, which all built-in
/// families do.
pub fn focal_from_confidence(
    family: &ConfidenceFamily,
    assoc: &Association,
    feature: &FeatureMap,
) -> FocalFamily {
    let family = family.clone();
    let assoc = assoc.clone();
    let feature = feature.clone();
    FocalFamily::new(move |alpha, theta: &[f64], u: &[f64]| {
        let x = assoc.forward(theta, u);
        family.contains(alpha, &x, &feature.apply(theta))
    })
}

/// Focal family induced by a test family: `u` belongs to `S_alpha(theta)`
/// when the level-`alpha` test accepts the synthetic data `a(theta, u)`.
///
/// The sets are only meaningful for `theta` in the null set; queries outside
/// it are asserted against in debug builds.
pub fn focal_from_test(test: &TestFamily, assoc: &Association, null: Assertion) -> FocalFamily {
    let test = test.clone();
    let assoc = assoc.clone();
    FocalFamily::new(move |alpha, theta: &[f64], u: &[f64]| {
        debug_assert!(
            null.contains(theta),
            "focal family from a test queried outside the null set"
        );
        let x = assoc.forward(theta, u);
        !test.rejects(alpha, &x)
    })
}

/// Level index `alpha(x, theta)`: the largest level at which the focal set
/// still meets the data fiber, located by bisection at the model-supplied
/// fiber representative.
///
/// Built-in associations guarantee the representative attains the supremum
/// over the fiber (the fiber is a single point after reduction, or the
/// membership is constant across it). A representative outside the fiber
/// means the fiber is empty and the index is undefined; the flag on the
/// result records that. A nonempty fiber missed by every focal set yields
/// index zero without the flag.
pub fn index_alpha(
    focal: &FocalFamily,
    assoc: &Association,
    x: &[f64],
    theta: &[f64],
) -> IndexAlpha {
    let u = assoc.fiber_representative(x, theta);
    if !assoc.in_u_fiber(x, theta, &u) {
        return IndexAlpha::empty_fiber();
    }
    let member = |alpha: f64| focal.contains(alpha, theta, &u);
    if member(1.0 - 1e-12) {
        return IndexAlpha::of(1.0);
    }
    if !member(1e-12) {
        return IndexAlpha::of(0.0);
    }
    IndexAlpha::of(search::bisect_boundary(member, 0.0, 1.0, search::LEVEL_TOL))
}

/// The level index as a reusable evaluator with the data bound.
pub fn generic_index_fn(focal: FocalFamily, assoc: Association, x: Vec<f64>) -> IndexFn {
    Arc::new(move |theta: &[f64]| index_alpha(&focal, &assoc, &x, theta))
}

/// Full conversion of a confidence family into a fused plausibility contour.
///
/// When the input's coverage is exactly the nominal level the output contour
/// reproduces the input's level index; when the input is conservative the
/// output is pointwise no larger, so its level sets sit inside the input
/// regions. A closed-form level index may be supplied to bypass the generic
/// bisection.
pub fn im_from_confidence(
    family: &ConfidenceFamily,
    assoc: &Association,
    feature: &FeatureMap,
    x: &[f64],
    domain: Domain,
    closed_form: Option<IndexFn>,
    mc: &McConfig,
) -> Result<Contour> {
    let focal = focal_from_confidence(family, assoc, feature);
    let index =
        closed_form.unwrap_or_else(|| generic_index_fn(focal.clone(), assoc.clone(), x.to_vec()));
    fused_contour(&focal, assoc, index, domain, mc)
}

/// How to take the supremum of the fused contour over a null set.
#[derive(Clone)]
pub enum NullSearch {
    /// A point null: one evaluation, no search.
    Point(Vec<f64>),
    /// Profile search over a scalar parameterization of the null set,
    /// multistarted across panels of the range.
    Profile {
        embed: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
        range: (f64, f64),
        starts: usize,
        grid_per_start: usize,
    },
    /// Plug-in shortcut: evaluate at an estimated null point instead of
    /// searching. Generally anti-conservative; flagged in the result.
    PlugIn(Vec<f64>),
}

impl NullSearch {
    pub fn point(theta: Vec<f64>) -> Self {
        NullSearch::Point(theta)
    }

    pub fn plug_in(theta: Vec<f64>) -> Self {
        NullSearch::PlugIn(theta)
    }

    pub fn profile(
        embed: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        lo: f64,
        hi: f64,
    ) -> Self {
        NullSearch::Profile {
            embed: Arc::new(embed),
            range: (lo, hi),
            starts: 8,
            grid_per_start: 16,
        }
    }
}

/// Outcome of converting a test through the plausibility construction.
#[derive(Debug, Clone)]
pub struct TestResult {
    /// Supremum of the fused contour over the null set.
    pub plausibility: f64,
    /// Rejection decision: plausibility at or below the requested level.
    pub reject: bool,
    /// The level the decision was taken at.
    pub alpha: f64,
    /// p-value of the input test at the same data.
    pub input_p_value: f64,
    /// Null point attaining the reported supremum.
    pub arg_sup: Vec<f64>,
    /// True when the plug-in shortcut replaced the null-set search.
    pub plug_in: bool,
    pub warning: Option<String>,
}

/// Convert a nested test family into a plausibility test.
///
/// For any `u` in the data fiber the synthetic data equal the observed data,
/// so the level index reduces to the input test's p-value at every null
/// point; the fused plausibility at `theta` is then the auxiliary
/// probability of rejecting at that level, truncated by the p-value itself.
/// The truncation makes the output reject whenever the input does.
pub fn im_test(
    test: &TestFamily,
    assoc: &Association,
    null: &NullSearch,
    x: &[f64],
    alpha: f64,
    mc: &McConfig,
) -> Result<TestResult> {
    mc.validate()?;
    let p_input = test.p_value(x);
    let mut rng = mc.substream(0);
    let draws: Vec<Vec<f64>> = (0..mc.n_rep).map(|_| assoc.sample_u(&mut rng)).collect();
    let point_value = |theta: &[f64]| -> f64 {
        if p_input <= 0.0 {
            return 0.0;
        }
        if p_input >= random_set::INDEX_AT_ONE {
            // The fiber meets every focal set; the level-index atom at one
            // forces full plausibility regardless of how conservative the
            // input test is.
            return 1.0;
        }
        let accepts = draws
            .iter()
            .filter(|u| !test.rejects(p_input, &assoc.forward(theta, u)))
            .count();
        let coverage = accepts as f64 / mc.n_rep as f64;
        (1.0 - coverage).min(p_input).max(0.0)
    };
    let (arg_sup, plausibility, plug_in) = match null {
        NullSearch::Point(theta) => (theta.clone(), point_value(theta), false),
        NullSearch::PlugIn(theta) => (theta.clone(), point_value(theta), true),
        NullSearch::Profile {
            embed,
            range,
            starts,
            grid_per_start,
        } => {
            let f = |t: f64| point_value(&embed(t));
            let (t_best, v) = search::multistart_max(f, range.0, range.1, *starts, *grid_per_start);
            (embed(t_best), v, false)
        }
    };
    let warning = if plausibility.is_finite() {
        None
    } else {
        Some("null-set search produced a non-finite supremum".to_string())
    };
    let plausibility = if plausibility.is_finite() {
        plausibility
    } else {
        0.0
    };
    Ok(TestResult {
        plausibility,
        reject: plausibility <= alpha,
        alpha,
        input_p_value: p_input,
        arg_sup,
        plug_in,
        warning,
    })
}

/// One probed combination in a compatibility report.
#[derive(Debug, Clone)]
pub struct CompatibilityEntry {
    pub x_index: usize,
    pub theta: Vec<f64>,
    pub alpha: f64,
    pub pass: bool,
}

/// Report from [`compatibility_check`].
#[derive(Debug, Clone)]
pub struct CompatibilityReport {
    pub entries: Vec<CompatibilityEntry>,
    pub pass: bool,
}

/// Probe whether each focal set contains an auxiliary value whose parameter
/// fiber at the observed data is nonempty — the condition for the fused
/// contour to peak at one.
///
/// Candidate auxiliaries come from two sources: fiber representatives of the
/// observed data at each probed parameter (these have nonempty parameter
/// fibers by construction, and cover fibers that are too thin to hit by
/// sampling) and plain Monte Carlo draws.
pub fn compatibility_check(
    focal: &FocalFamily,
    assoc: &Association,
    x_probes: &[Vec<f64>],
    theta_probes: &[Vec<f64>],
    alpha_grid: &[f64],
    mc: &McConfig,
) -> Result<CompatibilityReport> {
    mc.validate()?;
    let mut rng = mc.substream(0);
    let samples: Vec<Vec<f64>> = (0..mc.n_rep).map(|_| assoc.sample_u(&mut rng)).collect();
    let mut entries = Vec::new();
    for (xi, x) in x_probes.iter().enumerate() {
        let candidates: Vec<Vec<f64>> = theta_probes
            .iter()
            .map(|t| assoc.fiber_representative(x, t))
            .filter(|u| assoc.theta_fiber_nonempty(x, u))
            .collect();
        for theta in theta_probes {
            for &alpha in alpha_grid {
                let found = candidates
                    .iter()
                    .chain(samples.iter())
                    .any(|u| focal.contains(alpha, theta, u) && assoc.theta_fiber_nonempty(x, u));
                entries.push(CompatibilityEntry {
                    x_index: xi,
                    theta: theta.clone(),
                    alpha,
                    pass: found,
                });
            }
        }
    }
    let pass = entries.iter().all(|e| e.pass);
    Ok(CompatibilityReport { entries, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::{builtin_association, AssociationKind};
    use crate::dist::{noncentral_chi_squared_cdf, std_normal_cdf, BinomialDist};
    use approx::assert_abs_diff_eq;

    #[test]
    fn confidence_focal_set_is_parameter_free_for_location_pivot() {
        // The z-interval region at a(theta, u) contains theta exactly when
        // |mean(u)| clears the z threshold, whatever theta is.
        let n = 4;
        let assoc = builtin_association(AssociationKind::NormalLocation { n }).unwrap();
        let focal = focal_from_confidence(
            &ConfidenceFamily::z_interval(n),
            &assoc,
            &FeatureMap::identity(),
        );
        let u = vec![0.3, -0.1, 0.2, 0.1];
        let ubar = u.iter().sum::<f64>() / n as f64;
        for &alpha in &[0.05, 0.3, 0.8] {
            let z = crate::dist::std_normal_quantile(1.0 - alpha / 2.0);
            let expect = ubar.abs() <= z / (n as f64).sqrt();
            assert_eq!(focal.contains(alpha, &[0.0], &u), expect);
            assert_eq!(focal.contains(alpha, &[5.0], &u), expect);
        }
    }

    #[test]
    fn test_focal_set_at_level_zero_is_everything() {
        let n = 3;
        let assoc = builtin_association(AssociationKind::NormalLocation { n }).unwrap();
        let test = TestFamily::new(|alpha, x: &[f64]| {
            let z = (3f64).sqrt() * x.iter().sum::<f64>() / 3.0;
            z.abs() > crate::dist::std_normal_quantile(1.0 - alpha / 2.0)
        });
        let focal = focal_from_test(&test, &assoc, Assertion::new(|t: &[f64]| t[0] == 0.0));
        let mut rng = crate::rng::substream(3, 0);
        for _ in 0..20 {
            let u = assoc.sample_u(&mut rng);
            assert!(focal.contains(0.0, &[0.0], &u));
        }
    }

    #[test]
    fn generic_index_matches_two_sided_z_form() {
        let n = 4;
        let assoc = builtin_association(AssociationKind::NormalLocation { n }).unwrap();
        let focal = focal_from_confidence(
            &ConfidenceFamily::z_interval(n),
            &assoc,
            &FeatureMap::identity(),
        );
        let x = vec![0.9, 0.3, 0.7, 0.5];
        let xbar = x.iter().sum::<f64>() / n as f64;
        for &theta in &[0.0, 0.4, 1.3] {
            let idx = index_alpha(&focal, &assoc, &x, &[theta]);
            let expect = 2.0 * (1.0 - std_normal_cdf((n as f64).sqrt() * (xbar - theta).abs()));
            assert!(!idx.fiber_empty);
            assert_abs_diff_eq!(idx.alpha, expect, epsilon = 1e-6);
        }
        // At the sample mean the index is one.
        let idx = index_alpha(&focal, &assoc, &x, &[xbar]);
        assert_abs_diff_eq!(idx.alpha, 1.0, epsilon = 1e-7);
    }

    #[test]
    fn generic_index_matches_equal_tail_binomial_form() {
        let n = 25u64;
        let assoc = builtin_association(AssociationKind::BinomialQuantile { n }).unwrap();
        let focal = focal_from_confidence(
            &ConfidenceFamily::binomial_equal_tail(n),
            &assoc,
            &FeatureMap::identity(),
        );
        let x = vec![17.0];
        for &theta in &[0.5, 0.68, 0.8] {
            let d = BinomialDist::new(n, theta).unwrap();
            let expect = (2.0 * d.cdf_at(17))
                .min(2.0 * (1.0 - d.cdf_at(16)))
                .min(1.0);
            let idx = index_alpha(&focal, &assoc, &x, &[theta]);
            assert_abs_diff_eq!(idx.alpha, expect, epsilon = 1e-6);
        }
    }

    #[test]
    fn index_flags_empty_fiber() {
        // At theta = 0 a binomial count of 17 is unreachable.
        let assoc = builtin_association(AssociationKind::BinomialQuantile { n: 25 }).unwrap();
        let focal = focal_from_confidence(
            &ConfidenceFamily::binomial_equal_tail(25),
            &assoc,
            &FeatureMap::identity(),
        );
        let idx = index_alpha(&focal, &assoc, &[17.0], &[0.0]);
        assert!(idx.fiber_empty);
        assert_eq!(idx.alpha, 0.0);
    }

    #[test]
    fn exact_input_reproduces_its_own_contour() {
        let n = 4;
        let assoc = builtin_association(AssociationKind::NormalLocation { n }).unwrap();
        let x = vec![0.9, 0.3, 0.7, 0.5];
        let xbar = x.iter().sum::<f64>() / n as f64;
        let c = im_from_confidence(
            &ConfidenceFamily::z_interval(n),
            &assoc,
            &FeatureMap::identity(),
            &x,
            Domain::interval(-1.5, 2.5),
            None,
            &McConfig::new(4_000, 21),
        )
        .unwrap();
        assert!(c.warnings.is_empty(), "warnings: {:?}", c.warnings);
        for &theta in &[-0.2, 0.4, 0.61, 1.4] {
            let expect = 2.0 * (1.0 - std_normal_cdf((n as f64).sqrt() * (xbar - theta).abs()));
            assert_abs_diff_eq!(c.eval1(theta), expect, epsilon = 0.03);
            // Never above the input's level index.
            assert!(c.eval1(theta) <= expect + 1e-12);
        }
    }

    #[test]
    fn point_null_test_conversion_dominates_input() {
        let n = 4;
        let assoc = builtin_association(AssociationKind::NormalLocation { n }).unwrap();
        // Exact two-sided z test of theta = 0.
        let test = TestFamily::new(move |alpha, x: &[f64]| {
            let z = (n as f64).sqrt() * x.iter().sum::<f64>() / n as f64;
            z.abs() > crate::dist::std_normal_quantile(1.0 - alpha / 2.0)
        });
        let x = vec![1.4, 0.9, 1.2, 0.9]; // zbar = 1.1, z = 2.2
        let r = im_test(
            &test,
            &assoc,
            &NullSearch::point(vec![0.0]),
            &x,
            0.05,
            &McConfig::new(4_000, 9),
        )
        .unwrap();
        let z = (n as f64).sqrt() * 1.1;
        let p = 2.0 * (1.0 - std_normal_cdf(z));
        assert_abs_diff_eq!(r.input_p_value, p, epsilon = 1e-6);
        // Exact test: the plausibility recalibrates to the p-value itself.
        assert_abs_diff_eq!(r.plausibility, p, epsilon = 0.02);
        assert!(r.plausibility <= r.input_p_value + 1e-12);
        assert!(r.reject, "input rejects at 0.05, so the conversion must");
        assert!(!r.plug_in);
        assert!(r.warning.is_none());
    }

    #[test]
    fn profile_search_finds_least_favorable_null_point() {
        // Null: theta <= 0, data well above zero. The supremum over the
        // null sits at its boundary theta = 0.
        let n = 4;
        let assoc = builtin_association(AssociationKind::NormalLocation { n }).unwrap();
        let test = TestFamily::new(move |alpha, x: &[f64]| {
            let z = (n as f64).sqrt() * x.iter().sum::<f64>() / n as f64;
            z > crate::dist::std_normal_quantile(1.0 - alpha)
        });
        let x = vec![0.8, 0.5, 0.6, 0.5]; // xbar = 0.6, z = 1.2
        let r = im_test(
            &test,
            &assoc,
            &NullSearch::profile(|t| vec![t], -2.0, 0.0),
            &x,
            0.25,
            &McConfig::new(2_000, 13),
        )
        .unwrap();
        assert_abs_diff_eq!(r.arg_sup[0], 0.0, epsilon = 0.05);
        assert!(r.plausibility <= r.input_p_value + 1e-12);
    }

    #[test]
    fn plug_in_shortcut_is_flagged() {
        let n = 2;
        let assoc = builtin_association(AssociationKind::NormalLocation { n }).unwrap();
        let test = TestFamily::new(move |alpha, x: &[f64]| {
            let z = (n as f64).sqrt() * x.iter().sum::<f64>() / n as f64;
            z.abs() > crate::dist::std_normal_quantile(1.0 - alpha / 2.0)
        });
        let r = im_test(
            &test,
            &assoc,
            &NullSearch::plug_in(vec![0.0]),
            &[0.4, 0.2],
            0.05,
            &McConfig::new(500, 2),
        )
        .unwrap();
        assert!(r.plug_in);
    }

    #[test]
    fn compatibility_passes_for_location_model() {
        let n = 4;
        let assoc = builtin_association(AssociationKind::NormalLocation { n }).unwrap();
        let focal = focal_from_confidence(
            &ConfidenceFamily::z_interval(n),
            &assoc,
            &FeatureMap::identity(),
        );
        let x = vec![0.9, 0.3, 0.7, 0.5];
        let xbar = x.iter().sum::<f64>() / n as f64;
        let report = compatibility_check(
            &focal,
            &assoc,
            &[x],
            &[vec![xbar], vec![0.0], vec![1.0]],
            &[0.05, 0.5, 0.95],
            &McConfig::new(200, 4),
        )
        .unwrap();
        assert!(report.pass, "entries: {:?}", report.entries);
    }

    #[test]
    fn compatibility_passes_for_min_max_credible_family() {
        // Flat-prior credible intervals for the location of a unit-width
        // uniform, given the sample minimum and maximum.
        let n = 6;
        let assoc = builtin_association(AssociationKind::UniformMinMax { n }).unwrap();
        let family = ConfidenceFamily::new(|alpha, x: &[f64], theta: &[f64]| {
            let l = x[0] - (x[1] - 1.0);
            theta[0] >= x[1] - 1.0 + 0.5 * alpha * l && theta[0] <= x[0] - 0.5 * alpha * l
        });
        let focal = focal_from_confidence(&family, &assoc, &FeatureMap::identity());
        let x = vec![0.21, 0.83]; // (min, max) of a sample from theta = 0
        let center = 0.5 * (x[0] + x[1] - 1.0);
        let report = compatibility_check(
            &focal,
            &assoc,
            &[x],
            &[vec![center], vec![0.0]],
            &[0.05, 0.5, 0.9],
            &McConfig::new(200, 6),
        )
        .unwrap();
        assert!(report.pass, "entries: {:?}", report.entries);
    }

    #[test]
    fn compatibility_fails_for_one_sided_bound_at_high_level() {
        // Upper confidence bounds for a noncentrality: theta is kept while
        // the central probability of the synthetic data stays above alpha.
        // Every focal set at level alpha consists of auxiliaries above
        // alpha, but parameter fibers are empty above the central CDF, so
        // the condition fails exactly when that CDF falls below alpha.
        let df = 1.0;
        let assoc = builtin_association(AssociationKind::NoncentralChiSquared { df }).unwrap();
        let family = ConfidenceFamily::new(move |alpha, x: &[f64], theta: &[f64]| {
            noncentral_chi_squared_cdf(x[0], df, theta[0]) >= alpha
        });
        let focal = focal_from_confidence(&family, &assoc, &FeatureMap::identity());
        let x = 0.1; // central CDF about 0.248
        let f0 = noncentral_chi_squared_cdf(x, df, 0.0);
        let thetas = vec![vec![0.0], vec![1.0]];
        let low = compatibility_check(
            &focal,
            &assoc,
            &[vec![x]],
            &thetas,
            &[0.5 * f0],
            &McConfig::new(400, 8),
        )
        .unwrap();
        assert!(low.pass);
        let high = compatibility_check(
            &focal,
            &assoc,
            &[vec![x]],
            &thetas,
            &[2.0 * f0],
            &McConfig::new(400, 8),
        )
        .unwrap();
        assert!(!high.pass);
    }
}
