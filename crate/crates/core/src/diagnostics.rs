//! Monte Carlo diagnostics: validity curves against the diagonal, power
//! comparisons between paired tests, and the false-confidence
//! demonstrations that motivate working with plausibility in the first
//! place.

use crate::contour::OutputMeta;
use crate::error::ImError;
use crate::models::normal_means::{scalar_cd_abs_prob, scalar_im_abs_capacity, NormalMeans2D};
use crate::rng::McConfig;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// One standard normal draw from `rng`.
fn std_normal_draw(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Number of grid points on the unit interval for validity curves.
const ALPHA_GRID: usize = 101;

/// Empirical distribution of a plausibility (or support) statistic under a
/// fixed truth, evaluated along the diagonal.
#[derive(Debug, Clone)]
pub struct ValidityCurve {
    /// Levels `0, 0.01, ..., 1`.
    pub alphas: Vec<f64>,
    /// Estimated probability that the statistic is at most each level.
    pub g_values: Vec<f64>,
    /// Replicates behind every estimate.
    pub n_rep: usize,
    /// Base seed of the simulation.
    pub seed: u64,
    /// What was simulated, for reports.
    pub label: String,
}

impl ValidityCurve {
    /// Binomial standard error at the diagonal value of grid point `i`.
    pub fn stderr_at(&self, i: usize) -> f64 {
        let a = self.alphas[i];
        (a * (1.0 - a) / self.n_rep as f64).sqrt()
    }

    /// Rows `alpha,rate,stderr` with a metadata header.
    pub fn to_csv(&self, meta: &OutputMeta) -> String {
        let mut out = meta.header_line();
        out.push_str("alpha,rate,stderr\n");
        for i in 0..self.alphas.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.alphas[i],
                self.g_values[i],
                self.stderr_at(i)
            ));
        }
        out
    }
}

/// Simulates the statistic `sim` for `mc.n_rep` replicates (each replicate
/// gets its own substream) and tabulates its empirical cdf on the level
/// grid.
pub fn validity_curve(
    label: impl Into<String>,
    mc: &McConfig,
    sim: impl Fn(&mut ChaCha8Rng) -> f64,
) -> Result<ValidityCurve, ImError> {
    mc.validate()?;
    let values: Vec<f64> = (0..mc.n_rep)
        .map(|rep| {
            let mut rng = mc.substream(rep as u64);
            sim(&mut rng)
        })
        .collect();
    Ok(validity_curve_from_values(label, mc.seed, &values))
}

/// Tabulates the empirical cdf of already-simulated statistic values on
/// the level grid.
pub fn validity_curve_from_values(
    label: impl Into<String>,
    seed: u64,
    values: &[f64],
) -> ValidityCurve {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n_rep = sorted.len();
    let alphas: Vec<f64> = (0..ALPHA_GRID)
        .map(|i| i as f64 / (ALPHA_GRID - 1) as f64)
        .collect();
    let g_values: Vec<f64> = alphas
        .iter()
        .map(|&a| sorted.partition_point(|&v| v <= a) as f64 / n_rep as f64)
        .collect();
    ValidityCurve {
        alphas,
        g_values,
        n_rep,
        seed,
        label: label.into(),
    }
}

/// Outcome of checking a validity curve against the diagonal.
#[derive(Debug, Clone)]
pub struct DominanceReport {
    /// True when every grid point sits within three standard errors of the
    /// diagonal.
    pub pass: bool,
    /// Grid points `(alpha, rate, threshold)` that broke the bound.
    pub violations: Vec<(f64, f64, f64)>,
    /// Largest signed excess of the rate over the diagonal, in standard
    /// errors (negative when the curve stays below everywhere).
    pub worst_margin: f64,
}

/// Checks `rate(alpha) <= alpha + 3 stderr(alpha)` pointwise.
pub fn dominance_check(curve: &ValidityCurve) -> DominanceReport {
    let mut violations = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..curve.alphas.len() {
        let a = curve.alphas[i];
        let g = curve.g_values[i];
        let se = curve.stderr_at(i);
        if se > 0.0 {
            worst = worst.max((g - a) / se);
        } else {
            // Endpoints have zero binomial error; any excess is exact.
            worst = worst.max(if g > a {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            });
        }
        let threshold = a + 3.0 * se;
        if g > threshold {
            violations.push((a, g, threshold));
        }
    }
    DominanceReport {
        pass: violations.is_empty(),
        violations,
        worst_margin: worst,
    }
}

/// Power of two paired tests at one parameter value.
#[derive(Debug, Clone)]
pub struct PowerRow {
    /// Parameter value the replicates were generated at.
    pub param: f64,
    /// Rejection rate of the split-ratio test.
    pub slr_power: f64,
    /// Rejection rate of the plausibility test.
    pub im_power: f64,
    /// Replicates behind both rates.
    pub n_rep: usize,
    /// Binomial standard error at the plausibility-test rate.
    pub stderr: f64,
}

/// Power comparison along a parameter grid, with both tests decided on the
/// same replicate data.
#[derive(Debug, Clone)]
pub struct PowerCurve {
    /// One row per parameter value.
    pub rows: Vec<PowerRow>,
    /// What was compared, for reports.
    pub label: String,
    /// Base seed of the simulation.
    pub seed: u64,
}

impl PowerCurve {
    /// Rows `param_value,slr_power,im_power,n_rep,stderr` with a metadata
    /// header.
    pub fn to_csv(&self, meta: &OutputMeta) -> String {
        let mut out = meta.header_line();
        out.push_str("param_value,slr_power,im_power,n_rep,stderr\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.param, r.slr_power, r.im_power, r.n_rep, r.stderr
            ));
        }
        out
    }
}

/// Runs `mc.n_rep` paired replicates at every parameter value; `run`
/// returns the two rejection indicators `(slr, im)` for one replicate.
/// Replicate substreams are indexed so that no two (parameter, replicate)
/// pairs share a stream.
pub fn power_curve(
    label: impl Into<String>,
    params: &[f64],
    mc: &McConfig,
    run: impl Fn(f64, &mut ChaCha8Rng) -> Result<(bool, bool), ImError>,
) -> Result<PowerCurve, ImError> {
    if params.is_empty() {
        return Err(ImError::invalid_parameter(
            "power comparison requires at least one parameter value",
        ));
    }
    mc.validate()?;
    let mut rows = Vec::with_capacity(params.len());
    for (pi, &param) in params.iter().enumerate() {
        let mut slr_hits = 0usize;
        let mut im_hits = 0usize;
        for rep in 0..mc.n_rep {
            let mut rng = mc.substream((pi * mc.n_rep + rep) as u64);
            let (slr, im) = run(param, &mut rng)?;
            slr_hits += slr as usize;
            im_hits += im as usize;
        }
        let slr_power = slr_hits as f64 / mc.n_rep as f64;
        let im_power = im_hits as f64 / mc.n_rep as f64;
        rows.push(PowerRow {
            param,
            slr_power,
            im_power,
            n_rep: mc.n_rep,
            stderr: mc.proportion_stderr(im_power),
        });
    }
    Ok(PowerCurve {
        rows,
        label: label.into(),
        seed: mc.seed,
    })
}

/// Paired validity curves for the absolute-value assertion: the confidence
/// distribution's support next to the plausibility capacity, both for the
/// true assertion, under the same replicates.
#[derive(Debug, Clone)]
pub struct AbsValueDemo {
    /// Distribution of the confidence-distribution support of the truth.
    pub cd: ValidityCurve,
    /// Distribution of the plausibility capacity of the truth.
    pub im: ValidityCurve,
    /// True mean the replicates were generated at.
    pub theta: f64,
    /// Half-width of the assertion about the absolute value.
    pub bound: f64,
}

/// Simulates the absolute-value demonstration: a scalar observation
/// `X ~ N(theta, 1)` with `theta = bound = 1/2`, so the assertion
/// `|mean| <= 1/2` is true.  The confidence distribution's support of the
/// truth dips below the diagonal's complement often enough to break
/// validity; the consonant capacity never does.
pub fn abs_value_demo(mc: &McConfig) -> Result<AbsValueDemo, ImError> {
    let theta = 0.5;
    let bound = 0.5;
    let cd = validity_curve("cd-support-of-true-abs-assertion", mc, |rng| {
        let x = theta + std_normal_draw(rng);
        scalar_cd_abs_prob(x, bound)
    })?;
    let im = validity_curve("im-capacity-of-true-abs-assertion", mc, |rng| {
        let x = theta + std_normal_draw(rng);
        scalar_im_abs_capacity(x, bound)
    })?;
    Ok(AbsValueDemo {
        cd,
        im,
        theta,
        bound,
    })
}

/// Replicate-level outcome of the ratio demonstration.
#[derive(Debug, Clone)]
pub struct RatioDemo {
    /// Confidence-distribution probability of the false half-line, per
    /// replicate.
    pub cd_probs: Vec<f64>,
    /// Consonant lower probability of the same half-line, per replicate.
    pub im_lowers: Vec<f64>,
    /// Mean of `cd_probs`.
    pub mean_cd: f64,
    /// Mean of `im_lowers`.
    pub mean_im: f64,
    /// True mean vector.
    pub theta: (f64, f64),
    /// Upper endpoint of the half-line assertion about the ratio.
    pub bound: f64,
    /// Replicates in the inner confidence-distribution simulation.
    pub inner_n_rep: usize,
}

impl RatioDemo {
    /// Validity curve of the plausibility assigned to the true complement
    /// of the half-line, namely one minus the lower probability.  Validity
    /// of the consonant measure makes this curve respect the diagonal even
    /// though the confidence distribution's probabilities do not.
    pub fn true_side_curve(&self, seed: u64) -> ValidityCurve {
        let values: Vec<f64> = self.im_lowers.iter().map(|&l| 1.0 - l).collect();
        validity_curve_from_values("im-plausibility-of-true-ratio-side", seed, &values)
    }

    /// Rows `rep,cd_prob,im_lower` with a metadata header.
    pub fn to_csv(&self, meta: &OutputMeta) -> String {
        let mut out = meta.header_line();
        out.push_str("rep,cd_prob,im_lower\n");
        for (i, (c, l)) in self.cd_probs.iter().zip(&self.im_lowers).enumerate() {
            out.push_str(&format!("{i},{c},{l}\n"));
        }
        out
    }
}

/// Simulates the ratio demonstration: bivariate data around
/// `theta = (1, 0.1)`, whose mean ratio is ten, against the false
/// assertion that the ratio is at most nine.  The confidence distribution
/// pushed through the ratio assigns the false half-line nearly all its
/// mass; the consonant lower probability stays near zero.
pub fn ratio_demo(mc: &McConfig, inner_n_rep: usize) -> Result<RatioDemo, ImError> {
    mc.validate()?;
    if inner_n_rep == 0 {
        return Err(ImError::NoReplicates);
    }
    let theta = (1.0, 0.1);
    let bound = 9.0;
    let mut cd_probs = Vec::with_capacity(mc.n_rep);
    let mut im_lowers = Vec::with_capacity(mc.n_rep);
    for rep in 0..mc.n_rep {
        let mut rng = mc.substream(rep as u64);
        let m = NormalMeans2D::sample(theta, &mut rng);
        let inner = McConfig::new(inner_n_rep, mc.seed ^ (0xA5A5_0000 + rep as u64));
        cd_probs.push(m.cd_ratio_prob_upto(bound, &inner)?);
        im_lowers.push(m.ratio_lower_probability_upto(bound));
    }
    let mean_cd = cd_probs.iter().sum::<f64>() / mc.n_rep as f64;
    let mean_im = im_lowers.iter().sum::<f64>() / mc.n_rep as f64;
    Ok(RatioDemo {
        cd_probs,
        im_lowers,
        mean_cd,
        mean_im,
        theta,
        bound,
        inner_n_rep,
    })
}
