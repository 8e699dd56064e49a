//! Split-ratio test of a nonincreasing density on the positive half-line,
//! with a plug-in plausibility recalibration.
//!
//! The null likelihood is maximised by the monotone-density estimate on the
//! evaluation half; the alternative is a log-scale kernel estimate fitted
//! to the estimation half.  The plug-in plausibility evaluates the index of
//! the full-data monotone fit and recalibrates it by resampling from that
//! fit.  Because the full-data fit is itself a monotone density, its
//! evaluation-half likelihood can never beat the evaluation-half maximiser,
//! so the plug-in index — and with it the recalibrated plausibility — is
//! bounded by the split-ratio p-value replicate by replicate.

use super::grenander::fit_grenander;
use super::kde::fit_log_kde;
use super::slr::SplitSpec;
use crate::error::ImError;
use crate::nonparametric::EmpiricalSample;
use crate::rng::McConfig;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// Plausibilities at least this close to one are reported as exactly one.
const NEAR_ONE: f64 = 1.0 - 1e-9;

/// Minimum observations for a meaningful split fit on each half.
const MIN_N: usize = 4;

/// Split-ratio outcome for the monotone-density null.
#[derive(Debug, Clone)]
pub struct MonotoneSlr {
    /// Best monotone log likelihood on the evaluation half.
    pub log_num: f64,
    /// Kernel-estimate log likelihood on the evaluation half.
    pub log_den: f64,
    /// Split-ratio p-value `min(1, exp(log_num - log_den))`.
    pub p_value: f64,
}

impl MonotoneSlr {
    /// Log of the unclamped likelihood ratio.
    pub fn log_ratio(&self) -> f64 {
        self.log_num - self.log_den
    }
}

fn checked_halves(data: &[f64], split: &SplitSpec) -> Result<(Vec<f64>, Vec<f64>), ImError> {
    if data.len() < MIN_N {
        return Err(ImError::invalid_data(format!(
            "the monotonicity test requires at least {MIN_N} observations, got {}",
            data.len()
        )));
    }
    split.split(data)
}

/// Computes the split-ratio statistic: the evaluation-half monotone
/// maximum likelihood against the estimation-half kernel fit, both scored
/// on the evaluation half.
pub fn monotone_slr(data: &[f64], split: &SplitSpec) -> Result<MonotoneSlr, ImError> {
    let (d1, d2) = checked_halves(data, split)?;
    let s1 = EmpiricalSample::new(&d1)?;
    let s2 = EmpiricalSample::new(&d2)?;
    let null = fit_grenander(&s1)?;
    let alt = fit_log_kde(&s2)?;
    let log_num = null.log_likelihood(&d1);
    let log_den = alt.log_likelihood(&d1);
    Ok(MonotoneSlr {
        log_num,
        log_den,
        p_value: (log_num - log_den).exp().min(1.0),
    })
}

/// Plug-in recalibration of the monotone-density plausibility.
#[derive(Debug, Clone)]
pub struct MonotonePlugIn {
    /// Index of the full-data monotone fit in the nested test family.
    pub alpha_obs: f64,
    /// Recalibrated plausibility of the monotone null.
    pub plausibility: f64,
    /// Resampling replicates used (zero when the index saturates at one).
    pub n_rep: usize,
}

/// Evaluates the plug-in plausibility of the monotone-density null.
///
/// The plug-in index scores the full-data monotone fit on the evaluation
/// half against the estimation-half kernel fit.  When the index saturates
/// at one the fit lies in every focal set and the plausibility is one with
/// no simulation.  Otherwise data are resampled from the full-data fit,
/// the split statistic is recomputed per replicate, and the plausibility
/// is the fraction of replicates falling below the index — clamped by the
/// index and by the split-ratio p-value so that simulation noise can never
/// break either analytic bound.
pub fn monotone_plugin(
    data: &[f64],
    split: &SplitSpec,
    mc: &McConfig,
) -> Result<MonotonePlugIn, ImError> {
    let (d1, _d2) = checked_halves(data, split)?;
    let slr = monotone_slr(data, split)?;
    let full = EmpiricalSample::new(data)?;
    let full_fit = fit_grenander(&full)?;
    let kde_d2 = {
        let (_, d2) = split.split(data)?;
        fit_log_kde(&EmpiricalSample::new(&d2)?)?
    };
    let log_plug = full_fit.log_likelihood(&d1);
    let alpha_obs = (log_plug - kde_d2.log_likelihood(&d1)).exp().min(1.0);
    if alpha_obs >= NEAR_ONE {
        return Ok(MonotonePlugIn {
            alpha_obs: 1.0,
            plausibility: 1.0,
            n_rep: 0,
        });
    }
    mc.validate()?;
    let log_alpha = alpha_obs.ln();
    let n = data.len();
    let mut misses = 0usize;
    for rep in 0..mc.n_rep {
        let mut rng = mc.substream(rep as u64);
        let resampled: Vec<f64> = (0..n).map(|_| full_fit.sample(&mut rng)).collect();
        let stat = monotone_slr(&resampled, split).map_err(|e| ImError::ReplicateFitFailure {
            replicate: rep,
            detail: e.to_string(),
        })?;
        if stat.log_ratio() < log_alpha {
            misses += 1;
        }
    }
    let estimate = misses as f64 / mc.n_rep as f64;
    Ok(MonotonePlugIn {
        alpha_obs,
        plausibility: estimate.min(alpha_obs).min(slr.p_value),
        n_rep: mc.n_rep,
    })
}

/// Joint outcome of the split-ratio test and the plug-in plausibility test.
#[derive(Debug, Clone)]
pub struct MonotoneTestOutcome {
    /// Split-ratio p-value.
    pub slr_p: f64,
    /// Plug-in index of the full-data monotone fit.
    pub alpha_obs: f64,
    /// Recalibrated plausibility of the null.
    pub plausibility: f64,
    /// Whether the split-ratio test rejects at the requested level.
    pub slr_reject: bool,
    /// Whether the plausibility test rejects at the requested level.
    pub im_reject: bool,
    /// Level both tests were run at.
    pub alpha: f64,
    /// Always true: the plausibility is the plug-in approximation.
    pub plug_in: bool,
}

/// Runs the split-ratio test and the plug-in plausibility test of the
/// monotone-density null.
///
/// Only the plug-in plausibility is available: maximising the plausibility
/// over every monotone-density distribution is out of scope, so
/// `plug_in = false` is rejected rather than silently approximated.
pub fn monotonicity_test(
    data: &[f64],
    split: &SplitSpec,
    alpha: f64,
    mc: &McConfig,
    plug_in: bool,
) -> Result<MonotoneTestOutcome, ImError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ImError::invalid_parameter(
            "test level must lie strictly between zero and one",
        ));
    }
    if !plug_in {
        return Err(ImError::invalid_parameter(
            "maximising the plausibility over all monotone densities is not supported; \
             enable the plug-in evaluation",
        ));
    }
    let slr = monotone_slr(data, split)?;
    let plug = monotone_plugin(data, split, mc)?;
    Ok(MonotoneTestOutcome {
        slr_p: slr.p_value,
        alpha_obs: plug.alpha_obs,
        plausibility: plug.plausibility,
        slr_reject: slr.p_value < alpha,
        im_reject: plug.plausibility < alpha,
        alpha,
        plug_in: true,
    })
}

/// One draw of size `n` from a gamma distribution with the given shape and
/// unit rate: shape one is the monotone (exponential) null; larger shapes
/// are unimodal alternatives.
pub fn sample_gamma<R: Rng + ?Sized>(
    n: usize,
    shape: f64,
    rng: &mut R,
) -> Result<Vec<f64>, ImError> {
    let gamma = Gamma::new(shape, 1.0)
        .map_err(|e| ImError::invalid_parameter(format!("gamma shape rejected: {e}")))?;
    Ok((0..n).map(|_| gamma.sample(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma_data(n: usize, shape: f64, seed: u64) -> Vec<f64> {
        let mut rng = crate::rng::substream(seed, 0);
        sample_gamma(n, shape, &mut rng).unwrap()
    }

    #[test]
    fn plug_in_index_never_beats_the_split_ratio_p_value() {
        let split = SplitSpec::first_half(60).unwrap();
        for seed in [1, 2, 3, 4, 5] {
            let data = gamma_data(60, 2.5, seed);
            let slr = monotone_slr(&data, &split).unwrap();
            let plug = monotone_plugin(&data, &split, &McConfig::new(50, seed)).unwrap();
            assert!(
                plug.alpha_obs <= slr.p_value + 1e-12,
                "evaluation-half maximiser must dominate the full-data fit"
            );
            assert!(plug.plausibility <= plug.alpha_obs + 1e-15);
        }
    }

    #[test]
    fn exponential_data_keeps_high_plausibility() {
        let split = SplitSpec::first_half(120).unwrap();
        let data = gamma_data(120, 1.0, 10);
        let out = monotonicity_test(&data, &split, 0.05, &McConfig::new(400, 11), true).unwrap();
        assert!(
            out.plausibility >= 0.2,
            "a monotone truth should not be implausible, got {}",
            out.plausibility
        );
        assert!(!out.slr_reject);
        assert!(!out.im_reject);
    }

    #[test]
    fn saturated_index_skips_simulation() {
        // Hunt a seed whose full-data fit saturates the index; with
        // monotone truth this is the common case.
        let split = SplitSpec::first_half(80).unwrap();
        let mut found = false;
        for seed in 0..20 {
            let data = gamma_data(80, 1.0, seed);
            let plug = monotone_plugin(&data, &split, &McConfig::new(10, 1)).unwrap();
            if plug.alpha_obs == 1.0 {
                assert_eq!(plug.plausibility, 1.0);
                assert_eq!(plug.n_rep, 0);
                found = true;
                break;
            }
        }
        assert!(found, "no saturated replicate among twenty seeds");
    }

    #[test]
    fn clearly_unimodal_data_is_implausible() {
        let split = SplitSpec::first_half(300).unwrap();
        let data = gamma_data(300, 4.0, 77);
        let out = monotonicity_test(&data, &split, 0.05, &McConfig::new(400, 78), true).unwrap();
        assert!(
            out.plausibility < 0.05,
            "shape-four gamma at n = 300 should be firmly rejected, got {}",
            out.plausibility
        );
        assert!(out.im_reject);
    }

    #[test]
    fn rejection_dominates_replicate_by_replicate() {
        let split = SplitSpec::first_half(80).unwrap();
        for rep in 0..25u64 {
            let data = gamma_data(80, 2.5, 1000 + rep);
            let out = monotonicity_test(&data, &split, 0.05, &McConfig::new(200, 2000 + rep), true)
                .unwrap();
            assert!(out.plausibility <= out.slr_p + 1e-15);
            if out.slr_reject {
                assert!(out.im_reject, "recalibration must not undo a rejection");
            }
        }
    }

    #[test]
    fn preconditions_are_enforced() {
        let split = SplitSpec::first_half(4).unwrap();
        let short = vec![1.0, 2.0, 0.5];
        assert!(monotone_slr(&short, &SplitSpec::first_half(4).unwrap()).is_err());
        let neg = vec![1.0, -2.0, 0.5, 3.0];
        assert!(monotone_slr(&neg, &split).is_err());
        let ok = vec![1.0, 2.0, 0.5, 3.0];
        assert!(monotonicity_test(&ok, &split, 0.05, &McConfig::new(10, 1), false).is_err());
        assert!(monotonicity_test(&ok, &split, 1.0, &McConfig::new(10, 1), true).is_err());
    }
}
