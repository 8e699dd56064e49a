//! Split-ratio test of normality against a two-component normal mixture,
//! with its recalibrated plausibility counterpart.
//!
//! The null fit is the normal maximum likelihood on the evaluation half;
//! the alternative is a two-component equal-variance mixture fitted to the
//! estimation half by EM and evaluated on the evaluation half.  Both fits
//! are equivariant under affine maps of the data, so under the null the
//! log ratio has one parameter-free distribution: a single reference table
//! simulated from standard normal samples recalibrates the conservative
//! split-ratio p-value into an exact exceedance probability, uniformly over
//! the whole null family.

use crate::error::ImError;
use crate::rng::McConfig;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Plausibilities at least this close to one are reported as exactly one.
const NEAR_ONE: f64 = 1.0 - 1e-9;

/// Relative variance floor below which a fit is declared collapsed.
const VAR_FLOOR: f64 = 1e-12;

/// EM restarts per fit.
const EM_RESTARTS: usize = 10;

/// Absolute log-likelihood tolerance for EM convergence.
const EM_TOL: f64 = 1e-8;

/// Iteration cap per EM restart.
const EM_MAX_ITER: usize = 500;

/// Normal maximum-likelihood fit.
#[derive(Debug, Clone)]
pub struct NormalFit {
    /// Fitted mean.
    pub mean: f64,
    /// Fitted variance (maximum-likelihood denominator).
    pub var: f64,
    /// Log likelihood of the fitted normal on its own data.
    pub log_lik: f64,
}

/// Fits a normal distribution by maximum likelihood.
pub fn fit_normal(data: &[f64]) -> Result<NormalFit, ImError> {
    if data.len() < 2 {
        return Err(ImError::invalid_data(
            "normal fitting requires at least two observations",
        ));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(ImError::invalid_data("observations must be finite"));
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / n;
    if var <= VAR_FLOOR {
        return Err(ImError::DegenerateFit(
            "sample variance is zero; a normal fit is degenerate".into(),
        ));
    }
    let log_lik = -0.5 * n * ((2.0 * std::f64::consts::PI * var).ln() + 1.0);
    Ok(NormalFit { mean, var, log_lik })
}

/// Log density of `x` under a normal with the given mean and variance.
fn normal_log_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let z = x - mean;
    -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + z * z / var)
}

/// Two-component equal-variance normal mixture fit.
#[derive(Debug, Clone)]
pub struct MixtureFit {
    /// Weight of the first component.
    pub weight: f64,
    /// First component mean.
    pub mu1: f64,
    /// Second component mean.
    pub mu2: f64,
    /// Common component variance.
    pub sigma_sq: f64,
    /// Log likelihood of the fit on its own data.
    pub log_lik: f64,
}

impl MixtureFit {
    /// Log density of one observation under the fitted mixture.
    pub fn log_density(&self, x: f64) -> f64 {
        let a = self.weight.ln() + normal_log_pdf(x, self.mu1, self.sigma_sq);
        let b = (1.0 - self.weight).ln() + normal_log_pdf(x, self.mu2, self.sigma_sq);
        let top = a.max(b);
        top + ((a - top).exp() + (b - top).exp()).ln()
    }

    /// Sum of log densities over `data`.
    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        data.iter().map(|&x| self.log_density(x)).sum()
    }
}

/// Runs EM from one starting point; `None` when the restart collapses.
fn em_from(
    data: &[f64],
    mut weight: f64,
    mut mu1: f64,
    mut mu2: f64,
    mut sigma_sq: f64,
    var_scale: f64,
) -> Option<MixtureFit> {
    let n = data.len() as f64;
    let mut resp = vec![0.0f64; data.len()];
    let mut last_ll = f64::NEG_INFINITY;
    for _ in 0..EM_MAX_ITER {
        // E-step: responsibility of the first component for each point.
        let mut ll = 0.0;
        for (i, &x) in data.iter().enumerate() {
            let a = weight.ln() + normal_log_pdf(x, mu1, sigma_sq);
            let b = (1.0 - weight).ln() + normal_log_pdf(x, mu2, sigma_sq);
            let top = a.max(b);
            let ea = (a - top).exp();
            let eb = (b - top).exp();
            resp[i] = ea / (ea + eb);
            ll += top + (ea + eb).ln();
        }
        if (ll - last_ll).abs() <= EM_TOL {
            last_ll = ll;
            break;
        }
        last_ll = ll;

        // M-step.
        let r1: f64 = resp.iter().sum();
        let r2 = n - r1;
        if r1 < 1e-10 || r2 < 1e-10 {
            return None;
        }
        mu1 = data.iter().zip(&resp).map(|(&x, &r)| r * x).sum::<f64>() / r1;
        mu2 = data
            .iter()
            .zip(&resp)
            .map(|(&x, &r)| (1.0 - r) * x)
            .sum::<f64>()
            / r2;
        sigma_sq = data
            .iter()
            .zip(&resp)
            .map(|(&x, &r)| r * (x - mu1).powi(2) + (1.0 - r) * (x - mu2).powi(2))
            .sum::<f64>()
            / n;
        weight = r1 / n;
        if sigma_sq <= VAR_FLOOR * var_scale {
            return None;
        }
    }
    Some(MixtureFit {
        weight,
        mu1,
        mu2,
        sigma_sq,
        log_lik: last_ll,
    })
}

/// Fits a two-component equal-variance mixture by EM with multiple
/// restarts, keeping the best final likelihood.
///
/// The first restart starts the means at the lower and upper quartiles; the
/// remaining restarts start them at random pairs of observations.
pub fn fit_mixture_em(data: &[f64], rng: &mut ChaCha8Rng) -> Result<MixtureFit, ImError> {
    if data.len() < 4 {
        return Err(ImError::invalid_data(
            "mixture fitting requires at least four observations",
        ));
    }
    let base = fit_normal(data)?;
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = p * (sorted.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(sorted.len() - 1);
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    };
    let mut best: Option<MixtureFit> = None;
    for restart in 0..EM_RESTARTS {
        let (m1, m2) = if restart == 0 {
            (q(0.25), q(0.75))
        } else {
            let i = rng.random_range(0..data.len());
            let j = rng.random_range(0..data.len());
            (data[i], data[j])
        };
        if m1 == m2 {
            continue;
        }
        if let Some(fit) = em_from(data, 0.5, m1, m2, base.var, base.var) {
            let better = match &best {
                Some(b) => fit.log_lik > b.log_lik,
                None => true,
            };
            if better {
                best = Some(fit);
            }
        }
    }
    best.ok_or_else(|| {
        ImError::DegenerateFit(
            "every EM restart collapsed; the data cannot support a mixture".into(),
        )
    })
}

/// Split-ratio outcome for the normality null.
#[derive(Debug, Clone)]
pub struct MixtureSlr {
    /// Null log likelihood on the evaluation half (at its restricted MLE).
    pub log_num: f64,
    /// Mixture log likelihood on the evaluation half (at the estimation-half fit).
    pub log_den: f64,
    /// Split-ratio p-value `min(1, exp(log_num - log_den))`.
    pub p_value: f64,
}

impl MixtureSlr {
    /// Log of the unclamped likelihood ratio.
    pub fn log_ratio(&self) -> f64 {
        self.log_num - self.log_den
    }
}

/// Computes the split-ratio statistic: normal MLE on the evaluation half
/// against an estimation-half mixture fit, both scored on the evaluation
/// half.
pub fn mixture_slr(
    data: &[f64],
    split: &super::slr::SplitSpec,
    rng: &mut ChaCha8Rng,
) -> Result<MixtureSlr, ImError> {
    let (d1, d2) = split.split(data)?;
    let null = fit_normal(&d1)?;
    let alt = fit_mixture_em(&d2, rng)?;
    let log_num = null.log_lik;
    let log_den = alt.log_likelihood(&d1);
    let p_value = (log_num - log_den).exp().min(1.0);
    Ok(MixtureSlr {
        log_num,
        log_den,
        p_value,
    })
}

/// Reference table of null log ratios, simulated once from standard normal
/// data; affine equivariance of both fits makes it serve every normal null.
#[derive(Debug, Clone)]
pub struct MixtureNullTable {
    n: usize,
    sorted_log_ratios: Vec<f64>,
}

impl MixtureNullTable {
    /// Simulates `mc.n_rep` null log ratios for samples of size `n` under
    /// `split`.
    pub fn build(n: usize, split: &super::slr::SplitSpec, mc: &McConfig) -> Result<Self, ImError> {
        if split.n() != n {
            return Err(ImError::invalid_parameter(
                "split must cover exactly the table's sample size",
            ));
        }
        mc.validate()?;
        let mut ratios = Vec::with_capacity(mc.n_rep);
        for rep in 0..mc.n_rep {
            let mut rng = mc.substream(rep as u64);
            let data: Vec<f64> = (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z
                })
                .collect();
            let slr =
                mixture_slr(&data, split, &mut rng).map_err(|e| ImError::ReplicateFitFailure {
                    replicate: rep,
                    detail: e.to_string(),
                })?;
            ratios.push(slr.log_ratio());
        }
        ratios.sort_by(f64::total_cmp);
        Ok(Self {
            n,
            sorted_log_ratios: ratios,
        })
    }

    /// Sample size the table was simulated at.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of simulated replicates.
    pub fn n_rep(&self) -> usize {
        self.sorted_log_ratios.len()
    }

    /// Add-one estimate of the probability that a null log ratio falls at
    /// or below `r`: the observed value counts as one extra null draw, so
    /// the estimate is strictly positive and the induced p-value satisfies
    /// `P(p <= a) <= a` exactly at every level.
    pub fn below(&self, r: f64) -> f64 {
        let at_or_below = self.sorted_log_ratios.partition_point(|&v| v <= r);
        (at_or_below + 1) as f64 / (self.sorted_log_ratios.len() + 1) as f64
    }
}

/// Recalibrated plausibility of the normality null.
///
/// One when the split ratio saturates; otherwise the null probability of a
/// smaller log ratio, clamped by the split-ratio p-value so that validity
/// survives simulation noise in the table.
pub fn mixture_plausibility(slr: &MixtureSlr, table: &MixtureNullTable) -> f64 {
    if slr.p_value >= NEAR_ONE {
        return 1.0;
    }
    table.below(slr.log_ratio()).min(slr.p_value)
}

/// Joint outcome of the split-ratio test and its recalibrated counterpart.
#[derive(Debug, Clone)]
pub struct MixtureTestOutcome {
    /// Split-ratio p-value.
    pub slr_p: f64,
    /// Recalibrated plausibility of the null.
    pub plausibility: f64,
    /// Whether the split-ratio test rejects at the requested level.
    pub slr_reject: bool,
    /// Whether the plausibility test rejects at the requested level.
    pub im_reject: bool,
    /// Level both tests were run at.
    pub alpha: f64,
}

/// Runs both tests of normality against a two-component mixture.
pub fn mixture_test(
    data: &[f64],
    split: &super::slr::SplitSpec,
    table: &MixtureNullTable,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> Result<MixtureTestOutcome, ImError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ImError::invalid_parameter(
            "test level must lie strictly between zero and one",
        ));
    }
    if table.n() != data.len() {
        return Err(ImError::invalid_parameter(format!(
            "reference table was built for n = {} but the data has n = {}",
            table.n(),
            data.len()
        )));
    }
    let slr = mixture_slr(data, split, rng)?;
    let plausibility = mixture_plausibility(&slr, table);
    Ok(MixtureTestOutcome {
        slr_p: slr.p_value,
        plausibility,
        slr_reject: slr.p_value < alpha,
        im_reject: plausibility < alpha,
        alpha,
    })
}

/// One draw of size `n` from the symmetric two-component alternative:
/// equal weights on `N(-mu, 1)` and `N(mu, 1)`.
pub fn sample_symmetric_mixture<R: Rng + ?Sized>(n: usize, mu: f64, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            if rng.random::<bool>() {
                mu + z
            } else {
                -mu + z
            }
        })
        .collect()
}
