//! Normal location models in one and two dimensions, with closed-form
//! contours for the whole mean vector and for two derived features: a
//! single coordinate and the ratio of the two coordinates.
//!
//! These are the workhorses of the additive-versus-consonant comparison:
//! every quantity here is available exactly, so Monte Carlo enters only
//! when simulating data. For each feature two marginals are provided: the
//! "naive" one obtained by maximizing the joint contour over the feature's
//! level set, and the "strategic" one built from the feature's own
//! sampling distribution. The naive version is never smaller, since a
//! squared distance is less extreme against two degrees of freedom than
//! against one.

use rand::Rng;
use rand_distr::Distribution;

use crate::contour::{Contour, Domain};
use crate::dist::{chi_squared_cdf, std_normal_cdf};
use crate::error::{ImError, Result};
use crate::rng::McConfig;

/// Two independent unit-variance normal observations with unknown means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalMeans2D {
    pub x1: f64,
    pub x2: f64,
}

fn g1(q: f64) -> f64 {
    chi_squared_cdf(q, 1.0)
}

fn g2(q: f64) -> f64 {
    chi_squared_cdf(q, 2.0)
}

impl NormalMeans2D {
    pub fn new(x1: f64, x2: f64) -> Result<Self> {
        if !x1.is_finite() || !x2.is_finite() {
            return Err(ImError::invalid_data("observations must be finite"));
        }
        Ok(NormalMeans2D { x1, x2 })
    }

    /// The worked data set used throughout the comparison figures.
    pub fn illustration_data() -> Self {
        NormalMeans2D {
            x1: 1.333,
            x2: 0.333,
        }
    }

    /// Joint contour value at a candidate mean vector: the upper tail of
    /// the squared distance against its chi-squared(2) distribution.
    pub fn joint_value(&self, t1: f64, t2: f64) -> f64 {
        let q = (t1 - self.x1).powi(2) + (t2 - self.x2).powi(2);
        1.0 - g2(q)
    }

    /// Joint contour over a square window around the observation.
    pub fn joint_contour(&self) -> Contour {
        let s = *self;
        let dom = Domain::new(
            vec![
                (self.x1 - 4.0, self.x1 + 4.0),
                (self.x2 - 4.0, self.x2 + 4.0),
            ],
            201,
        );
        Contour::new(dom, move |t: &[f64]| s.joint_value(t[0], t[1]))
    }

    /// Naive marginal for the first coordinate: the joint contour
    /// maximized over the unconstrained second coordinate.
    pub fn coord1_naive_value(&self, phi: f64) -> f64 {
        1.0 - g2((phi - self.x1).powi(2))
    }

    /// Strategic marginal for the first coordinate, built directly from
    /// the first observation's own sampling distribution.
    pub fn coord1_strategic_value(&self, phi: f64) -> f64 {
        1.0 - (2.0 * std_normal_cdf(self.x1 - phi) - 1.0).abs()
    }

    pub fn coord1_naive_contour(&self) -> Contour {
        let s = *self;
        Contour::new(self.coord1_domain(), move |p: &[f64]| {
            s.coord1_naive_value(p[0])
        })
    }

    pub fn coord1_strategic_contour(&self) -> Contour {
        let s = *self;
        Contour::new(self.coord1_domain(), move |p: &[f64]| {
            s.coord1_strategic_value(p[0])
        })
    }

    fn coord1_domain(&self) -> Domain {
        Domain::interval(self.x1 - 5.0, self.x1 + 5.0)
    }

    /// Squared distance from the observation to the line of mean vectors
    /// whose coordinate ratio equals `phi`.
    pub fn ratio_quadratic(&self, phi: f64) -> f64 {
        (self.x1 - phi * self.x2).powi(2) / (1.0 + phi * phi)
    }

    /// The point on the ratio-`phi` line closest to the observation; the
    /// joint contour restricted to the line is maximized there.
    pub fn ratio_fiber_maximizer(&self, phi: f64) -> (f64, f64) {
        let t = (phi * self.x1 + self.x2) / (1.0 + phi * phi);
        (phi * t, t)
    }

    /// Naive marginal for the coordinate ratio.
    pub fn ratio_naive_value(&self, phi: f64) -> f64 {
        1.0 - g2(self.ratio_quadratic(phi))
    }

    /// Strategic marginal for the coordinate ratio: the same quadratic
    /// referred to one degree of freedom, as produced by pivoting on
    /// `X1 - phi X2` directly.
    pub fn ratio_strategic_value(&self, phi: f64) -> f64 {
        1.0 - g1(self.ratio_quadratic(phi))
    }

    pub fn ratio_naive_contour(&self) -> Contour {
        let s = *self;
        Contour::new(self.ratio_domain(), move |p: &[f64]| {
            s.ratio_naive_value(p[0])
        })
    }

    pub fn ratio_strategic_contour(&self) -> Contour {
        let s = *self;
        Contour::new(self.ratio_domain(), move |p: &[f64]| {
            s.ratio_strategic_value(p[0])
        })
    }

    /// Window for ratio contours, centered on the observed ratio when the
    /// denominator observation is away from zero.
    pub fn ratio_domain(&self) -> Domain {
        let center = if self.x2.abs() > 1e-8 {
            (self.x1 / self.x2).clamp(-50.0, 50.0)
        } else {
            0.0
        };
        Domain::interval(center - 15.0, center + 15.0)
    }

    /// Exact upper probability of the half-line `(b, infinity)` of ratio
    /// values under the naive marginal.
    ///
    /// The quadratic has stationary points only at the observed ratio
    /// (value zero) and at its negative reciprocal (a maximum), and tends
    /// to the squared denominator observation in both tails, so the
    /// infimum over the half-line is among: the boundary value, the tail
    /// limit, and zero when the observed ratio lies inside.
    pub fn ratio_naive_upper_capacity(&self, b: f64) -> f64 {
        let mut inf = self.ratio_quadratic(b).min(self.x2 * self.x2);
        if self.x2 != 0.0 && self.x1 / self.x2 > b {
            inf = 0.0;
        }
        1.0 - g2(inf)
    }

    /// Lower probability of the assertion that the ratio is at most `b`:
    /// one minus the upper probability of its complement.
    pub fn ratio_lower_probability_upto(&self, b: f64) -> f64 {
        1.0 - self.ratio_naive_upper_capacity(b)
    }

    /// Probability the additive confidence distribution assigns to the
    /// ratio being at most `b`: Monte Carlo over the bivariate normal
    /// centered at the observation.
    pub fn cd_ratio_prob_upto(&self, b: f64, mc: &McConfig) -> Result<f64> {
        mc.validate()?;
        let mut rng = mc.substream(0);
        let mut hits = 0usize;
        for _ in 0..mc.n_rep {
            let e1: f64 = rand_distr::StandardNormal.sample(&mut rng);
            let e2: f64 = rand_distr::StandardNormal.sample(&mut rng);
            if (self.x1 + e1) / (self.x2 + e2) <= b {
                hits += 1;
            }
        }
        Ok(hits as f64 / mc.n_rep as f64)
    }

    /// One draw of the data under a given mean vector.
    pub fn sample<R: Rng + ?Sized>(theta: (f64, f64), rng: &mut R) -> Self {
        let e1: f64 = rand_distr::StandardNormal.sample(rng);
        let e2: f64 = rand_distr::StandardNormal.sample(rng);
        NormalMeans2D {
            x1: theta.0 + e1,
            x2: theta.1 + e2,
        }
    }
}

/// Contour for a single normal observation with unit variance.
pub fn scalar_contour(x: f64, theta: f64) -> f64 {
    1.0 - (2.0 * std_normal_cdf(x - theta) - 1.0).abs()
}

/// Probability the additive confidence distribution centered at `x`
/// assigns to the mean lying within `a` of zero.
pub fn scalar_cd_abs_prob(x: f64, a: f64) -> f64 {
    std_normal_cdf(a - x) - std_normal_cdf(-a - x)
}

/// Upper probability the consonant measure assigns to the mean lying
/// within `a` of zero: one when the observation itself does, otherwise
/// the contour at the nearest boundary point.
pub fn scalar_im_abs_capacity(x: f64, a: f64) -> f64 {
    if x.abs() <= a {
        1.0
    } else {
        2.0 * (1.0 - std_normal_cdf(x.abs() - a))
    }
}
