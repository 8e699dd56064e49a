//! Data-generating associations `X = a(theta, U)` with a known auxiliary law.
//!
//! An association carries the forward map, a sampler for the auxiliary
//! variable, and the two fiber predicates the random-set machinery needs:
//! membership of `u` in `U_x(theta) = {u : x = a(theta, u)}` and
//! non-emptiness of `Theta_x(u) = {theta : x = a(theta, u)}`. Each builtin
//! also supplies a representative point of `U_x(theta)`, which is what the
//! generic level-index search evaluates.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::dist::{noncentral_chi_squared_cdf, noncentral_chi_squared_quantile, BinomialDist};
use crate::error::{ImError, Result};
use crate::rng::McConfig;

/// Relative tolerance for fiber-membership equality checks.
const FIBER_TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= FIBER_TOL * (1.0 + a.abs() + b.abs())
}

/// Catalog of built-in associations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum AssociationKind {
    /// iid `N(theta, 1)` sample of size `n`: `x_i = theta + u_i`.
    NormalLocation { n: usize },
    /// Binomial count over `n` trials: `F_theta(x - 1) < u <= F_theta(x)`.
    BinomialQuantile { n: u64 },
    /// Minimum and maximum of `n` iid `Uniform(theta, theta + 1)` draws.
    UniformMinMax { n: usize },
    /// iid uniform auxiliaries passed through unchanged; a quantile
    /// transform is applied outside when a concrete distribution is in play.
    IidQuantile { n: usize },
    /// Two-sample normal summaries `(mean difference, v1, v2)` with
    /// parameter `(mu1, mu2, sigma1^2, sigma2^2)`.
    BehrensFisher { n1: usize, n2: usize },
    /// Noncentral chi-square with known `df`, parameterized by the
    /// noncentrality: `x = F_lambda^{-1}(u)`.
    NoncentralChiSquared { df: f64 },
    /// As `NormalLocation`, tagged for split-likelihood procedures that
    /// divide the sample into halves.
    SplitNormal { n: usize },
}

/// An association `X = a(theta, U)` bundled with its auxiliary sampler and
/// fiber predicates.
#[derive(Clone)]
pub struct Association {
    pub kind: AssociationKind,
    pub dim_u: usize,
    pub dim_x: usize,
    pub dim_theta: usize,
    sample_u: Arc<dyn Fn(&mut ChaCha8Rng) -> Vec<f64> + Send + Sync>,
    forward: Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>,
    in_u_fiber: Arc<dyn Fn(&[f64], &[f64], &[f64]) -> bool + Send + Sync>,
    theta_fiber_nonempty: Arc<dyn Fn(&[f64], &[f64]) -> bool + Send + Sync>,
    fiber_rep: Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>,
}

impl Association {
    /// Draw one auxiliary vector.
    pub fn sample_u(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (self.sample_u)(rng)
    }

    /// Apply the forward map `a(theta, u)`.
    pub fn forward(&self, theta: &[f64], u: &[f64]) -> Vec<f64> {
        debug_assert_eq!(theta.len(), self.dim_theta);
        debug_assert_eq!(u.len(), self.dim_u);
        (self.forward)(theta, u)
    }

    /// Is `u` in the data fiber `U_x(theta)`?
    pub fn in_u_fiber(&self, x: &[f64], theta: &[f64], u: &[f64]) -> bool {
        (self.in_u_fiber)(x, theta, u)
    }

    /// Is the parameter fiber `Theta_x(u)` nonempty?
    pub fn theta_fiber_nonempty(&self, x: &[f64], u: &[f64]) -> bool {
        (self.theta_fiber_nonempty)(x, u)
    }

    /// A representative point of `U_x(theta)`.
    pub fn fiber_representative(&self, x: &[f64], theta: &[f64]) -> Vec<f64> {
        (self.fiber_rep)(x, theta)
    }
}

/// Construct one of the built-in associations.
pub fn builtin_association(kind: AssociationKind) -> Result<Association> {
    match kind {
        AssociationKind::NormalLocation { n } | AssociationKind::SplitNormal { n } => {
            if n == 0 {
                return Err(ImError::invalid_parameter("sample size must be positive"));
            }
            Ok(normal_location(kind.clone(), n))
        }
        AssociationKind::BinomialQuantile { n } => {
            if n == 0 {
                return Err(ImError::invalid_parameter("trial count must be positive"));
            }
            Ok(binomial_quantile(n))
        }
        AssociationKind::UniformMinMax { n } => {
            if n < 2 {
                return Err(ImError::invalid_parameter(
                    "min/max association needs at least two draws",
                ));
            }
            Ok(uniform_min_max(n))
        }
        AssociationKind::IidQuantile { n } => {
            if n == 0 {
                return Err(ImError::invalid_parameter("sample size must be positive"));
            }
            Ok(iid_quantile(n))
        }
        AssociationKind::BehrensFisher { n1, n2 } => {
            if n1 < 2 || n2 < 2 {
                return Err(ImError::invalid_parameter(
                    "both groups need at least two observations",
                ));
            }
            Ok(behrens_fisher(n1, n2))
        }
        AssociationKind::NoncentralChiSquared { df } => {
            if !(df > 0.0) {
                return Err(ImError::invalid_parameter(
                    "degrees of freedom must be positive",
                ));
            }
            Ok(noncentral_chi_squared(df))
        }
    }
}

fn normal_location(kind: AssociationKind, n: usize) -> Association {
    Association {
        kind,
        dim_u: n,
        dim_x: n,
        dim_theta: 1,
        sample_u: Arc::new(move |rng| {
            (0..n)
                .map(|_| rand_distr::StandardNormal.sample(rng))
                .collect()
        }),
        forward: Arc::new(|theta: &[f64], u: &[f64]| u.iter().map(|ui| theta[0] + ui).collect()),
        in_u_fiber: Arc::new(|x: &[f64], theta: &[f64], u: &[f64]| {
            x.iter().zip(u).all(|(xi, ui)| close(xi - ui, theta[0]))
        }),
        // Theta_x(u) is nonempty exactly when x - u is a constant vector.
        theta_fiber_nonempty: Arc::new(|x: &[f64], u: &[f64]| {
            let c = x[0] - u[0];
            x.iter().zip(u).all(|(xi, ui)| close(xi - ui, c))
        }),
        fiber_rep: Arc::new(|x: &[f64], theta: &[f64]| x.iter().map(|xi| xi - theta[0]).collect()),
    }
}

fn binomial_quantile(n: u64) -> Association {
    Association {
        kind: AssociationKind::BinomialQuantile { n },
        dim_u: 1,
        dim_x: 1,
        dim_theta: 1,
        sample_u: Arc::new(|rng| vec![rng.random::<f64>()]),
        forward: Arc::new(move |theta: &[f64], u: &[f64]| {
            let d = BinomialDist::new(n, theta[0]).expect("valid probability");
            vec![d.quantile(u[0]) as f64]
        }),
        in_u_fiber: Arc::new(move |x: &[f64], theta: &[f64], u: &[f64]| {
            let d = match BinomialDist::new(n, theta[0]) {
                Ok(d) => d,
                Err(_) => return false,
            };
            let k = x[0].round() as i64;
            d.cdf_at(k - 1) < u[0] && u[0] <= d.cdf_at(k)
        }),
        // Any count in 0..=n is reachable for an interior theta.
        theta_fiber_nonempty: Arc::new(move |x: &[f64], u: &[f64]| {
            let k = x[0].round() as i64;
            (0..=n as i64).contains(&k) && (0.0..=1.0).contains(&u[0])
        }),
        // The level index is constant over the fiber interval, so its
        // midpoint serves as the representative.
        fiber_rep: Arc::new(move |x: &[f64], theta: &[f64]| {
            let d = BinomialDist::new(n, theta[0]).expect("valid probability");
            let k = x[0].round() as i64;
            vec![0.5 * (d.cdf_at(k - 1) + d.cdf_at(k))]
        }),
    }
}

fn uniform_min_max(n: usize) -> Association {
    Association {
        kind: AssociationKind::UniformMinMax { n },
        dim_u: 2,
        dim_x: 2,
        dim_theta: 1,
        sample_u: Arc::new(move |rng| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for _ in 0..n {
                let v = rng.random::<f64>();
                lo = lo.min(v);
                hi = hi.max(v);
            }
            vec![lo, hi]
        }),
        forward: Arc::new(|theta: &[f64], u: &[f64]| vec![theta[0] + u[0], theta[0] + u[1]]),
        in_u_fiber: Arc::new(|x: &[f64], theta: &[f64], u: &[f64]| {
            close(x[0] - u[0], theta[0]) && close(x[1] - u[1], theta[0])
        }),
        // Need a common shift onto [0,1] preserving the spread.
        theta_fiber_nonempty: Arc::new(|x: &[f64], u: &[f64]| {
            close(x[1] - x[0], u[1] - u[0])
                && u[0] >= -FIBER_TOL
                && u[1] <= 1.0 + FIBER_TOL
                && u[0] <= u[1] + FIBER_TOL
        }),
        fiber_rep: Arc::new(|x: &[f64], theta: &[f64]| vec![x[0] - theta[0], x[1] - theta[0]]),
    }
}

fn iid_quantile(n: usize) -> Association {
    Association {
        kind: AssociationKind::IidQuantile { n },
        dim_u: n,
        dim_x: n,
        dim_theta: 0,
        sample_u: Arc::new(move |rng| (0..n).map(|_| rng.random::<f64>()).collect()),
        forward: Arc::new(|_theta: &[f64], u: &[f64]| u.to_vec()),
        in_u_fiber: Arc::new(|x: &[f64], _theta: &[f64], u: &[f64]| {
            x.iter().zip(u).all(|(xi, ui)| close(*xi, *ui))
        }),
        theta_fiber_nonempty: Arc::new(|x: &[f64], u: &[f64]| {
            x.iter().zip(u).all(|(xi, ui)| close(*xi, *ui))
        }),
        fiber_rep: Arc::new(|x: &[f64], _theta: &[f64]| x.to_vec()),
    }
}

fn behrens_fisher(n1: usize, n2: usize) -> Association {
    let nu1 = (n1 - 1) as f64;
    let nu2 = (n2 - 1) as f64;
    Association {
        kind: AssociationKind::BehrensFisher { n1, n2 },
        dim_u: 3,
        dim_x: 3,
        dim_theta: 4,
        sample_u: Arc::new(move |rng| {
            let z: f64 = rand_distr::StandardNormal.sample(rng);
            let w1 = rand_distr::ChiSquared::new(nu1)
                .expect("df > 0")
                .sample(rng)
                / nu1;
            let w2 = rand_distr::ChiSquared::new(nu2)
                .expect("df > 0")
                .sample(rng)
                / nu2;
            vec![z, w1, w2]
        }),
        forward: Arc::new(move |theta: &[f64], u: &[f64]| {
            let (mu1, mu2, s1, s2) = (theta[0], theta[1], theta[2], theta[3]);
            let f = (s1 / n1 as f64 + s2 / n2 as f64).sqrt();
            vec![mu1 - mu2 + f * u[0], s1 * u[1], s2 * u[2]]
        }),
        in_u_fiber: Arc::new(move |x: &[f64], theta: &[f64], u: &[f64]| {
            let (mu1, mu2, s1, s2) = (theta[0], theta[1], theta[2], theta[3]);
            let f = (s1 / n1 as f64 + s2 / n2 as f64).sqrt();
            close(mu1 - mu2 + f * u[0], x[0]) && close(s1 * u[1], x[1]) && close(s2 * u[2], x[2])
        }),
        // Positive variance draws can always be rescaled to match positive
        // observed variances, and the mean difference is free.
        theta_fiber_nonempty: Arc::new(|x: &[f64], u: &[f64]| {
            u[1] > 0.0 && u[2] > 0.0 && x[1] > 0.0 && x[2] > 0.0
        }),
        fiber_rep: Arc::new(move |x: &[f64], theta: &[f64]| {
            let (mu1, mu2, s1, s2) = (theta[0], theta[1], theta[2], theta[3]);
            let f = (s1 / n1 as f64 + s2 / n2 as f64).sqrt();
            vec![(x[0] - (mu1 - mu2)) / f, x[1] / s1, x[2] / s2]
        }),
    }
}

fn noncentral_chi_squared(df: f64) -> Association {
    Association {
        kind: AssociationKind::NoncentralChiSquared { df },
        dim_u: 1,
        dim_x: 1,
        dim_theta: 1,
        sample_u: Arc::new(|rng| vec![rng.random::<f64>()]),
        forward: Arc::new(move |theta: &[f64], u: &[f64]| {
            vec![noncentral_chi_squared_quantile(u[0], df, theta[0])]
        }),
        in_u_fiber: Arc::new(move |x: &[f64], theta: &[f64], u: &[f64]| {
            close(noncentral_chi_squared_cdf(x[0], df, theta[0]), u[0])
        }),
        // F_lambda(x) decreases in lambda from F_0(x), so a nonnegative
        // noncentrality solving F_lambda(x) = u exists exactly when
        // u <= F_0(x).
        theta_fiber_nonempty: Arc::new(move |x: &[f64], u: &[f64]| {
            u[0] <= noncentral_chi_squared_cdf(x[0], df, 0.0)
        }),
        fiber_rep: Arc::new(move |x: &[f64], theta: &[f64]| {
            vec![noncentral_chi_squared_cdf(x[0], df, theta[0])]
        }),
    }
}

/// One probe of a simulation consistency check.
#[derive(Debug, Clone, Serialize)]
pub struct Probe {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub z: f64,
}

/// Report from [`check_model_consistency`].
#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub probes: Vec<Probe>,
    /// Fraction of sampled auxiliaries that land back in their own fiber
    /// after the forward map (should be 1).
    pub round_trip_rate: f64,
    pub pass: bool,
}

/// Simulate the association at `theta` and compare probe statistics with
/// their known moments; |z| above 4 on any probe fails the report.
pub fn check_model_consistency(
    assoc: &Association,
    theta: &[f64],
    mc: &McConfig,
) -> Result<ConsistencyReport> {
    mc.validate()?;
    let mut rng = mc.substream(0);
    let n_rep = mc.n_rep;
    let mut sums = vec![0.0f64; assoc.dim_x];
    let mut sq_sums = vec![0.0f64; assoc.dim_x];
    let mut round_trips = 0usize;
    for _ in 0..n_rep {
        let u = assoc.sample_u(&mut rng);
        let x = assoc.forward(theta, &u);
        if assoc.in_u_fiber(&x, theta, &u) {
            round_trips += 1;
        }
        for (d, &xi) in x.iter().enumerate() {
            sums[d] += xi;
            sq_sums[d] += xi * xi;
        }
    }
    let nf = n_rep as f64;
    let mut probes = Vec::new();
    for d in 0..assoc.dim_x {
        let mean = sums[d] / nf;
        let var = (sq_sums[d] / nf - mean * mean).max(0.0);
        if let Some(expected) = expected_coordinate_mean(&assoc.kind, theta, d) {
            let se = (var / nf).sqrt().max(1e-300);
            probes.push(Probe {
                name: format!("mean[x_{}]", d + 1),
                observed: mean,
                expected,
                z: (mean - expected) / se,
            });
        }
    }
    let round_trip_rate = round_trips as f64 / nf;
    let pass = probes.iter().all(|p| p.z.abs() <= 4.0) && round_trip_rate == 1.0;
    Ok(ConsistencyReport {
        probes,
        round_trip_rate,
        pass,
    })
}

/// Exact mean of coordinate `d` of `X` under the builtin law, where known.
fn expected_coordinate_mean(kind: &AssociationKind, theta: &[f64], d: usize) -> Option<f64> {
    match kind {
        AssociationKind::NormalLocation { .. } | AssociationKind::SplitNormal { .. } => {
            Some(theta[0])
        }
        AssociationKind::BinomialQuantile { n } => Some(*n as f64 * theta[0]),
        AssociationKind::UniformMinMax { n } => {
            let nf = *n as f64;
            match d {
                0 => Some(theta[0] + 1.0 / (nf + 1.0)),
                1 => Some(theta[0] + nf / (nf + 1.0)),
                _ => None,
            }
        }
        AssociationKind::IidQuantile { .. } => Some(0.5),
        AssociationKind::BehrensFisher { .. } => match d {
            0 => Some(theta[0] - theta[1]),
            1 => Some(theta[2]),
            2 => Some(theta[3]),
            _ => None,
        },
        AssociationKind::NoncentralChiSquared { df } => Some(df + theta[0]),
    }
}
