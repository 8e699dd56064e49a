//! Distribution primitives used throughout the library.
//!
//! Thin wrappers over statrs plus the few pieces it lacks: a binomial
//! quantile by CDF search matching the interval convention
//! `F(x-1) < u <= F(x)`, a noncentral chi-square CDF/quantile, and the
//! Kolmogorov-Smirnov sup-distance of a sample against the uniform CDF.

use statrs::distribution::{
    Binomial, ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Normal, StudentsT,
};
use statrs::function::gamma::gamma_lr;

use crate::error::{ImError, Result};

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Standard normal quantile.
pub fn std_normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Student-t CDF with `df` degrees of freedom.
pub fn student_t_cdf(x: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("df > 0").cdf(x)
}

/// Student-t quantile with `df` degrees of freedom.
pub fn student_t_quantile(p: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("df > 0").inverse_cdf(p)
}

/// Chi-square CDF with `df` degrees of freedom.
pub fn chi_squared_cdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        ChiSquared::new(df).expect("df > 0").cdf(x)
    }
}

/// Chi-square quantile with `df` degrees of freedom.
pub fn chi_squared_quantile(p: f64, df: f64) -> f64 {
    ChiSquared::new(df).expect("df > 0").inverse_cdf(p)
}

/// Binomial model with success probability `p` over `n` trials.
///
/// `cdf_at` takes a signed index so callers can write `F(x-1)` at `x = 0`
/// without special-casing; probabilities at the boundary parameter values
/// 0 and 1 are handled exactly.
#[derive(Debug, Clone)]
pub struct BinomialDist {
    n: u64,
    p: f64,
    inner: Option<Binomial>,
}

impl BinomialDist {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(ImError::invalid_parameter(format!(
                "binomial success probability must lie in [0,1], got {p}"
            )));
        }
        // statrs accepts the boundary values, but route them through exact
        // arithmetic anyway so no incomplete-beta rounding can leak in.
        let inner = if p > 0.0 && p < 1.0 {
            Some(Binomial::new(p, n).expect("validated parameters"))
        } else {
            None
        };
        Ok(BinomialDist { n, p, inner })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// P(X = k).
    pub fn pmf(&self, k: u64) -> f64 {
        if k > self.n {
            return 0.0;
        }
        match &self.inner {
            Some(d) => d.pmf(k),
            None => {
                let point = if self.p == 0.0 { 0 } else { self.n };
                if k == point {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// P(X <= k) with `k` allowed to be negative (giving 0).
    pub fn cdf_at(&self, k: i64) -> f64 {
        if k < 0 {
            return 0.0;
        }
        let k = k as u64;
        if k >= self.n {
            return 1.0;
        }
        match &self.inner {
            Some(d) => d.cdf(k),
            None => {
                let point = if self.p == 0.0 { 0 } else { self.n };
                if k >= point {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Smallest `x` with `F(x) >= u`, so that `F(x-1) < u <= F(x)`.
    ///
    /// Found by CDF search rather than a closed form so the interval
    /// convention holds exactly at the atoms.
    pub fn quantile(&self, u: f64) -> u64 {
        debug_assert!((0.0..=1.0).contains(&u));
        if u <= 0.0 {
            return 0;
        }
        // Binary search over 0..=n for the first index with cdf >= u.
        let mut lo = 0u64;
        let mut hi = self.n;
        if self.cdf_at(0) >= u {
            return 0;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.cdf_at(mid as i64) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// Noncentral chi-square CDF with `df` degrees of freedom and noncentrality `nc`.
///
/// Evaluated as a Poisson-weighted series of central chi-square CDFs,
/// summed outward from the modal Poisson index until the tail weight is
/// negligible.
pub fn noncentral_chi_squared_cdf(x: f64, df: f64, nc: f64) -> f64 {
    assert!(df > 0.0 && nc >= 0.0, "need df > 0 and nc >= 0");
    if x <= 0.0 {
        return 0.0;
    }
    if nc == 0.0 {
        return gamma_lr(df / 2.0, x / 2.0);
    }
    let half_nc = nc / 2.0;
    let mode = half_nc.floor() as i64;
    // log Poisson weight at the mode, extended in both directions by the
    // ratio recurrence.
    let ln_weight = |j: i64| -> f64 {
        let j = j as f64;
        -half_nc + j * half_nc.ln() - statrs::function::gamma::ln_gamma(j + 1.0)
    };
    let term = |j: i64| -> f64 { ln_weight(j).exp() * gamma_lr(df / 2.0 + j as f64, x / 2.0) };
    let mut total = term(mode);
    let tol = 1e-16;
    let mut j = mode - 1;
    while j >= 0 {
        let t = term(j);
        total += t;
        if t < tol * total {
            break;
        }
        j -= 1;
    }
    let mut j = mode + 1;
    loop {
        let t = term(j);
        total += t;
        if t < tol * total || j > mode + 10_000 {
            break;
        }
        j += 1;
    }
    total.min(1.0)
}

/// Noncentral chi-square quantile by bisection on the CDF.
pub fn noncentral_chi_squared_quantile(u: f64, df: f64, nc: f64) -> f64 {
    assert!((0.0..1.0).contains(&u) || u == 1.0);
    if u <= 0.0 {
        return 0.0;
    }
    let mean = df + nc;
    let sd = (2.0 * (df + 2.0 * nc)).sqrt();
    let mut hi = mean + 10.0 * sd + 10.0;
    while noncentral_chi_squared_cdf(hi, df, nc) < u {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if noncentral_chi_squared_cdf(mid, df, nc) < u {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * (1.0 + hi) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Kolmogorov-Smirnov sup-distance of a sample against the uniform CDF on [0,1].
///
/// The sample need not be sorted; a sorted copy is made internally.
pub fn ks_uniform_distance(sample: &[f64]) -> f64 {
    let mut s: Vec<f64> = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in sample"));
    ks_uniform_distance_sorted(&s)
}

/// As [`ks_uniform_distance`], assuming the sample is already sorted.
pub fn ks_uniform_distance_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "empty sample");
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        let upper = (i + 1) as f64 / nf - u;
        let lower = u - i as f64 / nf;
        d = d.max(upper).max(lower);
    }
    d
}
