//! Nonparametric maximum-likelihood estimation of a nonincreasing density
//! on the positive half-line.
//!
//! The estimate is the left derivative of the least concave majorant of the
//! empirical cdf, computed by an upper convex-hull scan over the cdf's
//! vertices.  The resulting density is a nonincreasing step function whose
//! value on `(t_{j-1}, t_j]` is the slope of the `j`-th majorant segment;
//! evaluating observations at segment right endpoints with this
//! left-continuous convention keeps every fitted likelihood finite.

use crate::error::ImError;
use crate::nonparametric::{DistributionHandle, EmpiricalSample, HandleKind};
use rand::Rng;
use std::sync::Arc;

/// A fitted nonincreasing step density with its piecewise-linear cdf.
#[derive(Debug, Clone)]
pub struct GrenanderFit {
    /// Segment boundaries `0 = t_0 < t_1 < ... < t_k`.
    knots: Vec<f64>,
    /// Majorant values at the knots, from zero up to one.
    cdf_at_knots: Vec<f64>,
    /// Segment slopes, strictly decreasing across segments.
    heights: Vec<f64>,
}

/// Fits the monotone-density maximum-likelihood estimate.
///
/// All observations must be strictly positive: an observation at or below
/// zero has no finite likelihood under any density supported on the
/// positive half-line.
pub fn fit_grenander(sample: &EmpiricalSample) -> Result<GrenanderFit, ImError> {
    let sorted = sample.sorted();
    if sorted[0] <= 0.0 {
        return Err(ImError::invalid_data(
            "monotone-density estimation requires strictly positive observations",
        ));
    }
    let n = sorted.len() as f64;

    // Vertices of the empirical cdf, one per distinct value, plus the origin.
    let mut xs = vec![0.0f64];
    let mut ys = vec![0.0f64];
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        xs.push(v);
        ys.push(j as f64 / n);
        i = j;
    }

    // Upper hull scan: keep the chain of vertices whose chord slopes are
    // strictly decreasing; that chain is the least concave majorant.
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for idx in 0..xs.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let slope_ab = (ys[b] - ys[a]) / (xs[b] - xs[a]);
            let slope_b_new = (ys[idx] - ys[b]) / (xs[idx] - xs[b]);
            if slope_ab <= slope_b_new {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(idx);
    }

    let knots: Vec<f64> = hull.iter().map(|&h| xs[h]).collect();
    let cdf_at_knots: Vec<f64> = hull.iter().map(|&h| ys[h]).collect();
    let heights: Vec<f64> = knots
        .windows(2)
        .zip(cdf_at_knots.windows(2))
        .map(|(t, c)| (c[1] - c[0]) / (t[1] - t[0]))
        .collect();
    Ok(GrenanderFit {
        knots,
        cdf_at_knots,
        heights,
    })
}

impl GrenanderFit {
    /// Segment boundaries, starting at zero.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Segment slopes (density values), strictly decreasing.
    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// Upper end of the support (the largest observation).
    pub fn support_end(&self) -> f64 {
        *self.knots.last().expect("fit has at least two knots")
    }

    /// Density at `t`, with the left-continuous convention: on
    /// `(t_{j-1}, t_j]` the value is the `j`-th segment slope, and the
    /// density vanishes outside `(0, t_k]`.
    pub fn density(&self, t: f64) -> f64 {
        if t <= 0.0 || t > self.support_end() {
            return 0.0;
        }
        // First knot strictly >= t bounds the segment containing t.
        let seg = self.knots.partition_point(|&k| k < t);
        self.heights[seg - 1]
    }

    /// Piecewise-linear cdf of the fitted density.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.support_end() {
            return 1.0;
        }
        let seg = self.knots.partition_point(|&k| k < t);
        let t0 = self.knots[seg - 1];
        self.cdf_at_knots[seg - 1] + self.heights[seg - 1] * (t - t0)
    }

    /// Inverse of the cdf on `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u >= 1.0 {
            return self.support_end();
        }
        let seg = self.cdf_at_knots.partition_point(|&c| c <= u);
        let lo = self.cdf_at_knots[seg - 1];
        self.knots[seg - 1] + (u - lo) / self.heights[seg - 1]
    }

    /// Sum of log densities over `data`; minus infinity if any observation
    /// falls outside the fitted support.
    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        data.iter().map(|&x| self.density(x).ln()).sum()
    }

    /// One draw from the fitted density by inversion.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break u;
            }
        };
        self.quantile(u)
    }

    /// Wraps the continuous fitted cdf as a distribution handle.
    pub fn handle(&self) -> DistributionHandle {
        let fit = self.clone();
        DistributionHandle {
            kind: HandleKind::Grenander,
            cdf: Arc::new(move |t| fit.cdf(t)),
            cdf_left: None,
        }
    }
}
