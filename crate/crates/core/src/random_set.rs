//! Nested random sets on the auxiliary space and the plausibilities they
//! induce.
//!
//! A focal family assigns to each level `alpha` a subset `S_alpha(theta)` of
//! the auxiliary space, shrinking as `alpha` grows. Writing `alpha(x, theta)`
//! for the largest level at which `S_alpha(theta)` still meets the data fiber
//! `U_x(theta)`, the fused point plausibility is
//! `1 - P_U{S_{alpha(x,theta)}(theta)}`; nestedness makes the containment
//! probability of the random set equal the auxiliary probability of the focal
//! set, so plain Monte Carlo over `P_U` suffices. The estimate is truncated
//! at `alpha(x, theta)`, which the construction guarantees is an upper bound,
//! so the dominance property survives Monte Carlo noise exactly.

use std::sync::Arc;

use crate::association::Association;
use crate::contour::{Contour, Domain};
use crate::error::Result;
use crate::rng::McConfig;

/// A nested family of focal sets `S_alpha(theta)` given by level membership.
#[derive(Clone)]
pub struct FocalFamily {
    contains: Arc<dyn Fn(f64, &[f64], &[f64]) -> bool + Send + Sync>,
}

impl FocalFamily {
    pub fn new(contains: impl Fn(f64, &[f64], &[f64]) -> bool + Send + Sync + 'static) -> Self {
        FocalFamily {
            contains: Arc::new(contains),
        }
    }

    /// Is `u` in `S_alpha(theta)`?
    pub fn contains(&self, alpha: f64, theta: &[f64], u: &[f64]) -> bool {
        (self.contains)(alpha, theta, u)
    }

    /// Spot-check nestedness: membership must be monotone decreasing in the
    /// level along sampled auxiliaries. Returns the offending level pair on
    /// failure.
    pub fn audit_nested(
        &self,
        assoc: &Association,
        theta: &[f64],
        mc: &McConfig,
    ) -> Result<Option<(f64, f64)>> {
        mc.validate()?;
        let levels: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
        let mut rng = mc.substream(0);
        for _ in 0..mc.n_rep {
            let u = assoc.sample_u(&mut rng);
            let mut dropped_at: Option<f64> = None;
            for &a in &levels {
                let inside = self.contains(a, theta, &u);
                match (inside, dropped_at) {
                    (false, None) => dropped_at = Some(a),
                    (true, Some(prev)) => return Ok(Some((prev, a))),
                    _ => {}
                }
            }
        }
        Ok(None)
    }
}

/// Level index together with a flag for an empty data fiber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexAlpha {
    pub alpha: f64,
    pub fiber_empty: bool,
}

impl IndexAlpha {
    pub fn of(alpha: f64) -> Self {
        IndexAlpha {
            alpha,
            fiber_empty: false,
        }
    }

    pub fn empty_fiber() -> Self {
        IndexAlpha {
            alpha: 0.0,
            fiber_empty: true,
        }
    }
}

/// Evaluates the level index `alpha(x, theta)` as a function of `theta`,
/// with the data already bound.
pub type IndexFn = Arc<dyn Fn(&[f64]) -> IndexAlpha + Send + Sync>;

/// Monte Carlo estimate of the auxiliary probability `P_U{S_alpha(theta)}`.
pub fn coverage_probability(
    focal: &FocalFamily,
    assoc: &Association,
    theta: &[f64],
    alpha: f64,
    mc: &McConfig,
) -> Result<f64> {
    mc.validate()?;
    let mut rng = mc.substream(0);
    let mut hits = 0usize;
    for _ in 0..mc.n_rep {
        let u = assoc.sample_u(&mut rng);
        if focal.contains(alpha, theta, &u) {
            hits += 1;
        }
    }
    Ok(hits as f64 / mc.n_rep as f64)
}

/// Result of a fused point-plausibility evaluation.
#[derive(Debug, Clone, Copy)]
pub struct PointPlausibility {
    pub value: f64,
    pub index_alpha: f64,
    pub fiber_empty: bool,
}

/// Fused plausibility of a single parameter point given its level index:
/// `min(1 - coverage, alpha(x,theta))`, or 0 with a flag when the data fiber
/// is empty at `theta`, or exactly 1 when the index reaches 1 (the fiber
/// then meets every focal set, so the miss probability vanishes even for
/// conservative families whose level-one focal set has positive mass).
pub fn point_plausibility(
    focal: &FocalFamily,
    assoc: &Association,
    theta: &[f64],
    index: IndexAlpha,
    mc: &McConfig,
) -> Result<PointPlausibility> {
    if index.fiber_empty {
        return Ok(PointPlausibility {
            value: 0.0,
            index_alpha: 0.0,
            fiber_empty: true,
        });
    }
    if index.alpha >= INDEX_AT_ONE {
        // The data fiber meets every focal set, including the level-one
        // one. The random set's level index has an atom at one carrying
        // exactly the level-one containment mass, so the miss probability
        // is zero and the plausibility is one.
        return Ok(PointPlausibility {
            value: 1.0,
            index_alpha: index.alpha,
            fiber_empty: false,
        });
    }
    let coverage = coverage_probability(focal, assoc, theta, index.alpha, mc)?;
    Ok(PointPlausibility {
        value: (1.0 - coverage).min(index.alpha).max(0.0),
        index_alpha: index.alpha,
        fiber_empty: false,
    })
}

/// Index values at least this close to one are treated as exactly one:
/// the fiber meets every focal set, so the plausibility is one.
pub const INDEX_AT_ONE: f64 = 1.0 - 1e-9;

/// Fused plausibility contour at data `x` over a parameter domain.
///
/// One batch of auxiliary draws is shared across every parameter point
/// (common random numbers), so the contour is smooth in `theta` and
/// reproducible. If the observed supremum over the domain grid falls short
/// of one by more than three binomial standard errors, a warning citing a
/// possible compatibility failure is attached.
pub fn fused_contour(
    focal: &FocalFamily,
    assoc: &Association,
    index: IndexFn,
    domain: Domain,
    mc: &McConfig,
) -> Result<Contour> {
    mc.validate()?;
    let mut rng = mc.substream(0);
    let draws: Arc<Vec<Vec<f64>>> =
        Arc::new((0..mc.n_rep).map(|_| assoc.sample_u(&mut rng)).collect());
    let n_rep = mc.n_rep;
    let focal = focal.clone();
    let eval = move |theta: &[f64]| -> f64 {
        let idx = index(theta);
        if idx.fiber_empty {
            return 0.0;
        }
        if idx.alpha >= INDEX_AT_ONE {
            return 1.0;
        }
        let hits = draws
            .iter()
            .filter(|u| focal.contains(idx.alpha, theta, u))
            .count();
        let coverage = hits as f64 / n_rep as f64;
        (1.0 - coverage).min(idx.alpha).max(0.0)
    };
    let contour = Contour::new(domain, eval);
    // Audit the supremum over the grid.
    let mut sup = 0.0f64;
    for pt in contour.domain.grid() {
        sup = sup.max(contour.eval(&pt));
        if sup >= 1.0 {
            break;
        }
    }
    let stderr = 0.5 / (n_rep as f64).sqrt();
    if sup < 1.0 - 3.0 * stderr {
        let warning = format!(
            "contour supremum {sup:.4} over the domain grid falls short of 1; \
             the assertion-forming step may be incompatible with the data"
        );
        return Ok(contour.with_warning(warning));
    }
    Ok(contour)
}
