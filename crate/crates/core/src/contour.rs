//! Consonant plausibility measures and their contours.
//!
//! A contour is a pointwise plausibility `theta -> [0,1]`. The induced
//! capacity of an assertion `A` is the supremum of the contour over `A`;
//! its dual lower probability is one minus the capacity of the complement.
//! Suprema are taken over a declared domain grid with local refinement, so
//! the grid resolution is part of each result's advertised tolerance.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{ImError, Result};
use crate::procedure::ConfidenceFamily;
use crate::search;

/// Rectangular parameter domain with a search resolution per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub bounds: Vec<(f64, f64)>,
    pub resolution: usize,
}

impl Domain {
    pub fn new(bounds: Vec<(f64, f64)>, resolution: usize) -> Self {
        assert!(!bounds.is_empty() && resolution >= 2);
        assert!(bounds.iter().all(|&(lo, hi)| hi > lo));
        Domain { bounds, resolution }
    }

    /// One-dimensional domain with the default search resolution.
    pub fn interval(lo: f64, hi: f64) -> Self {
        Domain::new(vec![(lo, hi)], search::DEFAULT_GRID)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Grid along axis `d` at the domain resolution.
    pub fn axis(&self, d: usize) -> Vec<f64> {
        search::grid_points(self.bounds[d].0, self.bounds[d].1, self.resolution)
    }

    /// Full grid as points (row-major over axes).
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.dim()).map(|d| self.axis(d)).collect();
        let mut pts = vec![Vec::new()];
        for axis in &axes {
            let mut next = Vec::with_capacity(pts.len() * axis.len());
            for p in &pts {
                for &v in axis {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
            pts = next;
        }
        pts
    }
}

/// A plausibility contour over a declared domain.
#[derive(Clone)]
pub struct Contour {
    eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub domain: Domain,
    /// Construction-time notes (for example a fused contour whose observed
    /// supremum fell visibly short of one).
    pub warnings: Vec<String>,
}

impl Contour {
    pub fn new(domain: Domain, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Contour {
            eval: Arc::new(eval),
            domain,
            warnings: Vec::new(),
        }
    }

    pub fn with_warning(mut self, warning: String) -> Self {
        self.warnings.push(warning);
        self
    }

    /// Plausibility of a single parameter point, clamped to [0,1].
    pub fn eval(&self, theta: &[f64]) -> f64 {
        debug_assert_eq!(theta.len(), self.domain.dim());
        (self.eval)(theta).clamp(0.0, 1.0)
    }

    /// Convenience for one-dimensional contours.
    pub fn eval1(&self, theta: f64) -> f64 {
        self.eval(&[theta])
    }

    /// Contour table over the domain grid as CSV: one `#` metadata line,
    /// then `theta_1,...,theta_k,plausibility` rows.
    pub fn to_csv(&self, meta: &OutputMeta) -> String {
        let mut out = String::new();
        out.push_str(&meta.header_line());
        let dim = self.domain.dim();
        for d in 0..dim {
            out.push_str(&format!("theta_{},", d + 1));
        }
        out.push_str("plausibility\n");
        for pt in self.domain.grid() {
            for v in &pt {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&format!("{}\n", self.eval(&pt)));
        }
        out
    }
}

/// Metadata stamped into every exported table.
#[derive(Debug, Clone, Default)]
pub struct OutputMeta {
    pub seed: Option<u64>,
    pub config_hash: Option<String>,
    pub extra: Vec<(String, String)>,
}

impl OutputMeta {
    pub fn header_line(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        if let Some(s) = self.seed {
            parts.push(format!("seed={s}"));
        }
        if let Some(h) = &self.config_hash {
            parts.push(format!("config={h}"));
        }
        for (k, v) in &self.extra {
            parts.push(format!("{k}={v}"));
        }
        if parts.is_empty() {
            "#\n".to_string()
        } else {
            format!("# {}\n", parts.join(" "))
        }
    }
}

/// An assertion about the parameter: a measurable subset given by a
/// membership predicate, with an optional sub-box hint for the search.
#[derive(Clone)]
pub struct Assertion {
    membership: Arc<dyn Fn(&[f64]) -> bool + Send + Sync>,
    pub hint: Option<Vec<(f64, f64)>>,
}

impl Assertion {
    pub fn new(membership: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        Assertion {
            membership: Arc::new(membership),
            hint: None,
        }
    }

    pub fn with_hint(mut self, hint: Vec<(f64, f64)>) -> Self {
        self.hint = Some(hint);
        self
    }

    /// Scalar interval assertion `lo <= theta <= hi`.
    pub fn interval(lo: f64, hi: f64) -> Self {
        Assertion::new(move |t: &[f64]| t[0] >= lo && t[0] <= hi).with_hint(vec![(lo, hi)])
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        (self.membership)(theta)
    }

    /// Complement assertion; any search hint no longer applies.
    pub fn complement(&self) -> Assertion {
        let m = self.membership.clone();
        Assertion {
            membership: Arc::new(move |t: &[f64]| !m(t)),
            hint: None,
        }
    }
}

/// Capacity estimate for one assertion.
#[derive(Debug, Clone, Serialize)]
pub struct Capacity {
    pub value: f64,
    /// False when no search point satisfied the assertion, in which case
    /// `value` is 0 and should be read as "assertion invisible at this
    /// resolution" rather than a genuine supremum.
    pub assertion_seen: bool,
}

/// Plausibility region at one level.
#[derive(Debug, Clone, Serialize)]
pub struct RegionDescriptor {
    pub level: f64,
    /// Maximal intervals of `{theta : contour(theta) > level}` for scalar
    /// parameters (empty for higher dimensions).
    pub intervals: Vec<[f64; 2]>,
    /// Retained grid points for parameters of dimension two or more.
    pub points: Vec<Vec<f64>>,
    pub warning: Option<String>,
}

impl RegionDescriptor {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && self.points.is_empty()
    }

    pub fn contains1(&self, theta: f64) -> bool {
        self.intervals
            .iter()
            .any(|iv| theta >= iv[0] && theta <= iv[1])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("region serializes")
    }
}

/// A consonant plausibility measure: the maxitive capacity generated by a
/// contour.
#[derive(Clone)]
pub struct ConsonantMeasure {
    pub contour: Contour,
}

impl ConsonantMeasure {
    pub fn new(contour: Contour) -> Self {
        ConsonantMeasure { contour }
    }

    /// Upper probability of `A`: supremum of the contour over `A`,
    /// evaluated on the (hinted) grid with local refinement in one dimension.
    pub fn upper_probability(&self, a: &Assertion) -> Capacity {
        let domain = &self.contour.domain;
        let bounds: Vec<(f64, f64)> = match &a.hint {
            Some(h) => h
                .iter()
                .zip(&domain.bounds)
                .map(|(&(hlo, hhi), &(dlo, dhi))| (hlo.max(dlo), hhi.min(dhi)))
                .collect(),
            None => domain.bounds.clone(),
        };
        if bounds.iter().any(|&(lo, hi)| hi < lo) {
            return Capacity {
                value: 0.0,
                assertion_seen: false,
            };
        }
        let dim = domain.dim();
        let res = domain.resolution;
        if dim == 1 {
            let (lo, hi) = bounds[0];
            let pts = if hi > lo {
                search::grid_points(lo, hi, res)
            } else {
                vec![lo]
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, &t) in pts.iter().enumerate() {
                if a.contains(&[t]) {
                    let v = self.contour.eval1(t);
                    if best.map_or(true, |(_, bv)| v > bv) {
                        best = Some((i, v));
                    }
                }
            }
            let Some((bi, bv)) = best else {
                return Capacity {
                    value: 0.0,
                    assertion_seen: false,
                };
            };
            // Refine on a finer local grid, keeping only member points.
            let cell_lo = if bi == 0 { pts[0] } else { pts[bi - 1] };
            let cell_hi = if bi + 1 == pts.len() {
                pts[bi]
            } else {
                pts[bi + 1]
            };
            let mut value = bv;
            if cell_hi > cell_lo {
                for &t in &search::grid_points(cell_lo, cell_hi, 129) {
                    if a.contains(&[t]) {
                        value = value.max(self.contour.eval1(t));
                    }
                }
            }
            Capacity {
                value,
                assertion_seen: true,
            }
        } else {
            let contour = self.contour.clone();
            let assertion = a.clone();
            let f = move |p: &[f64]| {
                if assertion.contains(p) {
                    contour.eval(p)
                } else {
                    f64::NEG_INFINITY
                }
            };
            let res_per_dim = (res as f64).powf(1.0 / dim as f64).ceil() as usize;
            let (_, v) = search::box_grid_max(&f, &bounds, res_per_dim.clamp(17, 257));
            if v.is_finite() {
                Capacity {
                    value: v.clamp(0.0, 1.0),
                    assertion_seen: true,
                }
            } else {
                Capacity {
                    value: 0.0,
                    assertion_seen: false,
                }
            }
        }
    }

    /// Dual lower probability: `1 - upper(complement of A)`.
    pub fn lower_probability(&self, a: &Assertion) -> Capacity {
        let upper = self.upper_probability(&a.complement());
        Capacity {
            value: 1.0 - upper.value,
            assertion_seen: upper.assertion_seen,
        }
    }

    /// Region `{theta : contour(theta) > level}`.
    ///
    /// Scalar parameters get maximal intervals with endpoints sharpened by
    /// bisection between neighboring grid points; higher dimensions get the
    /// retained grid points.
    pub fn plausibility_region(&self, level: f64) -> RegionDescriptor {
        let domain = &self.contour.domain;
        if domain.dim() == 1 {
            let pts = domain.axis(0);
            let inside: Vec<bool> = pts.iter().map(|&t| self.contour.eval1(t) > level).collect();
            let mut intervals: Vec<[f64; 2]> = Vec::new();
            let mut start: Option<f64> = None;
            let tol = (domain.bounds[0].1 - domain.bounds[0].0) * 1e-10;
            for i in 0..pts.len() {
                if inside[i] && start.is_none() {
                    let lo = if i == 0 {
                        pts[0]
                    } else {
                        // contour crosses `level` between pts[i-1] and pts[i]
                        search::bisect_boundary(
                            |t| self.contour.eval1(t) <= level,
                            pts[i - 1],
                            pts[i],
                            tol,
                        )
                    };
                    start = Some(lo);
                }
                if !inside[i] {
                    if let Some(lo) = start.take() {
                        let hi = search::bisect_boundary(
                            |t| self.contour.eval1(t) > level,
                            pts[i - 1],
                            pts[i],
                            tol,
                        );
                        intervals.push([lo, hi]);
                    }
                }
            }
            if let Some(lo) = start {
                intervals.push([lo, *pts.last().unwrap()]);
            }
            let warning = if intervals.is_empty() {
                Some(format!(
                    "no parameter reaches plausibility {level} on the search grid"
                ))
            } else {
                None
            };
            RegionDescriptor {
                level,
                intervals,
                points: Vec::new(),
                warning,
            }
        } else {
            let points: Vec<Vec<f64>> = domain
                .grid()
                .into_iter()
                .filter(|p| self.contour.eval(p) > level)
                .collect();
            let warning = if points.is_empty() {
                Some(format!("no grid point reaches plausibility {level}"))
            } else {
                None
            };
            RegionDescriptor {
                level,
                intervals: Vec::new(),
                points,
                warning,
            }
        }
    }
}

/// How to search a fiber `{theta : phi(theta) = phi0}` when marginalizing a
/// contour to a scalar feature `phi`.
#[derive(Clone)]
pub struct FiberSearch {
    /// Maps `(phi0, t)` to a full parameter point on the fiber; `t` ranges
    /// over `t_range`.
    embed: Arc<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>,
    pub t_range: (f64, f64),
    pub grid: usize,
}

impl FiberSearch {
    pub fn new(
        embed: impl Fn(f64, f64) -> Vec<f64> + Send + Sync + 'static,
        t_range: (f64, f64),
        grid: usize,
    ) -> Self {
        FiberSearch {
            embed: Arc::new(embed),
            t_range,
            grid,
        }
    }

    /// Fiber with a known maximizing point: no search, just an embedding.
    pub fn point(map: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        FiberSearch {
            embed: Arc::new(move |phi, _| map(phi)),
            t_range: (0.0, 0.0),
            grid: 1,
        }
    }

    pub fn embed(&self, phi: f64, t: f64) -> Vec<f64> {
        (self.embed)(phi, t)
    }
}

/// Marginal contour of a scalar feature: supremum of the joint contour over
/// each fiber, searched via the fiber parameterization.
pub fn marginal_contour(joint: &Contour, fiber: FiberSearch, phi_domain: Domain) -> Contour {
    assert_eq!(phi_domain.dim(), 1);
    let joint = joint.clone();
    Contour::new(phi_domain, move |phi: &[f64]| {
        let phi0 = phi[0];
        if fiber.grid <= 1 {
            joint.eval(&fiber.embed(phi0, fiber.t_range.0))
        } else {
            let (_, v) = search::grid_golden_max(
                |t| joint.eval(&fiber.embed(phi0, t)),
                fiber.t_range.0,
                fiber.t_range.1,
                fiber.grid,
            );
            v
        }
    })
}

/// Plausibility contour induced by a nested confidence family at data `x`:
/// the level index `sup{alpha : C_alpha(x) contains theta}`, located by
/// bisection to within `search::LEVEL_TOL`.
///
/// Nestedness is audited at construction over the domain grid and a level
/// ladder; a family whose membership flips from out back to in as the level
/// grows is rejected.
pub fn contour_from_confidence(
    family: ConfidenceFamily,
    x: Vec<f64>,
    domain: Domain,
) -> Result<Contour> {
    let audit_levels: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    for theta in domain.grid() {
        let mut seen_out = None;
        for &a in &audit_levels {
            let inside = family.contains(a, &x, &theta);
            match (inside, seen_out) {
                (false, None) => seen_out = Some(a),
                (true, Some(first_out)) => {
                    return Err(ImError::NonNestedFamily {
                        alpha: a,
                        detail: format!(
                            "theta {:?} left the region at level {first_out} but re-entered",
                            theta
                        ),
                    });
                }
                _ => {}
            }
        }
    }
    Ok(Contour::new(domain, move |theta: &[f64]| {
        if family.contains(1.0 - 1e-12, &x, theta) {
            return 1.0;
        }
        if !family.contains(1e-12, &x, theta) {
            return 0.0;
        }
        search::bisect_boundary(
            |a| family.contains(a, &x, theta),
            0.0,
            1.0,
            search::LEVEL_TOL,
        )
    }))
}
