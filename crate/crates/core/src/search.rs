//! Grid and golden-section search utilities.
//!
//! Suprema over parameter sets are computed on a grid (default 512 points)
//! followed by golden-section refinement around the best cell. The grid
//! resolution is part of the advertised numeric tolerance of every caller.

/// Default grid resolution for one-dimensional suprema.
pub const DEFAULT_GRID: usize = 512;

/// Tolerance for bisection over confidence levels.
pub const LEVEL_TOL: f64 = 1e-8;

/// `n` evenly spaced points covering `[lo, hi]` inclusive.
pub fn grid_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi >= lo);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Golden-section maximization on `[lo, hi]`, assuming `f` is unimodal there.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        if (hi - lo).abs() < 1e-12 * (1.0 + lo.abs() + hi.abs()) {
            break;
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximize `f` on `[lo, hi]`: scan an `n_grid`-point grid, then refine the
/// best bracket by golden section. Returns `(argmax, max)`.
pub fn grid_golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n_grid: usize) -> (f64, f64) {
    if hi <= lo {
        let v = f(lo);
        return (lo, v);
    }
    let pts = grid_points(lo, hi, n_grid.max(3));
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &t) in pts.iter().enumerate() {
        let v = f(t);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let a = if best_i == 0 { pts[0] } else { pts[best_i - 1] };
    let b = if best_i + 1 == pts.len() {
        pts[best_i]
    } else {
        pts[best_i + 1]
    };
    let (x, v) = golden_max(&f, a, b);
    if v >= best_v {
        (x, v)
    } else {
        (pts[best_i], best_v)
    }
}

/// Multistart variant: split `[lo, hi]` into `starts` panels and run the
/// grid-plus-golden search in each, keeping the best result.
pub fn multistart_max(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    starts: usize,
    grid_per_start: usize,
) -> (f64, f64) {
    let starts = starts.max(1);
    let mut best = (lo, f64::NEG_INFINITY);
    for k in 0..starts {
        let a = lo + (hi - lo) * k as f64 / starts as f64;
        let b = lo + (hi - lo) * (k + 1) as f64 / starts as f64;
        let (x, v) = grid_golden_max(&f, a, b, grid_per_start.max(3));
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Maximize `f` over a rectangular box by a full grid scan followed by two
/// sweeps of coordinate-wise golden refinement from the best grid point.
pub fn box_grid_max(
    f: &dyn Fn(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    res_per_dim: usize,
) -> (Vec<f64>, f64) {
    assert!(!bounds.is_empty());
    let res = res_per_dim.max(2);
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .map(|&(lo, hi)| grid_points(lo, hi, res))
        .collect();
    let dim = bounds.len();
    let mut idx = vec![0usize; dim];
    let mut best_pt = vec![0.0; dim];
    let mut best_v = f64::NEG_INFINITY;
    'outer: loop {
        let pt: Vec<f64> = idx.iter().enumerate().map(|(d, &i)| axes[d][i]).collect();
        let v = f(&pt);
        if v > best_v {
            best_v = v;
            best_pt = pt;
        }
        // odometer increment
        for d in 0..dim {
            idx[d] += 1;
            if idx[d] < res {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    // Coordinate refinement around the best grid point.
    let mut pt = best_pt.clone();
    for _ in 0..2 {
        for d in 0..dim {
            let step = (bounds[d].1 - bounds[d].0) / (res - 1) as f64;
            let lo = (pt[d] - step).max(bounds[d].0);
            let hi = (pt[d] + step).min(bounds[d].1);
            let (x, v) = golden_max(
                |t| {
                    let mut q = pt.clone();
                    q[d] = t;
                    f(&q)
                },
                lo,
                hi,
            );
            if v > best_v {
                best_v = v;
                pt[d] = x;
                best_pt = pt.clone();
            }
        }
    }
    (best_pt, best_v)
}

/// Find the boundary of a monotone predicate on `[lo, hi]`: assuming
/// `pred(lo) == true` and `pred(hi) == false`, returns a point within `tol`
/// of the flip. If the predicate never flips the matching endpoint comes back.
pub fn bisect_boundary(pred: impl Fn(f64) -> bool, lo: f64, hi: f64, tol: f64) -> f64 {
    let mut lo = lo;
    let mut hi = hi;
    if !pred(lo) {
        return lo;
    }
    if pred(hi) {
        return hi;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = grid_golden_max(|t| 1.0 - (t - 0.3).powi(2), 0.0, 1.0, 64);
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-6);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn grid_catches_narrow_spike_missed_by_unimodal_assumption() {
        // Two bumps; the grid stage must land in the taller one's bracket.
        let f =
            |t: f64| (-(t - 0.2).powi(2) / 0.001).exp() + 2.0 * (-(t - 0.8).powi(2) / 0.001).exp();
        let (x, v) = grid_golden_max(f, 0.0, 1.0, 512);
        assert_abs_diff_eq!(x, 0.8, epsilon = 1e-4);
        assert!(v > 1.99);
    }

    #[test]
    fn box_search_peaks_in_two_dims() {
        let f = |p: &[f64]| -(p[0] - 1.0).powi(2) - (p[1] + 0.5).powi(2);
        let (pt, v) = box_grid_max(&f, &[(-2.0, 2.0), (-2.0, 2.0)], 41);
        assert_abs_diff_eq!(pt[0], 1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(pt[1], -0.5, epsilon = 1e-3);
        assert!(v > -1e-6);
    }

    #[test]
    fn bisection_locates_flip() {
        let b = bisect_boundary(|t| t < 0.625, 0.0, 1.0, 1e-9);
        assert_abs_diff_eq!(b, 0.625, epsilon = 1e-8);
    }

    #[test]
    fn bisection_handles_constant_predicates() {
        assert_eq!(bisect_boundary(|_| false, 0.0, 1.0, 1e-9), 0.0);
        assert_eq!(bisect_boundary(|_| true, 0.0, 1.0, 1e-9), 1.0);
    }
}
