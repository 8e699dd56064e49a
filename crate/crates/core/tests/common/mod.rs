//! Shared oracles and reporting helpers for the integration suites.

use statrs::distribution::{Binomial, Discrete, DiscreteCDF};

/// Acceptability of `theta` after `x` successes in `n` trials, written
/// directly from the definition: the probability that a fresh count's
/// smaller tail mass is no larger than the observed count's.
pub fn blaker_acceptability(n: u64, x: u64, theta: f64) -> f64 {
    if theta <= 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if theta >= 1.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    let d = Binomial::new(theta, n).expect("validated parameters");
    let lower = |y: u64| if y >= n { 1.0 } else { d.cdf(y) };
    let upper = |y: u64| if y == 0 { 1.0 } else { 1.0 - lower(y - 1) };
    let observed = lower(x).min(upper(x));
    (0..=n)
        .filter(|&y| lower(y).min(upper(y)) <= observed)
        .map(|y| d.pmf(y))
        .sum()
}

/// Prints one pass/fail line for the acceptance log, then enforces it.
pub fn verdict(index: usize, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {index:02} {status} — {detail}");
    assert!(pass, "criterion {index:02} failed: {detail}");
}
