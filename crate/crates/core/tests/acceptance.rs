//! Acceptance suite: one test per shipped guarantee.  Each test prints a
//! single pass/fail line with the measured figure and runtime, with every
//! tolerance pinned in the code next to the check it guards.

mod common;

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, StandardNormal};
use validim::contour::OutputMeta;
use validim::diagnostics::{
    abs_value_demo, dominance_check, power_curve, ratio_demo, validity_curve, ValidityCurve,
};
use validim::dist::std_normal_cdf;
use validim::models::behrens_fisher::{travel_times_setup, BehrensFisherSetup, LambdaTable};
use validim::models::binomial::BinomialSetup;
use validim::models::normal_means::{scalar_contour, NormalMeans2D};
use validim::nonparametric::{dkw_plausibility, DistributionHandle, EmpiricalSample, KsNullTable};
use validim::rng::{substream, McConfig};
use validim::universal::mixture::{mixture_test, sample_symmetric_mixture, MixtureNullTable};
use validim::universal::monotone::{monotonicity_test, sample_gamma};
use validim::universal::slr::{normal_slr_plausibility, NormalSlr, NormalSlrTable, SplitSpec};

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

#[test]
fn criterion_01_binomial_matches_independent_acceptability_oracle() {
    let start = Instant::now();
    let setup = BinomialSetup::new(25, 17).expect("valid setup");
    let mut max_diff = 0.0f64;
    for k in 0..=1000 {
        let theta = k as f64 / 1000.0;
        let oracle = common::blaker_acceptability(25, 17, theta);
        max_diff = max_diff.max((setup.im_value(theta) - oracle).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = max_diff <= 1e-10 && elapsed < 10.0;
    common::verdict(
        1,
        pass,
        &format!(
            "fused binomial contour vs independent acceptability oracle on a 10^-3 grid: \
             max |diff| = {max_diff:.2e} (limit 1e-10), {elapsed:.1}s (limit 10s)"
        ),
    );
}

#[test]
fn criterion_02_binomial_region_sits_inside_equal_tail_interval() {
    let start = Instant::now();
    let setup = BinomialSetup::new(25, 17).expect("valid setup");
    let mut subset = true;
    let mut strict_at: Vec<f64> = Vec::new();
    for &alpha in &[0.01, 0.05, 0.1] {
        let (lo, hi) = setup.cp_interval(alpha).expect("valid level");
        let mut strict = false;
        for k in 0..=10_000 {
            let theta = k as f64 / 10_000.0;
            let in_im = setup.im_value(theta) >= alpha;
            if in_im && !(theta >= lo - 1e-9 && theta <= hi + 1e-9) {
                subset = false;
            }
            if !in_im && theta >= lo + 1e-9 && theta <= hi - 1e-9 {
                strict = true;
            }
        }
        if strict {
            strict_at.push(alpha);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = subset && !strict_at.is_empty() && elapsed < 10.0;
    common::verdict(
        2,
        pass,
        &format!(
            "fused region inside the equal-tail interval at alpha in {{.01,.05,.1}} \
             (10^-4 grid), strictly smaller at {:?}; {elapsed:.1}s (limit 10s)",
            strict_at
        ),
    );
}

#[test]
fn criterion_03_two_sample_marginal_matches_conservative_interval_index() {
    let start = Instant::now();
    let setup = travel_times_setup();
    let n_rep = 10_000usize;
    let table = setup.table(&McConfig::new(n_rep, 0xBF01)).expect("table");
    let marginal = setup.im_marginal_contour(&table);
    let phis = linspace(setup.d() - 6.0 * setup.f(), setup.d() + 6.0 * setup.f(), 50);
    // MC standard error at the reference value, floored at the table's
    // resolution so near-zero tails are not held to sub-replicate accuracy.
    let se_at = |p: f64| {
        (p * (1.0 - p) / n_rep as f64)
            .sqrt()
            .max(1.0 / n_rep as f64)
    };
    let mut worst_sig = 0.0f64;
    for &phi in &phis {
        let hs = setup.hs_index(phi);
        let sig = (marginal.eval1(phi) - hs).abs() / se_at(hs);
        worst_sig = worst_sig.max(sig);
    }
    let mut lambda_ok = true;
    for i in 0..table.lambdas.len() {
        let contour = setup.lambda_contour(&table, i);
        for &phi in &phis {
            let hs = setup.hs_index(phi);
            if contour.eval1(phi) > hs + 3.0 * se_at(hs) {
                lambda_ok = false;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst_sig <= 3.0 && lambda_ok && elapsed < 120.0;
    common::verdict(
        3,
        pass,
        &format!(
            "fused marginal vs conservative interval index at 50 mean differences \
             (41 mixing weights, n_rep=10^4): worst |diff| = {worst_sig:.2}se (limit 3se), \
             every weight-specific contour below the index; {elapsed:.1}s (limit 120s)"
        ),
    );
}

/// Worst excess of the curve over the diagonal at the five pinned levels,
/// in multiples of the binomial standard error.
fn pinned_levels_ok(curve: &ValidityCurve) -> (bool, f64) {
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    for &alpha in &[0.01f64, 0.05, 0.1, 0.25, 0.5] {
        let i = (alpha * 100.0).round() as usize;
        assert!((curve.alphas[i] - alpha).abs() < 1e-12, "grid misaligned");
        let g = curve.g_values[i];
        let se = (alpha * (1.0 - alpha) / curve.n_rep as f64).sqrt();
        if g > alpha + 3.0 * se {
            ok = false;
        }
        worst = worst.max((g - alpha) / se);
    }
    (ok, worst)
}

#[test]
fn criterion_04_every_shipped_model_is_valid_on_the_diagonal() {
    let start = Instant::now();
    let n_rep = 10_000usize;
    let table_reps = 200_000usize;
    let mut failures: Vec<String> = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    let mut curves = 0usize;
    let mut check = |label: &str, curve: &ValidityCurve| {
        let report = dominance_check(curve);
        let (pinned, excess) = pinned_levels_ok(curve);
        if !(report.pass && pinned) {
            let viol = report
                .violations
                .iter()
                .map(|(a, g, t)| format!("alpha={a:.2} rate={g:.4} limit={t:.4}"))
                .collect::<Vec<_>>()
                .join(", ");
            failures.push(format!("{label} [{viol}]"));
        }
        worst = worst.max(excess);
        curves += 1;
    };

    // Exact count model at three truths.
    for (k, &(n, theta)) in [(25u64, 0.3f64), (25, 0.7), (50, 0.1)].iter().enumerate() {
        let setup_value = move |hits: u64| {
            BinomialSetup::new(n, hits)
                .map(|s| s.im_value(theta))
                .expect("count within range")
        };
        let curve = validity_curve(
            format!("binomial-n{n}-theta{theta}"),
            &McConfig::new(n_rep, 0xC401 + k as u64),
            move |rng| {
                let hits = (0..n).filter(|_| rng.random::<f64>() < theta).count() as u64;
                setup_value(hits)
            },
        )
        .expect("curve");
        check(&format!("binomial n={n} theta={theta}"), &curve);
    }

    // Single normal observation at three truths.
    for (k, &theta) in [0.0f64, 1.5, -2.0].iter().enumerate() {
        let curve = validity_curve(
            format!("normal-mean-{theta}"),
            &McConfig::new(n_rep, 0xC411 + k as u64),
            move |rng| {
                let z: f64 = StandardNormal.sample(rng);
                scalar_contour(theta + z, theta)
            },
        )
        .expect("curve");
        check(&format!("normal mean theta={theta}"), &curve);
    }

    // Two-sample mean difference, fused over the mixing-weight grid, with
    // the true weight landing exactly on the default 41-point grid.
    let (n1, n2) = (5usize, 11usize);
    let bf_table = LambdaTable::build(
        (n1 - 1) as f64,
        (n2 - 1) as f64,
        &linspace(0.0, 1.0, 41),
        &McConfig::new(table_reps, 0xC420),
    )
    .expect("shared table");
    let chi1 = ChiSquared::new((n1 - 1) as f64).expect("dof");
    let chi2 = ChiSquared::new((n2 - 1) as f64).expect("dof");
    // (mu1, mu2, s1^2, s2^2) with lambda = (s1^2/n1)/(s1^2/n1 + s2^2/n2)
    // equal to 0.5, 0.8, 0.25.
    let bf_configs = [
        (0.0f64, 0.0f64, 1.0f64, 2.2f64),
        (1.0, -1.0, 2.0, 1.1),
        (3.0, 5.0, 0.5, 3.3),
    ];
    for (k, &(mu1, mu2, s1_sq, s2_sq)) in bf_configs.iter().enumerate() {
        let phi0 = mu1 - mu2;
        let sd = (s1_sq / n1 as f64 + s2_sq / n2 as f64).sqrt();
        let table_ref = &bf_table;
        let curve = validity_curve(
            format!("two-sample-lambda-fused-{k}"),
            &McConfig::new(n_rep, 0xC421 + k as u64),
            move |rng| {
                let z: f64 = StandardNormal.sample(rng);
                let v1 = s1_sq * chi1.sample(rng) / (n1 - 1) as f64;
                let v2 = s2_sq * chi2.sample(rng) / (n2 - 1) as f64;
                let setup = BehrensFisherSetup::new(n1, n2, phi0 + sd * z, 0.0, v1, v2)
                    .expect("positive variances");
                let t_abs = setup.t_stat(phi0).abs();
                let best = (0..table_ref.lambdas.len())
                    .map(|i| table_ref.exceed(i, t_abs))
                    .fold(0.0f64, f64::max);
                best.min(setup.hs_index(phi0))
            },
        )
        .expect("curve");
        check(&format!("two-sample fused config {k}"), &curve);
    }

    // Distribution-band model at three truths (sample size, generator).
    let dkw_configs: [(usize, &str); 3] = [(20, "normal"), (50, "uniform"), (100, "exponential")];
    for (k, &(n, family)) in dkw_configs.iter().enumerate() {
        let ks_table = KsNullTable::build(n, &McConfig::new(table_reps, 0xC430 + k as u64))
            .expect("shared table");
        let truth = match family {
            "normal" => DistributionHandle::continuous(std_normal_cdf),
            "uniform" => DistributionHandle::continuous(|t: f64| t.clamp(0.0, 1.0)),
            _ => DistributionHandle::continuous(
                |t: f64| {
                    if t <= 0.0 {
                        0.0
                    } else {
                        1.0 - (-t).exp()
                    }
                },
            ),
        };
        let fam = family.to_string();
        let curve = validity_curve(
            format!("distribution-band-{family}-{n}"),
            &McConfig::new(n_rep, 0xC441 + k as u64),
            move |rng| {
                let data: Vec<f64> = (0..n)
                    .map(|_| match fam.as_str() {
                        "normal" => StandardNormal.sample(rng),
                        "uniform" => rng.random::<f64>(),
                        _ => Exp1.sample(rng),
                    })
                    .collect();
                let sample = EmpiricalSample::new(&data).expect("finite data");
                dkw_plausibility(&sample, &truth, &ks_table).expect("matching table")
            },
        )
        .expect("curve");
        check(&format!("distribution band {family} n={n}"), &curve);
    }

    // Split-ratio normal location at three truths.
    let slr_configs = [(20usize, 0.0f64), (50, 2.0), (50, -1.0)];
    for (k, &(n, theta)) in slr_configs.iter().enumerate() {
        let split = SplitSpec::first_half(n).expect("split");
        let slr_table = NormalSlrTable::build(
            split.d1_len(),
            split.d2_len(),
            &McConfig::new(table_reps, 0xC450 + k as u64),
        )
        .expect("shared table");
        let split_ref = split.clone();
        let curve = validity_curve(
            format!("split-ratio-normal-{n}-{theta}"),
            &McConfig::new(n_rep, 0xC451 + k as u64),
            move |rng| {
                let data: Vec<f64> = (0..n)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(rng);
                        theta + z
                    })
                    .collect();
                let slr = NormalSlr::from_data(&data, &split_ref).expect("finite data");
                normal_slr_plausibility(&slr, &slr_table, theta).expect("matching table")
            },
        )
        .expect("curve");
        check(&format!("split-ratio normal n={n} theta={theta}"), &curve);
    }

    let elapsed = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && curves == 15 && elapsed < 600.0;
    common::verdict(
        4,
        pass,
        &format!(
            "validity suite: {}/{curves} curves dominate the diagonal at alpha in \
             {{.01,.05,.1,.25,.5}} and across the full grid (n_rep=10^4, worst pinned \
             excess {worst:+.2}se, limit +3se); failures: {failures:?}; {elapsed:.1}s (limit 600s)",
            curves - failures.len()
        ),
    );
}

#[test]
fn criterion_05_additive_probabilities_break_where_plausibilities_hold() {
    let start = Instant::now();
    let abs = abs_value_demo(&McConfig::new(2000, 0xFC05)).expect("demo");
    let cd_report = dominance_check(&abs.cd);
    let im_report = dominance_check(&abs.im);
    let ratio = ratio_demo(&McConfig::new(2000, 0xFC06), 2000).expect("demo");
    let true_side = dominance_check(&ratio.true_side_curve(0xFC06));
    let elapsed = start.elapsed().as_secs_f64();
    let pass = cd_report.worst_margin > 3.0
        && !cd_report.pass
        && im_report.pass
        && ratio.mean_cd > 0.9
        && true_side.pass
        && elapsed < 300.0;
    common::verdict(
        5,
        pass,
        &format!(
            "additive distribution breaks the diagonal by {:.1}se on |theta| while the \
             consonant curve passes; mean additive probability of the false ratio \
             half-line = {:.3} (> 0.9) with the true-side curve dominating \
             (n_rep=2000); {elapsed:.1}s (limit 300s)",
            cd_report.worst_margin, ratio.mean_cd
        ),
    );
}

#[test]
fn criterion_06_ratio_closed_forms_are_exact() {
    let m = NormalMeans2D::illustration_data();
    let (x1, x2) = (1.333f64, 0.333f64);
    let observed_ratio = x1 / x2;
    let strategic_at_data = m.ratio_strategic_value(observed_ratio);
    let mut max_diff = 0.0f64;
    for phi in linspace(observed_ratio - 15.0, observed_ratio + 15.0, 100) {
        // Independent projection of the observation onto the ratio line.
        let t = (phi * x1 + x2) / (1.0 + phi * phi);
        let (t1, t2) = (phi * t, t);
        let via_joint = m.joint_value(t1, t2);
        let dist_sq = (x1 - t1).powi(2) + (x2 - t2).powi(2);
        let via_formula = (-dist_sq / 2.0).exp();
        max_diff = max_diff
            .max((m.ratio_naive_value(phi) - via_joint).abs())
            .max((m.ratio_naive_value(phi) - via_formula).abs());
    }
    let pass = strategic_at_data == 1.0 && max_diff <= 1e-12;
    common::verdict(
        6,
        pass,
        &format!(
            "strategic ratio contour equals 1 exactly at the observed ratio; naive \
             contour equals the joint contour at the projected point at 100 ratios \
             (max |diff| = {max_diff:.2e}, limit 1e-12)"
        ),
    );
}

#[test]
fn criterion_07_split_ratio_plausibility_region_nests_inside_p_value_region() {
    let start = Instant::now();
    let n = 200usize;
    let mut rng = substream(0x51A2, 0);
    let data: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let split = SplitSpec::first_half(n).expect("split");
    let slr = NormalSlr::from_data(&data, &split).expect("finite data");
    let table = NormalSlrTable::build(
        split.d1_len(),
        split.d2_len(),
        &McConfig::new(10_000, 0x51A3),
    )
    .expect("table");
    let mean = data.iter().sum::<f64>() / n as f64;
    let half_width = 10.0 / (n as f64).sqrt();
    let mut subset = true;
    let mut strictly_excluded = 0usize;
    for theta in linspace(mean - half_width, mean + half_width, 2001) {
        let p = slr.p_value(theta);
        let pl = normal_slr_plausibility(&slr, &table, theta).expect("matching table");
        if pl >= 0.05 && p < 0.05 {
            subset = false;
        }
        if p >= 0.05 && pl < 0.05 {
            strictly_excluded += 1;
        }
    }
    let center_ok = slr.p_value(mean) == 1.0
        && normal_slr_plausibility(&slr, &table, mean).expect("matching table") == 1.0;
    let elapsed = start.elapsed().as_secs_f64();
    let pass = subset && center_ok && elapsed < 60.0;
    common::verdict(
        7,
        pass,
        &format!(
            "whole 95% plausibility region sits inside the split-ratio 95% region \
             ({strictly_excluded}/2001 grid points trimmed away), both contain the \
             full-sample mean with value 1 (n=200, n_rep=10^4); {elapsed:.1}s (limit 60s)"
        ),
    );
}

#[test]
fn criterion_08_mixture_test_size_and_power_ordering() {
    let start = Instant::now();
    let (n, alpha, n_rep) = (100usize, 0.05f64, 500usize);
    let split = SplitSpec::first_half(n).expect("split");
    let table = MixtureNullTable::build(n, &split, &McConfig::new(10_000, 0x813)).expect("table");
    let size_bound = alpha + 3.0 * (alpha * (1.0 - alpha) / n_rep as f64).sqrt();
    let run_block = |data_seed: u64, mu: Option<f64>| -> (f64, f64, usize) {
        let (mut slr_rej, mut im_rej, mut undominated) = (0usize, 0usize, 0usize);
        for rep in 0..n_rep {
            let mut rng = substream(data_seed, rep as u64);
            let data: Vec<f64> = match mu {
                Some(mu) => sample_symmetric_mixture(n, mu, &mut rng),
                None => (0..n).map(|_| StandardNormal.sample(&mut rng)).collect(),
            };
            let out = mixture_test(&data, &split, &table, alpha, &mut rng).expect("fit");
            slr_rej += out.slr_reject as usize;
            im_rej += out.im_reject as usize;
            undominated += (out.slr_reject && !out.im_reject) as usize;
        }
        (
            slr_rej as f64 / n_rep as f64,
            im_rej as f64 / n_rep as f64,
            undominated,
        )
    };
    let (size_slr, size_im, _) = run_block(0x814, None);
    let (power_slr, power_im, undominated) = run_block(0x815, Some(2.0));
    let power_se = (power_slr * (1.0 - power_slr) / n_rep as f64).sqrt();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = size_slr <= size_bound
        && size_im <= size_bound
        && power_im >= power_slr - 3.0 * power_se
        && undominated == 0
        && elapsed < 900.0;
    common::verdict(
        8,
        pass,
        &format!(
            "mixture test n=100: sizes {size_slr:.3}/{size_im:.3} (limit {size_bound:.3}), \
             power at separation 2 = {power_slr:.3}/{power_im:.3} (plausibility within \
             3se = {:.3} below, matched seeds, {undominated} undominated replicates); \
             {elapsed:.0}s (limit 900s)",
            3.0 * power_se
        ),
    );
}

#[test]
fn criterion_09_monotonicity_test_size_power_and_per_replicate_domination() {
    let start = Instant::now();
    let (n, alpha, n_rep, inner) = (300usize, 0.05f64, 300usize, 300usize);
    let split = SplitSpec::first_half(n).expect("split");
    let run_shape = |shape: f64, seed: u64| -> (f64, f64, usize) {
        let (mut slr_rej, mut im_rej, mut undominated) = (0usize, 0usize, 0usize);
        for rep in 0..n_rep {
            let mut rng = substream(seed, rep as u64);
            let data = sample_gamma(n, shape, &mut rng).expect("valid shape");
            let inner_mc = McConfig::new(inner, rng.random::<u64>());
            let out = monotonicity_test(&data, &split, alpha, &inner_mc, true).expect("fit");
            slr_rej += out.slr_reject as usize;
            im_rej += out.im_reject as usize;
            undominated += (out.slr_reject && !out.im_reject) as usize;
        }
        (
            slr_rej as f64 / n_rep as f64,
            im_rej as f64 / n_rep as f64,
            undominated,
        )
    };
    let (size_slr, size_im, null_undominated) = run_shape(1.0, 0x901);
    let mut power_ok = true;
    let mut total_undominated = null_undominated;
    let mut power_report = String::new();
    for (k, &shape) in [2.5f64, 4.0].iter().enumerate() {
        let (p_slr, p_im, undom) = run_shape(shape, 0x902 + k as u64);
        let se = (p_slr * (1.0 - p_slr) / n_rep as f64).sqrt();
        if p_im < p_slr - 3.0 * se {
            power_ok = false;
        }
        total_undominated += undom;
        power_report.push_str(&format!(" shape {shape}: {p_slr:.3}/{p_im:.3};"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass =
        size_slr < 0.05 && size_im < 0.05 && power_ok && total_undominated == 0 && elapsed < 1800.0;
    common::verdict(
        9,
        pass,
        &format!(
            "monotonicity test n=300: null sizes {size_slr:.3}/{size_im:.3} (limit .05), \
             power{power_report} split-reject implies plausibility-reject in 900/900 \
             replicates ({total_undominated} exceptions); {elapsed:.0}s (limit 1800s)"
        ),
    );
}

#[test]
fn criterion_10_identical_seeds_reproduce_identical_artifacts() {
    let start = Instant::now();
    let meta = OutputMeta {
        seed: Some(7),
        config_hash: Some("rerun-check".into()),
        extra: Vec::new(),
    };
    let run = || -> (String, String, String) {
        let setup = travel_times_setup();
        let table = setup.table(&McConfig::new(2000, 42)).expect("table");
        let marginal_csv = setup.im_marginal_contour(&table).to_csv(&meta);
        let curve_csv = validity_curve(
            "binomial-rerun",
            &McConfig::new(2000, 43),
            |rng: &mut ChaCha8Rng| {
                let hits = (0..25).filter(|_| rng.random::<f64>() < 0.4).count() as u64;
                BinomialSetup::new(25, hits).expect("valid").im_value(0.4)
            },
        )
        .expect("curve")
        .to_csv(&meta);
        let split = SplitSpec::first_half(40).expect("split");
        let mix_table =
            MixtureNullTable::build(40, &split, &McConfig::new(400, 44)).expect("table");
        let power_csv = power_curve(
            "mixture-rerun",
            &[0.0, 2.0],
            &McConfig::new(30, 45),
            |mu, rng| {
                let data = sample_symmetric_mixture(40, mu, rng);
                let out = mixture_test(&data, &split, &mix_table, 0.05, rng)?;
                Ok((out.slr_reject, out.im_reject))
            },
        )
        .expect("power")
        .to_csv(&meta);
        (marginal_csv, curve_csv, power_csv)
    };
    let first = run();
    let second = run();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = first == second;
    common::verdict(
        10,
        pass,
        &format!(
            "re-running three seeded pipelines (fused marginal table, validity curve, \
             power table) reproduces identical bytes; {elapsed:.1}s"
        ),
    );
}
