//! Implementations of the five subcommands.
//!
//! Every command builds its artifacts from the effective (post-override)
//! configuration, stamps seed and config hash into each output, and writes
//! either to `--out` or to standard output.

use std::path::{Path, PathBuf};

use serde_json::json;
use validim::contour::{Domain, OutputMeta};
use validim::diagnostics::{
    abs_value_demo, dominance_check, power_curve, ratio_demo, validity_curve, DominanceReport,
    ValidityCurve,
};
use validim::models::behrens_fisher::BehrensFisherSetup;
use validim::models::binomial::BinomialSetup;
use validim::models::normal_means::NormalMeans2D;
use validim::nonparametric::{dkw_plausibility, DistributionHandle, EmpiricalSample, KsNullTable};
use validim::rng::McConfig;
use validim::universal::mixture::{mixture_test, sample_symmetric_mixture, MixtureNullTable};
use validim::universal::monotone::{monotonicity_test, sample_gamma};
use validim::universal::slr::{normal_slr_plausibility, NormalSlr, NormalSlrTable};

use crate::config::{
    self, config_hash, ContourConfig, PowerConfig, SplitKind, TestConfig, ValidateConfig,
};
use crate::CliError;

/// Writes `content` to `out` when given, otherwise to standard output.
fn deliver(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Grids need two points to have a step; anything smaller is a config error.
fn require_grid(grid: usize) -> Result<(), CliError> {
    if grid < 2 {
        return Err(CliError::Config(
            "grid must hold at least two points".into(),
        ));
    }
    Ok(())
}

fn meta_for(seed: Option<u64>, hash: &str, extra: Vec<(String, String)>) -> OutputMeta {
    OutputMeta {
        seed,
        config_hash: Some(hash.to_string()),
        extra,
    }
}

/// Two-method comparison table over a shared one-dimensional grid.
fn comparison_csv(
    meta: &OutputMeta,
    param_name: &str,
    columns: (&str, &str),
    grid: &[f64],
    eval: impl Fn(f64) -> (f64, f64),
) -> String {
    let mut out = meta.header_line();
    out.push_str(&format!("{param_name},{},{}\n", columns.0, columns.1));
    for &p in grid {
        let (a, b) = eval(p);
        out.push_str(&format!("{p},{a},{b}\n"));
    }
    out
}

/// `contour`: plausibility tables for the worked models.
pub fn cmd_contour(
    mut cfg: ContourConfig,
    seed_over: Option<u64>,
    reps_over: Option<usize>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    cfg.apply_overrides(seed_over, reps_over);
    let hash = config_hash(&cfg);
    let csv = match &cfg {
        ContourConfig::Binomial { n, x, grid } => {
            require_grid(*grid)?;
            let setup = BinomialSetup::new(*n, *x).map_err(CliError::from_precondition)?;
            let points: Vec<f64> = (0..*grid).map(|k| k as f64 / (*grid - 1) as f64).collect();
            let meta = meta_for(
                Some(seed_over.unwrap_or(0)),
                &hash,
                vec![("model".into(), "binomial".into())],
            );
            comparison_csv(
                &meta,
                "theta",
                ("cp_plausibility", "im_plausibility"),
                &points,
                |t| (setup.cp_index(t), setup.im_value(t)),
            )
        }
        ContourConfig::BehrensFisher {
            n1,
            m1,
            v1,
            n2,
            m2,
            v2,
            lambda_points,
            n_rep,
            seed,
            grid,
        } => {
            require_grid(*grid)?;
            if *lambda_points < 2 {
                return Err(CliError::Config(
                    "lambda_points must be at least two".into(),
                ));
            }
            let lambdas: Vec<f64> = (0..*lambda_points)
                .map(|i| i as f64 / (*lambda_points - 1) as f64)
                .collect();
            let setup = BehrensFisherSetup::new(*n1, *n2, *m1, *m2, *v1, *v2)
                .and_then(|s| s.with_lambda_grid(lambdas))
                .map_err(CliError::from_precondition)?;
            let table = setup
                .table(&McConfig::new(*n_rep, *seed))
                .map_err(CliError::from_precondition)?;
            let marginal = setup.im_marginal_contour(&table);
            let domain = Domain::new(
                vec![(setup.d() - 6.0 * setup.f(), setup.d() + 6.0 * setup.f())],
                *grid,
            );
            let meta = meta_for(
                Some(*seed),
                &hash,
                vec![
                    ("model".into(), "behrens-fisher".into()),
                    ("n_rep".into(), n_rep.to_string()),
                ],
            );
            comparison_csv(
                &meta,
                "phi",
                ("hs_plausibility", "im_plausibility"),
                &domain.axis(0),
                |p| (setup.hs_index(p), marginal.eval1(p)),
            )
        }
        ContourConfig::FiellerCreasy { x1, x2, grid } => {
            require_grid(*grid)?;
            let m = NormalMeans2D::new(*x1, *x2).map_err(CliError::from_precondition)?;
            let base = m.ratio_domain();
            let domain = Domain::new(base.bounds.clone(), *grid);
            let meta = meta_for(
                Some(seed_over.unwrap_or(0)),
                &hash,
                vec![("model".into(), "fieller-creasy".into())],
            );
            comparison_csv(
                &meta,
                "phi",
                ("naive_plausibility", "strategic_plausibility"),
                &domain.axis(0),
                |p| (m.ratio_naive_value(p), m.ratio_strategic_value(p)),
            )
        }
        ContourConfig::NormalSlr {
            data_file,
            split,
            n_rep,
            seed,
            grid,
        } => {
            require_grid(*grid)?;
            let (data, second) = config::read_data_file(Path::new(data_file))?;
            if second.is_some() {
                return Err(CliError::Config(
                    "the normal location model takes one-column data".into(),
                ));
            }
            let split_spec = split.build(data.len())?;
            let slr =
                NormalSlr::from_data(&data, &split_spec).map_err(CliError::from_precondition)?;
            let table = NormalSlrTable::build(
                split_spec.d1_len(),
                split_spec.d2_len(),
                &McConfig::new(*n_rep, *seed),
            )
            .map_err(CliError::from_precondition)?;
            let n = data.len() as f64;
            let center = data.iter().sum::<f64>() / n;
            let width = 10.0 / n.sqrt();
            let domain = Domain::new(vec![(center - width, center + width)], *grid);
            let meta = meta_for(
                Some(*seed),
                &hash,
                vec![
                    ("model".into(), "normal-slr".into()),
                    ("n_rep".into(), n_rep.to_string()),
                ],
            );
            comparison_csv(
                &meta,
                "theta",
                ("slr_p_value", "im_plausibility"),
                &domain.axis(0),
                |t| {
                    let pl = normal_slr_plausibility(&slr, &table, t).unwrap_or(0.0);
                    (slr.p_value(t), pl)
                },
            )
        }
    };
    deliver(out, &csv)
}

/// `test`: one composite-hypothesis test on a data file, JSON verdict.
pub fn cmd_test(
    mut cfg: TestConfig,
    seed_over: Option<u64>,
    reps_over: Option<usize>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    cfg.apply_overrides(seed_over, reps_over);
    let hash = config_hash(&cfg);
    let report = match &cfg {
        TestConfig::Monotonicity {
            data_file,
            alpha,
            split,
            n_rep,
            seed,
        } => {
            let (data, second) = config::read_data_file(Path::new(data_file))?;
            if second.is_some() {
                return Err(CliError::Config(
                    "the monotonicity test takes one-column data".into(),
                ));
            }
            let split_spec = split.build(data.len())?;
            let outcome = monotonicity_test(
                &data,
                &split_spec,
                *alpha,
                &McConfig::new(*n_rep, *seed),
                true,
            )
            .map_err(CliError::from_precondition)?;
            json!({
                "test": "monotonicity",
                "n": data.len(),
                "alpha": outcome.alpha,
                "slr_p_value": outcome.slr_p,
                "plug_in_index": outcome.alpha_obs,
                "plausibility": outcome.plausibility,
                "slr_reject": outcome.slr_reject,
                "im_reject": outcome.im_reject,
                "plug_in": outcome.plug_in,
                "n_rep": *n_rep,
                "seed": *seed,
                "config": hash,
            })
        }
        TestConfig::Mixture {
            data_file,
            alpha,
            split,
            table_reps,
            seed,
        } => {
            let (data, second) = config::read_data_file(Path::new(data_file))?;
            if second.is_some() {
                return Err(CliError::Config(
                    "the mixture test takes one-column data".into(),
                ));
            }
            let split_spec = split.build(data.len())?;
            let table = MixtureNullTable::build(
                data.len(),
                &split_spec,
                &McConfig::new(*table_reps, *seed),
            )
            .map_err(CliError::from_precondition)?;
            let mut rng = validim::rng::substream(*seed, u64::MAX);
            let outcome = mixture_test(&data, &split_spec, &table, *alpha, &mut rng)
                .map_err(CliError::from_precondition)?;
            json!({
                "test": "mixture",
                "n": data.len(),
                "alpha": outcome.alpha,
                "slr_p_value": outcome.slr_p,
                "plausibility": outcome.plausibility,
                "slr_reject": outcome.slr_reject,
                "im_reject": outcome.im_reject,
                "table_reps": *table_reps,
                "seed": *seed,
                "config": hash,
            })
        }
    };
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Numeric(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    deliver(out, &text)
}

fn curve_csv_and_verdict(
    curve: &ValidityCurve,
    meta: &OutputMeta,
) -> (String, DominanceReport, serde_json::Value) {
    let csv = curve.to_csv(meta);
    let report = dominance_check(curve);
    let verdict = json!({
        "label": curve.label,
        "pass": report.pass,
        "worst_margin_sigmas": report.worst_margin,
        "violations": report.violations.len(),
        "n_rep": curve.n_rep,
        "seed": curve.seed,
    });
    (csv, report, verdict)
}

/// `validate`: validity curve plus dominance verdict for one model.
pub fn cmd_validate(
    mut cfg: ValidateConfig,
    seed_over: Option<u64>,
    reps_over: Option<usize>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    cfg.apply_overrides(seed_over, reps_over);
    let hash = config_hash(&cfg);
    let (curve, seed) = match &cfg {
        ValidateConfig::Binomial {
            n,
            theta,
            n_rep,
            seed,
        } => {
            if !(*theta > 0.0 && *theta < 1.0) {
                return Err(CliError::Config(
                    "theta must lie strictly between zero and one".into(),
                ));
            }
            let n = *n;
            let theta = *theta;
            let mc = McConfig::new(*n_rep, *seed);
            let curve = validity_curve("binomial-plausibility-of-truth", &mc, move |rng| {
                use rand::Rng;
                let mut hits = 0u64;
                for _ in 0..n {
                    if rng.random::<f64>() < theta {
                        hits += 1;
                    }
                }
                BinomialSetup::new(n, hits)
                    .map(|s| s.im_value(theta))
                    .unwrap_or(0.0)
            })
            .map_err(CliError::from_precondition)?;
            (curve, *seed)
        }
        ValidateConfig::Dkw {
            n,
            n_rep,
            table_reps,
            seed,
        } => {
            let n = *n;
            let table = KsNullTable::build(n, &McConfig::new(*table_reps, seed.wrapping_add(1)))
                .map_err(CliError::from_precondition)?;
            let truth = DistributionHandle::continuous(|t: f64| t.clamp(0.0, 1.0));
            let mc = McConfig::new(*n_rep, *seed);
            let curve = validity_curve("dkw-plausibility-of-truth", &mc, move |rng| {
                use rand::Rng;
                let data: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                let sample = match EmpiricalSample::new(&data) {
                    Ok(s) => s,
                    Err(_) => return 0.0,
                };
                dkw_plausibility(&sample, &truth, &table).unwrap_or(0.0)
            })
            .map_err(CliError::from_precondition)?;
            (curve, *seed)
        }
    };
    let meta = meta_for(
        Some(seed),
        &hash,
        vec![("curve".into(), curve.label.clone())],
    );
    let (csv, _report, verdict) = curve_csv_and_verdict(&curve, &meta);
    let mut verdict_text = serde_json::to_string_pretty(&json!({
        "config": hash,
        "verdict": verdict,
    }))
    .map_err(|e| CliError::Numeric(format!("cannot serialize verdict: {e}")))?;
    verdict_text.push('\n');
    match out {
        Some(path) => {
            deliver(Some(path), &csv)?;
            let verdict_path = verdict_json_path(path);
            deliver(Some(&verdict_path), &verdict_text)
        }
        None => {
            print!("{csv}");
            print!("{verdict_text}");
            Ok(())
        }
    }
}

/// Sibling path for the JSON verdict next to a CSV artifact.
fn verdict_json_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.file_name().unwrap_or_default().to_os_string();
    name.push(".verdict.json");
    csv_path.with_file_name(name)
}

/// `power`: rejection-rate comparison along a parameter grid.
pub fn cmd_power(
    mut cfg: PowerConfig,
    seed_over: Option<u64>,
    reps_over: Option<usize>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    cfg.apply_overrides(seed_over, reps_over);
    let hash = config_hash(&cfg);
    let (curve, seed, extra) = match &cfg {
        PowerConfig::Mixture {
            n,
            mu_grid,
            alpha,
            n_rep,
            table_reps,
            seed,
        } => {
            let split = SplitKind::FirstHalf.build(*n)?;
            let table = MixtureNullTable::build(
                *n,
                &split,
                &McConfig::new(*table_reps, seed.wrapping_add(1)),
            )
            .map_err(CliError::from_precondition)?;
            let n_obs = *n;
            let alpha = *alpha;
            let curve = power_curve(
                "mixture-power",
                mu_grid,
                &McConfig::new(*n_rep, *seed),
                move |mu, rng| {
                    let data = sample_symmetric_mixture(n_obs, mu, rng);
                    let outcome = mixture_test(&data, &split, &table, alpha, rng)?;
                    Ok((outcome.slr_reject, outcome.im_reject))
                },
            )
            .map_err(CliError::from_precondition)?;
            (
                curve,
                *seed,
                vec![("table_reps".into(), table_reps.to_string())],
            )
        }
        PowerConfig::Monotonicity {
            n,
            shape_grid,
            alpha,
            n_rep,
            inner_reps,
            seed,
        } => {
            let split = SplitKind::FirstHalf.build(*n)?;
            let n_obs = *n;
            let alpha = *alpha;
            let inner = *inner_reps;
            let base_seed = *seed;
            let curve = power_curve(
                "monotone-power",
                shape_grid,
                &McConfig::new(*n_rep, *seed),
                move |shape, rng| {
                    use rand::Rng;
                    let data = sample_gamma(n_obs, shape, rng)?;
                    let inner_mc = McConfig::new(inner, base_seed ^ rng.random::<u64>());
                    let outcome = monotonicity_test(&data, &split, alpha, &inner_mc, true)?;
                    Ok((outcome.slr_reject, outcome.im_reject))
                },
            )
            .map_err(CliError::from_precondition)?;
            (
                curve,
                *seed,
                vec![("inner_reps".into(), inner_reps.to_string())],
            )
        }
    };
    let mut meta_extra = vec![("curve".into(), curve.label.clone())];
    meta_extra.extend(extra);
    let meta = meta_for(Some(seed), &hash, meta_extra);
    deliver(out, &curve.to_csv(&meta))
}

/// `demo`: canned demonstrations, written as a CSV bundle.
pub fn cmd_demo(
    name: &str,
    seed_over: Option<u64>,
    reps_over: Option<usize>,
    out_dir: Option<&Path>,
) -> Result<(), CliError> {
    let seed = seed_over.unwrap_or(20_240_501);
    let n_rep = reps_over.unwrap_or(config::DEFAULT_CURVE_REPS);
    let dir = out_dir.unwrap_or(Path::new("."));
    if !dir.exists() {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    }
    let effective = json!({ "demo": name, "seed": seed, "n_rep": n_rep });
    let hash = config_hash(&effective);
    let mc = McConfig::new(n_rep, seed);
    let mut written: Vec<PathBuf> = Vec::new();
    let mut summary = json!({ "demo": name, "seed": seed, "n_rep": n_rep, "config": hash });
    match name {
        "false-confidence-abs" => {
            let demo = abs_value_demo(&mc).map_err(CliError::from_precondition)?;
            for (stem, curve) in [("cd", &demo.cd), ("im", &demo.im)] {
                let path = dir.join(format!("false_confidence_abs_{stem}.csv"));
                let meta = meta_for(
                    Some(seed),
                    &hash,
                    vec![("curve".into(), curve.label.clone())],
                );
                deliver(Some(&path), &curve.to_csv(&meta))?;
                written.push(path);
            }
            let cd_report = dominance_check(&demo.cd);
            let im_report = dominance_check(&demo.im);
            summary["cd_pass"] = json!(cd_report.pass);
            summary["im_pass"] = json!(im_report.pass);
            summary["cd_worst_margin_sigmas"] = json!(cd_report.worst_margin);
            summary["im_worst_margin_sigmas"] = json!(im_report.worst_margin);
        }
        "false-confidence-fc" => {
            let inner = 1_000;
            let demo = ratio_demo(&mc, inner).map_err(CliError::from_precondition)?;
            let rows_path = dir.join("false_confidence_fc_rows.csv");
            let meta = meta_for(
                Some(seed),
                &hash,
                vec![("inner_n_rep".into(), inner.to_string())],
            );
            deliver(Some(&rows_path), &demo.to_csv(&meta))?;
            written.push(rows_path);
            let curve = demo.true_side_curve(seed);
            let curve_path = dir.join("false_confidence_fc_true_side.csv");
            let curve_meta = meta_for(
                Some(seed),
                &hash,
                vec![("curve".into(), curve.label.clone())],
            );
            deliver(Some(&curve_path), &curve.to_csv(&curve_meta))?;
            written.push(curve_path);
            let report = dominance_check(&curve);
            summary["mean_cd_prob_of_false_assertion"] = json!(demo.mean_cd);
            summary["mean_im_lower_of_false_assertion"] = json!(demo.mean_im);
            summary["im_true_side_pass"] = json!(report.pass);
            summary["inner_n_rep"] = json!(inner);
        }
        "mixture-power" => {
            let reduced = n_rep.min(200);
            let cfg = PowerConfig::Mixture {
                n: 100,
                mu_grid: vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
                alpha: 0.05,
                n_rep: reduced,
                table_reps: 2_000,
                seed,
            };
            let path = dir.join("mixture_power.csv");
            cmd_power(cfg, None, None, Some(&path))?;
            written.push(path);
            summary["n_rep"] = json!(reduced);
        }
        "monotone-power" => {
            let reduced = n_rep.min(100);
            let cfg = PowerConfig::Monotonicity {
                n: 100,
                shape_grid: vec![1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
                alpha: 0.05,
                n_rep: reduced,
                inner_reps: 300,
                seed,
            };
            let path = dir.join("monotone_power.csv");
            cmd_power(cfg, None, None, Some(&path))?;
            written.push(path);
            summary["n_rep"] = json!(reduced);
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown demo '{other}'; expected one of false-confidence-abs, \
                 false-confidence-fc, mixture-power, monotone-power"
            )));
        }
    }
    summary["files"] = json!(written
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>());
    let mut text = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Numeric(format!("cannot serialize summary: {e}")))?;
    text.push('\n');
    print!("{text}");
    Ok(())
}
