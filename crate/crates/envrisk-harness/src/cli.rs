//! Command-line interface: `generate`, `fit`, `bound`, `oracle`, `sweep`,
//! and `preset list`. Exit codes: 0 on success, 2 on configuration errors,
//! 3 when solvers failed to converge on at least half of the sweep rows.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde::Serialize;

use envrisk::bounds::{
    c_delta_ball, lipschitz_bound, optimistic_bound, smooth_interpolator_bound, vc_correction_with_h,
    BoundKind, BoundReport,
};
use envrisk::fitters::{lasso_alpha_max, lasso_path, min_norm_least_squares, ridge_path};
use envrisk::oracles::{
    bayes_zero_one_logistic, classification_pop_sq_hinge, misspecified_optimal_predictor,
    regression_null_risk, regression_pop_risk,
};
use envrisk::synthdata::{sample_dataset, LabelModel};

use crate::config::{preset, ExperimentConfig, PRESET_NAMES};
use crate::csvio;
use crate::error::{HarnessError, Result};
use crate::moments_cache;
use crate::sweep::{run_sharpness_l1, run_sweep_with_moments, SweepResult};

#[derive(Parser)]
#[command(
    name = "envrisk",
    about = "Moreau-envelope risk bounds: synthetic data, regularization paths, bound evaluation, and experiment sweeps",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Emit a synthetic dataset as CSV (header x_1..x_d,y)
    Generate(GenerateArgs),
    /// Fit one regularization path on a dataset CSV and emit the path CSV
    Fit(FitArgs),
    /// Evaluate a bound formula on explicit inputs (prints JSON)
    Bound(BoundArgs),
    /// Population-risk queries for a preset's data model (prints JSON)
    Oracle(OracleArgs),
    /// Run a full experiment sweep and write CSV/JSON outputs
    Sweep(SweepArgs),
    /// Preset utilities
    Preset(PresetArgs),
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Preset supplying the data model
    #[arg(long)]
    pub preset: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct FitArgs {
    /// Dataset CSV produced by `generate`
    #[arg(long)]
    pub data: PathBuf,
    /// ridge | lasso | min-norm
    #[arg(long)]
    pub fitter: String,
    #[arg(long, default_value_t = 1.0)]
    pub grid_max: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub grid_min: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long, default_value_t = false)]
    pub intercept: bool,
    /// Include full coefficient vectors as extra columns
    #[arg(long, default_value_t = false)]
    pub coefs: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct BoundArgs {
    /// optimistic | ball | lipschitz | smooth | vc
    pub kind: String,
    #[arg(long, default_value_t = 0.0)]
    pub train: f64,
    /// Unnormalized complexity C
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub correction: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// |w|_2 for the ball complexity
    #[arg(long, default_value_t = 1.0)]
    pub norm_w: f64,
    #[arg(long, default_value_t = 1.0)]
    pub trace_perp: f64,
    #[arg(long, default_value_t = 1.0)]
    pub op_perp: f64,
    /// Lipschitz constant
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Smoothness constant
    #[arg(long, default_value_t = 2.0)]
    pub h: f64,
    /// Hypercontractivity ratio for the VC correction
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Index-direction count (VC dimension defaults to k)
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Explicit VC dimension override
    #[arg(long)]
    pub vc_dim: Option<usize>,
}

#[derive(Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub preset: String,
    /// Comma-separated coefficient vector to score (defaults to zero)
    #[arg(long)]
    pub w: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub b: f64,
    #[arg(long)]
    pub n_mc: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// JSON config file with the ExperimentConfig schema
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub n_mc: Option<usize>,
    /// Restore the original experiment sizes
    #[arg(long, default_value_t = false)]
    pub paper_scale: bool,
    /// Interpret the label-noise parameter as a standard deviation
    #[arg(long, default_value_t = false)]
    pub noise_is_std: bool,
    /// Output directory (rows.csv, aggregates.csv, summary.json)
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct PresetArgs {
    /// `list` prints the known preset names; a preset name prints its config
    pub action: String,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Fit(a) => fit(a),
        Command::Bound(a) => bound(a),
        Command::Oracle(a) => oracle(a),
        Command::Sweep(a) => sweep(a),
        Command::Preset(a) => preset_cmd(a),
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let mut cfg = preset(&a.preset)?;
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(d) = a.d {
        cfg.d = d;
    }
    cfg.validate()?;
    let ds = sample_dataset(&cfg.data_model(), cfg.n, a.seed)?;
    csvio::write_text(&a.out, &csvio::dataset_csv(&ds))?;
    println!("wrote {} rows x {} features to {}", cfg.n, cfg.d, a.out.display());
    Ok(())
}

fn fit(a: FitArgs) -> Result<()> {
    let text = fs::read_to_string(&a.data)?;
    let (x, y) = csvio::parse_dataset_csv(&text)?;
    if a.points == 0 || !(a.grid_max > 0.0) || !(a.grid_min > 0.0) || a.grid_min > a.grid_max {
        return Err(HarnessError::Config("invalid grid".into()));
    }
    let grid: Vec<f64> = if a.points == 1 {
        vec![a.grid_max]
    } else {
        (0..a.points)
            .map(|i| {
                (a.grid_max.ln()
                    + (a.grid_min.ln() - a.grid_max.ln()) * i as f64 / (a.points - 1) as f64)
                    .exp()
            })
            .collect()
    };
    let path = match a.fitter.as_str() {
        "ridge" => ridge_path(&x, &y, &grid, a.intercept)?,
        "lasso" => {
            let amax = lasso_alpha_max(&x, &y, a.intercept).max(f64::MIN_POSITIVE);
            let scaled: Vec<f64> = grid.iter().map(|g| g * amax).collect();
            lasso_path(&x, &y, &scaled, a.intercept, 1e-7, 100_000)?
        }
        "min-norm" => {
            let f = min_norm_least_squares(&x, &y);
            let mut p = envrisk::fitters::RegPath::with_capacity(1);
            p.push(0.0, f.w, f.b, f.train_loss, f.converged);
            p
        }
        other => return Err(HarnessError::Config(format!("unknown fitter '{other}'"))),
    };
    let nonconverged = path.converged.iter().filter(|c| !**c).count();
    csvio::write_text(&a.out, &csvio::regpath_csv(&path, a.coefs))?;
    println!("wrote {} path points to {}", path.len(), a.out.display());
    if 2 * nonconverged >= path.len().max(1) {
        return Err(HarnessError::NonConvergence { failed: nonconverged, total: path.len() });
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundOut {
    kind: &'static str,
    complexity_c: f64,
    bound_value: f64,
    correction: f64,
    delta: f64,
}

impl From<BoundReport> for BoundOut {
    fn from(r: BoundReport) -> Self {
        BoundOut {
            kind: r.kind.name(),
            complexity_c: r.complexity_c,
            bound_value: r.bound_value,
            correction: r.correction,
            delta: r.delta,
        }
    }
}

fn bound(a: BoundArgs) -> Result<()> {
    let report: BoundOut = match a.kind.as_str() {
        "optimistic" => BoundReport {
            kind: BoundKind::OptimisticTrace,
            complexity_c: a.c,
            bound_value: optimistic_bound(a.train, a.c, a.n, a.correction)?,
            correction: a.correction,
            delta: a.delta,
        }
        .into(),
        "ball" => {
            let c = c_delta_ball(a.norm_w, a.trace_perp, a.op_perp, a.delta)?;
            BoundReport {
                kind: BoundKind::OptimisticDeltaBall,
                complexity_c: c,
                bound_value: optimistic_bound(a.train, c, a.n, a.correction)?,
                correction: a.correction,
                delta: a.delta,
            }
            .into()
        }
        "lipschitz" => BoundReport {
            kind: BoundKind::Lipschitz,
            complexity_c: a.c,
            bound_value: lipschitz_bound(a.train, a.m, a.c, a.n)?,
            correction: 1.0,
            delta: a.delta,
        }
        .into(),
        "smooth" => BoundReport {
            kind: BoundKind::SmoothInterpolator,
            complexity_c: a.c,
            bound_value: smooth_interpolator_bound(a.h, a.c, a.n)?,
            correction: 1.0,
            delta: a.delta,
        }
        .into(),
        "vc" => {
            let h = a.vc_dim.unwrap_or(a.k);
            let corr = vc_correction_with_h(a.tau, h, a.n, a.delta)?;
            BoundOut {
                kind: "vc-correction",
                complexity_c: a.tau,
                bound_value: corr,
                correction: corr,
                delta: a.delta,
            }
        }
        other => return Err(HarnessError::Config(format!("unknown bound kind '{other}'"))),
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

#[derive(Serialize)]
struct OracleOut {
    preset: String,
    null_risk: f64,
    optimal_risk: f64,
    queried_risk: Option<f64>,
    bayes_zero_one: Option<f64>,
    method: String,
}

fn oracle(a: OracleArgs) -> Result<()> {
    let cfg = preset(&a.preset)?;
    cfg.validate()?;
    let model = cfg.data_model();
    let n_mc = a.n_mc.unwrap_or(cfg.n_mc);
    let kind = cfg.feature_kind();
    let moments = moments_cache::load_or_build(
        a.cache_dir.as_deref(),
        kind,
        model.covariance.eigenvalue(0).sqrt(),
        model.covariance.eigenvalue(1.min(cfg.d - 1)).sqrt(),
        10_000_000,
        a.seed,
    )?;
    let w = match &a.w {
        Some(text) => {
            let vals: std::result::Result<Vec<f64>, _> =
                text.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| HarnessError::Config(format!("bad --w: {e}")))?;
            if vals.len() != cfg.d {
                return Err(HarnessError::Config(format!(
                    "--w has {} entries, model dimension is {}",
                    vals.len(),
                    cfg.d
                )));
            }
            Some(DVector::from_vec(vals))
        }
        None => None,
    };

    let out = if cfg.is_classification() {
        let (coef, bstar) = match model.labels {
            LabelModel::LogisticClassification { wstar_coef, bstar } => (wstar_coef, bstar),
            _ => unreachable!(),
        };
        let queried = match &w {
            Some(w) => Some(classification_pop_sq_hinge(w, a.b, &model, n_mc, a.seed)?.value),
            None => None,
        };
        OracleOut {
            preset: a.preset.clone(),
            null_risk: 1.0,
            optimal_risk: f64::NAN,
            queried_risk: queried,
            bayes_zero_one: Some(bayes_zero_one_logistic(
                coef,
                bstar,
                model.covariance.eigenvalue(0),
            )),
            method: "two-dim-reduction".into(),
        }
    } else {
        let null = regression_null_risk(&model, &moments)?;
        let optimal = match model.labels {
            LabelModel::WellSpecifiedLinear { noise_var, .. } => noise_var,
            LabelModel::MisspecifiedRegression { .. } => {
                misspecified_optimal_predictor(&model, &moments)?.1
            }
            _ => f64::NAN,
        };
        let queried = match &w {
            Some(w) => Some(regression_pop_risk(w, a.b, &model, &moments, a.seed)?.value),
            None => None,
        };
        OracleOut {
            preset: a.preset.clone(),
            null_risk: null,
            optimal_risk: optimal,
            queried_risk: queried,
            bayes_zero_one: None,
            method: "closed-form".into(),
        }
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    config: &'a ExperimentConfig,
    null_risk: f64,
    optimal_risk: f64,
    bayes_zero_one: Option<f64>,
    zero_one_means: Option<Vec<f64>>,
    nonconverged_rows: usize,
    total_rows: usize,
}

#[derive(Serialize)]
struct SharpnessSummary {
    n: usize,
    dj_factor: usize,
    sigma: f64,
    r: f64,
    trials: usize,
    mean_gap: f64,
    mean_bound: f64,
    mean_ratio: f64,
    mean_ratio_exact: f64,
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut cfg = match (&a.preset, &a.config) {
        (Some(name), None) => preset(name)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(|e| HarnessError::Config(format!("config parse: {e}")))?
        }
        _ => {
            return Err(HarnessError::Config("pass exactly one of --preset or --config".into()));
        }
    };
    if a.paper_scale {
        cfg.paper_scale();
    }
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(d) = a.d {
        cfg.d = d;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(x) = a.delta {
        cfg.delta = x;
    }
    if let Some(m) = a.n_mc {
        cfg.n_mc = m;
    }
    if a.noise_is_std {
        cfg.noise_is_std = true;
    }

    if cfg.name == "sharpness-l1" {
        return sharpness_sweep(&cfg, &a);
    }

    cfg.validate()?;
    let model = cfg.data_model();
    let moments = moments_cache::load_or_build(
        a.cache_dir.as_deref(),
        cfg.feature_kind(),
        model.covariance.eigenvalue(0).sqrt(),
        model.covariance.eigenvalue(1.min(cfg.d - 1)).sqrt(),
        10_000_000,
        envrisk::synthdata::derive_seed(cfg.seed, 0x3031),
    )?;
    let result: SweepResult = run_sweep_with_moments(&cfg, &moments)?;
    fs::create_dir_all(&a.out)?;
    csvio::write_text(&a.out.join("rows.csv"), &csvio::sweep_rows_csv(&result.rows))?;
    csvio::write_text(&a.out.join("aggregates.csv"), &csvio::agg_rows_csv(&result.aggregates))?;
    let summary = SweepSummary {
        config: &cfg,
        null_risk: result.null_risk,
        optimal_risk: result.optimal_risk,
        bayes_zero_one: result.bayes_zero_one,
        zero_one_means: result.zero_one_means.clone(),
        nonconverged_rows: result.nonconverged_rows,
        total_rows: result.rows.len(),
    };
    csvio::write_text(
        &a.out.join("summary.json"),
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    println!(
        "sweep '{}': {} rows, null risk {:.6}, optimal risk {:.6}",
        cfg.name,
        result.rows.len(),
        result.null_risk,
        result.optimal_risk
    );
    if result.nonconvergence_exceeds_half() {
        return Err(HarnessError::NonConvergence {
            failed: result.nonconverged_rows,
            total: result.rows.len(),
        });
    }
    Ok(())
}

fn sharpness_sweep(cfg: &ExperimentConfig, a: &SweepArgs) -> Result<()> {
    let dj_factor = 20;
    let sigma = 1.0;
    let r = 2.0 * sigma;
    let mut records = Vec::with_capacity(cfg.trials);
    for t in 0..cfg.trials {
        records.push(run_sharpness_l1(
            cfg.n,
            dj_factor,
            sigma,
            r,
            envrisk::synthdata::derive_seed(cfg.seed, t as u64),
        )?);
    }
    let mean = |f: fn(&crate::sweep::SharpnessRecord) -> f64| {
        records.iter().map(f).sum::<f64>() / records.len() as f64
    };
    let summary = SharpnessSummary {
        n: cfg.n,
        dj_factor,
        sigma,
        r,
        trials: cfg.trials,
        mean_gap: mean(|s| s.gap),
        mean_bound: mean(|s| s.bound),
        mean_ratio: mean(|s| s.ratio),
        mean_ratio_exact: mean(|s| s.ratio_exact),
    };
    fs::create_dir_all(&a.out)?;
    let mut csv = String::from("trial,gap,gap_exact,bound,ratio,ratio_exact\n");
    for (t, s) in records.iter().enumerate() {
        use std::fmt::Write as _;
        let _ = writeln!(csv, "{},{},{},{},{},{}", t, s.gap, s.gap_exact, s.bound, s.ratio, s.ratio_exact);
    }
    csvio::write_text(&a.out.join("rows.csv"), &csv)?;
    csvio::write_text(
        &a.out.join("summary.json"),
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    println!(
        "sharpness: mean gap {:.4}, mean bound {:.4}, mean ratio {:.4}",
        summary.mean_gap, summary.mean_bound, summary.mean_ratio
    );
    Ok(())
}

fn preset_cmd(a: PresetArgs) -> Result<()> {
    match a.action.as_str() {
        "list" => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
            Ok(())
        }
        name => {
            let cfg = preset(name)?;
            println!("{}", serde_json::to_string_pretty(&cfg)?);
            Ok(())
        }
    }
}

