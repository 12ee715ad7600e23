//! Sweep orchestration: per-trial data generation, path fitting, oracle test
//! loss, bound evaluation, bootstrap aggregation, and the dedicated l1
//! sharpness construction. Trials run in parallel with derived seeds and are
//! assembled in trial order, so output bytes are independent of scheduling.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use envrisk::bounds::{c_delta_ball, optimistic_bound, rademacher_linf_mc, CovSplit};
use envrisk::fitters::{
    lasso_alpha_max, lasso_path, one_pass_sgd_1d, ridge_path, sq_hinge_erm_warm, Penalty, RegPath,
};
use envrisk::oracles::{
    bayes_zero_one_logistic, classification_pop_sq_hinge, misspecified_optimal_predictor,
    regression_null_risk, regression_pop_risk, zero_one_risk, MomentTable, ZeroOneMethod,
};
use envrisk::synthdata::{derive_seed, sample_dataset, sigmoid, DataModel, FeatureKind, LabelModel};

use crate::config::{BoundCfg, ExperimentConfig, FitterKind};
use crate::error::{HarnessError, Result};

/// One (trial, path point) record; these become the raw CSV rows.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub trial: usize,
    pub path_index: usize,
    pub reg_value: f64,
    pub train_loss: f64,
    pub test_loss: f64,
    pub bound_value: f64,
    pub norm_l1: f64,
    pub norm_l2: f64,
    #[serde(skip)]
    pub converged: bool,
    #[serde(skip)]
    pub zero_one: Option<f64>,
}

/// Per-path-point aggregate with a bootstrap interval over trials.
#[derive(Debug, Clone, Serialize)]
pub struct AggRow {
    pub path_index: usize,
    pub reg_value: f64,
    pub mean_test: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub aggregates: Vec<AggRow>,
    pub null_risk: f64,
    pub optimal_risk: f64,
    /// Bayes misclassification rate (classification presets).
    pub bayes_zero_one: Option<f64>,
    /// Mean zero-one risk per path point, when tracked.
    pub zero_one_means: Option<Vec<f64>>,
    pub nonconverged_rows: usize,
}

impl SweepResult {
    pub fn nonconvergence_exceeds_half(&self) -> bool {
        2 * self.nonconverged_rows >= self.rows.len().max(1)
    }
}

/// Percentile bootstrap interval for the mean of `values`.
pub fn bootstrap_ci(values: &[f64], level: f64, resamples: usize, seed: u64) -> (f64, f64) {
    assert!(!values.is_empty(), "bootstrap over an empty sample");
    let n = values.len();
    if n == 1 {
        return (values[0], values[0]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xb007));
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut s = 0.0;
        for _ in 0..n {
            let idx = rand::Rng::random_range(&mut rng, 0..n);
            s += values[idx];
        }
        means.push(s / n as f64);
    }
    let alpha = (1.0 - level) / 2.0;
    percentile_pair(&mut means, alpha)
}

fn percentile_pair(samples: &mut [f64], alpha: f64) -> (f64, f64) {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| -> f64 {
        let idx = p * (samples.len() - 1) as f64;
        let lo = idx.floor() as usize;
        let hi = idx.ceil() as usize;
        let frac = idx - lo as f64;
        samples[lo] * (1.0 - frac) + samples[hi] * frac
    };
    (q(alpha), q(1.0 - alpha))
}

struct OracleCtx {
    model: DataModel,
    moments: MomentTable,
    n_mc: usize,
    classification: bool,
}

impl OracleCtx {
    fn test_loss(&self, w: &DVector<f64>, b: f64, seed: u64) -> Result<f64> {
        if self.classification {
            Ok(classification_pop_sq_hinge(w, b, &self.model, self.n_mc, seed)?.value)
        } else {
            Ok(regression_pop_risk(w, b, &self.model, &self.moments, seed)?.value)
        }
    }
}

struct BoundCtx<'a> {
    cfg: &'a ExperimentConfig,
    split: CovSplit,
    trace_perp: f64,
    op_perp: f64,
}

impl BoundCtx<'_> {
    fn evaluate(
        &self,
        x: &DMatrix<f64>,
        w: &DVector<f64>,
        train: f64,
        seed: u64,
    ) -> Result<f64> {
        let n = self.cfg.n;
        let value = match self.cfg.bound {
            BoundCfg::SimpleTrace => {
                let c = w.norm() * self.trace_perp.sqrt();
                optimistic_bound(train, c, n, 1.0)?
            }
            BoundCfg::DeltaBall => {
                let c = c_delta_ball(w.norm(), self.trace_perp, self.op_perp, self.cfg.delta)?;
                optimistic_bound(train, c, n, 1.0)?
            }
            BoundCfg::Isotropic => {
                let qw = self.split.project_perp(w);
                let c = (self.cfg.d as f64).sqrt() * qw.norm();
                optimistic_bound(train, c, n, 1.0)?
            }
            BoundCfg::RademacherL1 { b_reps } => {
                let rad = rademacher_linf_mc(x, Some(&self.split), b_reps, seed);
                let l1: f64 = w.iter().map(|v| v.abs()).sum();
                let root = train.sqrt() + l1 * rad;
                root * root
            }
            BoundCfg::RademacherL1Projected { b_reps } => {
                let rad = rademacher_linf_mc(x, None, b_reps, seed);
                let qw = self.split.project_perp(w);
                let l1: f64 = qw.iter().map(|v| v.abs()).sum();
                let root = train.sqrt() + l1 * rad;
                root * root
            }
        };
        Ok(value)
    }
}

fn fit_path(cfg: &ExperimentConfig, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<RegPath> {
    let grid = cfg.grid.values();
    match cfg.fitter {
        FitterKind::Ridge => Ok(ridge_path(x, y, &grid, cfg.fit_intercept)?),
        FitterKind::Lasso => {
            // lasso grids are relative to the data-driven alpha_max
            let amax = lasso_alpha_max(x, y, cfg.fit_intercept).max(f64::MIN_POSITIVE);
            let scaled: Vec<f64> = grid.iter().map(|g| g * amax).collect();
            Ok(lasso_path(x, y, &scaled, cfg.fit_intercept, 1e-7, 100_000)?)
        }
        FitterKind::SqHingeL2 | FitterKind::SqHingeL1 => {
            let mut path = RegPath::with_capacity(grid.len());
            let mut warm: Option<(DVector<f64>, f64)> = None;
            let amax = if cfg.fitter == FitterKind::SqHingeL1 {
                // scale of the l1 penalty that zeroes the margin gradient
                lasso_alpha_max(x, y, cfg.fit_intercept).max(f64::MIN_POSITIVE) * 2.0
            } else {
                1.0
            };
            for &g in &grid {
                let penalty = match cfg.fitter {
                    FitterKind::SqHingeL2 => Penalty::L2(g),
                    _ => Penalty::L1(g * amax),
                };
                let fit = sq_hinge_erm_warm(
                    x,
                    y,
                    penalty,
                    cfg.fit_intercept,
                    1e-6,
                    20_000,
                    warm.as_ref().map(|(w, b)| (w, *b)),
                )?;
                path.push(g, fit.w.clone(), fit.b, fit.train_loss, fit.converged);
                warm = Some((fit.w, fit.b));
            }
            Ok(path)
        }
    }
}

/// Reference lines for a sweep: the zero-predictor risk and the best linear
/// risk (closed form for regression; population SGD plus the 2-D reduction
/// for the logistic model).
fn reference_lines(
    cfg: &ExperimentConfig,
    model: &DataModel,
    moments: &MomentTable,
) -> Result<(f64, f64, Option<f64>)> {
    if cfg.is_classification() {
        let (coef, bstar) = match model.labels {
            LabelModel::LogisticClassification { wstar_coef, bstar } => (wstar_coef, bstar),
            _ => unreachable!(),
        };
        // null: zero predictor scores max(0, 1)^2 = 1 on every label
        let null = 1.0;
        // optimal 1-D squared-hinge predictor by one-pass population SGD
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0x0d0d));
        let s1 = model.covariance.eigenvalue(0).sqrt();
        let (w1, b) = one_pass_sgd_1d(
            || {
                let x1: f64 = <StandardNormal as Distribution<f64>>::sample(
                    &StandardNormal,
                    &mut rng,
                ) * s1;
                let u: f64 = rand::Rng::random(&mut rng);
                let y = if u < sigmoid(coef * x1 + bstar) { 1.0 } else { -1.0 };
                (x1, y)
            },
            (0.0, 0.0),
            0.1,
            2_000_000,
        );
        let mut w = DVector::zeros(cfg.d);
        w[0] = w1;
        let optimal =
            classification_pop_sq_hinge(&w, b, model, (cfg.n_mc * 4).max(1_000_000), cfg.seed)?
                .value;
        let bayes = bayes_zero_one_logistic(coef, bstar, model.covariance.eigenvalue(0));
        Ok((null, optimal, Some(bayes)))
    } else {
        let null = regression_null_risk(model, moments)?;
        let optimal = match model.labels {
            LabelModel::WellSpecifiedLinear { noise_var, .. } => noise_var,
            LabelModel::MisspecifiedRegression { .. } => {
                misspecified_optimal_predictor(model, moments)?.1
            }
            _ => {
                return Err(HarnessError::Config("unsupported regression model".into()));
            }
        };
        Ok((null, optimal, None))
    }
}

/// Run a full experiment sweep: `trials` independent datasets, a fitted
/// path on each, oracle test losses and bound values at every point, and
/// bootstrap aggregates per point. Deterministic given the config.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let model = cfg.data_model();
    let kind = cfg.feature_kind();
    let moments = if kind == FeatureKind::Gaussian {
        MomentTable::gaussian(
            model.covariance.eigenvalue(0).sqrt(),
            model.covariance.eigenvalue(1.min(cfg.d - 1)).sqrt(),
        )
    } else {
        MomentTable::build(
            kind,
            model.covariance.eigenvalue(0).sqrt(),
            model.covariance.eigenvalue(1.min(cfg.d - 1)).sqrt(),
            10_000_000,
            derive_seed(cfg.seed, 0x3031),
        )
    };

    run_sweep_with_moments(cfg, &moments)
}

/// [`run_sweep`] with a caller-provided moment table (used by the CLI to
/// share a JSON-cached table across runs).
pub fn run_sweep_with_moments(cfg: &ExperimentConfig, moments: &MomentTable) -> Result<SweepResult> {
    cfg.validate()?;
    let model = cfg.data_model();
    let eigs = model.covariance.eigenvalues();
    let split = CovSplit::from_unit_axes(&eigs, cfg.k)?;
    let perp_eigs = &eigs[cfg.k..];
    let trace_perp: f64 = perp_eigs.iter().sum();
    let op_perp = perp_eigs.iter().cloned().fold(0.0, f64::max);
    let bound_ctx = BoundCtx { cfg, split, trace_perp, op_perp };
    let oracle = OracleCtx {
        model: model.clone(),
        moments: *moments,
        n_mc: cfg.n_mc,
        classification: cfg.is_classification(),
    };

    let (null_risk, optimal_risk, bayes_zero_one) = reference_lines(cfg, &model, moments)?;

    let trial_rows: Vec<Result<Vec<SweepRow>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<SweepRow>> {
            let trial_seed = derive_seed(cfg.seed, 1000 + trial as u64);
            let ds = sample_dataset(&model, cfg.n, trial_seed)?;
            let path = fit_path(cfg, &ds.x, &ds.y)?;
            let mut rows = Vec::with_capacity(path.len());
            for i in 0..path.len() {
                let w = &path.coefficients[i];
                let b = path.intercepts[i];
                let point_seed = derive_seed(trial_seed, 7000 + i as u64);
                let test = oracle.test_loss(w, b, point_seed)?;
                let bound =
                    bound_ctx.evaluate(&ds.x, w, path.train_losses[i], derive_seed(point_seed, 5))?;
                let zero_one = if cfg.track_zero_one && cfg.is_classification() {
                    Some(
                        zero_one_risk(
                            w,
                            b,
                            &model,
                            ZeroOneMethod::TwoDimReduction,
                            cfg.n_mc,
                            derive_seed(point_seed, 9),
                        )?
                        .value,
                    )
                } else {
                    None
                };
                rows.push(SweepRow {
                    trial,
                    path_index: i,
                    reg_value: path.reg_values[i],
                    train_loss: path.train_losses[i],
                    test_loss: test,
                    bound_value: bound,
                    norm_l1: path.norms_l1[i],
                    norm_l2: path.norms_l2[i],
                    converged: path.converged[i],
                    zero_one,
                });
            }
            Ok(rows)
        })
        .collect();

    let mut rows = Vec::with_capacity(cfg.trials * cfg.grid.points);
    for tr in trial_rows {
        rows.extend(tr?);
    }
    rows.sort_by_key(|r| (r.trial, r.path_index));

    let points = cfg.grid.points;
    let mut aggregates = Vec::with_capacity(points);
    let mut zero_one_means = if cfg.track_zero_one { Some(Vec::with_capacity(points)) } else { None };
    for i in 0..points {
        let tests: Vec<f64> =
            rows.iter().filter(|r| r.path_index == i).map(|r| r.test_loss).collect();
        let bounds: Vec<f64> =
            rows.iter().filter(|r| r.path_index == i).map(|r| r.bound_value).collect();
        let reg = rows.iter().find(|r| r.path_index == i).map(|r| r.reg_value).unwrap_or(0.0);
        let mean_test = tests.iter().sum::<f64>() / tests.len() as f64;
        let mean_bound = bounds.iter().sum::<f64>() / bounds.len() as f64;
        let (ci_lo, ci_hi) =
            bootstrap_ci(&tests, 0.95, 1000, derive_seed(cfg.seed, 9000 + i as u64));
        aggregates.push(AggRow { path_index: i, reg_value: reg, mean_test, ci_lo, ci_hi, mean_bound });
        if let Some(z) = zero_one_means.as_mut() {
            let zs: Vec<f64> = rows
                .iter()
                .filter(|r| r.path_index == i)
                .filter_map(|r| r.zero_one)
                .collect();
            z.push(zs.iter().sum::<f64>() / zs.len().max(1) as f64);
        }
    }

    let nonconverged_rows = rows.iter().filter(|r| !r.converged).count();
    Ok(SweepResult {
        rows,
        aggregates,
        null_risk,
        optimal_risk,
        bayes_zero_one,
        zero_one_means,
        nonconverged_rows,
    })
}

/// Output of the l1 sharpness construction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SharpnessRecord {
    /// Wide-margin generalization gap `L_pop - (mean|y - r x1| - sigma)`,
    /// the form whose limit is `sigma`.
    pub gap: f64,
    /// Gap against the exact training loss `mean || y - r x1 | - sigma |`;
    /// smaller at finite scale because of the sub-sigma folding term.
    pub gap_exact: f64,
    /// Lipschitz bound value `|w|_2 sqrt((1 + lambda_n) / n)`.
    pub bound: f64,
    pub ratio: f64,
    pub ratio_exact: f64,
}

/// The junk-feature construction that makes the Lipschitz contraction bound
/// sharp for the absolute-error loss: covariance
/// `diag(1, (lambda_n / d_J) I)` with `lambda_n = sqrt(n)`, labels
/// `y ~ N(0, sigma^2)` independent of `x`, and the predictor `(r, w_rest)`
/// where `w_rest` is the least-norm fit of `sigma * sgn(y_i - r x_i1)` on
/// the junk block. The population loss of the fitted predictor is exact:
/// the fresh-sample residual is centered Gaussian with variance
/// `sigma^2 + r^2 + (lambda_n / d_J) |w_rest|^2`.
pub fn run_sharpness_l1(
    n: usize,
    dj_factor: usize,
    sigma: f64,
    r: f64,
    seed: u64,
) -> Result<SharpnessRecord> {
    if dj_factor == 0 {
        return Err(HarnessError::Config("dJ factor must be at least 1".into()));
    }
    let d_j = dj_factor * n;
    let lambda_n = (n as f64).sqrt();
    let col_sd = (lambda_n / d_j as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x51a2));

    let mut x1 = DVector::zeros(n);
    let mut xj = DMatrix::zeros(n, d_j);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        x1[i] = <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        for j in 0..d_j {
            xj[(i, j)] =
                <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng) * col_sd;
        }
        y[i] = <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng) * sigma;
    }
    let t = &y - &x1 * r;
    let targets = t.map(|v| sigma * v.signum());

    // least-norm fit on the junk block: |w_rest|^2 = s^T (XJ XJ^T)^{-1} s
    let gram = &xj * xj.transpose();
    let sol = gram
        .cholesky()
        .ok_or(HarnessError::Core(envrisk::Error::Singular("sharpness gram")))?
        .solve(&targets);
    let w_rest_sq = targets.dot(&sol);

    let resid_var = sigma * sigma + r * r + (lambda_n / d_j as f64) * w_rest_sq;
    let l_pop = (2.0 / std::f64::consts::PI).sqrt() * resid_var.sqrt();

    let mean_abs_t = t.iter().map(|v| v.abs()).sum::<f64>() / n as f64;
    let train_exact = t.iter().map(|v| (v.abs() - sigma).abs()).sum::<f64>() / n as f64;

    let gap = l_pop - (mean_abs_t - sigma);
    let gap_exact = l_pop - train_exact;
    let bound = (r * r + w_rest_sq).sqrt() * ((1.0 + lambda_n) / n as f64).sqrt();
    Ok(SharpnessRecord {
        gap,
        gap_exact,
        bound,
        ratio: gap / bound,
        ratio_exact: gap_exact / bound,
    })
}
