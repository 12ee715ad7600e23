//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with its measured values before asserting at the stated tolerance.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use envrisk::bounds::optimistic_bound;
use envrisk::envelope::{
    lipschitz_gap_bound, moreau_numeric, optimize_lambda_square_family, LossKind, LossSpec,
};
use envrisk::fitters::{min_norm_least_squares, ridge_path};
use envrisk::oracles::{
    hypercontractivity_ratio, mc_pop_risk, classification_pop_sq_hinge, regression_pop_risk,
    MomentOrder, MomentTable,
};
use envrisk::synthdata::{CovarianceSpec, DataModel, FeatureKind, LabelModel};
use envrisk_harness::config::{preset, BoundCfg};
use envrisk_harness::sweep::{bootstrap_ci, run_sharpness_l1, run_sweep};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::time::Instant;

fn verdict(id: &str, name: &str, pass: bool, detail: &str) -> bool {
    println!("ACCEPTANCE {id} {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    pass
}

fn envelope_sample_set(seed: u64, count: usize) -> Vec<(LossSpec, f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = [
        LossKind::Square,
        LossKind::SquaredHinge,
        LossKind::AbsoluteError,
        LossKind::Hinge,
    ];
    (0..count)
        .map(|_| {
            let kind = kinds[rng.random_range(0..kinds.len())];
            let spec = LossSpec::new(kind).unwrap();
            let lambda = 10f64.powf(rng.random_range(-3.0..3.0));
            let yhat = rng.random_range(-10.0..10.0);
            let y = match kind {
                LossKind::SquaredHinge | LossKind::Hinge => {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
                _ => rng.random_range(-10.0..10.0),
            };
            (spec, lambda, yhat, y)
        })
        .collect()
}

#[test]
fn a01_envelope_closed_form_agreement() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (spec, lambda, yhat, y) in envelope_sample_set(9001, 1000) {
        let closed = spec.moreau_closed(lambda, yhat, y).unwrap().unwrap();
        let numeric = moreau_numeric(&spec, lambda, yhat, y, 1e-10).unwrap();
        worst = worst.max((closed - numeric).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-8 && elapsed < 5.0;
    assert!(
        verdict(
            "01",
            "envelope-closed-form-agreement",
            pass,
            &format!("max |closed - numeric| = {worst:.2e}, {elapsed:.2}s")
        ),
        "worst deviation {worst}"
    );
}

#[test]
fn a02_envelope_properties() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for (spec, lambda, yhat, y) in envelope_sample_set(9001, 1000) {
        let f = spec.value(yhat, y).unwrap();
        let e1 = moreau_numeric(&spec, lambda, yhat, y, 1e-10).unwrap();
        let e2 = moreau_numeric(&spec, lambda * 2.5, yhat, y, 1e-10).unwrap();
        if !(e1 >= -1e-12 && e1 <= e2 + 1e-9 && e2 <= f + 1e-9) {
            ok = false;
            detail = format!("monotonicity broke: {:?}", spec.kind);
            break;
        }
        if let Some(m) = spec.lipschitz_m {
            let gap = lipschitz_gap_bound(m, lambda).unwrap();
            if f - e1 > gap + 1e-8 {
                ok = false;
                detail = format!("gap bound broke: {:?} ({} > {})", spec.kind, f - e1, gap);
                break;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = ok && elapsed < 5.0;
    if detail.is_empty() {
        detail = format!("monotonicity + 0 <= f_lambda <= f + M^2/(4 lambda) gap, {elapsed:.2}s");
    }
    assert!(verdict("02", "envelope-properties", pass, &detail));
}

#[test]
fn a03_lambda_calculus_grid() {
    let start = Instant::now();
    let grid: Vec<f64> = (0..10_000)
        .map(|i| 10f64.powf(-4.0 + 6.0 * i as f64 / 9_999.0))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9003);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a = rng.random_range(0.01..4.0);
        let b = rng.random_range(0.01..4.0);
        let closed = optimize_lambda_square_family(a, b).unwrap();
        let scan = grid.iter().map(|&l| l / (1.0 + l) * a - l * b).fold(0.0f64, f64::max);
        worst = worst.max((closed - scan).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-6 && elapsed < 5.0;
    assert!(verdict(
        "03",
        "lambda-calculus-grid",
        pass,
        &format!("max |closed - grid| = {worst:.2e}, {elapsed:.2}s")
    ));
}

/// Shared validity computation: fraction of (trial, point) rows whose bound
/// column dominates the oracle test loss.
fn validity_fraction(rows: &[envrisk_harness::sweep::SweepRow]) -> f64 {
    let ok = rows.iter().filter(|r| r.test_loss <= r.bound_value).count();
    ok as f64 / rows.len() as f64
}

fn mean_curve_dominates(result: &envrisk_harness::SweepResult) -> bool {
    result.aggregates.iter().all(|a| a.mean_test <= a.mean_bound)
}

#[test]
fn a04_bound_validity_regression() {
    // Criterion as stated: junk covariance (n=100, d=1000, k=3), Gaussian
    // features, misspecified labels, 50 trials, 50-point ridge path,
    // bound = (sqrt(train) + sqrt(|w|^2 Tr(Sigma_perp)/n))^2, correction 1,
    // per-(trial, point) validity >= 95%.
    //
    // The trace-complexity bound is tight *in the mean* in the junk regime
    // (that tightness is the regime's defining feature), so per-pair
    // validity hovers near a coin flip at the interpolation end at any
    // scale; the delta-calibrated complexity and the mean-curve comparison
    // are printed alongside as diagnostics.
    let mut cfg = preset("junk-ridge").unwrap();
    cfg.trials = 50;
    let result = run_sweep(&cfg).unwrap();
    let v_simple = validity_fraction(&result.rows);

    let mut cfg_delta = cfg.clone();
    cfg_delta.bound = BoundCfg::DeltaBall;
    let v_delta = validity_fraction(&run_sweep(&cfg_delta).unwrap().rows);
    let means_ok = mean_curve_dominates(&result);

    let pass = v_simple >= 0.95;
    assert!(
        verdict(
            "04",
            "bound-validity-regression",
            pass,
            &format!(
                "per-pair validity {v_simple:.3} (needs >= 0.95); diagnostics: \
                 delta-ball complexity validity {v_delta:.3}, \
                 mean bound dominates mean test at every point: {means_ok}"
            )
        ),
        "per-pair validity {v_simple:.3} with the trace complexity at correction 1; \
         the bound is tight in the mean in the junk regime, so the pairwise \
         target is structurally out of reach at this (or any) scale"
    );
}

#[test]
fn a05_bound_validity_classification() {
    let mut cfg = preset("l2-margin").unwrap();
    cfg.trials = 50;
    cfg.n_mc = 400_000;
    let result = run_sweep(&cfg).unwrap();
    let v_simple = validity_fraction(&result.rows);

    let mut cfg_delta = cfg.clone();
    cfg_delta.bound = BoundCfg::DeltaBall;
    let v_delta = validity_fraction(&run_sweep(&cfg_delta).unwrap().rows);
    let means_ok = mean_curve_dominates(&result);

    let pass = v_simple >= 0.95;
    assert!(
        verdict(
            "05",
            "bound-validity-classification",
            pass,
            &format!(
                "per-pair validity {v_simple:.3} (needs >= 0.95); diagnostics: \
                 delta-ball complexity validity {v_delta:.3}, \
                 mean bound dominates mean test at every point: {means_ok}"
            )
        ),
        "per-pair validity {v_simple:.3} with the trace complexity at correction 1"
    );
}

#[test]
fn a06_benign_overfitting_flatness() {
    // junk regime: the minimum-norm interpolator is nearly as good as the
    // best point on the ridge path; harmful tail spectrum reverses this
    let run_regime = |harmful: bool| -> (f64, f64) {
        let n = 100;
        let d = 2000;
        let k = 3;
        let trials = 20;
        let cov = if harmful {
            CovarianceSpec::Harmful { d, k }
        } else {
            CovarianceSpec::junk(d, k)
        };
        let model = DataModel {
            features: FeatureKind::Gaussian,
            covariance: cov,
            labels: LabelModel::misspecified_default(),
        };
        let moments = MomentTable::gaussian(1.0, 1.0);
        let grid: Vec<f64> = (0..50)
            .map(|i| (1e-6f64.ln() * i as f64 / 49.0).exp())
            .collect();
        let mut interp_sum = 0.0;
        let mut best_sum = 0.0;
        for trial in 0..trials {
            let seed = envrisk::synthdata::derive_seed(77, trial);
            let ds = envrisk::synthdata::sample_dataset(&model, n, seed).unwrap();
            let path = ridge_path(&ds.x, &ds.y, &grid, false).unwrap();
            let mut best = f64::INFINITY;
            for i in 0..path.len() {
                let t = regression_pop_risk(&path.coefficients[i], 0.0, &model, &moments, 0)
                    .unwrap()
                    .value;
                best = best.min(t);
            }
            let mn = min_norm_least_squares(&ds.x, &ds.y);
            let t_mn = regression_pop_risk(&mn.w, 0.0, &model, &moments, 0).unwrap().value;
            interp_sum += t_mn;
            best_sum += best;
        }
        (interp_sum / trials as f64, best_sum / trials as f64)
    };

    let (junk_interp, junk_best) = run_regime(false);
    let (harm_interp, harm_best) = run_regime(true);
    let junk_ratio = junk_interp / junk_best;
    let harm_ratio = harm_interp / harm_best;
    let pass = junk_ratio <= 1.25 && harm_ratio >= 1.5;
    assert!(
        verdict(
            "06",
            "benign-overfitting-flatness",
            pass,
            &format!(
                "junk interp/best = {junk_ratio:.3} (needs <= 1.25), \
                 harmful interp/best = {harm_ratio:.3} (needs >= 1.5)"
            )
        ),
        "junk {junk_ratio:.3}, harmful {harm_ratio:.3}"
    );
}

#[test]
fn a07_ols_psi_prediction() {
    let start = Instant::now();
    let n = 400;
    let d = 100;
    let trials = 50;
    let mut wstar = DVector::zeros(d);
    wstar[0] = 1.5;
    let model = DataModel {
        features: FeatureKind::Gaussian,
        covariance: CovarianceSpec::Isotropic { d },
        labels: LabelModel::WellSpecifiedLinear { wstar: wstar.clone(), noise_var: 1.0 },
    };
    let moments = MomentTable::gaussian(1.0, 1.0);
    let mut excess_sum = 0.0;
    for trial in 0..trials {
        let seed = envrisk::synthdata::derive_seed(99, trial);
        let ds = envrisk::synthdata::sample_dataset(&model, n, seed).unwrap();
        let ols = min_norm_least_squares(&ds.x, &ds.y);
        let risk = regression_pop_risk(&ols.w, 0.0, &model, &moments, 0).unwrap().value;
        excess_sum += risk - 1.0; // sigma^2 = 1
    }
    let mean_excess = excess_sum / trials as f64;
    let predicted = envrisk::bounds::ols_psi_excess(1.0, d, n).unwrap();
    let rel = (mean_excess - predicted).abs() / predicted;
    let elapsed = start.elapsed().as_secs_f64();
    let pass = rel <= 0.15 && elapsed < 60.0;
    assert!(
        verdict(
            "07",
            "ols-psi-prediction",
            pass,
            &format!(
                "mean excess {mean_excess:.4} vs predicted {predicted:.4} \
                 (rel err {rel:.3}, needs <= 0.15), {elapsed:.1}s"
            )
        ),
        "relative error {rel}"
    );
}

#[test]
fn a08_oracle_cross_validation() {
    let start = Instant::now();
    // regression: closed form vs 10^6-sample Monte Carlo within 1% relative
    let mut rng = ChaCha8Rng::seed_from_u64(9008);
    let mut worst_reg = 0.0f64;
    let mut tables = std::collections::HashMap::new();
    for kind in FeatureKind::ALL {
        tables.insert(kind.name(), MomentTable::build(kind, 1.0, 1.0, 10_000_000, 55));
    }
    for trial in 0..50u64 {
        let d = 4 + (trial as usize) % 5;
        let kind = FeatureKind::ALL[(trial as usize) % FeatureKind::ALL.len()];
        // instance scales keep the Gaussian noise floor dominant so the
        // 10^6-sample Monte Carlo resolves 1% even for the heavy-tailed
        // coordinate distributions
        let labels = if trial % 2 == 0 {
            let mut wstar = DVector::zeros(d);
            wstar[0] = 0.8;
            LabelModel::WellSpecifiedLinear { wstar, noise_var: 0.5 }
        } else {
            LabelModel::misspecified_default()
        };
        let model =
            DataModel { features: kind, covariance: CovarianceSpec::Isotropic { d }, labels };
        let w = DVector::from_fn(d, |_, _| {
            let v: f64 = StandardNormal.sample(&mut rng);
            v * 0.25
        });
        let b = rng.random_range(-0.2..0.2);
        let moments = tables[kind.name()];
        let closed = regression_pop_risk(&w, b, &model, &moments, 0).unwrap().value;
        let mc = mc_pop_risk(&LossSpec::square(), &w, b, &model, 1_000_000, 4000 + trial)
            .unwrap()
            .value;
        worst_reg = worst_reg.max((closed - mc).abs() / closed.abs().max(1e-9));
    }

    // classification: 2-D reduction vs direct high-dimensional MC within 2%
    let mut worst_clf = 0.0f64;
    let d = 20;
    for trial in 0..20u64 {
        let model = DataModel {
            features: FeatureKind::Gaussian,
            covariance: CovarianceSpec::Isotropic { d },
            labels: LabelModel::logistic_default(),
        };
        let w = DVector::from_fn(d, |_, _| {
            let v: f64 = StandardNormal.sample(&mut rng);
            v * 0.4
        });
        let b = rng.random_range(-0.4..0.4);
        let red = classification_pop_sq_hinge(&w, b, &model, 1_000_000, 5000 + trial)
            .unwrap()
            .value;
        let direct = mc_pop_risk(
            &LossSpec::squared_hinge(),
            &w,
            b,
            &model,
            1_000_000,
            6000 + trial,
        )
        .unwrap()
        .value;
        worst_clf = worst_clf.max((red - direct).abs() / red.abs().max(1e-9));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst_reg <= 0.01 && worst_clf <= 0.02 && elapsed < 300.0;
    assert!(
        verdict(
            "08",
            "oracle-cross-validation",
            pass,
            &format!(
                "regression worst rel dev {worst_reg:.4} (needs <= 0.01), \
                 classification worst rel dev {worst_clf:.4} (needs <= 0.02), {elapsed:.0}s"
            )
        ),
        "regression {worst_reg}, classification {worst_clf}"
    );
}

#[test]
fn a09_l1_sharpness_trend() {
    let sigma = 1.0;
    let r = 2.0 * sigma;
    let mut means = Vec::new();
    let mut cis = Vec::new();
    for &(n, trials) in &[(100usize, 200u64), (200, 200), (400, 96)] {
        let ratios: Vec<f64> = (0..trials)
            .map(|t| {
                run_sharpness_l1(n, 20, sigma, r, envrisk::synthdata::derive_seed(313 + n as u64, t))
                    .unwrap()
                    .ratio
            })
            .collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let ci = bootstrap_ci(&ratios, 0.95, 1000, 313 + n as u64);
        means.push(mean);
        cis.push(ci);
    }
    let in_window = means[2] >= 0.6 && means[2] <= 1.05;
    // increases monotonically within CI: each step up must clear the
    // bootstrap uncertainty of the pair
    let half = |ci: (f64, f64)| 0.5 * (ci.1 - ci.0);
    let monotone = means[1] + half(cis[1]) + half(cis[0]) > means[0]
        && means[2] + half(cis[2]) + half(cis[1]) > means[1]
        && means[1] > means[0] - 1e-9
        && means[2] > means[1] - 1e-9;
    let pass = in_window && monotone;
    assert!(
        verdict(
            "09",
            "l1-sharpness-trend",
            pass,
            &format!(
                "ratio means n=100/200/400: {:.4}/{:.4}/{:.4}, CI(400) = [{:.3}, {:.3}]; \
                 window [0.6, 1.05] at n=400 and increasing in n",
                means[0], means[1], means[2], cis[2].0, cis[2].1
            )
        ),
        "means {means:?}"
    );
}

#[test]
fn a10_determinism_byte_identical() {
    let mut cfg = preset("junk-ridge").unwrap();
    cfg.trials = 6;
    cfg.n_mc = 50_000;
    let r1 = run_sweep(&cfg).unwrap();
    let r2 = run_sweep(&cfg).unwrap();
    let csv1 = envrisk_harness::csvio::sweep_rows_csv(&r1.rows);
    let csv2 = envrisk_harness::csvio::sweep_rows_csv(&r2.rows);
    let agg1 = envrisk_harness::csvio::agg_rows_csv(&r1.aggregates);
    let agg2 = envrisk_harness::csvio::agg_rows_csv(&r2.aggregates);

    // classification path exercises the other solver family
    let mut cfg_c = preset("l2-margin").unwrap();
    cfg_c.trials = 4;
    cfg_c.n_mc = 50_000;
    let c1 = envrisk_harness::csvio::sweep_rows_csv(&run_sweep(&cfg_c).unwrap().rows);
    let c2 = envrisk_harness::csvio::sweep_rows_csv(&run_sweep(&cfg_c).unwrap().rows);

    let pass = csv1 == csv2 && agg1 == agg2 && c1 == c2;
    assert!(
        verdict(
            "10",
            "determinism-byte-identical",
            pass,
            &format!(
                "regression rows {} bytes, classification rows {} bytes, \
                 identical across two concurrent runs",
                csv1.len(),
                c1.len()
            )
        ),
        "sweep output differed between identical runs"
    );
}

#[test]
fn a11_hypercontractivity_sanity() {
    let start = Instant::now();
    let d = 3;
    let model = DataModel {
        features: FeatureKind::Gaussian,
        covariance: CovarianceSpec::Isotropic { d },
        labels: LabelModel::WellSpecifiedLinear { wstar: DVector::zeros(d), noise_var: 1.0 },
    };
    let r = hypercontractivity_ratio(
        &LossSpec::square(),
        &DVector::zeros(d),
        0.0,
        &model,
        MomentOrder::Eight,
        10_000_000,
        9011,
    )
    .unwrap();
    let expect = 105f64.powf(0.25);
    let rel = (r.ratio - expect).abs() / expect;
    let elapsed = start.elapsed().as_secs_f64();
    let pass = rel <= 0.03;
    assert!(
        verdict(
            "11",
            "hypercontractivity-sanity",
            pass,
            &format!(
                "q=8 ratio {:.4} vs 105^(1/4) = {expect:.4} (rel err {rel:.4}, needs <= 0.03), \
                 stable = {}, {elapsed:.1}s",
                r.ratio, r.stable
            )
        ),
        "relative error {rel}"
    );
}

/// The optimistic-bound composition used throughout the acceptance sweeps,
/// kept here as a direct formula check against the criterion statement.
#[test]
fn bound_composition_matches_figure_expression() {
    let train = 0.7f64;
    let norm_w = 2.0f64;
    let trace_perp = 2.4925f64;
    let n = 100;
    let c_unnormalized = norm_w * trace_perp.sqrt();
    let via_op = optimistic_bound(train, c_unnormalized, n, 1.0).unwrap();
    let by_hand = (train.sqrt() + (norm_w * norm_w * trace_perp / n as f64).sqrt()).powi(2);
    assert!((via_op - by_hand).abs() <= 1e-12);
}
