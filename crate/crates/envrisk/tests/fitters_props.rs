//! Solver contracts: statelessness of the ridge path, LASSO KKT conditions
//! and warm-start consistency, null-space orthogonality of the minimum-norm
//! solution, monotone objective of the squared-hinge solver, and the 1-D
//! population SGD against a full-batch oracle.

use envrisk::fitters::{
    lasso_alpha_max, lasso_path, mean_sq_hinge, min_norm_least_squares, one_pass_sgd_1d, ridge_path,
    sq_hinge_erm, Penalty,
};
use envrisk::oracles::classification_pop_sq_hinge;
use envrisk::synthdata::{sigmoid, CovarianceSpec, DataModel, FeatureKind, LabelModel};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_problem(rng: &mut ChaCha8Rng, n: usize, d: usize) -> (DMatrix<f64>, DVector<f64>) {
    let x = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(rng));
    let y = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
    (x, y)
}

#[test]
fn ridge_is_stateless_across_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (x, y) = random_problem(&mut rng, 20, 12);
    let coarse = [1.0, 0.01];
    let fine = [1.0, 0.3, 0.1, 0.03, 0.01];
    let pc = ridge_path(&x, &y, &coarse, true).unwrap();
    let pf = ridge_path(&x, &y, &fine, true).unwrap();
    assert!((pc.coefficients[0].clone() - pf.coefficients[0].clone()).norm() <= 1e-10);
    assert!((pc.coefficients[1].clone() - pf.coefficients[4].clone()).norm() <= 1e-10);
}

#[test]
fn lasso_kkt_conditions_at_convergence() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let tol = 1e-9;
    for trial in 0..10 {
        let n = 12 + trial;
        let d = 8 + trial * 2;
        let (x, y) = random_problem(&mut rng, n, d);
        let amax = lasso_alpha_max(&x, &y, false);
        let alpha = amax * 0.3;
        let p = lasso_path(&x, &y, &[alpha], false, tol, 200_000).unwrap();
        assert!(p.converged[0]);
        let w = &p.coefficients[0];
        let r = &y - &x * w;
        for j in 0..d {
            let corr = x.column(j).dot(&r) / n as f64;
            assert!(
                corr.abs() <= alpha + 10.0 * tol.max(1e-8),
                "KKT violated at {j}: |corr| = {} > alpha = {alpha}",
                corr.abs()
            );
            if w[j] != 0.0 {
                assert!(
                    (corr - alpha * w[j].signum()).abs() <= 1e-6,
                    "active-set stationarity violated at {j}"
                );
            }
        }
    }
}

#[test]
fn lasso_warm_equals_cold() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let tol = 1e-10;
    for _ in 0..5 {
        let (x, y) = random_problem(&mut rng, 30, 40);
        let amax = lasso_alpha_max(&x, &y, false);
        let grid: Vec<f64> = (0..12).map(|i| amax * 0.6f64.powi(i)).collect();
        let warm = lasso_path(&x, &y, &grid, false, tol, 500_000).unwrap();
        for (i, &alpha) in grid.iter().enumerate() {
            let cold = lasso_path(&x, &y, &[alpha], false, tol, 500_000).unwrap();
            let delta = (warm.coefficients[i].clone() - cold.coefficients[0].clone())
                .iter()
                .map(|v| v.abs())
                .fold(0.0, f64::max);
            assert!(delta <= 10.0 * tol.max(1e-8), "alpha={alpha}: coefficient gap {delta}");
        }
    }
}

#[test]
fn min_norm_is_orthogonal_to_null_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..10 {
        // rank-deficient design: d > n
        let (x, y) = random_problem(&mut rng, 6, 14);
        let f = min_norm_least_squares(&x, &y);
        // any v in the null space of X satisfies <w, v> = 0;
        // build null vectors by projecting random probes
        let xt = x.transpose();
        let gram = &x * &xt;
        let chol = gram.cholesky().unwrap();
        for _ in 0..5 {
            let probe = DVector::from_fn(14, |_, _| {
                let v: f64 = StandardNormal.sample(&mut rng);
                v
            });
            let v_null = &probe - &xt * chol.solve(&(&x * &probe));
            assert!((x.clone() * &v_null).norm() < 1e-8);
            assert!(
                f.w.dot(&v_null).abs() <= 1e-8,
                "min-norm solution has a null-space component: {}",
                f.w.dot(&v_null).abs()
            );
        }
    }
}

#[test]
fn sq_hinge_objective_monotone_over_iterations() {
    // the solver is deterministic from a cold start, so truncating the
    // iteration budget replays the same trajectory prefix
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let n = 24;
    let d = 10;
    let x = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
    let y = DVector::from_fn(n, |i, _| if (i * 7 + 3) % 2 == 0 { 1.0 } else { -1.0 });
    let reg = 0.05;
    let objective = |w: &DVector<f64>, b: f64| mean_sq_hinge(&x, &y, w, b) + reg * w.norm_squared();
    let mut prev = f64::INFINITY;
    for budget in (1..40).step_by(3) {
        let f = sq_hinge_erm(&x, &y, Penalty::L2(reg), true, 0.0, budget).unwrap();
        let obj = objective(&f.w, f.b);
        assert!(obj <= prev + 1e-12, "objective rose from {prev} to {obj} at budget {budget}");
        prev = obj;
    }
}

#[test]
fn one_pass_sgd_matches_full_batch_on_logistic_model() {
    // population objective: E max(0, 1 - y (w x1 + b))^2 with
    // P(y = 1 | x1) = sigmoid(5 x1 + 3)
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let draw = |rng: &mut ChaCha8Rng| -> (f64, f64) {
        let x: f64 = StandardNormal.sample(rng);
        let y = if rng.random::<f64>() < sigmoid(5.0 * x + 3.0) { 1.0 } else { -1.0 };
        (x, y)
    };
    let (w_sgd, b_sgd) = {
        let mut r = rng.clone();
        one_pass_sgd_1d(|| draw(&mut r), (0.0, 0.0), 0.1, 1_000_000)
    };

    // full-batch oracle on 10^6 frozen samples
    let n = 1_000_000;
    let mut xs = DMatrix::zeros(n, 1);
    let mut ys = DVector::zeros(n);
    for i in 0..n {
        let (x, y) = draw(&mut rng);
        xs[(i, 0)] = x;
        ys[i] = y;
    }
    let batch = sq_hinge_erm(&xs, &ys, Penalty::L2(0.0), true, 1e-7, 3000).unwrap();

    // compare population losses through the 2-D reduction oracle
    let d = 4;
    let model = DataModel {
        features: FeatureKind::Gaussian,
        covariance: CovarianceSpec::Isotropic { d },
        labels: LabelModel::logistic_default(),
    };
    let embed = |w1: f64| {
        let mut w = DVector::zeros(d);
        w[0] = w1;
        w
    };
    let l_sgd = classification_pop_sq_hinge(&embed(w_sgd), b_sgd, &model, 2_000_000, 7).unwrap();
    let l_batch =
        classification_pop_sq_hinge(&embed(batch.w[0]), batch.b, &model, 2_000_000, 7).unwrap();
    assert!(
        (l_sgd.value - l_batch.value).abs() <= 0.02,
        "sgd loss {} vs batch loss {}",
        l_sgd.value,
        l_batch.value
    );
    // frozen independent optimum (quadrature + Nelder-Mead oracle):
    // (w, b) = (1.6028, 0.9627) with risk 0.26698
    assert!((l_batch.value - 0.26698).abs() < 0.01, "batch risk {}", l_batch.value);
}

#[test]
fn separable_path_reaches_zero_loss_with_vanishing_penalty() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 40;
    let d = 60; // overparameterized: separable almost surely
    let x = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
    let y = DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
    let mut warm: Option<(DVector<f64>, f64)> = None;
    let mut last_train = f64::INFINITY;
    for reg in [1.0, 0.1, 0.01, 1e-3, 1e-4, 1e-5] {
        let f = envrisk::fitters::sq_hinge_erm_warm(
            &x,
            &y,
            Penalty::L2(reg),
            true,
            1e-7,
            20_000,
            warm.as_ref().map(|(w, b)| (w, *b)),
        )
        .unwrap();
        last_train = f.train_loss;
        warm = Some((f.w, f.b));
    }
    assert!(last_train < 1e-6, "train loss {last_train}");
}
