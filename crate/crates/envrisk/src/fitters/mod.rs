//! Regularization-path solvers and interpolators.
//!
//! Reported `train_loss` is always the unpenalized mean loss of the fitted
//! predictor: mean squared error for the regression solvers, mean squared
//! hinge for the margin solvers. Intercepts are never penalized; they are
//! handled by centering (ridge, lasso) or as a free coordinate (squared
//! hinge, constrained ERM).

mod constrained;
mod lasso;
mod ridge;
mod sgd1d;
mod sqhinge;

pub use constrained::{constrained_erm, ConstrainedFit, NormBall};
pub use lasso::{lasso_alpha_max, lasso_path, min_l1_interpolator, MinL1Result};
pub use ridge::{min_norm_least_squares, ridge_path};
pub use sgd1d::one_pass_sgd_1d;
pub use sqhinge::{sq_hinge_erm, sq_hinge_erm_warm, Penalty};

use nalgebra::{DMatrix, DVector};

/// One fitted linear predictor.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub w: DVector<f64>,
    pub b: f64,
    pub train_loss: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solutions along a grid of penalty strengths, strongest first.
#[derive(Debug, Clone)]
pub struct RegPath {
    pub reg_values: Vec<f64>,
    pub coefficients: Vec<DVector<f64>>,
    pub intercepts: Vec<f64>,
    pub train_losses: Vec<f64>,
    pub norms_l1: Vec<f64>,
    pub norms_l2: Vec<f64>,
    pub converged: Vec<bool>,
}

impl RegPath {
    pub fn len(&self) -> usize {
        self.reg_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reg_values.is_empty()
    }

    pub fn with_capacity(m: usize) -> Self {
        RegPath {
            reg_values: Vec::with_capacity(m),
            coefficients: Vec::with_capacity(m),
            intercepts: Vec::with_capacity(m),
            train_losses: Vec::with_capacity(m),
            norms_l1: Vec::with_capacity(m),
            norms_l2: Vec::with_capacity(m),
            converged: Vec::with_capacity(m),
        }
    }

    /// Append one solved point; norms are derived from `w`.
    pub fn push(&mut self, reg: f64, w: DVector<f64>, b: f64, train: f64, ok: bool) {
        self.reg_values.push(reg);
        self.norms_l1.push(w.iter().map(|v| v.abs()).sum());
        self.norms_l2.push(w.norm());
        self.coefficients.push(w);
        self.intercepts.push(b);
        self.train_losses.push(train);
        self.converged.push(ok);
    }
}

/// Mean squared error of `(w, b)` on `(x, y)`.
pub fn mse(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, b: f64) -> f64 {
    let r = y - x * w;
    r.iter().map(|v| (v - b) * (v - b)).sum::<f64>() / y.len() as f64
}

/// Mean squared hinge loss of `(w, b)` on `(x, y)` with labels +-1.
pub fn mean_sq_hinge(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, b: f64) -> f64 {
    let p = x * w;
    let n = y.len();
    let mut s = 0.0;
    for i in 0..n {
        let m = (1.0 - y[i] * (p[i] + b)).max(0.0);
        s += m * m;
    }
    s / n as f64
}

pub(crate) fn center(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    fit_intercept: bool,
) -> (DMatrix<f64>, DVector<f64>, DVector<f64>, f64) {
    if !fit_intercept {
        return (x.clone(), y.clone(), DVector::zeros(x.ncols()), 0.0);
    }
    let x_mean = x.row_mean().transpose();
    let y_mean = y.mean();
    let mut xc = x.clone();
    for mut row in xc.row_iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v -= x_mean[j];
        }
    }
    let yc = y.map(|v| v - y_mean);
    (xc, yc, x_mean, y_mean)
}
