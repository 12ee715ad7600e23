//! LASSO by cyclic coordinate descent with warm starts, and the approximate
//! minimum-l1-norm interpolator obtained by penalty continuation.

use nalgebra::{DMatrix, DVector};

use super::{center, mse, FitResult, RegPath};
use crate::error::{Error, Result};

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Smallest penalty with an all-zero solution:
/// `alpha_max = max_j |<x_j, y_c>| / n`.
pub fn lasso_alpha_max(x: &DMatrix<f64>, y: &DVector<f64>, fit_intercept: bool) -> f64 {
    let (xc, yc, _, _) = center(x, y, fit_intercept);
    let n = x.nrows() as f64;
    (0..x.ncols())
        .map(|j| xc.column(j).dot(&yc).abs() / n)
        .fold(0.0, f64::max)
}

/// Coordinate-descent LASSO path for
/// `min (1/2n)|y - Xw - b|^2 + alpha |w|_1`
/// over a descending `alpha_grid`, warm-started from the previous solution.
/// Converged when the largest coefficient change in a sweep drops below `tol`.
pub fn lasso_path(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    alpha_grid: &[f64],
    fit_intercept: bool,
    tol: f64,
    max_iter: usize,
) -> Result<RegPath> {
    let (n, d) = (x.nrows(), x.ncols());
    if n == 0 || d == 0 {
        return Err(Error::InvalidParam("empty design matrix"));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if alpha_grid.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidParam("lasso grid must be strictly positive"));
    }
    if alpha_grid.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidParam("lasso grid must be descending"));
    }

    let (xc, yc, x_mean, y_mean) = center(x, y, fit_intercept);
    let nf = n as f64;
    let col_sq: Vec<f64> = (0..d).map(|j| xc.column(j).norm_squared() / nf).collect();

    let mut w = DVector::<f64>::zeros(d);
    let mut resid = yc.clone();
    let mut path = RegPath::with_capacity(alpha_grid.len());

    for &alpha in alpha_grid {
        let mut ok = false;
        for _ in 0..max_iter {
            let mut max_delta = 0.0f64;
            for j in 0..d {
                if col_sq[j] == 0.0 {
                    continue;
                }
                let wj = w[j];
                let rho = xc.column(j).dot(&resid) / nf + col_sq[j] * wj;
                let wj_new = soft_threshold(rho, alpha) / col_sq[j];
                if wj_new != wj {
                    resid.axpy(wj - wj_new, &xc.column(j).clone_owned(), 1.0);
                    w[j] = wj_new;
                    max_delta = max_delta.max((wj_new - wj).abs());
                }
            }
            if max_delta < tol {
                ok = true;
                break;
            }
        }
        let b = if fit_intercept { y_mean - w.dot(&x_mean) } else { 0.0 };
        let train = mse(x, y, &w, b);
        path.push(alpha, w.clone(), b, train, ok);
    }
    Ok(path)
}

/// Result of the l1 continuation: the fit plus the sup-norm interpolation
/// residual, which makes the approximation auditable.
#[derive(Debug, Clone)]
pub struct MinL1Result {
    pub fit: FitResult,
    pub linf_residual: f64,
}

/// Approximate minimum-l1-norm interpolator of `Xw = y`: the LASSO path is
/// continued from `alpha_max` down to the absolute penalty
/// `continuation_floor`. `converged` is false when the final residual shows
/// the system was not (near-)interpolated.
pub fn min_l1_interpolator(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    continuation_floor: f64,
) -> Result<MinL1Result> {
    if !(continuation_floor > 0.0) {
        return Err(Error::InvalidParam("continuation floor must be positive"));
    }
    let alpha_max = lasso_alpha_max(x, y, false);
    if alpha_max == 0.0 {
        // zero target: w = 0 interpolates
        let d = x.ncols();
        return Ok(MinL1Result {
            fit: FitResult {
                w: DVector::zeros(d),
                b: 0.0,
                train_loss: mse(x, y, &DVector::zeros(d), 0.0),
                iterations: 0,
                converged: y.iter().all(|v| *v == 0.0),
            },
            linf_residual: y.iter().map(|v| v.abs()).fold(0.0, f64::max),
        });
    }
    let floor = continuation_floor.min(alpha_max * 0.5);
    let stages = 80usize;
    let ratio = (floor / alpha_max).powf(1.0 / (stages as f64 - 1.0));
    let grid: Vec<f64> = (0..stages).map(|i| alpha_max * ratio.powi(i as i32)).collect();
    let path = lasso_path(x, y, &grid, false, 1e-10, 100_000)?;

    let last = path.len() - 1;
    let w = path.coefficients[last].clone();
    let resid = y - x * &w;
    let linf = resid.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let y_scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    let near_interpolation = linf <= 1e-3 * y_scale;
    Ok(MinL1Result {
        fit: FitResult {
            w,
            b: 0.0,
            train_loss: path.train_losses[last],
            iterations: stages,
            converged: path.converged[last] && near_interpolation,
        },
        linf_residual: linf,
    })
}
