//! Ridge paths from a single SVD, and the minimum-norm least-squares solution.

use nalgebra::{DMatrix, DVector};

use super::{center, mse, FitResult, RegPath};
use crate::error::{Error, Result};

/// Full ridge path `min (1/n)|y - Xw - b|^2 + reg |w|_2^2` for every value in
/// `reg_grid`, from one SVD of the (centered, when `fit_intercept`) design:
/// `w(reg) = V diag(s / (s^2 + n reg)) U^T y_c`.
pub fn ridge_path(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    reg_grid: &[f64],
    fit_intercept: bool,
) -> Result<RegPath> {
    let (n, d) = (x.nrows(), x.ncols());
    if n == 0 || d == 0 {
        return Err(Error::InvalidParam("empty design matrix"));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if reg_grid.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidParam("ridge grid must be strictly positive"));
    }

    let (xc, yc, x_mean, y_mean) = center(x, y, fit_intercept);
    let svd = xc.clone().svd(true, true);
    let u = svd.u.as_ref().ok_or(Error::Singular("ridge SVD"))?;
    let vt = svd.v_t.as_ref().ok_or(Error::Singular("ridge SVD"))?;
    let uty = u.transpose() * &yc;

    let mut path = RegPath::with_capacity(reg_grid.len());
    for &reg in reg_grid {
        let mut coefs = uty.clone();
        for (i, c) in coefs.iter_mut().enumerate() {
            let s = svd.singular_values[i];
            *c *= s / (s * s + n as f64 * reg);
        }
        let w = vt.transpose() * coefs;
        let b = if fit_intercept { y_mean - w.dot(&x_mean) } else { 0.0 };
        let train = mse(x, y, &w, b);
        path.push(reg, w, b, train, true);
    }
    Ok(path)
}

/// Minimum-norm least squares `w = X^+ y` via SVD, dropping singular values
/// below `max(n, d) * eps * s_max`. When `rank(X) = n <= d` this is the
/// minimum-l2-norm interpolator.
pub fn min_norm_least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> FitResult {
    let (n, d) = (x.nrows(), x.ncols());
    let svd = x.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let s_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = s_max * (n.max(d) as f64) * f64::EPSILON;
    let mut coefs = u.transpose() * y;
    for (i, c) in coefs.iter_mut().enumerate() {
        let s = svd.singular_values[i];
        *c = if s > cutoff { *c / s } else { 0.0 };
    }
    let w = vt.transpose() * coefs;
    let train = mse(x, y, &w, 0.0);
    FitResult { w, b: 0.0, train_loss: train, iterations: 1, converged: true }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ridge_limits() {
        let x = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let y = DVector::from_vec(vec![1.0, 2.0]);
        // tiny penalty: normal equations give w = (sum x y)/(sum x^2) = 1
        let p = ridge_path(&x, &y, &[1e-12], false).unwrap();
        assert_abs_diff_eq!(p.coefficients[0][0], 1.0, epsilon = 1e-9);
        // huge penalty: w -> 0
        let p = ridge_path(&x, &y, &[1e12], false).unwrap();
        assert!(p.coefficients[0][0].abs() < 1e-9);
        // zero target: w = 0 on the whole grid
        let z = DVector::zeros(2);
        let p = ridge_path(&x, &z, &[1.0, 0.1, 0.001], false).unwrap();
        for w in &p.coefficients {
            assert_eq!(w[0], 0.0);
        }
    }

    #[test]
    fn ridge_norm_monotone_in_penalty() {
        let x = DMatrix::from_fn(10, 6, |i, j| ((i * 7 + j * 13) % 11) as f64 - 5.0);
        let y = DVector::from_fn(10, |i, _| (i as f64).sin());
        let grid: Vec<f64> = (0..20).map(|i| 10f64.powf(1.0 - 0.2 * i as f64)).collect();
        let p = ridge_path(&x, &y, &grid, false).unwrap();
        for i in 1..p.len() {
            // grid is descending, so the norm must be nondecreasing
            assert!(p.norms_l2[i] >= p.norms_l2[i - 1] - 1e-12);
            assert!(p.train_losses[i] <= p.train_losses[i - 1] + 1e-12);
        }
    }

    #[test]
    fn ridge_intercept_centering() {
        let x = DMatrix::from_row_slice(4, 1, &[10.0, 11.0, 12.0, 13.0]);
        let y = DVector::from_vec(vec![20.0, 22.0, 24.0, 26.0]);
        let p = ridge_path(&x, &y, &[1e-10], true).unwrap();
        assert_abs_diff_eq!(p.coefficients[0][0], 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(p.intercepts[0], 0.0, epsilon = 1e-4);
        assert!(p.train_losses[0] < 1e-10);
    }

    #[test]
    fn min_norm_basics() {
        // one equation, two unknowns: minimal-norm solution is (2, 0)
        let x = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let y = DVector::from_vec(vec![2.0]);
        let f = min_norm_least_squares(&x, &y);
        assert_abs_diff_eq!(f.w[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.w[1], 0.0, epsilon = 1e-12);

        // square invertible: w = X^{-1} y
        let x = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let y = DVector::from_vec(vec![1.0, 2.0]);
        let f = min_norm_least_squares(&x, &y);
        let sol = x.clone().lu().solve(&y).unwrap();
        assert_abs_diff_eq!((f.w - sol).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn min_norm_ignores_zero_columns() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let y = DVector::from_vec(vec![1.0, -1.0]);
        let f2 = min_norm_least_squares(&x, &y);
        let mut x3 = DMatrix::zeros(2, 3);
        x3.view_mut((0, 0), (2, 2)).copy_from(&x);
        let f3 = min_norm_least_squares(&x3, &y);
        assert_abs_diff_eq!(f3.w[0], f2.w[0], epsilon = 1e-10);
        assert_abs_diff_eq!(f3.w[1], f2.w[1], epsilon = 1e-10);
        assert_abs_diff_eq!(f3.w[2], 0.0, epsilon = 1e-12);
    }
}
