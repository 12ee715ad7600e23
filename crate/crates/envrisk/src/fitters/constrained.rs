//! Constrained ERM over a norm ball by projected (sub)gradient descent.
//!
//! Smooth losses get projected gradient steps with a backtracking line
//! search; nonsmooth losses (absolute error, hinge) get subgradient steps
//! with Polyak-style step sizes targeting zero loss, which is exact on
//! interpolation problems and conservative otherwise. Either way the best
//! iterate is returned together with a subgradient-method gap estimate.

use nalgebra::{DMatrix, DVector};

use crate::envelope::LossSpec;
use crate::error::{Error, Result};

use super::FitResult;

/// Constraint set `{ |w| <= radius }` in the l2 or l1 norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormBall {
    L2(f64),
    L1(f64),
}

impl NormBall {
    fn radius(&self) -> f64 {
        match self {
            NormBall::L2(b) | NormBall::L1(b) => *b,
        }
    }

    fn project(&self, w: &mut DVector<f64>) {
        match self {
            NormBall::L2(b) => {
                let norm = w.norm();
                if norm > *b {
                    if *b == 0.0 {
                        w.fill(0.0);
                    } else {
                        *w *= *b / norm;
                    }
                }
            }
            NormBall::L1(b) => project_l1_ball(w, *b),
        }
    }
}

/// Euclidean projection onto the l1 ball of the given radius
/// (sort-based threshold search).
fn project_l1_ball(w: &mut DVector<f64>, radius: f64) {
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return;
    }
    if radius <= 0.0 {
        w.fill(0.0);
        return;
    }
    let mut mags: Vec<f64> = w.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &m) in mags.iter().enumerate() {
        cumsum += m;
        let t = (cumsum - radius) / (i + 1) as f64;
        if t >= m {
            break;
        }
        theta = t;
    }
    for v in w.iter_mut() {
        let shrunk = (v.abs() - theta).max(0.0);
        *v = v.signum() * shrunk;
    }
}

/// Constrained ERM plus an optimality-gap estimate: the backtracking
/// projected-gradient residual for smooth losses, the classical
/// `D * G_rms / sqrt(T)` certificate for subgradient runs.
#[derive(Debug, Clone)]
pub struct ConstrainedFit {
    pub fit: FitResult,
    pub gap_estimate: f64,
}

/// Minimize the empirical loss of a convex [`LossSpec`] over a norm ball,
/// returning the best iterate seen. The intercept, when fitted, is a free
/// unprojected coordinate.
pub fn constrained_erm(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    loss: &LossSpec,
    ball: NormBall,
    fit_intercept: bool,
    tol: f64,
    max_iter: usize,
) -> Result<ConstrainedFit> {
    if !loss.convex {
        return Err(Error::NonConvex("constrained_erm"));
    }
    if ball.radius() < 0.0 {
        return Err(Error::InvalidParam("ball radius must be nonnegative"));
    }
    let (n, d) = (x.nrows(), x.ncols());
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }

    let objective = |w: &DVector<f64>, b: f64| -> Result<f64> {
        let p = x * w;
        let mut s = 0.0;
        for i in 0..n {
            s += loss.value(p[i] + b, y[i])?;
        }
        Ok(s / n as f64)
    };
    let gradient = |w: &DVector<f64>, b: f64| -> Result<(DVector<f64>, f64)> {
        let p = x * w;
        let mut coef = DVector::zeros(n);
        let mut gb = 0.0;
        for i in 0..n {
            let g = loss.subgradient(p[i] + b, y[i])? / n as f64;
            coef[i] = g;
            gb += g;
        }
        let mut gw = DVector::zeros(d);
        gw.gemv_tr(1.0, x, &coef, 0.0);
        if !fit_intercept {
            gb = 0.0;
        }
        Ok((gw, gb))
    };

    let mut w = DVector::zeros(d);
    let mut b = 0.0;
    ball.project(&mut w);
    let mut f_cur = objective(&w, b)?;
    let mut best_w = w.clone();
    let mut best_b = b;
    let mut best_f = f_cur;

    let smooth = loss.smoothness_h.is_some();
    let mut iterations = 0;
    let mut gap_estimate;

    if smooth {
        // projected gradient with backtracking; residual = |w - P(w - s g)| / s
        let mut step = 1.0;
        loop {
            iterations += 1;
            let (gw, gb) = gradient(&w, b)?;
            let mut accepted = false;
            for _ in 0..60 {
                let mut cand = &w - &gw * step;
                ball.project(&mut cand);
                let cand_b = b - gb * step;
                let f_cand = objective(&cand, cand_b)?;
                let dw = &cand - &w;
                let db = cand_b - b;
                let decrease = gw.dot(&dw) + gb * db + (dw.norm_squared() + db * db) / (2.0 * step);
                if f_cand <= f_cur + decrease + 1e-15 * f_cur.abs().max(1.0) {
                    w = cand;
                    b = cand_b;
                    f_cur = f_cand;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if f_cur < best_f {
                best_f = f_cur;
                best_w.copy_from(&w);
                best_b = b;
            }
            // optimality residual of the projected step
            let (gw2, gb2) = gradient(&w, b)?;
            let mut fwd = &w - &gw2 * step;
            ball.project(&mut fwd);
            let resid = (((&w - &fwd).norm_squared() + (gb2 * step).powi(2)).sqrt()) / step;
            gap_estimate = resid;
            if resid <= tol || !accepted || iterations >= max_iter {
                break;
            }
            step *= 1.5;
        }
        let converged = gap_estimate <= tol;
        return Ok(ConstrainedFit {
            fit: FitResult { w: best_w, b: best_b, train_loss: best_f, iterations, converged },
            gap_estimate,
        });
    }

    // nonsmooth: Polyak subgradient steps targeting zero loss
    let mut g_sq_sum = 0.0f64;
    for t in 1..=max_iter {
        iterations = t;
        let (gw, gb) = gradient(&w, b)?;
        let g_norm_sq = gw.norm_squared() + gb * gb;
        g_sq_sum += g_norm_sq;
        if g_norm_sq <= 1e-300 {
            break;
        }
        let step = f_cur / g_norm_sq;
        w.axpy(-step, &gw, 1.0);
        ball.project(&mut w);
        if fit_intercept {
            b -= step * gb;
        }
        f_cur = objective(&w, b)?;
        if f_cur < best_f {
            best_f = f_cur;
            best_w.copy_from(&w);
            best_b = b;
        }
        if best_f <= tol {
            break;
        }
    }
    let g_rms = (g_sq_sum / iterations as f64).sqrt();
    gap_estimate = (2.0 * ball.radius().max(1.0)) * g_rms / (iterations as f64).sqrt();
    let converged = best_f <= tol || gap_estimate <= tol;
    Ok(ConstrainedFit {
        fit: FitResult { w: best_w, b: best_b, train_loss: best_f, iterations, converged },
        gap_estimate,
    })
}
