//! Penalized squared-hinge ERM (linear SVM with the smooth hinge square).
//!
//! Minimizes `(1/n) sum max(0, 1 - y_i(<w, x_i> + b))^2 + penalty(w)` with an
//! accelerated proximal gradient method: backtracking line search on the
//! smooth part, Nesterov momentum with function restarts, and a monotone
//! safeguard so the objective never increases across accepted steps. The l2
//! penalty stays in the smooth part; the l1 penalty enters through its
//! soft-threshold prox. The intercept is a free, unpenalized coordinate.

use nalgebra::{DMatrix, DVector};

use super::{mean_sq_hinge, FitResult};
use crate::error::{Error, Result};

/// Penalty attached to the squared-hinge objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    /// `reg * |w|_2^2`
    L2(f64),
    /// `alpha * |w|_1`
    L1(f64),
}

struct Objective<'a> {
    x: &'a DMatrix<f64>,
    y: &'a DVector<f64>,
    penalty: Penalty,
    fit_intercept: bool,
}

impl Objective<'_> {
    /// Smooth part (mean squared hinge, plus the l2 term when present).
    fn smooth(&self, w: &DVector<f64>, b: f64) -> f64 {
        let base = mean_sq_hinge(self.x, self.y, w, b);
        match self.penalty {
            Penalty::L2(reg) => base + reg * w.norm_squared(),
            Penalty::L1(_) => base,
        }
    }

    fn full(&self, w: &DVector<f64>, b: f64) -> f64 {
        match self.penalty {
            Penalty::L2(_) => self.smooth(w, b),
            Penalty::L1(alpha) => self.smooth(w, b) + alpha * w.iter().map(|v| v.abs()).sum::<f64>(),
        }
    }

    fn grad(&self, w: &DVector<f64>, b: f64) -> (DVector<f64>, f64) {
        let n = self.y.len();
        let p = self.x * w;
        let mut coef = DVector::zeros(n);
        let mut gb = 0.0;
        for i in 0..n {
            let m = 1.0 - self.y[i] * (p[i] + b);
            if m > 0.0 {
                let c = -2.0 * self.y[i] * m / n as f64;
                coef[i] = c;
                gb += c;
            }
        }
        let mut gw = self.x.transpose() * coef;
        if let Penalty::L2(reg) = self.penalty {
            gw.axpy(2.0 * reg, w, 1.0);
        }
        if !self.fit_intercept {
            gb = 0.0;
        }
        (gw, gb)
    }

    fn prox(&self, w: &mut DVector<f64>, step: f64) {
        if let Penalty::L1(alpha) = self.penalty {
            let t = step * alpha;
            for v in w.iter_mut() {
                *v = if *v > t {
                    *v - t
                } else if *v < -t {
                    *v + t
                } else {
                    0.0
                };
            }
        }
    }
}

/// Squared-hinge ERM with warm start. `tol` is a gradient-norm tolerance for
/// the l2 penalty and a prox-residual tolerance for the l1 penalty.
pub fn sq_hinge_erm_warm(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    penalty: Penalty,
    fit_intercept: bool,
    tol: f64,
    max_iter: usize,
    warm: Option<(&DVector<f64>, f64)>,
) -> Result<FitResult> {
    let (n, d) = (x.nrows(), x.ncols());
    if n == 0 || d == 0 {
        return Err(Error::InvalidParam("empty design matrix"));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if let Some(bad) = y.iter().find(|v| **v != 1.0 && **v != -1.0) {
        return Err(Error::InvalidLabel(*bad));
    }
    match penalty {
        Penalty::L2(r) if r < 0.0 => return Err(Error::InvalidParam("negative l2 penalty")),
        Penalty::L1(a) if a < 0.0 => return Err(Error::InvalidParam("negative l1 penalty")),
        _ => {}
    }

    let obj = Objective { x, y, penalty, fit_intercept };
    let (mut w, mut b) = match warm {
        Some((w0, b0)) => (w0.clone(), b0),
        None => (DVector::zeros(d), 0.0),
    };
    let mut f_cur = obj.full(&w, b);
    let (mut w_prev, mut b_prev) = (w.clone(), b);
    let mut t_momentum = 1.0f64;
    let mut step = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;

    let take_step = |v_w: &DVector<f64>, v_b: f64, step: &mut f64| -> (DVector<f64>, f64) {
        let g_v = obj.smooth(v_w, v_b);
        let (gw, gb) = obj.grad(v_w, v_b);
        loop {
            let mut cand_w = v_w - &gw * *step;
            let cand_b = v_b - gb * *step;
            obj.prox(&mut cand_w, *step);
            let dw = &cand_w - v_w;
            let db = cand_b - v_b;
            let quad = g_v + gw.dot(&dw) + gb * db + (dw.norm_squared() + db * db) / (2.0 * *step);
            if obj.smooth(&cand_w, cand_b) <= quad + 1e-15 * quad.abs().max(1.0) {
                return (cand_w, cand_b);
            }
            *step *= 0.5;
            if *step < 1e-18 {
                return (v_w.clone(), v_b);
            }
        }
    };

    for it in 0..max_iter {
        iterations = it + 1;
        let beta = (t_momentum - 1.0) / {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_momentum * t_momentum).sqrt());
            t_momentum = t_next;
            t_next
        };
        let v_w = &w + (&w - &w_prev) * beta;
        let v_b = b + (b - b_prev) * beta;
        step *= 1.3; // let the line search re-grow after conservative shrinks
        let (mut cand_w, mut cand_b) = take_step(&v_w, v_b, &mut step);
        let mut f_cand = obj.full(&cand_w, cand_b);
        if f_cand > f_cur {
            // momentum overshoot: plain prox-gradient step from (w, b)
            t_momentum = 1.0;
            let (pw, pb) = take_step(&w, b, &mut step);
            let pf = obj.full(&pw, pb);
            if pf <= f_cur {
                cand_w = pw;
                cand_b = pb;
                f_cand = pf;
            } else {
                cand_w = w.clone();
                cand_b = b;
                f_cand = f_cur;
            }
        }
        w_prev = std::mem::replace(&mut w, cand_w);
        b_prev = b;
        b = cand_b;
        f_cur = f_cand;

        // optimality measure at the accepted iterate
        let (gw, gb) = obj.grad(&w, b);
        let resid = match penalty {
            Penalty::L2(_) => (gw.norm_squared() + gb * gb).sqrt(),
            Penalty::L1(_) => {
                let mut fw = &w - &gw * step;
                obj.prox(&mut fw, step);
                let db = gb * step;
                (((&w - &fw).norm_squared() + db * db) / (step * step)).sqrt()
            }
        };
        if resid <= tol {
            converged = true;
            break;
        }
    }

    let train = mean_sq_hinge(x, y, &w, b);
    Ok(FitResult { w, b, train_loss: train, iterations, converged })
}

/// Cold-started [`sq_hinge_erm_warm`].
pub fn sq_hinge_erm(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    penalty: Penalty,
    fit_intercept: bool,
    tol: f64,
    max_iter: usize,
) -> Result<FitResult> {
    sq_hinge_erm_warm(x, y, penalty, fit_intercept, tol, max_iter, None)
}
