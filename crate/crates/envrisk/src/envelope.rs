//! Scalar loss functions, their Moreau envelopes, and proximal operators.
//!
//! The Moreau envelope of a loss `f` with parameter `lambda > 0` is
//!
//! ```text
//! f_lambda(yhat, y) = inf_u  f(u, y) + lambda * (u - yhat)^2
//! ```
//!
//! a smooth lower approximation of `f` that tightens as `lambda` grows.
//! The minimizing `u` is the proximal operator. Square and squared-hinge
//! losses reproduce themselves under the envelope up to the factor
//! `lambda / (1 + lambda)`; absolute error and hinge turn into Huber-type
//! losses. Everything here is a pure function of its arguments.

use crate::error::{Error, Result};

/// Which scalar loss a [`LossSpec`] describes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossKind {
    /// `(yhat - y)^2`
    Square,
    /// `max(0, 1 - y*yhat)^2`, labels in {-1, +1}
    SquaredHinge,
    /// `max(0, 1 - y*yhat)`, labels in {-1, +1}
    Hinge,
    /// `|yhat - y|`
    AbsoluteError,
    /// Huber with threshold `delta`: `r^2 / (2 delta)` for `|r| <= delta`,
    /// `|r| - delta/2` beyond. Slope-1 outside, so the Lipschitz constant
    /// is 1 for every `delta`.
    Huber(f64),
    /// Margin analogue of [`LossKind::Huber`] applied to `m = 1 - y*yhat`:
    /// zero for `m <= 0`, `m^2 / (2 delta)` for `0 < m <= delta`,
    /// `m - delta/2` beyond.
    HuberHinge(f64),
    /// `1{sign disagreement}`. Evaluation only; not convex, so every
    /// envelope/prox operation rejects it.
    ZeroOne,
}

impl LossKind {
    fn is_margin(self) -> bool {
        matches!(
            self,
            LossKind::SquaredHinge | LossKind::Hinge | LossKind::HuberHinge(_) | LossKind::ZeroOne
        )
    }
}

/// A scalar loss together with its regularity constants.
///
/// `lipschitz_m`, `smoothness_h` and `sqrt_lipschitz_l` are `None` when the
/// loss does not have the corresponding property. A loss is `L`-sqrt-Lipschitz
/// when `|df/dyhat| <= 2 L sqrt(f)` everywhere it is differentiable.
#[derive(Debug, Clone, Copy)]
pub struct LossSpec {
    pub kind: LossKind,
    pub convex: bool,
    pub lipschitz_m: Option<f64>,
    pub smoothness_h: Option<f64>,
    pub sqrt_lipschitz_l: Option<f64>,
}

impl LossSpec {
    pub fn new(kind: LossKind) -> Result<Self> {
        match kind {
            LossKind::Huber(d) | LossKind::HuberHinge(d) if !(d > 0.0) => {
                return Err(Error::InvalidParam("Huber delta must be positive"));
            }
            _ => {}
        }
        let spec = match kind {
            LossKind::Square | LossKind::SquaredHinge => LossSpec {
                kind,
                convex: true,
                lipschitz_m: None,
                smoothness_h: Some(2.0),
                sqrt_lipschitz_l: Some(1.0),
            },
            LossKind::Hinge | LossKind::AbsoluteError => LossSpec {
                kind,
                convex: true,
                lipschitz_m: Some(1.0),
                smoothness_h: None,
                sqrt_lipschitz_l: None,
            },
            LossKind::Huber(d) | LossKind::HuberHinge(d) => LossSpec {
                kind,
                convex: true,
                lipschitz_m: Some(1.0),
                smoothness_h: Some(1.0 / d),
                sqrt_lipschitz_l: Some((0.5 / d).sqrt()),
            },
            LossKind::ZeroOne => LossSpec {
                kind,
                convex: false,
                lipschitz_m: None,
                smoothness_h: None,
                sqrt_lipschitz_l: None,
            },
        };
        Ok(spec)
    }

    pub fn square() -> Self {
        Self::new(LossKind::Square).unwrap()
    }

    pub fn squared_hinge() -> Self {
        Self::new(LossKind::SquaredHinge).unwrap()
    }

    pub fn hinge() -> Self {
        Self::new(LossKind::Hinge).unwrap()
    }

    pub fn absolute_error() -> Self {
        Self::new(LossKind::AbsoluteError).unwrap()
    }

    pub fn zero_one() -> Self {
        Self::new(LossKind::ZeroOne).unwrap()
    }

    fn check_label(&self, y: f64) -> Result<()> {
        if self.kind.is_margin() && y != 1.0 && y != -1.0 {
            return Err(Error::InvalidLabel(y));
        }
        Ok(())
    }

    /// Evaluate `f(yhat, y)`.
    pub fn value(&self, yhat: f64, y: f64) -> Result<f64> {
        self.check_label(y)?;
        let v = match self.kind {
            LossKind::Square => (yhat - y) * (yhat - y),
            LossKind::SquaredHinge => {
                let m = (1.0 - y * yhat).max(0.0);
                m * m
            }
            LossKind::Hinge => (1.0 - y * yhat).max(0.0),
            LossKind::AbsoluteError => (yhat - y).abs(),
            LossKind::Huber(d) => {
                let r = (yhat - y).abs();
                if r <= d {
                    r * r / (2.0 * d)
                } else {
                    r - d / 2.0
                }
            }
            LossKind::HuberHinge(d) => {
                let m = 1.0 - y * yhat;
                if m <= 0.0 {
                    0.0
                } else if m <= d {
                    m * m / (2.0 * d)
                } else {
                    m - d / 2.0
                }
            }
            LossKind::ZeroOne => {
                if y * yhat > 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
        };
        Ok(v)
    }

    /// One element of the subdifferential of `f` in `yhat`.
    /// At kinks the midpoint element is returned.
    pub fn subgradient(&self, yhat: f64, y: f64) -> Result<f64> {
        self.check_label(y)?;
        let g = match self.kind {
            LossKind::Square => 2.0 * (yhat - y),
            LossKind::SquaredHinge => {
                let m = 1.0 - y * yhat;
                if m > 0.0 {
                    -2.0 * y * m
                } else {
                    0.0
                }
            }
            LossKind::Hinge => {
                let m = 1.0 - y * yhat;
                if m > 0.0 {
                    -y
                } else if m == 0.0 {
                    -y / 2.0
                } else {
                    0.0
                }
            }
            LossKind::AbsoluteError => {
                let r = yhat - y;
                if r > 0.0 {
                    1.0
                } else if r < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            LossKind::Huber(d) => {
                let r = yhat - y;
                if r.abs() <= d {
                    r / d
                } else {
                    r.signum()
                }
            }
            LossKind::HuberHinge(d) => {
                let m = 1.0 - y * yhat;
                if m <= 0.0 {
                    0.0
                } else if m <= d {
                    -y * m / d
                } else {
                    -y
                }
            }
            LossKind::ZeroOne => return Err(Error::NonConvex("subgradient")),
        };
        Ok(g)
    }

    /// Closed-form Moreau envelope where one exists, `None` otherwise
    /// (Huber, HuberHinge, ZeroOne callers fall back to [`moreau_numeric`]).
    pub fn moreau_closed(&self, lambda: f64, yhat: f64, y: f64) -> Result<Option<f64>> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParam("lambda must be positive"));
        }
        self.check_label(y)?;
        let shrink = lambda / (1.0 + lambda);
        let v = match self.kind {
            LossKind::Square => Some(shrink * self.value(yhat, y)?),
            LossKind::SquaredHinge => Some(shrink * self.value(yhat, y)?),
            LossKind::AbsoluteError => {
                let r = (yhat - y).abs();
                Some(if r <= 0.5 / lambda {
                    lambda * r * r
                } else {
                    r - 0.25 / lambda
                })
            }
            LossKind::Hinge => {
                let m = 1.0 - y * yhat;
                Some(if m <= 0.0 {
                    0.0
                } else if m <= 0.5 / lambda {
                    lambda * m * m
                } else {
                    m - 0.25 / lambda
                })
            }
            LossKind::Huber(_) | LossKind::HuberHinge(_) | LossKind::ZeroOne => None,
        };
        Ok(v)
    }
}

/// Envelope parameter plus the numeric prox tolerance (in argument).
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeParams {
    pub lambda: f64,
    pub tol: f64,
}

impl EnvelopeParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParam("lambda must be positive"));
        }
        Ok(EnvelopeParams { lambda, tol: 1e-10 })
    }
}

impl Default for EnvelopeParams {
    fn default() -> Self {
        EnvelopeParams { lambda: 1.0, tol: 1e-10 }
    }
}

/// Proximal operator: the `u` minimizing `f(u, y) + lambda (u - yhat)^2`,
/// located by golden-section search to `tol` in the argument.
///
/// The optimum satisfies `lambda (u - yhat)^2 <= f(yhat, y)` (compare with
/// `u = yhat`), which gives the bracket
/// `[yhat - sqrt(f/lambda), yhat + sqrt(f/lambda)]`.
///
/// The bracket shrinks below `tol`, but value-based comparisons cannot
/// resolve the argument past the objective's flat zone, roughly
/// `sqrt(eps * f / curvature)`; envelope *values* remain accurate to near
/// machine precision because of that same flatness.
pub fn prox(spec: &LossSpec, lambda: f64, yhat: f64, y: f64, tol: f64) -> Result<f64> {
    if !spec.convex {
        return Err(Error::NonConvex("prox"));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParam("lambda must be positive"));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParam("tol must be positive"));
    }
    let f0 = spec.value(yhat, y)?;
    if f0 == 0.0 {
        return Ok(yhat);
    }
    let half_width = (f0 / lambda).sqrt();
    let (mut a, mut b) = (yhat - half_width, yhat + half_width);
    let obj = |u: f64| spec.value(u, y).unwrap() + lambda * (u - yhat) * (u - yhat);

    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = obj(x1);
    let mut f2 = obj(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = obj(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = obj(x2);
        }
    }
    Ok(0.5 * (a + b))
}

/// Moreau envelope by numeric minimization: `f(prox) + lambda (prox - yhat)^2`.
pub fn moreau_numeric(spec: &LossSpec, lambda: f64, yhat: f64, y: f64, tol: f64) -> Result<f64> {
    let u = prox(spec, lambda, yhat, y, tol)?;
    Ok(spec.value(u, y)? + lambda * (u - yhat) * (u - yhat))
}

/// Gap between a loss and its envelope for an `M`-Lipschitz loss:
/// `0 <= f - f_lambda <= M^2 / (4 lambda)`.
pub fn lipschitz_gap_bound(m: f64, lambda: f64) -> Result<f64> {
    if m < 0.0 {
        return Err(Error::InvalidParam("Lipschitz constant must be nonnegative"));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParam("lambda must be positive"));
    }
    Ok(m * m / (4.0 * lambda))
}

/// `max_{lambda >= 0} [ lambda/(1+lambda) * a - lambda * b ]`.
///
/// Equals `(sqrt(a) - sqrt(b))^2` when `a > b` (optimum at
/// `1 + lambda = sqrt(a/b)`) and `0` otherwise (optimum at the boundary).
/// This is the calculus that turns an envelope bound for a square-family
/// loss into the optimistic rate.
pub fn optimize_lambda_square_family(a: f64, b: f64) -> Result<f64> {
    if a < 0.0 || b < 0.0 {
        return Err(Error::InvalidParam("arguments must be nonnegative"));
    }
    if a > b {
        let d = a.sqrt() - b.sqrt();
        Ok(d * d)
    } else {
        Ok(0.0)
    }
}
