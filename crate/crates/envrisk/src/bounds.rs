//! Covariance splitting, complexity functionals, effective ranks, and the
//! norm-based risk-bound formulas.
//!
//! The split object is the oblique projection
//! `Q = I - sum_i w_i* (w_i*)^T Sigma` annihilating the index directions in
//! the covariance geometry, together with
//! `phi(w) = (<w, Sigma w_1*>, ..., <w, Sigma w_k*>, |Sigma^(1/2) Q w|_2)`.
//! `Q` is never materialized: with `S = Sigma W` and `W^T Sigma W = I_k`,
//! `Q w = w - W S^T w` and `Sigma_perp = Q^T Sigma Q = Sigma - S S^T`, so
//! every operation is `O(d k)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::synthdata::derive_seed;

/// Covariance matrix in either diagonal or dense symmetric form.
#[derive(Debug, Clone)]
pub enum Covariance {
    Diagonal(DVector<f64>),
    Dense(DMatrix<f64>),
}

impl Covariance {
    pub fn from_eigenvalues(eigs: &[f64]) -> Self {
        Covariance::Diagonal(DVector::from_column_slice(eigs))
    }

    pub fn dim(&self) -> usize {
        match self {
            Covariance::Diagonal(d) => d.len(),
            Covariance::Dense(m) => m.nrows(),
        }
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            Covariance::Diagonal(d) => v.zip_map(d, |a, b| a * b),
            Covariance::Dense(m) => m * v,
        }
    }

    pub fn quad_form(&self, v: &DVector<f64>) -> f64 {
        match self {
            Covariance::Diagonal(d) => v.iter().zip(d.iter()).map(|(a, b)| a * a * b).sum(),
            Covariance::Dense(m) => v.dot(&(m * v)),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            Covariance::Diagonal(d) => d.sum(),
            Covariance::Dense(m) => m.trace(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Covariance::Diagonal(d) => DMatrix::from_diagonal(d),
            Covariance::Dense(m) => m.clone(),
        }
    }
}

/// Scalar spectral data of a PSD matrix: enough for effective ranks and the
/// ball complexity functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSummary {
    pub trace: f64,
    pub op_norm: f64,
    pub trace_sq: f64,
}

impl SpectralSummary {
    pub fn from_eigenvalues(eigs: &[f64]) -> Self {
        SpectralSummary {
            trace: eigs.iter().sum(),
            op_norm: eigs.iter().cloned().fold(0.0, f64::max),
            trace_sq: eigs.iter().map(|e| e * e).sum(),
        }
    }
}

/// The covariance split: `Sigma`-orthonormal index directions, the implicit
/// oblique projection `Q`, and `Sigma_perp = Q^T Sigma Q`.
#[derive(Debug, Clone)]
pub struct CovSplit {
    wstars: Vec<DVector<f64>>,
    /// `S` columns: `Sigma w_i*`.
    s_cols: Vec<DVector<f64>>,
    sigma: Covariance,
    k: usize,
}

impl CovSplit {
    /// Orthonormalize `raw_dirs` in the `Sigma` inner product (Gram-Schmidt),
    /// then build the split. Fails when the directions are dependent in that
    /// geometry.
    pub fn new(raw_dirs: &[DVector<f64>], sigma: Covariance) -> Result<Self> {
        let d = sigma.dim();
        let mut dirs: Vec<DVector<f64>> = Vec::with_capacity(raw_dirs.len());
        for raw in raw_dirs {
            if raw.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: raw.len() });
            }
            let mut v = raw.clone();
            for u in &dirs {
                let proj = v.dot(&sigma.apply(u));
                v -= u * proj;
            }
            let norm = sigma.quad_form(&v).sqrt();
            let scale = raw.iter().map(|t| t.abs()).fold(0.0, f64::max).max(1.0);
            if norm < 1e-10 * scale {
                return Err(Error::RankDeficient);
            }
            dirs.push(v / norm);
        }
        let s_cols = dirs.iter().map(|u| sigma.apply(u)).collect();
        let k = dirs.len();
        Ok(CovSplit { wstars: dirs, s_cols, sigma, k })
    }

    /// Split for a diagonal covariance whose index directions are the first
    /// `k` coordinate axes (the standard simulation setup).
    pub fn from_unit_axes(eigs: &[f64], k: usize) -> Result<Self> {
        let d = eigs.len();
        if k > d {
            return Err(Error::DimensionMismatch { expected: d, got: k });
        }
        let mut dirs = Vec::with_capacity(k);
        for j in 0..k {
            if eigs[j] <= 0.0 {
                return Err(Error::RankDeficient);
            }
            let mut e = DVector::zeros(d);
            e[j] = 1.0 / eigs[j].sqrt();
            dirs.push(e);
        }
        Self::new(&dirs, Covariance::from_eigenvalues(eigs))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn sigma(&self) -> &Covariance {
        &self.sigma
    }

    pub fn wstars(&self) -> &[DVector<f64>] {
        &self.wstars
    }

    /// `Q w = w - W S^T w`.
    pub fn project_perp(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut out = w.clone();
        for (u, s) in self.wstars.iter().zip(&self.s_cols) {
            let c = s.dot(w);
            out.axpy(-c, u, 1.0);
        }
        out
    }

    /// `Q^T x = x - S W^T x`.
    pub fn project_perp_t(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = x.clone();
        for (u, s) in self.wstars.iter().zip(&self.s_cols) {
            let c = u.dot(x);
            out.axpy(-c, s, 1.0);
        }
        out
    }

    /// `(I - Q) w`, the parallel part.
    pub fn project_parallel(&self, w: &DVector<f64>) -> DVector<f64> {
        w - self.project_perp(w)
    }

    /// Mahalanobis norm of the orthogonal part: `r(w) = |Sigma^(1/2) Q w|`.
    pub fn r_of(&self, w: &DVector<f64>) -> f64 {
        let qw = self.project_perp(w);
        self.sigma.quad_form(&qw).max(0.0).sqrt()
    }

    /// `phi(w) = (<w, Sigma w_1*>, ..., <w, Sigma w_k*>, r(w))`.
    pub fn phi(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.k + 1);
        for (i, s) in self.s_cols.iter().enumerate() {
            out[i] = s.dot(w);
        }
        out[self.k] = self.r_of(w);
        out
    }

    /// Spectral data of `Sigma_perp = Sigma - S S^T` without forming it:
    /// trace and `Tr(Sigma_perp^2)` from `O(d k^2)` contractions, operator
    /// norm by power iteration on `x -> Sigma x - S (S^T x)`.
    pub fn sigma_perp_summary(&self) -> SpectralSummary {
        let trace = self.sigma.trace() - self.s_cols.iter().map(|s| s.norm_squared()).sum::<f64>();
        // Tr(Sigma_perp^2) = Tr(Sigma^2) - 2 sum_i s_i^T Sigma s_i
        //                    + sum_ij (s_i^T s_j)^2
        let trace_sq_full = match &self.sigma {
            Covariance::Diagonal(dg) => dg.iter().map(|e| e * e).sum::<f64>(),
            Covariance::Dense(m) => (m * m).trace(),
        };
        let mut cross = 0.0;
        for s in &self.s_cols {
            cross += s.dot(&self.sigma.apply(s));
        }
        let mut gram_sq = 0.0;
        for si in &self.s_cols {
            for sj in &self.s_cols {
                let g = si.dot(sj);
                gram_sq += g * g;
            }
        }
        let trace_sq = (trace_sq_full - 2.0 * cross + gram_sq).max(0.0);

        let d = self.dim();
        let apply_perp = |v: &DVector<f64>| -> DVector<f64> {
            // Q^T Sigma Q v
            let qv = self.project_perp(v);
            self.project_perp_t(&self.sigma.apply(&qv))
        };
        let mut v = DVector::from_element(d, 1.0 / (d as f64).sqrt());
        let mut op = 0.0;
        for _ in 0..200 {
            let nv = apply_perp(&v);
            let norm = nv.norm();
            if norm < 1e-300 {
                op = 0.0;
                break;
            }
            let new_op = norm;
            v = nv / norm;
            if (new_op - op).abs() <= 1e-12 * new_op.max(1.0) {
                op = new_op;
                break;
            }
            op = new_op;
        }
        SpectralSummary { trace: trace.max(0.0), op_norm: op, trace_sq }
    }

    /// Dense `Q` for small-dimension checks.
    pub fn q_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut q = DMatrix::identity(d, d);
        for (u, s) in self.wstars.iter().zip(&self.s_cols) {
            q -= u * s.transpose();
        }
        q
    }

    /// Dense `Sigma_perp` for small-dimension checks.
    pub fn sigma_perp_matrix(&self) -> DMatrix<f64> {
        let q = self.q_matrix();
        q.transpose() * self.sigma.to_dense() * q
    }
}

/// Effective ranks `r = Tr / op-norm` and `R = Tr^2 / Tr(Sigma^2)`.
pub fn effective_ranks(s: &SpectralSummary) -> Result<(f64, f64)> {
    if s.trace <= 0.0 || s.op_norm <= 0.0 || s.trace_sq <= 0.0 {
        return Err(Error::InvalidParam("effective ranks need a nonzero PSD matrix"));
    }
    Ok((s.trace / s.op_norm, s.trace * s.trace / s.trace_sq))
}

/// l2-ball complexity valid with probability `1 - delta/4`:
/// `|w| [ sqrt(Tr Sigma_perp) + 2 sqrt(op-norm * log(8/delta)) ]`.
pub fn c_delta_ball(norm_w: f64, trace_perp: f64, op_perp: f64, delta: f64) -> Result<f64> {
    // failure probabilities live in (0, 1); the formula itself is defined
    // whenever log(8/delta) >= 0
    if !(delta > 0.0 && delta < 8.0) {
        return Err(Error::InvalidParam("delta must be in (0, 8) so log(8/delta) >= 0"));
    }
    if norm_w < 0.0 || trace_perp < 0.0 || op_perp < 0.0 {
        return Err(Error::InvalidParam("negative input to c_delta_ball"));
    }
    Ok(norm_w * (trace_perp.sqrt() + 2.0 * (op_perp * (8.0 / delta).ln()).sqrt()))
}

/// The plotted complexity `sqrt(|w|^2 Tr(Sigma_perp) / n)`, already divided
/// by `sqrt(n)`.
pub fn c_simple(norm_w: f64, trace_perp: f64, n: usize) -> f64 {
    (norm_w * norm_w * trace_perp / n as f64).sqrt()
}

/// Isotropic Cauchy-Schwarz complexity `sqrt(d/n) |Qw|`, also
/// `sqrt(n)`-normalized.
pub fn c_isotropic(norm_qw: f64, d: usize, n: usize) -> f64 {
    (d as f64 / n as f64).sqrt() * norm_qw
}

/// Monte Carlo empirical Rademacher sup-norm functional
/// `(1/(n B)) sum_k | sum_i s_{k,i} Q^T x_i |_inf` with fresh sign vectors
/// every call, derived deterministically from `seed`.
pub fn rademacher_linf_mc(
    x: &DMatrix<f64>,
    split: Option<&CovSplit>,
    b_reps: usize,
    seed: u64,
) -> f64 {
    let (n, d) = (x.nrows(), x.ncols());
    if n == 0 || b_reps == 0 {
        return 0.0;
    }
    // rows become Q^T x_i when a split is given
    let xq = match split {
        Some(s) => {
            let mut m = x.clone();
            for i in 0..n {
                let qi = s.project_perp_t(&x.row(i).transpose());
                m.set_row(i, &qi.transpose());
            }
            m
        }
        None => x.clone(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x5161));
    let mut total = 0.0;
    let mut signed = DVector::<f64>::zeros(d);
    for _ in 0..b_reps {
        signed.fill(0.0);
        for i in 0..n {
            let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            signed.axpy(s, &xq.row(i).transpose(), 1.0);
        }
        total += signed.iter().map(|v| v.abs()).fold(0.0, f64::max);
    }
    total / (n as f64 * b_reps as f64)
}

/// One-sided VC correction factor
/// `1 - 8 tau sqrt((h (log(2n/h) + 1) + log(48/delta)) / n)` with `h = k`.
/// May be nonpositive; callers must treat that as a vacuous bound.
pub fn vc_correction(tau: f64, k: usize, n: usize, delta: f64) -> Result<f64> {
    vc_correction_with_h(tau, k, n, delta)
}

/// [`vc_correction`] with an explicit VC dimension `h` when a sharper count
/// than `h = k` is available.
pub fn vc_correction_with_h(tau: f64, h: usize, n: usize, delta: f64) -> Result<f64> {
    if tau < 0.0 {
        return Err(Error::InvalidParam("tau must be nonnegative"));
    }
    if h == 0 || n <= h {
        return Err(Error::InvalidParam("need n > h >= 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParam("delta must be in (0, 1)"));
    }
    let hf = h as f64;
    let nf = n as f64;
    let inner = (hf * ((2.0 * nf / hf).ln() + 1.0) + (48.0 / delta).ln()) / nf;
    Ok(1.0 - 8.0 * tau * inner.sqrt())
}

/// Optimistic-rate bound `(sqrt(train) + C / sqrt(n))^2 / correction` for the
/// square-family losses. `C` is the unnormalized complexity `C_delta(w)`.
pub fn optimistic_bound(train_loss: f64, c: f64, n: usize, correction: f64) -> Result<f64> {
    if !(correction > 0.0 && correction <= 1.0) {
        return Err(Error::InvalidParam("correction must be in (0, 1]"));
    }
    if train_loss < 0.0 || c < 0.0 {
        return Err(Error::InvalidParam("negative input to optimistic_bound"));
    }
    let root = train_loss.sqrt() + c / (n as f64).sqrt();
    Ok(root * root / correction)
}

/// Lipschitz-loss bound `train + M sqrt(C^2 / n)`.
pub fn lipschitz_bound(train_loss: f64, m: f64, c: f64, n: usize) -> Result<f64> {
    if m < 0.0 {
        return Err(Error::InvalidParam("Lipschitz constant must be nonnegative"));
    }
    Ok(train_loss + m * (c * c / n as f64).sqrt())
}

/// Interpolator bound for an `H`-smooth nonnegative loss: `(H/2) C^2 / n`.
pub fn smooth_interpolator_bound(h: f64, c: f64, n: usize) -> Result<f64> {
    if h < 0.0 {
        return Err(Error::InvalidParam("smoothness must be nonnegative"));
    }
    Ok(0.5 * h * c * c / n as f64)
}

/// Summary functional `psi(a, b) = max_lambda [ lambda/(1+lambda) a - lambda b ]`
/// with `a` a square-family population loss and `b = C(w)^2 / n`.
pub fn summary_functional_psi(test_loss: f64, complexity_sq_over_n: f64) -> Result<f64> {
    crate::envelope::optimize_lambda_square_family(test_loss, complexity_sq_over_n)
}

/// Norm budget that guarantees a zero-training-error predictor exists in the
/// l2 ball: `B^2 = |w#|^2 + (1 + rho2) (n / Tr(Sigma_perp)) (L# + rho1)`.
pub fn norm_bound_b2(
    norm_wsharp_sq: f64,
    n: usize,
    trace_perp: f64,
    l_sharp: f64,
    rho1: f64,
    rho2: f64,
) -> Result<f64> {
    if !(trace_perp > 0.0) {
        return Err(Error::InvalidParam("trace of Sigma_perp must be positive"));
    }
    if !(0.0..1.0).contains(&rho2) {
        return Err(Error::InvalidParam("rho2 must be in [0, 1)"));
    }
    if norm_wsharp_sq < 0.0 || l_sharp < 0.0 || rho1 < 0.0 {
        return Err(Error::InvalidParam("negative input to norm_bound_b2"));
    }
    Ok(norm_wsharp_sq + (1.0 + rho2) * (n as f64 / trace_perp) * (l_sharp + rho1))
}

/// The three quantities whose vanishing certifies benign overfitting, plus
/// the excess factor `rho3` of the minimum-norm-interpolator bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenignChecks {
    /// `n / R(Sigma_perp)`
    pub c1: f64,
    /// `|w#|^2 Tr(Sigma_perp) / n`
    pub c2: f64,
    /// `k / n`
    pub c3: f64,
    /// `(1 + rho2) [1 + 2 sqrt(log(2/delta) / r(Sigma_perp))]^2 - 1`
    pub rho3: f64,
}

pub fn benign_conditions(
    perp: &SpectralSummary,
    n: usize,
    norm_wsharp_sq: f64,
    k: usize,
    rho2: f64,
    delta: f64,
) -> Result<BenignChecks> {
    if n == 0 {
        return Err(Error::InvalidParam("n must be at least 1"));
    }
    let (r, big_r) = effective_ranks(perp)?;
    let root = 1.0 + 2.0 * ((2.0 / delta).ln() / r).sqrt();
    Ok(BenignChecks {
        c1: n as f64 / big_r,
        c2: norm_wsharp_sq * perp.trace / n as f64,
        c3: k as f64 / n as f64,
        rho3: (1.0 + rho2) * root * root - 1.0,
    })
}

/// Predicted excess test loss of ordinary least squares in the
/// well-specified Gaussian model: `sigma^2 (d/n) / (1 - d/n)`. This is the
/// minimizer of `(sqrt(sigma^2 + r^2) - r sqrt(d/n))^2` over `r^2`.
pub fn ols_psi_excess(sigma_sq: f64, d: usize, n: usize) -> Result<f64> {
    if d >= n {
        return Err(Error::InvalidParam("ols_psi_excess requires d < n"));
    }
    if sigma_sq < 0.0 {
        return Err(Error::InvalidParam("variance must be nonnegative"));
    }
    let ratio = d as f64 / n as f64;
    Ok(sigma_sq * ratio / (1.0 - ratio))
}

/// Which formula produced a [`BoundReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    OptimisticTrace,
    OptimisticDeltaBall,
    OptimisticIsotropic,
    OptimisticRademacherL1,
    Lipschitz,
    SmoothInterpolator,
}

impl BoundKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::OptimisticTrace => "optimistic-trace",
            BoundKind::OptimisticDeltaBall => "optimistic-delta-ball",
            BoundKind::OptimisticIsotropic => "optimistic-isotropic",
            BoundKind::OptimisticRademacherL1 => "optimistic-rademacher-l1",
            BoundKind::Lipschitz => "lipschitz",
            BoundKind::SmoothInterpolator => "smooth-interpolator",
        }
    }
}

/// A complexity value, the resulting test-loss upper bound, and the
/// correction/failure-probability bookkeeping.
#[derive(Debug, Clone, Copy)]
pub struct BoundReport {
    pub complexity_c: f64,
    pub bound_value: f64,
    pub correction: f64,
    pub delta: f64,
    pub kind: BoundKind,
}

/// Monte Carlo estimate of the local Gaussian width of the l2-ball fiber:
/// `E_x sup { <Qv, x> : v_par = w_par, |Sigma^(1/2) Q v| <= r_w, |v| <= B }`.
///
/// Per sample the inner problem is a linear maximization over the
/// intersection of an ellipsoid and a shifted ball inside `range(Q)`; it is
/// solved by case analysis on which constraint binds, with bisection on the
/// dual multiplier when both do (tolerance 1e-9).
pub fn local_gaussian_width_l2(
    split: &CovSplit,
    w_parallel: &DVector<f64>,
    r_w: f64,
    ball_radius: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<f64> {
    if r_w < 0.0 {
        return Err(Error::InvalidParam("r_w must be nonnegative"));
    }
    if mc_samples == 0 {
        return Err(Error::InvalidParam("mc_samples must be at least 1"));
    }
    let d = split.dim();
    if w_parallel.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: w_parallel.len() });
    }

    // Orthonormal basis of range(Q) from the eigenvectors of the dense
    // Sigma_perp (built once per call; the per-sample work is O(d * iters)).
    let perp = split.sigma_perp_matrix();
    let eig = nalgebra::SymmetricEigen::new(perp);
    let scale = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let mut basis_cols: Vec<usize> = Vec::new();
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > 1e-12 * scale {
            basis_cols.push(j);
        }
    }
    // Dimension check: range(Q) has dim d - k for positive-definite Sigma.
    let m = basis_cols.len();
    if m == 0 {
        return Ok(0.0);
    }
    let mut v_basis = DMatrix::zeros(d, m);
    let mut evals = DVector::zeros(m);
    for (c, &j) in basis_cols.iter().enumerate() {
        v_basis.set_column(c, &eig.eigenvectors.column(j));
        evals[c] = eig.eigenvalues[j];
    }

    // Shifted-ball data in basis coordinates: |z + c|^2 <= rho^2.
    let finite_ball = ball_radius.is_finite();
    let c_vec = v_basis.transpose() * w_parallel;
    let rho_sq = if finite_ball {
        let slack = ball_radius * ball_radius - (w_parallel.norm_squared() - c_vec.norm_squared());
        if slack < -1e-12 * ball_radius.max(1.0).powi(2) {
            return Err(Error::InfeasibleFiber {
                radius: ball_radius,
                parallel_norm: w_parallel.norm(),
            });
        }
        slack.max(0.0)
    } else {
        f64::INFINITY
    };
    if !finite_ball && evals.iter().any(|&e| e <= 1e-12 * scale) {
        return Err(Error::InvalidParam("unbounded fiber: singular Sigma_perp with infinite ball"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x1f1b));
    let mut total = 0.0;
    let mut x = DVector::zeros(d);
    let sqrt_sigma = match split.sigma() {
        Covariance::Diagonal(dg) => Some(dg.map(|e| e.sqrt())),
        Covariance::Dense(_) => None,
    };
    let dense_sqrt = if sqrt_sigma.is_none() {
        let e = nalgebra::SymmetricEigen::new(split.sigma().to_dense());
        let vals = e.eigenvalues.map(|v| v.max(0.0).sqrt());
        Some(&e.eigenvectors * DMatrix::from_diagonal(&vals) * e.eigenvectors.transpose())
    } else {
        None
    };

    for _ in 0..mc_samples {
        for xi in x.iter_mut() {
            *xi = StandardNormal.sample(&mut rng);
        }
        let gx = match (&sqrt_sigma, &dense_sqrt) {
            (Some(s), _) => x.zip_map(s, |a, b| a * b),
            (_, Some(m)) => m * &x,
            _ => unreachable!(),
        };
        // a = V^T Q^T x; columns of V lie in range(Q), where Q^T acts as
        // written; equivalently project the sample through Q^T first.
        let qtx = split.project_perp_t(&gx);
        let a = v_basis.transpose() * &qtx;
        total += fiber_sup(&a, &evals, r_w, &c_vec, rho_sq);
    }
    Ok(total / mc_samples as f64)
}

/// `max <a, z>` subject to `sum_i d_i z_i^2 <= r^2` and `|z + c|^2 <= rho^2`.
fn fiber_sup(a: &DVector<f64>, d: &DVector<f64>, r: f64, c: &DVector<f64>, rho_sq: f64) -> f64 {
    let a_norm = a.norm();
    if a_norm == 0.0 {
        return 0.0;
    }
    if r == 0.0 {
        // the ellipsoid collapses to the origin (d is positive on the range)
        return 0.0;
    }
    // ellipsoid-only candidate
    if d.iter().all(|&e| e > 0.0) {
        let mut quad = 0.0;
        for i in 0..a.len() {
            quad += a[i] * a[i] / d[i];
        }
        let mu = quad.sqrt() / r;
        let z_ell = DVector::from_fn(a.len(), |i, _| a[i] / (mu * d[i]));
        if !rho_sq.is_finite() || (&z_ell + c).norm_squared() <= rho_sq * (1.0 + 1e-12) {
            return a.dot(&z_ell);
        }
    } else if !rho_sq.is_finite() {
        return f64::INFINITY;
    }
    // ball-only candidate
    let rho = rho_sq.sqrt();
    let z_ball = a * (rho / a_norm) - c;
    let ell_val: f64 = z_ball.iter().zip(d.iter()).map(|(z, e)| z * z * e).sum();
    if ell_val <= r * r * (1.0 + 1e-12) {
        return a.dot(&z_ball);
    }

    // both constraints active: z(mu, nu) = (mu D + nu I)^{-1} (a - nu c);
    // for fixed nu pick mu >= 0 putting z on the ellipsoid (monotone in mu),
    // then bisect nu on the ball residual.
    let ell_of = |mu: f64, nu: f64| -> f64 {
        let mut s = 0.0;
        for i in 0..a.len() {
            let zi = (a[i] - nu * c[i]) / (mu * d[i] + nu);
            s += zi * zi * d[i];
        }
        s
    };
    let solve_mu = |nu: f64| -> f64 {
        if ell_of(0.0, nu) <= r * r {
            return 0.0;
        }
        let mut hi = 1.0;
        while ell_of(hi, nu) > r * r {
            hi *= 2.0;
            if hi > 1e18 {
                break;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ell_of(mid, nu) > r * r {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-9 * hi.max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let ball_resid = |nu: f64| -> f64 {
        let mu = solve_mu(nu);
        let mut s = 0.0;
        for i in 0..a.len() {
            let zi = (a[i] - nu * c[i]) / (mu * d[i] + nu);
            let t = zi + c[i];
            s += t * t;
        }
        s - rho_sq
    };
    let mut nu_hi = 1.0;
    while ball_resid(nu_hi) > 0.0 {
        nu_hi *= 2.0;
        if nu_hi > 1e18 {
            break;
        }
    }
    let mut nu_lo = nu_hi * 1e-18;
    for _ in 0..200 {
        let mid = 0.5 * (nu_lo + nu_hi);
        if ball_resid(mid) > 0.0 {
            nu_lo = mid;
        } else {
            nu_hi = mid;
        }
        if nu_hi - nu_lo <= 1e-9 * nu_hi.max(1e-9) {
            break;
        }
    }
    let nu = 0.5 * (nu_lo + nu_hi);
    let mu = solve_mu(nu);
    let mut val = 0.0;
    for i in 0..a.len() {
        val += a[i] * (a[i] - nu * c[i]) / (mu * d[i] + nu);
    }
    val
}
