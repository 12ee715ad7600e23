//! Ground-truth population quantities: closed-form regression risk, the
//! two-dimensional reduction for Gaussian classification, zero-one risk, and
//! moment-ratio diagnostics. Monte Carlo estimators stream samples row by
//! row, so memory stays `O(d)` regardless of the sample count.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::envelope::LossSpec;
use crate::error::{Error, Result};
use crate::synthdata::{derive_seed, sigmoid, DataModel, FeatureKind, LabelModel};

/// How a [`PopulationRisk`] value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiskMethod {
    ClosedForm,
    TwoDimReduction,
    MonteCarlo,
    Quadrature,
}

/// A population risk with its Monte Carlo standard error (zero for closed
/// forms and quadrature).
#[derive(Debug, Clone, Copy)]
pub struct PopulationRisk {
    pub value: f64,
    pub std_error: f64,
    pub method: RiskMethod,
}

/// Coordinate moments of the scaled marginals `x1 = sqrt(Sigma_11) z` and
/// `x2 = sqrt(Sigma_22) z` needed by the misspecified-model closed forms.
#[derive(Debug, Clone, Copy)]
pub struct MomentTable {
    /// `E |x1|`
    pub m_abs: f64,
    /// `E x1 |x1|`
    pub m_sgn: f64,
    /// `E cos x2`
    pub m_cos: f64,
    /// `E x2 cos x2`
    pub m_zcos: f64,
    /// `E cos^2 x2`
    pub m_cos2: f64,
    pub mc_samples: usize,
    pub seed: u64,
    pub scale1: f64,
    pub scale2: f64,
}

impl MomentTable {
    /// Build by Monte Carlo (`mc_samples` one-dimensional draws); Gaussian
    /// moments use the analytic values instead.
    pub fn build(kind: FeatureKind, scale1: f64, scale2: f64, mc_samples: usize, seed: u64) -> Self {
        if kind == FeatureKind::Gaussian {
            return Self::gaussian(scale1, scale2);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x30_30));
        let (mut abs, mut sgn, mut cos, mut zcos, mut cos2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..mc_samples {
            let z = kind.sample_std(&mut rng);
            let x1 = scale1 * z;
            let x2 = scale2 * z;
            abs += x1.abs();
            sgn += x1 * x1.abs();
            let c = x2.cos();
            cos += c;
            zcos += x2 * c;
            cos2 += c * c;
        }
        let nf = mc_samples as f64;
        MomentTable {
            m_abs: abs / nf,
            m_sgn: sgn / nf,
            m_cos: cos / nf,
            m_zcos: zcos / nf,
            m_cos2: cos2 / nf,
            mc_samples,
            seed,
            scale1,
            scale2,
        }
    }

    /// Analytic Gaussian moments:
    /// `E|x| = s sqrt(2/pi)`, `E cos(s z) = exp(-s^2/2)`,
    /// `E cos^2(s z) = (1 + exp(-2 s^2)) / 2`, odd moments vanish.
    pub fn gaussian(scale1: f64, scale2: f64) -> Self {
        MomentTable {
            m_abs: scale1 * (2.0 / std::f64::consts::PI).sqrt(),
            m_sgn: 0.0,
            m_cos: (-0.5 * scale2 * scale2).exp(),
            m_zcos: 0.0,
            m_cos2: 0.5 * (1.0 + (-2.0 * scale2 * scale2).exp()),
            mc_samples: 0,
            seed: 0,
            scale1,
            scale2,
        }
    }
}

fn diag_eigs(model: &DataModel) -> Vec<f64> {
    model.covariance.eigenvalues()
}

/// Optimal linear predictor (no intercept) and its risk for the misspecified
/// regression `y = scale x1 + |x1| cos x2 + x3 xi` with diagonal covariance:
///
/// ```text
/// wtilde = w* + E[x1|x1|] E[cos x2] Sigma^-1 e1 + E[|x1|] E[x2 cos x2] Sigma^-1 e2
/// L(wtilde) = E[x1^2] E[cos^2 x2] + Sigma_33 sigma^2
///             - (E[x1|x1|] E[cos x2])^2 / Sigma_11
///             - (E[|x1|] E[x2 cos x2])^2 / Sigma_22
/// ```
pub fn misspecified_optimal_predictor(
    model: &DataModel,
    moments: &MomentTable,
) -> Result<(DVector<f64>, f64)> {
    let (scale, noise_var) = match model.labels {
        LabelModel::MisspecifiedRegression { scale, noise_var } => (scale, noise_var),
        _ => return Err(Error::UnsupportedModel("misspecified_optimal_predictor")),
    };
    let eigs = diag_eigs(model);
    if eigs.len() < 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: eigs.len() });
    }
    if eigs[0] <= 0.0 || eigs[1] <= 0.0 || eigs[2] <= 0.0 {
        return Err(Error::Singular("misspecified_optimal_predictor"));
    }
    let mut wt = DVector::zeros(eigs.len());
    wt[0] = scale + moments.m_sgn * moments.m_cos / eigs[0];
    wt[1] = moments.m_abs * moments.m_zcos / eigs[1];
    let e_x1_sq = eigs[0];
    let risk = e_x1_sq * moments.m_cos2 + eigs[2] * noise_var
        - (moments.m_sgn * moments.m_cos).powi(2) / eigs[0]
        - (moments.m_abs * moments.m_zcos).powi(2) / eigs[1];
    Ok((wt, risk))
}

/// Mean of the label under the misspecified model: `E y = E|x1| E cos x2`.
pub fn misspecified_label_mean(moments: &MomentTable) -> f64 {
    moments.m_abs * moments.m_cos
}

/// Null risk `E y^2` for the supported regression models.
pub fn regression_null_risk(model: &DataModel, moments: &MomentTable) -> Result<f64> {
    let eigs = diag_eigs(model);
    match &model.labels {
        LabelModel::WellSpecifiedLinear { wstar, noise_var } => {
            let signal: f64 = wstar.iter().enumerate().map(|(j, w)| w * w * eigs[j]).sum();
            Ok(signal + noise_var)
        }
        LabelModel::MisspecifiedRegression { scale, noise_var } => {
            Ok(scale * scale * eigs[0]
                + eigs[0] * moments.m_cos2
                + 2.0 * scale * moments.m_sgn * moments.m_cos
                + eigs[2] * noise_var)
        }
        _ => Err(Error::UnsupportedModel("regression_null_risk")),
    }
}

/// Closed-form population square loss
/// `L(w, b) = L(wtilde) + |w - wtilde|_Sigma^2 + b^2 - 2 b E[y]`,
/// valid for the well-specified and misspecified regression models with
/// diagonal covariance (any standardized coordinate distribution). Other
/// models fall back to [`mc_pop_risk`] with `10^6` fresh samples.
pub fn regression_pop_risk(
    w: &DVector<f64>,
    b: f64,
    model: &DataModel,
    moments: &MomentTable,
    seed: u64,
) -> Result<PopulationRisk> {
    let eigs = diag_eigs(model);
    let d = eigs.len();
    if w.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: w.len() });
    }
    let (wt, base, label_mean) = match &model.labels {
        LabelModel::WellSpecifiedLinear { wstar, noise_var } => (wstar.clone(), *noise_var, 0.0),
        LabelModel::MisspecifiedRegression { .. } => {
            let (wt, risk) = misspecified_optimal_predictor(model, moments)?;
            (wt, risk, misspecified_label_mean(moments))
        }
        _ => {
            return mc_pop_risk(&LossSpec::square(), w, b, model, 1_000_000, seed);
        }
    };
    let mut maha = 0.0;
    for j in 0..d {
        let diff = w[j] - wt[j];
        maha += diff * diff * eigs[j];
    }
    Ok(PopulationRisk {
        value: base + maha + b * b - 2.0 * b * label_mean,
        std_error: 0.0,
        method: RiskMethod::ClosedForm,
    })
}

struct TwoDimParams {
    mu_slope: f64,
    sigma: f64,
    coef: f64,
    bstar: f64,
    wstar_sigma_norm: f64,
}

fn two_dim_params(w: &DVector<f64>, model: &DataModel) -> Result<TwoDimParams> {
    let (coef, bstar) = match model.labels {
        LabelModel::LogisticClassification { wstar_coef, bstar } => (wstar_coef, bstar),
        _ => return Err(Error::UnsupportedModel("two_dim_reduction")),
    };
    if model.features != FeatureKind::Gaussian {
        return Err(Error::UnsupportedModel("two_dim_reduction needs Gaussian features"));
    }
    let eigs = diag_eigs(model);
    if w.len() != eigs.len() {
        return Err(Error::DimensionMismatch { expected: eigs.len(), got: w.len() });
    }
    // w* = coef e1: |w*|_Sigma^2 = coef^2 Sigma_11, <w, Sigma w*> = coef Sigma_11 w_1
    let wstar_norm_sq = coef * coef * eigs[0];
    let w_sig_wstar = coef * eigs[0] * w[0];
    let w_sig_w: f64 = w.iter().enumerate().map(|(j, v)| v * v * eigs[j]).sum();
    let sigma_sq = (w_sig_w - w_sig_wstar * w_sig_wstar / wstar_norm_sq).max(0.0);
    Ok(TwoDimParams {
        mu_slope: w_sig_wstar / wstar_norm_sq,
        sigma: sigma_sq.sqrt(),
        coef,
        bstar,
        wstar_sigma_norm: wstar_norm_sq.sqrt(),
    })
}

/// Population squared-hinge loss of `(w, b)` under the logistic model with
/// Gaussian features, via the two-dimensional reduction: conditionally on
/// `eta = <w*, x> + b*`, the prediction is `N(mu(eta), sigma^2)` with
/// `mu(eta) = b + (<w, Sigma w*> / |w*|_Sigma^2)(eta - b*)`.
pub fn classification_pop_sq_hinge(
    w: &DVector<f64>,
    b: f64,
    model: &DataModel,
    n_mc: usize,
    seed: u64,
) -> Result<PopulationRisk> {
    let p = match two_dim_params(w, model) {
        Ok(p) => p,
        Err(Error::UnsupportedModel(m)) if m.contains("Gaussian") => {
            return mc_pop_risk(&LossSpec::squared_hinge(), w, b, model, n_mc, seed);
        }
        Err(e) => return Err(e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x2d2d));
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_mc {
        let g1: f64 = StandardNormal.sample(&mut rng);
        let z: f64 = StandardNormal.sample(&mut rng);
        let eta = p.bstar + p.wstar_sigma_norm * g1;
        let ge = sigmoid(p.coef / p.wstar_sigma_norm * p.wstar_sigma_norm * g1 + p.bstar);
        debug_assert!((p.coef * (eta - p.bstar) / p.wstar_sigma_norm - p.coef * g1).abs() < 1e-9);
        let yhat = b + p.mu_slope * (eta - p.bstar) + p.sigma * z;
        let pos = (1.0 - yhat).max(0.0);
        let neg = (1.0 + yhat).max(0.0);
        let v = ge * pos * pos + (1.0 - ge) * neg * neg;
        sum += v;
        sum_sq += v * v;
    }
    let nf = n_mc as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    Ok(PopulationRisk {
        value: mean,
        std_error: (var / nf).sqrt(),
        method: RiskMethod::TwoDimReduction,
    })
}

/// Streaming fresh-sample Monte Carlo estimate of `E f(<w, x> + b, y)`.
pub fn mc_pop_risk(
    loss: &LossSpec,
    w: &DVector<f64>,
    b: f64,
    model: &DataModel,
    n_mc: usize,
    seed: u64,
) -> Result<PopulationRisk> {
    if n_mc == 0 {
        return Err(Error::InvalidParam("n_mc must be at least 1"));
    }
    let d = model.covariance.dim();
    if w.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: w.len() });
    }
    let resolved = model.resolve_index_model()?;
    let sqrt_eigs: Vec<f64> = model.covariance.eigenvalues().iter().map(|e| e.sqrt()).collect();
    let mut feat_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x7001));
    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x7002));
    let k = resolved.k();
    let mut etas = vec![0.0; k];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_mc {
        let mut yhat = b;
        etas.iter_mut().for_each(|e| *e = 0.0);
        for j in 0..d {
            let x = model.features.sample_std(&mut feat_rng) * sqrt_eigs[j];
            yhat += w[j] * x;
            for (l, wst) in resolved.wstars.iter().enumerate() {
                etas[l] += wst[j] * x;
            }
        }
        let xi = resolved.sample_noise(&mut noise_rng);
        let y = (resolved.link)(&etas, xi);
        let v = loss.value(yhat, y)?;
        sum += v;
        sum_sq += v * v;
    }
    let nf = n_mc as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    Ok(PopulationRisk { value: mean, std_error: (var / nf).sqrt(), method: RiskMethod::MonteCarlo })
}

/// How [`zero_one_risk`] should evaluate the misclassification probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroOneMethod {
    TwoDimReduction,
    MonteCarlo,
}

/// Misclassification probability `P(sgn(<w, x> + b) != y)`, with `yhat = 0`
/// counted as an error. Always at most the squared-hinge population loss.
pub fn zero_one_risk(
    w: &DVector<f64>,
    b: f64,
    model: &DataModel,
    method: ZeroOneMethod,
    n_mc: usize,
    seed: u64,
) -> Result<PopulationRisk> {
    match method {
        ZeroOneMethod::MonteCarlo => {
            mc_pop_risk(&LossSpec::zero_one(), w, b, model, n_mc, seed)
        }
        ZeroOneMethod::TwoDimReduction => {
            let p = two_dim_params(w, model)?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x2d2e));
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..n_mc {
                let g1: f64 = StandardNormal.sample(&mut rng);
                let z: f64 = StandardNormal.sample(&mut rng);
                let eta = p.bstar + p.wstar_sigma_norm * g1;
                let ge = sigmoid(eta * p.coef / p.wstar_sigma_norm);
                let yhat = b + p.mu_slope * (eta - p.bstar) + p.sigma * z;
                let v = if yhat > 0.0 { 1.0 - ge } else { ge };
                sum += v;
                sum_sq += v * v;
            }
            let nf = n_mc as f64;
            let mean = sum / nf;
            let var = (sum_sq / nf - mean * mean).max(0.0);
            Ok(PopulationRisk {
                value: mean,
                std_error: (var / nf).sqrt(),
                method: RiskMethod::TwoDimReduction,
            })
        }
    }
}

/// Bayes zero-one risk of the logistic model `P(y=1|x) = sigmoid(coef x1 + b*)`
/// with `x1 ~ N(0, sigma11)`: `E min(g, 1-g)` by adaptive quadrature.
pub fn bayes_zero_one_logistic(coef: f64, bstar: f64, sigma11: f64) -> f64 {
    let s = sigma11.sqrt();
    let f = |t: f64| {
        let g = sigmoid(coef * s * t + bstar);
        let phi = (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        phi * g.min(1.0 - g)
    };
    adaptive_simpson(&f, -10.0, 10.0, 1e-10, 30)
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
                + rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fb, fm) = (f(a), f(b), f(m));
    let whole = simpson(a, fa, b, fb, fm);
    rec(f, a, fa, b, fb, m, fm, whole, tol, depth)
}

/// Which moment ratio [`hypercontractivity_ratio`] reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentOrder {
    /// `(E f^4)^(1/4) / E f` on the loss values, the ratio entering the
    /// one-sided VC correction.
    Four,
    /// The eighth-moment ratio of `sqrt(f)` (for the square loss, of the
    /// absolute residual), squared so it lands on the same scale as
    /// [`MomentOrder::Four`]: `[(E g^8)^(1/8) / (E g^2)^(1/2)]^2` with
    /// `g = sqrt(f)`. For a standard Gaussian residual under the square
    /// loss this is `105^(1/4)`.
    Eight,
}

/// Hypercontractivity diagnostic with stability reporting.
#[derive(Debug, Clone, Copy)]
pub struct HyperRatio {
    pub ratio: f64,
    /// Relative standard error of the highest moment used.
    pub rel_se: f64,
    /// False when the top-moment estimate has not stabilized
    /// (relative SE above 10%), a heavy-tail warning.
    pub stable: bool,
}

/// Monte Carlo estimate of the norm-equivalence ratio of the loss values
/// `f(<w, x> + b, y)` under the model.
pub fn hypercontractivity_ratio(
    loss: &LossSpec,
    w: &DVector<f64>,
    b: f64,
    model: &DataModel,
    q: MomentOrder,
    n_mc: usize,
    seed: u64,
) -> Result<HyperRatio> {
    if n_mc == 0 {
        return Err(Error::InvalidParam("n_mc must be at least 1"));
    }
    let d = model.covariance.dim();
    if w.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: w.len() });
    }
    let resolved = model.resolve_index_model()?;
    let sqrt_eigs: Vec<f64> = model.covariance.eigenvalues().iter().map(|e| e.sqrt()).collect();
    let mut feat_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x7101));
    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x7102));
    let k = resolved.k();
    let mut etas = vec![0.0; k];
    let (mut s1, mut s4, mut s8) = (0.0, 0.0, 0.0);
    for _ in 0..n_mc {
        let mut yhat = b;
        etas.iter_mut().for_each(|e| *e = 0.0);
        for j in 0..d {
            let x = model.features.sample_std(&mut feat_rng) * sqrt_eigs[j];
            yhat += w[j] * x;
            for (l, wst) in resolved.wstars.iter().enumerate() {
                etas[l] += wst[j] * x;
            }
        }
        let xi = resolved.sample_noise(&mut noise_rng);
        let y = (resolved.link)(&etas, xi);
        let f = loss.value(yhat, y)?;
        let f4 = f * f * f * f;
        s1 += f;
        s4 += f4;
        s8 += f4 * f4;
    }
    let nf = n_mc as f64;
    let m1 = s1 / nf;
    let m4 = s4 / nf;
    if m1 <= 0.0 {
        return Err(Error::InvalidParam("hypercontractivity ratio needs E f > 0"));
    }
    // Both variants reduce to the same moment pair: for q = 8 the loss's
    // fourth moment is the eighth moment of sqrt(f), and the squared ratio
    // cancels the exponents back to (E f^4)^(1/4) / E f.
    let ratio = match q {
        MomentOrder::Four | MomentOrder::Eight => m4.powf(0.25) / m1,
    };
    let var_m4 = (s8 / nf - m4 * m4).max(0.0);
    let rel_se = if m4 > 0.0 { (var_m4 / nf).sqrt() / m4 } else { 0.0 };
    Ok(HyperRatio { ratio, rel_se, stable: rel_se <= 0.10 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthdata::CovarianceSpec;
    use approx::assert_abs_diff_eq;

    fn gaussian_model(d: usize, labels: LabelModel) -> DataModel {
        DataModel {
            features: FeatureKind::Gaussian,
            covariance: CovarianceSpec::Isotropic { d },
            labels,
        }
    }

    #[test]
    fn gaussian_moment_table_is_analytic() {
        let t = MomentTable::build(FeatureKind::Gaussian, 1.0, 1.0, 10, 0);
        assert_abs_diff_eq!(t.m_abs, (2.0 / std::f64::consts::PI).sqrt(), epsilon = 1e-15);
        assert_eq!(t.m_sgn, 0.0);
        assert_abs_diff_eq!(t.m_cos, (-0.5f64).exp(), epsilon = 1e-15);
        assert_eq!(t.m_zcos, 0.0);
        assert_abs_diff_eq!(t.m_cos2, 0.5 * (1.0 + (-2.0f64).exp()), epsilon = 1e-15);
    }

    #[test]
    fn well_specified_risk_at_truth_is_noise() {
        let d = 5;
        let mut wstar = DVector::zeros(d);
        wstar[0] = 1.5;
        let model = gaussian_model(
            d,
            LabelModel::WellSpecifiedLinear { wstar: wstar.clone(), noise_var: 0.5 },
        );
        let t = MomentTable::gaussian(1.0, 1.0);
        let r = regression_pop_risk(&wstar, 0.0, &model, &t, 0).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-15);
        assert_eq!(r.method, RiskMethod::ClosedForm);
    }

    #[test]
    fn pythagorean_shift_adds_one() {
        let d = 4;
        let mut wstar = DVector::zeros(d);
        wstar[0] = 1.0;
        let model = gaussian_model(
            d,
            LabelModel::WellSpecifiedLinear { wstar: wstar.clone(), noise_var: 0.25 },
        );
        let t = MomentTable::gaussian(1.0, 1.0);
        let mut w = wstar.clone();
        w[3] += 1.0; // |v|_Sigma = 1 under isotropic covariance
        let r = regression_pop_risk(&w, 0.0, &model, &t, 0).unwrap();
        assert_abs_diff_eq!(r.value, 1.25, epsilon = 1e-15);
    }

    #[test]
    fn misspecified_optimal_is_wstar_for_gaussian() {
        let model = gaussian_model(6, LabelModel::misspecified_default());
        let t = MomentTable::gaussian(1.0, 1.0);
        let (wt, risk) = misspecified_optimal_predictor(&model, &t).unwrap();
        assert_abs_diff_eq!(wt[0], 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(wt[1], 0.0, epsilon = 1e-15);
        // E[cos^2 z] + 0.5 = (1 + e^-2)/2 + 0.5
        assert_abs_diff_eq!(risk, 0.5 * (1.0 + (-2.0f64).exp()) + 0.5, epsilon = 1e-15);
    }

    #[test]
    fn classification_degenerate_cases() {
        let d = 8;
        let model = gaussian_model(d, LabelModel::logistic_default());
        // aligned predictor: conditional variance collapses
        let mut w = DVector::zeros(d);
        w[0] = 0.7;
        let p = two_dim_params(&w, &model).unwrap();
        assert_abs_diff_eq!(p.sigma, 0.0, epsilon = 1e-12);
        // zero predictor: loss is exactly 1
        let r = classification_pop_sq_hinge(&DVector::zeros(d), 0.0, &model, 4000, 3).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_one_perfect_and_flipped() {
        // deterministic labels y = sign(x1) via a steep logistic link
        let d = 4;
        let model = gaussian_model(
            d,
            LabelModel::LogisticClassification { wstar_coef: 1e8, bstar: 0.0 },
        );
        let mut e1 = DVector::zeros(d);
        e1[0] = 1.0;
        let r = zero_one_risk(&e1, 0.0, &model, ZeroOneMethod::MonteCarlo, 20_000, 5).unwrap();
        assert!(r.value < 1e-3, "risk {}", r.value);
        let r = zero_one_risk(&(-e1), 0.0, &model, ZeroOneMethod::MonteCarlo, 20_000, 5).unwrap();
        assert!(r.value > 0.999, "risk {}", r.value);
    }

    #[test]
    fn bayes_zero_one_matches_quadrature_value() {
        // frozen from an independent quadrature of E min(g, 1-g)
        let v = bayes_zero_one_logistic(5.0, 3.0, 1.0);
        assert_abs_diff_eq!(v, 0.089_504_57, epsilon = 1e-6);
    }

    #[test]
    fn constant_loss_ratio_is_one() {
        let d = 3;
        let model = gaussian_model(d, LabelModel::logistic_default());
        let r = hypercontractivity_ratio(
            &LossSpec::squared_hinge(),
            &DVector::zeros(d),
            0.0,
            &model,
            MomentOrder::Eight,
            5_000,
            7,
        )
        .unwrap();
        assert_abs_diff_eq!(r.ratio, 1.0, epsilon = 1e-12);
        assert!(r.stable);
    }

    #[test]
    fn simpson_integrates_gaussian_density() {
        let f = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let v = adaptive_simpson(&f, -10.0, 10.0, 1e-12, 30);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
    }
}
