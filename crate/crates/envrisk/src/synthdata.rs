//! Synthetic data: standardized feature distributions, diagonal covariance
//! structures, label models, and the low-dimensional surrogate distribution.
//!
//! Features are always `x = z * Sigma^(1/2)` with `z` having i.i.d.
//! coordinates of mean 0 and variance 1. Every generator is a pure function
//! of its seed; parallel trials derive their seeds with [`derive_seed`] so
//! execution order never changes the output.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Link function of a multi-index model: `g(eta_1..eta_k, xi)`.
pub type LinkFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// Coordinate distribution for the latent vector `z`, standardized to
/// mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Gaussian,
    /// Uniform on `(-sqrt(3), sqrt(3))`.
    Uniform,
    /// Laplace with scale `1/sqrt(2)`.
    Laplace,
    /// +-1 with equal probability.
    Rademacher,
    /// Poisson(1) - 1.
    PoissonCentered,
    /// Student t with 5 degrees of freedom, scaled by `sqrt(3/5)`.
    StudentT5,
    /// Weibull shape 1/2, scale 1: `(x - 2) / sqrt(20)`.
    WeibullHalf,
    /// `(e^Z - sqrt(e)) / sqrt(e (e - 1))` for standard normal `Z`.
    LogNormal,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 8] = [
        FeatureKind::Gaussian,
        FeatureKind::Uniform,
        FeatureKind::Laplace,
        FeatureKind::Rademacher,
        FeatureKind::PoissonCentered,
        FeatureKind::StudentT5,
        FeatureKind::WeibullHalf,
        FeatureKind::LogNormal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FeatureKind::Gaussian => "gaussian",
            FeatureKind::Uniform => "uniform",
            FeatureKind::Laplace => "laplace",
            FeatureKind::Rademacher => "rademacher",
            FeatureKind::PoissonCentered => "poisson",
            FeatureKind::StudentT5 => "student-t5",
            FeatureKind::WeibullHalf => "weibull",
            FeatureKind::LogNormal => "lognormal",
        }
    }

    pub fn parse(s: &str) -> Result<FeatureKind> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or(Error::InvalidParam("unknown feature distribution"))
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(
            self,
            FeatureKind::Gaussian
                | FeatureKind::Uniform
                | FeatureKind::Laplace
                | FeatureKind::Rademacher
                | FeatureKind::StudentT5
        )
    }

    /// Draw one standardized coordinate.
    pub fn sample_std(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            FeatureKind::Gaussian => StandardNormal.sample(rng),
            FeatureKind::Uniform => {
                let u: f64 = rng.random();
                (2.0 * u - 1.0) * 3f64.sqrt()
            }
            FeatureKind::Laplace => {
                // inverse CDF, scale b = 1/sqrt(2)
                let u: f64 = rng.random::<f64>() - 0.5;
                let b = 1.0 / 2f64.sqrt();
                -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            FeatureKind::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            FeatureKind::PoissonCentered => {
                // Knuth's method at rate 1
                let threshold = (-1f64).exp();
                let mut k = 0u32;
                let mut p = 1.0;
                loop {
                    p *= rng.random::<f64>();
                    if p <= threshold {
                        break;
                    }
                    k += 1;
                }
                f64::from(k) - 1.0
            }
            FeatureKind::StudentT5 => {
                // t_nu = Z / sqrt(V / nu), V ~ chi^2_nu built from 5 normals
                let z: f64 = StandardNormal.sample(rng);
                let mut v = 0.0;
                for _ in 0..5 {
                    let g: f64 = StandardNormal.sample(rng);
                    v += g * g;
                }
                let t = z / (v / 5.0).sqrt();
                t * (3.0 / 5.0f64).sqrt()
            }
            FeatureKind::WeibullHalf => {
                // inverse CDF for shape 1/2, scale 1: (-ln u)^2
                let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                let x = (-u.ln()).powi(2);
                (x - 2.0) / 20f64.sqrt()
            }
            FeatureKind::LogNormal => {
                let z: f64 = StandardNormal.sample(rng);
                let e = std::f64::consts::E;
                (z.exp() - e.sqrt()) / (e * (e - 1.0)).sqrt()
            }
        }
    }
}

/// Diagonal covariance structures used throughout.
#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceSpec {
    Isotropic { d: usize },
    /// `k` unit eigenvalues followed by `eps^2` (default `eps = 0.05`).
    Junk { d: usize, k: usize, eps: f64 },
    /// `k` unit eigenvalues, then `1/(k+1)^2, ..., 1/d^2`.
    Harmful { d: usize, k: usize },
    ExplicitDiagonal(Vec<f64>),
}

impl CovarianceSpec {
    pub fn junk(d: usize, k: usize) -> Self {
        CovarianceSpec::Junk { d, k, eps: 0.05 }
    }

    pub fn dim(&self) -> usize {
        match self {
            CovarianceSpec::Isotropic { d }
            | CovarianceSpec::Junk { d, .. }
            | CovarianceSpec::Harmful { d, .. } => *d,
            CovarianceSpec::ExplicitDiagonal(e) => e.len(),
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        match self {
            CovarianceSpec::Isotropic { d } => vec![1.0; *d],
            CovarianceSpec::Junk { d, k, eps } => {
                let mut e = vec![eps * eps; *d];
                for v in e.iter_mut().take((*k).min(*d)) {
                    *v = 1.0;
                }
                e
            }
            CovarianceSpec::Harmful { d, k } => (1..=*d)
                .map(|j| if j <= *k { 1.0 } else { 1.0 / ((j * j) as f64) })
                .collect(),
            CovarianceSpec::ExplicitDiagonal(e) => e.clone(),
        }
    }

    pub fn eigenvalue(&self, j: usize) -> f64 {
        match self {
            CovarianceSpec::Isotropic { .. } => 1.0,
            CovarianceSpec::Junk { k, eps, .. } => {
                if j < *k {
                    1.0
                } else {
                    eps * eps
                }
            }
            CovarianceSpec::Harmful { k, .. } => {
                if j < *k {
                    1.0
                } else {
                    1.0 / (((j + 1) * (j + 1)) as f64)
                }
            }
            CovarianceSpec::ExplicitDiagonal(e) => e[j],
        }
    }
}

/// Noise feeding the link function of a multi-index model.
#[derive(Debug, Clone, Copy)]
pub enum NoiseKind {
    /// `xi ~ N(0, var)`. The second parameter is a *variance*.
    GaussianVar(f64),
    /// `xi ~ Uniform(0, 1)`, used as the threshold for binary labels.
    Uniform01,
    None,
}

/// Fully general multi-index model `y = g(eta_1, ..., eta_k, xi)` with
/// `eta_i = <w_i*, x>`. `wstars` are raw directions; they are orthonormalized
/// in the covariance geometry when the model is resolved.
#[derive(Clone)]
pub struct MultiIndexModel {
    pub wstars: Vec<DVector<f64>>,
    pub link: LinkFn,
    pub noise: NoiseKind,
    pub classification: bool,
}

impl std::fmt::Debug for MultiIndexModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MultiIndexModel")
            .field("k", &self.wstars.len())
            .field("noise", &self.noise)
            .field("classification", &self.classification)
            .finish()
    }
}

/// Conditional law of the label given the features.
#[derive(Debug, Clone)]
pub enum LabelModel {
    /// `y = <wstar, x> + xi`, `xi ~ N(0, noise_var)`.
    WellSpecifiedLinear { wstar: DVector<f64>, noise_var: f64 },
    /// `y = scale * x1 + |x1| cos(x2) + x3 * xi`, `xi ~ N(0, noise_var)`.
    MisspecifiedRegression { scale: f64, noise_var: f64 },
    /// `y in {-1, +1}` with `P(y = 1 | x) = sigmoid(wstar_coef * x1 + bstar)`.
    LogisticClassification { wstar_coef: f64, bstar: f64 },
    MultiIndex(MultiIndexModel),
}

impl LabelModel {
    pub fn misspecified_default() -> Self {
        LabelModel::MisspecifiedRegression { scale: 1.5, noise_var: 0.5 }
    }

    pub fn logistic_default() -> Self {
        LabelModel::LogisticClassification { wstar_coef: 5.0, bstar: 3.0 }
    }

    pub fn is_classification(&self) -> bool {
        match self {
            LabelModel::LogisticClassification { .. } => true,
            LabelModel::MultiIndex(m) => m.classification,
            _ => false,
        }
    }
}

/// Feature distribution + covariance + label model: the joint law of `(x, y)`.
#[derive(Debug, Clone)]
pub struct DataModel {
    pub features: FeatureKind,
    pub covariance: CovarianceSpec,
    pub labels: LabelModel,
}

/// A label model rewritten in normalized multi-index form: directions with
/// `Sigma^(1/2) w_i*` orthonormal plus the link over `(eta_1..eta_k, xi)`.
#[derive(Clone)]
pub struct ResolvedIndexModel {
    pub wstars: Vec<DVector<f64>>,
    pub link: LinkFn,
    pub noise: NoiseKind,
    pub classification: bool,
}

impl ResolvedIndexModel {
    pub fn k(&self) -> usize {
        self.wstars.len()
    }

    pub fn sample_noise(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.noise {
            NoiseKind::GaussianVar(v) => {
                let g: f64 = StandardNormal.sample(rng);
                g * v.sqrt()
            }
            NoiseKind::Uniform01 => rng.random(),
            NoiseKind::None => 0.0,
        }
    }
}

fn sigma_quad(cov: &CovarianceSpec, v: &DVector<f64>) -> f64 {
    v.iter().enumerate().map(|(j, x)| x * x * cov.eigenvalue(j)).sum()
}

impl DataModel {
    /// Normalized multi-index view of the label model. Well-specified and
    /// logistic models have `k = 1`; the misspecified regression has `k = 3`
    /// (indices `x1, x2, x3`).
    pub fn resolve_index_model(&self) -> Result<ResolvedIndexModel> {
        let d = self.covariance.dim();
        let axis = |j: usize| -> Result<DVector<f64>> {
            if j >= d {
                return Err(Error::DimensionMismatch { expected: j + 1, got: d });
            }
            let lam = self.covariance.eigenvalue(j);
            if lam <= 0.0 {
                return Err(Error::RankDeficient);
            }
            let mut e = DVector::zeros(d);
            e[j] = 1.0 / lam.sqrt();
            Ok(e)
        };
        match &self.labels {
            LabelModel::WellSpecifiedLinear { wstar, noise_var } => {
                if wstar.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: wstar.len() });
                }
                let norm = sigma_quad(&self.covariance, wstar).sqrt();
                if norm == 0.0 {
                    // pure-noise labels: k = 0, y = xi
                    return Ok(ResolvedIndexModel {
                        wstars: vec![],
                        link: Arc::new(move |_, xi| xi),
                        noise: NoiseKind::GaussianVar(*noise_var),
                        classification: false,
                    });
                }
                let dir = wstar / norm;
                Ok(ResolvedIndexModel {
                    wstars: vec![dir],
                    link: Arc::new(move |etas, xi| norm * etas[0] + xi),
                    noise: NoiseKind::GaussianVar(*noise_var),
                    classification: false,
                })
            }
            LabelModel::MisspecifiedRegression { scale, noise_var } => {
                let s1 = self.covariance.eigenvalue(0).sqrt();
                let s2 = self.covariance.eigenvalue(1).sqrt();
                let s3 = self.covariance.eigenvalue(2).sqrt();
                let scale = *scale;
                Ok(ResolvedIndexModel {
                    wstars: vec![axis(0)?, axis(1)?, axis(2)?],
                    link: Arc::new(move |etas, xi| {
                        let x1 = s1 * etas[0];
                        let x2 = s2 * etas[1];
                        let x3 = s3 * etas[2];
                        scale * x1 + x1.abs() * x2.cos() + x3 * xi
                    }),
                    noise: NoiseKind::GaussianVar(*noise_var),
                    classification: false,
                })
            }
            LabelModel::LogisticClassification { wstar_coef, bstar } => {
                let s1 = self.covariance.eigenvalue(0).sqrt();
                let (coef, b) = (*wstar_coef, *bstar);
                Ok(ResolvedIndexModel {
                    wstars: vec![axis(0)?],
                    link: Arc::new(move |etas, xi| {
                        let p = sigmoid(coef * s1 * etas[0] + b);
                        if xi < p {
                            1.0
                        } else {
                            -1.0
                        }
                    }),
                    noise: NoiseKind::Uniform01,
                    classification: true,
                })
            }
            LabelModel::MultiIndex(m) => {
                // Gram-Schmidt in the Sigma inner product
                let mut dirs: Vec<DVector<f64>> = Vec::with_capacity(m.wstars.len());
                for raw in &m.wstars {
                    if raw.len() != d {
                        return Err(Error::DimensionMismatch { expected: d, got: raw.len() });
                    }
                    let mut v = raw.clone();
                    for u in &dirs {
                        let proj: f64 =
                            v.iter().zip(u.iter()).enumerate().map(|(j, (a, b))| a * b * self.covariance.eigenvalue(j)).sum();
                        v -= u * proj;
                    }
                    let norm = sigma_quad(&self.covariance, &v).sqrt();
                    if norm < 1e-12 {
                        return Err(Error::RankDeficient);
                    }
                    dirs.push(v / norm);
                }
                Ok(ResolvedIndexModel {
                    wstars: dirs,
                    link: m.link.clone(),
                    noise: m.noise,
                    classification: m.classification,
                })
            }
        }
    }
}

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// An (X, y) draw plus the seed that produced it.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub seed: u64,
}

/// SplitMix64 step, used to derive independent per-trial streams from a
/// master seed: trial order never affects results.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n x d` feature matrix `X = Z Sigma^(1/2)`, filled row-major so the
/// stream layout is part of the determinism contract.
pub fn sample_features(
    kind: FeatureKind,
    cov: &CovarianceSpec,
    n: usize,
    d: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParam("n and d must be at least 1"));
    }
    if cov.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: cov.dim() });
    }
    let sqrt_eigs: Vec<f64> = cov.eigenvalues().iter().map(|e| e.sqrt()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            x[(i, j)] = kind.sample_std(&mut rng) * sqrt_eigs[j];
        }
    }
    Ok(x)
}

/// Labels for each row of `X` under the model; deterministic given `seed`.
pub fn sample_labels(model: &DataModel, x: &DMatrix<f64>, seed: u64) -> Result<DVector<f64>> {
    let resolved = model.resolve_index_model()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x.nrows();
    let k = resolved.k();
    let mut etas = vec![0.0; k];
    let mut y = DVector::zeros(n);
    for i in 0..n {
        for (l, w) in resolved.wstars.iter().enumerate() {
            etas[l] = x.row(i).iter().zip(w.iter()).map(|(a, b)| a * b).sum();
        }
        let xi = resolved.sample_noise(&mut rng);
        y[i] = (resolved.link)(&etas, xi);
    }
    Ok(y)
}

pub fn sample_dataset(model: &DataModel, n: usize, seed: u64) -> Result<Dataset> {
    let d = model.covariance.dim();
    let x = sample_features(model.features, &model.covariance, n, d, derive_seed(seed, 1))?;
    let y = sample_labels(model, &x, derive_seed(seed, 2))?;
    Ok(Dataset { x, y, seed })
}

/// The surrogate distribution: `xtilde ~ N(0, I_{k+1})` with
/// `ytilde = g(xtilde_1, ..., xtilde_k, xi)`. It matches the joint law of
/// `(<phi(w), xtilde>, y)` with `(<w, x>, y)` for every `w`.
pub fn sample_surrogate(model: &DataModel, n: usize, seed: u64) -> Result<Dataset> {
    let resolved = model.resolve_index_model()?;
    let k = resolved.k();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 3));
    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 4));
    let mut x = DMatrix::zeros(n, k + 1);
    let mut y = DVector::zeros(n);
    let mut etas = vec![0.0; k];
    for i in 0..n {
        for j in 0..=k {
            x[(i, j)] = StandardNormal.sample(&mut rng);
            if j < k {
                etas[j] = x[(i, j)];
            }
        }
        let xi = resolved.sample_noise(&mut noise_rng);
        y[i] = (resolved.link)(&etas, xi);
    }
    Ok(Dataset { x, y, seed })
}
