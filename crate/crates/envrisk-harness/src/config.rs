//! Experiment configuration and the named presets. A config either comes
//! from a preset (reduced minutes-scale sizes by default, `--paper-scale`
//! restores the full experiment sizes) or from a JSON file with the same
//! schema.

use serde::{Deserialize, Serialize};

use envrisk::synthdata::{CovarianceSpec, DataModel, FeatureKind, LabelModel};
use nalgebra::DVector;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitterKind {
    Ridge,
    Lasso,
    SqHingeL2,
    SqHingeL1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovKind {
    Isotropic,
    Junk,
    Harmful,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelKind {
    WellSpecified { wstar_coef: f64, noise_var: f64 },
    Misspecified { scale: f64, noise_var: f64 },
    Logistic { wstar_coef: f64, bstar: f64 },
}

/// Complexity functional used for the per-point bound column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundCfg {
    /// `(sqrt(train) + sqrt(|w|^2 Tr(Sigma_perp) / n))^2`
    SimpleTrace,
    /// Same with the delta-calibrated `C_delta(w)` from the l2-ball lemma.
    DeltaBall,
    /// `(sqrt(train) + sqrt(d/n) |Qw|)^2`, the projected isotropic form.
    Isotropic,
    /// `(sqrt(train) + |w|_1 * rademacher_inf(Q^T X))^2`
    RademacherL1 { b_reps: usize },
    /// `(sqrt(train) + |Qw|_1 * rademacher_inf(X))^2`
    RademacherL1Projected { b_reps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCfg {
    pub max: f64,
    pub min: f64,
    pub points: usize,
}

impl GridCfg {
    /// Descending log-spaced grid.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.max];
        }
        let lmax = self.max.ln();
        let lmin = self.min.ln();
        (0..self.points)
            .map(|i| (lmax + (lmin - lmax) * i as f64 / (self.points - 1) as f64).exp())
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub features: String,
    pub covariance: CovKind,
    /// Junk tail scale (eigenvalues `eps^2` past the first `k`).
    pub junk_eps: f64,
    pub labels: LabelKind,
    /// Interpret the label-noise parameter as a standard deviation instead
    /// of a variance.
    pub noise_is_std: bool,
    pub fitter: FitterKind,
    pub grid: GridCfg,
    pub n: usize,
    pub d: usize,
    /// Number of index directions (leading unit-eigenvalue coordinates).
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub delta: f64,
    pub bound: BoundCfg,
    /// Monte Carlo samples per oracle evaluation (classification reduction,
    /// zero-one tracking).
    pub n_mc: usize,
    pub fit_intercept: bool,
    /// Also evaluate the zero-one risk along the path (classification only).
    pub track_zero_one: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if self.n == 0 || self.d == 0 {
            return Err(HarnessError::Config("n and d must be at least 1".into()));
        }
        if self.grid.points == 0 || !(self.grid.max > 0.0) || !(self.grid.min > 0.0) {
            return Err(HarnessError::Config("grid must be nonempty and positive".into()));
        }
        if self.grid.min > self.grid.max {
            return Err(HarnessError::Config("grid min must not exceed grid max".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(HarnessError::Config("delta must be in (0, 1)".into()));
        }
        FeatureKind::parse(&self.features)
            .map_err(|_| HarnessError::Config(format!("unknown feature kind '{}'", self.features)))?;
        if self.is_classification() && !matches!(self.fitter, FitterKind::SqHingeL2 | FitterKind::SqHingeL1)
        {
            return Err(HarnessError::Config(
                "classification labels need a squared-hinge fitter".into(),
            ));
        }
        match self.labels {
            LabelKind::Misspecified { .. } if self.d < 3 || self.k < 3 => Err(HarnessError::Config(
                "misspecified labels need d >= 3 and k = 3".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn is_classification(&self) -> bool {
        matches!(self.labels, LabelKind::Logistic { .. })
    }

    pub fn feature_kind(&self) -> FeatureKind {
        FeatureKind::parse(&self.features).expect("validated")
    }

    pub fn covariance_spec(&self) -> CovarianceSpec {
        match self.covariance {
            CovKind::Isotropic => CovarianceSpec::Isotropic { d: self.d },
            CovKind::Junk => CovarianceSpec::Junk { d: self.d, k: self.k, eps: self.junk_eps },
            CovKind::Harmful => CovarianceSpec::Harmful { d: self.d, k: self.k },
        }
    }

    fn noise_var(&self, raw: f64) -> f64 {
        if self.noise_is_std {
            raw * raw
        } else {
            raw
        }
    }

    pub fn data_model(&self) -> DataModel {
        let labels = match self.labels {
            LabelKind::WellSpecified { wstar_coef, noise_var } => {
                let mut wstar = DVector::zeros(self.d);
                wstar[0] = wstar_coef;
                LabelModel::WellSpecifiedLinear { wstar, noise_var: self.noise_var(noise_var) }
            }
            LabelKind::Misspecified { scale, noise_var } => {
                LabelModel::MisspecifiedRegression { scale, noise_var: self.noise_var(noise_var) }
            }
            LabelKind::Logistic { wstar_coef, bstar } => {
                LabelModel::LogisticClassification { wstar_coef, bstar }
            }
        };
        DataModel {
            features: self.feature_kind(),
            covariance: self.covariance_spec(),
            labels,
        }
    }

    /// Restore the original experiment sizes.
    pub fn paper_scale(&mut self) {
        match (self.is_classification(), self.covariance) {
            (false, CovKind::Isotropic) => {
                self.n = 300;
                self.d = 350;
            }
            (false, _) => {
                self.n = 300;
                self.d = 3000;
            }
            (true, CovKind::Isotropic) => {
                self.n = 100;
                self.d = 120;
            }
            (true, _) => {
                self.n = 100;
                self.d = 2000;
            }
        }
    }
}

pub const PRESET_NAMES: [&str; 13] = [
    "fig1-regression",
    "fig1-classification",
    "isotropic-ridge",
    "junk-ridge",
    "nonbenign-ridge",
    "isotropic-lasso",
    "junk-lasso",
    "nonbenign-lasso",
    "l2-margin",
    "l1-margin",
    "sharpness-l1",
    "ols-psi",
    "zero-one-consistency",
];

fn base_regression(name: &str, cov: CovKind, fitter: FitterKind) -> ExperimentConfig {
    let proportional = cov == CovKind::Isotropic;
    ExperimentConfig {
        name: name.into(),
        features: "gaussian".into(),
        covariance: cov,
        junk_eps: 0.05,
        labels: LabelKind::Misspecified { scale: 1.5, noise_var: 0.5 },
        noise_is_std: false,
        fitter,
        grid: GridCfg { max: 1.0, min: 1e-6, points: 50 },
        n: 100,
        d: if proportional { 120 } else { 1000 },
        k: 3,
        trials: 20,
        seed: 1,
        delta: 0.05,
        bound: if proportional { BoundCfg::Isotropic } else { BoundCfg::SimpleTrace },
        n_mc: 200_000,
        fit_intercept: false,
        track_zero_one: false,
    }
}

fn base_classification(name: &str, cov: CovKind, fitter: FitterKind) -> ExperimentConfig {
    let proportional = cov == CovKind::Isotropic;
    ExperimentConfig {
        name: name.into(),
        features: "gaussian".into(),
        covariance: cov,
        junk_eps: 0.05,
        labels: LabelKind::Logistic { wstar_coef: 5.0, bstar: 3.0 },
        noise_is_std: false,
        fitter,
        grid: GridCfg { max: 1.0, min: 1e-4, points: 50 },
        n: 100,
        d: if proportional { 120 } else { 1000 },
        k: 1,
        trials: 20,
        seed: 1,
        delta: 0.05,
        bound: if proportional { BoundCfg::Isotropic } else { BoundCfg::SimpleTrace },
        n_mc: 200_000,
        fit_intercept: true,
        track_zero_one: false,
    }
}

/// Build a named preset at the reduced default sizes.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let cfg = match name {
        "fig1-regression" | "junk-ridge" => base_regression(name, CovKind::Junk, FitterKind::Ridge),
        "isotropic-ridge" => base_regression(name, CovKind::Isotropic, FitterKind::Ridge),
        "nonbenign-ridge" => base_regression(name, CovKind::Harmful, FitterKind::Ridge),
        "isotropic-lasso" => {
            let mut c = base_regression(name, CovKind::Isotropic, FitterKind::Lasso);
            c.bound = BoundCfg::RademacherL1Projected { b_reps: 300 };
            c.grid = GridCfg { max: 1.0, min: 1e-4, points: 50 }; // relative to alpha_max
            c
        }
        "junk-lasso" | "nonbenign-lasso" => {
            let cov = if name == "junk-lasso" { CovKind::Junk } else { CovKind::Harmful };
            let mut c = base_regression(name, cov, FitterKind::Lasso);
            c.bound = BoundCfg::RademacherL1 { b_reps: 300 };
            c.grid = GridCfg { max: 1.0, min: 1e-4, points: 50 };
            c
        }
        "fig1-classification" | "l2-margin" => {
            base_classification(name, CovKind::Junk, FitterKind::SqHingeL2)
        }
        "l1-margin" => {
            let mut c = base_classification(name, CovKind::Junk, FitterKind::SqHingeL1);
            c.bound = BoundCfg::RademacherL1 { b_reps: 300 };
            c.grid = GridCfg { max: 0.3, min: 1e-5, points: 50 }; // relative to alpha_max
            c
        }
        "zero-one-consistency" => {
            let mut c = base_classification(name, CovKind::Junk, FitterKind::SqHingeL2);
            c.track_zero_one = true;
            c
        }
        "ols-psi" => {
            let mut c = base_regression(name, CovKind::Isotropic, FitterKind::Ridge);
            c.labels = LabelKind::WellSpecified { wstar_coef: 1.5, noise_var: 1.0 };
            c.n = 400;
            c.d = 100;
            c.k = 1;
            c.trials = 50;
            // single near-zero ridge point: plain OLS
            c.grid = GridCfg { max: 1e-10, min: 1e-10, points: 1 };
            c
        }
        "sharpness-l1" => {
            // marker preset: the sweep command routes it to the dedicated
            // sharpness runner; n and trials are the only knobs used
            let mut c = base_regression(name, CovKind::Junk, FitterKind::Ridge);
            c.n = 400;
            c.trials = 48;
            c
        }
        other => {
            return Err(HarnessError::Config(format!("unknown preset '{other}'")));
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_build_and_validate() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(preset("no-such-preset").is_err());
    }

    #[test]
    fn junk_preset_covariance_matches_figure() {
        let cfg = preset("junk-ridge").unwrap();
        let eigs = cfg.covariance_spec().eigenvalues();
        assert_eq!(eigs[0], 1.0);
        assert_eq!(eigs[2], 1.0);
        assert_eq!(eigs[3], 0.05 * 0.05);
    }

    #[test]
    fn paper_scale_restores_sizes() {
        let mut cfg = preset("junk-ridge").unwrap();
        cfg.paper_scale();
        assert_eq!((cfg.n, cfg.d), (300, 3000));
        let mut cfg = preset("l2-margin").unwrap();
        cfg.paper_scale();
        assert_eq!((cfg.n, cfg.d), (100, 2000));
        let mut cfg = preset("isotropic-ridge").unwrap();
        cfg.paper_scale();
        assert_eq!((cfg.n, cfg.d), (300, 350));
    }

    #[test]
    fn grid_is_descending() {
        let g = GridCfg { max: 1.0, min: 1e-6, points: 50 }.values();
        assert_eq!(g.len(), 50);
        assert!(g.windows(2).all(|w| w[0] > w[1]));
        assert!((g[0] - 1.0).abs() < 1e-12);
        assert!((g[49] - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = preset("l2-margin").unwrap();
        let s = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back.n, cfg.n);
        assert_eq!(back.fitter, cfg.fitter);
        assert_eq!(back.bound, cfg.bound);
    }

    #[test]
    fn noise_is_std_flag_squares_the_parameter() {
        let mut cfg = preset("junk-ridge").unwrap();
        cfg.noise_is_std = true;
        match cfg.data_model().labels {
            envrisk::synthdata::LabelModel::MisspecifiedRegression { noise_var, .. } => {
                assert!((noise_var - 0.25).abs() < 1e-15);
            }
            _ => panic!("wrong label model"),
        }
    }
}
