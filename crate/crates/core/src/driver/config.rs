use serde::{Deserialize, Serialize};

use crate::assembly::DgParams;
use crate::random_field::{CovarianceSpec, FieldKind};
use crate::{Error, Result};

/// Random input model for `eta` (and, when enabled, the source phase `xi`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub kind: FieldKind,
    /// Correlation length of the exponential covariance.
    pub correlation_length: f64,
    /// Truncate Gaussian values to `[-1, 1]`, keeping `|eta| <= 1` as the
    /// perturbation model assumes. Without it large `epsilon` can make
    /// `alpha` negative and the mode series diverge.
    pub clamp: bool,
    /// Number of KL modes for `kind = "kl"`; all modes when absent.
    pub kl_truncation: Option<usize>,
    /// Value used for `kind = "constant"`.
    pub constant_value: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            kind: FieldKind::Gaussian,
            correlation_length: 0.5,
            clamp: true,
            kl_truncation: None,
            constant_value: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    /// `[exp(ik(1+xi)x), exp(ik(1+xi)y), exp(ik(1+xi)z)]`.
    PlaneWave,
    /// A constant real vector.
    Constant,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    pub kind: SourceKind,
    /// Overall multiplier of the source.
    pub scale: f64,
    /// Draw a random phase perturbation `xi` per sample; `xi = 0` otherwise.
    pub random_phase: bool,
    /// Vector used for `kind = "constant"`.
    pub constant: [f64; 3],
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            kind: SourceKind::PlaneWave,
            scale: 1.0,
            random_phase: true,
            constant: [1.0, 0.0, 0.0],
        }
    }
}

/// Everything that determines a Monte Carlo run. Identical configurations
/// produce bitwise identical results regardless of `workers`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Wave number.
    pub k: f64,
    /// Impedance parameter.
    pub lambda: f64,
    /// Perturbation size in `alpha = 1 + epsilon * eta`.
    pub epsilon: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    /// Cells per axis, `h = 1 / cells_per_axis`.
    pub cells_per_axis: usize,
    /// Monte Carlo sample count `M`.
    pub samples: usize,
    /// Highest mode index `N`; modes `0..=N` are computed.
    pub modes: usize,
    pub field: FieldConfig,
    pub source: SourceConfig,
    /// Gauss points per axis for the load integrals.
    pub load_quad_order: usize,
    pub seed: u64,
    /// Parallel sample workers; 0 uses all cores.
    pub workers: usize,
    /// Stand-in for the stability constant `C_0` in the diagnostics.
    pub c0: f64,
    /// Stand-in for `Ĉ_0`.
    pub c0_hat: f64,
    /// Gradient bound `mu` used by the diagnostics.
    pub mu: f64,
    /// Use the largest observed cell-difference quotient of `eta` as `mu`.
    pub mu_from_field: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            k: 2.0,
            lambda: 1.0,
            epsilon: 0.1,
            gamma0: 10.0,
            gamma1: 0.1,
            cells_per_axis: 5,
            samples: 50,
            modes: 2,
            field: FieldConfig::default(),
            source: SourceConfig::default(),
            load_quad_order: 4,
            seed: 1,
            workers: 0,
            c0: 1.0,
            c0_hat: 1.0,
            mu: 1.0,
            mu_from_field: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.dg_params()?;
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config(format!(
                "epsilon must be finite and nonnegative, got {}",
                self.epsilon
            )));
        }
        if self.cells_per_axis == 0 {
            return Err(Error::config("cells_per_axis must be at least 1"));
        }
        if self.samples == 0 {
            return Err(Error::config("samples must be at least 1"));
        }
        if self.load_quad_order == 0 || self.load_quad_order > 32 {
            return Err(Error::config("load_quad_order must be in 1..=32"));
        }
        if !self.source.scale.is_finite() || self.source.constant.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("source parameters must be finite"));
        }
        if matches!(self.field.kind, FieldKind::Gaussian | FieldKind::Kl) {
            CovarianceSpec::exponential(self.field.correlation_length)?;
        }
        if let Some(0) = self.field.kl_truncation {
            return Err(Error::config("kl_truncation must be at least 1"));
        }
        if !self.field.constant_value.is_finite() {
            return Err(Error::config("constant field value must be finite"));
        }
        for (name, v) in [("c0", self.c0), ("c0_hat", self.c0_hat), ("mu", self.mu)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be finite and nonnegative")));
            }
        }
        Ok(())
    }

    pub fn dg_params(&self) -> Result<DgParams> {
        DgParams::new(self.k, self.lambda, self.gamma0, self.gamma1)
    }

    pub fn covariance(&self) -> Result<CovarianceSpec> {
        CovarianceSpec::exponential(self.field.correlation_length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!((c.k, c.lambda, c.gamma0, c.gamma1), (2.0, 1.0, 10.0, 0.1));
        assert_eq!(c.field.correlation_length, 0.5);
        assert_eq!(c.load_quad_order, 4);
    }

    #[test]
    fn invalid_values_rejected() {
        let bad = [
            RunConfig { k: 0.0, ..Default::default() },
            RunConfig { lambda: -1.0, ..Default::default() },
            RunConfig { epsilon: -0.1, ..Default::default() },
            RunConfig { samples: 0, ..Default::default() },
            RunConfig { cells_per_axis: 0, ..Default::default() },
            RunConfig { gamma0: -1.0, ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))), "{c:?}");
        }
    }

    #[test]
    fn toml_like_roundtrip_through_json() {
        let c = RunConfig { epsilon: 0.3, modes: 6, ..Default::default() };
        let s = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(c, back);
    }
}
