//! Run configuration from presets, files and flags (in that order of
//! precedence, later wins).

use std::path::Path;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use mcipdg::driver::RunConfig;
use mcipdg::random_field::FieldKind;

/// Perturbation sizes swept by the experiment presets.
pub const EPSILON_SWEEP: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
/// Largest mode index of the presets; tables cover `N = 0..=6`.
pub const PRESET_MAX_MODE: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Smooth Gaussian medium, h = 1/10, M = 1000.
    PaperSmooth,
    /// Independent uniform value per cell, h = 1/10, M = 1000.
    PaperNonsmooth,
    /// Smooth medium at laptop scale: h = 1/5, M = 50.
    DeskSmall,
}

impl Preset {
    pub fn config(self) -> RunConfig {
        let mut cfg = RunConfig {
            k: 2.0,
            modes: PRESET_MAX_MODE,
            epsilon: EPSILON_SWEEP[0],
            ..Default::default()
        };
        cfg.field.correlation_length = 0.5;
        match self {
            Preset::PaperSmooth => {
                cfg.cells_per_axis = 10;
                cfg.samples = 1000;
                cfg.field.kind = FieldKind::Gaussian;
            }
            Preset::PaperNonsmooth => {
                cfg.cells_per_axis = 10;
                cfg.samples = 1000;
                cfg.field.kind = FieldKind::Uniform;
            }
            Preset::DeskSmall => {
                cfg.cells_per_axis = 5;
                cfg.samples = 50;
                cfg.field.kind = FieldKind::Gaussian;
            }
        }
        cfg
    }

    pub fn epsilons(self) -> &'static [f64] {
        &EPSILON_SWEEP
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Gaussian,
    Uniform,
    Kl,
    Constant,
}

impl From<FieldArg> for FieldKind {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Gaussian => FieldKind::Gaussian,
            FieldArg::Uniform => FieldKind::Uniform,
            FieldArg::Kl => FieldKind::Kl,
            FieldArg::Constant => FieldKind::Constant,
        }
    }
}

#[derive(Clone, Debug, Default, Args)]
pub struct ConfigArgs {
    /// TOML run configuration, or a manifest.json from an earlier run.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Cells per axis (h = 1/L).
    #[arg(long = "L")]
    pub cells_per_axis: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma1: Option<f64>,
    /// Highest mode index N (modes 0..=N).
    #[arg(long)]
    pub modes: Option<usize>,
    /// Monte Carlo sample count M.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Parallel sample workers; 0 uses every core.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub field: Option<FieldArg>,
    /// Correlation length of the Gaussian / KL field.
    #[arg(long, allow_negative_numbers = true)]
    pub ell: Option<f64>,
    /// Clamp Gaussian values to [-1, 1] (true/false).
    #[arg(long)]
    pub clamp: Option<bool>,
    /// Gauss points per axis for load integrals.
    #[arg(long)]
    pub load_quad: Option<usize>,
}

fn read_file(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let is_json = path.extension().is_some_and(|e| e == "json");
    if is_json {
        let value: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("invalid JSON in {}", path.display()))?;
        // a manifest carries the config under "config"
        let inner = value.get("config").cloned().unwrap_or(value);
        serde_json::from_value(inner).with_context(|| format!("invalid config in {}", path.display()))
    } else {
        toml::from_str(&text).map_err(|e| {
            let msg = e.message().replace('\n', " ");
            anyhow::anyhow!("invalid config in {}: {}", path.display(), msg.trim())
        })
    }
}

/// Any problem with the requested configuration; reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        self.resolve_inner().map_err(|e| ConfigError(format!("{e:#}")))
    }

    fn resolve_inner(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match (&self.config, self.preset) {
            (Some(path), _) => read_file(path)?,
            (None, Some(p)) => p.config(),
            (None, None) => RunConfig::default(),
        };
        if self.config.is_some() && self.preset.is_some() {
            bail!("--config and --preset are mutually exclusive");
        }
        macro_rules! set {
            ($($field:ident => $($target:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$field { cfg.$($target).+ = v.into(); })*
            };
        }
        set!(
            cells_per_axis => cells_per_axis,
            k => k,
            lambda => lambda,
            epsilon => epsilon,
            gamma0 => gamma0,
            gamma1 => gamma1,
            modes => modes,
            samples => samples,
            seed => seed,
            workers => workers,
            field => field.kind,
            ell => field.correlation_length,
            clamp => field.clamp,
            load_quad => load_quad_order,
        );
        cfg.validate()?;
        Ok(cfg)
    }
}
