//! Experiment configuration: TOML with `[market]`, `[solver]`,
//! `[validation]` and `[output]` sections. Unknown keys are rejected.

use std::path::PathBuf;

use serde::Deserialize;

use crate::error::CliError;
use crate::presets;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base preset; keys in the file override it.
    #[serde(default)]
    pub preset: Option<String>,
    pub market: MarketConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub validation: ValidationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaSource {
    /// `alpha_bar` from the Merton solution.
    Merton,
    /// `alpha_bar = sigma`.
    Sigma,
    /// `alpha_bar` given explicitly.
    Explicit,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    pub mu: Vec<f64>,
    pub r: f64,
    pub sigma: Vec<Vec<f64>>,
    pub beta: f64,
    pub p: f64,
    /// `(d+1) x (d+1)`; `inf` forbids a transfer.
    pub lambda: Vec<Vec<f64>>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_alpha_source")]
    pub alpha_source: AlphaSource,
    #[serde(default)]
    pub alpha_bar: Option<Vec<Vec<f64>>>,
}

fn default_epsilon() -> f64 {
    0.01
}

fn default_alpha_source() -> AlphaSource {
    AlphaSource::Merton
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    PolicyIteration,
    Discounted,
    Both,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "policy-iteration" => Ok(Mode::PolicyIteration),
            "discounted" => Ok(Mode::Discounted),
            "both" => Ok(Mode::Both),
            other => Err(format!("unknown mode `{other}` (policy-iteration, discounted, both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Radius {
    Fixed(f64),
    Named(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendChoice {
    Auto,
    Direct,
    Krylov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostConventionChoice {
    Sigma,
    SigmaTranspose,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub radius: Radius,
    pub margin: f64,
    pub n: usize,
    pub max_iters: usize,
    pub tol_switch: Option<f64>,
    pub tol_a: Option<f64>,
    pub tol_bind: Option<f64>,
    pub backend: BackendChoice,
    pub cost_convention: CostConventionChoice,
    pub mode: Mode,
    pub eta: f64,
    pub diffusion_floor: f64,
    /// Fail when the boundary band is not fully binding.
    pub check_domain: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            radius: Radius::Named("auto".into()),
            margin: 3.0,
            n: 101,
            max_iters: 200,
            tol_switch: None,
            tol_a: None,
            tol_bind: None,
            backend: BackendChoice::Auto,
            cost_convention: CostConventionChoice::Sigma,
            mode: Mode::PolicyIteration,
            eta: 1e-3,
            diffusion_floor: 1e-12,
            check_domain: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationConfig {
    pub mc: bool,
    pub horizon: f64,
    pub dt: f64,
    pub seed: u64,
    pub paths: usize,
    /// Run the invariant suite (same as `--check`).
    pub check: bool,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { mc: false, horizon: 2e4, dt: 1e-3, seed: 0, paths: 32, check: false }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub csv: bool,
    pub image: bool,
    pub scale: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), csv: true, image: true, scale: 3 }
    }
}

/// Overlays `top` onto `base`, table by table.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn parse_table(text: &str, origin: &str) -> Result<toml::Table, CliError> {
    text.parse::<toml::Table>().map_err(|e| CliError::Config(format!("{origin}: {e}")))
}

impl ExperimentConfig {
    /// Parses config text, resolving a `preset = "..."` base if present.
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut table = parse_table(text, origin)?;
        if let Some(name) = table.get("preset").and_then(|v| v.as_str()).map(str::to_owned) {
            let preset = presets::find(&name).ok_or_else(|| CliError::Config(format!("{origin}: unknown preset `{name}`")))?;
            let mut base = parse_table(&presets::source(preset), &name)?;
            merge(&mut base, table);
            table = base;
        }
        let config: ExperimentConfig =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Config(format!("{origin}: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_preset(name: &str) -> Result<Self, CliError> {
        let preset = presets::find(name).ok_or_else(|| CliError::Config(format!("unknown preset `{name}`")))?;
        let mut config = Self::from_toml(&presets::source(preset), name)?;
        config.preset = Some(name.to_string());
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let d = self.market.mu.len();
        if d == 0 {
            return bad("market.mu must not be empty".into());
        }
        if self.market.sigma.len() != d || self.market.sigma.iter().any(|r| r.len() != d) {
            return bad(format!("market.sigma must be {d}x{d}"));
        }
        if self.market.lambda.len() != d + 1 || self.market.lambda.iter().any(|r| r.len() != d + 1) {
            return bad(format!("market.lambda must be {}x{}", d + 1, d + 1));
        }
        match (self.market.alpha_source, &self.market.alpha_bar) {
            (AlphaSource::Explicit, None) => return bad("market.alpha_bar is required when alpha_source = \"explicit\"".into()),
            (AlphaSource::Explicit, Some(a)) if a.len() != d || a.iter().any(|r| r.len() != d) => {
                return bad(format!("market.alpha_bar must be {d}x{d}"))
            }
            (AlphaSource::Merton | AlphaSource::Sigma, Some(_)) => {
                return bad("market.alpha_bar is only read when alpha_source = \"explicit\"".into())
            }
            _ => {}
        }
        if let Radius::Named(name) = &self.solver.radius {
            if name != "auto" {
                return bad(format!("solver.radius must be a number or \"auto\", got \"{name}\""));
            }
        }
        if !(self.solver.eta > 0.0) {
            return bad("solver.eta must be positive".into());
        }
        if self.output.scale == 0 {
            return bad("output.scale must be at least 1".into());
        }
        Ok(())
    }
}
