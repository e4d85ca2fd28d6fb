//! JSON run configurations.

use serde::Deserialize;

use revheston::params::days_to_years;
use revheston::pricing::{CosConfig, Model};
use revheston::{MeanReversion, Regime, ReversionaryParams, RoughParams};

use crate::CliError;

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    Days,
    Years,
}

/// A duration with an explicit unit; days are trading days (1/252 year).
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct Duration {
    pub value: f64,
    pub unit: TimeUnit,
}

impl Duration {
    pub fn years(&self) -> f64 {
        match self.unit {
            TimeUnit::Days => days_to_years(self.value),
            TimeUnit::Years => self.value,
        }
    }
}

fn default_s0() -> f64 {
    1.0
}

/// Reversionary Heston parameters with `eps` carrying its unit.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReversionarySpec {
    #[serde(default = "default_s0")]
    pub s0: f64,
    pub v0: f64,
    pub theta: f64,
    pub xi: f64,
    pub rho: f64,
    pub h: f64,
    pub eps: Option<Duration>,
    #[serde(default)]
    pub mean_reversion: MeanReversion,
}

impl ReversionarySpec {
    pub fn params(&self) -> Result<ReversionaryParams, CliError> {
        let eps = self
            .eps
            .ok_or_else(|| CliError::Config("missing field `eps`".into()))?
            .years();
        self.params_with_eps(eps)
    }

    pub fn params_with_eps(&self, eps: f64) -> Result<ReversionaryParams, CliError> {
        Ok(
            ReversionaryParams::new(self.s0, self.v0, self.theta, self.xi, self.rho, eps, self.h)?
                .with_mean_reversion(self.mean_reversion)?,
        )
    }
}

/// Limit models only use `(s0, v0, theta, xi, rho)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSpec {
    #[serde(default = "default_s0")]
    pub s0: f64,
    pub v0: f64,
    pub theta: f64,
    pub xi: f64,
    pub rho: f64,
}

fn default_n_steps() -> usize {
    256
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Reversionary(ReversionarySpec),
    Rough {
        h: f64,
        rho: f64,
        xi: f64,
        theta: f64,
        u0: f64,
        #[serde(default = "default_s0")]
        s0: f64,
        #[serde(default = "default_n_steps")]
        n_steps: usize,
    },
    BsLimit(LimitSpec),
    NigLimit(LimitSpec),
    NlLimit(LimitSpec),
}

impl ModelSpec {
    pub fn model(&self) -> Result<Model, CliError> {
        let limit = |l: &LimitSpec, regime: Regime, h: f64| -> Result<Model, CliError> {
            let params = ReversionaryParams::new(l.s0, l.v0, l.theta, l.xi, l.rho, days_to_years(1.0), h)?;
            Ok(Model::Limit { params, regime })
        };
        match self {
            ModelSpec::Reversionary(r) => Ok(Model::Reversionary { params: r.params()? }),
            ModelSpec::Rough {
                h,
                rho,
                xi,
                theta,
                u0,
                s0,
                n_steps,
            } => Ok(Model::Rough {
                params: RoughParams::new(*h, *rho, *xi, *theta, *u0, *s0)?,
                n_steps: *n_steps,
            }),
            ModelSpec::BsLimit(l) => limit(l, Regime::AboveHalf, 0.0),
            ModelSpec::NigLimit(l) => limit(l, Regime::AtHalf, -0.5),
            ModelSpec::NlLimit(l) => limit(l, Regime::BelowHalf, -1.0),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceConfig {
    pub model: ModelSpec,
    pub maturities: Vec<f64>,
    pub strikes: Vec<f64>,
    pub cos: Option<CosConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmileConfig {
    pub model: ModelSpec,
    pub maturities: Vec<f64>,
    pub log_moneyness: Vec<f64>,
    pub cos: Option<CosConfig>,
}

fn default_dk() -> f64 {
    0.01
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkewConfig {
    pub model: ModelSpec,
    pub maturities: Vec<f64>,
    #[serde(default = "default_dk")]
    pub dk: f64,
    pub cos: Option<CosConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeRun {
    pub regime: String,
    pub h: f64,
}

fn default_regimes() -> Vec<RegimeRun> {
    [("above", 0.1), ("at", -0.5), ("below", -0.9)]
        .into_iter()
        .map(|(r, h)| RegimeRun { regime: r.into(), h })
        .collect()
}

fn default_horizon() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub v0: f64,
    pub theta: f64,
    pub xi: f64,
    pub rho: f64,
    #[serde(default = "default_regimes")]
    pub regimes: Vec<RegimeRun>,
    /// Values of `eps` in `eps_unit`.
    pub eps: Vec<f64>,
    pub eps_unit: TimeUnit,
    pub u: Vec<f64>,
    pub v: f64,
    #[serde(default = "default_horizon")]
    pub maturity: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Uniform,
    InverseVega,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateConfig {
    /// Target surface CSV, relative to the config file.
    pub target: String,
    /// Fixed parameters; `eps` and `h` give the starting point.
    pub base: ReversionarySpec,
    pub weighting: Option<WeightSpec>,
    pub eps_bounds: Option<(Duration, Duration)>,
    pub h_bounds: Option<(f64, f64)>,
    pub max_iterations: Option<usize>,
    pub restarts: Option<usize>,
    pub loss_threshold: Option<f64>,
    pub cos: Option<CosConfig>,
}

fn default_points() -> Vec<(f64, f64)> {
    vec![(1.0, 0.0), (3.0, 10.0), (2.0, 100.0)]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub params: ReversionarySpec,
    pub n_paths: usize,
    pub grid: Vec<f64>,
    pub substeps: usize,
    /// Used when `--seed` is not given.
    pub seed: Option<u64>,
    /// Fourier points `(u, v)` compared with the closed form at the last grid time.
    #[serde(default = "default_points")]
    pub points: Vec<(f64, f64)>,
    #[serde(default)]
    pub dump_paths: bool,
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}
