//! Model parameter sets.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Trading days per year; time is measured in years everywhere.
pub const TRADING_DAYS: f64 = 252.0;

/// Converts a duration in trading days to years.
pub fn days_to_years(days: f64) -> f64 {
    days / TRADING_DAYS
}

/// Mean-reversion speed convention for the variance factor.
///
/// `Rescaled` uses `1/eps` (the reversionary Heston model); `Proxy` keeps the
/// `(1/2 - H)/eps` speed of the Markovian proxy before rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanReversion {
    #[default]
    Rescaled,
    Proxy,
}

/// Asymptotic regime of the reversionary model as `eps -> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `H > -1/2`: Black-Scholes type limit.
    AboveHalf,
    /// `H = -1/2`: normal inverse Gaussian limit.
    AtHalf,
    /// `H < -1/2`: normal-Lévy limit.
    BelowHalf,
}

impl Regime {
    pub fn of(h: f64) -> Regime {
        if h > -0.5 {
            Regime::AboveHalf
        } else if h == -0.5 {
            Regime::AtHalf
        } else {
            Regime::BelowHalf
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::AboveHalf => "above",
            Regime::AtHalf => "at",
            Regime::BelowHalf => "below",
        }
    }

    pub fn parse(s: &str) -> Option<Regime> {
        match s {
            "above" | "above_half" | "bs" => Some(Regime::AboveHalf),
            "at" | "at_half" | "nig" => Some(Regime::AtHalf),
            "below" | "below_half" | "nl" => Some(Regime::BelowHalf),
            _ => None,
        }
    }
}

/// Parameters `(S0, V0, theta, xi, rho, eps, H)` of the reversionary Heston model
///
/// ```text
/// dS = S sqrt(V) (rho dW + sqrt(1 - rho^2) dW')
/// dV = (eps^(H-1/2) theta - kappa (V - V0)) dt + eps^(H-1/2) xi sqrt(V) dW
/// ```
///
/// with `kappa = 1/eps` by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReversionaryParams {
    pub s0: f64,
    pub v0: f64,
    pub theta: f64,
    pub xi: f64,
    pub rho: f64,
    pub eps: f64,
    pub h: f64,
    #[serde(default)]
    pub mean_reversion: MeanReversion,
}

impl ReversionaryParams {
    pub fn new(s0: f64, v0: f64, theta: f64, xi: f64, rho: f64, eps: f64, h: f64) -> Result<Self> {
        let p = ReversionaryParams {
            s0,
            v0,
            theta,
            xi,
            rho,
            eps,
            h,
            mean_reversion: MeanReversion::Rescaled,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_mean_reversion(mut self, mr: MeanReversion) -> Result<Self> {
        self.mean_reversion = mr;
        self.validate()?;
        Ok(self)
    }

    pub fn with_eps_h(&self, eps: f64, h: f64) -> Result<Self> {
        let mut p = *self;
        p.eps = eps;
        p.h = h;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return Err(invalid("s0", "must be > 0"));
        }
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return Err(invalid("v0", "must be > 0"));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(invalid("theta", "must be >= 0"));
        }
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return Err(invalid("xi", "must be > 0"));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(invalid("rho", "must lie in [-1, 1]"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(invalid("eps", "must be > 0"));
        }
        if !self.h.is_finite() {
            return Err(invalid("h", "must be finite"));
        }
        if self.mean_reversion == MeanReversion::Proxy && self.h >= 0.5 {
            return Err(invalid("h", "proxy mean reversion needs H < 1/2"));
        }
        Ok(())
    }

    pub fn regime(&self) -> Regime {
        Regime::of(self.h)
    }

    /// Mean-reversion speed of the variance factor.
    pub fn kappa(&self) -> f64 {
        match self.mean_reversion {
            MeanReversion::Rescaled => 1.0 / self.eps,
            MeanReversion::Proxy => (0.5 - self.h) / self.eps,
        }
    }

    /// Effective vol-of-vol `eps^(H-1/2) xi`.
    pub fn vol_of_vol(&self) -> f64 {
        self.eps.powf(self.h - 0.5) * self.xi
    }

    /// Constant part of the variance drift, `eps^(H-1/2) theta + kappa V0`.
    pub fn drift_level(&self) -> f64 {
        self.eps.powf(self.h - 0.5) * self.theta + self.kappa() * self.v0
    }
}

/// Parameters of the rough / hyper-rough Heston target model with input curve
/// `g0(t) = U0 + theta * int_0^t K_H(s) ds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoughParams {
    pub h: f64,
    pub rho: f64,
    pub xi: f64,
    pub theta: f64,
    pub u0: f64,
    pub p0: f64,
}

impl RoughParams {
    pub fn new(h: f64, rho: f64, xi: f64, theta: f64, u0: f64, p0: f64) -> Result<Self> {
        let p = RoughParams {
            h,
            rho,
            xi,
            theta,
            u0,
            p0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.h <= -0.5 {
            return Err(Error::NonIntegrableKernel { h: self.h });
        }
        if self.h > 0.5 || !self.h.is_finite() {
            return Err(invalid("h", "must lie in (-1/2, 1/2]"));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(invalid("rho", "must lie in [-1, 1]"));
        }
        if !(self.xi > 0.0) {
            return Err(invalid("xi", "must be > 0"));
        }
        if !(self.theta >= 0.0) {
            return Err(invalid("theta", "must be >= 0"));
        }
        if !(self.u0 > 0.0) {
            return Err(invalid("u0", "must be > 0"));
        }
        if !(self.p0 > 0.0) {
            return Err(invalid("p0", "must be > 0"));
        }
        Ok(())
    }
}
