//! Characteristic functions of the reversionary Heston model, of its
//! `eps -> 0` limits, of the NIG-IG Lévy process and of classical Heston.

use serde::{Deserialize, Serialize};

use crate::cmath::{c, is_finite, psqrt, C64, I};
use crate::error::{invalid, Error, Result};
use crate::functional::PiecewiseFunctional;
use crate::params::{Regime, ReversionaryParams};
use crate::riccati::{explicit_phi_psi, solve_riccati, RiccatiCoeffs};

/// Joint Fourier argument: `u` for the log-price, `v` for integrated variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierArg {
    pub u: f64,
    pub v: f64,
}

impl FourierArg {
    pub fn new(u: f64, v: f64) -> FourierArg {
        FourierArg { u, v }
    }
}

/// Parameters of the NIG-IG Lévy process `(X, Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NigIgParams {
    Finite {
        alpha: f64,
        beta: f64,
        delta: f64,
        mu: f64,
        lambda: f64,
    },
    /// `alpha -> infinity` with `delta = sigma2 * alpha`, `beta = 0`, `lambda = 1`:
    /// Brownian motion with drift and deterministic clock `Y_t = sigma2 t`.
    GaussianLimit { sigma2: f64, mu: f64 },
}

impl NigIgParams {
    pub fn finite(alpha: f64, beta: f64, delta: f64, mu: f64, lambda: f64) -> Result<NigIgParams> {
        let p = NigIgParams::Finite {
            alpha,
            beta,
            delta,
            mu,
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NigIgParams::Finite {
                alpha,
                beta,
                delta,
                mu,
                lambda,
            } => {
                if !(alpha >= beta.abs()) {
                    return Err(invalid("alpha", "must satisfy alpha >= |beta|"));
                }
                if !(delta > 0.0) {
                    return Err(invalid("delta", "must be > 0"));
                }
                if !(lambda > 0.0) {
                    return Err(invalid("lambda", "must be > 0"));
                }
                if !mu.is_finite() {
                    return Err(invalid("mu", "must be finite"));
                }
            }
            NigIgParams::GaussianLimit { sigma2, mu } => {
                if !(sigma2 > 0.0) {
                    return Err(invalid("sigma2", "must be > 0"));
                }
                if !mu.is_finite() {
                    return Err(invalid("mu", "must be finite"));
                }
            }
        }
        Ok(())
    }
}

/// Lévy exponent `eta(u, v)`, so that `E[exp(i u X_t + i v Y_t)] = exp(t eta(u, v))`.
pub fn nigig_exponent(arg: FourierArg, p: &NigIgParams) -> C64 {
    let FourierArg { u, v } = arg;
    match *p {
        NigIgParams::Finite {
            alpha,
            beta,
            delta,
            mu,
            lambda,
        } => {
            let bu = c(beta, u);
            let inner = alpha * alpha - 2.0 * I * lambda * v - bu * bu;
            let gap = ((alpha - beta.abs()) * (alpha + beta.abs())).sqrt();
            I * mu * u + delta * (gap - psqrt(inner))
        }
        NigIgParams::GaussianLimit { sigma2, mu } => c(-0.5 * sigma2 * u * u, mu * u + sigma2 * v),
    }
}

/// NIG-IG parameters of the `eps -> 0` limit of `(log S/S0, Vbar)` in each regime.
pub fn limit_params(params: &ReversionaryParams, regime: Regime) -> Result<NigIgParams> {
    let (rho, xi, theta, v0) = (params.rho, params.xi, params.theta, params.v0);
    if regime == Regime::AboveHalf {
        return Ok(NigIgParams::GaussianLimit {
            sigma2: v0,
            mu: -0.5 * v0,
        });
    }
    if !(rho.abs() < 1.0) {
        return Err(Error::UnsupportedCorrelation { rho });
    }
    let one_m = 1.0 - rho * rho;
    let p = match regime {
        Regime::AtHalf => {
            let level = theta + v0;
            let skew = xi - 2.0 * rho;
            NigIgParams::Finite {
                alpha: 0.5 * (skew * skew + 4.0 * one_m).sqrt() / (xi * one_m),
                beta: -0.5 * skew / (xi * one_m),
                delta: one_m.sqrt() * level / xi,
                mu: -rho * level / xi,
                lambda: 1.0 / one_m,
            }
        }
        Regime::BelowHalf => {
            if !(theta > 0.0) {
                return Err(invalid("theta", "normal-Lévy limit needs theta > 0"));
            }
            NigIgParams::Finite {
                alpha: 0.5 / one_m,
                beta: -0.5 / one_m,
                delta: one_m.sqrt() * theta / xi,
                mu: -rho * theta / xi,
                lambda: 1.0 / one_m,
            }
        }
        Regime::AboveHalf => unreachable!(),
    };
    Ok(p)
}

/// `E[exp(i u log S_T/S0 + i v Vbar_T)]` of the limiting Lévy process.
pub fn cf_limit(arg: FourierArg, horizon: f64, params: &ReversionaryParams, regime: Regime) -> Result<C64> {
    let p = limit_params(params, regime)?;
    Ok((nigig_exponent(arg, &p) * horizon).exp())
}

/// Conditional joint characteristic function of `(log S_T, Vbar_T - Vbar_t)`
/// given `(log S_t, V_t)`.
pub fn cf_reversionary(
    arg: FourierArg,
    t: f64,
    horizon: f64,
    log_spot: f64,
    variance: f64,
    params: &ReversionaryParams,
) -> Result<C64> {
    if !(0.0 <= t && t <= horizon) {
        return Err(Error::Precondition(format!("need 0 <= t = {t} <= T = {horizon}")));
    }
    if !(variance > 0.0) {
        return Err(invalid("variance", "must be > 0"));
    }
    let (phi, psi) = explicit_phi_psi(arg.u, arg.v, params, horizon - t)?;
    let scale = params.eps.powf(0.5 - params.h);
    Ok((I * arg.u * log_spot + phi + scale * psi * variance).exp())
}

/// `E[exp(int (f(T-s) dlog S_s + g(T-s) dVbar_s))]` through the numerical
/// Riccati solution; the horizon is that of `fg`.
pub fn cf_functional(fg: &PiecewiseFunctional, params: &ReversionaryParams, n_steps: usize) -> Result<C64> {
    let sol = solve_riccati(params, fg, n_steps)?;
    let scale = params.eps.powf(0.5 - params.h);
    Ok((sol.phi_end() + scale * sol.psi_end() * params.v0).exp())
}

/// Classical Heston `dV = (drift - kappa V) dt + xi sqrt(V) dW`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalHeston {
    pub v0: f64,
    pub kappa: f64,
    pub drift: f64,
    pub xi: f64,
    pub rho: f64,
}

/// `E[exp(u1 log(S_T/S0) + u2 Vbar_T)]` for `Re u1 = 0`, `Re u2 <= 0`.
pub fn cf_classical_heston(u1: C64, u2: C64, p: &ClassicalHeston, horizon: f64) -> Result<C64> {
    if !(p.xi > 0.0) || !(p.v0 >= 0.0) || !(p.kappa >= 0.0) {
        return Err(invalid("heston", "need xi > 0, v0 >= 0, kappa >= 0"));
    }
    let co = RiccatiCoeffs {
        a: 0.5 * p.xi * p.xi,
        b: p.rho * p.xi * u1 - p.kappa,
        c: 0.5 * (u1 * u1 - u1) + u2,
    };
    let (psi, integral) = co.flow(C64::default(), horizon);
    let out = (p.v0 * psi + p.drift * integral).exp();
    if !is_finite(out) {
        return Err(Error::NonFiniteCf { u: u1.im });
    }
    Ok(out)
}
