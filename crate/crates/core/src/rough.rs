//! Rough and hyper-rough Heston transforms through the fractional
//! Riccati-Volterra equation
//!
//! ```text
//! psi(t) = int_0^t (t - s)^(H-1/2) R(psi(s)) ds
//! R(x)   = (u1^2 - u1)/2 + u2 + rho xi u1 x + xi^2/2 x^2
//! ```
//!
//! solved with the fractional Adams predictor-corrector.

use std::fmt::Write as _;

use crate::cmath::{is_finite, psqrt, C64};
use crate::error::{Error, Result};
use crate::params::RoughParams;

const BLOW_UP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSolution {
    pub grid: Vec<f64>,
    pub psi: Vec<C64>,
    pub u1: C64,
    pub u2: C64,
    pub h: f64,
}

impl VolterraSolution {
    pub fn psi_end(&self) -> C64 {
        *self.psi.last().unwrap()
    }

    /// CSV with columns `s,re_psi,im_psi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,re_psi,im_psi\n");
        for (s, p) in self.grid.iter().zip(&self.psi) {
            let _ = writeln!(out, "{},{},{}", s, p.re, p.im);
        }
        out
    }
}

/// Product-integration weights of the kernel `t^(alpha-1)` on a uniform grid.
#[derive(Debug, Clone)]
pub struct AdamsWeights {
    alpha: f64,
    step: f64,
    /// `predictor[m] = int_{m h}^{(m+1) h} s^(alpha-1) ds`.
    predictor: Vec<f64>,
    /// Trapezoidal weights for interior nodes at lag `m >= 1`.
    corrector: Vec<f64>,
    /// `h^alpha / (alpha (alpha + 1))`.
    scale: f64,
}

impl AdamsWeights {
    pub fn new(alpha: f64, step: f64, n: usize) -> AdamsWeights {
        let ha = step.powf(alpha);
        let scale = ha / (alpha * (alpha + 1.0));
        let pow_a = |x: f64| x.powf(alpha);
        let pow_a1 = |x: f64| x.powf(alpha + 1.0);
        let predictor = (0..n)
            .map(|m| ha / alpha * (pow_a(m as f64 + 1.0) - pow_a(m as f64)))
            .collect();
        let corrector = (0..=n)
            .map(|m| {
                if m == 0 {
                    scale
                } else {
                    let m = m as f64;
                    scale * (pow_a1(m + 1.0) + pow_a1(m - 1.0) - 2.0 * pow_a1(m))
                }
            })
            .collect();
        AdamsWeights {
            alpha,
            step,
            predictor,
            corrector,
            scale,
        }
    }

    /// Predictor weight of node `j` when stepping to node `k + 1`.
    pub fn predictor(&self, j: usize, k: usize) -> f64 {
        self.predictor[k - j]
    }

    /// Corrector weight of node `j` when stepping to node `k + 1`, `0 <= j <= k + 1`.
    pub fn corrector(&self, j: usize, k: usize) -> f64 {
        if j == 0 {
            let kf = k as f64;
            self.scale * (kf.powf(self.alpha + 1.0) - (kf - self.alpha) * (kf + 1.0).powf(self.alpha))
        } else {
            self.corrector[k + 1 - j]
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdamsCorrector {
    /// Solve the trapezoidal corrector equation exactly; it is quadratic in
    /// the new value, and the root continuous in the step size is taken.
    #[default]
    Implicit,
    /// Explicit predictor followed by this many fixed-point corrector passes.
    Iterations(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AdamsOptions {
    pub corrector: AdamsCorrector,
}

fn check_arguments(u1: C64, u2: C64, rp: &RoughParams, horizon: f64, n_steps: usize) -> Result<()> {
    rp.validate()?;
    if u1.re != 0.0 || u2.re > 0.0 {
        return Err(Error::Precondition("need Re u1 = 0 and Re u2 <= 0".into()));
    }
    if n_steps < 4 {
        return Err(Error::Precondition("n_steps must be >= 4".into()));
    }
    if !(horizon > 0.0) {
        return Err(Error::Precondition("T must be > 0".into()));
    }
    Ok(())
}

pub fn solve_volterra_riccati(
    u1: C64,
    u2: C64,
    rp: &RoughParams,
    horizon: f64,
    n_steps: usize,
) -> Result<VolterraSolution> {
    solve_volterra_riccati_with(u1, u2, rp, horizon, n_steps, &AdamsOptions::default())
}

pub fn solve_volterra_riccati_with(
    u1: C64,
    u2: C64,
    rp: &RoughParams,
    horizon: f64,
    n_steps: usize,
    opts: &AdamsOptions,
) -> Result<VolterraSolution> {
    check_arguments(u1, u2, rp, horizon, n_steps)?;
    let alpha = rp.h + 0.5;
    let step = horizon / n_steps as f64;
    let w = AdamsWeights::new(alpha, step, n_steps);
    let constant = 0.5 * (u1 * u1 - u1) + u2;
    let linear = rp.rho * rp.xi * u1;
    let quad = 0.5 * rp.xi * rp.xi;
    let r = |x: C64| constant + (linear + quad * x) * x;

    let mut psi = vec![C64::default(); n_steps + 1];
    let mut rv = vec![C64::default(); n_steps + 1];
    rv[0] = r(psi[0]);
    for k in 0..n_steps {
        let mut hist = C64::default();
        for j in 0..=k {
            hist += w.corrector(j, k) * rv[j];
        }
        let last = w.corrector(k + 1, k);
        let next = match opts.corrector {
            AdamsCorrector::Implicit => {
                // last*quad x^2 - (1 - last*linear) x + (hist + last*constant) = 0
                let b = 1.0 - last * linear;
                let c0 = hist + last * constant;
                2.0 * c0 / (b + psqrt(b * b - 4.0 * last * quad * c0))
            }
            AdamsCorrector::Iterations(m) => {
                let mut next = C64::default();
                for j in 0..=k {
                    next += w.predictor(j, k) * rv[j];
                }
                for _ in 0..m.max(1) {
                    next = hist + last * r(next);
                }
                next
            }
        };
        if !is_finite(next) || next.norm() > BLOW_UP {
            return Err(Error::NumericFailure {
                step: k,
                reason: format!("|psi| exceeded {BLOW_UP:e} at s = {}", (k + 1) as f64 * step),
            });
        }
        psi[k + 1] = next;
        rv[k + 1] = r(next);
    }
    Ok(VolterraSolution {
        grid: (0..=n_steps).map(|i| i as f64 * step).collect(),
        psi,
        u1,
        u2,
        h: rp.h,
    })
}

/// `E[exp(u1 log P_T + u2 Ubar_T)]`.
///
/// With `g0(s) = U0 + theta int_0^s K_H`, the exponent
/// `int_0^T R(psi(T-s)) g0(s) ds` equals `U0 int_0^T R(psi) + theta int_0^T psi`
/// because `psi = K_H * R(psi)`; both integrals use the trapezoid rule.
pub fn cf_rough_joint(u1: C64, u2: C64, rp: &RoughParams, horizon: f64, n_steps: usize) -> Result<C64> {
    cf_rough_joint_with(u1, u2, rp, horizon, n_steps, &AdamsOptions::default())
}

pub fn cf_rough_joint_with(
    u1: C64,
    u2: C64,
    rp: &RoughParams,
    horizon: f64,
    n_steps: usize,
    opts: &AdamsOptions,
) -> Result<C64> {
    let sol = solve_volterra_riccati_with(u1, u2, rp, horizon, n_steps, opts)?;
    let step = horizon / n_steps as f64;
    let constant = 0.5 * (u1 * u1 - u1) + u2;
    let r = |x: C64| constant + (rp.rho * rp.xi * u1 + 0.5 * rp.xi * rp.xi * x) * x;
    let trapezoid = |f: &dyn Fn(C64) -> C64| {
        let inner: C64 = sol.psi[1..n_steps].iter().map(|&x| f(x)).sum();
        step * (inner + 0.5 * (f(sol.psi[0]) + f(sol.psi[n_steps])))
    };
    let int_r = trapezoid(&r);
    let int_psi = trapezoid(&|x| x);
    let out = (u1 * rp.p0.ln() + rp.u0 * int_r + rp.theta * int_psi).exp();
    if !is_finite(out) {
        return Err(Error::NonFiniteCf { u: u1.im });
    }
    Ok(out)
}

/// `E[exp(u1 log P_T)]`.
pub fn cf_rough(u1: C64, rp: &RoughParams, horizon: f64, n_steps: usize) -> Result<C64> {
    cf_rough_joint(u1, C64::default(), rp, horizon, n_steps)
}
