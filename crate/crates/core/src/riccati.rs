//! Time-dependent Riccati system of the reversionary Heston model
//!
//! ```text
//! phi'(t) = (theta + kappa eps^(1/2-H) V0) psi(t)
//! psi'(t) = a psi^2 + b(t) psi + c(t),   psi(0) = phi(0) = 0
//! a = eps^(H-1/2) xi^2/2,  b = eps^(H-1/2) rho xi f - kappa,  c = eps^(H-1/2) (g + (f^2 - f)/2)
//! ```
//!
//! together with the closed-form constant-coefficient solution and the
//! `eps -> 0` limit functions.

use std::fmt::Write as _;

use crate::cmath::{c, expm1, is_finite, ln1p, one_minus_exp_over, psqrt, C64};
use crate::error::{Error, Result};
use crate::functional::PiecewiseFunctional;
use crate::params::{Regime, ReversionaryParams};

/// Constant coefficients of `psi' = a psi^2 + b psi + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiCoeffs {
    pub a: f64,
    pub b: C64,
    pub c: C64,
}

impl RiccatiCoeffs {
    pub fn reversionary(params: &ReversionaryParams, f: C64, g: C64) -> RiccatiCoeffs {
        let scale = params.eps.powf(params.h - 0.5);
        RiccatiCoeffs {
            a: 0.5 * scale * params.xi * params.xi,
            b: scale * params.rho * params.xi * f - params.kappa(),
            c: scale * (g + 0.5 * (f * f - f)),
        }
    }

    /// `Re c + (Im b)^2 / (4a) <= 0`.
    pub fn satisfies_existence_condition(&self) -> bool {
        self.c.re + self.b.im * self.b.im / (4.0 * self.a) <= 1e-12 * (self.c.norm() + 1.0)
    }

    #[inline]
    pub fn rhs(&self, psi: C64) -> C64 {
        (self.a * psi + self.b) * psi + self.c
    }

    /// Exact flow over `[0, t]` from `psi0`: returns `(psi(t), int_0^t psi)`.
    pub fn flow(&self, psi0: C64, t: f64) -> (C64, C64) {
        let a = self.a;
        let disc = psqrt(self.b * self.b - 4.0 * a * self.c);
        // Stable root pair; `r_minus = (-b - D) / (2a)` attracts forward in time.
        let plus = -self.b + disc;
        let minus = -self.b - disc;
        let r_minus = if minus.norm() >= plus.norm() {
            minus / (2.0 * a)
        } else if plus.norm() > 0.0 {
            2.0 * self.c / plus
        } else {
            C64::default()
        };
        let w0 = psi0 - r_minus;
        if w0 == C64::default() {
            return (r_minus, r_minus * t);
        }
        let decay = (-disc * t).exp();
        let den = 1.0 - a * w0 * one_minus_exp_over(disc, t);
        let psi = r_minus + w0 * decay / den;
        let log_den = continuous_log_den(a * w0, disc, t);
        (psi, r_minus * t - log_den / a)
    }
}

/// `ln(1 - q G(t))` with `G(s) = (1 - e^{-D s}) / D`, continued along `s in [0, t]`.
fn continuous_log_den(q: C64, disc: C64, t: f64) -> C64 {
    // The curve 1 - q G(s) spirals with angular speed Im D and settles after ~40/Re D.
    let settle = if disc.re > 0.0 { (40.0 / disc.re).min(t) } else { t };
    let pieces = ((disc.im.abs() * settle / 0.25).ceil() as usize).clamp(1, 4096);
    let mut acc = C64::default();
    let mut prev_g = C64::default();
    let mut prev_den = c(1.0, 0.0);
    let mut knots: Vec<f64> = (1..=pieces).map(|j| settle * j as f64 / pieces as f64).collect();
    if settle < t {
        knots.push(t);
    }
    for s in knots {
        let g = one_minus_exp_over(disc, s);
        let den = 1.0 - q * g;
        acc += ln1p(-q * (g - prev_g) / prev_den);
        prev_g = g;
        prev_den = den;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RiccatiScheme {
    /// Exact flow of the frozen-coefficient Riccati equation on each step,
    /// with the exact integral of `psi` for `phi`.
    #[default]
    SegmentExact,
    /// Exponential Euler on the variation-of-constants form with one
    /// corrector pass (exponential trapezoid); `phi` by the trapezoid rule.
    ExponentialEuler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiOptions {
    pub scheme: RiccatiScheme,
    /// Initial value `psi(0)`; must satisfy `Re psi(0) <= 0`.
    pub psi0: C64,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        RiccatiOptions {
            scheme: RiccatiScheme::SegmentExact,
            psi0: C64::default(),
        }
    }
}

/// Grid values of `(phi_eps, psi_eps)` on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSolution {
    pub grid: Vec<f64>,
    pub psi: Vec<C64>,
    pub phi: Vec<C64>,
    pub eps: f64,
    pub h: f64,
}

impl RiccatiSolution {
    pub fn psi_end(&self) -> C64 {
        *self.psi.last().unwrap()
    }

    pub fn phi_end(&self) -> C64 {
        *self.phi.last().unwrap()
    }

    /// Diagnostics CSV with columns `s,re_psi,im_psi,re_phi,im_phi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,re_psi,im_psi,re_phi,im_phi\n");
        for ((s, p), q) in self.grid.iter().zip(&self.psi).zip(&self.phi) {
            let _ = writeln!(out, "{},{},{},{},{}", s, p.re, p.im, q.re, q.im);
        }
        out
    }
}

/// Uniform grid of `n_steps` cells on `[0, T]` refined to contain every
/// segment boundary of `fg`.
fn solver_grid(fg: &PiecewiseFunctional, n_steps: usize) -> Vec<f64> {
    let horizon = fg.horizon();
    let mut grid: Vec<f64> = (0..=n_steps)
        .map(|i| horizon * i as f64 / n_steps as f64)
        .collect();
    let tol = 1e-12 * horizon;
    for &b in &fg.breaks()[1..fg.breaks().len() - 1] {
        let pos = grid.partition_point(|&x| x < b);
        let near = |i: usize| grid.get(i).is_some_and(|&x| (x - b).abs() <= tol);
        if near(pos) {
            grid[pos] = b;
        } else if pos > 0 && near(pos - 1) {
            grid[pos - 1] = b;
        } else {
            grid.insert(pos, b);
        }
    }
    grid
}

pub fn solve_riccati(
    params: &ReversionaryParams,
    fg: &PiecewiseFunctional,
    n_steps: usize,
) -> Result<RiccatiSolution> {
    solve_riccati_with(params, fg, n_steps, &RiccatiOptions::default())
}

pub fn solve_riccati_with(
    params: &ReversionaryParams,
    fg: &PiecewiseFunctional,
    n_steps: usize,
    opts: &RiccatiOptions,
) -> Result<RiccatiSolution> {
    params.validate()?;
    if n_steps < 2 {
        return Err(Error::Precondition("n_steps must be >= 2".into()));
    }
    if opts.psi0.re > 0.0 {
        return Err(Error::Precondition("initial value needs Re psi(0) <= 0".into()));
    }
    for (_, _, f, g) in fg.segments() {
        if g.re + 0.5 * (f.re * f.re - f.re) > 0.0 {
            return Err(Error::Precondition(format!(
                "Re g + ((Re f)^2 - Re f)/2 <= 0 fails for (f, g) = ({f}, {g})"
            )));
        }
    }
    let grid = solver_grid(fg, n_steps);
    let coeffs: Vec<RiccatiCoeffs> = fg
        .values()
        .iter()
        .map(|&(f, g)| RiccatiCoeffs::reversionary(params, f, g))
        .collect();
    let phi_rate = params.theta + params.kappa() * params.eps.powf(0.5 - params.h) * params.v0;

    let mut psi = Vec::with_capacity(grid.len());
    let mut phi = Vec::with_capacity(grid.len());
    psi.push(opts.psi0);
    phi.push(C64::default());
    let kappa = params.kappa();
    for (step, w) in grid.windows(2).enumerate() {
        let dt = w[1] - w[0];
        let co = &coeffs[fg.segment_index(0.5 * (w[0] + w[1]))];
        let p = *psi.last().unwrap();
        let q = *phi.last().unwrap();
        let (p_next, integral) = match opts.scheme {
            RiccatiScheme::SegmentExact => co.flow(p, dt),
            RiccatiScheme::ExponentialEuler => {
                let p_next = exponential_trapezoid_step(co, kappa, p, dt);
                (p_next, 0.5 * dt * (p + p_next))
            }
        };
        if !is_finite(p_next) || !is_finite(integral) {
            return Err(Error::NumericFailure {
                step,
                reason: format!("non-finite psi at s = {}", w[1]),
            });
        }
        psi.push(p_next);
        phi.push(q + phi_rate * integral);
    }
    Ok(RiccatiSolution {
        grid,
        psi,
        phi,
        eps: params.eps,
        h: params.h,
    })
}

/// One step of `psi' = -kappa psi + N(psi)` with the stiff linear part
/// integrated exactly and the nonlinearity `N` frozen, then corrected once.
fn exponential_trapezoid_step(co: &RiccatiCoeffs, kappa: f64, p: C64, dt: f64) -> C64 {
    let nonlinear = |x: C64| co.rhs(x) + kappa * x;
    let z = -kappa * dt;
    let decay = z.exp();
    // phi1 = (1 - e^{-kappa dt}) / kappa, phi2 = (e^{-kappa dt} - 1 + kappa dt) / (kappa^2 dt)
    let (phi1, phi2) = if z.abs() < 1e-5 {
        (dt * (1.0 + 0.5 * z), dt * (0.5 + z / 6.0))
    } else {
        let em1 = z.exp_m1();
        (-em1 / kappa, (em1 - z) / (kappa * kappa * dt))
    };
    let n0 = nonlinear(p);
    let pred = decay * p + phi1 * n0;
    pred + phi2 * (nonlinear(pred) - n0)
}

/// Right-hand side `|psi(t)| <= C eps^(H+1/2) (1 - e^{-t/eps})` of the a-priori
/// bound, with `C = sup |g + (f^2 - f)/2|`.
pub fn psi_bound(params: &ReversionaryParams, fg: &PiecewiseFunctional, t: f64) -> f64 {
    fg.sup_h() * params.eps.powf(params.h + 0.5) * -(-t / params.eps).exp_m1()
}

/// The `d` and `g` quantities of the closed-form marginal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfTerms {
    pub g: C64,
    pub d: C64,
}

/// Internal closed-form pieces in natural time units:
/// `Psi' = sigma^2/2 Psi^2 - A Psi + h` with `Psi = eps^(1/2-H) psi`.
struct Closed {
    sigma2: f64,
    disc: C64,
    numer: C64,
    g: C64,
    drift: f64,
}

fn closed_form(u: f64, v: f64, params: &ReversionaryParams) -> Closed {
    let sigma = params.vol_of_vol();
    let sigma2 = sigma * sigma;
    let kappa = params.kappa();
    let a = c(kappa, -params.rho * sigma * u);
    let h = c(-0.5 * u * u, v - 0.5 * u);
    let disc = psqrt(a * a - 2.0 * sigma2 * h);
    let sum = a + disc;
    let (numer, g) = if sum == C64::default() {
        (C64::default(), C64::default())
    } else {
        let numer = 2.0 * sigma2 * h / sum; // = A - D, without cancellation
        (numer, numer / sum)
    };
    Closed {
        sigma2,
        disc,
        numer,
        g,
        drift: params.drift_level(),
    }
}

pub fn explicit_terms(u: f64, v: f64, params: &ReversionaryParams) -> CfTerms {
    let cl = closed_form(u, v, params);
    // Dimensionless d relative to the 1/eps time scale.
    CfTerms {
        g: cl.g,
        d: cl.disc * params.eps,
    }
}

/// Closed-form `(phi_eps(t), psi_eps(t))` for `(f, g) = (i u, i v)`.
pub fn explicit_phi_psi(u: f64, v: f64, params: &ReversionaryParams, t: f64) -> Result<(C64, C64)> {
    if !(t >= 0.0) {
        return Err(Error::Precondition(format!("t = {t} must be >= 0")));
    }
    let cl = closed_form(u, v, params);
    let decay = (-cl.disc * t).exp();
    let den = 1.0 - cl.g * decay;
    if den == C64::default() || cl.g == c(1.0, 0.0) {
        return Err(Error::SingularArgument { t });
    }
    let one_minus_decay = -expm1(-cl.disc * t);
    let big_psi = cl.numer / cl.sigma2 * one_minus_decay / den;
    let log_ratio = ln1p(cl.g * one_minus_decay / (1.0 - cl.g));
    let phi = cl.drift / cl.sigma2 * (cl.numer * t - 2.0 * log_ratio);
    let psi = params.eps.powf(params.h - 0.5) * big_psi;
    Ok((phi, psi))
}

/// `F(s, x) = xi^2/2 x^2 + rho xi f x + h` at frozen `(f, g)`.
pub fn source_f(f: C64, g: C64, rho: f64, xi: f64, x: C64) -> C64 {
    0.5 * xi * xi * x * x + rho * xi * f * x + g + 0.5 * (f * f - f)
}

/// Pointwise `eps -> 0` limit of `psi_eps` for frozen `(f, g)`.
pub fn limit_psi0_value(f: C64, g: C64, regime: Regime, rho: f64, xi: f64) -> C64 {
    let h = g + 0.5 * (f * f - f);
    match regime {
        Regime::AboveHalf => C64::default(),
        Regime::AtHalf => {
            let b = 1.0 - rho * xi * f;
            (b - psqrt(b * b - 2.0 * xi * xi * h)) / (xi * xi)
        }
        Regime::BelowHalf => -(rho * f + psqrt(f * (1.0 - (1.0 - rho * rho) * f) - 2.0 * g)) / xi,
    }
}

pub fn limit_psi0(fg: &PiecewiseFunctional, regime: Regime, rho: f64, xi: f64, t: f64) -> C64 {
    let (f, g) = fg.eval(t);
    limit_psi0_value(f, g, regime, rho, xi)
}

/// `phi_0(T)` as an exact sum over the segments of a step functional.
pub fn limit_phi0(
    fg: &PiecewiseFunctional,
    regime: Regime,
    params: &ReversionaryParams,
    horizon: f64,
) -> C64 {
    let (rho, xi) = (params.rho, params.xi);
    let mut acc = C64::default();
    for (s0, s1, f, g) in fg.segments() {
        let len = s1.min(horizon) - s0;
        if len <= 0.0 {
            continue;
        }
        let h = g + 0.5 * (f * f - f);
        let rate = match regime {
            Regime::AboveHalf => params.v0 * h,
            Regime::AtHalf => {
                (params.theta + params.v0) / (xi * xi)
                    * (1.0 - (rho * xi * f + psqrt((1.0 - rho * xi * f).powi(2) - 2.0 * xi * xi * h)))
            }
            Regime::BelowHalf => -params.theta / xi * (rho * f + psqrt(rho * rho * f * f - 2.0 * h)),
        };
        acc += len * rate;
    }
    acc
}

/// Root pairs of `P(X) = xi^2/2 X^2 - (1 - rho xi f) X + h` and
/// `Q(X) = xi^2/2 X^2 + rho xi f X + h`, each ordered by increasing real part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPairs {
    pub p: [C64; 2],
    pub q: [C64; 2],
}

pub fn riccati_roots(f: C64, g: C64, rho: f64, xi: f64) -> RootPairs {
    let h = g + 0.5 * (f * f - f);
    let half_a = 0.5 * xi * xi;
    RootPairs {
        p: quadratic_roots(half_a, -(1.0 - rho * xi * f), h),
        q: quadratic_roots(half_a, rho * xi * f, h),
    }
}

/// Roots of `a X^2 + b X + c` (a real, > 0), ordered by real part.
fn quadratic_roots(a: f64, b: C64, c0: C64) -> [C64; 2] {
    let disc = psqrt(b * b - 4.0 * a * c0);
    let s1 = -b + disc;
    let s2 = -b - disc;
    let big = if s1.norm() >= s2.norm() { s1 } else { s2 };
    let (r1, r2) = if big == C64::default() {
        (C64::default(), C64::default())
    } else {
        (big / (2.0 * a), 2.0 * c0 / big)
    };
    if r1.re <= r2.re {
        [r1, r2]
    } else {
        [r2, r1]
    }
}

#[inline]
pub fn poly_p(f: C64, g: C64, rho: f64, xi: f64, x: C64) -> C64 {
    0.5 * xi * xi * x * x - (1.0 - rho * xi * f) * x + g + 0.5 * (f * f - f)
}

#[inline]
pub fn poly_q(f: C64, g: C64, rho: f64, xi: f64, x: C64) -> C64 {
    0.5 * xi * xi * x * x + rho * xi * f * x + g + 0.5 * (f * f - f)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmath::I;

    fn fig6(eps: f64, h: f64) -> ReversionaryParams {
        ReversionaryParams::new(100.0, 0.3, 0.3, 0.8, -0.7, eps, h).unwrap()
    }

    #[test]
    fn zero_source_gives_zero_solution() {
        let p = fig6(21.0 / 252.0, -0.5);
        let fg = PiecewiseFunctional::fourier(0.0, 0.0, 1.0).unwrap();
        for scheme in [RiccatiScheme::SegmentExact, RiccatiScheme::ExponentialEuler] {
            let opts = RiccatiOptions { scheme, ..Default::default() };
            let sol = solve_riccati_with(&p, &fg, 64, &opts).unwrap();
            assert!(sol.psi.iter().all(|z| z.norm() == 0.0));
            assert!(sol.phi.iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn rejects_violated_condition() {
        let p = fig6(0.1, -0.5);
        let fg = PiecewiseFunctional::constant(c(0.0, 1.0), c(0.5, 0.0), 1.0).unwrap();
        assert!(matches!(solve_riccati(&p, &fg, 16), Err(Error::Precondition(_))));
        let fg = PiecewiseFunctional::fourier(1.0, 1.0, 1.0).unwrap();
        assert!(solve_riccati(&p, &fg, 1).is_err());
    }

    #[test]
    fn grid_contains_breakpoints() {
        let fg = PiecewiseFunctional::new(
            vec![0.0, 0.3, 1.0],
            vec![(c(0.0, 1.0), c(0.0, 0.0)), (c(0.0, 2.0), c(0.0, 1.0))],
        )
        .unwrap();
        let grid = solver_grid(&fg, 4);
        assert!(grid.contains(&0.3));
        assert_eq!(grid.len(), 6);
        let grid = solver_grid(&fg, 10);
        assert_eq!(grid.len(), 11);
        assert!(grid.contains(&0.3));
    }

    #[test]
    fn flow_solves_the_ode() {
        let co = RiccatiCoeffs {
            a: 0.7,
            b: c(-3.0, 1.2),
            c: c(-2.0, 5.0),
        };
        let psi0 = c(-0.3, 0.4);
        // Compare against RK4 with a fine step.
        let n = 20_000;
        let dt = 1.3 / n as f64;
        let mut y = psi0;
        let mut integral = C64::default();
        for _ in 0..n {
            let k1 = co.rhs(y);
            let k2 = co.rhs(y + 0.5 * dt * k1);
            let k3 = co.rhs(y + 0.5 * dt * k2);
            let k4 = co.rhs(y + dt * k3);
            let y_next = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            integral += 0.5 * dt * (y + y_next);
            y = y_next;
        }
        let (psi, int) = co.flow(psi0, 1.3);
        assert!((psi - y).norm() < 1e-10, "{psi} vs {y}");
        assert!((int - integral).norm() < 1e-7, "{int} vs {integral}");
    }

    #[test]
    fn explicit_terms_zero_arguments() {
        let p = fig6(0.1, -0.5);
        let t = explicit_terms(0.0, 0.0, &p);
        assert!((t.d - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(t.g, C64::default());
        let (phi, psi) = explicit_phi_psi(0.0, 0.0, &p, 0.7).unwrap();
        assert_eq!(phi, C64::default());
        assert_eq!(psi, C64::default());
    }

    #[test]
    fn explicit_terms_u_zero_squares_back() {
        let p = fig6(21.0 / 252.0, -0.5);
        let v = 37.0;
        let d = explicit_terms(0.0, v, &p).d;
        let k = p.eps.powf(2.0 * p.h + 1.0) * p.xi * p.xi;
        let want = c(1.0, -2.0 * k * v);
        assert!((d * d - want).norm() < 1e-12);
        assert!(d.re > 0.0);
    }

    #[test]
    fn explicit_values_at_zero_time() {
        let p = fig6(0.05, 0.1);
        let (phi, psi) = explicit_phi_psi(3.0, -4.0, &p, 0.0).unwrap();
        assert_eq!(phi.norm(), 0.0);
        assert_eq!(psi.norm(), 0.0);
        assert!(explicit_phi_psi(1.0, 1.0, &p, -1.0).is_err());
    }

    #[test]
    fn explicit_long_time_asymptote() {
        let eps = 21.0 / 252.0;
        let p = fig6(eps, -0.5);
        let (u, v) = (5.0, 100.0);
        let (_, psi) = explicit_phi_psi(u, v, &p, 50.0 * eps).unwrap();
        let d = explicit_terms(u, v, &p).d;
        let kappa_u = eps.powf(p.h + 0.5) * p.xi;
        let limit = eps.powf(-p.h - 0.5) / (p.xi * p.xi) * (1.0 - I * p.rho * kappa_u * u - d);
        assert!((psi - limit).norm() < 1e-12 * limit.norm());
    }

    #[test]
    fn roots_at_zero_functional() {
        let xi = 0.8;
        let r = riccati_roots(C64::default(), C64::default(), -0.7, xi);
        assert!(r.p[0].norm() < 1e-15);
        assert!((r.p[1] - c(2.0 / (xi * xi), 0.0)).norm() < 1e-14);
        assert!(r.q[0].norm() < 1e-15 && r.q[1].norm() < 1e-15);
        let zero = PiecewiseFunctional::fourier(0.0, 0.0, 1.0).unwrap();
        assert_eq!(limit_psi0(&zero, Regime::AtHalf, -0.7, xi, 0.5), C64::default());
        assert_eq!(limit_psi0(&zero, Regime::BelowHalf, -0.7, xi, 0.5), C64::default());
    }

    #[test]
    fn roots_opposite_signs_example() {
        let r = riccati_roots(c(0.0, 1.0), c(0.0, 1.0), -0.7, 0.8);
        assert!(r.p[0].re < 0.0 && r.p[1].re > 0.0);
        assert!(r.q[0].re < 0.0 && r.q[1].re > 0.0);
        for x in r.p {
            assert!(poly_p(c(0.0, 1.0), c(0.0, 1.0), -0.7, 0.8, x).norm() < 1e-12);
        }
        for x in r.q {
            assert!(poly_q(c(0.0, 1.0), c(0.0, 1.0), -0.7, 0.8, x).norm() < 1e-12);
        }
    }

    #[test]
    fn limit_psi0_is_the_stable_root() {
        let (rho, xi) = (-0.7, 0.8);
        for &(u, v) in &[(1.0, 2.0), (-3.0, 0.5), (0.0, -7.0), (12.0, 100.0)] {
            let (f, g) = (c(0.0, u), c(0.0, v));
            let r = riccati_roots(f, g, rho, xi);
            let at = limit_psi0_value(f, g, Regime::AtHalf, rho, xi);
            let below = limit_psi0_value(f, g, Regime::BelowHalf, rho, xi);
            assert!((at - r.p[0]).norm() < 1e-12 * (1.0 + at.norm()));
            assert!((below - r.q[0]).norm() < 1e-12 * (1.0 + below.norm()));
            assert!((at - source_f(f, g, rho, xi, at)).norm() < 1e-12);
            assert!(source_f(f, g, rho, xi, below).norm() < 1e-11);
        }
    }

    #[test]
    fn limit_phi0_zero_functional() {
        let p = fig6(0.01, -0.5);
        let fg = PiecewiseFunctional::fourier(0.0, 0.0, 1.0).unwrap();
        for r in [Regime::AboveHalf, Regime::AtHalf, Regime::BelowHalf] {
            assert!(limit_phi0(&fg, r, &p, 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn limit_phi0_above_half_closed_form() {
        let p = fig6(0.01, 0.1);
        let (u, v, t) = (1.7, -2.5, 0.8);
        let fg = PiecewiseFunctional::fourier(u, v, t).unwrap();
        let want = p.v0 * t * c(-0.5 * u * u, v - 0.5 * u);
        assert!((limit_phi0(&fg, Regime::AboveHalf, &p, t) - want).norm() < 1e-14);
        // Same as -V0/2 (u^2 - 2i(v - u/2)) T.
        let alt = -0.5 * p.v0 * (u * u - 2.0 * I * (v - 0.5 * u)) * t;
        assert!((want - alt).norm() < 1e-14);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let p = fig6(0.1, -0.5);
        let fg = PiecewiseFunctional::fourier(1.0, 1.0, 1.0).unwrap();
        let sol = solve_riccati(&p, &fg, 4).unwrap();
        let csv = sol.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "s,re_psi,im_psi,re_phi,im_phi");
        assert_eq!(lines.len(), 6);
    }
}
