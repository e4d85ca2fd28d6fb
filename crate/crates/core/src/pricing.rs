//! European option pricing by Fourier-cosine expansion, Black-Scholes
//! utilities, implied volatility and ATM skew. Zero rates throughout.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::charfn::{cf_limit, cf_reversionary, nigig_exponent, FourierArg, NigIgParams};
use crate::cmath::{c, is_finite, C64, I};
use crate::error::{invalid, Error, Result};
use crate::params::{Regime, ReversionaryParams, RoughParams};
use crate::rough::cf_rough;

/// Source of characteristic functions of the log-return `log(S_T/S0)`.
pub trait CfProvider: Sync {
    fn spot(&self) -> f64;
    fn log_return_cf(&self, u: f64, horizon: f64) -> Result<C64>;
}

/// Built-in models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    Reversionary { params: ReversionaryParams },
    /// `eps -> 0` limit of the reversionary model in the given regime.
    Limit { params: ReversionaryParams, regime: Regime },
    NigIg { params: NigIgParams, s0: f64 },
    Rough { params: RoughParams, n_steps: usize },
    BlackScholes { s0: f64, sigma: f64 },
}

impl CfProvider for Model {
    fn spot(&self) -> f64 {
        match self {
            Model::Reversionary { params } | Model::Limit { params, .. } => params.s0,
            Model::NigIg { s0, .. } | Model::BlackScholes { s0, .. } => *s0,
            Model::Rough { params, .. } => params.p0,
        }
    }

    fn log_return_cf(&self, u: f64, horizon: f64) -> Result<C64> {
        let arg = FourierArg::new(u, 0.0);
        let z = match self {
            Model::Reversionary { params } => cf_reversionary(arg, 0.0, horizon, 0.0, params.v0, params)?,
            Model::Limit { params, regime } => cf_limit(arg, horizon, params, *regime)?,
            Model::NigIg { params, .. } => (nigig_exponent(arg, params) * horizon).exp(),
            Model::Rough { params, n_steps } => {
                let mut p = *params;
                p.p0 = 1.0;
                cf_rough(c(0.0, u), &p, horizon, *n_steps)?
            }
            Model::BlackScholes { sigma, .. } => {
                let var = sigma * sigma * horizon;
                c(-0.5 * var * u * u, -0.5 * var * u).exp()
            }
        };
        Ok(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosConfig {
    pub n_terms: usize,
    /// Truncation half-width in units of `sqrt(c2 + sqrt|c4|)`.
    pub width: f64,
}

impl Default for CosConfig {
    fn default() -> Self {
        CosConfig {
            n_terms: 2048,
            width: 12.0,
        }
    }
}

impl CosConfig {
    fn validate(&self) -> Result<()> {
        if self.n_terms < 16 {
            return Err(invalid("n_terms", "must be >= 16"));
        }
        if !(self.width >= 6.0) {
            return Err(invalid("width", "must be >= 6"));
        }
        Ok(())
    }
}

/// Cumulants `(c1, c2, c4)` of the log-return from finite differences of the
/// log characteristic function at the origin.
pub fn cumulants(model: &dyn CfProvider, horizon: f64) -> Result<(f64, f64, f64)> {
    let log_cf = |u: f64| -> Result<C64> {
        let z = model.log_return_cf(u, horizon)?;
        if !is_finite(z) || z.norm() == 0.0 {
            return Err(Error::NonFiniteCf { u });
        }
        Ok(z.ln())
    };
    // Coarse variance scale first, then a step adapted to it.
    let h0 = 1e-3;
    let (lp, lm) = (log_cf(h0)?, log_cf(-h0)?);
    let c2_rough = (-(lp + lm).re / (h0 * h0)).max(1e-12);
    let h = (0.2 / c2_rough.sqrt()).min(50.0);
    let l1 = log_cf(h)?;
    let lm1 = log_cf(-h)?;
    let l2 = log_cf(2.0 * h)?;
    let lm2 = log_cf(-2.0 * h)?;
    let c1 = ((l1 - lm1) / (2.0 * h)).im;
    let c2 = -((l1 + lm1) / (h * h)).re;
    let c4 = ((l2 - 4.0 * l1 - 4.0 * lm1 + lm2) / h.powi(4)).re;
    let c2 = if c2 > 0.0 { c2 } else { c2_rough };
    Ok((c1, c2, c4))
}

/// COS expansion data for one maturity, reusable across strikes.
#[derive(Debug, Clone)]
pub struct CosSlice {
    spot: f64,
    horizon: f64,
    a: f64,
    b: f64,
    /// `Re`-ready terms `cf(u_k) exp(-i u_k a)`, first one halved.
    terms: Vec<C64>,
}

impl CosSlice {
    pub fn new(model: &dyn CfProvider, horizon: f64, cfg: &CosConfig) -> Result<CosSlice> {
        cfg.validate()?;
        if !(horizon > 0.0) {
            return Err(invalid("T", "must be > 0"));
        }
        let (c1, c2, c4) = cumulants(model, horizon)?;
        let half = cfg.width * (c2 + c4.abs().sqrt()).sqrt();
        let (a, b) = (c1 - half, c1 + half);
        let span = b - a;
        let terms = (0..cfg.n_terms)
            .into_par_iter()
            .map(|k| {
                let u = k as f64 * PI / span;
                let z = model.log_return_cf(u, horizon)?;
                if !is_finite(z) {
                    return Err(Error::NonFiniteCf { u });
                }
                let w = if k == 0 { 0.5 } else { 1.0 };
                Ok(w * z * (-I * u * a).exp())
            })
            .collect::<Result<Vec<C64>>>()?;
        Ok(CosSlice {
            spot: model.spot(),
            horizon,
            a,
            b,
            terms,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Put price at log-moneyness `k = log(K/S0)`.
    pub fn put(&self, k: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        if k <= a {
            return 0.0;
        }
        let d = k.min(b);
        let span = b - a;
        let ek = k.exp();
        let mut acc = 0.0;
        for (j, t) in self.terms.iter().enumerate() {
            let w = j as f64 * PI / span;
            // chi = int_a^d e^y cos(w (y - a)) dy, psi = int_a^d cos(w (y - a)) dy
            let (s, co) = (w * (d - a)).sin_cos();
            let ed = d.exp();
            let ea = a.exp();
            let chi = (co * ed - ea + w * s * ed) / (1.0 + w * w);
            let psi = if j == 0 { d - a } else { s / w };
            acc += t.re * (ek * psi - chi);
        }
        (self.spot * 2.0 / span * acc).max(0.0)
    }

    /// Call price through put-call parity.
    pub fn call(&self, k: f64) -> f64 {
        self.put(k) + self.spot * (1.0 - k.exp())
    }
}

pub fn cos_price(model: &dyn CfProvider, strike: f64, horizon: f64, cfg: &CosConfig) -> Result<f64> {
    if !(strike >= 0.0) {
        return Err(invalid("strike", "must be >= 0"));
    }
    let slice = CosSlice::new(model, horizon, cfg)?;
    if strike == 0.0 {
        return Ok(model.spot());
    }
    Ok(slice.call((strike / model.spot()).ln()))
}

pub fn cos_put(model: &dyn CfProvider, strike: f64, horizon: f64, cfg: &CosConfig) -> Result<f64> {
    if !(strike > 0.0) {
        return Err(invalid("strike", "must be > 0"));
    }
    let slice = CosSlice::new(model, horizon, cfg)?;
    Ok(slice.put((strike / model.spot()).ln()))
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn d1_d2(s0: f64, strike: f64, horizon: f64, sigma: f64) -> (f64, f64) {
    let sd = sigma * horizon.sqrt();
    let d1 = ((s0 / strike).ln() + 0.5 * sd * sd) / sd;
    (d1, d1 - sd)
}

pub fn bs_call(s0: f64, strike: f64, horizon: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 || horizon <= 0.0 {
        return (s0 - strike).max(0.0);
    }
    let (d1, d2) = d1_d2(s0, strike, horizon, sigma);
    s0 * norm_cdf(d1) - strike * norm_cdf(d2)
}

pub fn bs_put(s0: f64, strike: f64, horizon: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 || horizon <= 0.0 {
        return (strike - s0).max(0.0);
    }
    let (d1, d2) = d1_d2(s0, strike, horizon, sigma);
    strike * norm_cdf(-d2) - s0 * norm_cdf(-d1)
}

pub fn bs_vega(s0: f64, strike: f64, horizon: f64, sigma: f64) -> f64 {
    let (d1, _) = d1_d2(s0, strike, horizon, sigma);
    s0 * norm_pdf(d1) * horizon.sqrt()
}

pub const VOL_LOWER: f64 = 1e-8;
pub const VOL_UPPER: f64 = 5.0;

/// Black-Scholes implied volatility of a call price, solved on the
/// out-of-the-money side with safeguarded Newton steps.
pub fn implied_vol(price: f64, s0: f64, strike: f64, horizon: f64) -> Result<f64> {
    let no_vol = || Error::NoImpliedVol {
        price,
        lower: (s0 - strike).max(0.0),
        upper: s0,
    };
    if !(s0 > 0.0 && strike > 0.0 && horizon > 0.0) || !price.is_finite() {
        return Err(no_vol());
    }
    let intrinsic = (s0 - strike).max(0.0);
    let slack = 1e-13 * s0;
    if price < intrinsic - slack || price >= s0 {
        return Err(no_vol());
    }
    let use_put = strike < s0;
    let target = if use_put { price - s0 + strike } else { price };
    let otm = |s: f64| {
        if use_put {
            bs_put(s0, strike, horizon, s)
        } else {
            bs_call(s0, strike, horizon, s)
        }
    };
    if target <= slack.max(otm(VOL_LOWER)) {
        return Ok(VOL_LOWER);
    }
    if target > otm(VOL_UPPER) {
        return Err(no_vol());
    }
    let (mut lo, mut hi) = (VOL_LOWER, VOL_UPPER);
    let mut s = (2.0 * ((s0 / strike).ln().abs() / horizon).sqrt()).clamp(0.05, 1.0);
    for _ in 0..200 {
        let f = otm(s) - target;
        if f > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let vega = bs_vega(s0, strike, horizon, s);
        let mut next = s - f / vega;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= 1e-12 * s || hi - lo <= 1e-12 * s {
            return Ok(next);
        }
        s = next;
    }
    Ok(s)
}

/// Maturity by log-moneyness grid of call prices and implied vols;
/// `None` marks a cell that could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolSurface {
    pub spot: f64,
    pub maturities: Vec<f64>,
    pub log_moneyness: Vec<f64>,
    pub prices: Vec<Vec<Option<f64>>>,
    pub vols: Vec<Vec<Option<f64>>>,
}

impl VolSurface {
    pub fn price(&self, i: usize, j: usize) -> Option<f64> {
        self.prices[i][j]
    }

    pub fn vol(&self, i: usize, j: usize) -> Option<f64> {
        self.vols[i][j]
    }

    pub fn missing_cells(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (i, &t) in self.maturities.iter().enumerate() {
            for (j, &k) in self.log_moneyness.iter().enumerate() {
                if self.prices[i][j].is_none() {
                    out.push((t, k));
                }
            }
        }
        out
    }

    /// CSV with columns `maturity_years,log_moneyness,call_price,implied_vol`;
    /// missing values are empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("maturity_years,log_moneyness,call_price,implied_vol\n");
        let cell = |x: Option<f64>| x.map(|v| format!("{v:.17e}")).unwrap_or_default();
        for (i, &t) in self.maturities.iter().enumerate() {
            for (j, &k) in self.log_moneyness.iter().enumerate() {
                let _ = writeln!(out, "{t},{k},{},{}", cell(self.prices[i][j]), cell(self.vols[i][j]));
            }
        }
        out
    }

    pub fn from_csv(text: &str, spot: f64) -> Result<VolSurface> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if n == 0 || line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() < 3 {
                return Err(Error::Config(format!("line {}: expected at least 3 fields", n + 1)));
            }
            let num = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse::<f64>()
                        .map(Some)
                        .map_err(|_| Error::Config(format!("line {}: bad number {s:?}", n + 1)))
                }
            };
            let t = num(f[0])?.ok_or_else(|| Error::Config(format!("line {}: missing maturity", n + 1)))?;
            let k = num(f[1])?.ok_or_else(|| Error::Config(format!("line {}: missing k", n + 1)))?;
            let vol = if f.len() > 3 { num(f[3])? } else { None };
            rows.push((t, k, num(f[2])?, vol));
        }
        let mut maturities: Vec<f64> = Vec::new();
        let mut ks: Vec<f64> = Vec::new();
        for r in &rows {
            if !maturities.contains(&r.0) {
                maturities.push(r.0);
            }
            if !ks.contains(&r.1) {
                ks.push(r.1);
            }
        }
        maturities.sort_by(f64::total_cmp);
        ks.sort_by(f64::total_cmp);
        let mut prices = vec![vec![None; ks.len()]; maturities.len()];
        let mut vols = vec![vec![None; ks.len()]; maturities.len()];
        for (t, k, p, v) in rows {
            let i = maturities.iter().position(|&x| x == t).unwrap();
            let j = ks.iter().position(|&x| x == k).unwrap();
            prices[i][j] = p;
            vols[i][j] = v;
        }
        Ok(VolSurface {
            spot,
            maturities,
            log_moneyness: ks,
            prices,
            vols,
        })
    }
}

/// Prices and implied vols on a maturity by log-moneyness grid.
pub fn smile(model: &dyn CfProvider, maturities: &[f64], ks: &[f64], cfg: &CosConfig) -> Result<VolSurface> {
    cfg.validate()?;
    let spot = model.spot();
    let rows: Vec<(Vec<Option<f64>>, Vec<Option<f64>>)> = maturities
        .par_iter()
        .map(|&t| match CosSlice::new(model, t, cfg) {
            Ok(slice) => ks
                .iter()
                .map(|&k| {
                    let p = slice.call(k);
                    let v = implied_vol(p, spot, spot * k.exp(), t).ok();
                    (Some(p), v)
                })
                .unzip(),
            Err(_) => (vec![None; ks.len()], vec![None; ks.len()]),
        })
        .collect();
    let (prices, vols) = rows.into_iter().unzip();
    Ok(VolSurface {
        spot,
        maturities: maturities.to_vec(),
        log_moneyness: ks.to_vec(),
        prices,
        vols,
    })
}

/// `|sigma(dk) - sigma(-dk)| / (2 dk)` at maturity `T`.
pub fn atm_skew(model: &dyn CfProvider, horizon: f64, dk: f64, cfg: &CosConfig) -> Result<f64> {
    if !(dk > 0.0) {
        return Err(invalid("dk", "must be > 0"));
    }
    let surface = smile(model, &[horizon], &[-dk, dk], cfg)?;
    skew_from_surface(&surface, 0)
}

/// ATM skew from one surface row, using the smallest positive log-moneyness
/// `dk` of the grid and its mirror `-dk`.
pub fn skew_from_surface(surface: &VolSurface, row: usize) -> Result<f64> {
    let ks = &surface.log_moneyness;
    let t = surface.maturities[row];
    let pos = ks
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0.0)
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::GridMismatch("no positive log-moneyness".into()))?;
    let neg = ks
        .iter()
        .position(|&k| (k + pos.1).abs() <= 1e-14)
        .ok_or_else(|| Error::GridMismatch("no symmetric log-moneyness pair".into()))?;
    let missing = |k: f64| Error::MissingCell {
        maturity: t,
        log_moneyness: k,
    };
    let up = surface.vols[row][pos.0].ok_or_else(|| missing(*pos.1))?;
    let down = surface.vols[row][neg].ok_or_else(|| missing(-pos.1))?;
    Ok((up - down).abs() / (2.0 * pos.1))
}

/// CSV with columns `maturity_years,atm_skew`.
pub fn skew_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("maturity_years,atm_skew\n");
    for (t, s) in points {
        let _ = writeln!(out, "{t},{s}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(sigma: f64) -> Model {
        Model::BlackScholes { s0: 100.0, sigma }
    }

    #[test]
    fn bs_round_trip() {
        for &(k, t) in &[(100.0, 1.0), (80.0, 0.1), (130.0, 2.0)] {
            let p = bs_call(100.0, k, t, 0.2);
            assert!((implied_vol(p, 100.0, k, t).unwrap() - 0.2).abs() < 1e-10);
        }
    }

    #[test]
    fn implied_vol_at_intrinsic() {
        let v = implied_vol(20.0, 100.0, 80.0, 1.0).unwrap();
        assert!(v < 1e-6);
        assert!(implied_vol(19.0, 100.0, 80.0, 1.0).is_err());
        assert!(implied_vol(100.0, 100.0, 80.0, 1.0).is_err());
    }

    #[test]
    fn cos_matches_black_scholes() {
        let sigma = 0.3f64.sqrt();
        let cfg = CosConfig {
            n_terms: 512,
            width: 12.0,
        };
        for &k in &[70.0, 100.0, 125.0] {
            let p = cos_price(&bs(sigma), k, 1.0, &cfg).unwrap();
            assert!((p - bs_call(100.0, k, 1.0, sigma)).abs() < 1e-8, "K={k}");
        }
    }

    #[test]
    fn zero_strike_and_parity() {
        let m = bs(0.25);
        let cfg = CosConfig::default();
        assert!((cos_price(&m, 0.0, 0.5, &cfg).unwrap() - 100.0).abs() < 1e-6);
        assert!((cos_price(&m, 1e-9, 0.5, &cfg).unwrap() - 100.0).abs() < 1e-6);
        let call = cos_price(&m, 95.0, 0.5, &cfg).unwrap();
        let put = cos_put(&m, 95.0, 0.5, &cfg).unwrap();
        assert!((call - put - 5.0).abs() < 1e-8);
    }

    #[test]
    fn flat_smile_and_zero_skew() {
        let m = bs(0.2);
        let ks: Vec<f64> = (0..7).map(|i| -0.3 + 0.1 * i as f64).collect();
        let s = smile(&m, &[0.25, 1.0], &ks, &CosConfig::default()).unwrap();
        for row in &s.vols {
            for v in row {
                assert!((v.unwrap() - 0.2).abs() < 1e-6);
            }
        }
        assert!(atm_skew(&m, 0.5, 1e-3, &CosConfig::default()).unwrap() < 1e-8);
    }

    #[test]
    fn surface_csv_round_trip() {
        let s = smile(&bs(0.2), &[0.5], &[-0.1, 0.0, 0.1], &CosConfig::default()).unwrap();
        let back = VolSurface::from_csv(&s.to_csv(), 100.0).unwrap();
        assert_eq!(back, s);
        assert!(s.missing_cells().is_empty());
    }

    #[test]
    fn normal_cdf_values() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((norm_cdf(1.96) - 0.975_002_104_851_780).abs() < 1e-14);
        assert!(norm_cdf(-40.0) >= 0.0);
    }
}
