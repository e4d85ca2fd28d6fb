//! Monte Carlo engines: exact NIG-IG increments through the inverse Gaussian
//! subordinator, full-truncation Euler paths of the reversionary Heston model
//! and empirical characteristic functions.
//!
//! Paths are generated in fixed chunks of [`CHUNK`] paths. Chunk `c` draws
//! from `ChaCha8Rng::seed_from_u64(seed)` switched to stream `c`, so output
//! does not depend on the number of worker threads.

use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, InverseGaussian, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfn::{FourierArg, NigIgParams};
use crate::cmath::C64;
use crate::error::{invalid, Error, Result};
use crate::params::ReversionaryParams;

pub const CHUNK: usize = 4096;

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// One draw of `IG(mean, shape)` with density
/// `sqrt(shape / (2 pi x^3)) exp(-shape (x - mean)^2 / (2 mean^2 x))`.
pub fn sample_ig<R: Rng + ?Sized>(mean: f64, shape: f64, rng: &mut R) -> Result<f64> {
    let dist = InverseGaussian::new(mean, shape).map_err(|_| invalid("mean/shape", "must be > 0"))?;
    Ok(dist.sample(rng))
}

/// One increment `(X_dt, Y_dt)` of the NIG-IG process.
///
/// `X = mu dt + beta L + sqrt(L) N` and `Y = lambda L`, where `L` is the first
/// time a Brownian motion with drift `sqrt(alpha^2 - beta^2)` hits `delta dt`:
/// `IG(delta dt / sqrt(alpha^2 - beta^2), delta^2 dt^2)`, or Lévy with scale
/// `delta^2 dt^2` when `alpha = |beta|`.
pub fn sample_nigig_increment<R: Rng + ?Sized>(p: &NigIgParams, dt: f64, rng: &mut R) -> Result<(f64, f64)> {
    if !(dt > 0.0) {
        return Err(invalid("dt", "must be > 0"));
    }
    match *p {
        NigIgParams::Finite {
            alpha,
            beta,
            delta,
            mu,
            lambda,
        } => {
            let gap = ((alpha - beta.abs()) * (alpha + beta.abs())).sqrt();
            let level = delta * dt;
            let clock = if gap > 0.0 {
                sample_ig(level / gap, level * level, rng)?
            } else {
                let z = normal(rng);
                level * level / (z * z)
            };
            let x = mu * dt + beta * clock + clock.sqrt() * normal(rng);
            Ok((x, lambda * clock))
        }
        NigIgParams::GaussianLimit { sigma2, mu } => {
            let x = mu * dt + (sigma2 * dt).sqrt() * normal(rng);
            Ok((x, sigma2 * dt))
        }
    }
}

/// `n` independent NIG-IG increments over `dt`, deterministic in `seed`.
pub fn sample_nigig_increments(p: &NigIgParams, dt: f64, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    p.validate()?;
    let chunks: Vec<Result<Vec<(f64, f64)>>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(n - c * CHUNK);
            (0..len).map(|_| sample_nigig_increment(p, dt, &mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for chunk in chunks {
        out.extend(chunk?);
    }
    Ok(out)
}

/// First hitting times `Lambda_t` on a time grid, one row per path.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingTimeSample {
    pub grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// Paths of the subordinator `Lambda` of `p` on `grid` (first node may be 0).
pub fn sample_hitting_times(p: &NigIgParams, grid: &[f64], n: usize, seed: u64) -> Result<HittingTimeSample> {
    check_grid(grid)?;
    let lambda = match *p {
        NigIgParams::Finite { lambda, .. } => lambda,
        NigIgParams::GaussianLimit { .. } => 1.0,
    };
    let values = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(n - c * CHUNK);
            let mut rows = Vec::with_capacity(len);
            for _ in 0..len {
                let mut t = 0.0;
                let mut acc = 0.0;
                let mut row = Vec::with_capacity(grid.len());
                for &s in grid {
                    if s > t {
                        acc += sample_nigig_increment(p, s - t, &mut rng)?.1 / lambda;
                        t = s;
                    }
                    row.push(acc);
                }
                rows.push(row);
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    Ok(HittingTimeSample {
        grid: grid.to_vec(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CirScheme {
    #[default]
    FullTruncationEuler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n_paths: usize,
    /// Output times in years, increasing and positive.
    pub grid: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub scheme: CirScheme,
    /// Euler substeps per grid cell.
    pub substeps: usize,
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(invalid("n_paths", "must be >= 1"));
        }
        if self.substeps == 0 {
            return Err(invalid("substeps", "must be >= 1"));
        }
        check_grid(&self.grid)
    }

    /// Largest Euler step on the grid.
    pub fn max_substep(&self) -> f64 {
        let mut prev = 0.0;
        let mut out: f64 = 0.0;
        for &t in &self.grid {
            out = out.max((t - prev) / self.substeps as f64);
            prev = t;
        }
        out
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("grid", "must be nonempty"));
    }
    let mut prev = 0.0;
    for (i, &t) in grid.iter().enumerate() {
        if !t.is_finite() || t < prev || (i > 0 && t == prev) {
            return Err(invalid("grid", "must be finite, nonnegative and increasing"));
        }
        prev = t;
    }
    Ok(())
}

/// Simulated `(log S_t, Vbar_t)` at the grid times, stored row-major by path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub grid: Vec<f64>,
    pub log_s: Vec<f64>,
    pub vbar: Vec<f64>,
    /// Terminal instantaneous variance per path.
    pub v_end: Vec<f64>,
}

impl PathSample {
    pub fn n_paths(&self) -> usize {
        self.v_end.len()
    }

    /// `(log S_t, Vbar_t)` of every path at grid node `i`.
    pub fn at(&self, i: usize) -> Vec<(f64, f64)> {
        let m = self.grid.len();
        (0..self.n_paths())
            .map(|p| (self.log_s[p * m + i], self.vbar[p * m + i]))
            .collect()
    }

    /// CSV with columns `path_id,t,log_s,vbar`.
    pub fn to_csv(&self) -> String {
        let m = self.grid.len();
        let mut out = String::from("path_id,t,log_s,vbar\n");
        for p in 0..self.n_paths() {
            for (i, t) in self.grid.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{}", p, t, self.log_s[p * m + i], self.vbar[p * m + i]);
            }
        }
        out
    }
}

/// Full-truncation Euler simulation of the reversionary Heston model.
///
/// Per substep, `V+ = max(V, 0)` enters drift and diffusion, the log-spot moves
/// by `-V+/2 dt + sqrt(V+) (rho dW + sqrt(1 - rho^2) dW')` and `Vbar` by
/// `V+ dt`. Substeps longer than `1/(4 kappa)` are rejected.
pub fn simulate_reversionary(params: &ReversionaryParams, cfg: &SampleConfig) -> Result<PathSample> {
    params.validate()?;
    cfg.validate()?;
    let kappa = params.kappa();
    if cfg.max_substep() > 0.25 / kappa * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "Euler substep {} exceeds 1/(4 kappa) = {}; raise substeps",
            cfg.max_substep(),
            0.25 / kappa
        )));
    }
    let level = params.drift_level();
    let sigma = params.vol_of_vol();
    let rho = params.rho;
    let rho_bar = (1.0 - rho * rho).max(0.0).sqrt();
    let log_s0 = params.s0.ln();
    let m = cfg.grid.len();
    let n = cfg.n_paths;

    let chunks: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(cfg.seed, c);
            let len = CHUNK.min(n - c * CHUNK);
            let mut log_s = Vec::with_capacity(len * m);
            let mut vbar = Vec::with_capacity(len * m);
            let mut v_end = Vec::with_capacity(len);
            for _ in 0..len {
                let (mut x, mut v, mut iv, mut t) = (log_s0, params.v0, 0.0, 0.0);
                for &s in &cfg.grid {
                    let dt = (s - t) / cfg.substeps as f64;
                    let sdt = dt.sqrt();
                    if s > t {
                        for _ in 0..cfg.substeps {
                            let vp = v.max(0.0);
                            let sv = vp.sqrt();
                            let z1: f64 = normal(&mut rng);
                            let z2: f64 = normal(&mut rng);
                            x += -0.5 * vp * dt + sv * sdt * (rho * z1 + rho_bar * z2);
                            iv += vp * dt;
                            v += (level - kappa * vp) * dt + sigma * sv * sdt * z1;
                        }
                    }
                    t = s;
                    log_s.push(x);
                    vbar.push(iv);
                }
                v_end.push(v);
            }
            (log_s, vbar, v_end)
        })
        .collect();
    let mut out = PathSample {
        grid: cfg.grid.clone(),
        log_s: Vec::with_capacity(n * m),
        vbar: Vec::with_capacity(n * m),
        v_end: Vec::with_capacity(n),
    };
    for (a, b, c) in chunks {
        out.log_s.extend(a);
        out.vbar.extend(b);
        out.v_end.extend(c);
    }
    Ok(out)
}

/// Sample mean of `exp(i u x + i v y)` and the standard errors of its real and
/// imaginary parts (packed as a complex number).
pub fn empirical_cf(samples: &[(f64, f64)], arg: FourierArg) -> Result<(C64, C64)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    let (mut sr, mut si, mut qr, mut qi) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in samples {
        let (s, c) = (arg.u * x + arg.v * y).sin_cos();
        sr += c;
        si += s;
        qr += c * c;
        qi += s * s;
    }
    let (mr, mi) = (sr / n, si / n);
    let se = |q: f64, m: f64| {
        if samples.len() < 2 {
            0.0
        } else {
            ((q / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt()
        }
    };
    Ok((C64::new(mr, mi), C64::new(se(qr, mr), se(qi, mi))))
}

/// Largest deviation in units of standard error, `max(|dRe|/seRe, |dIm|/seIm)`.
pub fn z_score(estimate: C64, se: C64, exact: C64) -> f64 {
    let d = estimate - exact;
    let part = |d: f64, s: f64| if s > 0.0 { d.abs() / s } else if d == 0.0 { 0.0 } else { f64::INFINITY };
    part(d.re, se.re).max(part(d.im, se.im))
}
