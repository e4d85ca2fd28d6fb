//! Calibration of the reversionary pair `(eps, H)` to a target call surface.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::{ReversionaryParams, RoughParams};
use crate::pricing::{bs_vega, smile, CosConfig, CosSlice, Model, VolSurface};

/// Maturities of the default calibration grid, in years.
pub const GRID_MATURITIES: [f64; 6] = [1.0 / 52.0, 2.0 / 52.0, 1.0 / 12.0, 0.25, 0.5, 1.0];

/// Default log-moneyness grid: 13 points on `[-0.2, 0.1]`.
pub fn grid_log_moneyness() -> Vec<f64> {
    (0..13).map(|j| -0.2 + 0.025 * j as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
    /// `1 / vega` at the target implied vol of each cell.
    InverseVega,
    Custom { weights: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    /// Fixed parameters; `eps` and `h` are the starting point.
    pub base: ReversionaryParams,
    pub weighting: Weighting,
    pub eps_bounds: (f64, f64),
    pub h_bounds: (f64, f64),
    pub max_iterations: usize,
    /// Stop when the simplex loss spread falls below `f_tol * (1 + |loss|)`
    /// and its diameter below `x_tol`.
    pub f_tol: f64,
    pub x_tol: f64,
    pub restarts: usize,
    /// Losses above this value are reported as non-converged.
    pub loss_threshold: f64,
    pub cos: CosConfig,
}

impl CalibrationConfig {
    pub fn new(base: ReversionaryParams) -> CalibrationConfig {
        CalibrationConfig {
            base,
            weighting: Weighting::Uniform,
            eps_bounds: (1e-6, 10.0),
            h_bounds: (-3.0, 1.0),
            max_iterations: 400,
            f_tol: 1e-10,
            x_tol: 1e-7,
            restarts: 3,
            loss_threshold: f64::INFINITY,
            cos: CosConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        let (e0, e1) = self.eps_bounds;
        let (h0, h1) = self.h_bounds;
        if !(0.0 < e0 && e0 < e1) {
            return Err(invalid("eps_bounds", "need 0 < lower < upper"));
        }
        if !(h0 < h1) {
            return Err(invalid("h_bounds", "need lower < upper"));
        }
        if let Weighting::Custom { weights } = &self.weighting {
            if weights.iter().flatten().any(|w| !(*w >= 0.0)) {
                return Err(invalid("weights", "must be nonnegative"));
            }
        }
        Ok(())
    }
}

/// Cell weights for `target` under the chosen weighting.
pub fn cell_weights(target: &VolSurface, weighting: &Weighting) -> Result<Vec<Vec<f64>>> {
    let (nt, nk) = (target.maturities.len(), target.log_moneyness.len());
    match weighting {
        Weighting::Uniform => Ok(vec![vec![1.0; nk]; nt]),
        Weighting::Custom { weights } => {
            if weights.len() != nt || weights.iter().any(|r| r.len() != nk) {
                return Err(Error::GridMismatch(format!("weights must be {nt} x {nk}")));
            }
            Ok(weights.clone())
        }
        Weighting::InverseVega => {
            let mut out = vec![vec![0.0; nk]; nt];
            for (i, &t) in target.maturities.iter().enumerate() {
                for (j, &k) in target.log_moneyness.iter().enumerate() {
                    let vol = target.vols[i][j].ok_or(Error::MissingCell {
                        maturity: t,
                        log_moneyness: k,
                    })?;
                    let strike = target.spot * k.exp();
                    out[i][j] = 1.0 / bs_vega(target.spot, strike, t, vol).max(1e-12);
                }
            }
            Ok(out)
        }
    }
}

/// `sum w_ij (C_target - C_candidate)^2` over two surfaces on the same grid.
pub fn loss_surfaces(target: &VolSurface, candidate: &VolSurface, weights: &[Vec<f64>]) -> Result<f64> {
    if target.maturities != candidate.maturities || target.log_moneyness != candidate.log_moneyness {
        return Err(Error::GridMismatch("target and candidate grids differ".into()));
    }
    if weights.len() != target.maturities.len()
        || weights.iter().any(|r| r.len() != target.log_moneyness.len())
    {
        return Err(Error::GridMismatch("weights do not match the grid".into()));
    }
    let mut acc = 0.0;
    for (i, &t) in target.maturities.iter().enumerate() {
        for (j, &k) in target.log_moneyness.iter().enumerate() {
            let missing = || Error::MissingCell {
                maturity: t,
                log_moneyness: k,
            };
            let a = target.prices[i][j].ok_or_else(missing)?;
            let b = candidate.prices[i][j].ok_or_else(missing)?;
            acc += weights[i][j] * (a - b) * (a - b);
        }
    }
    Ok(acc)
}

/// Weighted loss of the reversionary candidate against `target`.
pub fn loss(target: &VolSurface, candidate: &ReversionaryParams, cfg: &CalibrationConfig) -> Result<f64> {
    let weights = cell_weights(target, &cfg.weighting)?;
    loss_with_weights(target, candidate, &weights, &cfg.cos)
}

fn loss_with_weights(
    target: &VolSurface,
    candidate: &ReversionaryParams,
    weights: &[Vec<f64>],
    cos: &CosConfig,
) -> Result<f64> {
    if (candidate.s0 - target.spot).abs() > 1e-12 * target.spot {
        return Err(Error::GridMismatch("candidate spot differs from target spot".into()));
    }
    let model = Model::Reversionary { params: *candidate };
    let mut acc = 0.0;
    for (i, &t) in target.maturities.iter().enumerate() {
        let slice = CosSlice::new(&model, t, cos)?;
        for (j, &k) in target.log_moneyness.iter().enumerate() {
            let a = target.prices[i][j].ok_or(Error::MissingCell {
                maturity: t,
                log_moneyness: k,
            })?;
            let d = a - slice.call(k);
            acc += weights[i][j] * d * d;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub eps: f64,
    pub h: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub eps_hat: f64,
    pub h_hat: f64,
    pub loss: f64,
    pub initial_loss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

impl CalibrationResult {
    /// Trace CSV with columns `iteration,eps,h,loss`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,eps,h,loss\n");
        for r in &self.trace {
            let _ = writeln!(out, "{},{},{},{}", r.iteration, r.eps, r.h, r.loss);
        }
        out
    }
}

/// Penalty for candidates whose prices cannot be computed.
const FAILED_LOSS: f64 = 1e300;

/// Nelder-Mead on `(ln eps, H)` with the point projected into the bounds.
pub fn calibrate(target: &VolSurface, cfg: &CalibrationConfig) -> Result<CalibrationResult> {
    cfg.validate()?;
    if !target.missing_cells().is_empty() {
        return Err(Error::Precondition("target surface has missing cells".into()));
    }
    let weights = cell_weights(target, &cfg.weighting)?;
    let (le0, le1) = (cfg.eps_bounds.0.ln(), cfg.eps_bounds.1.ln());
    let project = |x: [f64; 2]| [x[0].clamp(le0, le1), x[1].clamp(cfg.h_bounds.0, cfg.h_bounds.1)];
    let objective = |x: [f64; 2]| -> f64 {
        let x = project(x);
        match cfg.base.with_eps_h(x[0].exp(), x[1]) {
            Ok(p) => loss_with_weights(target, &p, &weights, &cfg.cos)
                .ok()
                .filter(|v| v.is_finite())
                .unwrap_or(FAILED_LOSS),
            Err(_) => FAILED_LOSS,
        }
    };

    let start = project([cfg.base.eps.ln(), cfg.base.h]);
    let initial_loss = objective(start);
    let mut best = (start, initial_loss);
    let mut trace = vec![TraceRow {
        iteration: 0,
        eps: start[0].exp(),
        h: start[1],
        loss: initial_loss,
    }];
    let mut iterations = 0;
    let mut converged = false;
    for round in 0..=cfg.restarts {
        let budget = cfg.max_iterations.saturating_sub(iterations);
        if budget == 0 {
            break;
        }
        let scale = 0.5f64.powi(round as i32);
        let run = nelder_mead(&objective, best.0, [0.5 * scale, 0.1 * scale], budget, cfg.f_tol, cfg.x_tol, &project);
        for (n, (x, f)) in run.history.iter().enumerate() {
            trace.push(TraceRow {
                iteration: iterations + n + 1,
                eps: x[0].exp(),
                h: x[1],
                loss: *f,
            });
        }
        iterations += run.iterations;
        let improved = run.best.1 < best.1 * (1.0 - 1e-9);
        if run.best.1 <= best.1 {
            best = run.best;
        }
        converged = run.converged;
        if !improved && run.converged {
            break;
        }
    }
    let converged = converged && best.1 <= cfg.loss_threshold && best.1 < FAILED_LOSS;
    Ok(CalibrationResult {
        eps_hat: best.0[0].exp(),
        h_hat: best.0[1],
        loss: best.1,
        initial_loss,
        iterations,
        converged,
        trace,
    })
}

struct NmRun {
    best: ([f64; 2], f64),
    iterations: usize,
    converged: bool,
    history: Vec<([f64; 2], f64)>,
}

fn nelder_mead(
    f: &dyn Fn([f64; 2]) -> f64,
    start: [f64; 2],
    steps: [f64; 2],
    max_iter: usize,
    f_tol: f64,
    x_tol: f64,
    project: &dyn Fn([f64; 2]) -> [f64; 2],
) -> NmRun {
    let eval = |x: [f64; 2]| {
        let x = project(x);
        (x, f(x))
    };
    let mut simplex = [eval(start),
        eval([start[0] + steps[0], start[1]]),
        eval([start[0], start[1] + steps[1]])];
    let mut history = Vec::new();
    let mut converged = false;
    let mut it = 0;
    while it < max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (lo, hi) = (simplex[0].1, simplex[2].1);
        let diam = simplex[1..]
            .iter()
            .map(|p| (p.0[0] - simplex[0].0[0]).abs().max((p.0[1] - simplex[0].0[1]).abs()))
            .fold(0.0, f64::max);
        if (hi - lo).abs() <= f_tol * (1.0 + lo.abs()) && diam <= x_tol {
            converged = true;
            break;
        }
        it += 1;
        let centroid = [
            0.5 * (simplex[0].0[0] + simplex[1].0[0]),
            0.5 * (simplex[0].0[1] + simplex[1].0[1]),
        ];
        let worst = simplex[2];
        let along = |t: f64| [centroid[0] + t * (worst.0[0] - centroid[0]), centroid[1] + t * (worst.0[1] - centroid[1])];
        let refl = eval(along(-1.0));
        if refl.1 < simplex[0].1 {
            let exp = eval(along(-2.0));
            simplex[2] = if exp.1 < refl.1 { exp } else { refl };
        } else if refl.1 < simplex[1].1 {
            simplex[2] = refl;
        } else {
            let contr = if refl.1 < worst.1 {
                eval(along(-0.5))
            } else {
                eval(along(0.5))
            };
            if contr.1 < worst.1.min(refl.1) {
                simplex[2] = contr;
            } else {
                let b = simplex[0].0;
                for p in simplex.iter_mut().skip(1) {
                    *p = eval([b[0] + 0.5 * (p.0[0] - b[0]), b[1] + 0.5 * (p.0[1] - b[1])]);
                }
            }
        }
        let best = simplex.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        history.push(*best);
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    NmRun {
        best: simplex[0],
        iterations: it,
        converged,
        history,
    }
}

/// Call surface of the rough Heston target on the default grid with `S0 = 1`.
pub fn rough_target(rp: &RoughParams, n_steps: usize, cos: &CosConfig) -> Result<VolSurface> {
    let mut p = *rp;
    p.p0 = 1.0;
    smile(
        &Model::Rough { params: p, n_steps },
        &GRID_MATURITIES,
        &grid_log_moneyness(),
        cos,
    )
}
