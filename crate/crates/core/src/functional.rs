//! Step functionals `(f, g)` driving the Riccati equations.

use crate::cmath::{c, C64};
use crate::error::{invalid, Result};

/// Piecewise-constant pair `(f, g)` on `[0, T]`, indexed by the Riccati time
/// variable. Segment `k` covers `[breaks[k], breaks[k + 1])`, the last segment
/// also covers `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunctional {
    breaks: Vec<f64>,
    values: Vec<(C64, C64)>,
    purely_imaginary: bool,
}

impl PiecewiseFunctional {
    /// `breaks` holds `0 = b_0 < b_1 < ... < b_m = T`; `values` has `m` entries.
    pub fn new(breaks: Vec<f64>, values: Vec<(C64, C64)>) -> Result<Self> {
        if breaks.len() < 2 || values.len() + 1 != breaks.len() {
            return Err(invalid("breaks", "need m + 1 breakpoints for m segment values"));
        }
        if breaks[0] != 0.0 {
            return Err(invalid("breaks", "first breakpoint must be 0"));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("breaks", "breakpoints must be strictly increasing"));
        }
        if values.iter().any(|(f, g)| !crate::cmath::is_finite(*f) || !crate::cmath::is_finite(*g)) {
            return Err(invalid("values", "segment values must be finite"));
        }
        let purely_imaginary = values.iter().all(|(f, g)| f.re == 0.0 && g.re == 0.0);
        Ok(PiecewiseFunctional {
            breaks,
            values,
            purely_imaginary,
        })
    }

    pub fn constant(f: C64, g: C64, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(invalid("T", "must be > 0"));
        }
        Self::new(vec![0.0, horizon], vec![(f, g)])
    }

    /// `(f, g) = (i u, i v)` on `[0, T]`.
    pub fn fourier(u: f64, v: f64, horizon: f64) -> Result<Self> {
        Self::constant(c(0.0, u), c(0.0, v), horizon)
    }

    pub fn horizon(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[(C64, C64)] {
        &self.values
    }

    pub fn is_purely_imaginary(&self) -> bool {
        self.purely_imaginary
    }

    /// Segments as `(start, end, f, g)`.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, C64, C64)> + '_ {
        self.breaks
            .windows(2)
            .zip(self.values.iter())
            .map(|(w, (f, g))| (w[0], w[1], *f, *g))
    }

    /// Right-continuous evaluation; times past `T` return the last segment.
    pub fn eval(&self, t: f64) -> (C64, C64) {
        let idx = self.segment_index(t);
        self.values[idx]
    }

    pub fn segment_index(&self, t: f64) -> usize {
        // Number of interior breakpoints <= t.
        let interior = &self.breaks[1..self.breaks.len() - 1];
        interior.partition_point(|&b| b <= t)
    }

    /// `h(s) = g(s) + (f(s)^2 - f(s)) / 2` on each segment.
    pub fn h_values(&self) -> impl Iterator<Item = C64> + '_ {
        self.values.iter().map(|(f, g)| g + 0.5 * (f * f - f))
    }

    /// `sup_s |g(s) + (f(s)^2 - f(s))/2|`.
    pub fn sup_h(&self) -> f64 {
        self.h_values().map(|h| h.norm()).fold(0.0, f64::max)
    }
}

/// Step functional encoding the joint law of `(log S_{t_k}/S0, Vbar_{t_k})`
/// at observation times `0 < t_1 < ... < t_d <= T` with weights `(u_k, v_k)`.
///
/// In Riccati time `s`, `f(s) = i (u_k + ... + u_d)` when `T - s` falls in
/// `[t_{k-1}, t_k)`, and zero when `T - s >= t_d`.
pub fn make_finite_dim_functional(
    times: &[f64],
    coeffs: &[(f64, f64)],
    horizon: f64,
) -> Result<PiecewiseFunctional> {
    if times.is_empty() || times.len() != coeffs.len() {
        return Err(invalid("times", "need one (u, v) pair per observation time"));
    }
    if !(times[0] > 0.0) {
        return Err(invalid("times", "first observation time must be > 0"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("times", "observation times must be strictly increasing"));
    }
    if *times.last().unwrap() > horizon {
        return Err(invalid("times", "observation times must not exceed T"));
    }
    let d = times.len();
    // Tail sums ubar_k = u_k + ... + u_d.
    let mut tails = vec![(0.0, 0.0); d];
    let mut acc = (0.0, 0.0);
    for k in (0..d).rev() {
        acc.0 += coeffs[k].0;
        acc.1 += coeffs[k].1;
        tails[k] = acc;
    }

    // Riccati-time segments, from s = 0 (calendar T) backwards in calendar time.
    let mut breaks = vec![0.0];
    let mut values = Vec::with_capacity(d + 1);
    let t_last = times[d - 1];
    if t_last < horizon {
        breaks.push(horizon - t_last);
        values.push((c(0.0, 0.0), c(0.0, 0.0)));
    }
    for k in (0..d).rev() {
        let start = if k == 0 { 0.0 } else { times[k - 1] };
        breaks.push(horizon - start);
        values.push((c(0.0, tails[k].0), c(0.0, tails[k].1)));
    }
    PiecewiseFunctional::new(breaks, values)
}
