//! Convolution kernels and their L1 distance.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    /// `t^(H-1/2)`, `t > 0`.
    Fractional { h: f64 },
    /// `(t + eps)^(H-1/2)`, `t >= 0`.
    ShiftedFractional { h: f64, eps: f64 },
    /// `eps^-1 exp(-t/eps)`, `t >= 0`.
    Exponential { eps: f64 },
    /// `eps^(H-1/2) exp(-t/eps)`, `t >= 0`.
    ProxyExponential { h: f64, eps: f64 },
}

impl Kernel {
    pub fn eval(&self, t: f64) -> Result<f64> {
        match *self {
            Kernel::Fractional { h } => {
                if !(t > 0.0) {
                    return Err(Error::Domain { t });
                }
                Ok(t.powf(h - 0.5))
            }
            _ if !(t >= 0.0) => Err(Error::Domain { t }),
            Kernel::ShiftedFractional { h, eps } => Ok((t + eps).powf(h - 0.5)),
            Kernel::Exponential { eps } => Ok((-t / eps).exp() / eps),
            Kernel::ProxyExponential { h, eps } => Ok(eps.powf(h - 0.5) * (-t / eps).exp()),
        }
    }

    // Unchecked evaluation for interior quadrature nodes.
    fn at(&self, t: f64) -> f64 {
        match *self {
            Kernel::Fractional { h } => t.powf(h - 0.5),
            Kernel::ShiftedFractional { h, eps } => (t + eps).powf(h - 0.5),
            Kernel::Exponential { eps } => (-t / eps).exp() / eps,
            Kernel::ProxyExponential { h, eps } => eps.powf(h - 0.5) * (-t / eps).exp(),
        }
    }

    /// `int_0^t K(s) ds`.
    pub fn integral(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain { t });
        }
        Ok(match *self {
            Kernel::Fractional { h } => {
                if h <= -0.5 {
                    return Err(Error::NonIntegrableKernel { h });
                }
                t.powf(h + 0.5) / (h + 0.5)
            }
            Kernel::ShiftedFractional { h, eps } => {
                if h == -0.5 {
                    (t / eps).ln_1p()
                } else {
                    ((t + eps).powf(h + 0.5) - eps.powf(h + 0.5)) / (h + 0.5)
                }
            }
            Kernel::Exponential { eps } => -(-t / eps).exp_m1(),
            Kernel::ProxyExponential { h, eps } => -eps.powf(h + 0.5) * (-t / eps).exp_m1(),
        })
    }

    fn check(&self) -> Result<()> {
        match *self {
            Kernel::Fractional { h } if h <= -0.5 => Err(Error::NonIntegrableKernel { h }),
            Kernel::ShiftedFractional { eps, .. }
            | Kernel::Exponential { eps }
            | Kernel::ProxyExponential { eps, .. }
                if !(eps > 0.0) =>
            {
                Err(invalid("eps", "must be > 0"))
            }
            _ => Ok(()),
        }
    }
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Number of halving levels in the graded mesh; the innermost cell has width
/// `T * 2^-GRADED_LEVELS` and is integrated exactly.
const GRADED_LEVELS: usize = 40;

/// `int_0^T |k1(s) - k2(s)| ds` on a geometrically graded mesh (ratio 1/2)
/// with about `n` Gauss nodes, splitting cells at sign changes of the integrand.
pub fn l1_distance(k1: &Kernel, k2: &Kernel, horizon: f64, n: usize) -> Result<f64> {
    k1.check()?;
    k2.check()?;
    if n < 2 {
        return Err(invalid("n", "need at least 2 quadrature nodes"));
    }
    if !(horizon > 0.0) {
        return Err(invalid("T", "must be > 0"));
    }
    if k1 == k2 {
        return Ok(0.0);
    }
    let diff = |s: f64| k1.at(s) - k2.at(s);

    let first = horizon * 0.5f64.powi(GRADED_LEVELS as i32);
    let mut total = (k1.integral(first)? - k2.integral(first)?).abs();

    let per_level = (n / (5 * GRADED_LEVELS)).max(1);
    for level in 0..GRADED_LEVELS {
        let hi = horizon * 0.5f64.powi(level as i32);
        let lo = 0.5 * hi;
        let w = (hi - lo) / per_level as f64;
        for j in 0..per_level {
            let a = lo + j as f64 * w;
            let b = if j + 1 == per_level { hi } else { a + w };
            total += abs_integral(&diff, a, b);
        }
    }
    Ok(total)
}

/// L1 distance between the fractional kernel `K_H` and the proxy kernel
/// `eps^(H_hat-1/2) exp(-t/eps)` over `[0, T]`.
pub fn kernel_l1_distance(h: f64, h_hat: f64, eps: f64, horizon: f64, n: usize) -> Result<f64> {
    if h <= -0.5 {
        return Err(Error::NonIntegrableKernel { h });
    }
    l1_distance(
        &Kernel::Fractional { h },
        &Kernel::ProxyExponential { h: h_hat, eps },
        horizon,
        n,
    )
}

fn gauss5(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

fn abs_integral(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    let split = if fa.signum() != fm.signum() {
        Some(bisect_root(f, a, 0.5 * (a + b), fa))
    } else if fm.signum() != fb.signum() {
        Some(bisect_root(f, 0.5 * (a + b), b, fm))
    } else {
        None
    };
    match split {
        Some(r) => gauss5(f, a, r).abs() + gauss5(f, r, b).abs(),
        None => gauss5(f, a, b).abs(),
    }
}

fn bisect_root(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let sa = fa.signum();
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m).signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
