//! Complex helpers with the branch conventions used throughout the crate.
//!
//! Square roots are principal with argument in (-pi/2, pi/2]: on the negative
//! real axis the root with non-negative imaginary part is returned, whatever
//! the sign of the zero imaginary part.

use num_complex::Complex64;

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Principal square root, tie-break `Im >= 0` on the branch cut.
#[inline]
pub fn psqrt(z: C64) -> C64 {
    if z.im == 0.0 {
        if z.re >= 0.0 {
            C64::new(z.re.sqrt(), 0.0)
        } else {
            C64::new(0.0, (-z.re).sqrt())
        }
    } else {
        z.sqrt()
    }
}

/// `exp(z) - 1` without cancellation for small `|z|`.
pub fn expm1(z: C64) -> C64 {
    if z.norm() > 0.5 {
        return z.exp() - 1.0;
    }
    let half_sin = (0.5 * z.im).sin();
    let re = z.re.exp_m1() * z.im.cos() - 2.0 * half_sin * half_sin;
    let im = z.re.exp() * z.im.sin();
    C64::new(re, im)
}

/// Principal `ln(1 + z)` without cancellation for small `|z|`.
pub fn ln1p(z: C64) -> C64 {
    let w = 1.0 + z;
    if z.norm() > 0.5 {
        return w.ln();
    }
    let re = 0.5 * (2.0 * z.re + z.re * z.re + z.im * z.im).ln_1p();
    C64::new(re, w.im.atan2(w.re))
}

/// `(1 - exp(-z t)) / z`, continuous at `z = 0` where it equals `t`.
pub fn one_minus_exp_over(z: C64, t: f64) -> C64 {
    let zt = z * t;
    if zt.norm() < 1e-8 {
        return t * (1.0 - 0.5 * zt);
    }
    -expm1(-zt) / z
}

#[inline]
pub fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
