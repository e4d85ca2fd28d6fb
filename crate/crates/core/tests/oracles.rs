#![allow(clippy::excessive_precision)]

use approx::assert_relative_eq;
use num_complex::Complex64 as C64;

use revheston::charfn::{cf_limit, cf_reversionary, FourierArg};
use revheston::pricing::{bs_call, cos_price, implied_vol, CosConfig, Model};
use revheston::riccati::explicit_terms;
use revheston::{Regime, ReversionaryParams};

fn fig6(eps: f64, h: f64) -> ReversionaryParams {
    ReversionaryParams::new(100.0, 0.3, 0.3, 0.8, -0.7, eps, h).unwrap()
}

/// `d` and `g` at u = 5, v = 100, eps = 21/252, H = -1/2, evaluated with
/// 50-digit arithmetic (mpmath) and frozen.
#[test]
fn explicit_terms_match_high_precision() {
    let t = explicit_terms(5.0, 100.0, &fig6(21.0 / 252.0, -0.5));
    let d = C64::new(8.0222015356084812812433131760947691762476067891778, -7.4293820387646693668119640160433259438577082958613);
    let g = C64::new(-1.0766316914439991401457467416311362682489254882567, 0.58137058935419148444683952490489057636283003082761);
    assert!((t.d - d).norm() < 1e-13 * d.norm(), "{}", t.d);
    assert!((t.g - g).norm() < 1e-13 * g.norm(), "{}", t.g);
}

#[test]
fn reversionary_cf_modulus_bounded_on_grid() {
    for &(eps, h) in &[(21.0 / 252.0, -0.5), (1e-4, 0.1), (1e-3, -0.9)] {
        let p = fig6(eps, h);
        for i in 0..=40 {
            for j in 0..=40 {
                let arg = FourierArg::new(-50.0 + 2.5 * i as f64, -50.0 + 2.5 * j as f64);
                let z = cf_reversionary(arg, 0.0, 1.0, 0.0, p.v0, &p).unwrap();
                assert!(z.norm() <= 1.0 + 1e-12);
            }
        }
    }
}

#[test]
fn gaussian_limit_price_is_black_scholes() {
    let p = fig6(1e-3, 0.1);
    let m = Model::Limit { params: p, regime: Regime::AboveHalf };
    let price = cos_price(&m, 100.0, 1.0, &CosConfig::default()).unwrap();
    assert_relative_eq!(price, bs_call(100.0, 100.0, 1.0, 0.3f64.sqrt()), max_relative = 1e-9);
    assert_relative_eq!(implied_vol(price, 100.0, 100.0, 1.0).unwrap(), 0.3f64.sqrt(), max_relative = 1e-8);
}

#[test]
fn tiny_eps_prices_match_nig_limit() {
    let p = fig6(1e-5 / 252.0, -0.5);
    let cos = CosConfig::default();
    for &k in &[80.0, 100.0, 120.0] {
        let a = cos_price(&Model::Reversionary { params: p }, k, 0.5, &cos).unwrap();
        let b = cos_price(&Model::Limit { params: p, regime: Regime::AtHalf }, k, 0.5, &cos).unwrap();
        assert!((a - b).abs() < 1e-4 * 100.0, "{a} vs {b}");
    }
    let arg = FourierArg::new(3.0, 0.0);
    let z = cf_reversionary(arg, 0.0, 0.5, 0.0, p.v0, &p).unwrap();
    assert!((z - cf_limit(arg, 0.5, &p, Regime::AtHalf).unwrap()).norm() < 1e-6);
}
