//! Python bindings: parameter classes, characteristic functions, COS pricing,
//! calibration and Monte Carlo.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use revheston::calibration::{calibrate as calibrate_surface, CalibrationConfig, Weighting};
use revheston::charfn::{self, FourierArg};
use revheston::mc::{self, CirScheme, SampleConfig};
use revheston::pricing::{self as pr, CosConfig, Model as CoreModel};
use revheston::{riccati, rough, Error, MeanReversion, Regime};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NumericFailure { .. } | Error::NonFiniteCf { .. } | Error::SingularArgument { .. } => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn regime(name: &str) -> PyResult<Regime> {
    Regime::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown regime {name:?}")))
}

#[pyclass(name = "ReversionaryParams", frozen, skip_from_py_object)]
struct PyReversionaryParams {
    inner: revheston::ReversionaryParams,
}

#[pymethods]
impl PyReversionaryParams {
    #[new]
    #[pyo3(signature = (s0, v0, theta, xi, rho, eps, h, mean_reversion = "rescaled"))]
    #[allow(clippy::too_many_arguments)]
    fn new(s0: f64, v0: f64, theta: f64, xi: f64, rho: f64, eps: f64, h: f64, mean_reversion: &str) -> PyResult<Self> {
        let mr = match mean_reversion {
            "rescaled" => MeanReversion::Rescaled,
            "proxy" => MeanReversion::Proxy,
            other => return Err(PyValueError::new_err(format!("unknown mean_reversion {other:?}"))),
        };
        let inner = revheston::ReversionaryParams::new(s0, v0, theta, xi, rho, eps, h)
            .and_then(|p| p.with_mean_reversion(mr))
            .map_err(py_err)?;
        Ok(PyReversionaryParams { inner })
    }

    #[getter]
    fn s0(&self) -> f64 {
        self.inner.s0
    }
    #[getter]
    fn v0(&self) -> f64 {
        self.inner.v0
    }
    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }
    #[getter]
    fn xi(&self) -> f64 {
        self.inner.xi
    }
    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho
    }
    #[getter]
    fn eps(&self) -> f64 {
        self.inner.eps
    }
    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }

    fn regime(&self) -> &'static str {
        self.inner.regime().name()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "ReversionaryParams(s0={}, v0={}, theta={}, xi={}, rho={}, eps={}, h={})",
            p.s0, p.v0, p.theta, p.xi, p.rho, p.eps, p.h
        )
    }
}

#[pyclass(name = "RoughParams", frozen, skip_from_py_object)]
struct PyRoughParams {
    inner: revheston::RoughParams,
}

#[pymethods]
impl PyRoughParams {
    #[new]
    #[pyo3(signature = (h, rho, xi, theta, u0, p0 = 1.0))]
    fn new(h: f64, rho: f64, xi: f64, theta: f64, u0: f64, p0: f64) -> PyResult<Self> {
        let inner = revheston::RoughParams::new(h, rho, xi, theta, u0, p0).map_err(py_err)?;
        Ok(PyRoughParams { inner })
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }
}

/// A pricing model: reversionary, limit, rough or Black-Scholes.
#[pyclass(name = "Model", frozen, skip_from_py_object)]
struct PyModel {
    inner: CoreModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn reversionary(params: &PyReversionaryParams) -> Self {
        PyModel {
            inner: CoreModel::Reversionary { params: params.inner },
        }
    }

    #[staticmethod]
    fn limit(params: &PyReversionaryParams, regime_name: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: CoreModel::Limit {
                params: params.inner,
                regime: regime(regime_name)?,
            },
        })
    }

    #[staticmethod]
    #[pyo3(signature = (params, n_steps = 256))]
    fn rough(params: &PyRoughParams, n_steps: usize) -> Self {
        PyModel {
            inner: CoreModel::Rough {
                params: params.inner,
                n_steps,
            },
        }
    }

    #[staticmethod]
    fn black_scholes(s0: f64, sigma: f64) -> Self {
        PyModel {
            inner: CoreModel::BlackScholes { s0, sigma },
        }
    }

    /// `E[exp(i u log(S_T/S0))]`.
    fn log_return_cf(&self, u: f64, maturity: f64) -> PyResult<Complex64> {
        pr::CfProvider::log_return_cf(&self.inner, u, maturity).map_err(py_err)
    }

    /// Call price by the COS method.
    #[pyo3(signature = (strike, maturity, n_terms = 2048))]
    fn price(&self, strike: f64, maturity: f64, n_terms: usize) -> PyResult<f64> {
        let cfg = CosConfig {
            n_terms,
            ..CosConfig::default()
        };
        pr::cos_price(&self.inner, strike, maturity, &cfg).map_err(py_err)
    }

    /// `(prices, vols)` on a maturity by log-moneyness grid; missing cells are `None`.
    #[allow(clippy::type_complexity)]
    fn smile(&self, maturities: Vec<f64>, log_moneyness: Vec<f64>) -> PyResult<(Vec<Vec<Option<f64>>>, Vec<Vec<Option<f64>>>)> {
        let s = pr::smile(&self.inner, &maturities, &log_moneyness, &CosConfig::default()).map_err(py_err)?;
        Ok((s.prices, s.vols))
    }

    #[pyo3(signature = (maturity, dk = 0.01))]
    fn atm_skew(&self, maturity: f64, dk: f64) -> PyResult<f64> {
        pr::atm_skew(&self.inner, maturity, dk, &CosConfig::default()).map_err(py_err)
    }
}

#[pyfunction]
fn cf_reversionary(params: &PyReversionaryParams, u: f64, v: f64, maturity: f64) -> PyResult<Complex64> {
    let p = &params.inner;
    charfn::cf_reversionary(FourierArg::new(u, v), 0.0, maturity, p.s0.ln(), p.v0, p).map_err(py_err)
}

#[pyfunction]
fn cf_limit(params: &PyReversionaryParams, u: f64, v: f64, maturity: f64, regime_name: &str) -> PyResult<Complex64> {
    charfn::cf_limit(FourierArg::new(u, v), maturity, &params.inner, regime(regime_name)?).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (params, u, maturity, n_steps = 256))]
fn cf_rough(params: &PyRoughParams, u: f64, maturity: f64, n_steps: usize) -> PyResult<Complex64> {
    rough::cf_rough(Complex64::new(0.0, u), &params.inner, maturity, n_steps).map_err(py_err)
}

/// `(d, g)` of the closed-form marginal.
#[pyfunction]
fn explicit_terms(params: &PyReversionaryParams, u: f64, v: f64) -> (Complex64, Complex64) {
    let t = riccati::explicit_terms(u, v, &params.inner);
    (t.d, t.g)
}

#[pyfunction]
fn implied_vol(price: f64, s0: f64, strike: f64, maturity: f64) -> PyResult<f64> {
    pr::implied_vol(price, s0, strike, maturity).map_err(py_err)
}

/// Fit `(eps, H)` of `base` to the surface of `target` on the given grid.
#[pyfunction]
#[pyo3(signature = (target, base, maturities, log_moneyness, weighting = "uniform"))]
fn calibrate<'py>(
    py: Python<'py>,
    target: &PyModel,
    base: &PyReversionaryParams,
    maturities: Vec<f64>,
    log_moneyness: Vec<f64>,
    weighting: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let surface = pr::smile(&target.inner, &maturities, &log_moneyness, &CosConfig::default()).map_err(py_err)?;
    let mut cfg = CalibrationConfig::new(base.inner);
    cfg.weighting = match weighting {
        "uniform" => Weighting::Uniform,
        "inverse_vega" => Weighting::InverseVega,
        other => return Err(PyValueError::new_err(format!("unknown weighting {other:?}"))),
    };
    let r = calibrate_surface(&surface, &cfg).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("eps_hat", r.eps_hat)?;
    out.set_item("H_hat", r.h_hat)?;
    out.set_item("loss", r.loss)?;
    out.set_item("iterations", r.iterations)?;
    out.set_item("converged", r.converged)?;
    Ok(out)
}

/// `(log S_T, Vbar_T)` for each Euler path.
#[pyfunction]
#[pyo3(signature = (params, n_paths, maturity, substeps, seed = 0))]
fn simulate_reversionary(
    params: &PyReversionaryParams,
    n_paths: usize,
    maturity: f64,
    substeps: usize,
    seed: u64,
) -> PyResult<Vec<(f64, f64)>> {
    let cfg = SampleConfig {
        n_paths,
        grid: vec![maturity],
        seed,
        scheme: CirScheme::FullTruncationEuler,
        substeps,
    };
    Ok(mc::simulate_reversionary(&params.inner, &cfg).map_err(py_err)?.at(0))
}

/// `(estimate, standard_error)` of `E[exp(i u x + i v y)]`.
#[pyfunction]
fn empirical_cf(samples: Vec<(f64, f64)>, u: f64, v: f64) -> PyResult<(Complex64, Complex64)> {
    mc::empirical_cf(&samples, FourierArg::new(u, v)).map_err(py_err)
}

#[pymodule]
fn revheston_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyReversionaryParams>()?;
    m.add_class::<PyRoughParams>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(cf_reversionary, m)?)?;
    m.add_function(wrap_pyfunction!(cf_limit, m)?)?;
    m.add_function(wrap_pyfunction!(cf_rough, m)?)?;
    m.add_function(wrap_pyfunction!(explicit_terms, m)?)?;
    m.add_function(wrap_pyfunction!(implied_vol, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_reversionary, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_cf, m)?)?;
    Ok(())
}
