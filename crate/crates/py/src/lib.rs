use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use hmass::chain::PolyhedralChain;
use hmass::hfunc::HSpec;
use hmass::rectifiable::RectifiableCurrent;
use hmass::{experiments, flat, functionals, slicing};

fn to_py(e: hmass::Error) -> PyErr {
    match e.exit_code() {
        4 => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "Chain", frozen)]
struct PyChain {
    inner: PolyhedralChain,
}

#[pymethods]
impl PyChain {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyChain { inner: PolyhedralChain::from_json(text).map_err(to_py)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn mass(&self) -> PyResult<f64> {
        self.inner.mass().map_err(to_py)
    }

    fn boundary(&self) -> PyResult<Self> {
        Ok(PyChain { inner: self.inner.boundary().map_err(to_py)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "HSpec", frozen)]
struct PyHSpec {
    inner: HSpec,
}

#[pymethods]
impl PyHSpec {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyHSpec { inner: HSpec::from_json(text).map_err(to_py)? })
    }

    #[staticmethod]
    fn abs() -> Self {
        PyHSpec { inner: HSpec::abs() }
    }

    #[staticmethod]
    fn power(alpha: f64) -> PyResult<Self> {
        Ok(PyHSpec { inner: HSpec::power(alpha).map_err(to_py)? })
    }

    #[staticmethod]
    fn affine_indicator(beta: f64) -> PyResult<Self> {
        Ok(PyHSpec { inner: HSpec::affine_indicator(beta).map_err(to_py)? })
    }

    fn eval(&self, theta: f64) -> f64 {
        self.inner.eval(theta)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }
}

#[pyfunction]
fn phi_h(chain: &PyChain, h: &PyHSpec) -> PyResult<f64> {
    functionals::phi_h(&chain.inner, &h.inner).map_err(to_py)
}

#[pyfunction]
fn flat_zero(chain: &PyChain) -> PyResult<f64> {
    let z = chain.inner.to_zero_chain().map_err(to_py)?;
    flat::flat_zero(&z).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (chain, level=2))]
fn simplicial_flat_upper(chain: &PyChain, level: u32) -> PyResult<f64> {
    Ok(flat::simplicial_flat_upper(&chain.inner, level).map_err(to_py)?.value)
}

#[pyfunction]
#[pyo3(signature = (a, b, level=2))]
fn flat_distance_upper(a: &PyChain, b: &PyChain, level: u32) -> PyResult<f64> {
    Ok(flat::flat_distance_upper(&a.inner, &b.inner, level).map_err(to_py)?.value)
}

/// Returns `(raw, std_error)`.
#[pyfunction]
#[pyo3(signature = (chain, h, samples=10_000, seed=0))]
fn intgeo_estimate(chain: &PyChain, h: &PyHSpec, samples: usize, seed: u64) -> PyResult<(f64, f64)> {
    let e = slicing::intgeo_estimate(&chain.inner, &h.inner, samples, seed, None).map_err(to_py)?;
    Ok((e.raw, e.std_error))
}

/// Returns `(c, std_error)`.
#[pyfunction]
#[pyo3(signature = (n, m, samples=10_000, seed=0))]
fn calibrate_constant(n: usize, m: usize, samples: usize, seed: u64) -> PyResult<(f64, f64)> {
    let c = slicing::calibrate_constant(n, m, samples, seed).map_err(to_py)?;
    Ok((c.c, c.std_error))
}

/// `(i, segments, theta, mass, phi_h, flat_cauchy)`.
type Row = (u32, u64, f64, f64, f64, f64);

#[pyfunction]
fn counterexample(h: &PyHSpec, i_max: u32) -> PyResult<Vec<Row>> {
    let rows = experiments::counterexample(&h.inner, i_max).map_err(to_py)?;
    Ok(rows.into_iter().map(|r| (r.i, r.segments, r.theta, r.mass, r.phi_h, r.flat_cauchy)).collect())
}

/// Relaxation run on a patch given as JSON; returns the report as JSON.
#[pyfunction]
fn relax(patch_json: &str, h: &PyHSpec, eps: f64) -> PyResult<String> {
    let r = RectifiableCurrent::from_json(patch_json, None).map_err(to_py)?;
    let (_, outcome) = experiments::relax(&r, &h.inner, eps).map_err(to_py)?;
    serde_json::to_string(&outcome).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn pyhmass(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChain>()?;
    m.add_class::<PyHSpec>()?;
    m.add_function(wrap_pyfunction!(phi_h, m)?)?;
    m.add_function(wrap_pyfunction!(flat_zero, m)?)?;
    m.add_function(wrap_pyfunction!(simplicial_flat_upper, m)?)?;
    m.add_function(wrap_pyfunction!(flat_distance_upper, m)?)?;
    m.add_function(wrap_pyfunction!(intgeo_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_constant, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample, m)?)?;
    m.add_function(wrap_pyfunction!(relax, m)?)?;
    Ok(())
}
