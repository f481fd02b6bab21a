//! Python bindings: state pairs, observables, discernability, the saturation
//! checks, Monte Carlo experiments and the numerical search.

use discern_core::{self as core, Complex64, Error, HermitianOperator, StatePair};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(discern, InvariantViolation, PyRuntimeError, "A numerical invariant was violated.");

fn err(e: Error) -> PyErr {
    match e {
        Error::InvariantViolation(_) => InvariantViolation::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn vector(entries: Vec<Complex64>) -> PyResult<core::ComplexVector> {
    core::ComplexVector::new(entries).map_err(err)
}

/// Two unit vectors with `<v, w>` made real and non-negative.
#[pyclass(name = "StatePair", module = "discern", frozen)]
pub struct PyStatePair {
    inner: StatePair,
}

#[pymethods]
impl PyStatePair {
    #[new]
    fn new(v: Vec<Complex64>, w: Vec<Complex64>) -> PyResult<Self> {
        let inner = core::make_state_pair(vector(v)?, vector(w)?).map_err(err)?;
        Ok(Self { inner })
    }

    /// `v = e0`, `w = cos(theta) e0 + sin(theta) e1` in `C^dim`.
    #[staticmethod]
    #[pyo3(signature = (theta, dim = 2))]
    fn from_angle(theta: f64, dim: usize) -> PyResult<Self> {
        Ok(Self { inner: StatePair::from_angle(theta, dim).map_err(err)? })
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn orthogonal(&self) -> bool {
        self.inner.is_orthogonal()
    }

    #[getter]
    fn overlap(&self) -> f64 {
        self.inner.overlap()
    }

    #[getter]
    fn v(&self) -> Vec<Complex64> {
        self.inner.v().entries().to_vec()
    }

    #[getter]
    fn w(&self) -> Vec<Complex64> {
        self.inner.w().entries().to_vec()
    }

    fn embed(&self, dim: usize) -> PyResult<Self> {
        Ok(Self { inner: self.inner.embed(dim).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("StatePair(theta={}, dim={})", self.inner.theta(), self.inner.dim())
    }
}

/// A Hermitian matrix.
#[pyclass(name = "Observable", module = "discern", frozen)]
pub struct PyObservable {
    inner: HermitianOperator,
}

#[pymethods]
impl PyObservable {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(Self { inner: HermitianOperator::from_rows(rows).map_err(err)? })
    }

    #[staticmethod]
    fn diag(values: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: HermitianOperator::diag(&values).map_err(err)? })
    }

    /// Member of the family reaching `tan(theta)`; `alpha` must lie in `[theta, pi - theta]`.
    #[staticmethod]
    #[pyo3(signature = (pair, alpha, scale = 1.0, shift = 0.0))]
    fn saturating(pair: PyRef<'_, PyStatePair>, alpha: f64, scale: f64, shift: f64) -> PyResult<Self> {
        let inner = core::saturating_observable(&pair.inner, alpha, scale, shift).map_err(err)?;
        Ok(Self { inner })
    }

    /// Same construction for any `alpha`, without the range check.
    #[staticmethod]
    fn rotated(pair: PyRef<'_, PyStatePair>, alpha: f64) -> Self {
        Self { inner: core::rotated_observable(&pair.inner, alpha) }
    }

    /// `(|w><w| - |v><v|) / sin(theta)`.
    #[staticmethod]
    fn simple_optimal(pair: PyRef<'_, PyStatePair>) -> Self {
        Self { inner: core::simple_optimal(&pair.inner) }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let n = self.inner.dim();
        (0..n).map(|i| (0..n).map(|j| self.inner.entry(i, j)).collect()).collect()
    }

    /// Distinct eigenvalues in increasing order.
    fn eigenvalues(&self) -> Vec<f64> {
        core::eigendecompose(&self.inner).eigenvalues
    }

    fn expectation(&self, psi: Vec<Complex64>) -> PyResult<f64> {
        core::expectation(&self.inner, &vector(psi)?).map_err(err)
    }

    fn uncertainty(&self, psi: Vec<Complex64>) -> PyResult<f64> {
        core::uncertainty(&self.inner, &vector(psi)?).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Observable(dim={})", self.inner.dim())
    }
}

/// Means, uncertainties and `delta` (a float, `inf`, or `None` when undefined).
#[pyfunction]
fn discernability<'py>(
    py: Python<'py>,
    a: PyRef<'_, PyObservable>,
    pair: PyRef<'_, PyStatePair>,
) -> PyResult<Bound<'py, PyDict>> {
    let s = core::discernability(&a.inner, &pair.inner).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("mean_v", s.mean_v)?;
    d.set_item("mean_w", s.mean_w)?;
    d.set_item("sigma_v", s.sigma_v)?;
    d.set_item("sigma_w", s.sigma_w)?;
    d.set_item("delta", s.delta.value())?;
    Ok(d)
}

/// `tan(theta)`, infinite for orthogonal states.
#[pyfunction]
fn fleming_bound(pair: PyRef<'_, PyStatePair>) -> PyResult<f64> {
    match core::fleming_bound(&pair.inner) {
        Err(Error::BoundInfinite) => Ok(f64::INFINITY),
        other => other.map_err(err),
    }
}

#[pyfunction]
fn qmie_gap(a: PyRef<'_, PyObservable>, pair: PyRef<'_, PyStatePair>) -> PyResult<f64> {
    core::qmie_gap(&a.inner, pair.inner.v(), pair.inner.w()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (a, pair, tol = core::tolerance::SATURATION))]
fn check_saturation<'py>(
    py: Python<'py>,
    a: PyRef<'_, PyObservable>,
    pair: PyRef<'_, PyStatePair>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = core::check_saturation(&a.inner, &pair.inner, tol).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("saturated", r.saturated)?;
    d.set_item("stabilizes_subspace", r.stabilizes_subspace)?;
    d.set_item("subspace_residual", r.subspace_residual)?;
    d.set_item("lambda", r.lambda.map(|l| Complex64::new(l[0], l[1])))?;
    d.set_item("lambda_imag_residual", r.lambda_imag_residual)?;
    d.set_item("lambda_in_hull", r.lambda_in_hull)?;
    d.set_item("hull_slack", r.hull_slack)?;
    d.set_item("qmie_gap", r.qmie_gap)?;
    d.set_item("delta", r.delta.value())?;
    d.set_item("bound", r.bound)?;
    d.set_item("orthogonal", r.orthogonal)?;
    d.set_item("tolerance", r.tolerance)?;
    Ok(d)
}

#[pyfunction]
fn min_error_prob(theta: f64, p1: f64) -> PyResult<f64> {
    core::min_error_prob(theta, p1).map_err(err)
}

#[pyfunction]
fn unambiguous_max(theta: f64, p1: f64) -> PyResult<f64> {
    core::unambiguous_max(theta, p1).map_err(err)
}

/// `(value, regime)` with regime `"balanced"` or `"dominant"`.
#[pyfunction]
fn unambiguous_optimum(cos_theta: f64, p1: f64) -> PyResult<(f64, &'static str)> {
    let u = core::unambiguous_optimum(cos_theta, p1).map_err(err)?;
    let regime = match u.regime {
        core::UnambiguousRegime::Balanced => "balanced",
        core::UnambiguousRegime::Dominant => "dominant",
    };
    Ok((u.value, regime))
}

#[pyfunction]
fn chebyshev_bound(delta: f64, n: u64) -> PyResult<f64> {
    core::chebyshev_bound(delta, n).map_err(err)
}

/// Exact `P(|mean of n draws - mean| >= t)` by enumeration.
#[pyfunction]
fn exact_tail(values: Vec<f64>, probs: Vec<f64>, t: f64, n: u32) -> PyResult<f64> {
    let dist = core::OutcomeDistribution::new(values, probs).map_err(err)?;
    core::exact_tail(&dist, t, n).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (a, pair, p1, n, trials, seed = 0))]
fn run_experiment<'py>(
    py: Python<'py>,
    a: PyRef<'_, PyObservable>,
    pair: PyRef<'_, PyStatePair>,
    p1: f64,
    n: u64,
    trials: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let (op, sp) = (a.inner.clone(), pair.inner.clone());
    let r = py.detach(move || core::run_experiment(&op, &sp, p1, n, trials, seed)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("n", r.n)?;
    d.set_item("trials", r.trials)?;
    d.set_item("p1", r.p1)?;
    d.set_item("errors", r.errors)?;
    d.set_item("empirical_error", r.empirical_error)?;
    d.set_item("cheb_bound", r.cheb_bound)?;
    d.set_item("delta", r.delta)?;
    d.set_item("x0", r.x0)?;
    d.set_item("seed", r.seed)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (pair, dim = 2, restarts = 16, max_evals = 20_000, seed = 7))]
fn maximize_delta<'py>(
    py: Python<'py>,
    pair: PyRef<'_, PyStatePair>,
    dim: usize,
    restarts: usize,
    max_evals: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let config = core::SearchConfig { restarts, max_evals, seed, ..core::SearchConfig::default() };
    let sp = pair.inner.clone();
    let r = py.detach(move || core::maximize_delta(&sp, dim, &config)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("best_value", r.best_value)?;
    d.set_item("bound", r.bound)?;
    d.set_item("best_operator", PyObservable { inner: r.best_operator })?;
    d.set_item("best_restart", r.best_restart)?;
    d.set_item("restarts", r.restarts)?;
    d.set_item("evaluations", r.evaluations)?;
    d.set_item("converged", r.converged)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (pair, p1, grid_resolution = 64))]
fn maximize_detection(py: Python<'_>, pair: PyRef<'_, PyStatePair>, p1: f64, grid_resolution: usize) -> PyResult<f64> {
    let sp = pair.inner.clone();
    py.detach(move || core::maximize_detection(&sp, p1, grid_resolution)).map_err(err)
}

/// Adds every class, function and exception to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStatePair>()?;
    m.add_class::<PyObservable>()?;
    m.add("InvariantViolation", m.py().get_type::<InvariantViolation>())?;
    m.add_function(wrap_pyfunction!(discernability, m)?)?;
    m.add_function(wrap_pyfunction!(fleming_bound, m)?)?;
    m.add_function(wrap_pyfunction!(qmie_gap, m)?)?;
    m.add_function(wrap_pyfunction!(check_saturation, m)?)?;
    m.add_function(wrap_pyfunction!(min_error_prob, m)?)?;
    m.add_function(wrap_pyfunction!(unambiguous_max, m)?)?;
    m.add_function(wrap_pyfunction!(unambiguous_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(chebyshev_bound, m)?)?;
    m.add_function(wrap_pyfunction!(exact_tail, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(maximize_delta, m)?)?;
    m.add_function(wrap_pyfunction!(maximize_detection, m)?)?;
    Ok(())
}

#[pymodule(name = "discern")]
fn discern_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
