//! Python bindings for the qubit discrimination solver.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ::qubit_discrimination as qd;
use qd::cli::{self, Scenario};
use qd::{BlochVector, SolverOptions};

fn to_py(e: qd::Error) -> PyErr {
    match e {
        qd::Error::NoConvergence { .. }
        | qd::Error::InfeasibleWeights { .. }
        | qd::Error::InfeasibleCertificate(_)
        | qd::Error::CertificateFailure(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn options(seed: Option<u64>, tol: Option<f64>) -> SolverOptions {
    let mut opts = SolverOptions::default();
    if let Some(seed) = seed {
        opts.seed = seed;
    }
    if let Some(tol) = tol {
        opts.tol.cert = tol;
    }
    opts
}

#[pyclass(name = "QubitState", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyQubitState(qd::QubitState);

#[pymethods]
impl PyQubitState {
    #[new]
    fn new(x: f64, y: f64, z: f64) -> PyResult<Self> {
        qd::QubitState::from_xyz(x, y, z).map(Self).map_err(to_py)
    }

    #[getter]
    fn bloch(&self) -> [f64; 3] {
        self.0.bloch().to_array()
    }

    #[getter]
    fn purity(&self) -> f64 {
        self.0.purity()
    }

    fn __repr__(&self) -> String {
        let [x, y, z] = self.bloch();
        format!("QubitState({x}, {y}, {z})")
    }
}

#[pyclass(name = "Ensemble", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyEnsemble(qd::Ensemble);

#[pymethods]
impl PyEnsemble {
    /// Bloch vectors with optional priors; equal priors when omitted.
    #[new]
    #[pyo3(signature = (bloch_vectors, priors = None))]
    fn new(bloch_vectors: Vec<[f64; 3]>, priors: Option<Vec<f64>>) -> PyResult<Self> {
        let n = bloch_vectors.len();
        let priors = priors.unwrap_or_else(|| vec![1.0 / n.max(1) as f64; n]);
        qd::Ensemble::from_bloch(&bloch_vectors, priors).map(Self).map_err(to_py)
    }

    /// Builds an ensemble from a scenario document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        cli::parse_scenario(text).and_then(|s| s.ensemble()).map(Self).map_err(to_py)
    }

    /// Built-in instance such as `"polyhedron:4"` or `"random:5:42"`.
    #[staticmethod]
    fn generate(spec: &str) -> PyResult<Self> {
        cli::generate(spec).and_then(|s| s.ensemble()).map(Self).map_err(to_py)
    }

    #[getter]
    fn states(&self) -> Vec<PyQubitState> {
        self.0.states().iter().copied().map(PyQubitState).collect()
    }

    #[getter]
    fn bloch_vectors(&self) -> Vec<[f64; 3]> {
        self.0.states().iter().map(|s| s.bloch().to_array()).collect()
    }

    #[getter]
    fn priors(&self) -> Vec<f64> {
        self.0.priors().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "Solution", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySolution(qd::Solution);

#[pymethods]
impl PySolution {
    #[getter]
    fn p_guess(&self) -> f64 {
        self.0.p_guess
    }

    #[getter]
    fn k0(&self) -> f64 {
        self.0.certificate.k0
    }

    #[getter]
    fn k(&self) -> [f64; 3] {
        self.0.certificate.k.to_array()
    }

    #[getter]
    fn support(&self) -> Vec<usize> {
        self.0.support.clone()
    }

    /// `(m, w)` per outcome, with `M = m (I + w·σ)/2`.
    #[getter]
    fn povm(&self) -> Vec<(f64, [f64; 3])> {
        self.0.povm.elements.iter().map(|e| (e.m, e.w.to_array())).collect()
    }

    /// `(r, u, pure, degenerate)` per state.
    #[getter]
    fn complementary(&self) -> Vec<(f64, [f64; 3], bool, bool)> {
        self.0
            .certificate
            .complementary
            .iter()
            .map(|c| (c.r, c.u.to_array(), c.pure, c.degenerate))
            .collect()
    }

    #[getter]
    fn residuals<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        kkt_dict(py, &self.0.certificate.residuals)
    }

    #[getter]
    fn path(&self) -> &'static str {
        match self.0.diagnostics.path {
            qd::SolverPath::EqualPriorBall => "equal-prior-ball",
            qd::SolverPath::MinimaxExact => "minimax-exact",
            qd::SolverPath::MinimaxIterative => "minimax-iterative",
        }
    }

    fn to_json(&self) -> String {
        cli::to_json(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Solution(p_guess={}, support={:?})", self.0.p_guess, self.0.support)
    }
}

fn kkt_dict<'py>(py: Python<'py>, r: &qd::KktResiduals) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("stationarity", r.stationarity)?;
    d.set_item("slackness", r.slackness)?;
    d.set_item("feasibility", r.feasibility)?;
    d.set_item("duality_gap", r.duality_gap)?;
    d.set_item("completeness", r.completeness)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (ensemble, seed = None, tol = None))]
fn solve(ensemble: &PyEnsemble, seed: Option<u64>, tol: Option<f64>) -> PyResult<PySolution> {
    qd::solve(&ensemble.0, &options(seed, tol)).map(PySolution).map_err(to_py)
}

#[pyfunction]
fn helstrom(ensemble: &PyEnsemble) -> PyResult<f64> {
    qd::helstrom(&ensemble.0).map_err(to_py)
}

#[pyfunction]
fn kkt_verify<'py>(py: Python<'py>, ensemble: &PyEnsemble, solution: &PySolution) -> PyResult<Bound<'py, PyDict>> {
    kkt_dict(py, &qd::kkt_verify(&ensemble.0, &solution.0))
}

#[pyfunction]
fn primal_value(ensemble: &PyEnsemble, solution: &PySolution) -> PyResult<f64> {
    qd::primal_value(&ensemble.0, &solution.0.povm, &SolverOptions::default()).map_err(to_py)
}

#[pyfunction]
fn grid_dual(ensemble: &PyEnsemble, step: f64) -> PyResult<f64> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(PyValueError::new_err("step must lie in (0, 0.5]"));
    }
    Ok(qd::oracles::grid_dual(&ensemble.0, step))
}

#[pyfunction]
#[pyo3(signature = (ensemble, iters = 1_000_000, seed = 0x5eed))]
fn subgradient_dual(ensemble: &PyEnsemble, iters: usize, seed: u64) -> PyResult<f64> {
    if iters == 0 {
        return Err(PyValueError::new_err("iters must be at least 1"));
    }
    Ok(qd::oracles::subgradient_dual(&ensemble.0, iters, seed))
}

#[pyfunction]
fn matrix_check<'py>(py: Python<'py>, ensemble: &PyEnsemble, solution: &PySolution) -> PyResult<Bound<'py, PyDict>> {
    let r = qd::oracles::matrix_check(&ensemble.0, &solution.0);
    let d = PyDict::new(py);
    d.set_item("stationarity", r.stationarity)?;
    d.set_item("slackness", r.slackness)?;
    d.set_item("feasibility", r.feasibility)?;
    d.set_item("duality_gap", r.duality_gap)?;
    d.set_item("completeness", r.completeness)?;
    d.set_item("positivity", r.positivity)?;
    Ok(d)
}

/// Center and radius of the smallest ball enclosing `points`.
#[pyfunction]
fn min_enclosing_ball(points: Vec<[f64; 3]>) -> PyResult<([f64; 3], f64)> {
    let pts: Vec<BlochVector> = points.into_iter().map(BlochVector::from).collect();
    let sol = qd::min_enclosing_ball(&pts, &SolverOptions::default()).map_err(to_py)?;
    Ok((sol.center.to_array(), sol.value))
}

/// Scenario document for a built-in instance.
#[pyfunction]
fn generate(spec: &str) -> PyResult<String> {
    cli::generate(spec).map(|s| s.to_json()).map_err(to_py)
}

/// Solves a scenario document and returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (text, certify = false, seed = None))]
fn run_scenario(text: &str, certify: bool, seed: Option<u64>) -> PyResult<String> {
    let scenario: Scenario = cli::parse_scenario(text).map_err(to_py)?;
    let mut opts = SolverOptions::with_tolerances(scenario.tolerances());
    if let Some(seed) = seed {
        opts.seed = seed;
    }
    cli::build_report(&scenario, text.as_bytes(), &opts, certify)
        .map(|r| r.to_json())
        .map_err(to_py)
}

#[pymodule]
#[pyo3(name = "qubit_discrimination")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQubitState>()?;
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(helstrom, m)?)?;
    m.add_function(wrap_pyfunction!(kkt_verify, m)?)?;
    m.add_function(wrap_pyfunction!(primal_value, m)?)?;
    m.add_function(wrap_pyfunction!(grid_dual, m)?)?;
    m.add_function(wrap_pyfunction!(subgradient_dual, m)?)?;
    m.add_function(wrap_pyfunction!(matrix_check, m)?)?;
    m.add_function(wrap_pyfunction!(min_enclosing_ball, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
