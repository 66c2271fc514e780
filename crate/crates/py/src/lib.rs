//! Python bindings: thin wrappers over the core types plus the handful of
//! top-level operations (propagation, metric evolution, phases, covariance
//! checks, Lindblad extension, scenario running).

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qmetric::covariance;
use qmetric::lindblad::{self, LindbladSet};
use qmetric::metric::{self, MetricTrajectory};
use qmetric::phases::{self, EigenBranch, PhaseDecomposition};
use qmetric::propagator::{self, HamiltonianKind, HamiltonianSpec, PropagatorTrace, TimeGrid};
use qmetric::scenario::{self, config::parse_config};

fn err(e: qmetric::Error) -> PyErr {
    match e {
        qmetric::Error::Parse { .. } | qmetric::Error::Validation { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn bounds(k: usize, len: usize) -> PyResult<()> {
    if k >= len {
        return Err(PyIndexError::new_err(format!("index {k} out of range (len {len})")));
    }
    Ok(())
}

#[pyclass(name = "Operator", frozen, from_py_object)]
#[derive(Clone)]
struct PyOperator(qmetric::Operator);

#[pymethods]
impl PyOperator {
    #[new]
    fn new(rows: Vec<Vec<C64>>) -> PyResult<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(PyValueError::new_err("matrix must be square"));
        }
        qmetric::Operator::from_fn(dim, |i, j| rows[i][j])
            .map(PyOperator)
            .map_err(err)
    }

    #[staticmethod]
    fn identity(dim: usize) -> Self {
        PyOperator(qmetric::Operator::identity(dim))
    }

    #[staticmethod]
    fn zeros(dim: usize) -> Self {
        PyOperator(qmetric::Operator::zeros(dim))
    }

    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn to_list(&self) -> Vec<Vec<C64>> {
        let d = self.0.dim();
        let m = self.0.matrix();
        (0..d).map(|i| (0..d).map(|j| m[(i, j)]).collect()).collect()
    }

    fn adjoint(&self) -> Self {
        PyOperator(self.0.adjoint())
    }

    fn sym(&self) -> Self {
        PyOperator(self.0.sym())
    }

    fn scale(&self, c: C64) -> Self {
        PyOperator(self.0.scale(c))
    }

    fn trace(&self) -> C64 {
        self.0.trace()
    }

    fn frob_norm(&self) -> f64 {
        self.0.frob_norm()
    }

    fn herm_defect(&self) -> f64 {
        self.0.herm_defect()
    }

    #[pyo3(signature = (tol = qmetric::DEFAULT_HERM_TOL))]
    fn is_hermitian(&self, tol: f64) -> bool {
        self.0.is_hermitian(tol)
    }

    fn min_eigenvalue(&self) -> f64 {
        self.0.min_eigenvalue()
    }

    /// Sorted eigenvalues; the operator must be Hermitian.
    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        let eig = self.0.herm_eig(qmetric::DEFAULT_HERM_TOL).map_err(err)?;
        Ok(eig.eigenvalues)
    }

    fn matrix_exp(&self) -> Self {
        PyOperator(self.0.matrix_exp())
    }

    #[pyo3(signature = (pd_tol = qmetric::DEFAULT_PD_TOL))]
    fn pd_sqrt(&self, pd_tol: f64) -> PyResult<Self> {
        self.0.pd_sqrt(pd_tol).map(PyOperator).map_err(err)
    }

    #[pyo3(signature = (pd_tol = qmetric::DEFAULT_PD_TOL))]
    fn pd_inv_sqrt(&self, pd_tol: f64) -> PyResult<Self> {
        self.0.pd_inv_sqrt(pd_tol).map(PyOperator).map_err(err)
    }

    fn commutator(&self, other: &PyOperator) -> PyResult<Self> {
        self.0.commutator(&other.0).map(PyOperator).map_err(err)
    }

    fn apply(&self, v: &PyStateVector) -> PyResult<PyStateVector> {
        if v.0.dim() != self.0.dim() {
            return Err(PyValueError::new_err("dimension mismatch"));
        }
        Ok(PyStateVector(self.0.apply(&v.0)))
    }

    fn __add__(&self, other: &PyOperator) -> PyResult<Self> {
        if other.0.dim() != self.0.dim() {
            return Err(PyValueError::new_err("dimension mismatch"));
        }
        Ok(PyOperator(&self.0 + &other.0))
    }

    fn __sub__(&self, other: &PyOperator) -> PyResult<Self> {
        if other.0.dim() != self.0.dim() {
            return Err(PyValueError::new_err("dimension mismatch"));
        }
        Ok(PyOperator(&self.0 - &other.0))
    }

    fn __matmul__(&self, other: &PyOperator) -> PyResult<Self> {
        if other.0.dim() != self.0.dim() {
            return Err(PyValueError::new_err("dimension mismatch"));
        }
        Ok(PyOperator(&self.0 * &other.0))
    }

    fn __mul__(&self, c: C64) -> Self {
        PyOperator(self.0.scale(c))
    }

    fn __rmul__(&self, c: C64) -> Self {
        PyOperator(self.0.scale(c))
    }

    fn __repr__(&self) -> String {
        format!("Operator(dim={}, frob_norm={:.6e})", self.0.dim(), self.0.frob_norm())
    }
}

#[pyclass(name = "StateVector", frozen, from_py_object)]
#[derive(Clone)]
struct PyStateVector(qmetric::StateVector);

#[pymethods]
impl PyStateVector {
    #[new]
    fn new(components: Vec<C64>) -> PyResult<Self> {
        qmetric::StateVector::from_components(&components)
            .map(PyStateVector)
            .map_err(err)
    }

    #[staticmethod]
    fn basis(dim: usize, k: usize) -> PyResult<Self> {
        bounds(k, dim)?;
        Ok(PyStateVector(qmetric::StateVector::basis(dim, k)))
    }

    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn normalized(&self) -> Self {
        PyStateVector(self.0.normalized())
    }

    fn scale(&self, c: C64) -> Self {
        PyStateVector(self.0.scale(c))
    }

    fn inner(&self, other: &PyStateVector) -> C64 {
        self.0.inner(&other.0)
    }

    fn to_list(&self) -> Vec<C64> {
        (0..self.0.dim()).map(|k| self.0.component(k)).collect()
    }

    fn __repr__(&self) -> String {
        format!("StateVector(dim={}, norm={:.6})", self.0.dim(), self.0.norm())
    }
}

#[pyclass(name = "TimeGrid", frozen, from_py_object)]
#[derive(Clone)]
struct PyTimeGrid(TimeGrid);

#[pymethods]
impl PyTimeGrid {
    #[new]
    #[pyo3(signature = (t0, t1, steps, hbar = 1.0))]
    fn new(t0: f64, t1: f64, steps: usize, hbar: f64) -> PyResult<Self> {
        TimeGrid::new(t0, t1, steps, hbar).map(PyTimeGrid).map_err(err)
    }

    #[getter]
    fn t0(&self) -> f64 {
        self.0.t0
    }

    #[getter]
    fn t1(&self) -> f64 {
        self.0.t1
    }

    #[getter]
    fn steps(&self) -> usize {
        self.0.steps
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.0.hbar
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.0.dt()
    }

    fn time(&self, k: usize) -> PyResult<f64> {
        bounds(k, self.0.len())?;
        Ok(self.0.time(k))
    }

    fn times(&self) -> Vec<f64> {
        (0..self.0.len()).map(|k| self.0.time(k)).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "TimeGrid(t0={}, t1={}, steps={}, hbar={})",
            self.0.t0, self.0.t1, self.0.steps, self.0.hbar
        )
    }
}

#[pyclass(name = "Hamiltonian", frozen, from_py_object)]
#[derive(Clone)]
struct PyHamiltonian(HamiltonianSpec);

#[pymethods]
impl PyHamiltonian {
    #[staticmethod]
    #[pyo3(signature = (matrix, hbar = 1.0))]
    fn constant(matrix: &PyOperator, hbar: f64) -> PyResult<Self> {
        HamiltonianSpec::new(HamiltonianKind::Constant { matrix: matrix.0.clone() }, hbar)
            .map(PyHamiltonian)
            .map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (omega0, omega1, omega, hbar = 1.0))]
    fn pauli_rotating(omega0: f64, omega1: f64, omega: f64, hbar: f64) -> PyResult<Self> {
        HamiltonianSpec::new(HamiltonianKind::PauliRotating { omega0, omega1, omega }, hbar)
            .map(PyHamiltonian)
            .map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (base, cos_term, sin_term, nu, hbar = 1.0))]
    fn fourier(
        base: &PyOperator,
        cos_term: &PyOperator,
        sin_term: &PyOperator,
        nu: f64,
        hbar: f64,
    ) -> PyResult<Self> {
        HamiltonianSpec::new(
            HamiltonianKind::Fourier {
                base: base.0.clone(),
                cos_term: cos_term.0.clone(),
                sin_term: sin_term.0.clone(),
                nu,
            },
            hbar,
        )
        .map(PyHamiltonian)
        .map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (times, matrices, hbar = 1.0))]
    fn sampled(times: Vec<f64>, matrices: Vec<PyOperator>, hbar: f64) -> PyResult<Self> {
        HamiltonianSpec::new(
            HamiltonianKind::Sampled {
                times,
                matrices: matrices.into_iter().map(|m| m.0).collect(),
            },
            hbar,
        )
        .map(PyHamiltonian)
        .map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (times, matrices, hbar = 1.0))]
    fn piecewise_constant(times: Vec<f64>, matrices: Vec<PyOperator>, hbar: f64) -> PyResult<Self> {
        HamiltonianSpec::new(
            HamiltonianKind::PiecewiseConstant {
                times,
                matrices: matrices.into_iter().map(|m| m.0).collect(),
            },
            hbar,
        )
        .map(PyHamiltonian)
        .map_err(err)
    }

    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn is_hermitian(&self) -> bool {
        self.0.is_hermitian()
    }

    fn evaluate(&self, t: f64) -> PyResult<PyOperator> {
        self.0.evaluate(t).map(PyOperator).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Hamiltonian(dim={}, hermitian={})", self.0.dim(), self.0.is_hermitian())
    }
}

#[pyclass(name = "PropagatorTrace", frozen)]
struct PyPropagatorTrace(PropagatorTrace);

#[pymethods]
impl PyPropagatorTrace {
    fn u(&self, k: usize) -> PyResult<PyOperator> {
        bounds(k, self.0.u.len())?;
        Ok(PyOperator(self.0.u[k].clone()))
    }

    fn unitarity_defect(&self, k: usize) -> PyResult<f64> {
        bounds(k, self.0.unitarity_defect.len())?;
        Ok(self.0.unitarity_defect[k])
    }

    fn max_unitarity_defect(&self) -> f64 {
        self.0.max_unitarity_defect()
    }

    fn __len__(&self) -> usize {
        self.0.u.len()
    }
}

#[pyclass(name = "MetricTrajectory", frozen)]
struct PyMetricTrajectory(MetricTrajectory);

#[pymethods]
impl PyMetricTrajectory {
    fn eta(&self, k: usize) -> PyResult<PyOperator> {
        bounds(k, self.0.len())?;
        Ok(PyOperator(self.0.eta[k].clone()))
    }

    fn eta0(&self) -> PyOperator {
        PyOperator(self.0.eta0.clone())
    }

    fn eigenvalue_drift(&self) -> f64 {
        self.0.eigenvalue_drift()
    }

    fn min_eigs(&self) -> Vec<f64> {
        self.0.min_eigs.clone()
    }

    fn symmetrization_defect(&self) -> f64 {
        self.0.symmetrization_defect
    }

    /// (step, t, min_eig) of the first positivity loss, or None.
    fn positivity_lost(&self) -> Option<(usize, f64, f64)> {
        self.0.positivity_lost.as_ref().map(|p| (p.step, p.t, p.min_eig))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "PhaseResult", frozen)]
struct PyPhaseResult {
    branches: Vec<EigenBranch>,
    dec: PhaseDecomposition,
}

#[pymethods]
impl PyPhaseResult {
    fn eigenvalue(&self, n: usize) -> PyResult<f64> {
        bounds(n, self.branches.len())?;
        Ok(self.branches[n].lambda)
    }

    fn delta(&self, n: usize) -> PyResult<Vec<f64>> {
        bounds(n, self.dec.delta.len())?;
        Ok(self.dec.delta[n].clone())
    }

    fn gamma(&self, n: usize) -> PyResult<Vec<f64>> {
        bounds(n, self.dec.gamma.len())?;
        Ok(self.dec.gamma[n].clone())
    }

    fn alpha(&self, n: usize, k: usize) -> PyResult<f64> {
        bounds(n, self.branches.len())?;
        bounds(k, self.branches[n].len())?;
        Ok(self.dec.alpha(n, k))
    }

    fn min_gap(&self, n: usize) -> PyResult<f64> {
        bounds(n, self.branches.len())?;
        Ok(self.branches[n].min_gap)
    }

    fn max_eig_residual(&self) -> f64 {
        self.branches
            .iter()
            .map(|b| b.max_eig_residual())
            .fold(0.0, f64::max)
    }

    /// U(t_k, t0) rebuilt from the spectral decomposition.
    fn reconstruct(&self, k: usize) -> PyResult<PyOperator> {
        phases::reconstruct_evolution(&self.branches, &self.dec, k)
            .map(PyOperator)
            .map_err(err)
    }

    /// (cyclic dynamical, cyclic geometric) phase of branch n over
    /// `period_steps` steps.
    #[pyo3(signature = (n, period_steps, cyc_tol = qmetric::DEFAULT_CYC_TOL))]
    fn cyclic(&self, n: usize, period_steps: usize, cyc_tol: f64) -> PyResult<(f64, f64)> {
        bounds(n, self.branches.len())?;
        phases::cyclic_phase(&self.branches[n], &self.dec.delta[n], period_steps, cyc_tol)
            .map_err(err)
    }

    fn __len__(&self) -> usize {
        self.branches.len()
    }
}

#[pyfunction]
fn evolve(h: &PyHamiltonian, grid: &PyTimeGrid) -> PyResult<PyPropagatorTrace> {
    propagator::evolve(&h.0, &grid.0).map(PyPropagatorTrace).map_err(err)
}

#[pyfunction]
fn convergence_order(h: &PyHamiltonian, grid: &PyTimeGrid) -> PyResult<f64> {
    propagator::convergence_order(&h.0, &grid.0)
        .map(|o| o.as_f64())
        .map_err(err)
}

#[pyfunction]
fn evolve_metric_hermitian(
    h: &PyHamiltonian,
    eta0: &PyOperator,
    grid: &PyTimeGrid,
) -> PyResult<PyMetricTrajectory> {
    metric::evolve_metric_hermitian(&h.0, &eta0.0, &grid.0)
        .map(PyMetricTrajectory)
        .map_err(err)
}

#[pyfunction]
fn evolve_metric_general(
    h: &PyHamiltonian,
    eta0: &PyOperator,
    grid: &PyTimeGrid,
) -> PyResult<PyMetricTrajectory> {
    metric::evolve_metric_general(&h.0, &eta0.0, &grid.0)
        .map(PyMetricTrajectory)
        .map_err(err)
}

#[pyfunction]
fn evolve_metric_lindblad(
    h: &PyHamiltonian,
    eta0: &PyOperator,
    ops: Vec<PyOperator>,
    grid: &PyTimeGrid,
) -> PyResult<PyMetricTrajectory> {
    let set = if ops.is_empty() {
        LindbladSet::empty()
    } else {
        LindbladSet::new(ops.into_iter().map(|o| o.0).collect()).map_err(err)?
    };
    lindblad::evolve_metric_lindblad(&h.0, &eta0.0, &set, &grid.0)
        .map(PyMetricTrajectory)
        .map_err(err)
}

#[pyfunction]
fn lvn_residual(h: &PyHamiltonian, traj: &PyMetricTrajectory) -> PyResult<f64> {
    metric::lvn_residual(&h.0, &traj.0).map_err(err)
}

#[pyfunction]
fn conserved_inner_product_check(
    h: &PyHamiltonian,
    traj: &PyMetricTrajectory,
    psi0: &PyStateVector,
    phi0: &PyStateVector,
) -> PyResult<f64> {
    metric::conserved_inner_product_check(&h.0, &traj.0, &psi0.0, &phi0.0).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (h, traj, gap_tol = qmetric::DEFAULT_GAP_TOL))]
fn phase_decomposition(
    h: &PyHamiltonian,
    traj: &PyMetricTrajectory,
    gap_tol: f64,
) -> PyResult<PyPhaseResult> {
    let branches = phases::track_eigenbranches(&traj.0, gap_tol).map_err(err)?;
    let dec = phases::phase_decomposition(&branches, &h.0, &traj.0.grid).map_err(err)?;
    Ok(PyPhaseResult { branches, dec })
}

#[pyfunction]
fn verify_hamiltonian_invariance(
    h: &PyHamiltonian,
    eta0: &PyOperator,
    grid: &PyTimeGrid,
) -> PyResult<f64> {
    covariance::verify_hamiltonian_invariance(&h.0, &eta0.0, &grid.0).map_err(err)
}

#[pyfunction]
fn metric_permutation(eta1: &PyOperator, eta2: &PyOperator) -> PyResult<PyOperator> {
    covariance::metric_permutation(&eta1.0, &eta2.0)
        .map(PyOperator)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (h1, h2, traj, equivalence_tol = qmetric::DEFAULT_EQUIVALENCE_TOL))]
fn geometric_equivalence_check(
    h1: &PyHamiltonian,
    h2: &PyHamiltonian,
    traj: &PyMetricTrajectory,
    equivalence_tol: f64,
) -> PyResult<(bool, f64)> {
    covariance::geometric_equivalence_check(&h1.0, &h2.0, &traj.0, equivalence_tol)
        .map(|r| (r.verdict, r.defect))
        .map_err(err)
}

#[pyfunction]
fn nonunitarity_wrt_eta(u: Vec<PyOperator>, traj: &PyMetricTrajectory) -> PyResult<Vec<f64>> {
    let ops: Vec<qmetric::Operator> = u.into_iter().map(|o| o.0).collect();
    lindblad::nonunitarity_wrt_eta(&ops, &traj.0).map_err(err)
}

#[pyfunction]
fn eta_inner(psi: &PyStateVector, phi: &PyStateVector, eta: &PyOperator) -> PyResult<C64> {
    qmetric::eta_inner(&psi.0, &phi.0, &eta.0).map_err(err)
}

#[pyfunction]
fn pauli() -> (PyOperator, PyOperator, PyOperator, PyOperator) {
    let [sx, sy, sz, id] = qmetric::operator::pauli();
    (PyOperator(sx), PyOperator(sy), PyOperator(sz), PyOperator(id))
}

/// Run a scenario from its JSON config text; returns the report as JSON.
/// CSV/JSON artifacts are written into `out_dir`.
#[pyfunction]
fn run_scenario_json(config_json: &str, out_dir: &str) -> PyResult<String> {
    let cfg = parse_config(config_json).map_err(err)?;
    let report = scenario::run_scenario(&cfg, std::path::Path::new(out_dir)).map_err(err)?;
    Ok(report.to_json())
}

#[pymodule]
fn qmetric_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperator>()?;
    m.add_class::<PyStateVector>()?;
    m.add_class::<PyTimeGrid>()?;
    m.add_class::<PyHamiltonian>()?;
    m.add_class::<PyPropagatorTrace>()?;
    m.add_class::<PyMetricTrajectory>()?;
    m.add_class::<PyPhaseResult>()?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_order, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_metric_hermitian, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_metric_general, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_metric_lindblad, m)?)?;
    m.add_function(wrap_pyfunction!(lvn_residual, m)?)?;
    m.add_function(wrap_pyfunction!(conserved_inner_product_check, m)?)?;
    m.add_function(wrap_pyfunction!(phase_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(verify_hamiltonian_invariance, m)?)?;
    m.add_function(wrap_pyfunction!(metric_permutation, m)?)?;
    m.add_function(wrap_pyfunction!(geometric_equivalence_check, m)?)?;
    m.add_function(wrap_pyfunction!(nonunitarity_wrt_eta, m)?)?;
    m.add_function(wrap_pyfunction!(eta_inner, m)?)?;
    m.add_function(wrap_pyfunction!(pauli, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario_json, m)?)?;
    m.add("DEFAULT_HERM_TOL", qmetric::DEFAULT_HERM_TOL)?;
    m.add("DEFAULT_PD_TOL", qmetric::DEFAULT_PD_TOL)?;
    m.add("DEFAULT_GAP_TOL", qmetric::DEFAULT_GAP_TOL)?;
    m.add("DEFAULT_EQUIVALENCE_TOL", qmetric::DEFAULT_EQUIVALENCE_TOL)?;
    m.add("DEFAULT_CYC_TOL", qmetric::DEFAULT_CYC_TOL)?;
    Ok(())
}
