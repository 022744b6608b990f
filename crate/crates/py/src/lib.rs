//! Python bindings. Networks, VOT profiles and toll schemes are wrapped
//! classes; demand matrices are lists of rows (one per type, one column per
//! OD pair); structured results come back as plain dicts.

use std::collections::BTreeSet;

use equitoll::calibration::{self, DayObservation, VotGrid};
use equitoll::equilibrium::{self, Algorithm, SolverOptions, Start};
use equitoll::evaluation::{self, EvalConfig, ParetoConfig};
use equitoll::formats;
use equitoll::network::{self as net, DemandMatrix, TollKind};
use equitoll::toll_design::{self, DesignConfig, DesignOutput, Scheme};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

create_exception!(pyequitoll, EquitollError, PyException, "Base class of equitoll errors.");
create_exception!(pyequitoll, InputError, EquitollError, "Malformed or out-of-domain input.");
create_exception!(pyequitoll, NonConvergenceError, EquitollError, "An iterative solver hit its cap.");
create_exception!(pyequitoll, LpFailureError, EquitollError, "The LP solver failed numerically.");

fn to_py_err(e: equitoll::Error) -> PyErr {
    let msg = e.to_string();
    match e.root() {
        equitoll::Error::NonConvergence { .. } => NonConvergenceError::new_err(msg),
        equitoll::Error::Lp(_) => LpFailureError::new_err(msg),
        _ => InputError::new_err(msg),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for equitoll::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

fn to_dict<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| EquitollError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn demand_matrix(rows: Vec<Vec<f64>>) -> PyResult<DemandMatrix> {
    DemandMatrix::from_rows(rows).py_err()
}

fn solver(tol: f64, max_iterations: Option<usize>, algorithm: &str, start: &str) -> PyResult<SolverOptions> {
    let mut o = SolverOptions::with_tol(tol);
    if let Some(n) = max_iterations {
        o.max_iterations = n;
    }
    o.algorithm = match algorithm {
        "route-swap" => Algorithm::RouteSwap,
        "frank-wolfe" => Algorithm::FrankWolfe,
        other => return Err(PyValueError::new_err(format!("unknown algorithm `{other}`"))),
    };
    o.start = match start {
        "first-route" => Start::FirstRoute,
        "uniform" => Start::Uniform,
        other => return Err(PyValueError::new_err(format!("unknown start `{other}`"))),
    };
    Ok(o)
}

fn scheme(name: &str) -> PyResult<Scheme> {
    name.parse::<Scheme>().py_err()
}

#[pyclass(name = "Network", module = "pyequitoll", frozen)]
pub struct PyNetwork {
    inner: net::Network,
}

#[pymethods]
impl PyNetwork {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec = net::NetworkSpec::from_json(text).py_err()?;
        Ok(PyNetwork { inner: spec.build().py_err()? })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner.to_spec()).map_err(|e| EquitollError::new_err(e.to_string()))
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn num_od_pairs(&self) -> usize {
        self.inner.num_od_pairs()
    }

    #[getter]
    fn edge_ids(&self) -> Vec<String> {
        self.inner.edges().iter().map(|e| e.id.clone()).collect()
    }

    #[getter]
    fn od_pairs(&self) -> Vec<(String, String)> {
        (0..self.inner.num_od_pairs())
            .map(|k| {
                let (o, d) = self.inner.od_label(k);
                (o.to_string(), d.to_string())
            })
            .collect()
    }

    /// Routes of OD pair `k` as lists of edge ids.
    fn routes(&self, k: usize) -> PyResult<Vec<Vec<String>>> {
        if k >= self.inner.num_od_pairs() {
            return Err(InputError::new_err(format!("od index {k} out of range")));
        }
        Ok(self
            .inner
            .routes(k)
            .iter()
            .map(|r| r.edges().iter().map(|&e| self.inner.edge(e).id.clone()).collect())
            .collect())
    }

    /// `S(w) = Σ w_e ℓ_e(w_e)`.
    fn total_travel_time(&self, flows: Vec<f64>) -> PyResult<f64> {
        if flows.len() != self.inner.num_edges() {
            return Err(InputError::new_err("flow vector length differs from the edge count"));
        }
        Ok(net::total_travel_time(&self.inner, &flows))
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(nodes={}, edges={}, od_pairs={}, routes={})",
            self.inner.nodes().len(),
            self.inner.num_edges(),
            self.inner.num_od_pairs(),
            self.inner.route_count()
        )
    }
}

#[pyclass(name = "VotProfile", module = "pyequitoll", frozen)]
pub struct PyVotProfile {
    inner: net::VotProfile,
}

#[pymethods]
impl PyVotProfile {
    /// `types` is a list of `(label, vot)` pairs.
    #[new]
    fn new(types: Vec<(String, f64)>) -> PyResult<Self> {
        Ok(PyVotProfile { inner: net::VotProfile::new(&types).py_err()? })
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.types().iter().map(|t| t.label.clone()).collect()
    }

    #[getter]
    fn vots(&self) -> Vec<f64> {
        self.inner.types().iter().map(|t| t.vot).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        let parts: Vec<String> = self.inner.types().iter().map(|t| format!("{}={}", t.label, t.vot)).collect();
        format!("VotProfile({})", parts.join(", "))
    }
}

#[pyclass(name = "TollScheme", module = "pyequitoll", frozen)]
pub struct PyTollScheme {
    inner: net::TollScheme,
}

fn with_support(t: net::TollScheme, support: Option<Vec<usize>>) -> PyResult<PyTollScheme> {
    let inner = match support {
        Some(s) => t.with_support(&s.into_iter().collect()).py_err()?,
        None => t,
    };
    Ok(PyTollScheme { inner })
}

#[pymethods]
impl PyTollScheme {
    #[staticmethod]
    fn zero(n_edges: usize, n_types: usize) -> Self {
        PyTollScheme { inner: net::TollScheme::zero(n_edges, n_types) }
    }

    #[staticmethod]
    #[pyo3(signature = (prices, n_types, support=None))]
    fn homogeneous(prices: Vec<f64>, n_types: usize, support: Option<Vec<usize>>) -> PyResult<Self> {
        with_support(net::TollScheme::homogeneous(prices, n_types).py_err()?, support)
    }

    #[staticmethod]
    #[pyo3(signature = (prices, support=None))]
    fn heterogeneous(prices: Vec<Vec<f64>>, support: Option<Vec<usize>>) -> PyResult<Self> {
        with_support(net::TollScheme::heterogeneous(prices).py_err()?, support)
    }

    #[staticmethod]
    fn from_csv(text: &str, network: &PyNetwork, vot: &PyVotProfile) -> PyResult<Self> {
        let inner = formats::read_tolls_csv(text.as_bytes(), &network.inner, &vot.inner).py_err()?;
        Ok(PyTollScheme { inner })
    }

    fn to_csv(&self, network: &PyNetwork, vot: &PyVotProfile) -> PyResult<String> {
        let mut buf = Vec::new();
        formats::write_tolls_csv(&mut buf, &network.inner, &vot.inner, &self.inner).py_err()?;
        String::from_utf8(buf).map_err(|e| EquitollError::new_err(e.to_string()))
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.kind() {
            TollKind::Homogeneous => "homogeneous",
            TollKind::Heterogeneous => "heterogeneous",
        }
    }

    /// One row for a homogeneous scheme, one per type otherwise.
    #[getter]
    fn prices(&self) -> Vec<Vec<f64>> {
        self.inner.price_rows()
    }

    #[getter]
    fn support(&self) -> Vec<usize> {
        self.inner.support().into_iter().collect()
    }

    fn price(&self, edge: usize, type_index: usize) -> PyResult<f64> {
        if edge >= self.inner.n_edges() || type_index >= self.inner.n_types() {
            return Err(InputError::new_err("edge or type index out of range"));
        }
        Ok(self.inner.price(edge, type_index))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("TollScheme(kind={}, support={:?})", self.kind(), self.support())
    }
}

#[pyclass(name = "DesignResult", module = "pyequitoll", frozen)]
pub struct PyDesignResult {
    inner: DesignOutput,
}

#[pymethods]
impl PyDesignResult {
    #[getter]
    fn scheme(&self) -> &'static str {
        self.inner.scheme.name()
    }

    #[getter]
    fn tolls(&self) -> PyTollScheme {
        PyTollScheme { inner: self.inner.tolls.clone() }
    }

    #[getter]
    fn first_stage_value(&self) -> f64 {
        self.inner.first_stage_value
    }

    #[getter]
    fn second_stage_objective(&self) -> f64 {
        self.inner.second_stage_objective
    }

    #[getter]
    fn y(&self) -> f64 {
        self.inner.y
    }

    #[getter]
    fn w_dagger(&self) -> Vec<f64> {
        self.inner.audit.w_dagger.clone()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "DesignResult(scheme={}, first_stage_value={}, second_stage_objective={})",
            self.scheme(),
            self.inner.first_stage_value,
            self.inner.second_stage_objective
        )
    }
}

/// Equilibrium under `tolls` (zero when omitted). Returns a dict with
/// `edge_flows`, `per_type_flows`, `route_flows[i][k][r]`, `gap`,
/// `iterations` and `potential`.
#[pyfunction]
#[pyo3(signature = (network, vot, demand, tolls=None, tol=1e-7, max_iterations=None, algorithm="route-swap", start="first-route"))]
#[allow(clippy::too_many_arguments)]
fn solve_equilibrium<'py>(
    py: Python<'py>,
    network: &PyNetwork,
    vot: &PyVotProfile,
    demand: Vec<Vec<f64>>,
    tolls: Option<&PyTollScheme>,
    tol: f64,
    max_iterations: Option<usize>,
    algorithm: &str,
    start: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let d = demand_matrix(demand)?;
    let opts = solver(tol, max_iterations, algorithm, start)?;
    let zero;
    let tolls = match tolls {
        Some(t) => &t.inner,
        None => {
            zero = net::TollScheme::zero(network.inner.num_edges(), vot.inner.len());
            &zero
        }
    };
    let (n, v) = (&network.inner, &vot.inner);
    let eq = py
        .detach(|| equilibrium::solve_equilibrium(n, &d, v, tolls, &opts))
        .py_err()?;
    let routes: Vec<Vec<Vec<f64>>> = (0..v.len())
        .map(|i| (0..n.num_od_pairs()).map(|k| eq.route_flows.block(i, k).to_vec()).collect())
        .collect();
    let out = PyDict::new(py);
    out.set_item("edge_flows", &eq.edge_flows.total)?;
    out.set_item("per_type_flows", &eq.edge_flows.per_type)?;
    out.set_item("route_flows", routes)?;
    out.set_item("gap", eq.gap)?;
    out.set_item("iterations", eq.iterations)?;
    out.set_item("potential", eq.potential)?;
    Ok(out)
}

/// Socially optimal flows, optionally minimizing `Σ γ_e w_e ℓ_e(w_e)`.
#[pyfunction]
#[pyo3(signature = (network, demand, weights=None, tol=1e-10))]
fn solve_social_optimum<'py>(
    py: Python<'py>,
    network: &PyNetwork,
    demand: Vec<Vec<f64>>,
    weights: Option<Vec<f64>>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let d = demand_matrix(demand)?;
    let opts = SolverOptions::with_tol(tol);
    let n = &network.inner;
    let so = py
        .detach(|| match &weights {
            Some(g) => equilibrium::solve_weighted_social_optimum(n, &d, g, &opts),
            None => equilibrium::solve_social_optimum(n, &d, &opts),
        })
        .py_err()?;
    let out = PyDict::new(py);
    out.set_item("edge_flows", &so.edge_flows.total)?;
    out.set_item("per_type_flows", &so.edge_flows.per_type)?;
    out.set_item("total_travel_time", so.total_travel_time)?;
    out.set_item("weighted_cost", so.weighted_cost)?;
    out.set_item("gap", so.gap)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (network, vot, demand, scheme="hom", lam=toll_design::DEFAULT_LAMBDA, support=None, tol=1e-10))]
#[allow(clippy::too_many_arguments)]
fn design(
    py: Python<'_>,
    network: &PyNetwork,
    vot: &PyVotProfile,
    demand: Vec<Vec<f64>>,
    scheme: &str,
    lam: f64,
    support: Option<Vec<usize>>,
    tol: f64,
) -> PyResult<PyDesignResult> {
    let d = demand_matrix(demand)?;
    let cfg = DesignConfig {
        scheme: self::scheme(scheme)?,
        lambda: lam,
        support: support.map(|s| s.into_iter().collect::<BTreeSet<usize>>()),
        solver: SolverOptions::with_tol(tol),
    };
    let (n, v) = (&network.inner, &vot.inner);
    let inner = py.detach(|| toll_design::design(n, &d, v, &cfg)).py_err()?;
    Ok(PyDesignResult { inner })
}

/// Equity, welfare, revenue, PoA and thresholds of `tolls`, as a dict.
#[pyfunction]
#[pyo3(signature = (network, vot, demand, tolls, lam=toll_design::DEFAULT_LAMBDA, thresholds=None, tol=1e-10))]
#[allow(clippy::too_many_arguments)]
fn evaluate<'py>(
    py: Python<'py>,
    network: &PyNetwork,
    vot: &PyVotProfile,
    demand: Vec<Vec<f64>>,
    tolls: &PyTollScheme,
    lam: f64,
    thresholds: Option<Vec<f64>>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let d = demand_matrix(demand)?;
    let cfg = EvalConfig {
        lambda: lam,
        thresholds_min: thresholds.unwrap_or_else(|| evaluation::DEFAULT_THRESHOLDS_MIN.to_vec()),
        solver: SolverOptions::with_tol(tol),
    };
    let (n, v, t) = (&network.inner, &vot.inner, &tolls.inner);
    let report = py.detach(|| evaluation::evaluate(n, &d, v, t, &cfg)).py_err()?;
    to_dict(py, &report)
}

/// Price of anarchy `S(w*(0)) / S(w†)`.
#[pyfunction]
#[pyo3(signature = (network, vot, demand, tol=1e-10))]
fn poa(py: Python<'_>, network: &PyNetwork, vot: &PyVotProfile, demand: Vec<Vec<f64>>, tol: f64) -> PyResult<f64> {
    let d = demand_matrix(demand)?;
    let opts = SolverOptions::with_tol(tol);
    let (n, v) = (&network.inner, &vot.inner);
    Ok(py.detach(|| evaluation::poa(n, &d, v, &opts)).py_err()?.poa)
}

#[pyfunction]
#[pyo3(signature = (network, vot, demand, samples, seed, lam=toll_design::DEFAULT_LAMBDA, schemes=None, tol=1e-10))]
#[allow(clippy::too_many_arguments)]
fn pareto_front<'py>(
    py: Python<'py>,
    network: &PyNetwork,
    vot: &PyVotProfile,
    demand: Vec<Vec<f64>>,
    samples: usize,
    seed: u64,
    lam: f64,
    schemes: Option<Vec<String>>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let d = demand_matrix(demand)?;
    let mut cfg = ParetoConfig {
        lambda: lam,
        solver: SolverOptions::with_tol(tol),
        ..Default::default()
    };
    if let Some(s) = schemes {
        cfg.schemes = s.iter().map(|x| scheme(x)).collect::<PyResult<_>>()?;
    }
    let (n, v) = (&network.inner, &vot.inner);
    let front = py
        .detach(|| evaluation::pareto_front(n, &d, v, &cfg, samples, seed))
        .py_err()?;
    to_dict(py, &front)
}

/// Least-squares BPR slope through `(travel_time, flow)` points.
#[pyfunction]
fn fit_bpr_slope(points: Vec<(f64, f64)>, free_flow_time: f64) -> f64 {
    calibration::fit_bpr_slope(&points, free_flow_time)
}

type ObservedDay = (Vec<Vec<f64>>, Vec<Option<f64>>);

/// Grid search over VOT vectors. `days` is a list of `(demand, observed)`
/// where `observed[e]` is the day's flow on edge `e` or `None`.
#[pyfunction]
#[pyo3(signature = (network, template, days, tolls, grid_values, tol=1e-7))]
fn estimate_vot<'py>(
    py: Python<'py>,
    network: &PyNetwork,
    template: &PyVotProfile,
    days: Vec<ObservedDay>,
    tolls: &PyTollScheme,
    grid_values: Vec<f64>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let grid = VotGrid::from_values(template.inner.len(), &grid_values).py_err()?;
    let mut obs = Vec::new();
    for (t, (demand, observed)) in days.into_iter().enumerate() {
        obs.push(DayObservation {
            day: format!("day{t}"),
            net: &network.inner,
            demand: demand_matrix(demand)?,
            observed,
        });
    }
    let opts = SolverOptions::with_tol(tol);
    let (v, t) = (&template.inner, &tolls.inner);
    let est = py
        .detach(|| calibration::estimate_vot(&obs, v, t, &grid, &opts))
        .py_err()?;
    to_dict(py, &est)
}

#[pymodule]
fn pyequitoll(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyVotProfile>()?;
    m.add_class::<PyTollScheme>()?;
    m.add_class::<PyDesignResult>()?;
    m.add_function(wrap_pyfunction!(solve_equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(solve_social_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(design, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(poa, m)?)?;
    m.add_function(wrap_pyfunction!(pareto_front, m)?)?;
    m.add_function(wrap_pyfunction!(fit_bpr_slope, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_vot, m)?)?;
    let py = m.py();
    m.add("EquitollError", py.get_type::<EquitollError>())?;
    m.add("InputError", py.get_type::<InputError>())?;
    m.add("NonConvergenceError", py.get_type::<NonConvergenceError>())?;
    m.add("LpFailureError", py.get_type::<LpFailureError>())?;
    Ok(())
}
