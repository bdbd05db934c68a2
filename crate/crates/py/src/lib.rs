//! Python bindings: load or generate instances, run solvers, decode vectors
//! and export LP models.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use rohyta_core::instance::{serialize_instance, reference_robots};
use rohyta_core::schedule::{check_feasibility, Decoder, ScheduleReport};
use rohyta_core::solvers::{SolverConfig, SolverError, SolverKind};
use rohyta_core::{
    assemble_matrices, build_travel_times, export_lp, generate_instance, generate_scenarios,
    load_instance, parse_instance, Cell, GeneratorParams, ModelMatrices, ProblemInstance,
    RobustConfig, SolutionVector, UncertaintySet,
};

create_exception!(rohyta, InvalidInstance, PyException, "The instance failed to parse or validate.");
create_exception!(rohyta, Infeasible, PyException, "No schedule satisfies the runtime limits.");

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn invalid(e: impl std::fmt::Display) -> PyErr {
    InvalidInstance::new_err(e.to_string())
}

/// A validated problem instance.
#[pyclass(name = "Instance", frozen)]
struct PyInstance {
    inner: ProblemInstance,
}

#[pymethods]
impl PyInstance {
    /// Loads a TOML instance file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        load_instance(path).map(|inner| Self { inner }).map_err(invalid)
    }

    /// Parses TOML text with an inline map.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        parse_instance(text).map(|inner| Self { inner }).map_err(invalid)
    }

    /// A random instance with the reference fleet on a 60 x 40 map.
    #[staticmethod]
    #[pyo3(signature = (seed, zones, types = 2))]
    fn generate(seed: u64, zones: usize, types: usize) -> PyResult<Self> {
        generate_instance(seed, zones, types, &reference_robots(), &GeneratorParams::default())
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn n_zones(&self) -> usize {
        self.inner.zones.len()
    }

    #[getter]
    fn n_robots(&self) -> usize {
        self.inner.n_robots()
    }

    /// Tasks including the depot.
    #[getter]
    fn n_tasks(&self) -> usize {
        self.inner.n_tasks()
    }

    fn to_toml(&self) -> String {
        serialize_instance(&self.inner)
    }

    /// Shortest-path length in meters between two free cells, or `None`.
    fn path_length(&self, a: (usize, usize), b: (usize, usize)) -> PyResult<Option<f64>> {
        self.inner
            .map
            .shortest_path_length(Cell::new(a.0, a.1), Cell::new(b.0, b.1))
            .map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(name={:?}, zones={}, robots={})",
            self.inner.name,
            self.inner.zones.len(),
            self.inner.n_robots()
        )
    }
}

/// The outcome of one solver run.
#[pyclass(name = "SolveResult", frozen, get_all)]
struct PySolveResult {
    makespan: f64,
    vector: String,
    /// `(iteration, best makespan)` pairs.
    trace: Vec<(usize, f64)>,
    /// `(robot, task label, start, end, wait)` per served task.
    entries: Vec<(usize, String, f64, f64, f64)>,
    feasible: bool,
    wall_time: f64,
    report_json: String,
}

#[pymethods]
impl PySolveResult {
    fn __repr__(&self) -> String {
        format!("SolveResult(makespan={}, vector={:?})", self.makespan, self.vector)
    }
}

fn matrices(
    inst: &ProblemInstance,
    robust: &str,
    deviation: f64,
    scenarios: usize,
    scenario_seed: u64,
) -> PyResult<(ModelMatrices, UncertaintySet)> {
    let kind: UncertaintySet = robust.parse().map_err(value_err)?;
    let cfg = if kind == UncertaintySet::None {
        RobustConfig::deterministic()
    } else {
        let s = generate_scenarios(inst, scenario_seed, scenarios, deviation).map_err(value_err)?;
        RobustConfig::new(kind, s)
    };
    let travel = build_travel_times(inst, &inst.map).map_err(invalid)?;
    let mats = assemble_matrices(inst, &travel, &cfg).map_err(value_err)?;
    Ok((mats, kind))
}

/// Runs a solver. `overrides` takes `table.key=value` strings such as
/// `"sa.lk=50"`.
#[pyfunction]
#[pyo3(signature = (
    instance, solver = "sa", seed = 0, robust = "none", deviation = 0.1,
    scenarios = 10, scenario_seed = 0, overrides = Vec::new()
))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    instance: &PyInstance,
    solver: &str,
    seed: u64,
    robust: &str,
    deviation: f64,
    scenarios: usize,
    scenario_seed: u64,
    overrides: Vec<String>,
) -> PyResult<PySolveResult> {
    let inst = &instance.inner;
    let kind: SolverKind = solver.parse().map_err(value_err)?;
    let mut cfg = SolverConfig::default();
    for o in &overrides {
        cfg.set(o).map_err(value_err)?;
    }
    let (mats, set) = matrices(inst, robust, deviation, scenarios, scenario_seed)?;
    let result = py
        .detach(|| kind.solve(inst, &mats, &cfg, seed))
        .map_err(|e| match e {
            SolverError::Infeasible(m) => Infeasible::new_err(m),
            other => value_err(other),
        })?;
    let dev = if set == UncertaintySet::None { 0.0 } else { deviation };
    let report = ScheduleReport::new(
        inst,
        &result.schedule,
        Some(&result.vector),
        kind.as_str(),
        seed,
        set.as_str(),
        dev,
    );
    Ok(PySolveResult {
        makespan: result.makespan,
        vector: result.vector.to_string(),
        trace: result.trace.iter().map(|p| (p.iteration, p.makespan)).collect(),
        entries: report
            .entries
            .iter()
            .map(|e| (e.robot, e.label.clone(), e.clean_start, e.clean_end, e.wait))
            .collect(),
        feasible: check_feasibility(&result.schedule, &mats).is_empty(),
        wall_time: result.wall_time.as_secs_f64(),
        report_json: report.to_json(),
    })
}

/// Makespan of a solution vector written as `orders|...|workloads|...`.
#[pyfunction]
#[pyo3(signature = (instance, vector, robust = "none", deviation = 0.1, scenarios = 10, scenario_seed = 0))]
fn decode(
    instance: &PyInstance,
    vector: &str,
    robust: &str,
    deviation: f64,
    scenarios: usize,
    scenario_seed: u64,
) -> PyResult<f64> {
    let inst = &instance.inner;
    let v: SolutionVector = vector.parse().map_err(value_err)?;
    let (mats, _) = matrices(inst, robust, deviation, scenarios, scenario_seed)?;
    let sched = Decoder::new(inst, &mats).decode(&v).map_err(value_err)?;
    Ok(sched.makespan)
}

/// The MILP model in LP format.
#[pyfunction]
#[pyo3(signature = (instance, robust = "none", deviation = 0.1, scenarios = 10, scenario_seed = 0))]
fn lp(
    instance: &PyInstance,
    robust: &str,
    deviation: f64,
    scenarios: usize,
    scenario_seed: u64,
) -> PyResult<String> {
    let inst = &instance.inner;
    let (mats, _) = matrices(inst, robust, deviation, scenarios, scenario_seed)?;
    Ok(export_lp(&mats, inst))
}

#[pymodule]
fn rohyta(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(lp, m)?)?;
    m.add("InvalidInstance", m.py().get_type::<InvalidInstance>())?;
    m.add("Infeasible", m.py().get_type::<Infeasible>())?;
    Ok(())
}
