//! Python bindings: formulae, transition systems, games and the cross-checks.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use qmu_core::bridge;
use qmu_core::semantics::eval_with_stats;
use qmu_core::{
    assign_priorities, BridgeError, Environment, EvalError, ExtValue, GameError, SolveConfig, Tolerances,
};

create_exception!(qmu, NonConvergenceError, PyException, "A fixpoint or unfolding exhausted its iteration budget.");

fn input_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn eval_err(e: EvalError) -> PyErr {
    match e {
        EvalError::NoConvergence { .. } => NonConvergenceError::new_err(e.to_string()),
        _ => input_err(e),
    }
}

fn game_err(e: GameError) -> PyErr {
    match e {
        GameError::NoConvergence { .. } | GameError::StageBudget { .. } => NonConvergenceError::new_err(e.to_string()),
        _ => input_err(e),
    }
}

fn bridge_err(e: BridgeError) -> PyErr {
    if e.is_non_convergence() {
        NonConvergenceError::new_err(e.to_string())
    } else {
        input_err(e)
    }
}

fn tolerances(tol_fix: f64, tol_cmp: f64, cap: f64, max_iters: usize) -> PyResult<Tolerances> {
    let t = Tolerances { tol_fix, tol_cmp, cap, max_iters };
    t.validate().map_err(input_err)?;
    Ok(t)
}

/// JSON value to Python object; `"inf"` strings become `float("inf")`.
fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) if s == "inf" => f64::INFINITY.into_pyobject(py)?.into_any(),
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(xs) => {
            let list = PyList::empty(py);
            for x in xs {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn value_dict<'py>(py: Python<'py>, ids: impl Iterator<Item = String>, vals: &[ExtValue]) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (id, v) in ids.zip(vals) {
        d.set_item(id, v.get())?;
    }
    Ok(d)
}

/// A formula of the quantitative mu-calculus.
#[pyclass(module = "qmu", frozen)]
pub struct Formula {
    inner: qmu_core::Formula,
}

#[pymethods]
impl Formula {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Formula { inner: qmu_core::parse(text).map_err(input_err)? })
    }

    /// The equivalent formula with negations pushed down to predicates.
    fn to_nnf(&self) -> PyResult<Formula> {
        Ok(Formula { inner: qmu_core::to_nnf(&self.inner).map_err(input_err)? })
    }

    fn size(&self) -> usize {
        self.inner.size()
    }

    fn alternation_depth(&self) -> u32 {
        assign_priorities(&self.inner).depth
    }

    fn free_vars(&self) -> Vec<String> {
        self.inner.free_vars().into_iter().collect()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", self.inner.to_string())
    }

    fn __eq__(&self, other: &Formula) -> bool {
        self.inner == other.inner
    }
}

/// A transition system with discounted edges and predicate values on states.
#[pyclass(module = "qmu", frozen)]
pub struct Qts {
    inner: qmu_core::Qts,
}

#[pymethods]
impl Qts {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Qts { inner: qmu_core::Qts::from_json_str(text).map_err(input_err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[getter]
    fn states(&self) -> Vec<String> {
        self.inner.ids().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Value of a closed formula at every state, as `{state: float}`.
    #[pyo3(signature = (formula, tol_fix = 1e-9, tol_cmp = 1e-6, cap = 1e12, max_iters = 10_000))]
    fn eval<'py>(
        &self,
        py: Python<'py>,
        formula: &Formula,
        tol_fix: f64,
        tol_cmp: f64,
        cap: f64,
        max_iters: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let tol = tolerances(tol_fix, tol_cmp, cap, max_iters)?;
        let phi = qmu_core::to_nnf(&formula.inner).map_err(input_err)?;
        let (vals, _) = eval_with_stats(&self.inner, &phi, &Environment::new(), &tol).map_err(eval_err)?;
        value_dict(py, self.inner.ids().iter().cloned(), &vals.0)
    }
}

/// A quantitative parity game.
#[pyclass(module = "qmu", frozen)]
pub struct Game {
    inner: qmu_core::QuantParityGame,
}

#[pymethods]
impl Game {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Game { inner: qmu_core::QuantParityGame::from_json_str(text).map_err(input_err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[getter]
    fn positions(&self) -> Vec<String> {
        self.inner.positions().iter().map(|p| p.id.clone()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Game value at every position, as `{position: float}`.
    #[pyo3(signature = (tol_fix = 1e-9, tol_cmp = 1e-6, cap = 1e12, max_iters = 10_000))]
    fn solve<'py>(
        &self,
        py: Python<'py>,
        tol_fix: f64,
        tol_cmp: f64,
        cap: f64,
        max_iters: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let tol = tolerances(tol_fix, tol_cmp, cap, max_iters)?;
        let sol = qmu_core::solve(&self.inner, &SolveConfig::from(tol)).map_err(game_err)?;
        value_dict(py, self.positions().into_iter(), &sol.values)
    }

    /// Solver statistics and the stage values of the outermost unfolding.
    #[pyo3(signature = (tol_fix = 1e-9, tol_cmp = 1e-6, cap = 1e12, max_iters = 10_000))]
    fn solve_details<'py>(
        &self,
        py: Python<'py>,
        tol_fix: f64,
        tol_cmp: f64,
        cap: f64,
        max_iters: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let tol = tolerances(tol_fix, tol_cmp, cap, max_iters)?;
        let sol = qmu_core::solve(&self.inner, &SolveConfig::from(tol)).map_err(game_err)?;
        let v = serde_json::json!({ "values": sol.values_json(&self.inner), "stats": sol.stats, "stages": sol.stages });
        to_py(py, &v)
    }

    /// Winning regions of a qualitative, non-discounted game: `(W0, W1)` as position ids.
    fn winning_regions(&self) -> PyResult<(Vec<String>, Vec<String>)> {
        let w = qmu_core::zielonka_qualitative(&self.inner).map_err(game_err)?;
        let ids = |vs: &[usize]| vs.iter().map(|&v| self.inner.id(v).to_string()).collect();
        Ok((ids(&w.w0), ids(&w.w1)))
    }
}

/// Parse a formula.
#[pyfunction]
fn parse(text: &str) -> PyResult<Formula> {
    Formula::new(text)
}

/// The model-checking game of a system and a closed formula.
#[pyfunction]
fn mc_game(system: &Qts, formula: &Formula) -> PyResult<Game> {
    let phi = qmu_core::to_nnf(&formula.inner).map_err(input_err)?;
    let mc = bridge::build_mc_game(&system.inner, &phi).map_err(bridge_err)?;
    Ok(Game { inner: mc.game })
}

/// The transition system encoding a game with priorities below `d`.
#[pyfunction]
fn game_to_qts(game: &Game, d: u32) -> PyResult<Qts> {
    Ok(Qts { inner: bridge::game_to_qts(&game.inner, d).map_err(bridge_err)? })
}

/// The formula whose value on the encoded system is the game value.
#[pyfunction]
fn win_formula(d: u32) -> PyResult<Formula> {
    Ok(Formula { inner: bridge::win_formula(d).map_err(bridge_err)? })
}

/// Compare a formula's value with the value of its model-checking game.
#[pyfunction]
#[pyo3(signature = (system, formula, tol_fix = 1e-9, tol_cmp = 1e-6, cap = 1e12, max_iters = 10_000))]
fn check_mc<'py>(
    py: Python<'py>,
    system: &Qts,
    formula: &Formula,
    tol_fix: f64,
    tol_cmp: f64,
    cap: f64,
    max_iters: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let tol = tolerances(tol_fix, tol_cmp, cap, max_iters)?;
    let r = bridge::check_mc_theorem(&system.inner, &formula.inner, &tol).map_err(bridge_err)?;
    to_py(py, &serde_json::to_value(r).expect("serializable"))
}

/// Compare a game's value with the win formula on the encoded system.
#[pyfunction]
#[pyo3(signature = (game, d, tol_fix = 1e-9, tol_cmp = 1e-6, cap = 1e12, max_iters = 10_000))]
fn check_win<'py>(
    py: Python<'py>,
    game: &Game,
    d: u32,
    tol_fix: f64,
    tol_cmp: f64,
    cap: f64,
    max_iters: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let tol = tolerances(tol_fix, tol_cmp, cap, max_iters)?;
    let r = bridge::check_win_theorem(&game.inner, d, &tol).map_err(bridge_err)?;
    to_py(py, &serde_json::to_value(r).expect("serializable"))
}

#[pymodule]
fn qmu(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Formula>()?;
    m.add_class::<Qts>()?;
    m.add_class::<Game>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(mc_game, m)?)?;
    m.add_function(wrap_pyfunction!(game_to_qts, m)?)?;
    m.add_function(wrap_pyfunction!(win_formula, m)?)?;
    m.add_function(wrap_pyfunction!(check_mc, m)?)?;
    m.add_function(wrap_pyfunction!(check_win, m)?)?;
    m.add("NonConvergenceError", m.py().get_type::<NonConvergenceError>())?;
    Ok(())
}
