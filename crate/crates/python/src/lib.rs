//! Python bindings for `benaloh-core`.
//!
//! Strategies cross the boundary as plain lists of floats; the device's
//! never-cheat mass is a separate `p_never` argument. Reports come back as
//! dicts keyed like the CLI's JSON output.

#![allow(non_snake_case)]

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use benaloh_core::oracle;
use benaloh_core::simulator::VoterSpec;
use benaloh_core::stackelberg::BestResponseSet;
use benaloh_core::{
    CheatRound, DeviceMixedStrategy, GameError, SimConfig, VoterBehavioralStrategy,
    VoterMixedStrategy,
};

fn to_py(e: GameError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Payoff parameters and horizon of one game.
#[pyclass(name = "GameParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyGameParams {
    inner: benaloh_core::GameParams,
}

#[pymethods]
impl PyGameParams {
    #[new]
    #[pyo3(signature = (asucc_V, afail_V, asucc_D, afail_D, c_audit, n_max))]
    fn new(
        asucc_V: f64,
        afail_V: f64,
        asucc_D: f64,
        afail_D: f64,
        c_audit: f64,
        n_max: u32,
    ) -> PyResult<Self> {
        let inner = benaloh_core::GameParams::new(asucc_V, afail_V, asucc_D, afail_D, c_audit, n_max)
            .map_err(to_py)?;
        Ok(PyGameParams { inner })
    }

    /// The two-round running example (2, 3, 1, 4, 1, n_max=2).
    #[staticmethod]
    fn culnane_teague() -> Self {
        PyGameParams {
            inner: benaloh_core::GameParams::culnane_teague(),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyGameParams { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("params serialize")
    }

    #[getter]
    fn asucc_V(&self) -> f64 {
        self.inner.asucc_v()
    }

    #[getter]
    fn afail_V(&self) -> f64 {
        self.inner.afail_v()
    }

    #[getter]
    fn asucc_D(&self) -> f64 {
        self.inner.asucc_d()
    }

    #[getter]
    fn afail_D(&self) -> f64 {
        self.inner.afail_d()
    }

    #[getter]
    fn c_audit(&self) -> f64 {
        self.inner.c_audit()
    }

    #[getter]
    fn n_max(&self) -> u32 {
        self.inner.n_max()
    }

    /// asucc_D / (asucc_D + afail_D)
    #[getter]
    fn ratio(&self) -> f64 {
        self.inner.ratio()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "GameParams(asucc_V={}, afail_V={}, asucc_D={}, afail_D={}, c_audit={}, n_max={})",
            p.asucc_v(),
            p.afail_v(),
            p.asucc_d(),
            p.afail_d(),
            p.c_audit(),
            p.n_max()
        )
    }
}

fn voter(probs: Vec<f64>) -> PyResult<VoterMixedStrategy> {
    VoterMixedStrategy::new(probs).map_err(to_py)
}

fn device(probs: Vec<f64>, p_never: f64) -> PyResult<DeviceMixedStrategy> {
    DeviceMixedStrategy::new(probs, p_never).map_err(to_py)
}

fn cheat_round(n_cheat: Option<u32>) -> CheatRound {
    n_cheat.map_or(CheatRound::Never, CheatRound::At)
}

/// Payoffs (u_V, u_D) of a pure profile; `n_cheat=None` means never cheat.
#[pyfunction]
#[pyo3(signature = (n_cast, n_cheat, params))]
fn payoff(n_cast: u32, n_cheat: Option<u32>, params: &PyGameParams) -> PyResult<(f64, f64)> {
    let u = benaloh_core::payoff(n_cast, cheat_round(n_cheat), &params.inner).map_err(to_py)?;
    Ok((u.u_v, u.u_d))
}

#[pyfunction]
#[pyo3(signature = (s_V, s_D, params, p_never=0.0))]
fn expected_payoffs(
    s_V: Vec<f64>,
    s_D: Vec<f64>,
    params: &PyGameParams,
    p_never: f64,
) -> PyResult<(f64, f64)> {
    let u = benaloh_core::expected_payoffs(&voter(s_V)?, &device(s_D, p_never)?, &params.inner)
        .map_err(to_py)?;
    Ok((u.u_v, u.u_d))
}

#[pyfunction]
fn behavioral_to_mixed(b_V: Vec<f64>) -> PyResult<Vec<f64>> {
    let b = VoterBehavioralStrategy::new(b_V).map_err(to_py)?;
    Ok(benaloh_core::behavioral_to_mixed(&b).map_err(to_py)?.probs().to_vec())
}

#[pyfunction]
fn mixed_to_behavioral(s_V: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(benaloh_core::mixed_to_behavioral(&voter(s_V)?).probs().to_vec())
}

#[pyfunction]
fn nash_voter_mixed(params: &PyGameParams) -> Vec<f64> {
    benaloh_core::nash_voter_mixed(&params.inner).probs().to_vec()
}

#[pyfunction]
fn nash_voter_behavioral(params: &PyGameParams) -> Vec<f64> {
    benaloh_core::nash_voter_behavioral(&params.inner).probs().to_vec()
}

#[pyfunction]
fn approx_behavioral(params: &PyGameParams) -> Vec<f64> {
    benaloh_core::approx_behavioral(&params.inner).probs().to_vec()
}

#[pyfunction]
fn nash_device(params: &PyGameParams) -> PyResult<Vec<f64>> {
    Ok(benaloh_core::nash_device(&params.inner)
        .map_err(to_py)?
        .probs()
        .to_vec())
}

/// Dict with keys s_V, b_V, s_D, Eu_V, Eu_D, R.
#[pyfunction]
fn nash_solution<'py>(py: Python<'py>, params: &PyGameParams) -> PyResult<Bound<'py, PyDict>> {
    let sol = benaloh_core::nash_solution(&params.inner).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("s_V", sol.s_v.probs().to_vec())?;
    d.set_item("b_V", sol.b_v.probs().to_vec())?;
    d.set_item("s_D", sol.s_d.probs().to_vec())?;
    d.set_item("Eu_V", sol.eu.u_v)?;
    d.set_item("Eu_D", sol.eu.u_d)?;
    d.set_item("R", sol.ratio)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (s_V, s_D, params, p_never=0.0, tol=1e-9))]
fn verify_equilibrium<'py>(
    py: Python<'py>,
    s_V: Vec<f64>,
    s_D: Vec<f64>,
    params: &PyGameParams,
    p_never: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = benaloh_core::verify_equilibrium(&voter(s_V)?, &device(s_D, p_never)?, &params.inner, tol)
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("is_equilibrium", r.is_equilibrium)?;
    d.set_item("max_gain_voter", r.max_gain_voter)?;
    d.set_item("max_gain_device", r.max_gain_device)?;
    d.set_item("voter_indifference_residual", r.voter_indifference_residual)?;
    d.set_item("device_indifference_residual", r.device_indifference_residual)?;
    Ok(d)
}

/// One of "only_honest_first", "only_cheat_first", "full_interval".
#[pyfunction]
fn best_response_device(p_V: f64, params: &PyGameParams) -> PyResult<&'static str> {
    let br = benaloh_core::best_response_device(p_V, &params.inner).map_err(to_py)?;
    Ok(match br {
        BestResponseSet::OnlyHonestFirst => "only_honest_first",
        BestResponseSet::OnlyCheatFirst => "only_cheat_first",
        BestResponseSet::FullInterval => "full_interval",
    })
}

#[pyfunction]
fn utility_vs_best_response(p_V: f64, params: &PyGameParams) -> PyResult<f64> {
    benaloh_core::utility_vs_best_response(p_V, &params.inner).map_err(to_py)
}

#[pyfunction]
fn stackelberg_value(params: &PyGameParams) -> PyResult<f64> {
    benaloh_core::stackelberg_value(&params.inner).map_err(to_py)
}

/// (p_V, guaranteed payoff)
#[pyfunction]
fn epsilon_optimal(params: &PyGameParams, epsilon: f64) -> PyResult<(f64, f64)> {
    benaloh_core::epsilon_optimal(&params.inner, epsilon).map_err(to_py)
}

#[pyfunction]
fn compare_nash_stackelberg<'py>(
    py: Python<'py>,
    params: &PyGameParams,
    epsilon: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = benaloh_core::compare_nash_stackelberg(&params.inner, epsilon).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("sval", r.sval)?;
    d.set_item("p_V_NE", r.p_v_ne)?;
    d.set_item("nash_Eu_V", r.nash_eu_v)?;
    d.set_item("epsilon", r.epsilon)?;
    d.set_item("p_V_eps", r.p_v_eps)?;
    d.set_item("Eu_V_eps", r.eu_v_eps)?;
    Ok(d)
}

/// (sup estimate, maximizing p_V)
#[pyfunction]
#[pyo3(signature = (params, grid_n=100_000))]
fn grid_sweep_sval(params: &PyGameParams, grid_n: usize) -> PyResult<(f64, f64)> {
    oracle::grid_sweep_sval(&params.inner, grid_n).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (p_V, params, grid_n=1_000))]
fn brute_force_device_br(p_V: f64, params: &PyGameParams, grid_n: usize) -> PyResult<Vec<f64>> {
    oracle::brute_force_device_br(p_V, &params.inner, grid_n).map_err(to_py)
}

/// (last_round_eliminated, second_to_last_eliminable or None)
#[pyfunction]
fn backward_induction_probe(params: &PyGameParams) -> (bool, Option<bool>) {
    let r = oracle::backward_induction_probe(&oracle::build_game_tree(&params.inner));
    (r.last_round_eliminated, r.second_to_last_eliminable)
}

/// Monte Carlo play. `voter` is a mixed strategy, or a per-round behavioral
/// plan when `behavioral=True`.
#[pyfunction]
#[pyo3(signature = (params, voter, device_probs, p_never=0.0, trials=1_000_000, seed=42, behavioral=false))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    params: &PyGameParams,
    voter: Vec<f64>,
    device_probs: Vec<f64>,
    p_never: f64,
    trials: u64,
    seed: u64,
    behavioral: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let voter = if behavioral {
        VoterSpec::Behavioral(VoterBehavioralStrategy::new(voter).map_err(to_py)?)
    } else {
        VoterSpec::Mixed(self::voter(voter)?)
    };
    let config = SimConfig {
        params: params.inner,
        voter,
        device: device(device_probs, p_never)?,
        trials,
        seed,
    };
    let r = py
        .detach(|| benaloh_core::simulate(&config))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("mean_u_V", r.mean_u_v)?;
    d.set_item("mean_u_D", r.mean_u_d)?;
    d.set_item("stderr_u_V", r.stderr_u_v)?;
    d.set_item("stderr_u_D", r.stderr_u_d)?;
    d.set_item("freq_cast_as_intended", r.freq_cast_as_intended)?;
    d.set_item("freq_cheated", r.freq_cheated)?;
    d.set_item("freq_caught", r.freq_caught)?;
    d.set_item("trials", r.trials)?;
    Ok(d)
}

#[pymodule]
fn benaloh(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGameParams>()?;
    m.add_function(wrap_pyfunction!(payoff, m)?)?;
    m.add_function(wrap_pyfunction!(expected_payoffs, m)?)?;
    m.add_function(wrap_pyfunction!(behavioral_to_mixed, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_to_behavioral, m)?)?;
    m.add_function(wrap_pyfunction!(nash_voter_mixed, m)?)?;
    m.add_function(wrap_pyfunction!(nash_voter_behavioral, m)?)?;
    m.add_function(wrap_pyfunction!(approx_behavioral, m)?)?;
    m.add_function(wrap_pyfunction!(nash_device, m)?)?;
    m.add_function(wrap_pyfunction!(nash_solution, m)?)?;
    m.add_function(wrap_pyfunction!(verify_equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(best_response_device, m)?)?;
    m.add_function(wrap_pyfunction!(utility_vs_best_response, m)?)?;
    m.add_function(wrap_pyfunction!(stackelberg_value, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_optimal, m)?)?;
    m.add_function(wrap_pyfunction!(compare_nash_stackelberg, m)?)?;
    m.add_function(wrap_pyfunction!(grid_sweep_sval, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_device_br, m)?)?;
    m.add_function(wrap_pyfunction!(backward_induction_probe, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
