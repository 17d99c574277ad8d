//! Python bindings: deterministic streams, the four exploration engines,
//! tail estimation with exponent fitting, the critical-curve solver and the
//! walk estimators.

// the pyo3 0.22 macros expand to PyErr-to-PyErr conversions
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use critwalk::harness::{self, ModelSpec, TailCurve};
use critwalk::walk::IncrementLaw;
use critwalk::{er, intersection, oracle, quantum, regular, rng, walk};

fn value_err(e: critwalk::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Deterministic splittable random stream.
#[pyclass(name = "RngStream")]
struct PyRngStream {
    inner: rng::RngStream,
}

#[pymethods]
impl PyRngStream {
    #[new]
    fn new(master_seed: u64, stream_index: u64) -> Self {
        PyRngStream { inner: rng::derive_stream(master_seed, stream_index) }
    }

    #[getter]
    fn master_seed(&self) -> u64 {
        self.inner.master_seed()
    }

    #[getter]
    fn stream_index(&self) -> u64 {
        self.inner.stream_index()
    }

    fn uniform(&mut self) -> f64 {
        self.inner.next_f64()
    }

    fn binomial(&mut self, count: u64, prob: f64) -> PyResult<u64> {
        rng::sample_binomial(count, prob, &mut self.inner).map_err(value_err)
    }

    fn cut_gamma(&mut self, theta: f64) -> PyResult<f64> {
        let params = rng::CutGammaParams::new(theta).map_err(value_err)?;
        Ok(rng::sample_cut_gamma(&params, &mut self.inner))
    }

    fn poisson_process(&mut self, rate: f64, length: f64) -> PyResult<Vec<f64>> {
        rng::sample_poisson_process(rate, length, &mut self.inner).map_err(value_err)
    }

    /// Fixed-width hex checkpoint of the stream state.
    fn state_token(&self) -> String {
        self.inner.state_token()
    }

    #[staticmethod]
    fn from_state_token(token: &str) -> PyResult<Self> {
        Ok(PyRngStream { inner: rng::RngStream::from_state_token(token).map_err(value_err)? })
    }
}

/// One trial's component sizes and walk statistics.
#[pyclass(name = "ComponentProfile")]
#[derive(Clone)]
struct PyProfile {
    inner: critwalk::ComponentProfile,
}

#[pymethods]
impl PyProfile {
    #[getter]
    fn sizes(&self) -> Vec<u64> {
        self.inner.sizes.clone()
    }

    #[getter]
    fn excursion_bounds(&self) -> Vec<u64> {
        self.inner.excursion_bounds.clone()
    }

    #[getter]
    fn max_active(&self) -> u64 {
        self.inner.max_active
    }

    #[getter]
    fn steps(&self) -> u64 {
        self.inner.steps
    }

    fn cmax(&self) -> u64 {
        self.inner.cmax()
    }

    fn n_components(&self) -> usize {
        self.inner.n_components()
    }

    fn __repr__(&self) -> String {
        format!(
            "ComponentProfile(components={}, cmax={}, steps={})",
            self.inner.n_components(),
            self.inner.cmax(),
            self.inner.steps
        )
    }
}

#[pyfunction]
#[pyo3(signature = (n, lam=0.0, p_override=None))]
fn er_edge_prob(n: usize, lam: f64, p_override: Option<f64>) -> PyResult<f64> {
    Ok(er::ErParams::new(n, lam, p_override).map_err(value_err)?.edge_prob())
}

#[pyfunction]
#[pyo3(signature = (n, stream, lam=0.0, p_override=None))]
fn er_explore(
    n: usize,
    stream: &mut PyRngStream,
    lam: f64,
    p_override: Option<f64>,
) -> PyResult<PyProfile> {
    let params = er::ErParams::new(n, lam, p_override).map_err(value_err)?;
    Ok(PyProfile { inner: er::explore(&params, &mut stream.inner) })
}

#[pyfunction]
#[pyo3(signature = (n, d, lam=0.0, p_override=None))]
fn regular_percolation_prob(n: usize, d: usize, lam: f64, p_override: Option<f64>) -> PyResult<f64> {
    Ok(regular::RegParams::new(n, d, lam, p_override).map_err(value_err)?.percolation_prob())
}

#[pyfunction]
#[pyo3(signature = (n, d, stream, lam=0.0, p_override=None))]
fn regular_explore(
    n: usize,
    d: usize,
    stream: &mut PyRngStream,
    lam: f64,
    p_override: Option<f64>,
) -> PyResult<PyProfile> {
    let params = regular::RegParams::new(n, d, lam, p_override).map_err(value_err)?;
    Ok(PyProfile { inner: regular::explore(&params, &mut stream.inner) })
}

/// Returns (profile, attributes_discovered).
#[pyfunction]
fn intersection_explore(
    n: usize,
    beta: f64,
    gamma: f64,
    stream: &mut PyRngStream,
) -> PyResult<(PyProfile, u64)> {
    let params = intersection::IntersectionParams::new(n, beta, gamma).map_err(value_err)?;
    let trial = intersection::explore(&params, &mut stream.inner);
    Ok((PyProfile { inner: trial.profile }, trial.attributes_discovered))
}

#[pyfunction]
fn quantum_reduced_explore(
    n: usize,
    beta: f64,
    lam: f64,
    stream: &mut PyRngStream,
) -> PyResult<PyProfile> {
    let params = quantum::QuantumParams::new(n, beta, lam).map_err(value_err)?;
    Ok(PyProfile { inner: quantum::reduced_explore(&params, &mut stream.inner) })
}

#[pyfunction]
fn critical_residual(beta: f64, lam: f64) -> PyResult<f64> {
    quantum::critical_residual(beta, lam).map_err(value_err)
}

#[pyfunction]
fn solve_critical_lambda(py: Python<'_>, beta: f64) -> PyResult<PyObject> {
    let point = quantum::solve_critical_lambda(beta).map_err(value_err)?;
    let out = PyDict::new_bound(py);
    out.set_item("beta", point.beta)?;
    out.set_item("lambdas", point.lambdas)?;
    out.set_item("residuals", point.residuals)?;
    Ok(out.into())
}

#[pyfunction]
fn chernoff_bound(count: u64, prob: f64, x: f64) -> PyResult<f64> {
    if count < 1 || !(0.0..=1.0).contains(&prob) || !x.is_finite() || x < 0.0 {
        return Err(PyValueError::new_err(
            "chernoff bound needs count >= 1, prob in [0,1], x >= 0",
        ));
    }
    Ok(walk::chernoff_bound(count, prob, x))
}

fn law_from_name(
    law: &str,
    count: Option<u64>,
    prob: Option<f64>,
    d: Option<u32>,
) -> PyResult<IncrementLaw> {
    let need = |o: Option<f64>, what: &str| {
        o.ok_or_else(|| PyValueError::new_err(format!("law {law} needs {what}")))
    };
    Ok(match law {
        "poisson-minus-one" => IncrementLaw::PoissonMinusOne,
        "rademacher" => IncrementLaw::Rademacher,
        "binomial-minus-one" => IncrementLaw::BinomialMinusOne {
            count: count.ok_or_else(|| PyValueError::new_err("law needs count"))?,
            prob: need(prob, "prob")?,
        },
        "regular-step" => IncrementLaw::RegularStep {
            d: d.ok_or_else(|| PyValueError::new_err("law needs d"))?,
            prob: need(prob, "prob")?,
        },
        "cut-walk" => IncrementLaw::CutWalk {
            d: d.ok_or_else(|| PyValueError::new_err("law needs d"))?,
        },
        other => return Err(PyValueError::new_err(format!("unknown law {other:?}"))),
    })
}

fn estimate_dict(py: Python<'_>, est: walk::WalkEstimate) -> PyResult<PyObject> {
    let out = PyDict::new_bound(py);
    out.set_item("hits", est.hits)?;
    out.set_item("trials", est.trials)?;
    out.set_item("phat", est.phat)?;
    out.set_item("ci_lo", est.ci_lo)?;
    out.set_item("ci_hi", est.ci_hi)?;
    out.set_item("unreachable", est.unreachable)?;
    Ok(out.into())
}

#[pyfunction]
#[pyo3(signature = (law, horizon, trials, stream, count=None, prob=None, d=None))]
#[allow(clippy::too_many_arguments)]
fn stay_positive_estimate(
    py: Python<'_>,
    law: &str,
    horizon: u64,
    trials: u64,
    stream: &mut PyRngStream,
    count: Option<u64>,
    prob: Option<f64>,
    d: Option<u32>,
) -> PyResult<PyObject> {
    let law = law_from_name(law, count, prob, d)?;
    let est = walk::stay_positive_estimate(&law, horizon, trials, &mut stream.inner)
        .map_err(value_err)?;
    estimate_dict(py, est)
}

#[pyfunction]
#[pyo3(signature = (law, n, j, trials, stream, count=None, prob=None, d=None))]
#[allow(clippy::too_many_arguments)]
fn ballot_estimate(
    py: Python<'_>,
    law: &str,
    n: u64,
    j: i64,
    trials: u64,
    stream: &mut PyRngStream,
    count: Option<u64>,
    prob: Option<f64>,
    d: Option<u32>,
) -> PyResult<PyObject> {
    let law = law_from_name(law, count, prob, d)?;
    let est = walk::ballot_estimate(&law, n, j, trials, &mut stream.inner).map_err(value_err)?;
    estimate_dict(py, est)
}

/// Exact law of the largest component of G(n, p) for n <= 5: entry c-1 is
/// P(C_max = c).
#[pyfunction]
fn enumerate_er_cmax(n: usize, p: f64) -> PyResult<Vec<f64>> {
    oracle::enumerate_er_cmax(n, p).map_err(value_err)
}

/// Frequency of simple multigraphs over uniform stub pairings.
#[pyfunction]
fn simple_frequency(n: usize, d: usize, trials: u64, master_seed: u64) -> PyResult<(u64, u64)> {
    regular::simple_frequency(n, d, trials, master_seed).map_err(value_err)
}

fn curve_rows(py: Python<'_>, curve: &TailCurve) -> PyResult<Vec<PyObject>> {
    curve
        .rows
        .iter()
        .map(|r| {
            let row = PyDict::new_bound(py);
            row.set_item("direction", curve.direction.to_string())?;
            row.set_item("a", r.a)?;
            row.set_item("threshold", r.threshold)?;
            row.set_item("trials", r.trials)?;
            row.set_item("hits", r.hits)?;
            row.set_item("phat", r.phat)?;
            row.set_item("ci_lo", r.ci_lo)?;
            row.set_item("ci_hi", r.ci_hi)?;
            Ok(row.into())
        })
        .collect()
}

/// Runs a tail experiment and returns per-trial cmax values, tail rows and
/// exponent fits as plain Python structures.
#[pyfunction]
#[pyo3(signature = (model, n, trials, a_grid, master_seed=0, workers=1, direction="lower",
                    lam=0.0, d=3, beta=1.0, gamma=1.0, p_override=None))]
#[allow(clippy::too_many_arguments)]
fn run_tail(
    py: Python<'_>,
    model: &str,
    n: usize,
    trials: u64,
    a_grid: Vec<f64>,
    master_seed: u64,
    workers: usize,
    direction: &str,
    lam: f64,
    d: usize,
    beta: f64,
    gamma: f64,
    p_override: Option<f64>,
) -> PyResult<PyObject> {
    let spec = match model {
        "er" => ModelSpec::Er(er::ErParams::new(n, lam, p_override).map_err(value_err)?),
        "regular" => ModelSpec::Regular(
            regular::RegParams::new(n, d, lam, p_override).map_err(value_err)?,
        ),
        "intersection" => ModelSpec::Intersection(
            intersection::IntersectionParams::new(n, beta, gamma).map_err(value_err)?,
        ),
        "quantum" => {
            ModelSpec::Quantum(quantum::QuantumParams::new(n, beta, lam).map_err(value_err)?)
        }
        other => return Err(PyValueError::new_err(format!("unknown model {other:?}"))),
    };
    let summaries = harness::run(&spec, trials, master_seed, workers).map_err(value_err)?;
    let mut curves = Vec::new();
    if direction == "lower" || direction == "both" {
        curves.push(harness::lower_tail(&summaries, n, &a_grid).map_err(value_err)?);
    }
    if direction == "upper" || direction == "both" {
        curves.push(harness::upper_tail(&summaries, n, &a_grid).map_err(value_err)?);
    }
    if curves.is_empty() {
        return Err(PyValueError::new_err(format!("unknown direction {direction:?}")));
    }

    let out = PyDict::new_bound(py);
    out.set_item("cmax", summaries.iter().map(|s| s.cmax).collect::<Vec<_>>())?;
    let mut rows = Vec::new();
    for curve in &curves {
        rows.extend(curve_rows(py, curve)?);
    }
    out.set_item("rows", rows)?;
    let fits: Vec<PyObject> = curves
        .iter()
        .map(|curve| {
            let entry = PyDict::new_bound(py);
            entry.set_item("direction", curve.direction.to_string())?;
            match harness::fit_stretch_exponent(curve) {
                Ok(fit) => {
                    entry.set_item("slope", fit.slope)?;
                    entry.set_item("intercept", fit.intercept)?;
                    entry.set_item("ci_lo", fit.ci_lo)?;
                    entry.set_item("ci_hi", fit.ci_hi)?;
                    entry.set_item("rows_used", fit.rows_used)?;
                }
                Err(e) => entry.set_item("error", e.to_string())?,
            }
            Ok(entry.into())
        })
        .collect::<PyResult<_>>()?;
    out.set_item("fits", fits)?;
    Ok(out.into())
}

#[pymodule]
fn critwalk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRngStream>()?;
    m.add_class::<PyProfile>()?;
    m.add_function(wrap_pyfunction!(er_edge_prob, m)?)?;
    m.add_function(wrap_pyfunction!(er_explore, m)?)?;
    m.add_function(wrap_pyfunction!(regular_percolation_prob, m)?)?;
    m.add_function(wrap_pyfunction!(regular_explore, m)?)?;
    m.add_function(wrap_pyfunction!(intersection_explore, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_reduced_explore, m)?)?;
    m.add_function(wrap_pyfunction!(critical_residual, m)?)?;
    m.add_function(wrap_pyfunction!(solve_critical_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(chernoff_bound, m)?)?;
    m.add_function(wrap_pyfunction!(stay_positive_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(ballot_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_er_cmax, m)?)?;
    m.add_function(wrap_pyfunction!(simple_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(run_tail, m)?)?;
    Ok(())
}
