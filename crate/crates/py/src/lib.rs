//! Python bindings. Reports cross the boundary as plain dicts built from
//! their JSON form.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use monkeytext::analytic;
use monkeytext::compare::{resolve_params, ComparisonReport, Tolerances};
use monkeytext::corpus::{profile_text as core_profile_text, NormalizationOptions, SeparatorPolicy};
use monkeytext::simulate::simulate as core_simulate;
use monkeytext::zipf_fit::{fit_mle as core_fit_mle, fit_ols as core_fit_ols, FitWindow, RankSampling, RankTable};
use monkeytext::{AnalyticReport, Error};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io(msg) => PyOSError::new_err(msg),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for monkeytext::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "ModelParams", module = "monkeytext", frozen, from_py_object)]
#[derive(Clone)]
struct PyModelParams {
    inner: monkeytext::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (m, q, letter_probs = None))]
    fn new(m: u32, q: f64, letter_probs: Option<Vec<f64>>) -> PyResult<Self> {
        let inner = match letter_probs {
            Some(p) => monkeytext::ModelParams::with_letter_probs(m, q, p),
            None => monkeytext::ModelParams::new(m, q),
        }
        .py_err()?;
        Ok(Self { inner })
    }

    #[getter]
    fn m(&self) -> u32 {
        self.inner.m()
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q()
    }

    #[getter]
    fn letter_probs(&self) -> Option<Vec<f64>> {
        self.inner.letter_probs().map(<[f64]>::to_vec)
    }

    fn is_uniform(&self) -> bool {
        self.inner.is_uniform()
    }

    fn __repr__(&self) -> String {
        format!("ModelParams(m={}, q={})", self.inner.m(), self.inner.q())
    }
}

#[pyclass(name = "CorpusStats", module = "monkeytext", frozen)]
struct PyCorpusStats {
    inner: monkeytext::CorpusStats,
}

#[pymethods]
impl PyCorpusStats {
    #[getter]
    fn total_tokens(&self) -> u64 {
        self.inner.total_tokens
    }

    #[getter]
    fn n_symbols(&self) -> u64 {
        self.inner.n_symbols
    }

    fn tokens(&self, k: u32) -> u64 {
        self.inner.tokens(k)
    }

    fn types(&self, k: u32) -> u64 {
        self.inner.types(k)
    }

    fn hapaxes(&self, k: u32) -> u64 {
        self.inner.hapaxes(k)
    }

    fn hapax_fraction(&self, k: u32) -> PyResult<f64> {
        self.inner.hapax_fraction(k).py_err()
    }

    /// `(rank, word, count)` rows, optionally only the first `limit`.
    #[pyo3(signature = (limit = None))]
    fn rank_frequency(&self, limit: Option<usize>) -> Vec<(u64, String, u64)> {
        let rows = &self.inner.rank_frequency;
        rows[..limit.unwrap_or(rows.len()).min(rows.len())]
            .iter()
            .map(|r| (r.rank(), r.word().to_string(), r.count()))
            .collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: monkeytext::CorpusStats::from_json(text.as_bytes()).py_err()? })
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "CorpusStats(n_symbols={}, total_tokens={}, types={})",
            self.inner.n_symbols,
            self.inner.total_tokens,
            self.inner.rank_frequency.len()
        )
    }
}

#[pyfunction]
fn word_length_pmf(q: f64, k: u32) -> PyResult<f64> {
    analytic::word_length_pmf(q, k).py_err()
}

#[pyfunction]
fn word_length_moments(q: f64) -> PyResult<(f64, f64)> {
    analytic::word_length_moments(q).py_err()
}

#[pyfunction]
fn expected_word_count(n: u64, q: f64) -> PyResult<f64> {
    analytic::expected_word_count(n, q).py_err()
}

#[pyfunction]
fn expected_tokens_of_length(n: u64, q: f64, k: u32) -> PyResult<f64> {
    analytic::expected_tokens_of_length(n, q, k).py_err()
}

#[pyfunction]
fn word_probability(params: &PyModelParams, k: u32) -> PyResult<f64> {
    analytic::word_probability(&params.inner, k).py_err()
}

#[pyfunction]
fn expected_occurrences(params: &PyModelParams, n: u64, k: u32) -> PyResult<f64> {
    analytic::expected_occurrences(&params.inner, n, k).py_err()
}

#[pyfunction]
fn expected_distinct_types(params: &PyModelParams, n: u64, k: u32) -> PyResult<f64> {
    analytic::expected_distinct_types(&params.inner, n, k).py_err()
}

#[pyfunction]
fn expected_unique_types(params: &PyModelParams, n: u64, k: u32) -> PyResult<f64> {
    analytic::expected_unique_types(&params.inner, n, k).py_err()
}

/// `(value, has_core)`.
#[pyfunction]
fn critical_length(params: &PyModelParams, n: u64) -> PyResult<(f64, bool)> {
    let c = analytic::critical_length(&params.inner, n).py_err()?;
    Ok((c.value, c.has_core))
}

#[pyfunction]
fn zipf_exponent(params: &PyModelParams) -> f64 {
    analytic::zipf_exponent(&params.inner)
}

#[pyfunction]
fn rank_boundary(m: u32, k: u32) -> PyResult<u64> {
    analytic::rank_boundary(m, k).py_err()
}

#[pyfunction]
fn predicted_rank_frequency(params: &PyModelParams, r: u64) -> PyResult<f64> {
    analytic::predicted_rank_frequency(&params.inner, r).py_err()
}

#[pyfunction]
fn poisson_occurrence_pmf(lam: f64, c: u64) -> PyResult<f64> {
    analytic::poisson_occurrence_pmf(lam, c).py_err()
}

#[pyfunction]
#[pyo3(signature = (params, n, k_max = None))]
fn predict<'py>(py: Python<'py>, params: &PyModelParams, n: u64, k_max: Option<u32>) -> PyResult<Bound<'py, PyAny>> {
    let report = AnalyticReport::build(&params.inner, n, k_max).py_err()?;
    to_dict(py, &report)
}

#[pyfunction]
#[pyo3(signature = (params, n, seed = 0, tracked_k_max = monkeytext::stats::DEFAULT_TRACKED_K_MAX))]
fn simulate(py: Python<'_>, params: &PyModelParams, n: u64, seed: u64, tracked_k_max: u32) -> PyCorpusStats {
    let p = params.inner.clone();
    let inner = py.detach(move || {
        let mut stats = core_simulate(&p, n, seed, tracked_k_max).finalize();
        stats.params_hint = Some(p.clone());
        stats.generator = Some(monkeytext::generator::CorpusSidecar::new(&p, n, seed));
        stats
    });
    PyCorpusStats { inner }
}

/// Returns `(profile_dict, CorpusStats)`.
#[pyfunction]
#[pyo3(signature = (text, case_fold = true, strip_punctuation = true, separator_policy = "unicode_whitespace"))]
fn profile_text<'py>(
    py: Python<'py>,
    text: &str,
    case_fold: bool,
    strip_punctuation: bool,
    separator_policy: &str,
) -> PyResult<(Bound<'py, PyAny>, PyCorpusStats)> {
    let separator_policy = match separator_policy {
        "unicode_whitespace" => SeparatorPolicy::UnicodeWhitespace,
        "ascii_space_only" => SeparatorPolicy::AsciiSpaceOnly,
        other => return Err(PyValueError::new_err(format!("unknown separator policy {other:?}"))),
    };
    let opts = NormalizationOptions { case_fold, strip_punctuation, separator_policy };
    let (profile, stats) = core_profile_text(text, &opts).py_err()?;
    Ok((to_dict(py, &profile)?, PyCorpusStats { inner: stats }))
}

/// `pairs` is a list of `(rank, frequency)`. `per_decade = None` fits
/// every rank in the window.
#[pyfunction]
#[pyo3(signature = (pairs, r_min = 10, r_max = None, min_count = 5.0, per_decade = Some(20)))]
fn fit_ols<'py>(
    py: Python<'py>,
    pairs: Vec<(u64, f64)>,
    r_min: u64,
    r_max: Option<u64>,
    min_count: f64,
    per_decade: Option<u32>,
) -> PyResult<Bound<'py, PyAny>> {
    let table = RankTable::from_pairs(pairs).py_err()?;
    let sampling = per_decade.map_or(RankSampling::All, |per_decade| RankSampling::LogSpaced { per_decade });
    let fit = core_fit_ols(&table, &FitWindow { r_min, r_max, min_count, sampling }).py_err()?;
    to_dict(py, &fit)
}

#[pyfunction]
#[pyo3(signature = (pairs, r_min = 1))]
fn fit_mle<'py>(py: Python<'py>, pairs: Vec<(u64, f64)>, r_min: u64) -> PyResult<Bound<'py, PyAny>> {
    let table = RankTable::from_pairs(pairs).py_err()?;
    to_dict(py, &core_fit_mle(&table, r_min).py_err()?)
}

#[pyfunction]
#[pyo3(signature = (stats, m = None, q = None))]
fn compare<'py>(py: Python<'py>, stats: &PyCorpusStats, m: Option<u32>, q: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let (params, source) = resolve_params(&stats.inner, m, q).py_err()?;
    let report = ComparisonReport::build(&stats.inner, &params, source, &Tolerances::default()).py_err()?;
    to_dict(py, &report)
}

#[pymodule(name = "monkeytext")]
fn init_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyCorpusStats>()?;
    m.add_function(wrap_pyfunction!(word_length_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(word_length_moments, m)?)?;
    m.add_function(wrap_pyfunction!(expected_word_count, m)?)?;
    m.add_function(wrap_pyfunction!(expected_tokens_of_length, m)?)?;
    m.add_function(wrap_pyfunction!(word_probability, m)?)?;
    m.add_function(wrap_pyfunction!(expected_occurrences, m)?)?;
    m.add_function(wrap_pyfunction!(expected_distinct_types, m)?)?;
    m.add_function(wrap_pyfunction!(expected_unique_types, m)?)?;
    m.add_function(wrap_pyfunction!(critical_length, m)?)?;
    m.add_function(wrap_pyfunction!(zipf_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(rank_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_rank_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_occurrence_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(profile_text, m)?)?;
    m.add_function(wrap_pyfunction!(fit_ols, m)?)?;
    m.add_function(wrap_pyfunction!(fit_mle, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add("__version__", monkeytext::TOOL_VERSION)?;
    Ok(())
}
