//! Empirical statistics against closed-form predictions.
//!
//! Per-length type and hapax rows are only emitted where the expected
//! statistical spread is small next to the tolerance (five standard
//! deviations inside the band). Elsewhere a miss says nothing about the
//! model, so the row is left out rather than reported as a failure.

use serde::{Deserialize, Serialize};

use crate::analytic::{
    critical_length, expected_distinct_types, expected_occurrences, expected_tokens_of_length,
    expected_unique_types, expected_word_count, zipf_exponent,
};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::stats::CorpusStats;
use crate::zipf_fit::{fit_ols, FitWindow};
use crate::TOOL_VERSION;

/// Guard against division by zero in relative errors.
pub const REL_ERROR_FLOOR: f64 = 1e-12;

/// Hapax fraction `λ e^(-λ) / (1 - e^(-λ))` at `λ = 1`, i.e. `1/(e - 1)`.
/// The observed crossing of this level locates the critical length.
pub const HAPAX_CROSSING_FRACTION: f64 = 0.581_976_706_869_326_4;

/// Spread allowance, in standard deviations, for gated rows.
const SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub total_tokens: f64,
    pub tokens_by_length: f64,
    /// Per-length token rows need at least this many predicted tokens.
    pub min_predicted_tokens: f64,
    pub types_by_length: f64,
    pub hapax_by_length: f64,
    /// Absolute.
    pub zipf_alpha: f64,
    /// Absolute, in letters.
    pub hapax_crossing: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            total_tokens: 0.005,
            tokens_by_length: 0.03,
            min_predicted_tokens: 1e4,
            types_by_length: 0.05,
            hapax_by_length: 0.05,
            zipf_alpha: 0.1,
            hapax_crossing: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMetric {
    /// Pass iff `rel_error <= tolerance`.
    Relative,
    /// Pass iff `|empirical - predicted| <= tolerance`.
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<u32>,
    /// `None` when the statistic could not be measured; such rows fail.
    pub empirical: Option<f64>,
    pub predicted: f64,
    pub rel_error: Option<f64>,
    pub tolerance: f64,
    pub metric: ErrorMetric,
    pub pass: bool,
}

impl ComparisonRow {
    pub fn new(name: &str, k: Option<u32>, empirical: Option<f64>, predicted: f64, tolerance: f64, metric: ErrorMetric) -> Self {
        let rel_error = empirical.map(|e| (e - predicted).abs() / predicted.abs().max(REL_ERROR_FLOOR));
        let pass = match (empirical, metric) {
            (None, _) => false,
            (Some(_), ErrorMetric::Relative) => rel_error.is_some_and(|r| r <= tolerance),
            (Some(e), ErrorMetric::Absolute) => (e - predicted).abs() <= tolerance,
        };
        Self { name: name.to_string(), k, empirical, predicted, rel_error, tolerance, metric, pass }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamsSource {
    Explicit,
    Generator,
    Inferred,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub params: ModelParams,
    pub params_source: ParamsSource,
    #[serde(rename = "N")]
    pub n: u64,
    pub seed: Option<u64>,
    pub prng_version: Option<String>,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub metadata: ReportMetadata,
    pub tolerances: Tolerances,
    pub rows: Vec<ComparisonRow>,
    pub notes: Vec<String>,
}

/// Picks the parameters to compare at: explicit values win, then the
/// generator settings recorded in the stats, then the inferred hint.
pub fn resolve_params(stats: &CorpusStats, m: Option<u32>, q: Option<f64>) -> Result<(ModelParams, ParamsSource)> {
    let (base, source) = match (&stats.generator, &stats.params_hint) {
        (Some(g), _) => (Some(g.params()?), ParamsSource::Generator),
        (None, Some(hint)) => (Some(hint.clone()), ParamsSource::Inferred),
        (None, None) => (None, ParamsSource::Explicit),
    };
    match (m, q, base) {
        (Some(m), Some(q), _) => Ok((ModelParams::new(m, q)?, ParamsSource::Explicit)),
        (None, None, Some(p)) => Ok((p, source)),
        (m, q, Some(p)) => Ok((ModelParams::new(m.unwrap_or(p.m()), q.unwrap_or(p.q()))?, ParamsSource::Explicit)),
        (_, _, None) => Err(Error::CannotInfer(
            "no parameters given and none recorded in the statistics; pass both m and q".into(),
        )),
    }
}

impl ComparisonReport {
    pub fn build(stats: &CorpusStats, params: &ModelParams, source: ParamsSource, tol: &Tolerances) -> Result<Self> {
        params.require_uniform()?;
        let n = stats.n_symbols;
        let q = params.q();
        let mut rows = Vec::new();
        let mut notes = Vec::new();
        if source == ParamsSource::Inferred {
            notes.push("parameters inferred from the corpus; predictions assume equiprobable letters".into());
        }

        rows.push(ComparisonRow::new(
            "total_tokens",
            None,
            Some(stats.total_tokens as f64),
            expected_word_count(n, q)?,
            tol.total_tokens,
            ErrorMetric::Relative,
        ));

        for k in 1.. {
            let predicted = expected_tokens_of_length(n, q, k)?;
            if predicted < tol.min_predicted_tokens {
                break;
            }
            rows.push(ComparisonRow::new(
                "tokens_by_length",
                Some(k),
                Some(stats.tokens(k) as f64),
                predicted,
                tol.tokens_by_length,
                ErrorMetric::Relative,
            ));
        }

        for k in 1..=stats.tracked_k_max {
            let lambda = expected_occurrences(params, n, k)?;
            let predicted = expected_distinct_types(params, n, k)?;
            // Independent per-word presence: variance ≈ E[V_k] e^(-λ).
            let sd = (predicted * (-lambda).exp()).sqrt();
            if predicted > 0.0 && SIGMAS * sd <= tol.types_by_length * predicted {
                rows.push(ComparisonRow::new(
                    "types_by_length",
                    Some(k),
                    Some(stats.types(k) as f64),
                    predicted,
                    tol.types_by_length,
                    ErrorMetric::Relative,
                ));
            }
        }

        let min_hapaxes = (SIGMAS / tol.hapax_by_length).powi(2);
        for k in 1..=stats.tracked_k_max {
            let predicted = expected_unique_types(params, n, k)?;
            if predicted >= min_hapaxes {
                rows.push(ComparisonRow::new(
                    "hapax_by_length",
                    Some(k),
                    Some(stats.hapaxes(k) as f64),
                    predicted,
                    tol.hapax_by_length,
                    ErrorMetric::Relative,
                ));
            }
        }

        let alpha = zipf_exponent(params);
        let fitted = match fit_ols(&stats.rank_table(), &FitWindow::default()) {
            Ok(fit) => Some(fit.alpha_hat),
            Err(e) => {
                notes.push(format!("rank-frequency fit failed: {e}"));
                None
            }
        };
        rows.push(ComparisonRow::new("zipf_alpha", None, fitted, alpha, tol.zipf_alpha, ErrorMetric::Absolute));

        match critical_length(params, n)?.core() {
            Some(k_star) => {
                let observed = stats.hapax_crossing(HAPAX_CROSSING_FRACTION);
                if observed.is_none() {
                    notes.push(format!(
                        "no tracked length has hapax fraction above {HAPAX_CROSSING_FRACTION:.4}"
                    ));
                }
                rows.push(ComparisonRow::new(
                    "hapax_crossing_length",
                    None,
                    observed.map(f64::from),
                    k_star.ceil(),
                    tol.hapax_crossing,
                    ErrorMetric::Absolute,
                ));
            }
            None => notes.push("N q^2 <= 1: no frequent core, crossing row skipped".into()),
        }

        let (seed, prng_version) = match &stats.generator {
            Some(g) => (Some(g.seed), Some(g.prng_version.clone())),
            None => (None, None),
        };
        Ok(Self {
            metadata: ReportMetadata {
                params: params.clone(),
                params_source: source,
                n,
                seed,
                prng_version,
                tool_version: TOOL_VERSION.to_string(),
            },
            tolerances: *tol,
            rows,
            notes,
        })
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ComparisonRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn row(&self, name: &str, k: Option<u32>) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.name == name && r.k == k)
    }
}
