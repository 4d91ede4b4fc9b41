//! Closed-form predictions of the random-text model.
//!
//! Conventions used throughout:
//!
//! | symbol | meaning                                         |
//! |--------|-------------------------------------------------|
//! | `m`    | number of letters (non-space symbols)           |
//! | `q`    | probability that a symbol is the space          |
//! | `N`    | text length in symbols                          |
//! | `k`    | word length in letters, always `>= 1`           |
//! | `K`    | expected word tokens, `N q (1 - q)`             |
//! | `π_k`  | probability that a word token equals one fixed `k`-letter string |
//! | `λ_k`  | expected occurrences of one fixed `k`-letter string, `K π_k` |
//!
//! Word lengths follow `P(L = k) = q (1 - q)^(k - 1)` for `k >= 1`. Runs of
//! consecutive spaces produce no word, so there is no length-0 word.
//!
//! Formulas involving individual word types assume equiprobable letters and
//! return [`Error::Unsupported`] otherwise.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::params::ModelParams;

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("space probability must lie in (0, 1), got {q}")))
    }
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        Err(domain("word length must be at least 1"))
    } else {
        Ok(())
    }
}

fn powi(base: f64, exp: u32) -> f64 {
    match i32::try_from(exp) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(exp as f64),
    }
}

/// `P(L = k) = q (1 - q)^(k - 1)`.
pub fn word_length_pmf(q: f64, k: u32) -> Result<f64> {
    check_q(q)?;
    check_k(k)?;
    Ok(q * powi(1.0 - q, k - 1))
}

/// Mean `1/q` and variance `(1 - q)/q^2` of the word length.
pub fn word_length_moments(q: f64) -> Result<(f64, f64)> {
    check_q(q)?;
    Ok((1.0 / q, (1.0 - q) / (q * q)))
}

/// Exact expected number of words in a text of `n` symbols,
/// `(1 - q)(1 + (N - 1) q)`. A text-final word counts.
pub fn expected_word_count(n: u64, q: f64) -> Result<f64> {
    check_q(q)?;
    if n == 0 {
        return Ok(0.0);
    }
    Ok((1.0 - q) * (1.0 + (n - 1) as f64 * q))
}

/// Approximate expected number of words of length `k`, `N q^2 (1 - q)^k`.
/// Ignores boundary effects at the start and end of the text.
pub fn expected_tokens_of_length(n: u64, q: f64, k: u32) -> Result<f64> {
    check_q(q)?;
    check_k(k)?;
    Ok(n as f64 * q * q * powi(1.0 - q, k))
}

/// `π_k = q (1 - q)^(k - 1) / m^k`, evaluated as `q/(1-q) · ((1-q)/m)^k`
/// so that `m^k` never overflows. Underflows to `0.0` for very long words.
pub fn word_probability(params: &ModelParams, k: u32) -> Result<f64> {
    params.require_uniform()?;
    check_k(k)?;
    let q = params.q();
    let ratio = (1.0 - q) / params.m() as f64;
    Ok(q / (1.0 - q) * powi(ratio, k))
}

/// `λ_k = N q^2 ((1 - q)/m)^k`, the mean number of occurrences of one fixed
/// `k`-letter word.
pub fn expected_occurrences(params: &ModelParams, n: u64, k: u32) -> Result<f64> {
    params.require_uniform()?;
    check_k(k)?;
    let q = params.q();
    let ratio = (1.0 - q) / params.m() as f64;
    Ok(n as f64 * q * q * powi(ratio, k))
}

/// Expected number of distinct `k`-letter words,
/// `m^k [1 - (1 - π_k)^K]` with real-valued `K = N q (1 - q)`.
///
/// The power is computed as `exp(K ln(1 - π_k))` and the product is
/// rearranged so that neither `m^k` nor `1/π_k` is ever formed.
pub fn expected_distinct_types(params: &ModelParams, n: u64, k: u32) -> Result<f64> {
    let pi = word_probability(params, k)?;
    let q = params.q();
    let big_k = n as f64 * q * (1.0 - q);
    // m^k π_k, the probability that a word has length k.
    let mass = q * powi(1.0 - q, k - 1);
    if pi == 0.0 {
        return Ok(big_k * mass);
    }
    let log_miss = (-pi).ln_1p();
    let x = big_k * log_miss;
    let frac = if x == 0.0 { 1.0 } else { -x.exp_m1() / -x };
    Ok((frac * big_k * (-log_miss / pi) * mass).min(powi(params.m() as f64, k)))
}

/// Poisson-approximate expected number of `k`-letter types seen exactly
/// once, `m^k λ_k e^(-λ_k)`.
pub fn expected_unique_types(params: &ModelParams, n: u64, k: u32) -> Result<f64> {
    let lambda = expected_occurrences(params, n, k)?;
    let q = params.q();
    // m^k λ_k = K · P(L = k)
    let tokens = n as f64 * q * q * powi(1.0 - q, k);
    Ok(tokens * (-lambda).exp())
}

/// Solution of `λ_k = 1` for real `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalLength {
    /// `ln(N q^2) / (ln m - ln(1 - q))`; non-positive when there is no core.
    pub value: f64,
    /// False when `N q^2 <= 1`: every length is already in the rare regime.
    pub has_core: bool,
}

impl CriticalLength {
    pub fn core(&self) -> Option<f64> {
        self.has_core.then_some(self.value)
    }
}

pub fn critical_length(params: &ModelParams, n: u64) -> Result<CriticalLength> {
    params.require_uniform()?;
    let q = params.q();
    let scale = n as f64 * q * q;
    let denom = (params.m() as f64).ln() - (-q).ln_1p();
    Ok(CriticalLength {
        value: scale.ln() / denom,
        has_core: scale > 1.0,
    })
}

/// `α = 1 - ln(1 - q) / ln m`, always greater than 1.
pub fn zipf_exponent(params: &ModelParams) -> f64 {
    1.0 - (-params.q()).ln_1p() / (params.m() as f64).ln()
}

/// Number of distinct words of length at most `k`:
/// `R_k = m (m^k - 1)/(m - 1)`, with `R_0 = 0`.
///
/// Exact in `u64`; any `R_k > u64::MAX` (for `m = 26` that is `k >= 14`) is
/// reported as [`Error::Overflow`].
pub fn rank_boundary(m: u32, k: u32) -> Result<u64> {
    if m < 2 {
        return Err(domain(format!("alphabet size must be at least 2, got {m}")));
    }
    let mut total: u64 = 0;
    let mut block: u64 = 1;
    for _ in 0..k {
        block = block
            .checked_mul(m as u64)
            .ok_or_else(|| Error::Overflow(format!("{m}^{k} does not fit in u64")))?;
        total = total
            .checked_add(block)
            .ok_or_else(|| Error::Overflow(format!("R_{k} for m = {m} does not fit in u64")))?;
    }
    Ok(total)
}

/// Length of the words occupying rank `r` in the probability ordering:
/// the unique `k` with `R_(k-1) < r <= R_k`.
pub fn length_at_rank(m: u32, r: u64) -> Result<u32> {
    if r == 0 {
        return Err(domain("ranks start at 1"));
    }
    if m < 2 {
        return Err(domain(format!("alphabet size must be at least 2, got {m}")));
    }
    let mut k = 1;
    loop {
        match rank_boundary(m, k) {
            Ok(bound) if r <= bound => return Ok(k),
            Ok(_) => k += 1,
            // R_k exceeds u64::MAX >= r
            Err(Error::Overflow(_)) => return Ok(k),
            Err(e) => return Err(e),
        }
    }
}

/// Exact model probability of the word at rank `r`: a step function equal to
/// `π_k` on the block `(R_(k-1), R_k]`. Asymptotically `∝ r^(-α)`.
pub fn predicted_rank_frequency(params: &ModelParams, r: u64) -> Result<f64> {
    params.require_uniform()?;
    let k = length_at_rank(params.m(), r)?;
    word_probability(params, k)
}

pub(crate) fn ln_factorial(n: u64) -> f64 {
    if n < 128 {
        return (2..=n).map(|i| (i as f64).ln()).sum();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// `P(X = c) = e^(-λ) λ^c / c!`, evaluated in log space.
pub fn poisson_occurrence_pmf(lambda: f64, c: u64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(domain(format!("Poisson mean must be finite and non-negative, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(if c == 0 { 1.0 } else { 0.0 });
    }
    Ok((-lambda + c as f64 * lambda.ln() - ln_factorial(c)).exp())
}

/// Exact expectations for a tiny text, by enumerating every space/non-space
/// pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceTable {
    pub n: u32,
    pub q: f64,
    /// Exact `E[K_N]`.
    pub expected_words: f64,
    /// Exact `E[K_N^(k)]` for `k = 1..=k_max`.
    pub expected_tokens_by_length: BTreeMap<u32, f64>,
}

pub const BRUTE_FORCE_MAX_N: u32 = 20;

/// Sums `q^(#spaces) (1 - q)^(#letters)` times the word statistics over all
/// `2^N` boundary patterns. Refuses `N > 20`.
pub fn exact_bruteforce_word_stats(n: u32, q: f64, k_max: u32) -> Result<BruteForceTable> {
    check_q(q)?;
    if n == 0 {
        return Err(domain("text length must be at least 1"));
    }
    if n > BRUTE_FORCE_MAX_N {
        return Err(domain(format!(
            "brute-force enumeration is limited to N <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    let weights: Vec<f64> = (0..=n)
        .map(|spaces| powi(q, spaces) * powi(1.0 - q, n - spaces))
        .collect();
    let mut expected_words = 0.0;
    let mut by_length = vec![0.0; n as usize + 1];
    let mut counts = vec![0u32; n as usize + 1];

    for mask in 0u32..(1u32 << n) {
        // bit i set <=> symbol i is a space
        let w = weights[mask.count_ones() as usize];
        counts.iter_mut().for_each(|c| *c = 0);
        let mut words = 0u32;
        let mut run = 0usize;
        for i in 0..n {
            if mask & (1 << i) != 0 {
                if run > 0 {
                    counts[run] += 1;
                    words += 1;
                    run = 0;
                }
            } else {
                run += 1;
            }
        }
        if run > 0 {
            counts[run] += 1;
            words += 1;
        }
        expected_words += w * words as f64;
        for (len, &c) in counts.iter().enumerate().skip(1) {
            if c > 0 {
                by_length[len] += w * c as f64;
            }
        }
    }

    let expected_tokens_by_length = (1..=k_max)
        .map(|k| (k, by_length.get(k as usize).copied().unwrap_or(0.0)))
        .collect();
    Ok(BruteForceTable { n, q, expected_words, expected_tokens_by_length })
}

/// Every closed-form prediction for one `(params, N)` pair, tabulated for
/// `k = 1..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub params: ModelParams,
    #[serde(rename = "N")]
    pub n: u64,
    pub k_max: u32,
    pub expected_words: f64,
    pub word_length_mean: f64,
    pub word_length_variance: f64,
    pub word_length_pmf: BTreeMap<u32, f64>,
    pub expected_tokens_by_length: BTreeMap<u32, f64>,
    pub word_probability_by_length: BTreeMap<u32, f64>,
    pub expected_occurrences_by_length: BTreeMap<u32, f64>,
    pub expected_distinct_by_length: BTreeMap<u32, f64>,
    pub expected_unique_by_length: BTreeMap<u32, f64>,
    /// `R_k`; lengths whose boundary overflows `u64` are omitted and listed
    /// in `rank_boundary_overflow_from`.
    pub rank_boundaries: BTreeMap<u32, u64>,
    pub critical_length: f64,
    /// Set when `N q^2 <= 1`.
    pub no_core: bool,
    pub zipf_alpha: f64,
    /// Lengths whose `λ_k` underflowed to zero.
    pub underflow_lengths: Vec<u32>,
    pub rank_boundary_overflow_from: Option<u32>,
}

impl AnalyticReport {
    /// `max(ceil(4/q), ceil(2 k*))`, the second term only when a core exists.
    pub fn default_k_max(params: &ModelParams, n: u64) -> Result<u32> {
        let crit = critical_length(params, n)?;
        let by_q = (4.0 / params.q()).ceil() as u32;
        let by_crit = crit.core().map_or(0, |k| (2.0 * k).ceil() as u32);
        Ok(by_q.max(by_crit).max(1))
    }

    pub fn build(params: &ModelParams, n: u64, k_max: Option<u32>) -> Result<Self> {
        params.require_uniform()?;
        let k_max = match k_max {
            Some(0) => return Err(domain("k_max must be at least 1")),
            Some(k) => k,
            None => Self::default_k_max(params, n)?,
        };
        let q = params.q();
        let crit = critical_length(params, n)?;
        let (mean, variance) = word_length_moments(q)?;

        let mut report = AnalyticReport {
            params: params.clone(),
            n,
            k_max,
            expected_words: expected_word_count(n, q)?,
            word_length_mean: mean,
            word_length_variance: variance,
            word_length_pmf: BTreeMap::new(),
            expected_tokens_by_length: BTreeMap::new(),
            word_probability_by_length: BTreeMap::new(),
            expected_occurrences_by_length: BTreeMap::new(),
            expected_distinct_by_length: BTreeMap::new(),
            expected_unique_by_length: BTreeMap::new(),
            rank_boundaries: BTreeMap::new(),
            critical_length: crit.value,
            no_core: !crit.has_core,
            zipf_alpha: zipf_exponent(params),
            underflow_lengths: Vec::new(),
            rank_boundary_overflow_from: None,
        };

        for k in 1..=k_max {
            report.word_length_pmf.insert(k, word_length_pmf(q, k)?);
            report.expected_tokens_by_length.insert(k, expected_tokens_of_length(n, q, k)?);
            report.word_probability_by_length.insert(k, word_probability(params, k)?);
            let lambda = expected_occurrences(params, n, k)?;
            if lambda == 0.0 && n > 0 {
                report.underflow_lengths.push(k);
            }
            report.expected_occurrences_by_length.insert(k, lambda);
            report
                .expected_distinct_by_length
                .insert(k, expected_distinct_types(params, n, k)?);
            report
                .expected_unique_by_length
                .insert(k, expected_unique_types(params, n, k)?);
            if report.rank_boundary_overflow_from.is_none() {
                match rank_boundary(params.m(), k) {
                    Ok(r) => {
                        report.rank_boundaries.insert(k, r);
                    }
                    Err(Error::Overflow(_)) => report.rank_boundary_overflow_from = Some(k),
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(report)
    }

    /// Long-format table with columns `quantity,k,value`; `k` is empty for
    /// scalar quantities.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["quantity", "k", "value"]).map_err(crate::stats::csv_err)?;
        let scalars = [
            ("N", self.n as f64),
            ("m", self.params.m() as f64),
            ("q", self.params.q()),
            ("expected_words", self.expected_words),
            ("word_length_mean", self.word_length_mean),
            ("word_length_variance", self.word_length_variance),
            ("critical_length", self.critical_length),
            ("no_core", if self.no_core { 1.0 } else { 0.0 }),
            ("zipf_alpha", self.zipf_alpha),
        ];
        for (name, value) in scalars {
            w.write_record([name, "", &value.to_string()]).map_err(crate::stats::csv_err)?;
        }
        let maps = [
            ("word_length_pmf", &self.word_length_pmf),
            ("expected_tokens_by_length", &self.expected_tokens_by_length),
            ("word_probability_by_length", &self.word_probability_by_length),
            ("expected_occurrences_by_length", &self.expected_occurrences_by_length),
            ("expected_distinct_by_length", &self.expected_distinct_by_length),
            ("expected_unique_by_length", &self.expected_unique_by_length),
        ];
        for (name, map) in maps {
            for (k, value) in map {
                w.write_record([name, &k.to_string(), &value.to_string()])
                    .map_err(crate::stats::csv_err)?;
            }
        }
        for (k, r) in &self.rank_boundaries {
            w.write_record(["rank_boundary", &k.to_string(), &r.to_string()])
                .map_err(crate::stats::csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The per-position convention: `space` is the space probability (`p`),
/// `1 - space` the non-space probability (`q`), and `alphabet` the letter
/// count (`A`).
///
/// | per-position | main convention |
/// |--------------|-----------------|
/// | `A`          | `m`             |
/// | `p`          | `q`             |
/// | `q`          | `1 - q`         |
/// | `W_N`        | `K_N`           |
///
/// Under this mapping `E[X_w] = N p^2 (q/A)^k` equals `λ_k` and
/// `ln(A/q)/ln A` equals `α`.
pub mod appendix {
    use super::*;

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct AppendixParams {
        pub alphabet: u32,
        pub space: f64,
    }

    impl AppendixParams {
        pub fn from_model(params: &ModelParams) -> Self {
            Self { alphabet: params.m(), space: params.q() }
        }

        pub fn to_model(&self) -> Result<ModelParams> {
            ModelParams::new(self.alphabet, self.space)
        }

        pub fn non_space(&self) -> f64 {
            1.0 - self.space
        }

        /// `N p^2 (q/A)^k`.
        pub fn expected_occurrences(&self, n: u64, k: u32) -> f64 {
            let p = self.space;
            n as f64 * p * p * powi(self.non_space() / self.alphabet as f64, k)
        }

        /// `ln(N p^2) / ln(A/q)`.
        pub fn critical_length(&self, n: u64) -> f64 {
            let p = self.space;
            (n as f64 * p * p).ln() / (self.alphabet as f64 / self.non_space()).ln()
        }

        /// `ln(A/q) / ln A`.
        pub fn zipf_exponent(&self) -> f64 {
            let a = self.alphabet as f64;
            (a / self.non_space()).ln() / a.ln()
        }

        /// `A^k (1 - exp(-N p^2 (q/A)^k))`, the Poisson form of the
        /// expected vocabulary.
        pub fn expected_distinct(&self, n: u64, k: u32) -> f64 {
            let lambda = self.expected_occurrences(n, k);
            powi(self.alphabet as f64, k) * -(-lambda).exp_m1()
        }
    }
}
