//! Rank–frequency exponent estimation.
//!
//! Two estimators: a least-squares line through `(ln r, ln count)` and a
//! discrete power-law maximum likelihood fit over ranks at or above a cutoff.
//!
//! The least-squares fit samples the window at log-spaced ranks by default.
//! Fitting every rank weights the tail decade far more than the head: on the
//! step-shaped rank curves of random text the last decade alone holds 90% of
//! the points and drags the slope toward whichever plateau it ends on.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::csv_err;
use crate::zeta::hurwitz_zeta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    OlsLoglog,
    DiscreteMle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub alpha_hat: f64,
    pub stderr: f64,
    pub method: FitMethod,
    pub rank_window: (u64, u64),
    pub n_points: usize,
}

/// Ranks paired with non-negative frequencies, ranks strictly increasing.
/// Frequencies may be counts or probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    ranks: Vec<u64>,
    values: Vec<f64>,
}

impl RankTable {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        let (ranks, values): (Vec<u64>, Vec<f64>) = pairs.into_iter().unzip();
        if let Some(&r) = ranks.first() {
            if r == 0 {
                return Err(Error::Domain("ranks start at 1".into()));
            }
        }
        if ranks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("ranks must be strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("frequencies must be finite and non-negative, got {v}")));
        }
        Ok(Self { ranks, values })
    }

    /// Counts already in rank order; ranks are assigned `1, 2, ...`.
    pub fn from_sorted_counts(counts: impl IntoIterator<Item = u64>) -> Result<Self> {
        let values: Vec<f64> = counts.into_iter().map(|c| c as f64).collect();
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Domain("counts must be non-increasing in rank".into()));
        }
        Self::from_pairs((1..).zip(values))
    }

    /// Per-type counts in any order; sorted descending to form ranks.
    pub fn from_counts(counts: impl IntoIterator<Item = u64>) -> Self {
        let mut counts: Vec<u64> = counts.into_iter().filter(|&c| c > 0).collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        Self::from_sorted_counts(counts).expect("sorted")
    }

    /// Reads CSV with a header containing a `count` column. A `rank` column,
    /// if present, supplies ranks; otherwise rows are ranked by count.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers().map_err(csv_err)?.clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let count_col = col("count").ok_or_else(|| Error::Parse("missing `count` column".into()))?;
        let rank_col = col("rank");
        let mut pairs = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(csv_err)?;
            let field = |i: usize| record.get(i).unwrap_or("").trim();
            let count: f64 = field(count_col)
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad count {:?}", line + 2, field(count_col))))?;
            let rank = match rank_col {
                Some(i) => field(i)
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: bad rank {:?}", line + 2, field(i))))?,
                None => 0,
            };
            pairs.push((rank, count));
        }
        if rank_col.is_none() {
            pairs.sort_by(|a, b| b.1.total_cmp(&a.1));
            for (i, p) in pairs.iter_mut().enumerate() {
                p.0 = i as u64 + 1;
            }
        }
        Self::from_pairs(pairs)
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.ranks.iter().copied().zip(self.values.iter().copied())
    }

    pub fn value_at(&self, rank: u64) -> Option<f64> {
        self.ranks.binary_search(&rank).ok().map(|i| self.values[i])
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { ranks: self.ranks.clone(), values: self.values.iter().map(|v| v * factor).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RankSampling {
    /// Every rank in the window.
    All,
    /// Ranks `round(r_min * (r_max/r_min)^(i/(n-1)))`, `n = floor(decades * per_decade) + 1`.
    LogSpaced { per_decade: u32 },
}

impl Default for RankSampling {
    fn default() -> Self {
        RankSampling::LogSpaced { per_decade: 20 }
    }
}

/// Ranks considered by a least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub r_min: u64,
    /// `None`: the last rank whose frequency is at least `min_count`.
    pub r_max: Option<u64>,
    pub min_count: f64,
    pub sampling: RankSampling,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self { r_min: 10, r_max: None, min_count: 5.0, sampling: RankSampling::default() }
    }
}

impl FitWindow {
    pub fn new(r_min: u64, r_max: u64) -> Self {
        Self { r_max: Some(r_max), ..Self::default() }.with_r_min(r_min)
    }

    pub fn with_r_min(mut self, r_min: u64) -> Self {
        self.r_min = r_min;
        self
    }

    pub fn with_min_count(mut self, min_count: f64) -> Self {
        self.min_count = min_count;
        self
    }

    pub fn with_sampling(mut self, sampling: RankSampling) -> Self {
        self.sampling = sampling;
        self
    }
}

fn log_spaced_ranks(r_min: u64, r_max: u64, per_decade: u32) -> Vec<u64> {
    let ratio = r_max as f64 / r_min as f64;
    let n = (ratio.log10() * per_decade as f64).floor() as usize + 1;
    let mut ranks: Vec<u64> = (0..n.max(2))
        .map(|i| (r_min as f64 * ratio.powf(i as f64 / (n.max(2) - 1) as f64)).round() as u64)
        .collect();
    ranks.push(r_max);
    ranks.sort_unstable();
    ranks.dedup();
    ranks
}

pub fn fit_ols(table: &RankTable, window: &FitWindow) -> Result<FitResult> {
    if window.r_min == 0 {
        return Err(Error::Domain("r_min must be at least 1".into()));
    }
    let usable = |v: f64| v >= window.min_count && v > 0.0;
    let r_max = match window.r_max {
        Some(r) => r,
        None => table
            .iter()
            .filter(|&(r, v)| r >= window.r_min && usable(v))
            .map(|(r, _)| r)
            .last()
            .ok_or_else(|| Error::InsufficientData("no ranks in the window reach min_count".into()))?,
    };
    if r_max <= window.r_min {
        return Err(Error::Domain(format!(
            "rank window [{}, {r_max}] is empty",
            window.r_min
        )));
    }
    let in_window = |r: u64| r >= window.r_min && r <= r_max;
    let points: Vec<(f64, f64)> = match window.sampling {
        RankSampling::All => table
            .iter()
            .filter(|&(r, v)| in_window(r) && usable(v))
            .map(|(r, v)| ((r as f64).ln(), v.ln()))
            .collect(),
        RankSampling::LogSpaced { per_decade } => log_spaced_ranks(window.r_min, r_max, per_decade.max(1))
            .into_iter()
            .filter_map(|r| table.value_at(r).filter(|&v| usable(v)).map(|v| ((r as f64).ln(), v.ln())))
            .collect(),
    };
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable points in rank window [{}, {r_max}], need 3",
            points.len(),
            window.r_min
        )));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(FitResult {
        alpha_hat: -slope,
        stderr,
        method: FitMethod::OlsLoglog,
        rank_window: (window.r_min, r_max),
        n_points: points.len(),
    })
}

const MLE_LOWER: f64 = 1.0001;
const MLE_UPPER: f64 = 10.0;
const MLE_TOL: f64 = 1e-6;
const MIN_OBSERVATIONS: f64 = 100.0;

/// Discrete power law `P(r) = r^(-alpha) / zeta(alpha, r_min)` over ranks
/// `r >= r_min`, with each rank observed `count` times.
pub fn fit_mle(table: &RankTable, r_min: u64) -> Result<FitResult> {
    if r_min == 0 {
        return Err(Error::Domain("r_min must be at least 1".into()));
    }
    let rows: Vec<(u64, f64)> = table.iter().filter(|&(r, v)| r >= r_min && v > 0.0).collect();
    let total: f64 = rows.iter().map(|r| r.1).sum();
    if rows.len() < 3 {
        return Err(Error::InsufficientData(format!("{} ranks at or above {r_min}, need 3", rows.len())));
    }
    if total < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData(format!("{total} observations above the cutoff, need 100")));
    }
    if rows.iter().all(|r| r.1 == rows[0].1) {
        return Err(Error::InsufficientData("all counts are equal; no rank dependence to fit".into()));
    }
    let mean_ln_rank: f64 = rows.iter().map(|&(r, v)| v / total * (r as f64).ln()).sum();
    let a = r_min as f64;
    let nll = |alpha: f64| alpha * mean_ln_rank + hurwitz_zeta(alpha, a).ln();

    let alpha = golden_section_min(nll, MLE_LOWER, MLE_UPPER, MLE_TOL);
    if alpha - MLE_LOWER < 10.0 * MLE_TOL || MLE_UPPER - alpha < 10.0 * MLE_TOL {
        return Err(Error::InsufficientData(format!(
            "likelihood maximum at the search boundary (alpha = {alpha:.6})"
        )));
    }
    let h = 1e-4;
    let curvature = (nll(alpha + h) - 2.0 * nll(alpha) + nll(alpha - h)) / (h * h);
    let stderr = (1.0 / (total * curvature)).sqrt();
    Ok(FitResult {
        alpha_hat: alpha,
        stderr,
        method: FitMethod::DiscreteMle,
        rank_window: (r_min, rows.last().map_or(r_min, |r| r.0)),
        n_points: rows.len(),
    })
}

fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}
