//! Real-text ingestion: normalization, profiling, parameter inference.
//!
//! Normalization runs per character in a fixed order: lowercase, drop
//! punctuation (Unicode general categories `P*`), then classify separators.
//! A run of separators is one word boundary for segmentation, but every
//! separator character counts toward `q_hat`.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};
use unicode_general_category::get_general_category;

use crate::error::{Error, Result};
use crate::generator::SymbolId;
use crate::params::ModelParams;
use crate::stats::{csv_err, CorpusStats, LetterCoding, StatsAccumulator, DEFAULT_TRACKED_K_MAX};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparatorPolicy {
    /// Only U+0020 separates words.
    AsciiSpaceOnly,
    /// Any character with the Unicode `White_Space` property.
    #[default]
    UnicodeWhitespace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationOptions {
    pub case_fold: bool,
    pub strip_punctuation: bool,
    pub separator_policy: SeparatorPolicy,
}

impl Default for NormalizationOptions {
    fn default() -> Self {
        Self { case_fold: true, strip_punctuation: true, separator_policy: SeparatorPolicy::default() }
    }
}

impl NormalizationOptions {
    /// No folding or stripping, space-only separators: reads a generator
    /// export back exactly.
    pub fn raw() -> Self {
        Self { case_fold: false, strip_punctuation: false, separator_policy: SeparatorPolicy::AsciiSpaceOnly }
    }

    fn is_separator(&self, c: char) -> bool {
        match self.separator_policy {
            SeparatorPolicy::AsciiSpaceOnly => c == ' ',
            SeparatorPolicy::UnicodeWhitespace => c.is_whitespace(),
        }
    }

    /// Applies folding and stripping, returning the surviving characters.
    pub fn normalize(&self, text: &str) -> String {
        let mut out = String::with_capacity(text.len());
        for c in text.chars() {
            self.push_normalized(c, |c| out.push(c));
        }
        out
    }

    fn push_normalized(&self, c: char, mut emit: impl FnMut(char)) {
        let keep = |c: char| !(self.strip_punctuation && is_punctuation(c));
        if self.case_fold {
            c.to_lowercase().filter(|&c| keep(c)).for_each(emit);
        } else if keep(c) {
            emit(c);
        }
    }
}

fn is_punctuation(c: char) -> bool {
    get_general_category(c).abbreviation().starts_with('P')
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusProfile {
    pub n_chars: u64,
    pub n_separators: u64,
    pub q_hat: f64,
    pub m_hat: u32,
    pub letter_histogram: BTreeMap<char, u64>,
}

/// Incremental profiler; feed text in any number of pieces.
#[derive(Debug, Clone)]
pub struct CorpusProfiler {
    opts: NormalizationOptions,
    acc: StatsAccumulator,
    word: Vec<SymbolId>,
    n_chars: u64,
    n_separators: u64,
    letters: BTreeMap<char, u64>,
}

impl CorpusProfiler {
    pub fn new(opts: NormalizationOptions) -> Self {
        Self::with_tracked_k_max(opts, DEFAULT_TRACKED_K_MAX)
    }

    pub fn with_tracked_k_max(opts: NormalizationOptions, tracked_k_max: u32) -> Self {
        Self {
            opts,
            acc: StatsAccumulator::with_coding(tracked_k_max, LetterCoding::Codepoint),
            word: Vec::new(),
            n_chars: 0,
            n_separators: 0,
            letters: BTreeMap::new(),
        }
    }

    pub fn feed(&mut self, text: &str) {
        let opts = self.opts;
        for c in text.chars() {
            opts.push_normalized(c, |c| self.push(c));
        }
    }

    fn push(&mut self, c: char) {
        self.n_chars += 1;
        if self.opts.is_separator(c) {
            self.n_separators += 1;
            if !self.word.is_empty() {
                self.acc.observe_letters(&self.word);
                self.word.clear();
            }
        } else {
            *self.letters.entry(c).or_default() += 1;
            self.word.push(LetterCoding::encode_char(c));
        }
    }

    /// Fails with [`Error::EmptyCorpus`] when no letters survived
    /// normalization.
    pub fn finish(mut self) -> Result<(CorpusProfile, CorpusStats)> {
        if !self.word.is_empty() {
            self.acc.observe_letters(&self.word);
        }
        if self.letters.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        self.acc.add_symbols(self.n_chars);
        let profile = CorpusProfile {
            n_chars: self.n_chars,
            n_separators: self.n_separators,
            q_hat: self.n_separators as f64 / self.n_chars as f64,
            m_hat: self.letters.len() as u32,
            letter_histogram: self.letters,
        };
        let mut stats = self.acc.finalize();
        stats.params_hint = infer_params(&profile).ok();
        Ok((profile, stats))
    }
}

pub fn profile_text(text: &str, opts: &NormalizationOptions) -> Result<(CorpusProfile, CorpusStats)> {
    let mut profiler = CorpusProfiler::new(*opts);
    profiler.feed(text);
    profiler.finish()
}

pub fn profile_bytes(bytes: &[u8], opts: &NormalizationOptions) -> Result<(CorpusProfile, CorpusStats)> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Decode { offset: e.valid_up_to() as u64 })?;
    profile_text(text, opts)
}

/// Streams UTF-8 from a reader; decode errors carry the absolute byte offset.
pub fn profile_reader<R: Read>(mut reader: R, opts: &NormalizationOptions) -> Result<(CorpusProfile, CorpusStats)> {
    let mut profiler = CorpusProfiler::new(*opts);
    let mut buf = vec![0u8; 1 << 16];
    let mut filled = 0;
    let mut consumed: u64 = 0;
    loop {
        let read = reader.read(&mut buf[filled..])?;
        let end = filled + read;
        let valid = match std::str::from_utf8(&buf[..end]) {
            Ok(s) => {
                profiler.feed(s);
                end
            }
            Err(e) => {
                let valid = e.valid_up_to();
                // An incomplete sequence at the very end may finish in the next read.
                if e.error_len().is_some() || read == 0 {
                    return Err(Error::Decode { offset: consumed + valid as u64 });
                }
                profiler.feed(std::str::from_utf8(&buf[..valid]).expect("validated prefix"));
                valid
            }
        };
        consumed += valid as u64;
        buf.copy_within(valid..end, 0);
        filled = end - valid;
        if read == 0 {
            break;
        }
    }
    profiler.finish()
}

/// Reads a `token,count` CSV. Each row is one word type taken verbatim, so
/// segmentation and normalization are skipped. The profile assumes one
/// separator per token, giving `n_chars = sum(count * (len + 1))`.
pub fn read_frequency_dump<R: Read>(reader: R) -> Result<(CorpusProfile, CorpusStats)> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Parse(format!("frequency dump needs a `{name}` column")))
    };
    let (token_col, count_col) = (col("token")?, col("count")?);
    let mut acc = StatsAccumulator::with_coding(DEFAULT_TRACKED_K_MAX, LetterCoding::Codepoint);
    let mut letters: BTreeMap<char, u64> = BTreeMap::new();
    let (mut n_chars, mut n_tokens) = (0u64, 0u64);
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = i + 2;
        let token = record.get(token_col).unwrap_or("");
        let count_field = record.get(count_col).unwrap_or("").trim();
        let count: u64 = count_field
            .parse()
            .map_err(|_| Error::Parse(format!("row {row}: bad count {count_field:?}")))?;
        if token.is_empty() {
            return Err(Error::Parse(format!("row {row}: empty token")));
        }
        let ids: Vec<SymbolId> = token.chars().map(LetterCoding::encode_char).collect();
        for c in token.chars() {
            *letters.entry(c).or_default() += count;
        }
        acc.observe_count(&ids, count);
        n_chars += count * (ids.len() as u64 + 1);
        n_tokens += count;
    }
    if n_tokens == 0 {
        return Err(Error::EmptyCorpus);
    }
    acc.add_symbols(n_chars);
    let profile = CorpusProfile {
        n_chars,
        n_separators: n_tokens,
        q_hat: n_tokens as f64 / n_chars as f64,
        m_hat: letters.len() as u32,
        letter_histogram: letters,
    };
    let mut stats = acc.finalize();
    stats.params_hint = infer_params(&profile).ok();
    Ok((profile, stats))
}

/// Uniform-letter parameters matching the profile's alphabet size and
/// separator rate. Real letter frequencies are not uniform, so predictions
/// at these parameters are a baseline, not a fit.
pub fn infer_params(profile: &CorpusProfile) -> Result<ModelParams> {
    if profile.m_hat < 2 {
        return Err(Error::CannotInfer(format!("need at least 2 distinct letters, saw {}", profile.m_hat)));
    }
    if !(profile.q_hat > 0.0 && profile.q_hat < 1.0) {
        return Err(Error::CannotInfer(format!("separator rate {} is degenerate", profile.q_hat)));
    }
    ModelParams::new(profile.m_hat, profile.q_hat)
}
