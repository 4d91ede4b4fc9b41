//! Exact, mergeable word statistics.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{letter_char, CorpusSidecar, SymbolId};
use crate::params::ModelParams;
use crate::segmenter::WordToken;
use crate::zipf_fit::RankTable;

/// Types are tracked for words up to this length by default; longer words
/// still count as tokens.
pub const DEFAULT_TRACKED_K_MAX: u32 = 30;

/// How letter ids map to characters when words are rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LetterCoding {
    /// Generator letters `1..=m`, rendered through the export alphabet.
    Generated,
    /// Letter id is the Unicode scalar value plus one.
    Codepoint,
}

impl LetterCoding {
    pub fn encode_char(c: char) -> SymbolId {
        SymbolId(c as u32 + 1)
    }

    fn render(self, letters: &[SymbolId]) -> String {
        match self {
            LetterCoding::Generated => letters.iter().map(|s| letter_char(s.0)).collect(),
            LetterCoding::Codepoint => letters
                .iter()
                .map(|s| char::from_u32(s.0 - 1).unwrap_or('\u{FFFD}'))
                .collect(),
        }
    }
}

/// Streaming counters over word tokens. Words are interned to dense ids;
/// merging re-keys the other accumulator's words into this one.
#[derive(Debug, Clone)]
pub struct StatsAccumulator {
    tracked_k_max: u32,
    coding: LetterCoding,
    tokens_by_length: Vec<u64>,
    ids: HashMap<Box<[SymbolId]>, usize>,
    counts: Vec<u64>,
    total_tokens: u64,
    total_symbols: u64,
    untracked_tokens: u64,
}

impl Default for StatsAccumulator {
    fn default() -> Self {
        Self::new(DEFAULT_TRACKED_K_MAX)
    }
}

impl StatsAccumulator {
    pub fn new(tracked_k_max: u32) -> Self {
        Self::with_coding(tracked_k_max, LetterCoding::Generated)
    }

    pub fn with_coding(tracked_k_max: u32, coding: LetterCoding) -> Self {
        Self {
            tracked_k_max,
            coding,
            tokens_by_length: Vec::new(),
            ids: HashMap::new(),
            counts: Vec::new(),
            total_tokens: 0,
            total_symbols: 0,
            untracked_tokens: 0,
        }
    }

    pub fn tracked_k_max(&self) -> u32 {
        self.tracked_k_max
    }

    pub fn coding(&self) -> LetterCoding {
        self.coding
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn total_symbols(&self) -> u64 {
        self.total_symbols
    }

    /// Records that `n` more symbols (spaces included) were read.
    pub fn add_symbols(&mut self, n: u64) {
        self.total_symbols += n;
    }

    pub fn tokens_of_length(&self, k: usize) -> u64 {
        self.tokens_by_length.get(k).copied().unwrap_or(0)
    }

    pub fn observe(&mut self, word: &WordToken) {
        self.observe_letters(word.letters());
    }

    /// Counts one token with the given letters. `letters` must be non-empty
    /// and free of spaces.
    pub fn observe_letters(&mut self, letters: &[SymbolId]) {
        self.observe_count(letters, 1);
    }

    pub fn observe_count(&mut self, letters: &[SymbolId], count: u64) {
        debug_assert!(!letters.is_empty());
        if count == 0 {
            return;
        }
        let k = letters.len();
        if self.tokens_by_length.len() <= k {
            self.tokens_by_length.resize(k + 1, 0);
        }
        self.tokens_by_length[k] += count;
        self.total_tokens += count;
        if k > self.tracked_k_max as usize {
            self.untracked_tokens += count;
            return;
        }
        match self.ids.get(letters) {
            Some(&id) => self.counts[id] += count,
            None => {
                self.ids.insert(letters.into(), self.counts.len());
                self.counts.push(count);
            }
        }
    }

    /// Occurrences of one word (0 if unseen or longer than the tracked cap).
    pub fn count_of(&self, letters: &[SymbolId]) -> u64 {
        self.ids.get(letters).map_or(0, |&id| self.counts[id])
    }

    pub fn merge(&mut self, other: &StatsAccumulator) -> Result<()> {
        if self.tracked_k_max != other.tracked_k_max {
            return Err(Error::Config(format!(
                "cannot merge accumulators tracking up to {} and {} letters",
                self.tracked_k_max, other.tracked_k_max
            )));
        }
        if self.coding != other.coding {
            return Err(Error::Config("cannot merge accumulators with different letter codings".into()));
        }
        // Untracked tokens only live in the per-length histogram.
        if self.tokens_by_length.len() < other.tokens_by_length.len() {
            self.tokens_by_length.resize(other.tokens_by_length.len(), 0);
        }
        let tracked = self.tracked_k_max as usize;
        for (k, &n) in other.tokens_by_length.iter().enumerate().skip(tracked + 1) {
            self.tokens_by_length[k] += n;
            self.total_tokens += n;
            self.untracked_tokens += n;
        }
        for (letters, &id) in &other.ids {
            self.observe_count(letters, other.counts[id]);
        }
        self.total_symbols += other.total_symbols;
        Ok(())
    }

    pub fn merged(mut self, other: &StatsAccumulator) -> Result<StatsAccumulator> {
        self.merge(other)?;
        Ok(self)
    }

    /// Per-length type and hapax counts and the rank–frequency table.
    /// Ranks order by count descending, then length ascending, then the
    /// rendered word.
    pub fn finalize(&self) -> CorpusStats {
        let mut tokens_by_length = BTreeMap::new();
        for (k, &n) in self.tokens_by_length.iter().enumerate() {
            if n > 0 {
                tokens_by_length.insert(k as u32, n);
            }
        }
        let mut types_by_length: BTreeMap<u32, u64> = BTreeMap::new();
        let mut hapax_by_length: BTreeMap<u32, u64> = BTreeMap::new();
        let mut rows: Vec<(u64, usize, String)> = Vec::with_capacity(self.counts.len());
        for (letters, &id) in &self.ids {
            let k = letters.len() as u32;
            let count = self.counts[id];
            *types_by_length.entry(k).or_default() += 1;
            let hapax = hapax_by_length.entry(k).or_default();
            if count == 1 {
                *hapax += 1;
            }
            rows.push((count, letters.len(), self.coding.render(letters)));
        }
        rows.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then_with(|| a.2.cmp(&b.2)));
        let rank_frequency = rows
            .into_iter()
            .enumerate()
            .map(|(i, (count, _, word))| RankEntry(i as u64 + 1, word, count))
            .collect();
        CorpusStats {
            n_symbols: self.total_symbols,
            total_tokens: self.total_tokens,
            tracked_k_max: self.tracked_k_max,
            untracked_tokens: self.untracked_tokens,
            tokens_by_length,
            types_by_length,
            hapax_by_length,
            rank_frequency,
            params_hint: None,
            generator: None,
        }
    }
}

/// One row of the rank–frequency table: `(rank, word, count)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEntry(pub u64, pub String, pub u64);

impl RankEntry {
    pub fn rank(&self) -> u64 {
        self.0
    }

    pub fn word(&self) -> &str {
        &self.1
    }

    pub fn count(&self) -> u64 {
        self.2
    }
}

/// Finalized statistics of one corpus. Serializes to JSON with per-length
/// maps keyed by decimal `k` and the rank table as `[rank, word, count]`
/// arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    #[serde(rename = "N_symbols")]
    pub n_symbols: u64,
    pub total_tokens: u64,
    pub tracked_k_max: u32,
    /// Tokens longer than `tracked_k_max`; counted by length only.
    pub untracked_tokens: u64,
    pub tokens_by_length: BTreeMap<u32, u64>,
    pub types_by_length: BTreeMap<u32, u64>,
    pub hapax_by_length: BTreeMap<u32, u64>,
    pub rank_frequency: Vec<RankEntry>,
    #[serde(default)]
    pub params_hint: Option<ModelParams>,
    /// Present when the corpus came from the generator.
    #[serde(default)]
    pub generator: Option<CorpusSidecar>,
}

impl CorpusStats {
    pub fn tokens(&self, k: u32) -> u64 {
        self.tokens_by_length.get(&k).copied().unwrap_or(0)
    }

    pub fn types(&self, k: u32) -> u64 {
        self.types_by_length.get(&k).copied().unwrap_or(0)
    }

    pub fn hapaxes(&self, k: u32) -> u64 {
        self.hapax_by_length.get(&k).copied().unwrap_or(0)
    }

    /// Share of length-`k` types that occur exactly once.
    pub fn hapax_fraction(&self, k: u32) -> Result<f64> {
        let types = self.types(k);
        if types == 0 {
            return Err(Error::Undefined(format!("no word types of length {k}")));
        }
        Ok(self.hapaxes(k) as f64 / types as f64)
    }

    /// Smallest tracked length whose hapax fraction exceeds `threshold`.
    pub fn hapax_crossing(&self, threshold: f64) -> Option<u32> {
        self.types_by_length
            .keys()
            .copied()
            .find(|&k| self.hapax_fraction(k).is_ok_and(|f| f > threshold))
    }

    pub fn rank_table(&self) -> RankTable {
        RankTable::from_sorted_counts(self.rank_frequency.iter().map(RankEntry::count))
            .expect("rank table is sorted by construction")
    }

    /// Checks the structural invariants of a deserialized value.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parse(msg));
        let sum: u64 = self.tokens_by_length.values().sum();
        if sum != self.total_tokens {
            return bad(format!("tokens_by_length sums to {sum}, total_tokens is {}", self.total_tokens));
        }
        for (&k, &types) in &self.types_by_length {
            if types > self.tokens(k) || self.hapaxes(k) > types {
                return bad(format!("inconsistent type/hapax counts at length {k}"));
            }
        }
        for (i, row) in self.rank_frequency.iter().enumerate() {
            if row.rank() != i as u64 + 1 {
                return bad(format!("rank {} found at position {}", row.rank(), i + 1));
            }
            if i > 0 && row.count() > self.rank_frequency[i - 1].count() {
                return bad(format!("counts increase at rank {}", row.rank()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("stats serialize")
    }

    pub fn from_json<R: Read>(reader: R) -> Result<Self> {
        let stats: CorpusStats =
            serde_json::from_reader(reader).map_err(|e| Error::Parse(e.to_string()))?;
        stats.validate()?;
        Ok(stats)
    }

    /// Columns `k,tokens,types,hapaxes`.
    pub fn write_length_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "tokens", "types", "hapaxes"]).map_err(csv_err)?;
        for (&k, &tokens) in &self.tokens_by_length {
            let (types, hapaxes) = match self.types_by_length.get(&k) {
                Some(&t) => (t.to_string(), self.hapaxes(k).to_string()),
                None => (String::new(), String::new()),
            };
            w.write_record([k.to_string(), tokens.to_string(), types, hapaxes])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Columns `rank,word,count`.
    pub fn write_rank_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "word", "count"]).map_err(csv_err)?;
        for row in &self.rank_frequency {
            w.serialize((row.rank(), row.word(), row.count())).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::from(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(letters: &[u32]) -> Vec<SymbolId> {
        letters.iter().map(|&l| SymbolId(l)).collect()
    }

    fn acc_of(words: &[&[u32]]) -> StatsAccumulator {
        let mut acc = StatsAccumulator::default();
        for word in words {
            acc.observe_letters(&w(word));
        }
        acc
    }

    #[test]
    fn observe_and_finalize() {
        let acc = acc_of(&[&[1], &[2], &[1]]);
        assert_eq!(acc.tokens_of_length(1), 3);
        assert_eq!(acc.count_of(&w(&[1])), 2);
        assert_eq!(acc.count_of(&w(&[2])), 1);
        let stats = acc.finalize();
        assert_eq!(stats.types(1), 2);
        assert_eq!(stats.hapaxes(1), 1);
        assert_eq!(stats.rank_frequency[0], RankEntry(1, "a".into(), 2));
        assert_eq!(stats.rank_frequency[1], RankEntry(2, "b".into(), 1));
        assert_eq!(stats.hapax_fraction(1).unwrap(), 0.5);
        assert!(stats.hapax_fraction(2).is_err());
        assert_eq!(acc.finalize(), stats);
    }

    #[test]
    fn repeated_word() {
        let mut acc = StatsAccumulator::default();
        for _ in 0..50 {
            acc.observe_letters(&w(&[3, 4]));
        }
        let stats = acc.finalize();
        assert_eq!(stats.types(2), 1);
        assert_eq!(stats.tokens(2), 50);
        assert_eq!(stats.hapax_fraction(2).unwrap(), 0.0);
    }

    #[test]
    fn all_distinct() {
        let acc = acc_of(&[&[1, 2], &[2, 1], &[1, 1], &[2, 2]]);
        let stats = acc.finalize();
        assert_eq!(stats.hapaxes(2), 4);
        assert_eq!(stats.hapax_fraction(2).unwrap(), 1.0);
    }

    #[test]
    fn tie_order_is_length_then_lexicographic() {
        let acc = acc_of(&[&[2, 1], &[2], &[1, 2], &[1]]);
        let words: Vec<_> = acc.finalize().rank_frequency.iter().map(|r| r.word().to_string()).collect();
        assert_eq!(words, ["a", "b", "ab", "ba"]);
    }

    #[test]
    fn untracked_lengths() {
        let mut acc = StatsAccumulator::new(2);
        acc.observe_letters(&w(&[1, 1, 1]));
        acc.observe_letters(&w(&[1]));
        let stats = acc.finalize();
        assert_eq!(stats.total_tokens, 2);
        assert_eq!(stats.untracked_tokens, 1);
        assert_eq!(stats.tokens(3), 1);
        assert_eq!(stats.types(3), 0);
        assert_eq!(stats.rank_frequency.len(), 1);
    }

    #[test]
    fn merge_rejects_mismatched_caps() {
        let mut a = StatsAccumulator::new(3);
        assert!(matches!(a.merge(&StatsAccumulator::new(4)), Err(Error::Config(_))));
        let cp = StatsAccumulator::with_coding(3, LetterCoding::Codepoint);
        assert!(a.merge(&cp).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let stats = acc_of(&[&[1], &[2, 3], &[1]]).finalize();
        let json = stats.to_json();
        assert!(json.contains(r#""tokens_by_length":{"1":2,"2":1}"#));
        assert!(json.contains(r#"[1,"a",2]"#));
        let back = CorpusStats::from_json(json.as_bytes()).unwrap();
        assert_eq!(back, stats);
        let broken = json.replace(r#""total_tokens":3"#, r#""total_tokens":4"#);
        assert!(CorpusStats::from_json(broken.as_bytes()).is_err());
    }

    #[test]
    fn csv_tables() {
        let stats = acc_of(&[&[1], &[2, 3], &[1]]).finalize();
        let mut out = Vec::new();
        stats.write_length_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "k,tokens,types,hapaxes\n1,2,1,0\n2,1,1,1\n");
        let mut out = Vec::new();
        stats.write_rank_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "rank,word,count\n1,a,2\n2,bc,1\n");
    }

    fn word_strategy() -> impl Strategy<Value = Vec<u32>> {
        prop::collection::vec(1u32..4, 1..6)
    }

    fn acc_from(words: &[Vec<u32>], cap: u32) -> StatsAccumulator {
        let mut acc = StatsAccumulator::new(cap);
        for word in words {
            acc.observe_letters(&w(word));
        }
        acc
    }

    proptest! {
        #[test]
        fn bookkeeping_identities(words in prop::collection::vec(word_strategy(), 0..100)) {
            let stats = acc_from(&words, 4).finalize();
            let tracked: u64 = stats.rank_frequency.iter().map(RankEntry::count).sum();
            prop_assert_eq!(tracked + stats.untracked_tokens, stats.total_tokens);
            let letters: usize = words.iter().map(Vec::len).sum();
            let weighted: u64 = stats.tokens_by_length.iter().map(|(&k, &n)| k as u64 * n).sum();
            prop_assert_eq!(weighted, letters as u64);
            for (&k, &types) in &stats.types_by_length {
                prop_assert!(types <= stats.tokens(k).min(3u64.pow(k)));
                prop_assert!(stats.hapaxes(k) <= types);
            }
        }

        #[test]
        fn merge_is_commutative_and_associative(
            a in prop::collection::vec(word_strategy(), 0..40),
            b in prop::collection::vec(word_strategy(), 0..40),
            c in prop::collection::vec(word_strategy(), 0..40),
        ) {
            let (x, y, z) = (acc_from(&a, 4), acc_from(&b, 4), acc_from(&c, 4));
            let xy = x.clone().merged(&y).unwrap().finalize();
            let yx = y.clone().merged(&x).unwrap().finalize();
            prop_assert_eq!(&xy, &yx);
            let left = x.clone().merged(&y).unwrap().merged(&z).unwrap().finalize();
            let right = x.clone().merged(&y.clone().merged(&z).unwrap()).unwrap().finalize();
            prop_assert_eq!(left, right);
            prop_assert_eq!(x.clone().merged(&StatsAccumulator::new(4)).unwrap().finalize(), x.finalize());
        }
    }
}
