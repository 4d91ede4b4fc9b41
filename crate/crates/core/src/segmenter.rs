//! Word boundaries: a word is a maximal run of non-space symbols.
//!
//! A run that reaches the end of the input is a word; runs of several spaces
//! produce nothing. Equivalently, a word starts at position `i` iff
//! `X_i` is a letter and either `i` is the first position or `X_(i-1)` is a
//! space.

use crate::error::{Error, Result};
use crate::generator::SymbolId;

/// Default cap on the letters of one word held while streaming.
pub const DEFAULT_MAX_WORD_LEN: usize = 1 << 20;

/// A non-empty sequence of letters (no space symbol).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordToken {
    letters: Vec<SymbolId>,
}

impl WordToken {
    pub fn new(letters: Vec<SymbolId>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::Domain("a word has at least one letter".into()));
        }
        if letters.iter().any(|s| s.is_space()) {
            return Err(Error::Domain("a word cannot contain the space symbol".into()));
        }
        Ok(Self { letters })
    }

    pub fn letters(&self) -> &[SymbolId] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Streaming segmenter; holds at most one partial word.
pub struct Segmenter<I> {
    symbols: I,
    partial: Vec<SymbolId>,
    max_word_len: usize,
    done: bool,
}

pub fn segment<I>(symbols: I) -> Segmenter<I::IntoIter>
where
    I: IntoIterator<Item = SymbolId>,
{
    segment_with_cap(symbols, DEFAULT_MAX_WORD_LEN)
}

pub fn segment_with_cap<I>(symbols: I, max_word_len: usize) -> Segmenter<I::IntoIter>
where
    I: IntoIterator<Item = SymbolId>,
{
    Segmenter {
        symbols: symbols.into_iter(),
        partial: Vec::new(),
        max_word_len,
        done: false,
    }
}

impl<I: Iterator<Item = SymbolId>> Iterator for Segmenter<I> {
    type Item = Result<WordToken>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        for symbol in self.symbols.by_ref() {
            if symbol.is_space() {
                if !self.partial.is_empty() {
                    let letters = std::mem::take(&mut self.partial);
                    return Some(Ok(WordToken { letters }));
                }
            } else {
                if self.partial.len() == self.max_word_len {
                    self.done = true;
                    return Some(Err(Error::WordTooLong { cap: self.max_word_len }));
                }
                self.partial.push(symbol);
            }
        }
        self.done = true;
        if self.partial.is_empty() {
            None
        } else {
            let letters = std::mem::take(&mut self.partial);
            Some(Ok(WordToken { letters }))
        }
    }
}

/// The words of a complete text held in memory, as borrowed slices.
pub fn words_in(symbols: &[SymbolId]) -> impl Iterator<Item = &[SymbolId]> {
    symbols.split(|s| s.is_space()).filter(|w| !w.is_empty())
}

/// A chunk of a longer text, split so that chunks can be segmented
/// independently and stitched back together exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkSegments<'a> {
    /// Letters before the first space; continue the previous chunk's open run.
    pub head: &'a [SymbolId],
    /// Everything between the first and last space; its words are complete.
    pub interior: &'a [SymbolId],
    /// Letters after the last space, or `None` when the chunk has no space
    /// at all (then `head` is the whole chunk).
    pub tail: Option<&'a [SymbolId]>,
}

pub fn split_chunk(symbols: &[SymbolId]) -> ChunkSegments<'_> {
    match symbols.iter().position(|s| s.is_space()) {
        None => ChunkSegments { head: symbols, interior: &[], tail: None },
        Some(first) => {
            let last = symbols.iter().rposition(|s| s.is_space()).unwrap_or(first);
            ChunkSegments {
                head: &symbols[..first],
                interior: &symbols[first..=last],
                tail: Some(&symbols[last + 1..]),
            }
        }
    }
}
