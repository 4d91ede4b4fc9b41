//! Chunk-parallel simulation: generate, segment and count in one pass.
//!
//! Each chunk is segmented on its own. Words strictly inside a chunk are
//! counted there; the letters before a chunk's first space and after its
//! last space are stitched with the neighbouring chunks in order, so the
//! result equals a sequential pass over the whole stream.

use rayon::prelude::*;

use crate::error::Result;
use crate::generator::{corpus_chunks, generate_stream, CorpusSidecar, SymbolId, StreamSpec};
use crate::params::ModelParams;
use crate::segmenter::{segment, split_chunk, words_in};
use crate::stats::{CorpusStats, StatsAccumulator, DEFAULT_TRACKED_K_MAX};

/// Chunks processed per parallel batch; bounds peak memory.
const BATCH_CHUNKS: usize = 256;

struct ChunkPart {
    acc: StatsAccumulator,
    head: Vec<SymbolId>,
    tail: Option<Vec<SymbolId>>,
}

fn process_chunk(spec: &StreamSpec, tracked_k_max: u32) -> ChunkPart {
    let symbols: Vec<SymbolId> = generate_stream(spec).collect();
    let parts = split_chunk(&symbols);
    let mut acc = StatsAccumulator::new(tracked_k_max);
    acc.add_symbols(symbols.len() as u64);
    for word in words_in(parts.interior) {
        acc.observe_letters(word);
    }
    ChunkPart { acc, head: parts.head.to_vec(), tail: parts.tail.map(<[SymbolId]>::to_vec) }
}

/// Counts an `n`-symbol corpus. Output is independent of thread count.
pub fn simulate(params: &ModelParams, n: u64, seed: u64, tracked_k_max: u32) -> StatsAccumulator {
    let chunks = corpus_chunks(params, n, seed);
    let mut total = StatsAccumulator::new(tracked_k_max);
    let mut open: Vec<SymbolId> = Vec::new();
    for batch in chunks.chunks(BATCH_CHUNKS) {
        let parts: Vec<ChunkPart> = batch.par_iter().map(|s| process_chunk(s, tracked_k_max)).collect();
        for part in &parts {
            open.extend_from_slice(&part.head);
            if let Some(tail) = &part.tail {
                if !open.is_empty() {
                    total.observe_letters(&open);
                }
                open.clone_from(tail);
            }
        }
        let merged = parts
            .into_par_iter()
            .map(|p| p.acc)
            .reduce(|| StatsAccumulator::new(tracked_k_max), |a, b| a.merged(&b).expect("same cap"));
        total.merge(&merged).expect("same cap");
    }
    if !open.is_empty() {
        total.observe_letters(&open);
    }
    total
}

/// Single-threaded reference: the streaming segmenter over the whole corpus.
pub fn simulate_sequential(params: &ModelParams, n: u64, seed: u64, tracked_k_max: u32) -> Result<StatsAccumulator> {
    let mut acc = StatsAccumulator::new(tracked_k_max);
    acc.add_symbols(n);
    for word in segment(crate::generator::generate_corpus(params, n, seed)) {
        acc.observe(&word?);
    }
    Ok(acc)
}

/// Finalized statistics tagged with the generator settings.
pub fn simulate_stats(params: &ModelParams, n: u64, seed: u64) -> CorpusStats {
    let mut stats = simulate(params, n, seed, DEFAULT_TRACKED_K_MAX).finalize();
    stats.params_hint = Some(params.clone());
    stats.generator = Some(CorpusSidecar::new(params, n, seed));
    stats
}
