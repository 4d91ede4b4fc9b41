//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::Zipf;
use rayon::prelude::*;

use monkeytext::analytic::{
    critical_length, exact_bruteforce_word_stats, expected_distinct_types, expected_occurrences,
    expected_tokens_of_length, expected_word_count, poisson_occurrence_pmf, word_length_pmf, zipf_exponent,
};
use monkeytext::compare::{ComparisonReport, HAPAX_CROSSING_FRACTION};
use monkeytext::corpus::profile_bytes;
use monkeytext::generator::{export_corpus, CorpusSidecar, SymbolId};
use monkeytext::segmenter::words_in;
use monkeytext::simulate::{simulate, simulate_sequential, simulate_stats};
use monkeytext::stats::StatsAccumulator;
use monkeytext::zipf_fit::{fit_mle, fit_ols, FitWindow, RankTable};
use monkeytext::{CorpusStats, ModelParams, NormalizationOptions};

const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn params(m: u32, q: f64) -> ModelParams {
    ModelParams::new(m, q).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn exact_formula_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 1..=12u32 {
        for q in [0.1, 0.2, 0.5, 0.8] {
            let table = exact_bruteforce_word_stats(n, q, n).unwrap();
            let formula = (1.0 - q) * (1.0 + (n - 1) as f64 * q);
            worst = worst.max((table.expected_words - formula).abs());
            worst = worst.max((table.expected_words - expected_word_count(n as u64, q).unwrap()).abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-12 && elapsed < Duration::from_secs(1),
        format!("max |err| = {worst:.1e}, {:.3} s", elapsed.as_secs_f64()),
    )
}

fn length_law(stats: &CorpusStats, elapsed: Duration) -> Outcome {
    let n = 10_000_000;
    let total = stats.total_tokens as f64;
    let mut worst = (0, 0.0);
    let mut k = 1;
    while expected_tokens_of_length(n, 0.2, k).unwrap() >= 1e4 {
        let err = rel(stats.tokens(k) as f64 / total, word_length_pmf(0.2, k).unwrap());
        if err > worst.1 {
            worst = (k, err);
        }
        k += 1;
    }
    outcome(
        worst.1 <= 0.02,
        format!(
            "k = 1..{} (expected count >= 1e4), worst k = {} at {:.3}%, simulation {:.2} s (target < 10 s)",
            k - 1,
            worst.0,
            100.0 * worst.1,
            elapsed.as_secs_f64()
        ),
    )
}

fn token_totals(stats: &CorpusStats) -> Outcome {
    let expected = expected_word_count(10_000_000, 0.2).unwrap();
    let err = rel(stats.total_tokens as f64, expected);
    outcome(err <= 0.005, format!("{} vs {expected:.2}, {:.3}%", stats.total_tokens, 100.0 * err))
}

fn per_length_tokens(stats: &CorpusStats) -> Outcome {
    let worst = (1..=8u32)
        .map(|k| (k, rel(stats.tokens(k) as f64, 1e7 * 0.04 * 0.8f64.powi(k as i32))))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    outcome(worst.1 <= 0.03, format!("k = 1..8, worst k = {} at {:.3}%", worst.0, 100.0 * worst.1))
}

fn vocabulary_growth() -> Outcome {
    let p = params(4, 0.3);
    let n = 1_000_000;
    let stats = simulate_stats(&p, n, SEED);
    let saturated = (1..=3u32).all(|k| stats.types(k) == 4u64.pow(k));
    let worst = (1..=10u32)
        .map(|k| (k, rel(stats.types(k) as f64, expected_distinct_types(&p, n, k).unwrap())))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    outcome(
        saturated && worst.1 <= 0.05,
        format!(
            "types = 4^k for k <= 3: {saturated}; k = 1..10 worst k = {} at {:.3}%",
            worst.0,
            100.0 * worst.1
        ),
    )
}

fn critical_length_crossing() -> Outcome {
    let p = params(26, 0.2);
    let n = 1_000_000;
    let k_star = critical_length(&p, n).unwrap().value;
    let target = k_star.ceil() as u32;
    let crossings: Vec<Option<u32>> = (1..=5u64)
        .into_par_iter()
        .map(|seed| simulate_stats(&p, n, seed).hapax_crossing(HAPAX_CROSSING_FRACTION))
        .collect();
    let pass = (k_star - 3.0439).abs() < 1e-4
        && crossings.iter().all(|c| c.is_some_and(|k| k == target || k == target + 1));
    outcome(pass, format!("k* = {k_star:.4}, crossings over seeds 1..=5: {crossings:?}"))
}

fn zipf_exponent_fit(stats: &CorpusStats) -> Outcome {
    let alpha = zipf_exponent(&params(26, 0.2));
    let fit = fit_ols(&stats.rank_table(), &FitWindow::new(10, 10_000)).unwrap();
    outcome(
        (fit.alpha_hat - alpha).abs() <= 0.1,
        format!("alpha_hat = {:.4} ± {:.4} vs {alpha:.5} ({} points)", fit.alpha_hat, fit.stderr, fit.n_points),
    )
}

fn poisson_tail() -> Outcome {
    let start = Instant::now();
    let p = params(26, 0.2);
    let n = 100_000;
    let lambda = expected_occurrences(&p, n, 4).unwrap();
    let word: Vec<SymbolId> = (1..=4).map(SymbolId).collect();
    let runs = 2000u64;
    let counts: Vec<u64> = (0..runs)
        .into_par_iter()
        .map(|seed| simulate(&p, n, seed, 4).count_of(&word))
        .collect();
    let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
    for c in counts {
        *hist.entry(c).or_default() += 1;
    }
    let max_c = *hist.keys().last().unwrap();
    let mut tv = 0.0;
    let mut covered = 0.0;
    for c in 0..=max_c {
        let pois = poisson_occurrence_pmf(lambda, c).unwrap();
        covered += pois;
        let emp = hist.get(&c).copied().unwrap_or(0) as f64 / runs as f64;
        tv += (emp - pois).abs();
    }
    tv = 0.5 * (tv + (1.0 - covered));
    outcome(
        tv <= 0.05,
        format!(
            "lambda_4 = {lambda:.7}, histogram {hist:?}, TV = {tv:.4}, {:.2} s (target < 60 s)",
            start.elapsed().as_secs_f64()
        ),
    )
}

fn estimator_recovery() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let zipf = Zipf::new(1e12, 1.5).unwrap();
    let mut counts: BTreeMap<u64, f64> = BTreeMap::new();
    for _ in 0..100_000 {
        *counts.entry(rng.sample(zipf) as u64).or_default() += 1.0;
    }
    let draws = RankTable::from_pairs(counts).unwrap();
    let mle = fit_mle(&draws, 1).unwrap();
    let synthetic =
        RankTable::from_pairs((1..=1000u64).map(|r| (r, (1e6 * (r as f64).powf(-1.2)).round()))).unwrap();
    let ols = fit_ols(&synthetic, &FitWindow::new(10, 500)).unwrap();
    outcome(
        (mle.alpha_hat - 1.5).abs() <= 0.03 && (ols.alpha_hat - 1.2).abs() <= 0.02,
        format!("mle {:.4} ± {:.4} (target 1.5), ols {:.4} (target 1.2)", mle.alpha_hat, mle.stderr, ols.alpha_hat),
    )
}

fn pipeline_equivalence() -> Outcome {
    let p = params(26, 0.2);
    let n = 1_000_000;
    let mut bytes = Vec::new();
    export_corpus(&mut bytes, &p, n, SEED).unwrap();
    let (_, mut ingested) = profile_bytes(&bytes, &NormalizationOptions::raw()).unwrap();
    let sidecar = CorpusSidecar::new(&p, n, SEED);
    ingested.params_hint = Some(sidecar.params().unwrap());
    ingested.generator = Some(sidecar);
    let direct = simulate_stats(&p, n, SEED);
    let same = ingested == direct && ingested.to_json() == direct.to_json();
    outcome(same, format!("{} tokens, {} types, JSON identical: {same}", direct.total_tokens, direct.rank_frequency.len()))
}

fn proptest_runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn merge_algebra() -> Outcome {
    let symbols = prop::collection::vec((0u32..4).prop_map(SymbolId), 0..3000);
    let cuts = prop::collection::vec(any::<prop::sample::Index>(), 0..12);
    let mut runner = proptest_runner(100);
    let partitions = runner.run(&(symbols, cuts), |(symbols, cuts)| {
        let words: Vec<&[SymbolId]> = words_in(&symbols).collect();
        let mut whole = StatsAccumulator::new(6);
        words.iter().for_each(|w| whole.observe_letters(w));
        let mut bounds: Vec<usize> = cuts.iter().map(|i| i.index(words.len() + 1)).collect();
        bounds.extend([0, words.len()]);
        bounds.sort_unstable();
        let mut merged = StatsAccumulator::new(6);
        for pair in bounds.windows(2) {
            let mut part = StatsAccumulator::new(6);
            words[pair[0]..pair[1]].iter().for_each(|w| part.observe_letters(w));
            merged.merge(&part).unwrap();
        }
        prop_assert_eq!(merged.finalize(), whole.finalize());
        Ok(())
    });

    let word = prop::collection::vec(1u32..4, 1..5);
    let three = (0..3).map(|_| prop::collection::vec(word.clone(), 0..60)).collect::<Vec<_>>();
    let mut runner = proptest_runner(100);
    let algebra = runner.run(&three, |groups| {
        let accs: Vec<StatsAccumulator> = groups
            .iter()
            .map(|g| {
                let mut acc = StatsAccumulator::new(3);
                g.iter()
                    .for_each(|w| acc.observe_letters(&w.iter().map(|&l| SymbolId(l)).collect::<Vec<_>>()));
                acc
            })
            .collect();
        let (x, y, z) = (&accs[0], &accs[1], &accs[2]);
        prop_assert_eq!(x.clone().merged(y).unwrap().finalize(), y.clone().merged(x).unwrap().finalize());
        prop_assert_eq!(
            x.clone().merged(y).unwrap().merged(z).unwrap().finalize(),
            x.clone().merged(&y.clone().merged(z).unwrap()).unwrap().finalize()
        );
        prop_assert_eq!(x.clone().merged(&StatsAccumulator::new(3)).unwrap().finalize(), x.finalize());
        Ok(())
    });

    let mut runner = proptest_runner(20);
    let chunked = runner.run(&(2u32..30, 0.01f64..0.6, 0u64..300_000, any::<u64>()), |(m, q, n, seed)| {
        let p = ModelParams::new(m, q).unwrap();
        prop_assert_eq!(simulate(&p, n, seed, 30).finalize(), simulate_sequential(&p, n, seed, 30).unwrap().finalize());
        Ok(())
    });

    let describe = |ok: bool| if ok { "ok" } else { "FAILED" };
    outcome(
        partitions.is_ok() && algebra.is_ok() && chunked.is_ok(),
        format!(
            "100 word partitions: {}, 100 commutativity/associativity/identity cases: {}, 20 chunked-vs-sequential simulations: {}",
            describe(partitions.is_ok()),
            describe(algebra.is_ok()),
            describe(chunked.is_ok())
        ),
    )
}

fn real_text_divergence() -> Outcome {
    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/de_finibus_liber_primus.txt");
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_monkeytext");
    let analyze = Command::new(bin).arg("analyze").arg(&fixture).arg("--out-dir").arg(dir.path()).output().unwrap();
    if !analyze.status.success() {
        return outcome(false, format!("analyze failed: {}", String::from_utf8_lossy(&analyze.stderr)));
    }
    let report_path = dir.path().join("report.json");
    let compare = Command::new(bin)
        .arg("compare")
        .arg(dir.path().join("stats.json"))
        .arg("--out")
        .arg(&report_path)
        .output()
        .unwrap();
    let report: ComparisonReport = match std::fs::read(&report_path).map(|b| serde_json::from_slice(&b)) {
        Ok(Ok(r)) => r,
        _ => return outcome(false, "report missing or unreadable"),
    };
    let types: Vec<_> = report.rows.iter().filter(|r| r.name == "types_by_length").collect();
    let failed_types: Vec<u32> = types.iter().filter(|r| !r.pass).filter_map(|r| r.k).collect();
    let complete = report.row("total_tokens", None).is_some() && report.row("zipf_alpha", None).is_some();
    let failed: Vec<String> = report
        .failures()
        .map(|r| r.k.map_or(r.name.clone(), |k| format!("{}[{k}]", r.name)))
        .collect();
    outcome(
        compare.status.code() == Some(1) && !failed_types.is_empty() && complete,
        format!(
            "exit {:?}, q_hat = {:.4}, m_hat = {}, failing rows {failed:?} of {}",
            compare.status.code(),
            report.metadata.params.q(),
            report.metadata.params.m(),
            report.rows.len()
        ),
    )
}

fn main() {
    let start = Instant::now();
    let sim_start = Instant::now();
    let big = simulate_stats(&params(26, 0.2), 10_000_000, SEED);
    let sim_elapsed = sim_start.elapsed();

    let criteria: Vec<Criterion> = vec![
        ("exact-formula oracle", Box::new(exact_formula_oracle)),
        ("length law", Box::new(|| length_law(&big, sim_elapsed))),
        ("token totals", Box::new(|| token_totals(&big))),
        ("per-length tokens", Box::new(|| per_length_tokens(&big))),
        ("vocabulary saturation and growth", Box::new(vocabulary_growth)),
        ("critical length", Box::new(critical_length_crossing)),
        ("zipf exponent", Box::new(|| zipf_exponent_fit(&big))),
        ("poisson tail", Box::new(poisson_tail)),
        ("estimator recovery", Box::new(estimator_recovery)),
        ("pipeline equivalence", Box::new(pipeline_equivalence)),
        ("merge algebra", Box::new(merge_algebra)),
        ("real-text divergence", Box::new(real_text_divergence)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        if !result.pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1} s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
