use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use monkeytext::compare::{resolve_params, ComparisonReport, Tolerances};
use monkeytext::corpus::{profile_reader, read_frequency_dump, NormalizationOptions, SeparatorPolicy};
use monkeytext::generator::{export_corpus, CorpusSidecar};
use monkeytext::simulate::simulate;
use monkeytext::zipf_fit::{fit_mle, fit_ols, FitWindow, RankSampling, RankTable};
use monkeytext::{AnalyticReport, CorpusStats, Error, ModelParams};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "monkeytext", version, about = "Random-text null model for word statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print closed-form predictions for (m, q, N).
    Predict(PredictArgs),
    /// Generate a corpus and write its word statistics.
    Simulate(SimulateArgs),
    /// Profile a UTF-8 text file or a token,count CSV.
    Analyze(AnalyzeArgs),
    /// Compare a statistics file against model predictions.
    Compare(CompareArgs),
    /// Fit the rank-frequency exponent of a table.
    Fit(FitArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Alphabet size (letters, excluding the space).
    #[arg(short = 'm', long)]
    m: u32,
    /// Space probability.
    #[arg(short = 'q', long)]
    q: f64,
    /// Text length in symbols.
    #[arg(short = 'N', long = "n-symbols")]
    n: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    k_max: Option<u32>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct OutDir {
    /// Directory for output files.
    #[arg(long, env = "MONKEYTEXT_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutDir,
    /// Also write the raw byte corpus (and a `.json` sidecar) to this path.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Longest word length tracked per type.
    #[arg(long, default_value_t = monkeytext::stats::DEFAULT_TRACKED_K_MAX)]
    tracked_k_max: u32,
    /// Also write tokens.csv and rank.csv.
    #[arg(long)]
    tables: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputKind {
    /// Decide by file extension: `.csv` is a frequency dump, anything else text.
    Auto,
    Text,
    FreqCsv,
}

#[derive(Args)]
struct AnalyzeArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    input_kind: InputKind,
    #[arg(long)]
    no_case_fold: bool,
    #[arg(long)]
    keep_punctuation: bool,
    /// Only U+0020 separates words.
    #[arg(long)]
    ascii_space_only: bool,
    /// Shorthand for --no-case-fold --keep-punctuation --ascii-space-only.
    #[arg(long)]
    raw: bool,
    #[command(flatten)]
    out: OutDir,
    #[arg(long)]
    tables: bool,
}

#[derive(Args)]
struct CompareArgs {
    stats: PathBuf,
    #[arg(short = 'm', long)]
    m: Option<u32>,
    #[arg(short = 'q', long)]
    q: Option<f64>,
    #[arg(long)]
    tol_total: Option<f64>,
    #[arg(long)]
    tol_tokens: Option<f64>,
    #[arg(long)]
    tol_types: Option<f64>,
    #[arg(long)]
    tol_hapax: Option<f64>,
    #[arg(long)]
    tol_alpha: Option<f64>,
    #[arg(long)]
    tol_crossing: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Ols,
    Mle,
}

#[derive(Args)]
struct FitArgs {
    /// Rank table CSV (`count` column, optional `rank`) or stats JSON.
    table: PathBuf,
    #[arg(long, value_enum, default_value = "ols")]
    method: Method,
    /// Lowest rank used; defaults to 10 for OLS and 1 for MLE.
    #[arg(long)]
    r_min: Option<u64>,
    #[arg(long)]
    r_max: Option<u64>,
    #[arg(long, default_value_t = 5.0)]
    min_count: f64,
    /// Fit every rank in the window instead of log-spaced samples.
    #[arg(long)]
    all_ranks: bool,
    #[arg(long, default_value_t = 20)]
    per_decade: u32,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Io(_)) { EXIT_IO } else { EXIT_USAGE };
        Failure { code, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Predict(a) => predict(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Analyze(a) => analyze(a),
        Command::Compare(a) => compare(a),
        Command::Fit(a) => fit(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("monkeytext: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| io_failure(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_failure(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_failure(path, e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_failure(path, e))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| io_failure(Path::new("<stdout>"), e.into()))?;
    writeln!(out).map_err(|e| io_failure(Path::new("<stdout>"), e))
}

fn write_tables(dir: &Path, stats: &CorpusStats) -> Result<(), Failure> {
    stats.write_length_csv(create(&dir.join("tokens.csv"))?)?;
    stats.write_rank_csv(create(&dir.join("rank.csv"))?)?;
    Ok(())
}

fn predict(a: PredictArgs) -> CmdResult {
    let params = ModelParams::new(a.model.m, a.model.q)?;
    let report = AnalyticReport::build(&params, a.model.n, a.k_max)?;
    match a.format {
        Format::Json => print_json(&report)?,
        Format::Csv => report.write_csv(io::stdout().lock())?,
    }
    Ok(0)
}

fn summary_line(stats: &CorpusStats) -> String {
    let top: Vec<String> = stats
        .rank_frequency
        .iter()
        .take(10)
        .map(|r| format!("{}:{}", r.word(), r.count()))
        .collect();
    format!("K_N={} top10=[{}]", stats.total_tokens, top.join(" "))
}

fn simulate_cmd(a: SimulateArgs) -> CmdResult {
    let params = ModelParams::new(a.model.m, a.model.q)?;
    let n = a.model.n;
    if let Some(path) = &a.corpus {
        let mut w = create(path)?;
        export_corpus(&mut w, &params, n, a.seed)?;
        w.flush().map_err(|e| io_failure(path, e))?;
        write_json(&sidecar_path(path), &CorpusSidecar::new(&params, n, a.seed))?;
    }
    let mut stats = simulate(&params, n, a.seed, a.tracked_k_max).finalize();
    stats.params_hint = Some(params.clone());
    stats.generator = Some(CorpusSidecar::new(&params, n, a.seed));
    write_json(&a.out.out_dir.join("stats.json"), &stats)?;
    if a.tables {
        write_tables(&a.out.out_dir, &stats)?;
    }
    println!("{}", summary_line(&stats));
    Ok(0)
}

fn sidecar_path(corpus: &Path) -> PathBuf {
    let mut name = corpus.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn analyze(a: AnalyzeArgs) -> CmdResult {
    let is_csv = match a.input_kind {
        InputKind::Auto => a.input.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")),
        InputKind::Text => false,
        InputKind::FreqCsv => true,
    };
    let reader = open(&a.input)?;
    let (profile, mut stats) = if is_csv {
        read_frequency_dump(reader)?
    } else {
        let opts = NormalizationOptions {
            case_fold: !(a.raw || a.no_case_fold),
            strip_punctuation: !(a.raw || a.keep_punctuation),
            separator_policy: if a.raw || a.ascii_space_only {
                SeparatorPolicy::AsciiSpaceOnly
            } else {
                SeparatorPolicy::UnicodeWhitespace
            },
        };
        profile_reader(reader, &opts)?
    };
    let sidecar = sidecar_path(&a.input);
    if sidecar.exists() {
        let meta: CorpusSidecar = serde_json::from_reader(open(&sidecar)?)
            .map_err(|e| Failure { code: EXIT_USAGE, message: format!("{}: {e}", sidecar.display()) })?;
        stats.params_hint = Some(meta.params()?);
        stats.generator = Some(meta);
    }
    write_json(&a.out.out_dir.join("profile.json"), &profile)?;
    write_json(&a.out.out_dir.join("stats.json"), &stats)?;
    if a.tables {
        write_tables(&a.out.out_dir, &stats)?;
    }
    println!(
        "chars={} q_hat={:.6} m_hat={} {}",
        profile.n_chars,
        profile.q_hat,
        profile.m_hat,
        summary_line(&stats)
    );
    Ok(0)
}

fn compare(a: CompareArgs) -> CmdResult {
    let stats = CorpusStats::from_json(open(&a.stats)?)?;
    let (params, source) = resolve_params(&stats, a.m, a.q)?;
    let defaults = Tolerances::default();
    let tol = Tolerances {
        total_tokens: a.tol_total.unwrap_or(defaults.total_tokens),
        tokens_by_length: a.tol_tokens.unwrap_or(defaults.tokens_by_length),
        types_by_length: a.tol_types.unwrap_or(defaults.types_by_length),
        hapax_by_length: a.tol_hapax.unwrap_or(defaults.hapax_by_length),
        zipf_alpha: a.tol_alpha.unwrap_or(defaults.zipf_alpha),
        hapax_crossing: a.tol_crossing.unwrap_or(defaults.hapax_crossing),
        ..defaults
    };
    let report = ComparisonReport::build(&stats, &params, source, &tol)?;
    match &a.out {
        Some(path) => write_json(path, &report)?,
        None => print_json(&report)?,
    }
    for row in &report.rows {
        let k = row.k.map_or(String::new(), |k| format!("[{k}]"));
        let emp = row.empirical.map_or("n/a".to_string(), |e| format!("{e:.6}"));
        eprintln!(
            "{:4} {}{k}: empirical {emp} predicted {:.6}",
            if row.pass { "ok" } else { "FAIL" },
            row.name,
            row.predicted
        );
    }
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    Ok(if report.all_pass() { 0 } else { EXIT_FAIL })
}

fn fit(a: FitArgs) -> CmdResult {
    let is_json = a.table.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let reader = open(&a.table)?;
    let table = if is_json {
        CorpusStats::from_json(reader)?.rank_table()
    } else {
        RankTable::read_csv(reader)?
    };
    let result = match a.method {
        Method::Ols => {
            let sampling = if a.all_ranks {
                RankSampling::All
            } else {
                RankSampling::LogSpaced { per_decade: a.per_decade }
            };
            let window = FitWindow { r_min: a.r_min.unwrap_or(10), r_max: a.r_max, min_count: a.min_count, sampling };
            fit_ols(&table, &window)?
        }
        Method::Mle => fit_mle(&table, a.r_min.unwrap_or(1))?,
    };
    print_json(&result)?;
    Ok(0)
}
