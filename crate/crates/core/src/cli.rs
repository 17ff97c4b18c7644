//! Command-line front end shared by the `countstream` binary and its tests.
//!
//! Output is one JSON object per line (`--format lines`, the default), each
//! tagged with a `"type"` field, or a single CSV table (`--format csv`).
//! Field names are listed in the README.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Duration;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::baselines::adtree::{DEFAULT_LEAF_THRESHOLD, DEFAULT_NODE_CAP};
use crate::baselines::AdTreeParams;
use crate::data::{
    generate_synthetic, load_arities, load_csv, Arities, Database, Delimiter, LoadOptions, StateBase,
};
use crate::error::{Error, Result};
use crate::harness::{
    bench_random, learn_parents_with, mine_rules, summarize, BenchConfig, LearnConfig, MineConfig,
};
use crate::strategy::{Engine, EngineOptions, StrategyKind};

#[derive(Debug, Parser)]
#[command(name = "countstream", version, about = "Counting-query strategies and their benchmark workloads")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time every strategy on the same stream of random queries.
    BenchRandom(BenchArgs),
    /// Select MDL-optimal parent sets for every variable.
    LearnParents(LearnArgs),
    /// Mine association rules from binary data.
    MineRules(MineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Lines,
    Csv,
}

/// How `--input` tokens map to states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseArg {
    /// 1-based when the smallest token is 1.
    Auto,
    Zero,
    One,
}

impl From<BaseArg> for StateBase {
    fn from(b: BaseArg) -> Self {
        match b {
            BaseArg::Auto => StateBase::Auto,
            BaseArg::Zero => StateBase::Zero,
            BaseArg::One => StateBase::One,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "synthetic"])))]
pub struct CommonArgs {
    /// Integer matrix, one instance per row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Generated data, e.g. `n=8,m=1024,arity=3` or `arity=2-6`.
    #[arg(long)]
    pub synthetic: Option<String>,
    /// Sidecar file with one declared arity per variable.
    #[arg(long, requires = "input")]
    pub arities: Option<PathBuf>,
    /// Field separator of `--input`: a single character or `ws`.
    #[arg(long, default_value = ",")]
    pub delimiter: String,
    /// State numbering of `--input`.
    #[arg(long, value_enum, default_value_t = BaseArg::Auto, requires = "input")]
    pub state_base: BaseArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Comma-separated subset of bitmap,radix,hash,adtree, or `all`.
    #[arg(long, default_value = "all")]
    pub strategies: String,
    #[arg(long, default_value_t = DEFAULT_LEAF_THRESHOLD)]
    pub adtree_leaf: usize,
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    pub adtree_node_cap: usize,
    /// Partition from scratch on every radix query instead of reading the
    /// precomputed first level.
    #[arg(long)]
    pub no_radix_cache: bool,
    /// Worker threads for independent queries (0 = serial).
    #[arg(long, default_value_t = 0)]
    pub parallel: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Lines)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 1000)]
    pub queries: usize,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    #[arg(long)]
    pub timeout_ms: Option<u64>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Largest parent set considered [default: min(6, n - 1)].
    #[arg(long)]
    pub max_parents: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 0.2)]
    pub min_support: f64,
    #[arg(long, default_value_t = 0.3)]
    pub min_confidence: f64,
    /// Largest itemset (antecedent plus consequent).
    #[arg(long, default_value_t = 6)]
    pub max_rule_size: usize,
}

/// Where the database comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    File { path: PathBuf, arities: Option<PathBuf>, delimiter: Delimiter, base: StateBase },
    Synthetic { n: usize, m: usize, arities: Arities, seed: u64 },
}

/// Resolved settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: InputSource,
    pub strategies: Vec<StrategyKind>,
    pub seed: u64,
    pub engine: EngineOptions,
    pub parallel: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs) -> Result<Self> {
        let input = match (&args.input, &args.synthetic) {
            (Some(path), None) => InputSource::File {
                path: path.clone(),
                arities: args.arities.clone(),
                delimiter: parse_delimiter(&args.delimiter)?,
                base: args.state_base.into(),
            },
            (None, Some(spec)) => parse_synthetic(spec, args.seed)?,
            _ => {
                return Err(Error::InvalidParameter(
                    "exactly one of --input and --synthetic is required".into(),
                ))
            }
        };
        Ok(RunConfig {
            input,
            strategies: StrategyKind::parse_list(&args.strategies)?,
            seed: args.seed,
            engine: EngineOptions {
                adtree: AdTreeParams { leaf_threshold: args.adtree_leaf, node_cap: args.adtree_node_cap },
                radix_cache: !args.no_radix_cache,
            },
            parallel: args.parallel,
            out: args.out.clone(),
            format: args.format,
        })
    }

    pub fn load(&self) -> Result<Database> {
        match &self.input {
            InputSource::File { path, arities, delimiter, base } => {
                let arities = arities.as_ref().map(load_arities).transpose()?;
                load_csv(path, &LoadOptions { delimiter: *delimiter, arities, base: *base })
            }
            InputSource::Synthetic { n, m, arities, seed } => generate_synthetic(*n, *m, arities, *seed),
        }
    }
}

fn parse_delimiter(s: &str) -> Result<Delimiter> {
    match s {
        "ws" | "whitespace" | " " => Ok(Delimiter::Whitespace),
        "," => Ok(Delimiter::Comma),
        "\\t" | "tab" => Ok(Delimiter::Char(b'\t')),
        _ if s.len() == 1 => Ok(Delimiter::Char(s.as_bytes()[0])),
        _ => Err(Error::InvalidParameter(format!("bad delimiter {s:?}"))),
    }
}

/// Parses `n=..,m=..,arity=..` where arity is `r` or `lo-hi`.
pub fn parse_synthetic(spec: &str, seed: u64) -> Result<InputSource> {
    let bad = |msg: String| Error::InvalidParameter(format!("--synthetic {spec:?}: {msg}"));
    let (mut n, mut m, mut arities) = (None, None, None);
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) =
            part.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
        let int = |v: &str| v.trim().parse::<usize>().map_err(|_| bad(format!("not an integer: {v:?}")));
        match key.trim() {
            "n" => n = Some(int(value)?),
            "m" => m = Some(int(value)?),
            "arity" | "r" => {
                arities = Some(match value.split_once('-') {
                    Some((lo, hi)) => Arities::Range { lo: int(lo)?, hi: int(hi)? },
                    None => Arities::Uniform(int(value)?),
                })
            }
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    Ok(InputSource::Synthetic {
        n: n.ok_or_else(|| bad("missing n".into()))?,
        m: m.ok_or_else(|| bad("missing m".into()))?,
        arities: arities.ok_or_else(|| bad("missing arity".into()))?,
        seed,
    })
}

fn line(out: &mut dyn Write, value: serde_json::Value) -> Result<()> {
    writeln!(out, "{value}")?;
    Ok(())
}

fn micros(d: Duration) -> f64 {
    d.as_nanos() as f64 / 1000.0
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::Writer::from_writer(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(io::Error::other(e))
}

pub fn cmd_bench_random(config: &RunConfig, args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let db = config.load()?;
    let report = bench_random(
        &db,
        &BenchConfig {
            strategies: config.strategies.clone(),
            num_queries: args.queries,
            seed: config.seed,
            repetitions: args.repetitions,
            engine: config.engine,
            timeout: args.timeout_ms.map(Duration::from_millis),
            parallel: config.parallel,
        },
    )?;
    let (overall, by_pa) = summarize(&report);
    match config.format {
        OutputFormat::Lines => {
            line(out, json!({"type": "database", "n": db.n(), "m": db.m(), "arities": db.arities()}))?;
            for b in &report.builds {
                line(
                    out,
                    json!({"type": "build", "strategy": b.strategy, "build_us": b.build_us,
                           "ok": b.error.is_none(), "error": b.error}),
                )?;
            }
            for t in &report.timings {
                let reps: Vec<f64> = t.durations_ns.iter().map(|&ns| ns as f64 / 1000.0).collect();
                line(
                    out,
                    json!({"type": "query", "id": t.query_id, "strategy": t.strategy,
                           "target": t.target, "parents": t.parents, "pa_size": t.pa_size,
                           "records": t.records, "mean_us": t.mean_us, "reps_us": reps,
                           "timed_out": t.timed_out}),
                )?;
            }
            for s in &overall {
                line(
                    out,
                    json!({"type": "summary", "strategy": s.strategy, "queries": s.queries,
                           "timed_out": s.timed_out, "mean_us": s.mean_us, "median_us": s.median_us,
                           "p95_us": s.p95_us, "build_us": s.build_us}),
                )?;
            }
            for p in &by_pa {
                line(
                    out,
                    json!({"type": "by_pa", "strategy": p.strategy, "pa_size": p.pa_size,
                           "queries": p.queries, "mean_us": p.mean_us}),
                )?;
            }
        }
        OutputFormat::Csv => {
            let mut w = csv_writer(out);
            w.write_record([
                "section",
                "strategy",
                "pa_size",
                "queries",
                "mean_us",
                "median_us",
                "p95_us",
                "build_us",
            ])
            .map_err(csv_err)?;
            for s in &overall {
                w.write_record([
                    "summary".to_string(),
                    s.strategy.to_string(),
                    String::new(),
                    s.queries.to_string(),
                    s.mean_us.to_string(),
                    s.median_us.to_string(),
                    s.p95_us.to_string(),
                    s.build_us.to_string(),
                ])
                .map_err(csv_err)?;
            }
            for b in report.builds.iter().filter(|b| b.error.is_some()) {
                w.write_record([
                    "build_failed",
                    b.strategy.name(),
                    "",
                    "0",
                    "",
                    "",
                    "",
                    &b.build_us.to_string(),
                ])
                .map_err(csv_err)?;
            }
            for p in &by_pa {
                w.write_record([
                    "by_pa".to_string(),
                    p.strategy.to_string(),
                    p.pa_size.to_string(),
                    p.queries.to_string(),
                    p.mean_us.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Builds each requested engine in turn; build failures are reported through
/// `on_failure` and skipped.
fn for_each_engine(
    db: &Database,
    config: &RunConfig,
    mut on_failure: impl FnMut(StrategyKind, &Error) -> Result<()>,
    mut body: impl FnMut(&Engine<'_>) -> Result<()>,
) -> Result<()> {
    for &kind in &config.strategies {
        match Engine::build(kind, db, &config.engine) {
            Ok(engine) => body(&engine)?,
            Err(e @ Error::AdTreeNodeCap { .. }) => on_failure(kind, &e)?,
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

pub fn cmd_learn_parents(config: &RunConfig, args: &LearnArgs, out: &mut dyn Write) -> Result<()> {
    let db = config.load()?;
    let max_parents = match args.max_parents {
        Some(k) if k >= db.n() => {
            return Err(Error::InvalidParameter(format!(
                "--max-parents {k} must be below the number of variables ({})",
                db.n()
            )))
        }
        Some(k) => k,
        None => 6.min(db.n() - 1),
    };
    let learn = LearnConfig { max_parents, parallel: config.parallel };
    let format = config.format;
    let out = std::cell::RefCell::new(out);
    let mut table: Vec<[String; 8]> = Vec::new();
    for_each_engine(
        &db,
        config,
        |kind, e| {
            if format == OutputFormat::Lines {
                line(
                    *out.borrow_mut(),
                    json!({"type": "build", "strategy": kind, "ok": false, "error": e.to_string()}),
                )?;
            }
            Ok(())
        },
        |engine| {
            let kind = engine.kind();
            let results = learn_parents_with(&db, engine, &learn)?;
            let mut w = out.borrow_mut();
            for r in &results {
                match format {
                    OutputFormat::Lines => line(
                        *w,
                        json!({"type": "parent_set", "strategy": kind, "target": r.target,
                               "parents": r.best_parents, "score": r.best_score, "queries": r.queries,
                               "query_us": micros(r.query_time), "total_us": micros(r.total_time),
                               "query_fraction": r.query_fraction()}),
                    )?,
                    OutputFormat::Csv => table.push([
                        kind.to_string(),
                        r.target.to_string(),
                        r.best_parents.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
                        r.best_score.to_string(),
                        r.queries.to_string(),
                        micros(r.query_time).to_string(),
                        micros(r.total_time).to_string(),
                        r.query_fraction().to_string(),
                    ]),
                }
            }
            if format == OutputFormat::Lines {
                let query: Duration = results.iter().map(|r| r.query_time).sum();
                let total: Duration = results.iter().map(|r| r.total_time).sum();
                let queries: u64 = results.iter().map(|r| r.queries).sum();
                let fraction = if total.is_zero() { 0.0 } else { query.as_secs_f64() / total.as_secs_f64() };
                line(
                    *w,
                    json!({"type": "learn_summary", "strategy": kind, "max_parents": max_parents,
                           "queries": queries, "query_us": micros(query), "total_us": micros(total),
                           "query_fraction": fraction.min(1.0)}),
                )?;
            }
            Ok(())
        },
    )?;
    if format == OutputFormat::Csv {
        let mut o = out.borrow_mut();
        let mut w = csv_writer(*o);
        w.write_record([
            "strategy",
            "target",
            "parents",
            "score",
            "queries",
            "query_us",
            "total_us",
            "query_fraction",
        ])
        .map_err(csv_err)?;
        for row in &table {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn cmd_mine_rules(config: &RunConfig, args: &MineArgs, out: &mut dyn Write) -> Result<()> {
    let db = config.load()?;
    let mine = MineConfig {
        min_support: args.min_support,
        min_confidence: args.min_confidence,
        max_size: args.max_rule_size,
    };
    for (flag, value) in [("--min-support", mine.min_support), ("--min-confidence", mine.min_confidence)] {
        if value > 1.0 {
            eprintln!("warning: {flag} {value} is above 1 and can never be met; the rule set will be empty");
        }
    }
    let format = config.format;
    let out = std::cell::RefCell::new(out);
    let mut table: Vec<[String; 5]> = Vec::new();
    for_each_engine(
        &db,
        config,
        |kind, e| {
            if format == OutputFormat::Lines {
                line(
                    *out.borrow_mut(),
                    json!({"type": "build", "strategy": kind, "ok": false, "error": e.to_string()}),
                )?;
            }
            Ok(())
        },
        |engine| {
            let kind = engine.kind();
            let res = mine_rules(&db, engine, &mine)?;
            let mut w = out.borrow_mut();
            for r in &res.rules {
                match format {
                    OutputFormat::Lines => line(
                        *w,
                        json!({"type": "rule", "strategy": kind, "antecedent": r.antecedent,
                               "consequent": r.consequent, "support": r.support,
                               "confidence": r.confidence}),
                    )?,
                    OutputFormat::Csv => table.push([
                        kind.to_string(),
                        r.antecedent.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
                        r.consequent.to_string(),
                        r.support.to_string(),
                        r.confidence.to_string(),
                    ]),
                }
            }
            if format == OutputFormat::Lines {
                line(
                    *w,
                    json!({"type": "mine_summary", "strategy": kind, "rules": res.rules.len(),
                           "frequent_itemsets": res.frequent_itemsets, "queries": res.queries,
                           "query_us": micros(res.query_time), "total_us": micros(res.total_time)}),
                )?;
            }
            Ok(())
        },
    )?;
    if format == OutputFormat::Csv {
        let mut o = out.borrow_mut();
        let mut w = csv_writer(*o);
        w.write_record(["strategy", "antecedent", "consequent", "support", "confidence"]).map_err(csv_err)?;
        for row in &table {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Runs a parsed command, writing to `--out` or `stdout`.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let common = match &cli.command {
        Command::BenchRandom(a) => &a.common,
        Command::LearnParents(a) => &a.common,
        Command::MineRules(a) => &a.common,
    };
    let config = RunConfig::from_args(common)?;
    let mut file;
    let out: &mut dyn Write = match &config.out {
        Some(path) => {
            file = BufWriter::new(File::create(path)?);
            &mut file
        }
        None => stdout,
    };
    match &cli.command {
        Command::BenchRandom(a) => cmd_bench_random(&config, a, out)?,
        Command::LearnParents(a) => cmd_learn_parents(&config, a, out)?,
        Command::MineRules(a) => cmd_mine_rules(&config, a, out)?,
    }
    out.flush()?;
    Ok(())
}

/// Exit status: 0 on success, 2 for usage errors, 1 otherwise. Errors are
/// printed to stderr as a JSON line.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(()) => 0,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("{}", json!({"type": "error", "message": e.to_string()}));
            match e {
                Error::InvalidParameter(_) => 2,
                _ => 1,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_spec_parsing() {
        assert_eq!(
            parse_synthetic("n=8,m=1024,arity=3", 5).unwrap(),
            InputSource::Synthetic { n: 8, m: 1024, arities: Arities::Uniform(3), seed: 5 }
        );
        assert!(matches!(
            parse_synthetic("n=20, m=1000, arity=2-6", 1).unwrap(),
            InputSource::Synthetic { arities: Arities::Range { lo: 2, hi: 6 }, .. }
        ));
        assert!(parse_synthetic("n=8,m=10", 1).is_err());
        assert!(parse_synthetic("n=8,m=10,arity=3,k=2", 1).is_err());
        assert!(parse_synthetic("n=x,m=10,arity=3", 1).is_err());
    }

    #[test]
    fn delimiters() {
        assert_eq!(parse_delimiter("ws").unwrap(), Delimiter::Whitespace);
        assert_eq!(parse_delimiter(";").unwrap(), Delimiter::Char(b';'));
        assert!(parse_delimiter(";;").is_err());
    }

    #[test]
    fn source_is_required_and_exclusive() {
        assert!(Cli::try_parse_from(["countstream", "bench-random"]).is_err());
        assert!(Cli::try_parse_from([
            "countstream",
            "bench-random",
            "--input",
            "a.csv",
            "--synthetic",
            "n=2,m=2,arity=2"
        ])
        .is_err());
    }
}
