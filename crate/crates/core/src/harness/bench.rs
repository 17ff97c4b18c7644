//! Random-query benchmark: every strategy answers the same seeded stream with
//! a discarding aggregator; each query is repeated and its mean recorded.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::aggregate::NullSink;
use crate::data::Database;
use crate::error::Result;
use crate::harness::random_queries;
use crate::query::QuerySpec;
use crate::strategy::{Engine, EngineOptions, StrategyKind};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub strategies: Vec<StrategyKind>,
    pub num_queries: usize,
    pub seed: u64,
    pub repetitions: usize,
    pub engine: EngineOptions,
    /// Queries whose first repetition exceeds this are not repeated and are
    /// flagged as timed out.
    pub timeout: Option<Duration>,
    /// Worker threads; `0` or `1` runs serially.
    pub parallel: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            strategies: StrategyKind::ALL.to_vec(),
            num_queries: 1000,
            seed: 1,
            repetitions: 5,
            engine: EngineOptions::default(),
            timeout: None,
            parallel: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BuildRecord {
    pub strategy: StrategyKind,
    pub build_us: f64,
    /// Set when the strategy could not be built; its queries are skipped.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingRecord {
    pub query_id: usize,
    pub strategy: StrategyKind,
    pub target: usize,
    pub parents: Vec<usize>,
    pub pa_size: usize,
    pub durations_ns: Vec<u64>,
    pub mean_us: f64,
    pub records: u64,
    pub timed_out: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub queries: Vec<QuerySpec>,
    pub builds: Vec<BuildRecord>,
    pub timings: Vec<TimingRecord>,
}

impl BenchReport {
    pub fn timings_for(&self, strategy: StrategyKind) -> impl Iterator<Item = &TimingRecord> {
        self.timings.iter().filter(move |t| t.strategy == strategy)
    }

    /// Mean response time over all queries of one strategy, in microseconds.
    pub fn mean_us(&self, strategy: StrategyKind) -> Option<f64> {
        let v: Vec<f64> = self.timings_for(strategy).map(|t| t.mean_us).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

pub fn bench_random(db: &Database, config: &BenchConfig) -> Result<BenchReport> {
    let queries = if config.num_queries == 0 {
        Vec::new()
    } else {
        random_queries(db.n(), config.num_queries, config.seed)?
    };
    bench_queries(db, &queries, config)
}

/// Runs a fixed query list through every configured strategy.
pub fn bench_queries(db: &Database, queries: &[QuerySpec], config: &BenchConfig) -> Result<BenchReport> {
    let repetitions = config.repetitions.max(1);
    let mut builds = Vec::new();
    let mut timings = Vec::new();
    let pool = super::learn::pool(config.parallel)?;

    for &kind in &config.strategies {
        let start = Instant::now();
        let engine = match Engine::build(kind, db, &config.engine) {
            Ok(e) => e,
            Err(e) => {
                builds.push(BuildRecord {
                    strategy: kind,
                    build_us: micros(start.elapsed()),
                    error: Some(e.to_string()),
                });
                continue;
            }
        };
        builds.push(BuildRecord { strategy: kind, build_us: micros(start.elapsed()), error: None });

        let time_one = |(id, q): (usize, &QuerySpec)| -> Result<TimingRecord> {
            let mut durations_ns = Vec::with_capacity(repetitions);
            let mut records = 0;
            let mut timed_out = false;
            for rep in 0..repetitions {
                let mut sink = NullSink::new();
                let t = Instant::now();
                engine.query(q, &mut sink)?;
                let elapsed = t.elapsed();
                durations_ns.push(elapsed.as_nanos() as u64);
                records = sink.calls();
                if rep == 0 && config.timeout.is_some_and(|limit| elapsed > limit) {
                    timed_out = true;
                    break;
                }
            }
            let mean_ns = durations_ns.iter().sum::<u64>() as f64 / durations_ns.len() as f64;
            Ok(TimingRecord {
                query_id: id,
                strategy: kind,
                target: q.target(),
                parents: q.parents().to_vec(),
                pa_size: q.parents().len(),
                durations_ns,
                mean_us: mean_ns / 1000.0,
                records,
                timed_out,
            })
        };
        let rows: Vec<TimingRecord> = match &pool {
            Some(pool) => {
                use rayon::prelude::*;
                pool.install(|| queries.par_iter().enumerate().map(time_one).collect::<Result<_>>())?
            }
            None => queries.iter().enumerate().map(time_one).collect::<Result<_>>()?,
        };
        timings.extend(rows);
    }
    Ok(BenchReport { queries: queries.to_vec(), builds, timings })
}

fn micros(d: Duration) -> f64 {
    d.as_nanos() as f64 / 1000.0
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategySummary {
    pub strategy: StrategyKind,
    pub queries: usize,
    pub timed_out: usize,
    pub mean_us: f64,
    pub median_us: f64,
    pub p95_us: f64,
    pub build_us: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PaSummary {
    pub strategy: StrategyKind,
    pub pa_size: usize,
    pub queries: usize,
    pub mean_us: f64,
}

/// Nearest-rank percentile of an ascending slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Per-strategy distribution of query means plus means grouped by `|Pa|`.
pub fn summarize(report: &BenchReport) -> (Vec<StrategySummary>, Vec<PaSummary>) {
    let mut overall = Vec::new();
    let mut by_pa = Vec::new();
    for build in report.builds.iter().filter(|b| b.error.is_none()) {
        let kind = build.strategy;
        let mut means: Vec<f64> = report.timings_for(kind).map(|t| t.mean_us).collect();
        means.sort_by(f64::total_cmp);
        let mean = if means.is_empty() { f64::NAN } else { means.iter().sum::<f64>() / means.len() as f64 };
        overall.push(StrategySummary {
            strategy: kind,
            queries: means.len(),
            timed_out: report.timings_for(kind).filter(|t| t.timed_out).count(),
            mean_us: mean,
            median_us: percentile(&means, 50.0),
            p95_us: percentile(&means, 95.0),
            build_us: build.build_us,
        });
        let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for t in report.timings_for(kind) {
            groups.entry(t.pa_size).or_default().push(t.mean_us);
        }
        for (pa_size, v) in groups {
            by_pa.push(PaSummary {
                strategy: kind,
                pa_size,
                queries: v.len(),
                mean_us: v.iter().sum::<f64>() / v.len() as f64,
            });
        }
    }
    (overall, by_pa)
}
