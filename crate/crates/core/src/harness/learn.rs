//! Bounded parent-set selection: for every variable, score each candidate
//! parent set of size `0..=max_parents` with MDL and keep the minimum.
//! Candidates are enumerated level by level from the empty set; within a
//! level, in lexicographic order.

use std::time::{Duration, Instant};

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::Database;
use crate::error::{Error, Result};
use crate::query::QuerySpec;
use crate::strategy::{mdl_score, Engine};

#[derive(Debug, Clone, Default)]
pub struct LearnConfig {
    pub max_parents: usize,
    /// Worker threads; `0` or `1` runs serially. Results are identical
    /// either way.
    pub parallel: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParentSetResult {
    pub target: usize,
    pub best_parents: Vec<usize>,
    pub best_score: f64,
    pub queries: u64,
    #[serde(serialize_with = "ser_micros")]
    pub query_time: Duration,
    #[serde(serialize_with = "ser_micros")]
    pub total_time: Duration,
}

impl ParentSetResult {
    /// Share of wall time spent inside counting queries.
    pub fn query_fraction(&self) -> f64 {
        if self.total_time.is_zero() {
            return 0.0;
        }
        (self.query_time.as_secs_f64() / self.total_time.as_secs_f64()).clamp(0.0, 1.0)
    }
}

fn ser_micros<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_nanos() as f64 / 1000.0)
}

pub(crate) fn pool(threads: usize) -> Result<Option<rayon::ThreadPool>> {
    if threads <= 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

pub fn learn_parents(db: &Database, engine: &Engine<'_>, max_parents: usize) -> Result<Vec<ParentSetResult>> {
    learn_parents_with(db, engine, &LearnConfig { max_parents, parallel: 0 })
}

pub fn learn_parents_with(
    db: &Database,
    engine: &Engine<'_>,
    config: &LearnConfig,
) -> Result<Vec<ParentSetResult>> {
    let n = db.n();
    if config.max_parents >= n {
        return Err(Error::InvalidParameter(format!(
            "max_parents {} must be below the number of variables ({n})",
            config.max_parents
        )));
    }
    let pool = pool(config.parallel)?;
    (0..n).map(|target| learn_one(db, engine, target, config.max_parents, pool.as_ref())).collect()
}

fn learn_one(
    db: &Database,
    engine: &Engine<'_>,
    target: usize,
    max_parents: usize,
    pool: Option<&rayon::ThreadPool>,
) -> Result<ParentSetResult> {
    let started = Instant::now();
    let others: Vec<usize> = (0..db.n()).filter(|&v| v != target).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut queries = 0u64;
    let mut query_time = Duration::ZERO;

    for size in 0..=max_parents {
        let level: Vec<Vec<usize>> = others.iter().copied().combinations(size).collect();
        let scores: Vec<f64> = match pool {
            None => {
                let mut out = Vec::with_capacity(level.len());
                for parents in &level {
                    let q = QuerySpec::new(target, parents.clone())?;
                    let t = Instant::now();
                    out.push(mdl_score(db, &q, engine)?);
                    query_time += t.elapsed();
                }
                out
            }
            Some(pool) => {
                let t = Instant::now();
                let out = pool.install(|| {
                    level
                        .par_iter()
                        .map(|parents| {
                            let q = QuerySpec::new(target, parents.clone())?;
                            mdl_score(db, &q, engine)
                        })
                        .collect::<Result<Vec<f64>>>()
                })?;
                query_time += t.elapsed();
                out
            }
        };
        queries += level.len() as u64;
        for (parents, score) in level.into_iter().zip(scores) {
            let better = match &best {
                None => true,
                Some((s, p)) => score < *s || (score == *s && parents < *p),
            };
            if better {
                best = Some((score, parents));
            }
        }
    }

    let (best_score, best_parents) = best.expect("the empty parent set is always scored");
    Ok(ParentSetResult {
        target,
        best_parents,
        best_score,
        queries,
        query_time,
        total_time: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, Arities};
    use crate::strategy::{EngineOptions, StrategyKind};

    #[test]
    fn max_parents_zero_picks_empty_sets() {
        let db = generate_synthetic(4, 200, &Arities::Uniform(3), 9).unwrap();
        let engine = Engine::build(StrategyKind::Radix, &db, &EngineOptions::default()).unwrap();
        let res = learn_parents(&db, &engine, 0).unwrap();
        assert_eq!(res.len(), 4);
        for r in &res {
            assert!(r.best_parents.is_empty());
            assert_eq!(r.queries, 1);
            assert!((0.0..=1.0).contains(&r.query_fraction()));
        }
    }

    #[test]
    fn rejects_too_many_parents() {
        let db = generate_synthetic(3, 20, &Arities::Uniform(2), 1).unwrap();
        let engine = Engine::build(StrategyKind::Bitmap, &db, &EngineOptions::default()).unwrap();
        assert!(learn_parents(&db, &engine, 3).is_err());
    }

    #[test]
    fn parallel_equals_serial() {
        let db = generate_synthetic(6, 300, &Arities::Uniform(2), 4).unwrap();
        let engine = Engine::build(StrategyKind::Bitmap, &db, &EngineOptions::default()).unwrap();
        let serial = learn_parents(&db, &engine, 3).unwrap();
        let par = learn_parents_with(&db, &engine, &LearnConfig { max_parents: 3, parallel: 3 }).unwrap();
        for (a, b) in serial.iter().zip(&par) {
            assert_eq!(a.best_parents, b.best_parents);
            assert_eq!(a.best_score.to_bits(), b.best_score.to_bits());
            assert_eq!(a.queries, 1 + 5 + 10 + 10);
        }
    }
}
