//! Level-wise (Apriori) association rule mining over binary data, where an
//! item is present in a transaction when its variable is in state 1.
//!
//! Support and confidence thresholds are inclusive. Itemset size includes the
//! consequent and is capped at `max_size`.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::data::{Database, State};
use crate::error::{Error, Result};
use crate::query::Assignment;
use crate::strategy::Engine;

const PRESENT: State = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MineConfig {
    pub min_support: f64,
    pub min_confidence: f64,
    pub max_size: usize,
}

impl Default for MineConfig {
    fn default() -> Self {
        MineConfig { min_support: 0.2, min_confidence: 0.3, max_size: 6 }
    }
}

/// `antecedent => consequent`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssociationRule {
    pub antecedent: Vec<usize>,
    pub consequent: usize,
    pub support: f64,
    pub confidence: f64,
    /// Transactions containing antecedent and consequent.
    pub support_count: u64,
    /// Transactions containing the antecedent.
    pub antecedent_count: u64,
}

impl AssociationRule {
    pub fn size(&self) -> usize {
        self.antecedent.len() + 1
    }
}

#[derive(Debug, Clone)]
pub struct MiningResult {
    /// Sorted by (size, antecedent, consequent).
    pub rules: Vec<AssociationRule>,
    pub frequent_itemsets: usize,
    pub queries: u64,
    pub query_time: Duration,
    pub total_time: Duration,
}

fn validate(db: &Database, config: &MineConfig) -> Result<()> {
    db.is_binary()?;
    for (name, v) in [("min_support", config.min_support), ("min_confidence", config.min_confidence)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    if config.max_size < 2 {
        return Err(Error::InvalidParameter(format!("max_size must be at least 2, got {}", config.max_size)));
    }
    Ok(())
}

/// Whether `count` of `m` transactions meets the support threshold.
pub fn is_frequent(count: u64, m: usize, min_support: f64) -> bool {
    count as f64 / m as f64 >= min_support
}

pub fn mine_rules(db: &Database, engine: &Engine<'_>, config: &MineConfig) -> Result<MiningResult> {
    validate(db, config)?;
    let started = Instant::now();
    let m = db.m();
    let mut queries = 0u64;
    let mut query_time = Duration::ZERO;
    let mut count = |items: &[usize]| -> Result<u64> {
        let a = Assignment::new(items.iter().map(|&v| (v, PRESENT)).collect::<Vec<_>>())?;
        let t = Instant::now();
        let c = engine.count(&a)?;
        query_time += t.elapsed();
        queries += 1;
        Ok(c)
    };

    let mut support: HashMap<Vec<usize>, u64> = HashMap::new();
    let mut level: Vec<Vec<usize>> = Vec::new();
    for v in 0..db.n() {
        let c = count(&[v])?;
        if is_frequent(c, m, config.min_support) {
            support.insert(vec![v], c);
            level.push(vec![v]);
        }
    }

    let mut frequent = level.len();
    let mut size = 1;
    while !level.is_empty() && size < config.max_size {
        let mut next = Vec::new();
        for (i, a) in level.iter().enumerate() {
            for b in &level[i + 1..] {
                if a[..size - 1] != b[..size - 1] {
                    // `level` is sorted, so no later itemset shares a's prefix.
                    break;
                }
                let mut cand = a.clone();
                cand.push(b[size - 1]);
                let closed = (0..cand.len()).all(|skip| {
                    let sub: Vec<usize> =
                        cand.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &v)| v).collect();
                    support.contains_key(&sub)
                });
                if !closed {
                    continue;
                }
                let c = count(&cand)?;
                if is_frequent(c, m, config.min_support) {
                    support.insert(cand.clone(), c);
                    next.push(cand);
                }
            }
        }
        frequent += next.len();
        level = next;
        size += 1;
    }

    let mut rules = Vec::new();
    for (items, &joint) in support.iter().filter(|(k, _)| k.len() >= 2) {
        for (skip, &consequent) in items.iter().enumerate() {
            let antecedent: Vec<usize> =
                items.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &v)| v).collect();
            let ante = support[&antecedent];
            let confidence = joint as f64 / ante as f64;
            if confidence >= config.min_confidence {
                rules.push(AssociationRule {
                    antecedent,
                    consequent,
                    support: joint as f64 / m as f64,
                    confidence,
                    support_count: joint,
                    antecedent_count: ante,
                });
            }
        }
    }
    rules.sort_by(|a, b| {
        (a.size(), &a.antecedent, a.consequent).cmp(&(b.size(), &b.antecedent, b.consequent))
    });

    Ok(MiningResult {
        rules,
        frequent_itemsets: frequent,
        queries,
        query_time,
        total_time: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{EngineOptions, StrategyKind};

    fn all_ones(n: usize, m: usize) -> Database {
        Database::from_columns(vec![vec![1; m]; n], Some(vec![2; n])).unwrap()
    }

    #[test]
    fn identical_transactions_give_every_rule() {
        let db = all_ones(3, 10);
        let engine = Engine::build(StrategyKind::Bitmap, &db, &EngineOptions::default()).unwrap();
        let res = mine_rules(&db, &engine, &MineConfig { max_size: 3, ..Default::default() }).unwrap();
        // 3 pairs x 2 directions + 1 triple x 3 consequents.
        assert_eq!(res.rules.len(), 9);
        assert!(res.rules.iter().all(|r| r.support == 1.0 && r.confidence == 1.0));
        assert_eq!(res.rules[0].antecedent, vec![0]);
        assert_eq!(res.rules[8].size(), 3);
    }

    #[test]
    fn non_binary_is_rejected_before_counting() {
        let db = Database::from_columns(vec![vec![0, 1, 2]], None).unwrap();
        let engine = Engine::build(StrategyKind::Radix, &db, &EngineOptions::default()).unwrap();
        assert!(matches!(
            mine_rules(&db, &engine, &MineConfig::default()),
            Err(Error::NonBinary { variable: 0, arity: 3 })
        ));
    }

    #[test]
    fn thresholds_above_one_yield_nothing() {
        let db = all_ones(3, 10);
        let engine = Engine::build(StrategyKind::Hash, &db, &EngineOptions::default()).unwrap();
        let res = mine_rules(&db, &engine, &MineConfig { min_support: 1.01, ..Default::default() }).unwrap();
        assert!(res.rules.is_empty());
        assert!(mine_rules(&db, &engine, &MineConfig { min_support: 0.0, ..Default::default() }).is_err());
        assert!(mine_rules(&db, &engine, &MineConfig { max_size: 1, ..Default::default() }).is_err());
    }
}
