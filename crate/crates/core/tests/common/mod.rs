#![allow(dead_code)]

use countstream::baselines::AdTreeParams;
use countstream::{Database, Engine, EngineOptions, QuerySpec, Record, State, StrategyKind};
use proptest::prelude::*;

/// Eight rows over three variables with arities (3, 2, 2), 0-based.
pub fn fixture() -> Database {
    let rows: Vec<Vec<State>> =
        [[0, 0, 0], [0, 1, 0], [1, 0, 1], [1, 1, 0], [2, 1, 0], [2, 1, 0], [2, 0, 1], [1, 0, 0]]
            .iter()
            .map(|r| r.to_vec())
            .collect();
    Database::from_rows(&rows, Some(vec![3, 2, 2])).unwrap()
}

/// Every engine configuration that must agree with the oracle: the three
/// main strategies plus ADtrees across a spread of leaf thresholds.
pub fn engines(db: &Database) -> Vec<(String, Engine<'_>)> {
    let mut out = Vec::new();
    for kind in [StrategyKind::Bitmap, StrategyKind::Radix, StrategyKind::Hash] {
        out.push((kind.to_string(), Engine::build(kind, db, &EngineOptions::default()).unwrap()));
    }
    let uncached = EngineOptions { radix_cache: false, ..Default::default() };
    out.push(("radix(uncached)".into(), Engine::build(StrategyKind::Radix, db, &uncached).unwrap()));
    for leaf in [0, 1, 4, 16, db.m()] {
        let opts = EngineOptions {
            adtree: AdTreeParams { leaf_threshold: leaf, ..Default::default() },
            ..Default::default()
        };
        out.push((format!("adtree(l={leaf})"), Engine::build(StrategyKind::AdTree, db, &opts).unwrap()));
    }
    out
}

pub fn sorted(mut v: Vec<Record>) -> Vec<Record> {
    v.sort();
    v
}

/// Brute-force `(N_ijk, N_ij)` table for a query, built by a direct scan
/// into a map keyed on the full configuration. Independent of every
/// strategy and of the library's own oracle.
pub fn scan_records(db: &Database, q: &QuerySpec) -> Vec<Record> {
    use std::collections::BTreeMap;
    let mut joint: BTreeMap<(Vec<State>, State), u64> = BTreeMap::new();
    let mut context: BTreeMap<Vec<State>, u64> = BTreeMap::new();
    for row in 0..db.m() {
        let pa: Vec<State> = q.parents().iter().map(|&p| db.column(p)[row]).collect();
        *joint.entry((pa.clone(), db.column(q.target())[row])).or_default() += 1;
        *context.entry(pa).or_default() += 1;
    }
    joint
        .into_iter()
        .map(|((parents, target), nijk)| Record { nij: context[&parents], parents, target, nijk })
        .collect()
}

/// Random database with n <= max_n, m <= max_m and arities in 1..=max_arity.
/// Columns may leave states unobserved; arities are declared explicitly.
pub fn arb_database(max_n: usize, max_m: usize, max_arity: usize) -> impl Strategy<Value = Database> {
    (1..=max_n, 1..=max_m)
        .prop_flat_map(move |(n, m)| {
            proptest::collection::vec(1..=max_arity, n).prop_flat_map(move |arities| {
                let cols: Vec<_> =
                    arities.iter().map(|&r| proptest::collection::vec(0..r as State, m)).collect();
                (Just(arities), cols)
            })
        })
        .prop_map(|(arities, cols)| Database::from_columns(cols, Some(arities)).unwrap())
}

/// A database together with a valid query over it.
pub fn arb_db_query(
    max_n: usize,
    max_m: usize,
    max_arity: usize,
) -> impl Strategy<Value = (Database, QuerySpec)> {
    arb_database(max_n, max_m, max_arity).prop_flat_map(|db| {
        let n = db.n();
        (Just(db), 0..n, proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 0..=n)).prop_flat_map(
            |(db, target, subset)| {
                let parents: Vec<usize> = subset.into_iter().filter(|&p| p != target).collect();
                (Just(db), Just(parents).prop_shuffle())
                    .prop_map(move |(db, parents)| (db, QuerySpec::new(target, parents).unwrap()))
            },
        )
    })
}

/// Random binary transaction table.
pub fn arb_binary_database(max_n: usize, max_m: usize) -> impl Strategy<Value = Database> {
    (1..=max_n, 1..=max_m, 0.05f64..0.95)
        .prop_flat_map(|(n, m, density)| {
            let cell = prop::bool::weighted(density).prop_map(State::from);
            proptest::collection::vec(proptest::collection::vec(cell, m), n)
        })
        .prop_map(|cols| {
            let n = cols.len();
            Database::from_columns(cols, Some(vec![2; n])).unwrap()
        })
}
