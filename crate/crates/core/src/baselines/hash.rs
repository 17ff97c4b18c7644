//! Hash-table contingency baseline: one scan over a row-major copy of the
//! data builds a dictionary from parent configuration to target counts.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::aggregate::Aggregator;
use crate::bitmap::emit;
use crate::data::{Database, State};
use crate::error::Result;
use crate::query::{Assignment, QuerySpec};

/// Parent configuration -> per-target-state counts. Keys are mixed-radix
/// integers when the parent domain fits in 64 bits, state tuples otherwise.
#[derive(Debug, Clone)]
pub struct ContingencyDictionary {
    radices: Vec<u64>,
    target_arity: usize,
    table: Table,
}

#[derive(Debug, Clone)]
enum Table {
    Packed(HashMap<u64, Vec<u64>>),
    Tuple(HashMap<Vec<State>, Vec<u64>>),
}

impl ContingencyDictionary {
    /// Single pass over the rows of `row_major` (`m` rows of `n` states).
    pub fn build(db: &Database, row_major: &[State], q: &QuerySpec) -> Result<Self> {
        q.validate(db.n())?;
        let n = db.n();
        let target = q.target();
        let target_arity = db.arity(target);
        let parents = q.parents();
        let radices: Vec<u64> = parents.iter().map(|&p| db.arity(p) as u64).collect();
        let fits = radices.iter().try_fold(1u64, |acc, &r| acc.checked_mul(r)).is_some();

        let table = if fits {
            let mut map: HashMap<u64, Vec<u64>> = HashMap::new();
            for row in row_major.chunks_exact(n) {
                let key = parents.iter().zip(&radices).fold(0u64, |k, (&p, &r)| k * r + row[p] as u64);
                map.entry(key).or_insert_with(|| vec![0; target_arity])[row[target] as usize] += 1;
            }
            Table::Packed(map)
        } else {
            let mut map: HashMap<Vec<State>, Vec<u64>> = HashMap::new();
            let mut key = Vec::with_capacity(parents.len());
            for row in row_major.chunks_exact(n) {
                key.clear();
                key.extend(parents.iter().map(|&p| row[p]));
                match map.get_mut(&key) {
                    Some(counts) => counts[row[target] as usize] += 1,
                    None => {
                        let mut counts = vec![0; target_arity];
                        counts[row[target] as usize] += 1;
                        map.insert(key.clone(), counts);
                    }
                }
            }
            Table::Tuple(map)
        };
        Ok(ContingencyDictionary { radices, target_arity, table })
    }

    pub fn len(&self) -> usize {
        match &self.table {
            Table::Packed(m) => m.len(),
            Table::Tuple(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn target_arity(&self) -> usize {
        self.target_arity
    }

    /// Sum of every stored count.
    pub fn total(&self) -> u64 {
        let sum = |v: &Vec<u64>| v.iter().sum::<u64>();
        match &self.table {
            Table::Packed(m) => m.values().map(sum).sum(),
            Table::Tuple(m) => m.values().map(sum).sum(),
        }
    }

    /// Visits `(parent states, counts)` for every stored configuration.
    pub fn for_each(&self, mut f: impl FnMut(&[State], &[u64]) -> Result<()>) -> Result<()> {
        match &self.table {
            Table::Packed(map) => {
                let mut states = vec![0; self.radices.len()];
                for (&key, counts) in map {
                    let mut k = key;
                    for (slot, &r) in states.iter_mut().zip(&self.radices).rev() {
                        *slot = (k % r) as State;
                        k /= r;
                    }
                    f(&states, counts)?;
                }
            }
            Table::Tuple(map) => {
                for (key, counts) in map {
                    f(key, counts)?;
                }
            }
        }
        Ok(())
    }

    fn emit_all<A: Aggregator>(&self, agg: &mut A) -> Result<()> {
        match &self.table {
            // The decode is skipped unless the aggregator wants states.
            Table::Packed(map) if !A::WANTS_CONFIGURATION => {
                for counts in map.values() {
                    emit_counts(agg, &[], counts)?;
                }
                Ok(())
            }
            _ => self.for_each(|states, counts| emit_counts(agg, states, counts)),
        }
    }
}

#[inline]
fn emit_counts<A: Aggregator>(agg: &mut A, states: &[State], counts: &[u64]) -> Result<()> {
    let nij: u64 = counts.iter().sum();
    for (t, &nijk) in counts.iter().enumerate() {
        if nijk > 0 {
            emit(agg, states, t as State, nijk, nij)?;
        }
    }
    Ok(())
}

/// Hash-table strategy. The row-major copy is built on first use and kept.
#[derive(Debug)]
pub struct HashEngine<'a> {
    db: &'a Database,
    row_major: OnceLock<Vec<State>>,
}

impl<'a> HashEngine<'a> {
    pub fn new(db: &'a Database) -> Self {
        HashEngine { db, row_major: OnceLock::new() }
    }

    pub fn row_major(&self) -> &[State] {
        self.row_major.get_or_init(|| self.db.to_row_major())
    }

    pub fn contingency(&self, q: &QuerySpec) -> Result<ContingencyDictionary> {
        ContingencyDictionary::build(self.db, self.row_major(), q)
    }

    pub fn query<A: Aggregator>(&self, q: &QuerySpec, agg: &mut A) -> Result<()> {
        self.contingency(q)?.emit_all(agg)
    }

    /// Direct row scan; no dictionary is involved in point counts.
    pub fn count(&self, a: &Assignment) -> Result<u64> {
        a.validate(self.db)?;
        let n = self.db.n();
        let pairs = a.pairs();
        Ok(self.row_major().chunks_exact(n).filter(|row| pairs.iter().all(|&(v, s)| row[v] == s)).count()
            as u64)
    }
}

pub fn hash_query<A: Aggregator>(db: &Database, q: &QuerySpec, mut agg: A) -> Result<A::Output> {
    HashEngine::new(db).query(q, &mut agg)?;
    Ok(agg.result())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::{from_fn, RecordCollector};

    #[test]
    fn empty_parents_give_histogram() {
        let db = Database::from_columns(vec![vec![0, 1, 1, 2], vec![1, 1, 0, 0]], None).unwrap();
        let engine = HashEngine::new(&db);
        let dict = engine.contingency(&QuerySpec::new(0, vec![]).unwrap()).unwrap();
        assert_eq!(dict.len(), 1);
        dict.for_each(|states, counts| {
            assert!(states.is_empty());
            assert_eq!(counts, &[1, 2, 1]);
            Ok(())
        })
        .unwrap();
    }

    #[test]
    fn identical_rows_give_one_slot() {
        let db = Database::from_columns(vec![vec![1; 6], vec![0; 6], vec![2; 6]], None).unwrap();
        let mut seen = Vec::new();
        HashEngine::new(&db)
            .query(&QuerySpec::new(2, vec![0, 1]).unwrap(), &mut from_fn(|a, b| seen.push((a, b))))
            .unwrap();
        assert_eq!(seen, vec![(6, 6)]);
    }

    #[test]
    fn tuple_keys_match_packed_keys() {
        // 40 parents of arity 4 overflow a 64-bit mixed-radix key.
        let db = crate::data::generate_synthetic(42, 300, &crate::data::Arities::Uniform(4), 5).unwrap();
        let wide = QuerySpec::new(0, (1..41).collect::<Vec<_>>()).unwrap();
        let engine = HashEngine::new(&db);
        let dict = engine.contingency(&wide).unwrap();
        assert!(matches!(dict.table, Table::Tuple(_)));
        assert_eq!(dict.total(), 300);
        let mut c = RecordCollector::new();
        engine.query(&wide, &mut c).unwrap();
        assert_eq!(c.result(), crate::oracle::oracle_query(&db, &wide).unwrap());
    }

    #[test]
    fn count_scans_rows() {
        let db = Database::from_columns(vec![vec![0, 1, 1], vec![1, 1, 0]], None).unwrap();
        let e = HashEngine::new(&db);
        assert_eq!(e.count(&Assignment::new(vec![(0, 1), (1, 1)]).unwrap()).unwrap(), 1);
        assert_eq!(e.count(&Assignment::empty()).unwrap(), 3);
    }
}
