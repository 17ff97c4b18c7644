//! Brute-force reference answers. Deliberately naive: every count is a full
//! scan of all `m` rows, so these are slow but obviously correct.

use std::collections::BTreeSet;

use crate::data::{Database, State};
use crate::error::Result;
use crate::query::{Assignment, QuerySpec, Record};

/// Every observed (parent configuration, target state) pair with its counts,
/// sorted.
pub fn oracle_query(db: &Database, q: &QuerySpec) -> Result<Vec<Record>> {
    q.validate(db.n())?;
    let row_config = |p: usize| -> (Vec<State>, State) {
        (q.parents().iter().map(|&v| db.column(v)[p]).collect(), db.column(q.target())[p])
    };
    let observed: BTreeSet<(Vec<State>, State)> = (0..db.m()).map(row_config).collect();

    let mut out = Vec::with_capacity(observed.len());
    for (parents, target) in observed {
        let mut nij = 0u64;
        let mut nijk = 0u64;
        for p in 0..db.m() {
            let matches_parents = q.parents().iter().zip(&parents).all(|(&v, &s)| db.column(v)[p] == s);
            if matches_parents {
                nij += 1;
                if db.column(q.target())[p] == target {
                    nijk += 1;
                }
            }
        }
        out.push(Record { parents, target, nijk, nij });
    }
    Ok(out)
}

/// Number of rows matching every pair of `a`.
pub fn oracle_count(db: &Database, a: &Assignment) -> Result<u64> {
    a.validate(db)?;
    Ok((0..db.m()).filter(|&p| a.pairs().iter().all(|&(v, s)| db.column(v)[p] == s)).count() as u64)
}
