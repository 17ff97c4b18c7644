//! Radix strategy.
//!
//! Row indexes are partitioned most-significant-digit first: by the first
//! parent, then each non-empty partition by the next parent, and so on. A
//! final pass over the target inside each parent partition yields `N_ijk`.
//! Every level is one counting-sort pass over at most `m` indexes, so a query
//! costs `O(|Pa| * m)`. Scratch space is two `m`-length index arrays plus a
//! list of rows already isolated in one-row partitions, which are set aside
//! instead of being copied through the remaining levels.

use crate::aggregate::Aggregator;
use crate::bitmap::emit;
use crate::data::{Database, State};
use crate::error::Result;
use crate::query::{Assignment, QuerySpec};

/// Row indexes of one partition (a bucket).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartitionDescriptor {
    pub rows: Vec<u32>,
}

impl PartitionDescriptor {
    pub fn all(m: usize) -> Self {
        PartitionDescriptor { rows: (0..m as u32).collect() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Splits `b` by the state of `var`: partition `t` holds the rows of `b`
/// whose state is `t`, in their original order. Empty partitions included.
pub fn buckets(db: &Database, var: usize, b: &PartitionDescriptor) -> Vec<PartitionDescriptor> {
    let col = db.column(var);
    let mut out = vec![PartitionDescriptor::default(); db.arity(var)];
    for &row in &b.rows {
        out[col[row as usize] as usize].rows.push(row);
    }
    out
}

/// Rows of one variable grouped by state: `rows[offsets[s]..offsets[s + 1]]`.
#[derive(Debug, Clone)]
struct StateGroups {
    rows: Vec<u32>,
    offsets: Vec<u32>,
}

impl StateGroups {
    fn build(col: &[State], arity: usize) -> Self {
        let mut offsets = vec![0u32; arity + 1];
        for &s in col {
            offsets[s as usize + 1] += 1;
        }
        for s in 0..arity {
            offsets[s + 1] += offsets[s];
        }
        let mut cursor = offsets.clone();
        let mut rows = vec![0u32; col.len()];
        for (p, &s) in col.iter().enumerate() {
            let c = &mut cursor[s as usize];
            rows[*c as usize] = p as u32;
            *c += 1;
        }
        StateGroups { rows, offsets }
    }

    fn group(&self, s: State) -> &[u32] {
        let s = s as usize;
        &self.rows[self.offsets[s] as usize..self.offsets[s + 1] as usize]
    }
}

/// Per-level partition counts of an instrumented run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RadixStats {
    /// `(non-empty partitions, rows covered)` after each parent level.
    pub levels: Vec<(usize, usize)>,
    /// Largest number of row indexes held at once, across index arrays and
    /// the first-level cache when it is read.
    pub peak_index_entries: usize,
    /// Largest number of queued partition descriptors at once.
    pub peak_descriptors: usize,
}

/// Radix query engine over a borrowed database.
#[derive(Debug, Clone)]
pub struct RadixEngine<'a> {
    db: &'a Database,
    first_level: Option<Vec<StateGroups>>,
}

type Descriptor = (u32, u32);

impl<'a> RadixEngine<'a> {
    /// Engine with the first partitioning level of every variable precomputed.
    pub fn new(db: &'a Database) -> Self {
        let first_level = (0..db.n()).map(|v| StateGroups::build(db.column(v), db.arity(v))).collect();
        RadixEngine { db, first_level: Some(first_level) }
    }

    /// Engine that partitions from scratch on every query.
    pub fn without_cache(db: &'a Database) -> Self {
        RadixEngine { db, first_level: None }
    }

    pub fn database(&self) -> &'a Database {
        self.db
    }

    pub fn query<A: Aggregator>(&self, q: &QuerySpec, agg: &mut A) -> Result<()> {
        self.run(q, agg, None)
    }

    pub fn query_with_stats<A: Aggregator>(&self, q: &QuerySpec, agg: &mut A) -> Result<RadixStats> {
        let mut stats = RadixStats::default();
        self.run(q, agg, Some(&mut stats))?;
        Ok(stats)
    }

    fn run<A: Aggregator>(
        &self,
        q: &QuerySpec,
        agg: &mut A,
        mut stats: Option<&mut RadixStats>,
    ) -> Result<()> {
        let db = self.db;
        q.validate(db.n())?;
        let m = db.m();
        let target_col = db.column(q.target());
        let target_arity = db.arity(q.target());
        let mut hist = vec![0u64; target_arity];

        let parents = q.parents();
        if parents.is_empty() {
            for &s in target_col {
                hist[s as usize] += 1;
            }
            for (t, &nijk) in hist.iter().enumerate() {
                if nijk > 0 {
                    emit(agg, &[], t as State, nijk, m as u64)?;
                }
            }
            if let Some(st) = stats.as_deref_mut() {
                st.peak_index_entries = 0;
                st.peak_descriptors = 1;
            }
            return Ok(());
        }

        let mut front = vec![0u32; m];
        let mut back = vec![0u32; m];
        let mut queue = Staged::new();
        let mut next_queue = Staged::new();
        let mut counts: Vec<u32> = Vec::new();
        // Rows already isolated in a partition of their own; they stop moving.
        let mut singles: Staged<u32> = Staged::new();

        // First level: from the cache when present, else a counting sort of
        // the identity permutation.
        let first = parents[0];
        let first_arity = db.arity(first);
        let cached = self.first_level.as_ref().map(|c| &c[first]);
        match cached {
            Some(groups) => {
                for s in 0..first_arity {
                    let (lo, hi) = (groups.offsets[s], groups.offsets[s + 1]);
                    match hi - lo {
                        0 => {}
                        1 => singles.push(groups.rows[lo as usize]),
                        len => queue.push((lo, len)),
                    }
                }
            }
            None => {
                for (i, r) in back.iter_mut().enumerate() {
                    *r = i as u32;
                }
                counts.resize(2 * first_arity, 0);
                let mut out = Children { queue: &mut queue, singles: &mut singles };
                partition(
                    db.column(first),
                    first_arity,
                    &back,
                    &mut front,
                    (0, m as u32),
                    &mut counts,
                    &mut out,
                );
            }
        }
        let mut reading_cache = cached.is_some();
        if let Some(st) = stats.as_deref_mut() {
            st.levels.push((queue.len() + singles.len(), covered(queue.as_slice()) + singles.len()));
            st.peak_descriptors = queue.len();
            st.peak_index_entries = 2 * m + if reading_cache { m } else { 0 } + singles.len();
        }

        for &var in &parents[1..] {
            let col = db.column(var);
            let arity = db.arity(var);
            next_queue.clear();
            counts.clear();
            counts.resize(2 * arity, 0);
            {
                let src: &[u32] = if reading_cache { &cached.unwrap().rows } else { &front };
                let mut out = Children { queue: &mut next_queue, singles: &mut singles };
                for &d in queue.as_slice() {
                    partition(col, arity, src, &mut back, d, &mut counts, &mut out);
                }
            }
            std::mem::swap(&mut front, &mut back);
            std::mem::swap(&mut queue, &mut next_queue);
            reading_cache = false;
            if let Some(st) = stats.as_deref_mut() {
                st.levels.push((queue.len() + singles.len(), covered(queue.as_slice()) + singles.len()));
                st.peak_descriptors = st.peak_descriptors.max(queue.len() + next_queue.len());
                st.peak_index_entries = st.peak_index_entries.max(2 * m + singles.len());
            }
        }

        let rows: &[u32] = if reading_cache { &cached.unwrap().rows } else { &front };
        let mut config: Vec<State> = vec![0; parents.len()];
        for &(start, len) in queue.as_slice() {
            let part = &rows[start as usize..(start + len) as usize];
            if A::WANTS_CONFIGURATION {
                let r = part[0] as usize;
                for (slot, &p) in parents.iter().enumerate() {
                    config[slot] = db.column(p)[r];
                }
            }
            let nij = len as u64;
            for &r in part {
                hist[target_col[r as usize] as usize] += 1;
            }
            for (t, h) in hist.iter_mut().enumerate() {
                if *h > 0 {
                    emit(agg, &config, t as State, *h, nij)?;
                    *h = 0;
                }
            }
        }
        for &r in singles.as_slice() {
            let r = r as usize;
            if A::WANTS_CONFIGURATION {
                for (slot, &p) in parents.iter().enumerate() {
                    config[slot] = db.column(p)[r];
                }
            }
            emit(agg, &config, target_col[r], 1, 1)?;
        }
        Ok(())
    }

    /// Rows matching `a`, following only the matching partition at each level.
    pub fn count(&self, a: &Assignment) -> Result<u64> {
        a.validate(self.db)?;
        let pairs = a.pairs();
        let Some(&(v0, s0)) = pairs.first() else {
            return Ok(self.db.m() as u64);
        };
        let mut current: Vec<u32> = match &self.first_level {
            Some(cache) => {
                let g = cache[v0].group(s0);
                if pairs.len() == 1 {
                    return Ok(g.len() as u64);
                }
                let (v1, s1) = pairs[1];
                let col = self.db.column(v1);
                g.iter().copied().filter(|&r| col[r as usize] == s1).collect()
            }
            None => {
                let col = self.db.column(v0);
                (0..self.db.m() as u32).filter(|&r| col[r as usize] == s0).collect()
            }
        };
        let rest = if self.first_level.is_some() { 2 } else { 1 };
        for &(v, s) in pairs.iter().skip(rest) {
            if current.is_empty() {
                break;
            }
            let col = self.db.column(v);
            current.retain(|&r| col[r as usize] == s);
        }
        Ok(current.len() as u64)
    }
}

fn covered(queue: &[Descriptor]) -> usize {
    queue.iter().map(|&(_, l)| l as usize).sum()
}

/// A buffer filled by conditional pushes. Slots past `len` are scratch: a
/// push always writes its slot and only advances `len` when it keeps the
/// item, which keeps the partition loop free of data-dependent branches.
struct Staged<T> {
    buf: Vec<T>,
    len: usize,
}

impl<T: Copy + Default> Staged<T> {
    fn new() -> Self {
        Staged { buf: vec![T::default(); 16], len: 0 }
    }

    #[inline]
    fn push_if(&mut self, item: T, keep: bool) {
        if self.len == self.buf.len() {
            self.buf.resize(2 * self.len, T::default());
        }
        self.buf[self.len] = item;
        self.len += keep as usize;
    }

    fn push(&mut self, item: T) {
        self.push_if(item, true);
    }

    fn len(&self) -> usize {
        self.len
    }

    fn clear(&mut self) {
        self.len = 0;
    }

    fn as_slice(&self) -> &[T] {
        &self.buf[..self.len]
    }
}

/// Where [`partition`] puts its children.
struct Children<'q> {
    queue: &'q mut Staged<Descriptor>,
    singles: &'q mut Staged<u32>,
}

/// Counting sort of `src[start..start + len]` by `col` into the same range of
/// `dst`. Children of two or more rows are queued in state order; one-row
/// children go to `singles`. `counts` must hold `2 * arity` slots.
#[inline]
fn partition(
    col: &[State],
    arity: usize,
    src: &[u32],
    dst: &mut [u32],
    (start, len): Descriptor,
    counts: &mut [u32],
    out: &mut Children<'_>,
) {
    let lo = start as usize;
    let part = &src[lo..lo + len as usize];
    if len == 2 {
        let (a, b) = (part[0], part[1]);
        let same = col[a as usize] == col[b as usize];
        dst[lo] = a;
        dst[lo + 1] = b;
        out.queue.push_if((start, 2), same);
        out.singles.push_if(a, !same);
        out.singles.push_if(b, !same);
        return;
    }
    let (sizes, cursor) = counts.split_at_mut(arity);
    sizes.fill(0);
    for &r in part {
        sizes[col[r as usize] as usize] += 1;
    }
    let mut offset = start;
    for (c, &size) in cursor.iter_mut().zip(sizes.iter()) {
        *c = offset;
        offset += size;
    }
    for &r in part {
        let slot = &mut cursor[col[r as usize] as usize];
        dst[*slot as usize] = r;
        *slot += 1;
    }
    let last = dst.len() - 1;
    for (&end, &size) in cursor.iter().zip(sizes.iter()) {
        let first = end - size;
        out.queue.push_if((first, size), size >= 2);
        out.singles.push_if(dst[(first as usize).min(last)], size == 1);
    }
}

pub fn radix_query<A: Aggregator>(db: &Database, q: &QuerySpec, mut agg: A) -> Result<A::Output> {
    RadixEngine::without_cache(db).query(q, &mut agg)?;
    Ok(agg.result())
}

pub fn radix_count(db: &Database, a: &Assignment) -> Result<u64> {
    RadixEngine::without_cache(db).count(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::{from_fn, RecordCollector};
    use crate::oracle::oracle_query;

    fn fixture() -> Database {
        let rows: Vec<Vec<State>> =
            [[1, 1, 1], [1, 2, 1], [2, 1, 2], [2, 2, 1], [3, 2, 1], [3, 2, 1], [3, 1, 2], [2, 1, 1]]
                .iter()
                .map(|r| r.iter().map(|&s| s - 1).collect())
                .collect();
        Database::from_rows(&rows, None).unwrap()
    }

    #[test]
    fn buckets_split_by_state() {
        let db = fixture();
        let sizes: Vec<usize> =
            buckets(&db, 2, &PartitionDescriptor::all(8)).iter().map(PartitionDescriptor::len).collect();
        assert_eq!(sizes, vec![6, 2]);

        let single = PartitionDescriptor { rows: vec![3] };
        let sizes: Vec<usize> = buckets(&db, 0, &single).iter().map(|b| b.len()).collect();
        assert_eq!(sizes, vec![0, 1, 0]);
    }

    #[test]
    fn arity_one_bucket_is_identity() {
        let db = Database::from_columns(vec![vec![0; 5], vec![0, 1, 0, 1, 1]], None).unwrap();
        let b = PartitionDescriptor { rows: vec![4, 1, 2] };
        assert_eq!(buckets(&db, 0, &b), vec![b.clone()]);
    }

    #[test]
    fn fixture_query_with_and_without_cache() {
        let db = fixture();
        let q = QuerySpec::new(1, vec![0, 2]).unwrap();
        let expected = oracle_query(&db, &q).unwrap();
        for engine in [RadixEngine::new(&db), RadixEngine::without_cache(&db)] {
            let mut c = RecordCollector::new();
            engine.query(&q, &mut c).unwrap();
            assert_eq!(c.result(), expected);
        }
    }

    #[test]
    fn single_row_database() {
        let db = Database::from_columns(vec![vec![1], vec![0]], Some(vec![2, 2])).unwrap();
        let q = QuerySpec::new(0, vec![1]).unwrap();
        let mut seen = Vec::new();
        RadixEngine::new(&db).query(&q, &mut from_fn(|a, b| seen.push((a, b)))).unwrap();
        assert_eq!(seen, vec![(1, 1)]);
    }

    #[test]
    fn stats_track_levels() {
        let db = fixture();
        let q = QuerySpec::new(1, vec![0, 2]).unwrap();
        let stats =
            RadixEngine::new(&db).query_with_stats(&q, &mut crate::aggregate::NullSink::new()).unwrap();
        assert_eq!(stats.levels, vec![(3, 8), (5, 8)]);
        assert!(stats.peak_index_entries <= 4 * db.m());
    }

    #[test]
    fn high_arity_columns() {
        let m = 200u32;
        let cols: Vec<Vec<State>> = vec![
            (0..m).map(|r| (r % 50) as State).collect(),
            (0..m).map(|r| if r % 100 < 50 { 0 } else { 299 }).collect(),
            (0..m).map(|r| (r * 7 % 300) as State).collect(),
            (0..m).map(|r| (r / 3 % 2) as State).collect(),
        ];
        let db = Database::from_columns(cols, Some(vec![300, 300, 300, 2])).unwrap();
        for parents in [vec![0, 1], vec![0, 1, 2], vec![2, 1, 0]] {
            let q = QuerySpec::new(3, parents).unwrap();
            let expected = oracle_query(&db, &q).unwrap();
            for engine in [RadixEngine::new(&db), RadixEngine::without_cache(&db)] {
                let mut c = RecordCollector::new();
                engine.query(&q, &mut c).unwrap();
                assert_eq!(c.result(), expected);
            }
        }
    }

    #[test]
    fn point_counts() {
        let db = fixture();
        let a = Assignment::new(vec![(0, 2), (1, 1), (2, 0)]).unwrap();
        for engine in [RadixEngine::new(&db), RadixEngine::without_cache(&db)] {
            assert_eq!(engine.count(&a).unwrap(), 2);
            assert_eq!(engine.count(&Assignment::empty()).unwrap(), 8);
        }
        let wide = Database::from_columns(vec![vec![0, 1], vec![1, 1]], Some(vec![3, 2])).unwrap();
        let unobserved = Assignment::new(vec![(0, 2), (1, 1)]).unwrap();
        assert_eq!(radix_count(&wide, &unobserved).unwrap(), 0);
    }
}
