//! Bitmap strategy.
//!
//! Each variable is stored as one bitset per state. A query walks the tree of
//! parent configurations depth-first, intersecting the running row set with
//! the bitset of each candidate state and pruning as soon as an intersection
//! is empty. Leaves intersect with the target's bitsets and emit.
//!
//! Parents are visited lowest-entropy first: such variables tend to produce
//! empty intersections early, which prunes more of the tree. The order is
//! fixed once when the index is built.
//!
//! Three details keep deep levels cheap. Siblings stop being tried once their
//! counts add up to the parent's. Row sets of a few rows are kept as their
//! non-zero words only, so later intersections skip empty words entirely. A
//! node holding one row is emitted as `(1, 1)` straight away unless the
//! aggregator asks for configurations.

use crate::aggregate::Aggregator;
use crate::bitset::{
    and_count_with, and_into_with, Bitset, Kernel, KernelKind, Native, Popcount, SparseWords, Swar,
};
use crate::data::{Database, State};
use crate::error::Result;
use crate::query::{Assignment, QuerySpec};

#[derive(Debug, Clone)]
pub struct BitmapIndex {
    m: usize,
    arities: Vec<usize>,
    /// `bitmaps[var][state]`
    bitmaps: Vec<Vec<Bitset>>,
    /// `counts[var][state]` = popcount of the matching bitmap.
    counts: Vec<Vec<u64>>,
    entropy: Vec<f64>,
    /// Position of each variable in ascending (entropy, index) order.
    rank: Vec<usize>,
    kernel: Kernel,
}

impl BitmapIndex {
    pub fn build(db: &Database) -> Self {
        Self::build_with_kernel(db, Kernel::detect())
    }

    pub fn build_with_kernel(db: &Database, kernel: Kernel) -> Self {
        let m = db.m();
        let mut bitmaps = Vec::with_capacity(db.n());
        for var in 0..db.n() {
            let mut per_state = vec![Bitset::zeros(m); db.arity(var)];
            for (p, &s) in db.column(var).iter().enumerate() {
                per_state[s as usize].set(p);
            }
            bitmaps.push(per_state);
        }
        let counts = (0..db.n()).map(|v| db.histogram(v)).collect();
        let entropy: Vec<f64> = (0..db.n()).map(|v| db.entropy(v)).collect();
        let mut by_entropy: Vec<usize> = (0..db.n()).collect();
        by_entropy.sort_by(|&a, &b| entropy[a].total_cmp(&entropy[b]).then(a.cmp(&b)));
        let mut rank = vec![0; db.n()];
        for (pos, &v) in by_entropy.iter().enumerate() {
            rank[v] = pos;
        }
        BitmapIndex { m, arities: db.arities().to_vec(), bitmaps, counts, entropy, rank, kernel }
    }

    pub fn n(&self) -> usize {
        self.arities.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bitmap(&self, var: usize, state: State) -> &Bitset {
        &self.bitmaps[var][state as usize]
    }

    pub fn entropy(&self, var: usize) -> f64 {
        self.entropy[var]
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    /// `parents` reordered into traversal order (ascending entropy, then index).
    pub fn traversal_order(&self, parents: &[usize]) -> Vec<usize> {
        let mut order = parents.to_vec();
        order.sort_by_key(|&v| self.rank[v]);
        order
    }

    pub fn heap_bytes(&self) -> usize {
        self.bitmaps.iter().flatten().map(Bitset::heap_bytes).sum()
    }

    /// Streams every non-zero configuration of `q` into `agg`.
    pub fn query<A: Aggregator>(&self, q: &QuerySpec, agg: &mut A) -> Result<()> {
        q.validate(self.n())?;
        match self.kernel.kind() {
            #[cfg(target_arch = "x86_64")]
            // SAFETY: a hardware kernel is only constructed after the CPU
            // reported `popcnt`.
            KernelKind::HardwarePopcnt => unsafe { self.query_popcnt(q, agg) },
            #[cfg(not(target_arch = "x86_64"))]
            KernelKind::HardwarePopcnt => self.query_with::<Native, A>(q, agg),
            KernelKind::Portable => self.query_with::<Swar, A>(q, agg),
        }
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "popcnt")]
    unsafe fn query_popcnt<A: Aggregator>(&self, q: &QuerySpec, agg: &mut A) -> Result<()> {
        self.query_with::<Native, A>(q, agg)
    }

    #[inline(always)]
    fn query_with<P: Popcount, A: Aggregator>(&self, q: &QuerySpec, agg: &mut A) -> Result<()> {
        let target = q.target();
        if q.parents().is_empty() {
            let nij = self.m as u64;
            for (t, &nijk) in self.counts[target].iter().enumerate() {
                if nijk > 0 {
                    emit(agg, &[], t as State, nijk, nij)?;
                }
            }
            return Ok(());
        }

        let order = self.traversal_order(q.parents());
        let depth_of_slot: Vec<usize> =
            q.parents().iter().map(|v| order.iter().position(|o| o == v).unwrap()).collect();
        let k = order.len();
        // The row set after fixing parents 0..=d lives in dense[d] or, once
        // it is small, in sparse[d]. Depth 0 reads the index directly.
        let mut dense: Vec<Bitset> = (0..k).map(|_| Bitset::zeros(self.m)).collect();
        let mut sparse: Vec<SparseWords> = vec![SparseWords::default(); k];
        let mut is_sparse: Vec<bool> = vec![false; k];
        let mut chosen: Vec<State> = vec![0; k];
        let mut next: Vec<usize> = vec![0; k];
        // Rows of the parent node not yet claimed by an earlier sibling.
        let mut left: Vec<u64> = vec![0; k];
        left[0] = self.m as u64;
        let mut config: Vec<State> = vec![0; k];
        let target_maps = &self.bitmaps[target];

        let mut depth = 0usize;
        loop {
            let var = order[depth];
            if next[depth] == self.arities[var] || left[depth] == 0 {
                if depth == 0 {
                    break;
                }
                depth -= 1;
                continue;
            }
            let v = next[depth];
            next[depth] += 1;
            let b = &self.bitmaps[var][v];

            let count = if depth == 0 {
                self.counts[var][v]
            } else if depth > 1 && is_sparse[depth - 1] {
                let (below, here) = sparse.split_at_mut(depth);
                is_sparse[depth] = true;
                here[0].and_from::<P>(&below[depth - 1], b)
            } else {
                let (below, here) = dense.split_at_mut(depth);
                let prev =
                    if depth == 1 { &self.bitmaps[order[0]][chosen[0] as usize] } else { &below[depth - 1] };
                let c = and_into_with::<P>(&mut here[0], prev, b);
                is_sparse[depth] = c <= SPARSE_LIMIT;
                if is_sparse[depth] && c > 0 {
                    sparse[depth].load(&here[0]);
                }
                c
            };
            if count == 0 {
                continue;
            }
            left[depth] -= count;
            chosen[depth] = v as State;

            // One row: exactly one configuration below, counted (1, 1).
            if count == 1 && !A::WANTS_CONFIGURATION {
                emit(agg, &config, 0, 1, 1)?;
                continue;
            }
            if depth + 1 < k {
                depth += 1;
                next[depth] = 0;
                left[depth] = count;
                continue;
            }

            if A::WANTS_CONFIGURATION {
                for (slot, &d) in depth_of_slot.iter().enumerate() {
                    config[slot] = chosen[d];
                }
            }
            let nij = count;
            let mut seen = 0u64;
            for (t, tmap) in target_maps.iter().enumerate() {
                let nijk = if depth == 0 {
                    and_count_with::<P>(b, tmap)
                } else if is_sparse[depth] {
                    sparse[depth].and_count::<P>(tmap)
                } else {
                    and_count_with::<P>(&dense[depth], tmap)
                };
                if nijk > 0 {
                    emit(agg, &config, t as State, nijk, nij)?;
                    seen += nijk;
                    if seen == nij {
                        break;
                    }
                }
            }
        }
        Ok(())
    }

    /// Rows matching every pair of `a`: one path through the tree.
    pub fn count(&self, a: &Assignment) -> Result<u64> {
        self.validate_assignment(a)?;
        let mut pairs = a.pairs().to_vec();
        match pairs.len() {
            0 => return Ok(self.m as u64),
            1 => return Ok(self.counts[pairs[0].0][pairs[0].1 as usize]),
            _ => {}
        }
        pairs.sort_by_key(|&(v, s)| (self.counts[v][s as usize], v));
        let mut acc = Bitset::zeros(self.m);
        let mut tmp = Bitset::zeros(self.m);
        let first = self.bitmap(pairs[0].0, pairs[0].1);
        let mut count = self.kernel.and_into(&mut acc, first, self.bitmap(pairs[1].0, pairs[1].1));
        for &(v, s) in &pairs[2..] {
            if count == 0 {
                break;
            }
            count = self.kernel.and_into(&mut tmp, &acc, self.bitmap(v, s));
            std::mem::swap(&mut acc, &mut tmp);
        }
        Ok(count)
    }

    fn validate_assignment(&self, a: &Assignment) -> Result<()> {
        for &(v, s) in a.pairs() {
            if v >= self.n() || s as usize >= self.arities[v] {
                return Err(crate::error::Error::InvalidAssignment(format!(
                    "({v}, {s}) outside the indexed database"
                )));
            }
        }
        Ok(())
    }
}

/// Row sets of at most this many rows switch to [`SparseWords`] scratch.
const SPARSE_LIMIT: u64 = 8;

#[inline(always)]
pub(crate) fn emit<A: Aggregator>(
    agg: &mut A,
    parents: &[State],
    target: State,
    nijk: u64,
    nij: u64,
) -> Result<()> {
    if A::WANTS_CONFIGURATION {
        agg.accept_configuration(parents, target, nijk, nij)?;
    } else {
        agg.accept(nijk, nij)?;
    }
    Ok(())
}

/// Free-function form of [`BitmapIndex::build`].
pub fn build_bitmap_index(db: &Database) -> BitmapIndex {
    BitmapIndex::build(db)
}

/// Free-function form of [`BitmapIndex::query`]; returns the aggregate.
pub fn bitmap_query<A: Aggregator>(idx: &BitmapIndex, q: &QuerySpec, mut agg: A) -> Result<A::Output> {
    idx.query(q, &mut agg)?;
    Ok(agg.result())
}

pub fn bitmap_count(idx: &BitmapIndex, a: &Assignment) -> Result<u64> {
    idx.count(a)
}
