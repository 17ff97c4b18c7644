//! The streaming aggregation contract and the built-in aggregators.
//!
//! A strategy enumerates every non-zero configuration of a query exactly once
//! and hands its counts to an [`Aggregator`]. Strategies emit in different
//! orders, so an aggregator must reduce with an associative and commutative
//! operation.

use std::collections::BTreeMap;

use crate::data::{Database, State};
use crate::error::AggregateError;
use crate::query::{QuerySpec, Record};

/// Consumer of `(N_ijk, N_ij)` pairs.
pub trait Aggregator {
    type Output;

    /// When true, strategies call [`Aggregator::accept_configuration`] with
    /// the actual parent and target states. Strategies skip reconstructing
    /// states otherwise.
    const WANTS_CONFIGURATION: bool = false;

    fn accept(&mut self, nijk: u64, nij: u64) -> Result<(), AggregateError>;

    /// `parents` follows the order of [`QuerySpec::parents`].
    fn accept_configuration(
        &mut self,
        parents: &[State],
        target: State,
        nijk: u64,
        nij: u64,
    ) -> Result<(), AggregateError> {
        let _ = (parents, target);
        self.accept(nijk, nij)
    }

    fn result(&self) -> Self::Output;
}

#[inline]
fn check(nijk: u64, nij: u64) -> Result<(), AggregateError> {
    if nijk == 0 {
        Err(AggregateError::ZeroCount { nij })
    } else if nijk > nij {
        Err(AggregateError::CountExceedsContext { nijk, nij })
    } else {
        Ok(())
    }
}

/// Counts calls and discards the counts. Used for timing.
#[derive(Debug, Default, Clone)]
pub struct NullSink {
    calls: u64,
}

impl NullSink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }
}

impl Aggregator for NullSink {
    type Output = u64;

    #[inline]
    fn accept(&mut self, _nijk: u64, _nij: u64) -> Result<(), AggregateError> {
        self.calls += 1;
        Ok(())
    }

    fn result(&self) -> u64 {
        self.calls
    }
}

/// `1 / 2^64` fixed point. Terms are rounded onto this grid once and summed as
/// integers, which makes the reduction exactly order-independent.
const FIXED_ONE: f64 = 18_446_744_073_709_551_616.0;

/// Log-likelihood `sum N_ijk * ln(N_ijk / N_ij)`.
#[derive(Debug, Default, Clone)]
pub struct LogLikelihood {
    sum: i128,
    records: u64,
}

impl LogLikelihood {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> u64 {
        self.records
    }
}

impl Aggregator for LogLikelihood {
    type Output = f64;

    #[inline]
    fn accept(&mut self, nijk: u64, nij: u64) -> Result<(), AggregateError> {
        check(nijk, nij)?;
        if nijk != nij {
            let term = nijk as f64 * (nijk as f64 / nij as f64).ln();
            self.sum += (term * FIXED_ONE) as i128;
        }
        self.records += 1;
        Ok(())
    }

    fn result(&self) -> f64 {
        self.sum as f64 / FIXED_ONE
    }
}

/// MDL score `-L + ln(m)/2 * (r_i - 1) * q_i`; lower is better.
#[derive(Debug, Clone)]
pub struct MdlScore {
    loglik: LogLikelihood,
    penalty: f64,
}

impl MdlScore {
    pub fn new(m: usize, target_arity: usize, parent_configurations: f64) -> Self {
        let penalty = (m as f64).ln() / 2.0 * (target_arity as f64 - 1.0) * parent_configurations;
        MdlScore { loglik: LogLikelihood::new(), penalty }
    }

    /// Penalty inputs taken from the database's declared arities.
    pub fn for_query(db: &Database, q: &QuerySpec) -> Self {
        let qi: f64 = q.parents().iter().map(|&p| db.arity(p) as f64).product();
        Self::new(db.m(), db.arity(q.target()), qi)
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn log_likelihood(&self) -> f64 {
        self.loglik.result()
    }
}

impl Aggregator for MdlScore {
    type Output = f64;

    #[inline]
    fn accept(&mut self, nijk: u64, nij: u64) -> Result<(), AggregateError> {
        self.loglik.accept(nijk, nij)
    }

    fn result(&self) -> f64 {
        -self.loglik.result() + self.penalty
    }
}

/// Stores every emitted record keyed by configuration.
#[derive(Debug, Default, Clone)]
pub struct RecordCollector {
    records: BTreeMap<(Vec<State>, State), (u64, u64)>,
}

impl RecordCollector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl Aggregator for RecordCollector {
    type Output = Vec<Record>;
    const WANTS_CONFIGURATION: bool = true;

    fn accept(&mut self, _nijk: u64, _nij: u64) -> Result<(), AggregateError> {
        Err(AggregateError::Aborted("record collector needs configurations".into()))
    }

    fn accept_configuration(
        &mut self,
        parents: &[State],
        target: State,
        nijk: u64,
        nij: u64,
    ) -> Result<(), AggregateError> {
        check(nijk, nij)?;
        let key = (parents.to_vec(), target);
        if self.records.contains_key(&key) {
            return Err(AggregateError::DuplicateConfiguration { parents: key.0, target });
        }
        self.records.insert(key, (nijk, nij));
        Ok(())
    }

    /// Records sorted by configuration.
    fn result(&self) -> Vec<Record> {
        self.records
            .iter()
            .map(|((parents, target), &(nijk, nij))| Record {
                parents: parents.clone(),
                target: *target,
                nijk,
                nij,
            })
            .collect()
    }
}

/// Wraps a closure as an aggregator; the closure's return value is ignored.
pub struct FnAggregator<F> {
    f: F,
    calls: u64,
}

pub fn from_fn<F: FnMut(u64, u64)>(f: F) -> FnAggregator<F> {
    FnAggregator { f, calls: 0 }
}

impl<F: FnMut(u64, u64)> Aggregator for FnAggregator<F> {
    type Output = u64;

    fn accept(&mut self, nijk: u64, nij: u64) -> Result<(), AggregateError> {
        (self.f)(nijk, nij);
        self.calls += 1;
        Ok(())
    }

    fn result(&self) -> u64 {
        self.calls
    }
}
