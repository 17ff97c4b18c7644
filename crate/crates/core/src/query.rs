//! Query and assignment descriptors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{Database, State};
use crate::error::{Error, Result};

/// A shared-context query: every non-zero configuration of `parents`
/// together with the state of `target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuerySpec {
    target: usize,
    parents: Vec<usize>,
}

impl QuerySpec {
    pub fn new(target: usize, parents: impl Into<Vec<usize>>) -> Result<Self> {
        let parents = parents.into();
        if parents.contains(&target) {
            return Err(Error::InvalidQuery(format!("target {target} also listed as a parent")));
        }
        let mut sorted = parents.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidQuery(format!("duplicate parent in {parents:?}")));
        }
        Ok(QuerySpec { target, parents })
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let Some(&v) = std::iter::once(&self.target).chain(&self.parents).find(|&&v| v >= n) {
            return Err(Error::InvalidQuery(format!("variable {v} out of range for {n} variables")));
        }
        Ok(())
    }

    /// Number of parent configurations in the domain, saturating.
    pub fn parent_configurations(&self, db: &Database) -> u128 {
        self.parents.iter().fold(1u128, |q, &p| q.saturating_mul(db.arity(p) as u128))
    }
}

impl fmt::Display for QuerySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Query(X{}, {:?})", self.target, self.parents)
    }
}

/// A conjunction of `variable = state` conditions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Assignment {
    pairs: Vec<(usize, State)>,
}

impl Assignment {
    pub fn new(pairs: impl Into<Vec<(usize, State)>>) -> Result<Self> {
        let pairs = pairs.into();
        let mut vars: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        vars.sort_unstable();
        if vars.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidAssignment(format!("variable assigned twice in {pairs:?}")));
        }
        Ok(Assignment { pairs })
    }

    pub fn empty() -> Self {
        Assignment::default()
    }

    pub fn pairs(&self) -> &[(usize, State)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Checks indexes against `db`. A state may lie outside the observed
    /// support but never outside the declared domain.
    pub fn validate(&self, db: &Database) -> Result<()> {
        for &(v, s) in &self.pairs {
            if v >= db.n() {
                return Err(Error::InvalidAssignment(format!("variable {v} out of range")));
            }
            if s as usize >= db.arity(v) {
                return Err(Error::InvalidAssignment(format!(
                    "state {s} outside domain of variable {v} (arity {})",
                    db.arity(v)
                )));
            }
        }
        Ok(())
    }

    /// Pairs sorted by ascending variable index.
    pub fn sorted(&self) -> Vec<(usize, State)> {
        let mut p = self.pairs.clone();
        p.sort_unstable_by_key(|&(v, _)| v);
        p
    }
}

/// One emitted configuration with its counts. `parents` lists parent states
/// in the order of [`QuerySpec::parents`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Record {
    pub parents: Vec<State>,
    pub target: State,
    pub nijk: u64,
    pub nij: u64,
}
