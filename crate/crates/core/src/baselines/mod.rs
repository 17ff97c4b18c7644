//! Competitor strategies: a hash-table contingency dictionary and a sparse
//! ADtree.

pub mod adtree;
pub mod hash;

pub use adtree::{adtree_count, adtree_query, build_adtree, AdTree, AdTreeEngine, AdTreeParams};
pub use hash::{hash_query, ContingencyDictionary, HashEngine};
