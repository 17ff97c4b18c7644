//! Counting queries over complete categorical databases.
//!
//! A query names a target variable and a set of parents. Instead of
//! materialising a contingency table, a strategy enumerates every non-zero
//! `(parent configuration, target state)` pair and streams its counts
//! `(N_ijk, N_ij)` into an [`Aggregator`]. Four strategies share that
//! interface:
//!
//! - [`bitmap`]: per-state bitsets, depth-first intersection with pruning;
//! - [`radix`]: MSD radix partitioning of row indexes;
//! - [`baselines::hash`]: hash-table contingency dictionary;
//! - [`baselines::adtree`]: sparse ADtree with MCV elision and leaf lists.
//!
//! [`harness`] drives them through random query streams, parent-set
//! selection under MDL, and association rule mining.
//!
//! ```
//! use countstream::{generate_synthetic, Arities, Engine, EngineOptions, LogLikelihood,
//!                   QuerySpec, StrategyKind};
//!
//! let db = generate_synthetic(4, 500, &Arities::Uniform(3), 7).unwrap();
//! let q = QuerySpec::new(0, vec![1, 2]).unwrap();
//! let radix = Engine::build(StrategyKind::Radix, &db, &EngineOptions::default()).unwrap();
//! let bitmap = Engine::build(StrategyKind::Bitmap, &db, &EngineOptions::default()).unwrap();
//! let a = radix.run(&q, LogLikelihood::new()).unwrap();
//! let b = bitmap.run(&q, LogLikelihood::new()).unwrap();
//! assert_eq!(a, b);
//! ```

pub mod aggregate;
pub mod baselines;
pub mod bitmap;
pub mod bitset;
pub mod cli;
pub mod data;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod query;
pub mod radix;
mod rng;
pub mod strategy;

pub use aggregate::{from_fn, Aggregator, LogLikelihood, MdlScore, NullSink, RecordCollector};
pub use bitmap::{bitmap_count, bitmap_query, build_bitmap_index, BitmapIndex};
pub use data::{
    generate_synthetic, load_arities, load_csv, Arities, Database, Delimiter, LoadOptions, State, StateBase,
};
pub use error::{AggregateError, Error, Result};
pub use oracle::{oracle_count, oracle_query};
pub use query::{Assignment, QuerySpec, Record};
pub use radix::{buckets, radix_count, radix_query, PartitionDescriptor, RadixEngine};
pub use strategy::{mdl_score, Engine, EngineOptions, StrategyKind};
