//! Workloads that drive the strategies: random query streams, parent-set
//! selection under MDL, and association rule mining.

pub mod bench;
pub mod learn;
pub mod mine;
pub mod stream;

pub use bench::{
    bench_queries, bench_random, summarize, BenchConfig, BenchReport, BuildRecord, PaSummary,
    StrategySummary, TimingRecord,
};
pub use learn::{learn_parents, learn_parents_with, LearnConfig, ParentSetResult};
pub use mine::{mine_rules, AssociationRule, MineConfig, MiningResult};
pub use stream::random_queries;
