//! Uniform front over the four counting strategies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aggregate::{Aggregator, MdlScore};
use crate::baselines::{AdTreeEngine, AdTreeParams, HashEngine};
use crate::bitmap::BitmapIndex;
use crate::data::Database;
use crate::error::{Error, Result};
use crate::query::{Assignment, QuerySpec};
use crate::radix::RadixEngine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Bitmap,
    Radix,
    Hash,
    #[serde(rename = "adtree")]
    AdTree,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] =
        [StrategyKind::Bitmap, StrategyKind::Radix, StrategyKind::Hash, StrategyKind::AdTree];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Bitmap => "bitmap",
            StrategyKind::Radix => "radix",
            StrategyKind::Hash => "hash",
            StrategyKind::AdTree => "adtree",
        }
    }

    /// Parses `all` or a comma-separated list of names.
    pub fn parse_list(list: &str) -> Result<Vec<StrategyKind>> {
        if list.trim() == "all" {
            return Ok(Self::ALL.to_vec());
        }
        let mut out: Vec<StrategyKind> = Vec::new();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let k: StrategyKind = name.parse()?;
            if !out.contains(&k) {
                out.push(k);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter("empty strategy list".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bitmap" | "bmap" => Ok(StrategyKind::Bitmap),
            "radix" | "rad" => Ok(StrategyKind::Radix),
            "hash" => Ok(StrategyKind::Hash),
            "adtree" | "adt" => Ok(StrategyKind::AdTree),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy {other:?} (expected bitmap, radix, hash or adtree)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EngineOptions {
    pub adtree: AdTreeParams,
    /// Precompute each variable's first-level partition for the radix
    /// strategy, at the cost of one row index per cell of the database.
    pub radix_cache: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { adtree: AdTreeParams::default(), radix_cache: true }
    }
}

/// A built strategy, ready to answer queries against one database.
#[derive(Debug)]
pub enum Engine<'a> {
    Bitmap(BitmapIndex),
    Radix(RadixEngine<'a>),
    Hash(HashEngine<'a>),
    AdTree(AdTreeEngine<'a>),
}

impl<'a> Engine<'a> {
    pub fn build(kind: StrategyKind, db: &'a Database, options: &EngineOptions) -> Result<Self> {
        Ok(match kind {
            StrategyKind::Bitmap => Engine::Bitmap(BitmapIndex::build(db)),
            StrategyKind::Radix if options.radix_cache => Engine::Radix(RadixEngine::new(db)),
            StrategyKind::Radix => Engine::Radix(RadixEngine::without_cache(db)),
            StrategyKind::Hash => {
                let e = HashEngine::new(db);
                e.row_major();
                Engine::Hash(e)
            }
            StrategyKind::AdTree => Engine::AdTree(AdTreeEngine::build(db, options.adtree)?),
        })
    }

    pub fn kind(&self) -> StrategyKind {
        match self {
            Engine::Bitmap(_) => StrategyKind::Bitmap,
            Engine::Radix(_) => StrategyKind::Radix,
            Engine::Hash(_) => StrategyKind::Hash,
            Engine::AdTree(_) => StrategyKind::AdTree,
        }
    }

    /// Streams every non-zero configuration of `q` into `agg`.
    pub fn query<A: Aggregator>(&self, q: &QuerySpec, agg: &mut A) -> Result<()> {
        match self {
            Engine::Bitmap(e) => e.query(q, agg),
            Engine::Radix(e) => e.query(q, agg),
            Engine::Hash(e) => e.query(q, agg),
            Engine::AdTree(e) => e.query(q, agg),
        }
    }

    /// Runs `q` through a fresh aggregator and returns its result.
    pub fn run<A: Aggregator>(&self, q: &QuerySpec, mut agg: A) -> Result<A::Output> {
        self.query(q, &mut agg)?;
        Ok(agg.result())
    }

    /// Point count of a single assignment.
    pub fn count(&self, a: &Assignment) -> Result<u64> {
        match self {
            Engine::Bitmap(e) => e.count(a),
            Engine::Radix(e) => e.count(a),
            Engine::Hash(e) => e.count(a),
            Engine::AdTree(e) => e.count(a),
        }
    }
}

/// MDL score of `q` computed through `engine`; lower is better.
pub fn mdl_score(db: &Database, q: &QuerySpec, engine: &Engine<'_>) -> Result<f64> {
    engine.run(q, MdlScore::for_query(db, q))
}
