//! Load a small table, ask one query with every strategy, and print the
//! streamed records and the log-likelihood they add up to.
//!
//!     cargo run --example quickstart

use countstream::{
    data::parse_table, Engine, EngineOptions, LoadOptions, LogLikelihood, QuerySpec, RecordCollector,
    StrategyKind,
};

const TABLE: &str = "\
1,1,1
1,2,1
2,1,2
2,2,1
3,2,1
3,2,1
3,1,2
2,1,1
";

fn main() -> countstream::Result<()> {
    let db = parse_table(TABLE.as_bytes(), &LoadOptions::default())?;
    println!("{} variables, {} rows, arities {:?}", db.n(), db.m(), db.arities());

    // Target X2 given parents X1 and X3 (0-based: 1 given {0, 2}).
    let q = QuerySpec::new(1, vec![0, 2])?;
    let opts = EngineOptions::default();

    let radix = Engine::build(StrategyKind::Radix, &db, &opts)?;
    println!("\n{q}: parents (X1, X3) | target X2 | N_ijk / N_ij");
    for r in radix.run(&q, RecordCollector::new())? {
        println!("  {:?} | {} | {}/{}", r.parents, r.target, r.nijk, r.nij);
    }

    for kind in StrategyKind::ALL {
        let engine = Engine::build(kind, &db, &opts)?;
        let ll = engine.run(&q, LogLikelihood::new())?;
        println!("{kind:>7}: log-likelihood {ll:.6}");
    }
    Ok(())
}
