//! MDL parent-set selection on planted structure: X1 copies X0 but shifts it
//! whenever X4 is 0, and X3 is (X1 + X2) mod 3. Every variable in those
//! relations should pick the other two as its parents.
//!
//!     cargo run --release --example parent_set_learning

use countstream::harness::learn_parents;
use countstream::{generate_synthetic, Arities, Database, Engine, EngineOptions, StrategyKind};

fn main() -> countstream::Result<()> {
    let base = generate_synthetic(5, 4_000, &Arities::Uniform(3), 21)?;
    let mut cols: Vec<Vec<u16>> = base.columns().to_vec();
    let noise = cols[4].clone();
    cols[1] = cols[0].iter().zip(&noise).map(|(&x, &z)| if z == 0 { (x + 1) % 3 } else { x }).collect();
    cols[3] = cols[1].iter().zip(&cols[2]).map(|(&a, &b)| (a + b) % 3).collect();
    let db = Database::from_columns(cols, None)?;

    let engine = Engine::build(StrategyKind::Radix, &db, &EngineOptions::default())?;
    for r in learn_parents(&db, &engine, 2)? {
        println!(
            "X{} <- {:<10} score {:>10.2}  ({} queries, {:.0}% of time in counting)",
            r.target,
            format!("{:?}", r.best_parents),
            r.best_score,
            r.queries,
            100.0 * r.query_fraction()
        );
    }
    Ok(())
}
