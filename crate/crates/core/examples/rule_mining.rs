//! Association rules over binary transactions. Item 1 mirrors item 0 in every
//! transaction that contains item 7; the rest are independent.
//!
//!     cargo run --release --example rule_mining

use countstream::harness::{mine_rules, MineConfig};
use countstream::{generate_synthetic, Arities, Database, Engine, EngineOptions, StrategyKind};

fn main() -> countstream::Result<()> {
    let base = generate_synthetic(8, 2_000, &Arities::Uniform(2), 5)?;
    let mut cols: Vec<Vec<u16>> = base.columns().to_vec();
    let (first, rest) = cols.split_at_mut(1);
    for (y, (&x, &z)) in rest[0].iter_mut().zip(first[0].iter().zip(&base.columns()[7])) {
        *y = if z == 1 { x } else { *y };
    }
    let db = Database::from_columns(cols, Some(vec![2; 8]))?;

    let config = MineConfig { min_support: 0.2, min_confidence: 0.6, max_size: 3 };
    let engine = Engine::build(StrategyKind::Bitmap, &db, &EngineOptions::default())?;
    let res = mine_rules(&db, &engine, &config)?;
    println!(
        "{} frequent itemsets, {} rules, {} point queries",
        res.frequent_itemsets,
        res.rules.len(),
        res.queries
    );
    for r in &res.rules {
        println!(
            "  {:?} => {}  support {:.3}  confidence {:.3}",
            r.antecedent, r.consequent, r.support, r.confidence
        );
    }
    Ok(())
}
