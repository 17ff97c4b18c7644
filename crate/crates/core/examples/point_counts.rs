//! Point queries: the number of rows matching one assignment, answered by
//! each strategy and checked against a plain scan.
//!
//!     cargo run --example point_counts

use countstream::{
    generate_synthetic, oracle_count, Arities, Assignment, Engine, EngineOptions, StrategyKind,
};

fn main() -> countstream::Result<()> {
    let db = generate_synthetic(10, 20_000, &Arities::Range { lo: 2, hi: 4 }, 3)?;
    let opts = EngineOptions::default();
    let engines: Vec<Engine> = StrategyKind::ALL
        .iter()
        .map(|&k| Engine::build(k, &db, &opts))
        .collect::<countstream::Result<_>>()?;

    let assignments = [
        Assignment::new(vec![(0, 1)])?,
        Assignment::new(vec![(0, 1), (3, 0)])?,
        Assignment::new(vec![(2, 1), (5, 0), (7, 1), (9, 0)])?,
        Assignment::empty(),
    ];
    for a in &assignments {
        let expected = oracle_count(&db, a)?;
        print!("{:<32} scan={expected:<6}", format!("{:?}", a.pairs()));
        for e in &engines {
            let got = e.count(a)?;
            assert_eq!(got, expected);
            print!(" {}={got}", e.kind());
        }
        println!();
    }
    Ok(())
}
