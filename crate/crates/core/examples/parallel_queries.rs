//! Engines are immutable after build, so independent queries can run on many
//! threads against one shared engine.
//!
//!     cargo run --release --example parallel_queries

use std::time::Instant;

use countstream::harness::{learn_parents_with, random_queries, LearnConfig};
use countstream::{generate_synthetic, Arities, Engine, EngineOptions, LogLikelihood, StrategyKind};
use rayon::prelude::*;

fn main() -> countstream::Result<()> {
    let db = generate_synthetic(20, 50_000, &Arities::Uniform(3), 8)?;
    let engine = Engine::build(StrategyKind::Radix, &db, &EngineOptions::default())?;
    let queries = random_queries(db.n(), 400, 99)?;

    let t = Instant::now();
    let serial: Vec<f64> =
        queries.iter().map(|q| engine.run(q, LogLikelihood::new())).collect::<countstream::Result<_>>()?;
    let serial_time = t.elapsed();

    let t = Instant::now();
    let parallel: Vec<f64> = queries
        .par_iter()
        .map(|q| engine.run(q, LogLikelihood::new()))
        .collect::<countstream::Result<_>>()?;
    let parallel_time = t.elapsed();

    assert_eq!(serial, parallel);
    println!(
        "{} queries: serial {serial_time:?}, {} threads {parallel_time:?}",
        queries.len(),
        rayon::current_num_threads()
    );

    let small = generate_synthetic(8, 5_000, &Arities::Uniform(3), 8)?;
    let engine = Engine::build(StrategyKind::Bitmap, &small, &EngineOptions::default())?;
    let learned = learn_parents_with(&small, &engine, &LearnConfig { max_parents: 2, parallel: 4 })?;
    println!("parallel parent-set search scored {} sets", learned.iter().map(|r| r.queries).sum::<u64>());
    Ok(())
}
