//! Writing an aggregator: anything implementing `Aggregator` can consume the
//! `(N_ijk, N_ij)` stream. This one computes the empirical conditional entropy
//! H(target | parents) in nats and tracks the largest context seen.
//!
//!     cargo run --example custom_aggregator

use countstream::{
    from_fn, generate_synthetic, AggregateError, Aggregator, Arities, Engine, EngineOptions, QuerySpec,
    StrategyKind,
};

#[derive(Default)]
struct ConditionalEntropy {
    weighted: f64,
    total: u64,
    largest_context: u64,
}

impl Aggregator for ConditionalEntropy {
    type Output = (f64, u64);

    fn accept(&mut self, nijk: u64, nij: u64) -> Result<(), AggregateError> {
        let p = nijk as f64 / nij as f64;
        self.weighted -= nijk as f64 * p.ln();
        self.total += nijk;
        self.largest_context = self.largest_context.max(nij);
        Ok(())
    }

    fn result(&self) -> (f64, u64) {
        (self.weighted / self.total as f64, self.largest_context)
    }
}

fn main() -> countstream::Result<()> {
    let db = generate_synthetic(6, 5_000, &Arities::Uniform(3), 11)?;
    let engine = Engine::build(StrategyKind::Bitmap, &db, &EngineOptions::default())?;

    for parents in [vec![], vec![1], vec![1, 2], vec![1, 2, 3, 4]] {
        let q = QuerySpec::new(0, parents)?;
        let (h, widest) = engine.run(&q, ConditionalEntropy::default())?;
        println!("H(X0 | {:?}) = {h:.4} nats, largest context {widest}", q.parents());
    }

    // Closures work too when a full type is overkill.
    let mut support = 0u64;
    let q = QuerySpec::new(0, vec![1, 2, 3])?;
    let configurations = engine.run(&q, from_fn(|nijk, _| support += nijk))?;
    println!("{q} has {configurations} non-zero configurations covering {support} rows");
    Ok(())
}
