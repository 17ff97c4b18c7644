//! The ADtree caches counts for every configuration it can reach, which
//! grows quickly with the number of variables. A node cap turns that into a
//! clean error; the other strategies keep working on the same data.
//!
//!     cargo run --release --example adtree_memory_cap

use countstream::baselines::{AdTree, AdTreeParams};
use countstream::harness::{bench_random, BenchConfig};
use countstream::{generate_synthetic, Arities, EngineOptions, Error};

fn main() -> countstream::Result<()> {
    let small = generate_synthetic(6, 2_000, &Arities::Uniform(3), 2)?;
    let tree = AdTree::build(&small, AdTreeParams::default())?;
    println!(
        "n=6: {} AD nodes, {} vary nodes, {} leaf lists",
        tree.ad_nodes(),
        tree.vary_nodes(),
        tree.leaf_lists()
    );

    let wide = generate_synthetic(40, 5_000, &Arities::Uniform(4), 2)?;
    let params = AdTreeParams { node_cap: 200_000, ..Default::default() };
    match AdTree::build(&wide, params) {
        Err(Error::AdTreeNodeCap { cap }) => println!("n=40: ADtree gave up at {cap} nodes"),
        Err(e) => return Err(e),
        Ok(t) => println!("n=40: built anyway with {} nodes", t.ad_nodes()),
    }

    let report = bench_random(
        &wide,
        &BenchConfig {
            num_queries: 50,
            repetitions: 1,
            engine: EngineOptions { adtree: params, ..Default::default() },
            ..Default::default()
        },
    )?;
    for b in &report.builds {
        let mean = report.mean_us(b.strategy).map_or("-".into(), |m| format!("{m:.1} us"));
        println!("  {:<7} build ok: {:<5} mean query: {mean}", b.strategy, b.error.is_none());
    }
    Ok(())
}
