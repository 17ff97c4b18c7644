//! A small random-query benchmark across all strategies, printed as a table
//! of mean / median / p95 response times and the mean per parent-set size.
//!
//!     cargo run --release --example random_query_bench

use countstream::harness::{bench_random, summarize, BenchConfig};
use countstream::{generate_synthetic, Arities};

fn main() -> countstream::Result<()> {
    let db = generate_synthetic(12, 10_000, &Arities::Range { lo: 2, hi: 4 }, 1)?;
    let report = bench_random(&db, &BenchConfig { num_queries: 200, repetitions: 3, ..Default::default() })?;
    for b in &report.builds {
        match &b.error {
            None => println!("built {:<7} in {:>10.1} us", b.strategy, b.build_us),
            Some(e) => println!("skipped {:<7}: {e}", b.strategy),
        }
    }

    let (overall, by_pa) = summarize(&report);
    println!("\n{:<8} {:>10} {:>10} {:>10}", "strategy", "mean_us", "median_us", "p95_us");
    for s in &overall {
        println!("{:<8} {:>10.1} {:>10.1} {:>10.1}", s.strategy, s.mean_us, s.median_us, s.p95_us);
    }

    println!("\nmean_us by |Pa|");
    let mut sizes: Vec<usize> = by_pa.iter().map(|p| p.pa_size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    for size in sizes {
        let row: Vec<String> = by_pa
            .iter()
            .filter(|p| p.pa_size == size)
            .map(|p| format!("{}={:.1}", p.strategy, p.mean_us))
            .collect();
        println!("  {size:>2}: {}", row.join("  "));
    }
    Ok(())
}
