use crate::error::{Error, Result};
use crate::query::QuerySpec;
use crate::rng;

/// `count` random queries over `n` variables. For each, `|Pa|` is uniform on
/// `1..=n-1`, then `|Pa| + 1` distinct variables are drawn: the first is the
/// target, the rest are the parents in draw order.
pub fn random_queries(n: usize, count: usize, seed: u64) -> Result<Vec<QuerySpec>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("random queries need at least 2 variables, got {n}")));
    }
    let mut g = rng::stream(seed, rng::QUERY_STREAM);
    (0..count)
        .map(|_| {
            let size = 1 + rng::below(&mut g, (n - 1) as u32) as usize;
            let vars = rng::sample_distinct(&mut g, n, size + 1);
            QuerySpec::new(vars[0], vars[1..].to_vec())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_is_reproducible_and_well_formed() {
        let a = random_queries(8, 200, 1).unwrap();
        assert_eq!(a, random_queries(8, 200, 1).unwrap());
        assert_ne!(a, random_queries(8, 200, 2).unwrap());
        for q in &a {
            assert!((1..=7).contains(&q.parents().len()));
            q.validate(8).unwrap();
        }
        let sizes: std::collections::BTreeSet<usize> = a.iter().map(|q| q.parents().len()).collect();
        assert_eq!(sizes.len(), 7);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(random_queries(8, 0, 1).unwrap().is_empty());
        assert!(random_queries(1, 3, 1).is_err());
        for q in random_queries(2, 10, 4).unwrap() {
            assert_eq!(q.parents().len(), 1);
        }
    }
}
