mod common;

use std::path::Path;
use std::process::{Command, Output};

use countstream::harness::learn_parents;
use countstream::{Engine, EngineOptions, StrategyKind};
use serde_json::Value;

const FIXTURE_CSV: &str = "1,1,1\n1,2,1\n2,1,2\n2,2,1\n3,2,1\n3,2,1\n3,1,2\n2,1,1\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_countstream")).args(args).output().unwrap()
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn of_type<'a>(v: &'a [Value], ty: &str) -> Vec<&'a Value> {
    v.iter().filter(|l| l["type"] == ty).collect()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn bench_random_summary_shape() {
    let out = run(&[
        "bench-random",
        "--synthetic",
        "n=8,m=1024,arity=3",
        "--seed",
        "1",
        "--queries",
        "200",
        "--repetitions",
        "1",
        "--strategies",
        "all",
    ]);
    assert!(out.status.success());
    let v = lines(&out);
    assert_eq!(of_type(&v, "summary").len(), 4);
    assert_eq!(of_type(&v, "query").len(), 800);
    for q in of_type(&v, "query") {
        assert_eq!(q["reps_us"].as_array().unwrap().len(), 1);
        assert_eq!(q["pa_size"].as_u64().unwrap() as usize, q["parents"].as_array().unwrap().len());
    }
}

#[test]
fn bench_random_is_deterministic_apart_from_timings() {
    let args = [
        "bench-random",
        "--synthetic",
        "n=6,m=500,arity=2-4",
        "--seed",
        "3",
        "--queries",
        "30",
        "--repetitions",
        "1",
    ];
    let strip = |out: &Output| -> Vec<(Value, Value, Value, Value)> {
        of_type(&lines(out), "query")
            .into_iter()
            .map(|q| (q["strategy"].clone(), q["target"].clone(), q["parents"].clone(), q["records"].clone()))
            .collect()
    };
    let a = run(&args);
    let b = run(&args);
    assert_eq!(strip(&a), strip(&b));
    let db_a = of_type(&lines(&a), "database")[0].clone();
    assert_eq!(db_a, of_type(&lines(&b), "database")[0].clone());
}

#[test]
fn radix_cache_flag_does_not_change_records() {
    let base = [
        "bench-random",
        "--synthetic",
        "n=7,m=800,arity=3",
        "--queries",
        "25",
        "--repetitions",
        "1",
        "--strategies",
        "radix",
    ];
    let records = |extra: &[&str]| -> Vec<Value> {
        let args: Vec<&str> = base.iter().chain(extra).copied().collect();
        let out = run(&args);
        assert!(out.status.success());
        of_type(&lines(&out), "query").into_iter().map(|q| q["records"].clone()).collect()
    };
    let cached = records(&[]);
    assert_eq!(cached.len(), 25);
    assert_eq!(cached, records(&["--no-radix-cache"]));
}

#[test]
fn adtree_cap_failure_is_reported_and_run_succeeds() {
    let out = run(&[
        "bench-random",
        "--synthetic",
        "n=20,m=2000,arity=4",
        "--queries",
        "5",
        "--repetitions",
        "1",
        "--strategies",
        "radix,adtree",
        "--adtree-node-cap",
        "1000",
    ]);
    assert!(out.status.success());
    let v = lines(&out);
    let builds = of_type(&v, "build");
    let adtree = builds.iter().find(|b| b["strategy"] == "adtree").unwrap();
    assert_eq!(adtree["ok"], false);
    assert!(adtree["error"].as_str().unwrap().contains("1000"));
    let queries = of_type(&v, "query");
    assert_eq!(queries.len(), 5);
    assert!(queries.iter().all(|q| q["strategy"] == "radix"));
}

#[test]
fn strategy_subset_does_not_change_other_outputs() {
    let base = ["bench-random", "--synthetic", "n=6,m=300,arity=3", "--queries", "20", "--repetitions", "1"];
    let records = |strategies: &str| -> Vec<Value> {
        let mut args = base.to_vec();
        args.extend(["--strategies", strategies]);
        of_type(&lines(&run(&args)), "query")
            .into_iter()
            .filter(|q| q["strategy"] == "radix")
            .map(|q| q["records"].clone())
            .collect()
    };
    assert_eq!(records("radix"), records("all"));
}

#[test]
fn learn_parents_on_fixture_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "fixture.csv", FIXTURE_CSV);
    let out = run(&["learn-parents", "--input", &input, "--max-parents", "2", "--strategies", "radix"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = lines(&out);
    let sets = of_type(&v, "parent_set");
    let db = common::fixture();
    let engine = Engine::build(StrategyKind::Radix, &db, &EngineOptions::default()).unwrap();
    let expected = learn_parents(&db, &engine, 2).unwrap();
    assert_eq!(sets.len(), expected.len());
    for (line, r) in sets.iter().zip(&expected) {
        let parents: Vec<usize> = serde_json::from_value(line["parents"].clone()).unwrap();
        assert_eq!(parents, r.best_parents);
        let score = line["score"].as_f64().unwrap();
        assert!((score - r.best_score).abs() <= 1e-12 * r.best_score.abs(), "{score} vs {}", r.best_score);
        let f = line["query_fraction"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&f));
    }
}

#[test]
fn learn_parents_zero_and_too_many() {
    let out = run(&[
        "learn-parents",
        "--synthetic",
        "n=4,m=200,arity=3",
        "--max-parents",
        "0",
        "--strategies",
        "hash",
    ]);
    assert!(out.status.success());
    for line in of_type(&lines(&out), "parent_set") {
        assert!(line["parents"].as_array().unwrap().is_empty());
    }
    let out = run(&["learn-parents", "--synthetic", "n=4,m=200,arity=3", "--max-parents", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_nonzero() {
    assert_eq!(run(&["bench-random"]).status.code(), Some(2));
    assert_eq!(run(&["bench-random", "--synthetic", "n=3,m=10,arity=2", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["bench-random", "--synthetic", "n=3,m=10"]).status.code(), Some(2));
    assert_eq!(
        run(&["bench-random", "--synthetic", "n=3,m=10,arity=2", "--strategies", "btree"]).status.code(),
        Some(2)
    );
    let out = run(&["learn-parents", "--input", "/definitely/not/here.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["type"], "error");
}

#[test]
fn mine_rules_all_ones_and_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ones.txt", &"1 1 1\n".repeat(10));
    let arities = write(dir.path(), "ones.arity", "2 2 2\n");
    let out = run(&[
        "mine-rules",
        "--input",
        &input,
        "--arities",
        &arities,
        "--delimiter",
        "ws",
        "--state-base",
        "zero",
        "--max-rule-size",
        "3",
        "--strategies",
        "bitmap",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = lines(&out);
    let rules = of_type(&v, "rule");
    assert_eq!(rules.len(), 9);
    assert!(rules.iter().all(|r| r["support"] == 1.0 && r["confidence"] == 1.0));

    let out = run(&[
        "mine-rules",
        "--input",
        &input,
        "--arities",
        &arities,
        "--delimiter",
        "ws",
        "--state-base",
        "zero",
        "--min-support",
        "1.01",
    ]);
    assert!(out.status.success());
    assert!(of_type(&lines(&out), "rule").is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("min-support"));
}

#[test]
fn mine_rules_non_binary_is_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "fixture.csv", FIXTURE_CSV);
    let out = run(&["mine-rules", "--input", &input]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert!(err["message"].as_str().unwrap().contains("binary"));
}

#[test]
fn csv_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("bench.csv");
    let out = run(&[
        "bench-random",
        "--synthetic",
        "n=5,m=200,arity=2",
        "--queries",
        "10",
        "--repetitions",
        "1",
        "--format",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let mut reader = csv::Reader::from_path(&out_path).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["section", "strategy", "pa_size", "queries", "mean_us", "median_us", "p95_us", "build_us"]
    );
    let summaries = reader.records().map(|r| r.unwrap()).filter(|r| &r[0] == "summary").count();
    assert_eq!(summaries, 4);
}

#[test]
fn declared_arities_raise_the_penalty() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "fixture.csv", FIXTURE_CSV);
    let wide = write(dir.path(), "wide.arity", "3\n2\n4\n");
    let score = |extra: &[&str]| -> f64 {
        let mut args =
            vec!["learn-parents", "--input", &input, "--max-parents", "0", "--strategies", "radix"];
        args.extend_from_slice(extra);
        of_type(&lines(&run(&args)), "parent_set")[2]["score"].as_f64().unwrap()
    };
    assert!(score(&["--arities", &wide]) > score(&[]));
}
