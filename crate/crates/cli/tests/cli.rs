use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hitsndiffs::c1p::{has_unique_c1p_order, is_p_ordered};
use hitsndiffs::io::{load_matrix, read_abilities, read_key, read_ranking, read_responses};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn hnd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hnd"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = hnd(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Exit code plus the parsed single-line error.
fn fails(dir: &Path, args: &[&str]) -> (i32, Value) {
    let out = hnd(dir, args);
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "stderr: {err}");
    (out.status.code().unwrap(), serde_json::from_str(err.trim()).unwrap())
}

fn gen(dir: &Path, out: &str, extra: &[&str]) {
    let mut args = vec!["gen", "--out", out];
    args.extend_from_slice(extra);
    ok(dir, &args);
}

#[test]
fn gen_writes_dataset_and_manifest() {
    let t = tempfile::tempdir().unwrap();
    gen(t.path(), "d", &["--model", "samejima", "--users", "100", "--items", "100", "--options", "3", "--seed", "42"]);
    for f in ["responses.csv", "abilities.csv", "key.csv", "config.json", "manifest.json"] {
        assert!(t.path().join("d").join(f).is_file(), "{f}");
    }
    let manifest: Value = serde_json::from_str(&fs::read_to_string(t.path().join("d/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "gen");
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["config"]["users"], 100);
    assert!(manifest["timestamp"].as_u64().unwrap() > 0);
}

#[test]
fn runs_are_byte_identical() {
    let t = tempfile::tempdir().unwrap();
    for d in ["a", "b"] {
        gen(t.path(), d, &["--users", "60", "--items", "30", "--seed", "7"]);
        ok(t.path(), &["rank", "--method", "hnd-power", "--input", &format!("{d}/responses.csv"), "--out", &format!("{d}.csv"), "--seed", "3"]);
    }
    let read = |p: &str| fs::read(t.path().join(p)).unwrap();
    assert_eq!(read("a/responses.csv"), read("b/responses.csv"));
    assert_eq!(read("a.csv"), read("b.csv"));
    assert!(!read("a.csv").contains(&b'\r'));
}

#[test]
fn c1p_ranking_is_a_p_order() {
    let t = tempfile::tempdir().unwrap();
    gen(t.path(), "d", &["--model", "c1p", "--users", "50", "--items", "50", "--options", "3", "--seed", "1"]);
    ok(t.path(), &["rank", "--method", "hnd-power", "--input", "d/responses.csv", "--out", "r.csv"]);
    let matrix = load_matrix(&t.path().join("d/responses.csv")).unwrap();
    let row_of: HashMap<u64, usize> = matrix.user_ids().iter().enumerate().map(|(j, &u)| (u, j)).collect();
    let mut ranking = read_ranking(&t.path().join("r.csv")).unwrap();
    assert_eq!(ranking.len(), 50);
    ranking.sort_by_key(|r| r.rank);
    let order: Vec<usize> = ranking.iter().map(|r| row_of[&r.user]).collect();
    assert!(is_p_ordered(&matrix, &order).unwrap());
}

#[test]
fn p_answer_controls_response_count() {
    let t = tempfile::tempdir().unwrap();
    gen(t.path(), "d", &["--model", "grm", "--p-answer", "0.5", "--users", "100", "--items", "100", "--seed", "5"]);
    let rows = read_responses(&t.path().join("d/responses.csv")).unwrap().len() as f64;
    // binomial(10000, 0.5): sd 50, allow five of them
    assert!((rows - 5000.0).abs() <= 250.0, "{rows}");
}

#[test]
fn disconnected_input_exits_4() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("dis.csv"), "user,item,option\n0,0,0\n1,0,0\n2,1,1\n3,1,1\n4,1,1\n").unwrap();
    let (code, err) = fails(t.path(), &["rank", "--method", "hnd-power", "--input", "dis.csv"]);
    assert_eq!(code, 4);
    let mut sizes: Vec<u64> = err["component_sizes"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![2, 3]);

    let out = ok(t.path(), &["rank", "--method", "hnd-power", "--input", "dis.csv", "--largest-component"]);
    let users: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    let mut sorted = users.clone();
    sorted.sort();
    assert_eq!(sorted, vec!["2", "3", "4"]);
}

#[test]
fn true_answer_counts_correct_answers() {
    let t = tempfile::tempdir().unwrap();
    gen(t.path(), "d", &["--users", "40", "--items", "25", "--p-answer", "0.8", "--seed", "11"]);
    let (code, _) = fails(t.path(), &["rank", "--method", "true-answer", "--input", "d/responses.csv"]);
    assert_eq!(code, 5);

    ok(t.path(), &["rank", "--method", "true-answer", "--input", "d/responses.csv", "--key", "d/key.csv", "--out", "t.csv"]);
    let key = read_key(&t.path().join("d/key.csv")).unwrap();
    let mut correct: HashMap<u64, f64> = HashMap::new();
    for r in read_responses(&t.path().join("d/responses.csv")).unwrap() {
        let hit = key.get(r.item) == Some(r.option as usize);
        *correct.entry(r.user).or_default() += f64::from(u8::from(hit));
    }
    let ranking = read_ranking(&t.path().join("t.csv")).unwrap();
    assert_eq!(ranking.len(), correct.len());
    for r in &ranking {
        assert_eq!(r.score, correct[&r.user], "user {}", r.user);
    }
    for w in ranking.windows(2) {
        assert!(w[0].score >= w[1].score);
    }
}

#[test]
fn eval_recovers_unique_c1p_order() {
    let t = tempfile::tempdir().unwrap();
    let mut found = false;
    for seed in 0..40 {
        let d = format!("d{seed}");
        gen(t.path(), &d, &["--model", "c1p", "--users", "12", "--items", "60", "--seed", &seed.to_string()]);
        let matrix = load_matrix(&t.path().join(&d).join("responses.csv")).unwrap();
        if !has_unique_c1p_order(&matrix) {
            continue;
        }
        found = true;
        ok(t.path(), &["rank", "--method", "hnd-power", "--input", &format!("{d}/responses.csv"), "--out", "r.csv"]);
        let out = ok(t.path(), &["eval", "--ranking", "r.csv", "--abilities", &format!("{d}/abilities.csv"), "--method", "hnd-power"]);
        let row = out.lines().nth(1).unwrap();
        let rho: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(rho.abs(), 1.0, "seed {seed}: {row}");
    }
    assert!(found, "no unique-order instance in 40 seeds");
}

#[test]
fn random_rankings_are_uncorrelated() {
    let t = tempfile::tempdir().unwrap();
    gen(t.path(), "d", &["--users", "100", "--items", "10", "--seed", "2"]);
    let users: Vec<u64> = read_abilities(&t.path().join("d/abilities.csv"))
        .unwrap()
        .iter()
        .map(|r| r.user)
        .collect();
    let mut inside = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order = users.clone();
        order.shuffle(&mut rng);
        let mut csv = String::from("user,score,rank\n");
        for (i, u) in order.iter().enumerate() {
            csv.push_str(&format!("{u},{},{}\n", (order.len() - i) as f64, i + 1));
        }
        fs::write(t.path().join("rand.csv"), csv).unwrap();
        let out = ok(t.path(), &["eval", "--ranking", "rand.csv", "--abilities", "d/abilities.csv"]);
        let rho: f64 = out.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
        if rho.abs() <= 0.3 {
            inside += 1;
        }
    }
    assert!(inside >= 99, "{inside}/100");
}

#[test]
fn eval_reports_displacement_and_writes_manifest() {
    let t = tempfile::tempdir().unwrap();
    gen(t.path(), "d", &["--users", "30", "--items", "30", "--seed", "4"]);
    ok(t.path(), &["rank", "--method", "hnd-power", "--input", "d/responses.csv", "--out", "a.csv"]);
    ok(t.path(), &["eval", "--ranking", "a.csv", "--abilities", "d/abilities.csv", "--reference", "a.csv", "--out", "e/eval.csv", "--seed", "9"]);
    let text = fs::read_to_string(t.path().join("e/eval.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("method,seed,spearman,displacement"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "a");
    assert_eq!(row[1], "9");
    assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
    assert!(t.path().join("e/eval.manifest.json").is_file());
}

#[test]
fn eval_dimension_mismatch_exits_6() {
    let t = tempfile::tempdir().unwrap();
    gen(t.path(), "d", &["--users", "30", "--items", "30", "--seed", "4"]);
    ok(t.path(), &["rank", "--method", "hits", "--input", "d/responses.csv", "--out", "r.csv"]);
    let text = fs::read_to_string(t.path().join("r.csv")).unwrap();
    let short: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
    fs::write(t.path().join("short.csv"), short).unwrap();
    let (code, err) = fails(t.path(), &["eval", "--ranking", "short.csv", "--abilities", "d/abilities.csv"]);
    assert_eq!(code, 6);
    assert_eq!(err["error"], "dimension_mismatch");
}

#[test]
fn bench_sweep_emits_one_record_per_cell() {
    let t = tempfile::tempdir().unwrap();
    ok(t.path(), &[
        "bench", "--methods", "hnd-power,abh-power", "--users", "1000,2000,4000", "--items", "100", "--repeats", "5",
        "--jobs", "2", "--out", "b.jsonl",
    ]);
    let text = fs::read_to_string(t.path().join("b.jsonl")).unwrap();
    let records: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 6);
    for (r, (m, method)) in records.iter().zip([
        (1000, "hnd-power"),
        (1000, "abh-power"),
        (2000, "hnd-power"),
        (2000, "abh-power"),
        (4000, "hnd-power"),
        (4000, "abh-power"),
    ]) {
        assert_eq!(r["m"], m);
        assert_eq!(r["method"], method);
        assert_eq!(r["n"], 100);
        assert!(r["wall_ms"].as_f64().unwrap() > 0.0);
    }
    assert!(t.path().join("b.manifest.json").is_file());
}

#[test]
fn bench_timeouts_are_recorded_per_cell() {
    let t = tempfile::tempdir().unwrap();
    let out = ok(t.path(), &["bench", "--methods", "abh-power", "--users", "3000", "--repeats", "1", "--timeout-s", "0.001"]);
    let r: Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert!(r["error"].as_str().unwrap().contains("timeout"), "{r}");
}

#[test]
fn usage_and_io_errors_are_single_lines() {
    let t = tempfile::tempdir().unwrap();
    assert_eq!(fails(t.path(), &["rank", "--input", "x.csv"]).0, 2);
    assert_eq!(fails(t.path(), &["rank", "--method", "nope", "--input", "x.csv"]).0, 2);
    assert_eq!(fails(t.path(), &["gen", "--users", "5"]).0, 2);
    assert_eq!(fails(t.path(), &["gen", "--model", "2pl", "--options", "3", "--out", "d"]).0, 2);
    assert_eq!(fails(t.path(), &["bench", "--users", "10", "--jobs", "0"]).0, 2);
    let (code, err) = fails(t.path(), &["rank", "--method", "hits", "--input", "missing.csv"]);
    assert_eq!(code, 3);
    assert_eq!(err["error"], "io");
    assert!(hnd(t.path(), &["--help"]).status.success());
}
