use std::collections::HashMap;
use std::process::{Command, Output};

use forest_attack::centrality::{top_k_fegc, Scorer};
use forest_attack::{generators, greedy_attack, ForestConfig, Graph};
use rand::{Rng, SeedableRng};
use tempfile::TempDir;

const TRIANGLE_WITH_PENDANT: &str = "# triangle 0-1-2 with pendant 3\n0 1\n0 2\n0 3\n1 2\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_forest-attack"))
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn graph_file(dir: &TempDir, g: &Graph) -> String {
    let body: String = g.edges().iter().map(|e| format!("{} {} {}\n", e.u, e.v, e.weight)).collect();
    write(dir, "g.txt", &body)
}

/// `(method, k) -> delta_rho` from the compare table.
fn compare_table(out: &str) -> HashMap<(String, usize), f64> {
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("method,k,delta_rho"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            ((f[0].to_string(), f[1].parse().unwrap()), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn zero_budget_writes_only_the_header() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", TRIANGLE_WITH_PENDANT);
    for method in ["greedy", "fast", "optimum", "random", "betweenness", "degprod", "degsum", "topfegc"] {
        let out = stdout(&run(&["attack", "--input", &input, "--k", "0", "--method", method]));
        assert_eq!(out.lines().count(), 1, "{method}: {out}");
        assert!(out.starts_with("step,"), "{out}");
    }
}

#[test]
fn optimum_single_edge_is_the_pendant() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", TRIANGLE_WITH_PENDANT);
    let out = stdout(&run(&["attack", "--input", &input, "--k", "1", "--method", "optimum"]));
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[1], row[2]), ("0", "3"));
}

#[test]
fn fast_runs_are_byte_identical_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let g = generators::random_connected(60, 180, &mut rng).unwrap();
    let input = graph_file(&dir, &g);
    let args = ["attack", "--input", &input, "--k", "5", "--method", "fast", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(stdout(&a), stdout(&b));
    let json = ["attack", "--input", &input, "--k", "5", "--method", "fast", "--seed", "7", "--format", "json"];
    assert_eq!(stdout(&run(&json)), stdout(&run(&json)));
}

#[test]
fn output_flag_writes_a_file() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", TRIANGLE_WITH_PENDANT);
    let target = dir.path().join("out.json");
    let o = run(&[
        "attack", "--input", &input, "--k", "2", "--method", "greedy", "--format", "json",
        "--output", target.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(v["picks"].as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", TRIANGLE_WITH_PENDANT);
    let bad = write(&dir, "bad.txt", "0 1\n1\n");
    let looped = write(&dir, "loop.txt", "0 1\n2 2\n");
    let code = |args: &[&str]| run(args).status.code().unwrap();

    assert_eq!(code(&["attack", "--input", &bad, "--k", "1", "--method", "greedy"]), 1);
    assert_eq!(code(&["attack", "--input", &looped, "--k", "1", "--method", "greedy"]), 1);
    assert_eq!(code(&["attack", "--input", &input, "--k", "9", "--method", "greedy"]), 1);
    assert_eq!(code(&["attack", "--input", &input, "--k", "1", "--method", "nope"]), 1);
    assert_eq!(code(&["attack", "--input", &input, "--k", "1", "--method", "fast", "--epsilon", "0.7"]), 1);
    assert_eq!(code(&["attack", "--input", &input]), 1);
    assert_eq!(
        code(&["attack", "--input", &input, "--k", "2", "--method", "optimum", "--budget", "3"]),
        2
    );
    assert_eq!(
        code(&["attack", "--input", &input, "--k", "1", "--method", "greedy", "--dense-limit", "2"]),
        2
    );
    let o = run(&["attack", "--input", &bad, "--k", "1", "--method", "greedy"]);
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());
}

#[test]
fn timing_is_zero_unless_requested() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", TRIANGLE_WITH_PENDANT);
    let out = stdout(&run(&["attack", "--input", &input, "--k", "3", "--method", "greedy"]));
    assert!(out.lines().skip(1).all(|l| l.ends_with(",0")), "{out}");
}

#[test]
fn deleting_every_edge_ties_all_methods() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", TRIANGLE_WITH_PENDANT);
    let out = stdout(&run(&[
        "compare", "--input", &input, "--k-max", "4",
        "--methods", "greedy,fast,optimum,random,betweenness,degprod,degsum,topfegc",
    ]));
    let table = compare_table(&out);
    let at_m: Vec<f64> = table.iter().filter(|((_, k), _)| *k == 4).map(|(_, d)| *d).collect();
    assert_eq!(at_m.len(), 8);
    let first = at_m[0];
    assert!(at_m.iter().all(|d| (d - first).abs() <= 1e-9 * first), "{at_m:?}");
}

#[test]
fn random_trails_greedy_on_average() {
    let dir = TempDir::new().unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let g = generators::barabasi_albert(40, 2, &mut rng).unwrap();
    let input = graph_file(&dir, &g);
    let out = stdout(&run(&[
        "compare", "--input", &input, "--k-max", "5", "--methods", "greedy,random,optimum",
        "--random-trials", "10", "--budget", "1000",
    ]));
    let table = compare_table(&out);
    for k in 1..=5 {
        let greedy = table[&("greedy".to_string(), k)];
        let random = table[&("random".to_string(), k)];
        assert!(random <= greedy, "k = {k}: {random} > {greedy}");
    }
    // 1000 subsets only cover k = 1 on 78 edges.
    assert!(table.contains_key(&("optimum".to_string(), 1)));
    assert!(!table.contains_key(&("optimum".to_string(), 2)));
}

#[test]
fn one_shot_ranking_diverges_from_greedy() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
    let g = (0..500)
        .map(|_| {
            let n = rng.random_range(5..=9);
            let m = rng.random_range(n..=(n * (n - 1) / 2).min(14));
            generators::random_connected(n, m, &mut rng).unwrap()
        })
        .find(|g| {
            let greedy = greedy_attack(g, 2).unwrap().cumulative_gain();
            let shot = top_k_fegc(g, 2, Scorer::Exact(ForestConfig::default())).unwrap();
            let shot = forest_attack::fegc(g, &shot).unwrap();
            (greedy - shot).abs() > 1e-6 * greedy
        })
        .expect("a graph where the two rankings differ");
    let dir = TempDir::new().unwrap();
    let input = graph_file(&dir, &g);
    let out = stdout(&run(&["compare", "--input", &input, "--k-max", "2", "--methods", "greedy,topfegc,fast"]));
    let table = compare_table(&out);
    let d = |m: &str| table[&(m.to_string(), 2)];
    assert!((d("greedy") - d("topfegc")).abs() > 1e-6 * d("greedy"));
    assert!(d("fast") > 0.0);
}

#[test]
fn bounds_reports_json() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", TRIANGLE_WITH_PENDANT);
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&run(&["bounds", "--input", &input]))).unwrap();
    let g = v["gamma_lower"].as_f64().unwrap();
    let a = v["alpha_upper"].as_f64().unwrap();
    assert!((g + a - 1.0).abs() < 1e-12);
    assert!(v["ratio_lower"].as_f64().unwrap() > 0.0);
}
