use qscramble::cli::{run_with_io, EXIT_CAPACITY, EXIT_CONFIG, EXIT_OK};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("qscramble").chain(args.iter().copied());
    let code = run_with_io(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn hpr_exact_table() {
    let (code, out, _) = run(&[
        "hpr", "--n", "9", "--na", "1", "--nd", "2", "--jt", "1.5708", "--bx-ratio", "1", "--bz-ratio", "1.3",
        "--m", "0..14", "--exact",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("# qscramble "));
    assert!(out.lines().nth(1).unwrap().starts_with("# config: {"));
    let r = rows(&out);
    assert_eq!(r.len(), 15);
    let p0: f64 = r[0][1].parse().unwrap();
    let f0: f64 = r[0][2].parse().unwrap();
    assert!((p0 - 1.0).abs() < 1e-12 && (f0 - 0.25).abs() < 1e-12);
    let f14: f64 = r[14][2].parse().unwrap();
    assert!((f14 - 0.8421).abs() < 0.01);
}

#[test]
fn mitigate_example() {
    let (code, out, _) = run(&["mitigate", "--p-noisy", "0.416875", "--f", "0.9", "--dd", "4"]);
    assert_eq!(code, EXIT_OK);
    let r = rows(&out);
    assert_eq!(r[0][0], "p_epr");
    let p: f64 = r[0][2].parse().unwrap();
    assert!((p - 0.5).abs() < 1e-12);
}

#[test]
fn lightcone_example() {
    let (code, out, _) = run(&["lightcone", "--n", "9", "--open", "--seed-sites", "8,9", "--m", "4"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(rows(&out), vec![vec!["4".to_string(), "20".to_string()]]);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["hpr", "--n", "20", "--na", "2", "--nd", "2"]).0, EXIT_CAPACITY);
    assert_eq!(run(&["hpr", "--n", "5", "--bogus"]).0, EXIT_CONFIG);
    assert_eq!(run(&["hpr", "--na", "1"]).0, EXIT_CONFIG);
    assert_eq!(run(&["lightcone", "--n", "5", "--m", "4..2"]).0, EXIT_CONFIG);
    assert_eq!(run(&["hpr", "--n", "5", "--exact", "--shots", "10"]).0, EXIT_CONFIG);
    assert_eq!(run(&["--version"]).0, EXIT_OK);
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"n": 9, "boundary": "open", "seed-sites": "8,9", "m": "2"}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let (code, out, _) = run(&["--config", c, "lightcone"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(rows(&out)[0], vec!["2", "6"]);
    let (code, out, _) = run(&["--config", c, "lightcone", "--m", "4"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(rows(&out)[0], vec!["4", "20"]);

    std::fs::write(&cfg, r#"{"n": 9, "typo": 1}"#).unwrap();
    assert_eq!(run(&["--config", c, "lightcone"]).0, EXIT_CONFIG);
    std::fs::write(&cfg, "not json").unwrap();
    assert_eq!(run(&["--config", c, "lightcone"]).0, EXIT_CONFIG);
}

#[test]
fn sampled_runs_are_byte_identical() {
    let args = ["otoc-grid", "--n", "8", "--sites", "1..8", "--m", "0..6", "--shots", "500", "--seed", "11"];
    let (c1, a, _) = run(&args);
    let mut with_threads = vec!["--threads", "1"];
    with_threads.extend(args);
    let (c2, b, _) = run(&with_threads);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    assert_eq!(a, b);
    let hpr = ["hpr", "--n", "5", "--m", "0..4", "--shots", "200", "--seed", "3", "--noise", "H1-1"];
    assert_eq!(run(&hpr).1, run(&hpr).1);
    let tpq = ["tpq", "--n", "4", "--shots", "100", "--s", "6", "--e-points", "5"];
    let (c, t1, _) = run(&tpq);
    assert_eq!(c, EXIT_OK);
    assert_eq!(t1, run(&tpq).1);
}

#[test]
fn otoc_grid_exact_has_no_normalization() {
    let (_, out, _) = run(&["otoc-grid", "--n", "4", "--m", "0..1"]);
    for r in rows(&out) {
        assert_eq!(r.len(), 6);
        assert!(r[3].is_empty() && r[4].is_empty() && r[5].is_empty());
    }
}

#[test]
fn tpq_writes_two_tables() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("run");
    let (code, _, err) = run(&["tpq", "--n", "6", "--s", "10", "--e-points", "7", "--reference", "-o", stem.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let series = std::fs::read_to_string(dir.path().join("run.series.csv")).unwrap();
    let dos = std::fs::read_to_string(dir.path().join("run.dos.csv")).unwrap();
    assert_eq!(rows(&series).len(), 21);
    let d = rows(&dos);
    assert_eq!(d.len(), 7);
    assert!(d.iter().all(|r| !r[5].is_empty()));
}

#[test]
fn ensemble_stats_runs() {
    let (code, out, err) = run(&["ensemble-stats", "--n", "6", "--kind", "haar", "--members", "4", "--s", "5"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let r = rows(&out);
    // t runs over -S..=S
    assert_eq!(r.len(), 11);
    assert_eq!(r[5][0].parse::<f64>().unwrap(), 0.0);
    assert!(r[5][5].parse::<f64>().unwrap() < 1e-12);
}

#[test]
fn resource_estimate_and_circuit_dump() {
    let (code, out, _) = run(&["resource-estimate", "--sigma", "1", "--eps", "0.01"]);
    assert_eq!(code, EXIT_OK);
    assert!(rows(&out)[0][0].parse::<u64>().unwrap() > 0);
    let (code, out, _) = run(&["circuit-dump", "--n", "4", "--m", "2"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    // 4 RX + 4 RZ + 3 ZZ per cycle
    assert_eq!(v.as_array().unwrap().len(), 22);
}
