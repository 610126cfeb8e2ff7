use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unithood"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.status.code(), Some(1), "{args:?} should fail");
    String::from_utf8(out.stderr).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn lines_with(report: &str, key: &str) -> String {
    report
        .lines()
        .find(|l| l.starts_with(&format!("{key}\t")))
        .unwrap_or_else(|| panic!("no `{key}` in {report}"))
        .split('\t')
        .nth(1)
        .unwrap()
        .to_string()
}

#[test]
fn extract_nimh() {
    let dir = tempfile::tempdir().unwrap();
    let (c, p) = (dir.path().join("c.tsv"), dir.path().join("p.tsv"));
    ok(&[
        "extract",
        s(&fixture("nimh.parse.tsv")),
        "--candidates",
        s(&c),
        "--pairs",
        s(&p),
    ]);
    let cands = std::fs::read_to_string(&c).unwrap();
    let surfaces: Vec<&str> = cands.lines().skip(1).map(|l| l.rsplit('\t').next().unwrap()).collect();
    assert_eq!(
        surfaces,
        [
            "HIV",
            "brain",
            "Kathy Kopnisky",
            "National Institute",
            "Mental Health",
            "neuroAIDS"
        ]
    );
    let pairs = std::fs::read_to_string(&p).unwrap();
    let rows: Vec<&str> = pairs.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].ends_with("\tNational Institute of Mental Health"));
}

#[test]
fn extract_empty_input_gives_header_only_files() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.tsv");
    std::fs::write(&empty, "").unwrap();
    let (c, p) = (dir.path().join("c.tsv"), dir.path().join("p.tsv"));
    ok(&["extract", s(&empty), "--candidates", s(&c), "--pairs", s(&p)]);
    assert_eq!(std::fs::read_to_string(&c).unwrap().lines().count(), 1);
    assert_eq!(std::fs::read_to_string(&p).unwrap().lines().count(), 1);
}

#[test]
fn extract_reports_malformed_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    std::fs::write(&bad, "s1\t1\tdog\tNN\troot\t0\ns1\tx\tcat\tNN\tnn\t1\n").unwrap();
    let c = dir.path().join("c.tsv");
    let err = fails(&["extract", s(&bad), "--candidates", s(&c), "--pairs", s(&c)]);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn decide_injected_measures() {
    let out = ok(&["decide", s(&fixture("injected.pairs.tsv"))]);
    let got: Vec<(String, String)> = out
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0].to_string(), f[8].to_string())
        })
        .collect();
    let expected: Vec<(String, String)> = std::fs::read_to_string(fixture("injected.expected.tsv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let (a, b) = l.split_once('\t').unwrap();
            (a.to_string(), b.to_string())
        })
        .collect();
    assert_eq!(got, expected);
}

#[test]
fn decide_threshold_override_changes_outcome() {
    let out = ok(&["decide", s(&fixture("injected.pairs.tsv")), "--threshold", "mi_plus=2"]);
    assert!(out
        .lines()
        .filter(|l| !l.starts_with('#'))
        .all(|l| l.contains("\tNOTMERGED\t")));
    let err = fails(&[
        "decide",
        s(&fixture("injected.pairs.tsv")),
        "--threshold",
        "mi_plus=0.01",
    ]);
    assert!(err.contains("mi_plus"), "{err}");
}

#[test]
fn decide_empty_pairs_file() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("p.tsv");
    std::fs::write(&empty, "").unwrap();
    let out = ok(&["decide", s(&empty)]);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("#pair_id\t"));
}

#[test]
fn decide_missing_count_names_phrase() {
    let dir = tempfile::tempdir().unwrap();
    let (c, p) = (dir.path().join("c.tsv"), dir.path().join("p.tsv"));
    ok(&[
        "extract",
        s(&fixture("nimh.parse.tsv")),
        "--candidates",
        s(&c),
        "--pairs",
        s(&p),
    ]);
    let counts = dir.path().join("counts.json");
    std::fs::write(&counts, r#"{"National Institute": 2600000, "Mental Health": 90000000}"#).unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"provider": {"fixture": "counts.json"}}"#).unwrap();
    let err = fails(&["--config", s(&cfg), "decide", s(&p)]);
    assert!(err.contains("National Institute of Mental Health"), "{err}");
}

#[test]
fn decide_without_provider_needs_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (c, p) = (dir.path().join("c.tsv"), dir.path().join("p.tsv"));
    ok(&[
        "extract",
        s(&fixture("nimh.parse.tsv")),
        "--candidates",
        s(&c),
        "--pairs",
        s(&p),
    ]);
    fails(&["decide", s(&p)]);
}

#[test]
fn eval_contingency_fixture() {
    let out = ok(&[
        "eval",
        s(&fixture("contingency.decisions.tsv")),
        s(&fixture("contingency.gold.tsv")),
    ]);
    assert_eq!(lines_with(&out, "tp"), "449");
    assert_eq!(lines_with(&out, "fp"), "6");
    assert_eq!(lines_with(&out, "fn"), "40");
    assert_eq!(lines_with(&out, "tn"), "510");
    assert_eq!(lines_with(&out, "precision"), "98.68%");
    assert_eq!(lines_with(&out, "recall"), "91.82%");
    assert_eq!(lines_with(&out, "accuracy"), "95.42%");
    assert_eq!(lines_with(&out, "f1"), "95.13%");
    assert_eq!(lines_with(&out, "paper_f"), "90.61%");
}

#[test]
fn eval_identical_labels_is_perfect() {
    let decisions = fixture("injected.expected.tsv");
    let out = ok(&["decide", s(&fixture("injected.pairs.tsv"))]);
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.tsv");
    std::fs::write(&d, out).unwrap();
    let report = ok(&["eval", s(&d), s(&decisions)]);
    for key in ["precision", "recall", "f1", "accuracy"] {
        assert_eq!(lines_with(&report, key), "100.00%");
    }
}

#[test]
fn eval_disjoint_ids_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let gold = dir.path().join("g.tsv");
    std::fs::write(&gold, "#pair_id\tdecision\n9999\tMERGED\n").unwrap();
    let out = ok(&["decide", s(&fixture("injected.pairs.tsv"))]);
    let d = dir.path().join("d.tsv");
    std::fs::write(&d, out).unwrap();
    fails(&["eval", s(&d), s(&gold)]);
}

fn sweep_rows(report: &str) -> Vec<Vec<String>> {
    report
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').map(String::from).collect())
        .collect()
}

fn column(report: &str, name: &str) -> usize {
    let header = report.lines().next().unwrap().trim_start_matches('#');
    header.split('\t').position(|h| h == name).unwrap()
}

#[test]
fn sweep_single_point_matches_decide_then_eval() {
    let pairs = fixture("sweep.pairs.tsv");
    let gold = fixture("sweep.gold.tsv");
    let report = ok(&["sweep", s(&pairs), s(&gold), "--grid", "id_t=6"]);
    let rows = sweep_rows(&report);
    assert_eq!(rows.len(), 1);

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.tsv");
    ok(&["decide", s(&pairs), "-o", s(&d)]);
    let eval = ok(&["eval", s(&d), s(&gold)]);
    for key in ["tp", "fp", "fn", "tn"] {
        assert_eq!(rows[0][column(&report, key)], lines_with(&eval, key), "{key}");
    }
}

#[test]
fn sweep_recall_nonincreasing_in_id_t() {
    let report = ok(&[
        "sweep",
        s(&fixture("sweep.pairs.tsv")),
        s(&fixture("sweep.gold.tsv")),
        "--grid",
        "id_t=3,6,9",
        "--sort",
        "grid",
    ]);
    let (it, ir) = (column(&report, "id_t"), column(&report, "recall"));
    let rows = sweep_rows(&report);
    assert_eq!(rows.len(), 3);
    let id_t: Vec<f64> = rows.iter().map(|r| r[it].parse().unwrap()).collect();
    assert_eq!(id_t, vec![3.0, 6.0, 9.0]);
    let recall: Vec<f64> = rows.iter().map(|r| r[ir].parse().unwrap()).collect();
    assert!(recall.windows(2).all(|w| w[0] >= w[1]), "{recall:?}");
}

#[test]
fn sweep_rejects_malformed_grid() {
    let err = fails(&[
        "sweep",
        s(&fixture("sweep.pairs.tsv")),
        s(&fixture("sweep.gold.tsv")),
        "--grid",
        "id_t=abc",
    ]);
    assert!(err.starts_with("error:"), "{err}");
    fails(&[
        "sweep",
        s(&fixture("sweep.pairs.tsv")),
        s(&fixture("sweep.gold.tsv")),
        "--grid",
        "bogus=1",
    ]);
}

#[test]
fn counts_warm_fills_cache_then_decide_uses_it() {
    let dir = tempfile::tempdir().unwrap();
    let (c, p) = (dir.path().join("c.tsv"), dir.path().join("p.tsv"));
    ok(&[
        "extract",
        s(&fixture("health.parse.tsv")),
        "--candidates",
        s(&c),
        "--pairs",
        s(&p),
    ]);
    let cache = dir.path().join("cache.tsv");
    let cfg = fixture("health.config.json");
    ok(&["--config", s(&cfg), "--cache", s(&cache), "counts", "warm", s(&p)]);
    let warmed = std::fs::read_to_string(&cache).unwrap();
    assert!(!warmed.is_empty());

    // Emptying the corpus zeroes every uncached count, so identical output
    // means the cache served them all.
    let corpus = dir.path().join("corpus.txt");
    std::fs::copy(fixture("health.corpus.txt"), &corpus).unwrap();
    let local_cfg = dir.path().join("cfg.json");
    std::fs::write(&local_cfg, r#"{"provider": {"corpus": "corpus.txt"}}"#).unwrap();
    let first = ok(&["--config", s(&local_cfg), "--cache", s(&cache), "decide", s(&p)]);
    std::fs::write(&corpus, "").unwrap();
    let second = ok(&["--config", s(&local_cfg), "--cache", s(&cache), "decide", s(&p)]);
    assert_eq!(first, second);
    assert_eq!(std::fs::read_to_string(&cache).unwrap(), warmed);
}

#[test]
fn counts_warm_needs_cache() {
    let err = fails(&[
        "--config",
        s(&fixture("health.config.json")),
        "counts",
        "warm",
        s(&fixture("injected.pairs.tsv")),
    ]);
    assert!(err.contains("cache"), "{err}");
}
