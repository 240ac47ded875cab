use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn eun(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eun"))
        .args(args)
        .env_remove("EUN_STATE_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn normalized_eu_of_healthy() {
    let o = eun(&["query", path(&data("hw1.eun")), "--eu", "-e", "H=1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "1.500000000000\n");
}

#[test]
fn queries_on_the_chain() {
    let chain = data("chain.eun");
    let p = eun(&["query", path(&chain), "--prob", "-e", "X1=1,X2=1,X3=1"]);
    assert_eq!(stdout(&p), "0.625000000000\n");
    let cond = eun(&["query", path(&chain), "--prob", "-e", "X1=1", "-g", "X3=1"]);
    assert_eq!(stdout(&cond), format!("{:.12}\n", 32.0 / 38.0));
    // constant utility: every event has value equal to its probability
    let v = eun(&["query", path(&chain), "--value", "-e", "X3=1"]);
    assert_eq!(stdout(&v), format!("{:.12}\n", 38.0 / 48.0));
}

#[test]
fn conditional_eu_and_value() {
    let hw1 = data("hw1.eun");
    let u = eun(&["query", path(&hw1), "--eu", "-e", "W=1", "-g", "H=1"]);
    assert_eq!(stdout(&u), format!("{:.12}\n", 4.0 / 3.0));
    let v = eun(&["query", path(&hw1), "--value", "-e", "H=1"]);
    assert_eq!(stdout(&v), "0.750000000000\n");
}

#[test]
fn output_is_byte_stable() {
    let hw2 = data("hw2.eun");
    let args = ["query", path(&hw2), "--eu", "-e", "H=1,W=1"];
    let first = eun(&args);
    for _ in 0..3 {
        assert_eq!(eun(&args).stdout, first.stdout);
    }
}

#[test]
fn eu_independence_in_the_auction() {
    let o = eun(&[
        "independence",
        path(&data("auction.eun")),
        "--layer",
        "eu",
        "-a",
        "V",
        "-b",
        "C",
        "-c",
        "A,B,S",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "independent (guaranteed by Theorem 2)\n");
}

#[test]
fn independence_not_guaranteed() {
    let o = eun(&[
        "independence",
        path(&data("hw2.eun")),
        "--layer",
        "eu",
        "-a",
        "H",
        "-b",
        "W",
    ]);
    assert_eq!(stdout(&o), "not guaranteed\n");
    let p = eun(&[
        "independence",
        path(&data("hw2.eun")),
        "--layer",
        "prob",
        "-a",
        "H",
        "-b",
        "W",
    ]);
    assert_eq!(
        stdout(&p),
        "independent (separated in the probability layer)\n"
    );
}

#[test]
fn auction_best_response_includes_truthful_bid() {
    let o = eun(&["auction", "--grid", "2", "--value", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.starts_with("argmax {0, 0.5} (truthful bid 0.5 included)\n"),
        "{out}"
    );
}

#[test]
fn decide_reports_argmax_and_blocks() {
    let o = eun(&["decide", path(&data("hw2.eun")), "-d", "H"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "  H=0  0.600000000000\n* H=1  1.400000000000\nutility 1.400000000000\nblocks {H}\n"
    );
}

#[test]
fn import_bn_writes_a_valid_network() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sprinkler.eun");
    let o = eun(&[
        "import-bn",
        path(&data("sprinkler.bn")),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = eun(&["validate", out.to_str().unwrap(), "--strict"]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    // 0.65 = classic sprinkler marginal plus 0.01 leak on dry ground
    let q = eun(&[
        "query",
        out.to_str().unwrap(),
        "--prob",
        "-e",
        "WetGrass=yes",
    ]);
    assert_eq!(stdout(&q), "0.650000000000\n");
}

#[test]
fn validate_flags_non_markov_network() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("bad.eun");
    std::fs::write(
        &net,
        r#"{
  "format": "eun/1",
  "variables": [
    {"name": "X1", "domain": ["0", "1"]},
    {"name": "X2", "domain": ["0", "1"]},
    {"name": "X3", "domain": ["0", "1"]}
  ],
  "ordering": ["X1", "X3", "X2"],
  "prob_arcs": [["X1", "X2"], ["X2", "X3"]],
  "q": {
    "X2": [
      {"value": "1", "given": {"X1": "0", "X3": "0"}, "ratio": 1.0},
      {"value": "1", "given": {"X1": "1", "X3": "0"}, "ratio": 1.0},
      {"value": "1", "given": {"X1": "0", "X3": "1"}, "ratio": 1.0},
      {"value": "1", "given": {"X1": "1", "X3": "1"}, "ratio": 4.0}
    ]
  }
}"#,
    )
    .unwrap();
    let lenient = eun(&["validate", net.to_str().unwrap()]);
    assert_eq!(lenient.status.code(), Some(0));
    assert!(stdout(&lenient).contains("X1 (probability)"));
    let strict = eun(&["validate", net.to_str().unwrap(), "--strict"]);
    assert_eq!(strict.status.code(), Some(2));
    let clean = eun(&["validate", path(&data("chain.eun")), "--strict"]);
    assert_eq!(clean.status.code(), Some(0));
}

#[test]
fn exit_codes() {
    let hw1 = data("hw1.eun");
    // usage: missing measure flag, unknown variable, off-grid value, unreadable file
    assert_eq!(
        eun(&["query", path(&hw1), "-e", "H=1"]).status.code(),
        Some(1)
    );
    let unknown = eun(&["query", path(&hw1), "--eu", "-e", "Q=1"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(stderr(&unknown).contains("unknown variable `Q`"));
    assert!(stdout(&unknown).is_empty());
    assert_eq!(
        eun(&["auction", "--grid", "2", "--value", "0.3"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        eun(&["validate", "/nonexistent/net.eun"]).status.code(),
        Some(1)
    );
    // validation: schema error names the key
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.eun");
    std::fs::write(
        &bad,
        r#"{"format": "eun/1", "variables": [{"name": "A", "domain": ["0", "1"]}], "bogus": 1}"#,
    )
    .unwrap();
    let schema = eun(&["validate", bad.to_str().unwrap()]);
    assert_eq!(schema.status.code(), Some(2));
    assert!(stderr(&schema).contains("`bogus`"));
    // numeric: undefined conditional, and the enumeration cap
    let disjoint = eun(&["query", path(&hw1), "--eu", "-e", "H=1", "-g", "H=0"]);
    assert_eq!(disjoint.status.code(), Some(3));
    let capped = Command::new(env!("CARGO_BIN_EXE_eun"))
        .args(["validate", path(&hw1)])
        .env("EUN_STATE_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(3));
    assert!(stderr(&capped).contains("cap"));
    let malformed_cap = Command::new(env!("CARGO_BIN_EXE_eun"))
        .args(["validate", path(&hw1)])
        .env("EUN_STATE_CAP", "lots")
        .output()
        .unwrap();
    assert_eq!(malformed_cap.status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    let o = eun(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("import-bn"));
}
