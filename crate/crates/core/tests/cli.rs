use std::path::Path;
use std::process::{Command, Output};

use kmismatch::harness::{Record, Workload};

fn kmismatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kmismatch")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn generate(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_owned();
    let mut args = vec!["gen", "--n", "96", "--m", "64", "--k", "5", "--sigma", "3", "--seed", "11", "--ops", "400", "--out", &path];
    args.extend_from_slice(extra);
    let o = kmismatch(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), "a.jsonl", &[]);
    let b = generate(dir.path(), "b.jsonl", &[]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let w = Workload::load(Path::new(&a)).unwrap();
    assert_eq!(w.records.len(), 400);
    assert_eq!((w.header.pattern.len(), w.header.text.len()), (64, 96));
}

#[test]
fn verify_passes_for_every_structure() {
    let dir = tempfile::tempdir().unwrap();
    let w = generate(dir.path(), "w.jsonl", &["--noise", "0.1"]);
    for structure in ["kangaroo", "fastq", "tradeoff", "oracle"] {
        let o = kmismatch(&["verify", "--workload", &w, "--structure", structure]);
        assert_eq!(o.status.code(), Some(0), "{structure}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = kmismatch(&["verify", "--workload", &w, "--structure", "fastq", "--deamortize"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn run_prints_one_csv_row_and_answers() {
    let dir = tempfile::tempdir().unwrap();
    let w = generate(dir.path(), "w.jsonl", &[]);
    let o = kmismatch(&["run", "--workload", &w, "--structure", "tradeoff", "--x", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("structure,n,m,k,x,op_index_max,"));
    assert!(lines[1].starts_with("tradeoff,96,64,5,2,"));

    let o = kmismatch(&["run", "--workload", &w, "--answers"]);
    let queries = Workload::load(Path::new(&w)).unwrap().queries();
    assert_eq!(stdout(&o).lines().count(), queries + 2);
}

#[test]
fn sweep_writes_a_row_per_x() {
    let dir = tempfile::tempdir().unwrap();
    let w = generate(dir.path(), "w.jsonl", &[]);
    let csv = dir.path().join("sweep.csv");
    let o = kmismatch(&["sweep", "--workload", &w, "--structure", "tradeoff", "--xs", "1,2,5", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(csv).unwrap();
    let xs: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(xs, ["1", "2", "5"]);
}

#[test]
fn wrong_expected_answer_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "w.jsonl", &[]);
    let mut w = Workload::load(Path::new(&path)).unwrap();
    let answers = kmismatch::harness::answers(&w).unwrap();
    let mut seen = 0;
    for r in &mut w.records {
        if let Record::Query { expected, .. } = r {
            let truth = answers[seen];
            *expected = Some(if truth.is_finite() { kmismatch::Answer::Infinity } else { kmismatch::Answer::Distance(0) });
            seen += 1;
        }
    }
    let tampered = dir.path().join("tampered.jsonl");
    w.save(&tampered).unwrap();
    let o = kmismatch(&["run", "--workload", tampered.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverge"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(kmismatch(&["gen", "--n", "10"]).status.code(), Some(1));
    assert_eq!(kmismatch(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(kmismatch(&["gen", "--n", "10", "--m", "20", "--k", "1"]).status.code(), Some(1));
    assert_eq!(kmismatch(&["run", "--workload", "/nonexistent/w.jsonl"]).status.code(), Some(1));
    assert_eq!(kmismatch(&["--help"]).status.code(), Some(0));
}
