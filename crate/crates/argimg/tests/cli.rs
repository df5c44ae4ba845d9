use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn argimg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_argimg"))
        .args(args)
        .env_remove("ARGIMG_INFER_URL")
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn prep_prints_both_queries() {
    let o = argimg(&["prep", "--question", "Do we need sex education in schools?"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "PRO: need sex education schools\nCON: not need sex education schools\n");
    assert!(o.stderr.is_empty());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(argimg(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(argimg(&[]).status.code(), Some(1));
    let o = argimg(&["generate", "--prompt", "x", "--out", "x.png", "--stub", "--infer-url", "http://h"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    assert_eq!(argimg(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_backend_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.png");
    let o = argimg(&["generate", "--prompt", "x", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ARGIMG_INFER_URL"));
    assert!(!out.exists());
}

#[test]
fn runtime_errors_exit_two() {
    let o = argimg(&["kappa", "--annotations", "/nonexistent/annotations.tsv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/annotations.tsv"));
}

#[test]
fn curate_kappa_eval_ttest() {
    let dir = tempfile::tempdir().unwrap();
    let ann = dir.path().join("ann.tsv");
    fs::write(
        &ann,
        "i1\t1\ta\tPRO\ni1\t1\tb\tPRO\ni1\t1\tc\tCON\ni2\t1\ta\tCON\ni2\t1\tb\tCON\ni2\t1\tc\tCON\n",
    )
    .unwrap();
    let o = argimg(&["kappa", "--annotations", s(&ann)]);
    assert_eq!(stdout(&o), "0.250000\n");

    let qrels = dir.path().join("qrels.tsv");
    assert_eq!(argimg(&["curate", "--annotations", s(&ann), "--out", s(&qrels)]).status.code(), Some(0));
    assert_eq!(fs::read_to_string(&qrels).unwrap(), "1\ti1\tPRO\n1\ti2\tCON\n");

    let run = dir.path().join("a.run");
    fs::write(&run, "1 PRO i1 1 2.000000 a\n1 CON i1 1 2.000000 a\n1 CON i2 2 1.000000 a\n").unwrap();
    let json = dir.path().join("report.json");
    let o = argimg(&["eval", "--run", s(&run), "--qrels", s(&qrels), "--baseline", s(&run), "--json", s(&json)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = stdout(&o);
    assert!(table.contains("paired two-sided Student's t-test"), "{table}");
    assert!(table.contains("MAP") && table.contains("p-value"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    // PRO: AP 1; CON: relevant i2 at rank 2 → 1/2
    assert_eq!(report["map"], 0.75);
    assert_eq!(report["precision_at_1"], 0.5);
    assert_eq!(report["comparison"]["p_value"], 1.0);

    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, "2 3 4 5 6").unwrap();
    fs::write(&b, "1\n1\n1\n1\n1\n").unwrap();
    let o = argimg(&["ttest", "--a", s(&a), "--b", s(&b)]);
    assert_eq!(stdout(&o), "t 4.242641\ndf 4\np 0.013236\n");
}

#[test]
fn generate_match_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("ref.png");
    let o = argimg(&["generate", "--prompt", "need sex education schools", "--style", "comic", "--out", s(&img), "--stub"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("need sex education schools, comic seed "));
    let o = argimg(&["match", "--query-image", s(&img), "--ref-image", s(&img)]);
    let text = stdout(&o);
    let kps: usize = text.lines().next().unwrap().rsplit(' ').next().unwrap().parse().unwrap();
    let score: usize = text.lines().last().unwrap().strip_prefix("score ").unwrap().parse().unwrap();
    assert!(kps > 0 && score * 10 >= kps * 9, "{text}");

    let corpus = dir.path().join("corpus");
    for (id, text) in [("b", "fossil fuels"), ("a", "sex education in schools")] {
        fs::create_dir_all(corpus.join(id)).unwrap();
        fs::write(corpus.join(id).join("page-text.txt"), text).unwrap();
    }
    let index = dir.path().join("index.json");
    assert_eq!(argimg(&["index", "build", "--corpus", s(&corpus), "--out", s(&index)]).status.code(), Some(0));
    let o = argimg(&["index", "query", "--index", s(&index), "--query", "Sex education?"]);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 1);
    assert!(lines[0].starts_with("1 a "));
}

#[test]
fn baseline_run_needs_no_backend() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    for (id, text) in [("x1", "sex education in schools"), ("x2", "schools"), ("x3", "gardening")] {
        fs::create_dir_all(corpus.join(id)).unwrap();
        fs::write(corpus.join(id).join("page-text.txt"), text).unwrap();
    }
    let topics = dir.path().join("topics.jsonl");
    fs::write(&topics, "{\"id\":1,\"question\":\"Do we need sex education in schools?\"}\n").unwrap();
    let out = dir.path().join("base.run");
    let o = argimg(&["run", "--pipeline", "baseline", "--corpus", s(&corpus), "--topics", s(&topics), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let run = fs::read_to_string(&out).unwrap();
    let ids: Vec<&str> = run.lines().map(|l| l.split(' ').nth(2).unwrap()).collect();
    assert_eq!(ids, ["x1", "x2", "x1", "x2"]);
    assert!(run.lines().all(|l| l.ends_with(" argimg-baseline-ref")));
    let o = argimg(&["run", "--pipeline", "0", "--corpus", s(&corpus), "--topics", s(&topics), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let o = argimg(&["run", "--pipeline", "7", "--corpus", s(&corpus), "--topics", s(&topics), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
}
