use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use mdtool::falsify::random_graphs;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn mdtool(args: &[&str], stdin: Option<&str>, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mdtool"));
    cmd.args(args)
        .env_remove("MDTOOL_MAX_N")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn decompose_matches_golden_tree() {
    let o = mdtool(&["decompose", &fixture("g.mdg")], None, &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        std::fs::read_to_string(fixture("g_decomposition.tree")).unwrap()
    );
}

#[test]
fn decompose_formats() {
    let dot = mdtool(
        &["decompose", &fixture("g.mdg"), "--format", "dot"],
        None,
        &[],
    );
    let dot = stdout(&dot);
    assert!(dot.starts_with("digraph md {"));
    assert!(dot.contains("prime") && dot.contains("green"));
    let json = mdtool(
        &["decompose", &fixture("g.mdg"), "--format", "json"],
        None,
        &[],
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(v["kind"], "series");
    assert_eq!(v["children"][0]["kind"], "parallel");
}

#[test]
fn validate_rejects_faulty_tree() {
    let o = mdtool(
        &["validate", &fixture("g.mdg"), &fixture("g_faulty.tree")],
        None,
        &[],
    );
    assert_eq!(o.status.code(), Some(1));
    let first = stdout(&o).lines().next().unwrap().to_string();
    assert!(
        first.starts_with("WRONG_KIND {a,b,c,d,e,f,g,h,i} [b,c]"),
        "{first}"
    );
}

#[test]
fn decompose_pipes_into_validate() {
    let dir = tempfile::tempdir().unwrap();
    for (i, g) in random_graphs(5, 25, 1, 8, 0.5).into_iter().enumerate() {
        let path = dir.path().join(format!("g{i}.mdg"));
        std::fs::write(&path, g.to_mdg()).unwrap();
        let path = path.display().to_string();
        let tree = mdtool(&["decompose", &path], None, &[]);
        assert_eq!(tree.status.code(), Some(0));
        let check = mdtool(&["validate", &path, "-"], Some(&stdout(&tree)), &[]);
        assert_eq!(check.status.code(), Some(0), "{}", g.to_mdg());
        assert_eq!(stdout(&check), "OK\n");
    }
}

#[test]
fn graph_from_stdin() {
    let text = std::fs::read_to_string(fixture("g.mdg")).unwrap();
    let o = mdtool(&["decompose", "-"], Some(&text), &[]);
    assert_eq!(
        stdout(&o),
        std::fs::read_to_string(fixture("g_decomposition.tree")).unwrap()
    );
    let twice = mdtool(&["validate", "-", "-"], Some(&text), &[]);
    assert_eq!(twice.status.code(), Some(2));
}

#[test]
fn complement_and_dual_check() {
    let o = mdtool(&["complement", &fixture("g.mdg")], None, &[]);
    assert_eq!(o.status.code(), Some(0));
    let co = mdtool::Graph::parse(&stdout(&o)).unwrap();
    assert_eq!(co, mdtool::fixtures::sample_graph().complement());
    let d = mdtool(&["dual-check", &fixture("g.mdg")], None, &[]);
    assert_eq!(d.status.code(), Some(0));
    let out = stdout(&d);
    assert!(out
        .contains("complement: (parallel (series (parallel a d i) f) (prime b c e (series g h)))"));
    assert!(out.ends_with("OK\n"));
}

#[test]
fn lemma4_golden_trace() {
    let o = mdtool(
        &[
            "lemma4",
            &fixture("g.mdg"),
            "--pivot",
            "i",
            "--order",
            "f",
            "--trace",
        ],
        None,
        &[],
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        stdout(&o),
        std::fs::read_to_string(fixture("g_lemma4_trace.golden")).unwrap()
    );
    assert!(o.stderr.is_empty());
}

#[test]
fn lemma4_without_violation_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p4.mdg");
    std::fs::write(&path, "vertices: a b c d\na b\nb c\nc d\n").unwrap();
    let o = mdtool(
        &["lemma4", path.to_str().unwrap(), "--pivot", "b", "--exact"],
        None,
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("pivot: b\norder: "));
}

#[test]
fn refine_prints_forests() {
    let o = mdtool(
        &["refine", &fixture("g.mdg"), "--pivot", "i", "--order", "f"],
        None,
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("initial: (series a (prime b c e (parallel g h)) d) [i] f\n"));
    assert!(out.lines().last().unwrap().starts_with("forest: "));
}

#[test]
fn falsify_bundled_fixture() {
    let o = mdtool(&["falsify", "--replay", "paper-fixture"], None, &[]);
    assert_eq!(o.status.code(), Some(1));
    let line = stdout(&o);
    let f = mdtool::falsify::Finding::from_json_line(line.trim()).unwrap();
    assert_eq!(f.pivot, "i");
    assert_eq!(f.violations, vec![vec!["b", "c", "e", "g", "h"]]);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("findings.jsonl");
    std::fs::write(&path, &line).unwrap();
    let replay = mdtool(&["falsify", "--replay", path.to_str().unwrap()], None, &[]);
    assert_eq!(replay.status.code(), Some(1));
    assert_eq!(stdout(&replay), line);

    let min = mdtool(
        &["falsify", "--replay", "paper-fixture", "--minimize"],
        None,
        &[],
    );
    let m = mdtool::falsify::Finding::from_json_line(stdout(&min).trim()).unwrap();
    assert!(m.parse_graph().unwrap().n() <= 9);
}

#[test]
fn falsify_search_modes() {
    let clean = mdtool(
        &[
            "falsify",
            "--mode",
            "exhaustive",
            "--n-max",
            "3",
            "--orders",
            "all",
        ],
        None,
        &[],
    );
    assert_eq!(clean.status.code(), Some(0));
    assert!(clean.stdout.is_empty());
    let planted = mdtool(
        &["falsify", "--count", "0", "--plant", &fixture("g.mdg")],
        None,
        &[],
    );
    assert_eq!(planted.status.code(), Some(1));
    assert!(stdout(&planted)
        .lines()
        .any(|l| l.contains("\"pivot\":\"i\"")));
    let a = mdtool(
        &[
            "falsify", "--n-min", "6", "--n-max", "9", "--count", "40", "--seed", "1",
        ],
        None,
        &[],
    );
    let b = mdtool(
        &[
            "falsify", "--n-min", "6", "--n-max", "9", "--count", "40", "--seed", "1",
        ],
        None,
        &[],
    );
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["decompose"][..],
        &["frobnicate"],
        &["decompose", "/nonexistent/graph.mdg"],
        &["lemma4", "FIXTURE", "--pivot", "zz"],
        &["lemma4", "FIXTURE", "--pivot", "i", "--order", "i"],
        &["validate", "FIXTURE", "BADTREE"],
    ] {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.tree");
        std::fs::write(&bad, "(series a").unwrap();
        let g = fixture("g.mdg");
        let args: Vec<&str> = args
            .iter()
            .map(|a| match *a {
                "FIXTURE" => g.as_str(),
                "BADTREE" => bad.to_str().unwrap(),
                a => a,
            })
            .collect();
        let o = mdtool(&args, None, &[]);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
    let parse = mdtool(&["decompose", "-"], Some("vertices: a b\na c\n"), &[]);
    assert_eq!(parse.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&parse.stderr).contains("line 2"));
}

#[test]
fn size_limit_exits_three() {
    let o = mdtool(
        &["decompose", &fixture("g.mdg")],
        None,
        &[("MDTOOL_MAX_N", "8")],
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
    let ok = mdtool(
        &["decompose", &fixture("g.mdg")],
        None,
        &[("MDTOOL_MAX_N", "9")],
    );
    assert_eq!(ok.status.code(), Some(0));
    let big = mdtool(
        &["falsify", "--mode", "exhaustive", "--n-max", "7"],
        None,
        &[],
    );
    assert_eq!(big.status.code(), Some(3));
}

#[test]
fn help_goes_to_stdout_once() {
    let o = mdtool(&["--help"], None, &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stderr.is_empty());
    assert_eq!(stdout(&o).matches("Usage:").count(), 1);
}
