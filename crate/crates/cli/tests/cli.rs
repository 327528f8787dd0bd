use std::path::Path;
use std::process::{Command, Output};

fn dicount(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dicount")).args(args).current_dir(dir).output().expect("spawn dicount")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn count_triangle_gives_six() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("t.txt"), "n 3\n0 1\n1 2\n0 2\n").unwrap();
    for method in ["propagate", "bruteforce"] {
        let out = dicount(&["count", "--input", "t.txt", "--k", "3", "--method", method], dir.path());
        assert!(out.status.success());
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["count"], "6");
    }
    let out = dicount(&["count", "--input", "t.txt", "--k", "3", "--method", "acyclic"], dir.path());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["count"], "6");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "n 3\n0 7\n").unwrap();
    let out = dicount(&["count", "--input", "bad.txt", "--k", "3"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = dicount(&["sample", "--n", "10", "--p", "1.0", "--output", "k10.txt"], dir.path());
    assert!(out.status.success());
    let out = dicount(&["count", "--input", "k10.txt", "--k", "3", "--node-limit", "5"], dir.path());
    assert_eq!(out.status.code(), Some(3));

    let out = dicount(&["sample", "--n", "10", "--p", "1.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dicount(&["sample", "--n", "12", "--p", "0.4", "--seed", "9"], dir.path());
    let b = dicount(&["sample", "--n", "12", "--p", "0.4", "--seed", "9"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    let c = dicount(&["sample", "--n", "12", "--p", "0.4", "--seed", "10"], dir.path());
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn sweep_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sweep.conf"), "n = 5, 6\np = 0.5\nk = 3\nseeds = 2\n").unwrap();
    let out = dicount(&["sweep", "--config", "sweep.conf", "--output", "rows.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = dicount::sweep::read_csv(dir.path().join("rows.csv")).unwrap();
    assert_eq!(rows.len(), 4);
    let text = std::fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    assert!(text.starts_with("# tool: dicount"));

    std::fs::write(dir.path().join("named.conf"), "n = 5\np = 0.5\nk = 3\noutput = named.csv\n").unwrap();
    let out = dicount(&["sweep", "--config", "named.conf", "--format", "json"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("named.csv")).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn kw_enumerate_lists_containers() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c5.txt"), "n 5\n0 1\n1 2\n2 3\n3 4\n0 4\n").unwrap();
    let out = dicount(&["kw", "--input", "c5.txt", "--beta", "0.2", "--q", "2", "--R", "3", "--enumerate"], dir.path());
    assert!(out.status.success());
    assert!(!stdout(&out).trim().is_empty());
}

#[test]
fn encode_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        dicount(&["sample", "--n", "14", "--p", "0.9", "--orient", "--seed", "5", "--output", "g.txt"], dir.path());
    assert!(out.status.success());
    std::fs::write(dir.path().join("frame.txt"), "r = 2\na = 0,1\nb = 2-7\nx = 10 11\n").unwrap();
    let out = dicount(
        &[
            "encode",
            "--frame",
            "frame.txt",
            "--orientation",
            "g.txt",
            "--k",
            "4",
            "--p",
            "0.9",
            "--alpha",
            "3",
            "--output",
            "enc",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["fingerprint.arcs", "container.arcs", "trace.jsonl"] {
        assert!(dir.path().join("enc").join(f).exists());
    }
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["trivial"], false);
}
