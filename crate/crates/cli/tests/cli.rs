use std::path::PathBuf;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_dynconn");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("dynconn-cli-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d.join(name)
}

#[test]
fn bench_writes_header_and_rows() {
    let out = run(&[
        "bench",
        "--structure",
        "st,hdt",
        "--dataset",
        "gnm:50,100",
        "--ur",
        "5",
        "--test-num",
        "4",
        "--queries-per-point",
        "10",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "structure,dataset,u_r,op_class,count,total_ns,mean_ns,p99_ns,memory_bytes,max_height,seed,status"
    );
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("ST,"));
    assert!(lines[4].starts_with("HDT,"));
}

#[test]
fn append_concatenates() {
    let csv = tmp("append.csv");
    let args = |s: &'static str| {
        vec![
            "bench",
            "--structure",
            s,
            "--dataset",
            "star:30",
            "--test-num",
            "0",
            "--out",
            csv.to_str().unwrap(),
        ]
    };
    assert!(run(&args("lct")).status.success());
    let mut second = args("lt");
    second.push("--append");
    assert!(run(&second).status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert_eq!(text.matches("structure,").count(), 1);
}

#[test]
fn workload_file_replays() {
    let w = tmp("w.txt");
    let gen = run(&[
        "gen-workload",
        "--dataset",
        "path:40",
        "--ur",
        "4",
        "--test-num",
        "2",
        "--queries-per-point",
        "3",
        "--seed",
        "5",
        "--out",
        w.to_str().unwrap(),
    ]);
    assert!(gen.status.success());
    let text = std::fs::read_to_string(&w).unwrap();
    assert!(text.starts_with("# dynconn-workload v1 seed=5 ur=4\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("Q ")).count(), 2);
    let out = run(&[
        "bench",
        "--structure",
        "lzt",
        "--dataset",
        "path:40",
        "--workload",
        w.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains("LzT,path:40,4,insert,39,"));
    assert!(csv.contains("LzT,path:40,4,delete,9,"));
    assert!(csv.contains("LzT,path:40,4,query,6,"));
}

#[test]
fn memory_override_from_env() {
    let model = tmp("model.txt");
    std::fs::write(&model, "bytes_per_node_base = 1000\n").unwrap();
    let args = [
        "bench",
        "--structure",
        "dtree",
        "--dataset",
        "path:10",
        "--test-num",
        "0",
    ];
    let plain = String::from_utf8(run(&args).stdout).unwrap();
    let out = Command::new(BIN)
        .args(args)
        .env("DYNCONN_MEMMODEL", &model)
        .output()
        .unwrap();
    let heavy = String::from_utf8(out.stdout).unwrap();
    let mem = |s: &str| {
        s.lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(8)
            .unwrap()
            .parse::<u64>()
            .unwrap()
    };
    assert_eq!(mem(&heavy), mem(&plain) + 10 * (1000 - 16));
}

#[test]
fn verify_reports_every_structure() {
    let out = run(&["verify", "--n", "16", "--ops", "300", "--seed", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains(" ok ")).count(), 10);
}

#[test]
fn bad_input_fails_cleanly() {
    for args in [
        vec!["bench", "--structure", "nope", "--dataset", "star:5"],
        vec!["bench", "--dataset", "ring:5"],
        vec!["bench", "--dataset", "gnm:4,9"],
        vec![
            "gen-workload",
            "--dataset",
            "star:3",
            "--out",
            "/nonexistent/dir/w.txt",
        ],
    ] {
        let out = run(&args);
        assert!(!out.status.success(), "{args:?}");
        assert!(
            String::from_utf8_lossy(&out.stderr).starts_with("error:"),
            "{args:?}"
        );
    }
}
