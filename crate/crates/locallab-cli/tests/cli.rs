//! End-to-end checks of the command-line surface: artifact layout, exit
//! codes, and byte-for-byte determinism of reruns.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_locallab"))
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join("locallab-cli-test")
        .join(format!("{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn machine_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../machines/zero_sweep.tm.json")
        .canonicalize()
        .unwrap()
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(args: &[&str]) -> i32 {
    bin().args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn gen_writes_artifacts_and_reruns_are_byte_identical() {
    let dir = workdir("gen");
    let out = dir.join("t");
    let prefix = out.to_str().unwrap();
    run_ok(&["gen", "tree", "--k", "4", "--out", prefix]);
    let read = |suffix: &str| std::fs::read(dir.join(format!("t.{suffix}"))).unwrap();
    let first: Vec<Vec<u8>> = ["instance.json", "labels.json", "manifest.json"]
        .iter()
        .map(|s| read(s))
        .collect();
    assert!(!first[0].is_empty());
    run_ok(&["gen", "tree", "--k", "4", "--out", prefix]);
    for (i, suffix) in ["instance.json", "labels.json", "manifest.json"]
        .iter()
        .enumerate()
    {
        assert_eq!(first[i], read(suffix), "{suffix} differs between reruns");
    }
}

#[test]
fn generated_labels_verify_and_mismatched_labels_exit_one() {
    let dir = workdir("verify");
    let clean = dir.join("clean");
    let broken = dir.join("broken");
    run_ok(&["gen", "tree", "--k", "4", "--out", clean.to_str().unwrap()]);
    run_ok(&[
        "gen",
        "tree:tree_break",
        "--k",
        "4",
        "--seed",
        "3",
        "--out",
        broken.to_str().unwrap(),
    ]);
    let clean_inst = format!("{}.instance.json", clean.display());
    let clean_labels = format!("{}.labels.json", clean.display());
    let broken_inst = format!("{}.instance.json", broken.display());
    let broken_labels = format!("{}.labels.json", broken.display());
    assert_eq!(exit_code(&["verify", &clean_inst, &clean_labels, "tree"]), 0);
    assert_eq!(exit_code(&["verify", &broken_inst, &broken_labels, "tree"]), 0);
    // The corruption shares the clean instance's node ids, so the clean
    // all-quiescent labeling loads but no longer certifies the break.
    assert_eq!(exit_code(&["verify", &broken_inst, &clean_labels, "tree"]), 1);
}

#[test]
fn run_produces_passing_labels_and_respects_the_budget() {
    let dir = workdir("run");
    let tm = machine_path();
    let tm = tm.to_str().unwrap();
    let inst = dir.join("g");
    run_ok(&[
        "gen",
        "gk",
        "--k",
        "7",
        "--tm",
        tm,
        "--input",
        "1",
        "--out",
        inst.to_str().unwrap(),
    ]);
    let inst_file = format!("{}.instance.json", inst.display());
    let out = dir.join("sim");
    run_ok(&[
        "run",
        &inst_file,
        "structural",
        "--tm",
        tm,
        "--out",
        out.to_str().unwrap(),
    ]);
    let labels = format!("{}.labels.json", out.display());
    assert!(std::fs::read_to_string(format!("{}.trace.csv", out.display()))
        .unwrap()
        .starts_with("id,halt_round,output\n"));
    assert_eq!(exit_code(&["verify", &inst_file, &labels, "turing", "--tm", tm]), 0);
    // A zero-round budget cannot cover the scope radius.
    let starved = dir.join("starved");
    assert_eq!(
        exit_code(&[
            "run",
            &inst_file,
            "structural",
            "--tm",
            tm,
            "--budget",
            "0",
            "--out",
            starved.to_str().unwrap(),
        ]),
        3
    );
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(exit_code(&["gen", "comet", "--out", "/tmp/x"]), 2);
    assert_eq!(exit_code(&["verify", "/no/such/file", "/no/such/file", "tree"]), 2);
    assert_eq!(exit_code(&["gen", "tree", "--out", "/tmp/x"]), 2); // missing --k
}
