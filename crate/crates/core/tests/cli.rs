use std::path::Path;
use std::process::{Command, Output};

use gridsynth::tasks::all_tasks;
use gridsynth::token_codec::{decode_instruction, decode_state, Vocabulary};
use gridsynth::{run_program, Program};

fn gridsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridsynth")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn solve_prints_a_working_program() {
    let out = gridsynth(&["solve", "--task", "OOD4", "--guidance", "oracle", "--budget", "10"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let program: Program = String::from_utf8(out.stdout).unwrap().parse().unwrap();
    let g = gridsynth::Grid::from_rows(&[[1u8, 2, 3], [4, 5, 6]]).unwrap();
    let turned = run_program(&program, &[g]).unwrap();
    assert_eq!(turned[0].to_rows(), vec![vec![6, 5, 4], vec![3, 2, 1]]);
}

#[test]
fn solve_exit_codes() {
    assert_eq!(code(&gridsynth(&["solve", "--task", "OOD4", "--budget", "0.000001"])), 2);
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let down = gridsynth(&["solve", "--task", "OOD4", "--guidance", &format!("remote:127.0.0.1:{port}")]);
    assert_eq!(code(&down), 1);
    assert!(String::from_utf8_lossy(&down.stderr).contains("unavailable"));
    assert_eq!(code(&gridsynth(&["solve", "--task", "OOD9"])), 1);
    assert_eq!(code(&gridsynth(&["solve", "--guidance", "psychic", "--task", "OOD1"])), 1);
    assert_eq!(code(&gridsynth(&["--help"])), 0);
}

#[test]
fn solve_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let out = gridsynth(&[
        "solve", "--task", "Train11", "--guidance", "noisy:0.3", "--budget-nodes", "5000", "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    let events: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(events.last().unwrap()["event"], "solution");
    assert!(events.iter().any(|e| e["event"] == "dequeue"));
}

fn gen_data(dir: &Path, name: &str, n: &str, seed: &str) -> Vec<u8> {
    let path = dir.join(name);
    let out = gridsynth(&["gen-data", "--n-samples", n, "--seed", seed, "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), Vocabulary::standard().manifest_hash());
    std::fs::read(path).unwrap()
}

#[test]
fn gen_data_is_reproducible_and_decodable() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_data(dir.path(), "a.jsonl", "25", "3");
    let b = gen_data(dir.path(), "b.jsonl", "25", "3");
    assert_eq!(a, b);

    let manifest = dir.path().join("vocab.txt");
    assert_eq!(code(&gridsynth(&["vocab", "--out", manifest.to_str().unwrap()])), 0);
    let vocab = Vocabulary::from_manifest(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    for line in String::from_utf8(a).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let target: Vec<u32> = serde_json::from_value(v["target_tokens"].clone()).unwrap();
        let state: Vec<u32> = serde_json::from_value(v["state_tokens"].clone()).unwrap();
        decode_instruction(&target, &vocab).unwrap();
        decode_state(&state).unwrap();
    }

    let one = String::from_utf8(gen_data(dir.path(), "c.jsonl", "1", "5")).unwrap();
    let lengths: Vec<usize> = all_tasks().iter().map(|t| t.ground_truth.len()).collect();
    assert!(lengths.contains(&one.lines().count()));
}

#[test]
fn bench_with_no_samples_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = gridsynth(&["bench", "--suite", "ood", "--n-samples", "0", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r["totals"]["search"]["attempts"], 0);
    assert_eq!(r["totals"]["greedy"]["attempts"], 0);
}

#[test]
fn bench_over_an_arc_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("flip.json"),
        r#"{"train":[{"input":[[1,2,0]],"output":[[0,2,1]]},{"input":[[3,0],[0,4]],"output":[[0,3],[4,0]]}],
            "test":[{"input":[[5,6]],"output":[[6,5]]}]}"#,
    )
    .unwrap();
    let report = dir.path().join("r.json");
    let out = gridsynth(&[
        "bench", "--suite", dir.path().to_str().unwrap(), "--solver", "search", "--budget-nodes", "200", "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r["rows"][0]["task"], "flip");
    assert_eq!(r["rows"][0]["cells"]["search"]["successes"], 1);
}

#[test]
fn vocab_prints_the_manifest() {
    let out = gridsynth(&["vocab"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), Vocabulary::standard().to_manifest());
}
