use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn tasks() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../tasks")
}

fn task(name: &str) -> String {
    tasks().join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epiplan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let out = run(&all);
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn coordinated_attack_is_unsolvable_under_c() {
    let t = task("coordinated_attack.json");
    assert_eq!(code(&["plan", &t]), 1);
    let r = json(&["plan", &t]);
    assert_eq!(r["exit_code"], 1);
    assert_eq!(r["result"]["verdict"], "unsolvable");
    assert_eq!(r["result"]["stats"]["states_expanded"], 1);
    assert_eq!(r["result"]["stats"]["pruned_by_axiom"], 1);
}

#[test]
fn s5_search_hits_its_cap() {
    let t = task("coordinated_attack_s5.json");
    let r = json(&["plan", &t]);
    assert_eq!(r["exit_code"], 2);
    assert_eq!(r["result"]["verdict"], "unknown");
    assert_eq!(r["result"]["stats"]["max_depth"], 6);
    // a tighter cap from the command line wins over the file
    let r = json(&["plan", &t, "--max-depth", "2"]);
    assert_eq!(r["result"]["stats"]["max_depth"], 2);
}

#[test]
fn solvable_tasks_report_their_plans() {
    let r = json(&["plan", &task("already_known.json")]);
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["result"]["plan"], serde_json::json!([]));
    let r = json(&["plan", &task("message_s5.json")]);
    assert_eq!(r["result"]["plan"], serde_json::json!(["send_ab"]));
}

#[test]
fn trace_lists_kept_states() {
    let r = json(&["plan", &task("coordinated_attack_cb2.json"), "--trace"]);
    let trace = r["result"]["trace"].as_array().unwrap();
    let depths: Vec<u64> = trace.iter().map(|n| n["depth"].as_u64().unwrap()).collect();
    assert_eq!(depths, [0, 1, 2]);
}

#[test]
fn validate_checks_each_step() {
    let t = task("coordinated_attack.json");
    let r = json(&["validate", &t, "--plan", "send_ab"]);
    assert_eq!(r["exit_code"], 1);
    assert_eq!(r["result"]["failure"]["failure"], "not_l_state");
    assert_eq!(r["result"]["failure"]["step"], 1);

    let t = task("message_s5.json");
    assert_eq!(code(&["validate", &t, "--plan", "send_ab"]), 0);
    assert_eq!(code(&["validate", &t, "--plan", "send_ab,send_ba"]), 0);
    assert_eq!(code(&["validate", &t, "--plan", "send_ba"]), 1);
    assert_eq!(code(&["validate", &t, "--plan", "nope"]), 3);

    let out = run(&["validate", &t, "--plan", "send_ba,send_ab", "--explain"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("step 1: send_ba"), "{text}");
    assert!(text.contains("not applicable"), "{text}");
}

#[test]
fn eval_exit_code_is_the_truth_value() {
    let t = task("coordinated_attack.json");
    assert_eq!(code(&["eval", &t, "--formula", "true"]), 0);
    assert_eq!(code(&["eval", &t, "--formula", "K[a] d"]), 0);
    assert_eq!(code(&["eval", &t, "--formula", "K[b] d"]), 1);
    assert_eq!(code(&["eval", &t, "--formula", "d", "--world", "w2"]), 1);
    assert_eq!(code(&["eval", &t, "--formula", "K[c] d"]), 3);
    assert_eq!(code(&["eval", &t, "--formula", "d", "--world", "w9"]), 3);
}

#[test]
fn contract_and_frame_checks() {
    let t = task("coordinated_attack.json");
    let r = json(&["contract", &t]);
    assert_eq!(r["result"]["worlds_after"], 2);
    assert_eq!(code(&["check-frame", &t]), 0);
    assert_eq!(
        code(&["check-frame", &t, "--logic", "Cb-S5", "--b", "2"]),
        0
    );
    assert_eq!(code(&["check-frame", &t, "--logic", "Cb-S5"]), 3);
    assert_eq!(
        code(&["check-frame", &t, "--logic", "wCl-S5", "--l", "3"]),
        3
    );

    let machine = task("machine_countdown.json");
    let r = json(&["check-frame", &machine]);
    assert_eq!(r["exit_code"], 0, "{r}");
    // the machine actions are built for Cb(2), not for C
    assert_eq!(code(&["check-frame", &machine, "--logic", "C-S5"]), 1);
}

#[test]
fn probe_reports_counterexamples_only_outside_c() {
    let r = json(&["probe", "--logic", "C-S5", "--trials", "15", "--seed", "3"]);
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["seed"], 3);
    assert_eq!(r["result"]["states"], 15);
    assert_eq!(code(&["probe", "--logic", "S5", "--trials", "15"]), 1);
    assert_eq!(
        code(&["probe", "--logic", "wCl-S5", "--l", "3", "--agents", "2"]),
        3
    );
}

#[test]
fn demo_table_and_single_runs() {
    let out = run(&["demo", "coordinated-attack"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for row in ["C-S5", "Cb-S5(b=2)", "Cb-S5(b=4)", "S5"] {
        assert!(text.contains(row), "{text}");
    }
    assert!(text.contains("s2 (4 worlds"), "{text}");
    assert_eq!(code(&["demo", "coordinated-attack", "--logic", "C-S5"]), 1);
    assert_eq!(
        code(&[
            "demo",
            "coordinated-attack",
            "--logic",
            "S5",
            "--max-depth",
            "3"
        ]),
        2
    );
    let r = json(&["demo", "coordinated-attack"]);
    assert_eq!(r["result"]["runs"].as_array().unwrap().len(), 5);
    assert_eq!(
        r["result"]["states"]["s1"]["worlds"]
            .as_array()
            .unwrap()
            .len(),
        3
    );
}

#[test]
fn encoded_machines_plan_like_they_run() {
    let dir = std::env::temp_dir().join(format!("epiplan-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for (machine, expected) in [
        ("inc_halt.json", 0),
        ("countdown.json", 0),
        ("jump_loop.json", 1),
    ] {
        let out = dir.join(machine);
        let out = out.to_str().unwrap();
        assert_eq!(
            code(&[
                "encode-machine",
                &task(&format!("machines/{machine}")),
                "--out",
                out
            ]),
            0
        );
        assert_eq!(code(&["plan", out]), expected, "{machine}");
    }
    // standard output carries the task file itself
    let out = run(&["encode-machine", &task("machines/inc_halt.json")]);
    let file: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(file["logic"]["logic"], "Cb-S5");
    std::fs::remove_dir_all(&dir).unwrap();

    let fixture: Value =
        serde_json::from_str(&std::fs::read_to_string(task("machine_countdown.json")).unwrap())
            .unwrap();
    let fresh = run(&["encode-machine", &task("machines/countdown.json")]);
    assert_eq!(
        serde_json::from_slice::<Value>(&fresh.stdout).unwrap(),
        fixture
    );
}

#[test]
fn malformed_input_exits_3_with_one_line() {
    for args in [
        vec!["plan", "/nonexistent/task.json"],
        vec!["plan"],
        vec!["frobnicate"],
        vec!["probe", "--trials", "many"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(3), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
    let t = task("invalid_unknown_atom.json");
    let out = run(&["plan", &t]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("attack"));
    // S5 without a cap cannot promise to stop
    let mut file: Value =
        serde_json::from_str(&std::fs::read_to_string(task("coordinated_attack_s5.json")).unwrap())
            .unwrap();
    file.as_object_mut().unwrap().remove("options");
    let path = std::env::temp_dir().join(format!("epiplan-uncapped-{}.json", std::process::id()));
    std::fs::write(&path, file.to_string()).unwrap();
    assert_eq!(code(&["plan", path.to_str().unwrap()]), 3);
    assert_eq!(
        code(&["plan", path.to_str().unwrap(), "--max-states", "50"]),
        2
    );
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn help_and_version_exit_0() {
    let out = run(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("report schema 1"));
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["plan", "--help"]), 0);
}

#[test]
fn json_reports_are_byte_identical_across_runs() {
    let t = task("coordinated_attack_s5.json");
    for args in [
        vec!["plan", t.as_str(), "--trace", "--json"],
        vec![
            "probe", "--logic", "Cb-S5", "--b", "2", "--trials", "10", "--json",
        ],
        vec!["demo", "coordinated-attack", "--json"],
    ] {
        let a = run(&args).stdout;
        let b = run(&args).stdout;
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
    let r = json(&["plan", &t]);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["command"][0], "plan");
    assert_eq!(r["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(r.get("seed").is_none());
    assert!(r.to_string().find("time").is_none());
}
