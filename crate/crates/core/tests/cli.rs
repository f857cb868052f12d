use apexmr::cli::{self, BenchArgs, Jitter, PlanArgs, SimulateArgs, TpgArgs};
use apexmr::motion::{parse_robot_csv, SequentialPlan};
use apexmr::taskplan::TaskPlan;
use std::path::{Path, PathBuf};
use std::process::Command;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn plan_into(scenario: &Path, out: &Path) -> cli::PlanOutput {
    cli::cmd_plan(&PlanArgs { scenario: scenario.to_path_buf(), seed: None, out: out.to_path_buf() }, None).unwrap()
}

fn tpg_args(dir: &Path, sync: bool) -> TpgArgs {
    TpgArgs {
        plan_dir: dir.to_path_buf(),
        shortcut_seconds: Some(600.0),
        shortcut_iterations: Some(200),
        sync,
        seed: None,
        out: None,
    }
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

/// Writes a variant of the tiny scene through `edit`.
fn variant(dir: &Path, name: &str, edit: impl Fn(&mut serde_json::Value)) -> PathBuf {
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(fixture("tiny.scn")).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.join(name);
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

#[test]
fn same_seed_gives_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    plan_into(&fixture("tower.scn"), &a);
    plan_into(&fixture("tower.scn"), &b);
    cli::cmd_tpg(&tpg_args(&a, false), 1).unwrap();
    cli::cmd_tpg(&tpg_args(&b, false), 4).unwrap();
    assert_eq!(read_dir_sorted(&a), read_dir_sorted(&b));
}

#[test]
fn artifacts_reload() {
    let tmp = tempfile::tempdir().unwrap();
    let out = plan_into(&fixture("cliff.scn"), tmp.path());
    let plan: TaskPlan = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("task_plan.json")).unwrap()).unwrap();
    let seq: SequentialPlan = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("sequential.json")).unwrap()).unwrap();
    assert_eq!(plan, out.plan);
    assert_eq!(seq, out.seq);
    let sc = apexmr::scenario::Scenario::from_json(&std::fs::read_to_string(tmp.path().join("scenario.json")).unwrap()).unwrap();
    assert_eq!(sc, out.scenario);
    for r in 0..plan.n_robots() {
        let rows = parse_robot_csv(&std::fs::read_to_string(tmp.path().join(format!("robot_{r}.csv"))).unwrap()).unwrap();
        let want = seq.robot_rows(&plan, r);
        assert_eq!(rows.len(), want.len());
        for (got, (t, q, id, kind)) in rows.iter().zip(want) {
            assert_eq!(got.t.to_bits(), t.to_bits());
            assert_eq!(&got.q, q);
            assert_eq!((got.task, got.kind.as_str()), (id, kind));
        }
    }
}

#[test]
fn empty_scenario_gives_empty_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let scn = variant(tmp.path(), "empty.scn", |v| {
        v["objects"] = serde_json::json!([]);
        v["steps"] = serde_json::json!([]);
    });
    let dir = tmp.path().join("out");
    let out = plan_into(&scn, &dir);
    assert!(out.plan.tasks.is_empty());
    assert_eq!(out.seq.makespan, 0.0);
    assert_eq!(std::fs::read_to_string(dir.join("robot_0.csv")).unwrap(), "t,task_id,kind\n");
    let rows = cli::cmd_tpg(&tpg_args(&dir, true), 1).unwrap();
    assert!(rows.iter().all(|r| r.makespan == 0.0 && r.wait_time == 0.0));
}

#[test]
fn single_robot_graph_matches_sequential() {
    let tmp = tempfile::tempdir().unwrap();
    let scn = variant(tmp.path(), "solo.scn", |v| {
        v["robots"].as_array_mut().unwrap().truncate(1);
        v["steps"][0]["needs_support"] = serde_json::json!(false);
        v["steps"][0].as_object_mut().unwrap().remove("support_region");
    });
    let dir = tmp.path().join("out");
    plan_into(&scn, &dir);
    let rows = cli::cmd_tpg(&tpg_args(&dir, false), 1).unwrap();
    let seq = &rows[0];
    let tpg = rows.iter().find(|r| r.plan == "tpg").unwrap();
    assert!((tpg.makespan - seq.makespan).abs() < 1e-9);
    assert_eq!(tpg.wait_time, seq.wait_time);
}

/// Metrics rows of bundled fixtures against stored values. Set
/// `UPDATE_GOLDEN=1` to rewrite them after an intended change.
#[test]
fn golden_metrics_rows() {
    for name in ["tower", "cliff"] {
        let tmp = tempfile::tempdir().unwrap();
        plan_into(&fixture(&format!("{name}.scn")), tmp.path());
        let rows = cli::cmd_tpg(&tpg_args(tmp.path(), true), 2).unwrap();
        let got = cli::metrics_csv(&rows);
        let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}_metrics.csv"));
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::create_dir_all(golden.parent().unwrap()).unwrap();
            std::fs::write(&golden, &got).unwrap();
        }
        assert_eq!(got, std::fs::read_to_string(&golden).unwrap(), "{name}");
        let m = |p: &str| rows.iter().find(|r| r.plan == p).unwrap().makespan;
        assert!(m("tpg_shortcut") <= m("tpg") && m("tpg") <= m("sequential"));
        assert!(m("sync_tpg") <= m("sync"));
    }
}

#[test]
fn simulate_reports_zero_violations() {
    let tmp = tempfile::tempdir().unwrap();
    plan_into(&fixture("tiny.scn"), tmp.path());
    cli::cmd_tpg(&tpg_args(tmp.path(), false), 1).unwrap();
    let args = SimulateArgs {
        tpg_dir: tmp.path().to_path_buf(),
        graph: None,
        trials: 20,
        jitter: Jitter::Full,
        pause_script: Some("random".into()),
        seed: 4,
        sample_dt: 0.02,
        out: None,
    };
    let report = cli::cmd_simulate(&args).unwrap();
    assert_eq!((report.violations, report.deadlocks, report.makespans.len()), (0, 0, 20));
    let text = std::fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert!(text.contains("violations=0\n"));
    assert!(std::fs::read_to_string(tmp.path().join("trace_0.csv")).unwrap().starts_with("time,robot,node,phase\n"));
}

#[test]
fn empty_suite_gives_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let suite = tmp.path().join("suite");
    std::fs::create_dir(&suite).unwrap();
    let args = BenchArgs { suite, seeds: 1, shortcut_seconds: Some(0.0), shortcut_iterations: None, out: tmp.path().join("b") };
    assert!(cli::cmd_bench(&args, None, 1).unwrap().is_empty());
    let csv = std::fs::read_to_string(tmp.path().join("b/bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn exit_codes_name_the_failure() {
    let bin = env!("CARGO_BIN_EXE_apexmr");
    let tmp = tempfile::tempdir().unwrap();
    let missing = Command::new(bin).args(["plan", "/nonexistent.scn", "--out"]).arg(tmp.path()).status().unwrap();
    assert_eq!(missing.code(), Some(3));
    let bad = tmp.path().join("bad.scn");
    std::fs::write(&bad, "{ not json").unwrap();
    let parse = Command::new(bin).arg("plan").arg(&bad).arg("--out").arg(tmp.path()).status().unwrap();
    assert_eq!(parse.code(), Some(4));

    let dir = tmp.path().join("p");
    plan_into(&fixture("tiny.scn"), &dir);
    cli::cmd_tpg(&tpg_args(&dir, false), 1).unwrap();
    let script = tmp.path().join("pauses.json");
    std::fs::write(&script, r#"{"pauses":[{"robot":7,"at":1.0,"duration":1.0}]}"#).unwrap();
    let unknown = Command::new(bin).arg("simulate").arg(&dir).arg("--pause-script").arg(&script).status().unwrap();
    assert_eq!(unknown.code(), Some(8));
    let help = Command::new(bin).args(["simulate", "--help"]).output().unwrap();
    let text = String::from_utf8(help.stdout).unwrap();
    for flag in ["--trials", "--jitter", "--pause-script", "--seed", "--threads", "--dt", "--out"] {
        assert!(text.contains(flag), "{flag}");
    }
}
