use std::path::Path;
use std::process::{Command, Output};

fn laura(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laura"))
        .args(args)
        .env_remove("LAURA_API_KEY")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_solve_verify() {
    let dir = tempfile::tempdir().unwrap();
    let scen = dir.path().join("scenario.json");
    let out = laura(&["generate", "--n", "6", "--radius", "1000", "--seed", "3", "--out", s(&scen)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let report = dir.path().join("report.json");
    let svg = dir.path().join("route.svg");
    let out = laura(&[
        "solve", "--scenario", s(&scen), "--algo", "exact", "--out", s(&report), "--plot", s(&svg),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let route = json["best_route"].to_string();
    let omega = json["best_omega"].as_f64().unwrap();
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let out = laura(&["verify", "--scenario", s(&scen), "--route", &route]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains(&format!("{omega:.6}")));

    let out = laura(&["verify", "--scenario", s(&scen), "--route", &route, "--omega", &(omega * 2.0).to_string()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("ObjectiveMismatch"));

    let out = laura(&["verify", "--scenario", s(&scen), "--route", "[0, 1, 1, 2, 3, 4, 5, 0]"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("DuplicateNode"));
}

#[test]
fn laura_with_mock_config() {
    let dir = tempfile::tempdir().unwrap();
    let scen = dir.path().join("s.json");
    assert!(laura(&["generate", "--n", "5", "--seed", "1", "--out", s(&scen)]).status.success());
    let config = dir.path().join("algo.toml");
    std::fs::write(&config, "[laura]\niterations = 20\n\n[generator]\nkind = \"mock-ox\"\n").unwrap();
    let report = dir.path().join("r.json");
    let out = laura(&["solve", "--scenario", s(&scen), "--algo", "laura", "--config", s(&config), "--seed", "4", "--out", s(&report)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["engine"]["best_trace"].as_array().unwrap().len(), 21);
    assert_eq!(json["epsilon"].as_f64(), Some(0.0));
}

#[test]
fn llm_without_credential_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let scen = dir.path().join("s.json");
    assert!(laura(&["generate", "--n", "3", "--out", s(&scen)]).status.success());
    let config = dir.path().join("algo.toml");
    std::fs::write(&config, "[generator]\nkind = \"llm\"\n").unwrap();
    let out = laura(&["solve", "--scenario", s(&scen), "--algo", "ledma", "--config", s(&config), "--out", s(&dir.path().join("r.json"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("LAURA_API_KEY"));
}

#[test]
fn bench_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.toml");
    std::fs::write(
        &suite,
        "node_counts = [5]\ncases_per_count = 2\nruns_per_case = 2\nalgorithms = [\"laura\", \"greedy\", \"exact\"]\n\n[laura]\niterations = 5\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = laura(&["bench", "--suite", s(&suite), "--out", s(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("records.csv")).unwrap();
    assert!(csv.starts_with("algorithm,n,case,run,seed,best_omega,travel_objective,epsilon,wall_time_s,failed\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 2 * 2);
    assert!(out_dir.join("summary.json").exists());
    assert!(out_dir.join("plots/exact_n5_case0.svg").exists());
    assert!(out_dir.join("traces/laura_n5_case0_run0.csv").exists());
    assert!(out_dir.join("scenarios/n5_case1.json").exists());
}

#[test]
fn bad_input_is_reported() {
    let out = laura(&["solve", "--scenario", "/nonexistent.json", "--algo", "greedy", "--out", "/tmp/x.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = laura(&["solve", "--scenario", "x", "--algo", "magic", "--out", "y"]);
    assert!(!out.status.success());
}
