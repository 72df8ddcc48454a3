use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ipd(args: &[&str]) -> Output {
    ipd_env(args, None)
}

fn ipd_env(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ipd"));
    cmd.args(args).env_remove("IPD_SEED");
    if let Some(s) = seed {
        cmd.env("IPD_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn close(v: &Value, want: f64) -> bool {
    (v.as_f64().unwrap() - want).abs() < 1e-11
}

#[test]
fn extortionate_example() {
    let o = ipd(&["zd", "extort", "--chi", "3", "--phi", "1/26", "--game", "5,3,1,0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    let want = [11.0 / 13.0, 0.5, 7.0 / 26.0, 0.0];
    for (got, w) in v["p"].as_array().unwrap().iter().zip(want) {
        assert!(close(got, w));
    }
    assert!(close(&v["best_case"]["s_x"], 41.0 / 11.0));
    assert!(close(&v["best_case"]["s_y"], 21.0 / 11.0));

    let text = stdout(&ipd(&["zd", "extort", "--chi", "3", "--phi", "0.0384615384615"]));
    assert!(text.contains("0.846153846154"), "{text}");
    assert!(text.contains("3.72727272727"), "{text}");
}

#[test]
fn infeasible_extortion_exits_2() {
    let args = ["zd", "extort", "--chi", "2", "--phi", "0.45", "--game", "1.5,1.25,1,0"];
    let o = ipd(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("p3 = 1.125 > 1"), "{}", stderr(&o));

    let mut with_json = args.to_vec();
    with_json.extend(["--format", "json"]);
    let o = ipd(&with_json);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "infeasible");
    assert_eq!(err["error"]["details"]["violations"][0]["component"], "p3");
    assert!(close(&err["error"]["details"]["violations"][0]["value"], 1.125));
}

#[test]
fn bound_and_set_score() {
    let v = json(&ipd(&["zd", "bound", "--chi", "2", "--game", "1.5,1.25,1,0", "--format", "json"]));
    assert!(close(&v["phi_upper_bound"], 0.4));
    let v = json(&ipd(&["zd", "set-score", "--p1", "1", "--p4", "1/2", "--format", "json"]));
    assert!(close(&v["s_y"], 3.0));
    assert_eq!(v["p"], serde_json::json!([1.0, 0.5, 0.75, 0.5]));
    let o = ipd(&["zd", "set-score", "--p1", "1", "--p4", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mutual_cooperation_scores() {
    let v = json(&ipd(&["scores", "-p", "1,1,1,1", "-q", "1,1,1,1", "--game", "5,3,1,0", "--format", "json"]));
    assert!(close(&v["scores"]["s_x"], 3.0) && close(&v["scores"]["s_y"], 3.0));
    // Space-separated probabilities work too.
    let v = json(&ipd(&["scores", "-p", "1", "1", "1", "1", "-q", "0", "0", "0", "0", "--format", "json"]));
    assert!(close(&v["scores"]["s_x"], 0.0) && close(&v["scores"]["s_y"], 5.0));
}

#[test]
fn degenerate_pairs_are_flagged() {
    let v = json(&ipd(&["scores", "-p", "1,0,1,0", "-q", "1,0,1,0", "--format", "json"]));
    assert_eq!(v["degenerate"], true);
    assert_eq!(v["closed_classes"], 3);
    let v = json(&ipd(&["stationary", "-p", "1,0,1,0", "-q", "1,0,1,0", "--format", "json"]));
    assert_eq!(v["unique"], false);
}

#[test]
fn donation_game_flag() {
    let v = json(&ipd(&["scores", "-p", "1,1,1,1", "-q", "0,0,0,0", "--donation", "3,1", "--format", "json"]));
    assert!(close(&v["scores"]["s_x"], -1.0) && close(&v["scores"]["s_y"], 3.0));
    let o = ipd(&["scores", "-p", "1,1,1,1", "-q", "1,1,1,1", "--donation", "3,1", "--game", "5,3,1,0"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn bad_flags_exit_64_with_usage() {
    for args in [
        vec!["frobnicate"],
        vec!["scores", "-p", "1,1", "-q", "1,1,1,1"],
        vec!["zd", "extort", "--chi", "abc", "--phi", "0.1"],
        vec!["match", "--x", "tft", "--y", "tft"],
        vec!["match", "--x", "nobody", "--y", "tft", "--rounds", "5"],
    ] {
        let o = ipd(&args);
        assert_eq!(o.status.code(), Some(64), "{args:?}");
        assert!(o.stdout.is_empty());
        assert!(!stderr(&o).is_empty());
    }
    let o = ipd(&["frobnicate"]);
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
    let o = ipd(&["frobnicate", "--format", "json"]);
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "usage");
    assert_eq!(err["error"]["exit_code"], 64);
}

#[test]
fn invalid_values_exit_3() {
    let o = ipd(&["scores", "-p", "1.5,1,1,1", "-q", "1,1,1,1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "invalid_config");
    assert_eq!(ipd(&["scores", "-p", "1,1,1,1", "-q", "1,1,1,1", "--game", "1,2,3,4"]).status.code(), Some(3));
    assert_eq!(ipd(&["match", "--x", "random:2", "--y", "tft", "--rounds", "5"]).status.code(), Some(3));
    assert_eq!(ipd(&["match", "--x", "tft", "--y", "tft", "--omega", "1"]).status.code(), Some(3));
}

#[test]
fn help_and_version_exit_0() {
    for args in [vec!["--help"], vec!["zd", "--help"], vec!["--version"]] {
        let o = ipd(&args);
        assert_eq!(o.status.code(), Some(0));
        assert!(!o.stdout.is_empty());
    }
}

#[test]
fn matches_are_seeded() {
    let args = ["match", "--x", "adaptive", "--y", "random:0.4", "--rounds", "300", "--seed", "9", "--format", "json"];
    let a = ipd(&args);
    assert_eq!(a.stdout, ipd(&args).stdout);
    let b = ipd_env(&args[..args.len() - 4].iter().chain(&["--format", "json"]).copied().collect::<Vec<_>>(), Some("9"));
    assert_eq!(a.stdout, b.stdout, "IPD_SEED is the fallback seed");
    let v = json(&a);
    assert_eq!(v["outcomes"].as_str().unwrap().len(), 2 * 300);
    assert_eq!(v["seed"], 9);
}

#[test]
fn extortioner_against_cooperator_match() {
    let o = ipd(&["match", "--x", "11/13,1/2,7/26,0", "--y", "cooperator", "--rounds", "200000", "--seed", "1", "--format", "json"]);
    let v = json(&o);
    assert!((v["per_round_mean"][0].as_f64().unwrap() - 41.0 / 11.0).abs() < 0.02);
    assert!((v["per_round_mean"][1].as_f64().unwrap() - 21.0 / 11.0).abs() < 0.02);
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn tournament_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
            "players": ["tft", "alld", {"name": "coop", "spec": {"kind": "cooperator"}}, "random:0.5"],
            "match": {"length": {"fixed": 50}, "seed": 4},
            "repetitions": 3
        }"#,
    );
    let run = |out: &Path| {
        let o = ipd(&["tournament", "--config", &cfg, "--output", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        o
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let oa = run(&a);
    let ob = run(&b);
    assert_eq!(oa.stdout, ob.stdout);
    let mut names: Vec<String> =
        std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["payoff_matrix.csv", "summary.csv", "summary.json", "tournament.json"]);
    for name in &names {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let csv = std::fs::read_to_string(a.join("summary.csv")).unwrap();
    assert!(csv.starts_with(
        "rank,player,median_score,mean_score,cooperation_rate,initial_cooperation_rate,wins,draws\n"
    ));
    assert_eq!(csv.lines().count(), 5);
    let bundle: Value = serde_json::from_slice(&std::fs::read(a.join("tournament.json")).unwrap()).unwrap();
    assert_eq!(bundle["matches"].as_array().unwrap().len(), 6 * 3);
    assert_eq!(bundle["matches"][0]["outcomes"].as_str().unwrap().len(), 100);
    assert_eq!(bundle["config"]["match"]["seed"], 4);
}

#[test]
fn tournament_seed_fallbacks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"players": ["tft", "random:0.5"], "match": {"length": {"fixed": 30}}}"#);
    let with_env = ipd_env(&["tournament", "--config", &cfg, "--format", "json"], Some("17"));
    let with_flag = ipd(&["tournament", "--config", &cfg, "--seed", "17", "--format", "json"]);
    assert_eq!(with_env.stdout, with_flag.stdout);
    assert_eq!(json(&with_flag)["seed"], 17);
    assert_eq!(json(&ipd(&["tournament", "--config", &cfg, "--format", "json"]))["seed"], 0);
}

#[test]
fn bad_tournament_configs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        "not json",
        r#"{"players": ["tft"], "match": {"length": {"fixed": 10}}}"#,
        r#"{"players": ["tft", "tft"], "match": {"length": {"fixed": 10}}}"#,
        r#"{"players": ["tft", "alld"], "match": {"length": {"fixed": 0}}}"#,
        r#"{"players": ["tft", "alld"], "match": {"length": {"fixed": 10}}, "game": {"T": 5, "R": 3, "P": 1, "S": 0}, "donation": {"b": 3, "c": 1}}"#,
        r#"{"players": ["tft", "alld"], "match": {"length": {"fixed": 10}}, "game": {"T": 1, "R": 3, "P": 1, "S": 0}}"#,
    ] {
        let cfg = write_config(dir.path(), body);
        let o = ipd(&["tournament", "--config", &cfg, "--format", "json"]);
        assert_eq!(o.status.code(), Some(3), "{body}: {}", stderr(&o));
        let err: Value = serde_json::from_slice(&o.stderr).unwrap();
        assert_eq!(err["error"]["exit_code"], 3);
    }
    let o = ipd(&["tournament", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn standard_lineup_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"players": "standard", "match": {"length": {"fixed": 200}, "seed": 1}, "repetitions": 2}"#);
    let v = json(&ipd(&["tournament", "--config", &cfg, "--format", "json"]));
    let ranking = v["ranking"].as_array().unwrap();
    assert_eq!(ranking.len(), 11);
    assert_eq!(ranking[0]["player"], "Cooperator");
}

#[test]
fn replicator_csv_and_fixed_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep");
    let o = ipd(&[
        "replicator", "--b", "3", "--c", "1", "--omega", "0.9", "--x0", "0.2,0.3,0.5", "--horizon", "5",
        "--format", "csv", "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("t,x1,x2,x3\n0,0.2,0.3,0.5\n"), "{}", &text[..40]);
    assert_eq!(text.lines().count(), 502);
    assert_eq!(std::fs::read_to_string(out.join("trajectory.csv")).unwrap(), text);
    let fixed: Value = serde_json::from_slice(&std::fs::read(out.join("fixed_points.json")).unwrap()).unwrap();
    let e2 = fixed["fixed_points"]
        .as_array()
        .unwrap()
        .iter()
        .find(|f| f["kind"] == "vertex" && f["location"] == serde_json::json!([0.0, 1.0, 0.0]))
        .unwrap();
    assert_eq!(e2["stability"], "attracting");
    // Only the final files remain; temporaries were renamed into place.
    assert_eq!(std::fs::read_dir(&out).unwrap().count(), 3);
}

#[test]
fn replicator_grid_mode() {
    let o = ipd(&["replicator", "--donation", "3,1", "--omega", "0.9", "--grid", "4", "--horizon", "1", "--stride", "100", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("run,t,x1,x2,x3\n"));
    assert_eq!(text.lines().count(), 1 + 16 * 2);
    let o = ipd(&["replicator", "--b", "3", "--c", "1", "--omega", "0.9", "--x0", "0.5,0.5,0.5"]);
    assert_eq!(o.status.code(), Some(3));
}
