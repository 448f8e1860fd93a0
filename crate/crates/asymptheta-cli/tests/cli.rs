use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_asymptheta"))
}

fn scene(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenes").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn asymptheta")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn simplex_theta_has_ten_atoms() {
    let s = scene("simplex.json");
    let o = run(&["theta", "--scene", s.to_str().unwrap(), "--k", "3", "--window", "[-1,2]x[-1,2]"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["k", "x", "y", "weight"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| &r[0] == "3" && &r[3] == "1"));
    assert_eq!(&rows[0][1], "0");
}

#[test]
fn figure_one_scene_runs_three_jobs() {
    let s = scene("simplex.json");
    let o = run(&["run", s.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.matches("# job").count(), 3);
    // (k+1)(k+2)/2 atoms at k = 3, 6, 12
    let atoms = out.lines().filter(|l| !l.starts_with('#') && !l.starts_with("k,")).count();
    assert_eq!(atoms, 10 + 28 + 91);
}

#[test]
fn expand_m1_matches_distexp() {
    let s = scene("m1.json");
    let o = run(&["expand", "--scene", s.to_str().unwrap(), "--N", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["s"], 1);
    assert_eq!(v["N"], 3);
    let coeffs = v["coefficients"].as_array().unwrap();
    // powers k^1 down to k^-2; the k^-2 (B_3) coefficient vanishes
    assert_eq!(coeffs.len(), 4);
    assert!(coeffs[3]["terms"].as_array().unwrap().is_empty());
    assert_eq!(coeffs[0]["terms"].as_array().unwrap().len(), 1);
    let second: Vec<&str> = coeffs[1]["terms"].as_array().unwrap().iter().map(|t| t["coeff"]["terms"][0]["c"].as_str().unwrap()).collect();
    assert_eq!(second, ["1/2", "1/2"]);
    let pretty = stdout(&run(&["expand", "--catalog", "m1", "--N", "3", "--format", "pretty"]));
    assert!(pretty.contains("1/12 * dx * delta_0"), "{pretty}");
}

#[test]
fn check_exactness_exits_zero() {
    let o = run(&["check", "--suite", "exactness"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS exactness"));
}

#[test]
fn scene_errors_exit_one_with_locations() {
    let dir = std::env::temp_dir().join(format!("asymptheta-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"dim":1,"functions":{"m":{"pieces":[{"cone":{"P":{"interval":[0,1]},"sigma":"1/0"}}]}}}"#).unwrap();
    let o = run(&["run", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("$.functions.m.pieces[0].cone.sigma") && err.contains("malformed rational"), "{err}");

    std::fs::write(&bad, "{\"dim\": 1,\n \"jobs\": [}").unwrap();
    let o = run(&["run", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn push_with_verification() {
    let s = scene("final.json");
    let o = run(&["run", s.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let json = &text[text.find('{').unwrap()..];
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(v["pushforward"]["pieces"].as_array().unwrap().len(), 3);
    assert!(v["verification"]["mismatch_at_k"].is_null());

    let o = run(&["push", "--catalog", "simplex", "--map", "simplex", "--format", "pretty"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("(λ + 1)"));
}

#[test]
fn pair_agrees_with_closed_form() {
    // k/3 + 1/2 + 1/(6k) at k = 7
    let o = run(&["pair", "--catalog", "m1", "--k", "7", "--phi", "x^2", "--series", "5"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["theta"], "20/7");
    assert_eq!(v[0]["series"], "20/7");
}

#[test]
fn domain_errors_exit_one() {
    let o = run(&["theta", "--catalog", "m1", "--k", "2", "--window", "[0,1]x[0,1]"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["expand", "--catalog", "nonexistent"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["theta", "--catalog", "m1", "--k", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn oracles() {
    let o = run(&["oracle", "remainder", "--catalog", "m1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "bounded");
    let o = run(&["oracle", "unicity", "--catalog", "alternating_line"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["witness"][0], "1/2");
    let o = run(&["eval", "--catalog", "final", "--k", "2", "--point", "0,1"]);
    assert!(o.status.success());
}

#[test]
fn parallel_run_keeps_order() {
    let s = scene("simplex.json");
    let seq = stdout(&run(&["run", s.to_str().unwrap()]));
    let par = stdout(&run(&["run", "--parallel", s.to_str().unwrap()]));
    assert_eq!(seq, par);
}

#[test]
fn failed_verification_exits_two() {
    // one chamber across the wall at 0 cannot carry a single quasi-polynomial
    let o = run(&["push", "--catalog", "final", "--map", "final", "--chambers", r#"[{"interval":[-2,2]}]"#]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("verification failed"));
}
