use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn viikit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_viikit"))
        .args(args)
        .env_remove("VIIKIT_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn analyze_four_curve_example() {
    let out = viikit(&["analyze", &fixture("ex_4223")]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["det"], "9");
    assert_eq!(v["k"]["value"], "4");
    assert_eq!(v["solutions"]["value"]["plus"]["mu"]["a"], "4");
}

#[test]
fn analyze_three_curve_example() {
    let out = viikit(&["analyze", &fixture("app_ex1")]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["det"], "4");
    assert_eq!(v["k"]["value"], "3");
    assert_eq!(v["anticanonical"]["value"]["m"], "2");
}

#[test]
fn analyze_table_renders() {
    let out = viikit(&["analyze", "--table", &fixture("ex_4223")]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("6X^2 - 13X + 6 = 0  (disc 25)"));
    assert!(text.contains("mu+ vs k       4 = 4"));
}

#[test]
fn analyze_garbage_is_a_parse_error() {
    assert_eq!(code(&viikit(&["analyze", &fixture("garbage")])), 2);
    assert_eq!(code(&viikit(&["analyze", "/nonexistent/config.json"])), 2);
}

#[test]
fn analyze_failed_expectation_exits_one() {
    let dir = std::env::temp_dir().join(format!("viikit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("wrong.json");
    let src = std::fs::read_to_string(fixture("app_ex1")).unwrap().replace(r#""value": "4""#, r#""value": "5""#);
    std::fs::write(&path, src).unwrap();
    let out = viikit(&["analyze", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("/det"));
}

#[test]
fn poly_verify_exit_codes() {
    let out = viikit(&["poly", "verify", "--pmax", "8", "--trials", "100", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["all_passed"], true);
    assert!(v["probes"].as_array().unwrap().iter().any(|p| p["mismatches"].as_u64().unwrap() > 0));
    assert_eq!(code(&viikit(&["poly", "verify", "--pmax", "2", "--trials", "1", "--seed", "1"])), 0);
    assert_eq!(code(&viikit(&["poly", "verify", "--pmax", "1"])), 2);
}

#[test]
fn poly_seed_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_viikit"))
        .args(["poly", "verify", "--pmax", "3", "--trials", "2"])
        .env("VIIKIT_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(json(&out)["seed"], 99);
}

#[test]
fn germ_commands() {
    let out = viikit(&["germ", "index", &fixture("app_ex2_germ")]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["index_m"], 2);

    let out = viikit(&["germ", "reduce", &fixture("app_ex1_germ"), "--q", "2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!((v["reduced"]["s"].as_u64(), v["reduced"]["j"].as_u64()), (Some(2), Some(2)));
    assert_eq!(v["p_reduced"], "ζ^2");

    let out = viikit(&["germ", "reduce", &fixture("app_ex2_germ"), "--q", "2"]);
    let v = json(&out);
    assert_eq!(v["r"], 1);
    assert_eq!((v["reduced"]["s"].as_u64(), v["reduced"]["j"].as_u64()), (Some(4), Some(1)));
    assert_eq!(v["p_reduced"], "ζ + c3·ζ^3");

    assert_eq!(code(&viikit(&["germ", "reduce", &fixture("app_ex1_germ"), "--q", "3"])), 1);

    let out = viikit(&["germ", "crosscheck", &fixture("app_ex1"), &fixture("app_ex2_germ")]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["cross_pairing"], true);
}

#[test]
fn series_commands() {
    assert_eq!(code(&viikit(&["series", "verify", &fixture("synthetic_pass")])), 0);
    let out = viikit(&["series", "verify", &fixture("synthetic_perturbed")]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["variants"][0]["monomial"], serde_json::json!([1, 2]));
    let out = viikit(&["series", "verify", &fixture("app_ex2_factorization"), "--order", "10"]);
    assert_eq!(json(&out)["variants"][0]["verdict"], "equal");
    assert_eq!(code(&viikit(&["series", "verify", &fixture("garbage")])), 2);
}

#[test]
fn search_commands() {
    let out = viikit(&["search", "--self-ints", "-3,-3,-2", "--det", "4", "--anticanonical", "2,2,1"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["count"].as_u64().unwrap() >= 1);
    let out = viikit(&["search", "--self-ints", "-2", "--det", "2"]);
    assert_eq!(json(&out)["matches"][0]["configuration"]["cycle"][0]["node"], 1);
    let out = viikit(&["search", "--self-ints", "-4,-2,-2,-2,-2,-2", "--det", "4", "--anticanonical", "3,2,4,6,5,4"]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&viikit(&["search", "--self-ints", "-2,-2,-2,-2,-2,-2,-2,-2,-2"])), 2);
}

#[test]
fn fixtures_run_all_pass() {
    let out = viikit(&["fixtures", "list"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 14);
    let out = viikit(&["fixtures", "run"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(code(&viikit(&["fixtures", "run", "no_such_fixture"])), 2);
}

#[test]
fn reports_are_deterministic() {
    for args in [
        vec!["analyze".to_string(), fixture("app_ex2")],
        vec!["poly".into(), "verify".into(), "--pmax".into(), "5".into(), "--trials".into(), "10".into()],
        vec!["fixtures".into(), "run".into(), "--json".into()],
    ] {
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(viikit(&a).stdout, viikit(&a).stdout);
    }
}
