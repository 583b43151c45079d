use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyltorsion")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cyltorsion-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn torsion_of_trivial_cylinder() {
    let trivial = data("trivial.json");
    let out = run(&["torsion", "--in", trivial.to_str().unwrap(), "--cap", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["det_eps"], "1");
    assert_eq!(v["log"], json!([]));
    assert_eq!(v["defined_mod_h"], false);
}

#[test]
fn surgery_with_oracle_degree_two() {
    let c = data("oloop_d2.json");
    let out = run(&["surgery", "--in", c.to_str().unwrap(), "--cap", "4", "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["oracle"]["equal"], true);
    assert_eq!(v["oracle"]["torsion_difference"], v["factor"]["log"]);
    let degree_two: Vec<&Value> = v["factor"]["log"].as_array().unwrap().iter().filter(|t| t["degree"] == 2).collect();
    assert_eq!(degree_two, vec![&json!({"degree": 2, "word": [1, 2], "coeff": "-2"})]);
}

#[test]
fn verify_altprod_passes_with_zero_counts() {
    let out = run(&["verify", "--suite", "altprod", "--cap", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["passed"], true);
    let check = &v["checks"][0];
    assert_eq!(check["status"], "PASS");
    for c in check["residual_zero_counts"].as_array().unwrap() {
        assert_eq!(c["zero"], c["checked"]);
    }
}

#[test]
fn verify_reports_are_byte_identical() {
    let args = ["verify", "--suite", "necklace", "--suite", "ldet", "--seed", "7", "--trials", "12"];
    let a = run(&args);
    let b = run(&["--jobs", "1", args[0], args[1], args[2], args[3], args[4], args[5], args[6], args[7], args[8]]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn johnson_of_commutator_transvection() {
    let f = data("commutator_map.json");
    let out = run(&["johnson", "--in", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["ia_degree"], "1");
    assert_eq!(v["trace"], json!([]));
}

#[test]
fn compare_presentation_with_itself_and_with_a_k1_value() {
    let trivial = data("trivial.json");
    let t = trivial.to_str().unwrap();
    let out = run(&["compare", "--in", t, "--in", t]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["equal"], true);

    let nonzero = temp_file("k1.json", r#"{"det_eps":"-1","log":[{"degree":2,"word":[1,2],"coeff":"3"}]}"#);
    let out = run(&["compare", "--in", t, "--in", nonzero.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["equal"], false);
    assert_eq!(v["det_eps_ratio"], "-1");
    assert_eq!(v["log_difference"], json!([{"degree": 2, "word": [1, 2], "coeff": "-3"}]));
}

#[test]
fn out_flag_writes_the_report() {
    let trivial = data("trivial.json");
    let dest = temp_file("report.json", "");
    let out = run(&["--out", dest.to_str().unwrap(), "torsion", "--in", trivial.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&dest).unwrap()).unwrap();
    assert_eq!(v["cap"], 4);
}

#[test]
fn exit_codes() {
    let bad = temp_file("bad.json", "{");
    assert_eq!(run(&["torsion", "--in", bad.to_str().unwrap()]).status.code(), Some(2));

    let unknown = temp_file("unknown.json", r#"{"genus":1,"minus":["m1","m2"],"plus":["p1","p2"],"relators":["p1 Q1","p2 M2"]}"#);
    assert_eq!(run(&["torsion", "--in", unknown.to_str().unwrap()]).status.code(), Some(2));

    let trivial = data("trivial.json");
    assert_eq!(run(&["torsion", "--in", trivial.to_str().unwrap(), "--cap", "0"]).status.code(), Some(3));

    let unbalanced = temp_file("unbalanced.json", r#"{"genus":1,"minus":["m1","m2"],"plus":["p1","p2"],"relators":["p1 M1"]}"#);
    assert_eq!(run(&["torsion", "--in", unbalanced.to_str().unwrap()]).status.code(), Some(3));

    assert_eq!(run(&["verify", "--suite", "nosuch"]).status.code(), Some(2));
}

#[test]
fn non_torelli_input_is_flagged() {
    let p = temp_file("square.json", r#"{"genus":1,"minus":["m1","m2"],"plus":["p1","p2"],"relators":["p1 M1 M1","p2 M2"]}"#);
    let out = run(&["torsion", "--in", p.to_str().unwrap(), "--cap", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["defined_mod_h"], true);
    assert!(v.get("loop_part").is_none());
}
