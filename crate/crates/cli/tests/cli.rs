use std::path::PathBuf;
use std::process::{Command, Output};

use regex::Regex;
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn straticoh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_straticoh")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (Value, String, i32) {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let o = straticoh(&a);
    let text = stdout(&o);
    (serde_json::from_str(&text).expect("valid json"), text, o.status.code().unwrap())
}

#[test]
fn hi_on_coned_solid_torus() {
    let o = straticoh(&["hi", "--perversity", "lower-middle", &data("coned_solid_torus.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("betti: 0 0 1 0"));
    let (v, _, _) = json(&["hi", "-p", "n", &data("coned_solid_torus.json")]);
    assert_eq!(v["result"]["betti"], serde_json::json!([0, 1, 0, 0]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["inputs"][0]["f_vectors"][0]["f_vector"], serde_json::json!([9, 27, 27, 9]));
}

#[test]
fn perversity_from_the_space_file() {
    let (v, _, code) = json(&["hi", &data("suspension_of_torus.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["betti"], serde_json::json!([0, 1, 3, 0]));
}

#[test]
fn collapse_check_on_klein_bundle() {
    let (v, _, code) = json(&["collapse-check", &data("klein_bundle.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["collapses"], true);
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn non_complementary_pairing_is_rejected() {
    let o = straticoh(&["pairing", "-p", "m", "-p", "m", &data("suspension_of_torus.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not complementary"));
    let (v, _, code) = json(&["pairing", "-p", "m", &data("suspension_of_torus.json")]);
    assert_eq!(code, 0);
    let m2 = &v["result"]["matrices"][2];
    assert_eq!((m2["rows"].as_u64(), m2["cols"].as_u64(), m2["rank"].as_u64()), (Some(3), Some(3), Some(3)));
}

#[test]
fn broken_cocycle_is_named() {
    let o = straticoh(&["e2", &data("broken_cocycle_bundle.json")]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("cocycle") && err.contains("\"0\", \"1\", \"2\""), "{err}");
}

#[test]
fn parse_errors_report_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"vertices\": [\"a\"],\n  \"simplices\": [[\"a\", 7]]\n}\n").unwrap();
    let o = straticoh(&["cohomology", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("simplices[0][1]") && err.contains("line 3"), "{err}");
}

#[test]
fn wrong_input_kind_and_missing_perversity() {
    assert_eq!(straticoh(&["e2", &data("torus.json")]).status.code(), Some(2));
    assert_eq!(straticoh(&["hi", &data("torus.json")]).status.code(), Some(2));
    assert_eq!(straticoh(&["hi-depth1", &data("coned_solid_torus.json")]).status.code(), Some(2));
    assert_eq!(straticoh(&["selftest", &data("torus.json")]).status.code(), Some(2));
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = straticoh(&["cohomology", &data("torus.json"), "--format", "json", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["result"]["betti"], serde_json::json!([1, 2, 1]));
}

#[test]
fn duality_check_gates_klein() {
    let (v, _, code) = json(&["duality-check", &data("klein_bundle.json")]);
    assert_eq!(code, 0);
    for g in v["result"]["global"].as_array().unwrap() {
        assert!(g["status"].as_str().unwrap().starts_with("skipped"));
    }
    let (v, _, code) = json(&["duality-check", &data("circle_sphere_bundle.json")]);
    assert_eq!(code, 0);
    for g in v["result"]["global"].as_array().unwrap() {
        assert_eq!(g["report"]["holds"], true);
    }
}

fn all_jobs() -> Vec<Vec<String>> {
    let j = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    vec![
        j(&["cohomology", &data("klein_bottle.json")]),
        j(&["cohomology", &data("coned_solid_torus.json")]),
        j(&["cohomology", &data("trivial_torus_bundle.json")]),
        j(&["hi", &data("suspension_of_torus.json")]),
        j(&["hi", "--cutoff", "0", &data("coned_solid_torus.json")]),
        j(&["hi-depth1", &data("s2_x_s1_depth1.json")]),
        j(&["pairing", "-p", "zero", &data("coned_solid_torus.json")]),
        j(&["cup", "-p", "upper-middle", &data("coned_solid_torus.json")]),
        j(&["e2", &data("klein_bundle.json")]),
        j(&["collapse-check", &data("circle_sphere_bundle.json")]),
        j(&["duality-check", &data("klein_bundle.json")]),
        j(&["derham-check", &data("cone_on_sphere.json")]),
    ]
}

#[test]
fn json_reports_are_byte_identical() {
    for job in all_jobs() {
        let args: Vec<&str> = job.iter().map(String::as_str).collect();
        let (_, a, code) = json(&args);
        let (_, b, _) = json(&args);
        assert_eq!(code, 0, "{:?}", job);
        assert_eq!(a, b, "{:?}", job);
    }
}

fn keys(v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                out.push(k.clone());
                keys(x, out);
            }
        }
        Value::Array(a) => a.iter().for_each(|x| keys(x, out)),
        _ => {}
    }
}

fn leaf_numbers(v: &Value, re: &Regex, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => m.values().for_each(|x| leaf_numbers(x, re, out)),
        Value::Array(a) => a.iter().for_each(|x| leaf_numbers(x, re, out)),
        Value::Number(n) => out.push(n.to_string()),
        Value::String(s) => out.extend(re.find_iter(s).map(|m| m.as_str().to_string())),
        _ => {}
    }
}

#[test]
fn table_and_json_agree_on_numbers() {
    let re = Regex::new(r"-?\d+").unwrap();
    for job in all_jobs() {
        let args: Vec<&str> = job.iter().map(String::as_str).collect();
        let (v, _, _) = json(&args);
        let table = stdout(&straticoh(&args));
        let mut names = Vec::new();
        keys(&v, &mut names);
        names.sort_by_key(|k| std::cmp::Reverse(k.len()));
        names.dedup();
        // drop key names and header cells, keep values
        let mut stripped = String::new();
        for line in table.lines() {
            let mut l = line.to_string();
            if let Some((head, rest)) = l.split_once(": ") {
                if names.iter().any(|n| n == head.trim()) {
                    l = rest.to_string();
                }
            } else if let Some(head) = l.trim().strip_suffix(':') {
                if names.iter().any(|n| n == head) {
                    continue;
                }
            }
            let cells: Vec<&str> = l.split('|').map(str::trim).collect();
            if cells.len() > 1 && cells.iter().all(|c| names.iter().any(|n| n == c)) {
                continue;
            }
            stripped.push_str(&l);
            stripped.push('\n');
        }
        let from_table: Vec<String> = re.find_iter(&stripped).map(|m| m.as_str().to_string()).collect();
        let mut from_json = Vec::new();
        leaf_numbers(&v, &re, &mut from_json);
        assert_eq!(from_table, from_json, "{:?}", job);
    }
}
