use std::path::PathBuf;
use std::process::Command;

use jsonschema::JSONSchema;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn muorient(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_muorient"));
    cmd.args(args).env_remove("MU_ORIENT_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("UTF-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("UTF-8 stderr"),
    }
}

fn json(args: &[&str]) -> Value {
    let r = muorient(args, &[]);
    assert!(r.code <= 1, "{args:?} exited {}: {}", r.code, r.stderr);
    serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", r.stdout))
}

fn schema(name: &str) -> JSONSchema {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    JSONSchema::compile(&serde_json::from_str(&text).unwrap()).expect("schema compiles")
}

fn assert_valid(name: &str, value: &Value) {
    let s = schema(name);
    let msgs: Vec<String> = match s.validate(value) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("{name} report does not match its schema:\n{}", msgs.join("\n"));
}

const SAMPLES: &[(&str, &[&str])] = &[
    ("sym-decompose", &["sym-decompose", "--p", "3", "--k", "0..8"]),
    ("slice-cells", &["slice-cells", "--p", "3", "--n", "0..6"]),
    ("tr-nm", &["tr-nm", "--p", "3"]),
    ("fgl-p-series", &["fgl", "p-series", "--curve", "tmf2", "--n", "3", "--trunc", "10"]),
    ("fgl-invariants", &["fgl", "invariants", "--curve", "tmf2", "--trunc", "10"]),
    ("fgl-multivar", &["fgl", "multivar", "--curve", "multiplicative", "--trunc", "4"]),
    ("v1-span-model", &["v1-span", "--model", "tmf2"]),
    ("v1-span-etheory", &["v1-span", "--model", "etheory", "--p", "5", "--samples", "10"]),
    ("hfpss-run", &["hfpss", "run", "--p", "3", "--stems", "-6:6"]),
    ("hfpss-evenness", &["hfpss", "evenness", "--p", "3", "--stems", "-4:4"]),
    ("hfpss-tate", &["hfpss", "tate", "--p", "3", "--t", "6"]),
    ("endo-check", &["endo-check", "--p", "3"]),
    ("verify-paper", &["verify-paper", "--only", "tmf2_span_rank", "--only", "span_telescoping"]),
];

#[test]
fn every_report_matches_its_schema() {
    for (name, args) in SAMPLES {
        assert_valid(name, &json(args));
    }
}

#[test]
fn every_schema_file_is_exercised() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas");
    let mut files: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter_map(|f| f.strip_suffix(".schema.json").map(str::to_string))
        .collect();
    files.sort();
    let mut used: Vec<String> = SAMPLES.iter().map(|(n, _)| n.to_string()).collect();
    used.sort();
    assert_eq!(files, used);
}

#[test]
fn schemas_reject_malformed_reports() {
    let mut r = json(&["tr-nm", "--p", "2"]);
    r["p"] = Value::from("two");
    assert!(!schema("tr-nm").is_valid(&r));
    let mut r = json(&["hfpss", "tate", "--p", "3", "--t", "0"]);
    r.as_object_mut().unwrap().remove("tate_odd");
    assert!(!schema("hfpss-tate").is_valid(&r));
}

#[test]
fn timings_and_custom_curves_validate() {
    let r = json(&["verify-paper", "--only", "tmf2_span_rank", "--timings"]);
    assert!(r["checks"][0]["timing_ms"].is_u64());
    assert_valid("verify-paper", &r);
    let r = json(&["fgl", "invariants", "--curve", r#"{"vars":["a"],"weights":[2],"a1":"a"}"#, "--trunc", "10"]);
    assert_eq!(r["method"], "echelon");
    assert_valid("fgl-invariants", &r);
}

#[test]
fn composite_p_is_a_usage_error() {
    for args in [&["sym-decompose", "--p", "4"][..], &["hfpss", "run", "--p", "9"], &["endo-check", "--p", "1"]] {
        let r = muorient(args, &[]);
        assert_eq!(r.code, 2, "{args:?}");
        assert!(r.stderr.contains("p must be prime"), "{}", r.stderr);
    }
}

#[test]
fn short_truncation_explains_itself() {
    let r = muorient(&["fgl", "invariants", "--curve", "tmf2", "--trunc", "5"], &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("need at least 10") && r.stderr.contains("--trunc 10"), "{}", r.stderr);
    let r = muorient(&["verify-paper", "--trunc", "5", "--only", "tmf2_v1_v2"], &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--trunc 10"), "{}", r.stderr);
}

#[test]
fn other_usage_errors() {
    let cases: &[&[&str]] = &[
        &["hfpss", "run", "--p", "3", "--stems", "5:-5"],
        &["hfpss", "evenness", "--p", "3", "--stems", "0:10"],
        &["sym-decompose", "--p", "3", "--format", "chart"],
        &["fgl", "p-series", "--curve", "weierstrass"],
        &["fgl", "p-series", "--curve", r#"{"vars":["a"],"a1":"b"}"#],
        &["v1-span", "--model", "tmf2", "--p", "5"],
        &["verify-paper", "--only", "no_such_check"],
        &["no-such-command"],
    ];
    for args in cases {
        let r = muorient(args, &[]);
        assert_eq!(r.code, 2, "{args:?}: {}", r.stderr);
        assert!(r.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn failed_checks_exit_one() {
    // E_2 has reduced classes in stem -1 at p = 3; the command reports them.
    let r = muorient(&["hfpss", "evenness", "--p", "3", "--stems", "-4:4"], &[]);
    assert_eq!(r.code, 1);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["e2_stem_minus_one_empty"], false);
    assert_eq!(v["einf_clean"], true);
}

#[test]
fn successful_checks_exit_zero() {
    for args in [&["endo-check", "--p", "3"][..], &["v1-span", "--model", "tmf2"], &["tr-nm", "--p", "5"]] {
        assert_eq!(muorient(args, &[]).code, 0, "{args:?}");
    }
}

#[test]
fn suite_exit_code_follows_the_report() {
    let r = muorient(&["verify-paper", "--only", "tmf2_v1_v2", "--only", "tmf2_span_rank"], &[]);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let failed: Vec<&str> = v["failed"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["tmf2_span_rank", "tmf2_v1_v2"]);
    assert_eq!(r.code, if failed.is_empty() { 0 } else { 1 });
    assert_eq!(v["passed"], failed.is_empty());
    if let Some(first) = failed.first() {
        assert!(r.stderr.contains(&format!("first failure: {first}")), "{}", r.stderr);
    }
}

#[test]
fn seed_comes_from_flag_then_environment() {
    let args = ["v1-span", "--model", "etheory", "--p", "5", "--samples", "5"];
    let default = muorient(&args, &[]);
    let v: Value = serde_json::from_str(&default.stdout).unwrap();
    assert_eq!(v["seed"], 0xC0FFEE);
    let env = muorient(&args, &[("MU_ORIENT_SEED", "17")]);
    let v: Value = serde_json::from_str(&env.stdout).unwrap();
    assert_eq!(v["seed"], 17);
    let mut with_flag = args.to_vec();
    with_flag.extend(["--seed", "99"]);
    let flag = muorient(&with_flag, &[("MU_ORIENT_SEED", "17")]);
    let v: Value = serde_json::from_str(&flag.stdout).unwrap();
    assert_eq!(v["seed"], 99);
    let bad = muorient(&args, &[("MU_ORIENT_SEED", "coffee")]);
    assert_eq!(bad.code, 2);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = ["verify-paper", "--only", "e_theory_span", "--only", "transfer_perturbation", "--samples", "20"];
    let a = muorient(&args, &[("MU_ORIENT_SEED", "5")]);
    let b = muorient(&args, &[("MU_ORIENT_SEED", "5")]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    let c = muorient(&["endo-check", "--p", "5", "--seed", "3"], &[]);
    let d = muorient(&["endo-check", "--p", "5", "--seed", "3"], &[]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn chart_and_table_formats() {
    let r = muorient(&["hfpss", "run", "--p", "3", "--stems", "-2:4", "--format", "chart"], &[]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.lines().any(|l| l == "  0 |T.#.T.T"), "{}", r.stdout);
    let r = muorient(&["sym-decompose", "--p", "3", "--k", "3", "--format", "table"], &[]);
    assert_eq!(r.stdout, "k  dim  trivial  rhobar  free  jordan\n3  4    1        0       1     J3^1 J1^1\n");
    let r = muorient(&["v1-span", "--report", "table"], &[]);
    assert!(r.stdout.contains("(γ v1 - v1)/3    l1"), "{}", r.stdout);
}
