use std::path::PathBuf;
use std::process::Command;

use equivar_cli::document::{parse_lincomb_text, parse_model, LieSection, ModelDocument};
use equivar_core::ratlin::{rat, SparseVec};
use equivar_core::sdga::builtin;
use equivar_core::Rat;
use num::Zero;
use proptest::prelude::*;

fn equivar(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_equivar"))
        .args(args)
        .current_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures"))
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn machine(args: &[&str]) -> (i32, serde_json::Value) {
    let mut v = args.to_vec();
    v.extend(["--format", "machine"]);
    let (code, out) = equivar(&v);
    (code, serde_json::from_str(&out).unwrap())
}

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-40i64..41, 1i64..13).prop_map(|(n, d)| rat(n, d))
}

#[test]
fn point_cohomology_example() {
    let (code, json) = machine(&["cohomology", "--builtin", "point", "--lie", "u1", "--max-degree", "4"]);
    assert_eq!(code, 0);
    let rows = json["tables"][0]["rows"].as_array().unwrap();
    let dims: Vec<u64> = rows.iter().map(|r| r["dimension"].as_u64().unwrap()).collect();
    assert_eq!(dims, [1, 0, 1, 0, 1]);
    assert_eq!(rows[4]["representatives"][0], "u1^2");
}

#[test]
fn hopf_fiber_rotation_class() {
    let (code, json) = machine(&["chern", "--builtin", "hopf_fiber_rotation", "--poly", "x1"]);
    assert_eq!(code, 0);
    assert_eq!(json["class"]["form"], "omega - u1");
    assert_eq!(json["class"]["zero"], false);
    let (code, json) = machine(&["chern", "--builtin", "hopf_fiber_rotation", "--poly", "x1^2"]);
    assert_eq!(code, 0);
    assert_eq!(json["class"]["form"], "-2*u1*omega + u1^2");
}

#[test]
fn flat_class_is_exact() {
    let (code, json) = machine(&["chern", "--builtin", "flat_circle_over_circle", "--poly", "x1", "--connection", "beta + 3/2*alpha"]);
    assert_eq!(code, 0);
    assert_eq!(json["class"]["form"], "-3/2*u1");
    assert_eq!(json["class"]["zero"], true);
    assert_eq!(json["class"]["primitive"], "3/2*alpha");
}

#[test]
fn corrupted_su2_reports_jacobi() {
    let (code, human) = equivar(&["validate", "--model", "corrupted_su2.model"]);
    assert_eq!(code, 1);
    assert!(human.contains("Jacobi identity fails at (1,2,3)"), "{human}");
}

#[test]
fn zero_denominator_is_a_parse_error() {
    let (code, json) = machine(&["validate", "--model", "bad_fraction.model"]);
    assert_eq!(code, 2);
    assert_eq!(json["error"]["line"], 6);
    assert_eq!(json["error"]["column"], 9);
    let (code, _) = equivar(&["chern", "--builtin", "hopf_trivial_s", "--poly", "1/0*x1"]);
    assert_eq!(code, 2);
}

#[test]
fn curvature_report_values() {
    let (code, json) = machine(&["curvature", "--builtin", "hopf_fiber_rotation"]);
    assert_eq!(code, 0);
    let values: Vec<(String, String)> = json["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| (v["name"].as_str().unwrap().to_string(), v["value"].as_str().unwrap().to_string()))
        .collect();
    let get = |n: &str| values.iter().find(|(k, _)| k == n).map(|(_, v)| v.as_str());
    assert_eq!(get("K"), Some("omega"));
    assert_eq!(get("K_eq"), Some("omega - u1"));
    assert_eq!(get("K_inf"), Some("omega - u1"));
}

#[test]
fn lie_section_round_trip() {
    for lie in [equivar_core::LieAlgebraData::u1(), equivar_core::LieAlgebraData::su2()] {
        assert_eq!(LieSection::from_lie(&lie).to_lie().unwrap(), lie);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lincomb_text_round_trip(a in arb_rat(), b in arb_rat()) {
        let model = builtin("flat_circle_over_circle").unwrap();
        let m = model.sdga();
        let theta = SparseVec::from_pairs([(m.find("alpha").unwrap(), a.clone()), (m.find("beta").unwrap(), b.clone())]);
        let doc = ModelDocument::from_model(&model, Some(&[theta]), Some("x1^2"));
        let text = doc.to_string();
        let back = parse_model(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.to_string(), text.clone());

        let line = text.lines().skip_while(|l| *l != "[connection]").nth(1).unwrap();
        let rhs = line.split_once(" = ").map(|(_, r)| r).unwrap_or("0");
        let parsed = parse_lincomb_text(rhs, &doc.basis).unwrap();
        let expected: Vec<(String, Rat)> = [("alpha", a), ("beta", b)]
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(n, c)| (n.to_string(), c))
            .collect();
        prop_assert_eq!(parsed, expected);
    }

    #[test]
    fn reports_are_deterministic(c in arb_rat()) {
        let conn = format!("beta + {c}*alpha");
        let args = ["chern", "--builtin", "flat_circle_over_circle", "--poly", "x1", "--connection", conn.as_str()];
        let first = equivar(&args);
        prop_assert_eq!(first.0, 0);
        prop_assert_eq!(equivar(&args), first);
    }
}
