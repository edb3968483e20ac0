use std::path::{Path, PathBuf};

use nama::io::cli::main_with_args;
use nama::io::{parse_instance, verify_result, IoError, ResultFile};
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, String) {
    let mut err = Vec::new();
    let mut full = vec!["nama"];
    full.extend_from_slice(args);
    let code = main_with_args(full, &mut err);
    (code, String::from_utf8(err).unwrap())
}

fn put(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

const SINGLE_SITE: &str = r#"{
  "kind": "toric-dirac",
  "mode": "rational",
  "polytope": [["0", "0"], ["1", "0"], ["0", "1"]],
  "sites": [["2/3", "-1/2"]],
  "weights": ["1/2"]
}"#;

const THREE_SITES: &str = r#"{
  "kind": "toric-dirac",
  "mode": "rational",
  "polytope": [["0", "0"], ["1", "0"], ["1", "1"], ["0", "1"]],
  "sites": [["0", "0"], ["2", "1"], ["-1", "2"]],
  "weights": ["1/2", "1/4", "1/4"]
}"#;

const POISSON: &str = r#"{
  "kind": "curve-poisson",
  "mode": "rational",
  "vertices": 3,
  "edges": [{"u": 0, "v": 1, "length": "1"}, {"u": 1, "v": 2, "length": "2"}, {"u": 2, "v": 0, "length": "1/2"}],
  "omega": [{"vertex": 0, "weight": "1"}],
  "mu": [{"edge": 1, "position": "1/3", "weight": "1/2"}, {"vertex": 2, "weight": "1/2"}]
}"#;

const GREEN: &str = r#"{
  "kind": "curve-green",
  "mode": "rational",
  "vertices": 2,
  "edges": [{"u": 0, "v": 1, "length": "1"}, {"u": 0, "v": 1, "length": "1"}],
  "x": 0,
  "y": 1
}"#;

const ENVELOPE: &str = r#"{
  "kind": "toric-envelope",
  "mode": "rational",
  "polytope": [["0", "0"], ["1", "0"], ["0", "1"]],
  "constraints": [{"site": ["0", "0"], "value": "0"}, {"site": ["1", "1"], "value": "1/2"}, {"site": ["-1", "1/2"], "value": "1/3"}]
}"#;

#[test]
fn single_site_solve_is_the_translated_support_function() {
    let dir = TempDir::new().unwrap();
    let inp = put(&dir, "in.json", SINGLE_SITE);
    let out = dir.path().join("out.json");
    assert_eq!(run(&["solve", s(&inp), "-o", s(&out), "--no-timestamp"]).0, 0);
    let v = json(&out);
    let sol = &v["solution"];
    assert_eq!(sol["residual"], "0");
    assert_eq!(sol["converged"], true);
    assert_eq!(sol["generators"][0]["value"], "0");
    // Over the simplex g(y - x) = max(0, y_1 - x_1, y_2 - x_2): one piece
    // per vertex v, with slope v and intercept -<v, x>.
    let mut pieces: Vec<(String, String, String)> = sol["pieces"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            (
                p["slope"][0].as_str().unwrap().to_string(),
                p["slope"][1].as_str().unwrap().to_string(),
                p["intercept"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    pieces.sort();
    let mut expect = vec![
        ("0".to_string(), "0".to_string(), "0".to_string()),
        ("1".into(), "0".into(), "-2/3".into()),
        ("0".into(), "1".into(), "1/2".into()),
    ];
    expect.sort();
    assert_eq!(pieces, expect);
    let r = ResultFile::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    verify_result(&parse_instance(SINGLE_SITE).unwrap(), &r).unwrap();
}

#[test]
fn outputs_without_timestamps_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    for (name, cmd, text) in [
        ("s", "solve", SINGLE_SITE),
        ("e", "envelope", ENVELOPE),
        ("p", "poisson", POISSON),
        ("g", "green", GREEN),
        ("n", "energy", POISSON),
    ] {
        let inp = put(&dir, &format!("{name}.json"), text);
        let a = dir.path().join(format!("{name}_a.json"));
        let b = dir.path().join(format!("{name}_b.json"));
        assert_eq!(run(&[cmd, s(&inp), "-o", s(&a), "--no-timestamp"]).0, 0, "{cmd}");
        assert_eq!(run(&[cmd, s(&inp), "-o", s(&b), "--no-timestamp"]).0, 0, "{cmd}");
        let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert_eq!(ta, tb, "{cmd}");
        let r = ResultFile::parse(std::str::from_utf8(&ta).unwrap()).unwrap();
        assert!(r.timestamp.is_none());
        verify_result(&parse_instance(text).unwrap(), &r).unwrap();
        let c = dir.path().join(format!("{name}_c.json"));
        assert_eq!(run(&[cmd, s(&inp), "-o", s(&c)]).0, 0);
        assert!(ResultFile::parse(&std::fs::read_to_string(&c).unwrap()).unwrap().timestamp.is_some());
    }
}

#[test]
fn exported_cells_have_one_row_per_cell_vertex() {
    let dir = TempDir::new().unwrap();
    let inp = put(&dir, "e.json", ENVELOPE);
    let out = dir.path().join("e_out.json");
    let csv = dir.path().join("cells.csv");
    assert_eq!(run(&["envelope", s(&inp), "-o", s(&out), "--no-timestamp"]).0, 0);
    assert_eq!(run(&["export-cells", s(&out), "-o", s(&csv)]).0, 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("cell_id,site_0,site_1,weight,vertex_0,vertex_1"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // Oracle: the weights per cell id must match the atoms of the result,
    // and every cell is a polygon with at least three vertices.
    let v = json(&out);
    let atoms = v["solution"]["atoms"].as_array().unwrap();
    let exact_weight = header.split(',').position(|h| h == "weight_exact").unwrap();
    let mut ids: Vec<&str> = rows.iter().map(|r| r[0]).collect();
    ids.dedup();
    assert_eq!(ids.len(), atoms.len());
    for id in ids {
        let cell: Vec<&Vec<&str>> = rows.iter().filter(|r| r[0] == id).collect();
        assert!(cell.len() >= 3);
        let w = cell[0][exact_weight];
        assert!(atoms.iter().any(|a| a["weight"] == w), "weight {w}");
    }
}

#[test]
fn suites_report_through_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let (code, _) = run(&["check", "--suite", "orthogonality", "--seed", "7", "--cases", "200", "-o", s(&out), "--no-timestamp"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["cases"], 200);
    assert_eq!(v["elapsed_ms"], 0);
    let (code, err) = run(&["check", "--suite", "zariski_defect", "--seed", "7", "--cases", "300", "--dim", "1"]);
    assert_eq!(code, 4);
    assert!(err.contains("zariski.decay"), "{err}");
    assert_eq!(run(&["check", "--suite", "nonsense", "--cases", "1"]).0, 2);
}

#[test]
fn exact_plane_solves_that_cannot_finish_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let inp = put(&dir, "t.json", THREE_SITES);
    let out = dir.path().join("t_out.json");
    let (code, err) = run(&["solve", s(&inp), "-o", s(&out), "--no-timestamp"]);
    assert_eq!(code, 3, "{err}");
    let v = json(&out);
    assert_eq!(v["solution"]["converged"], false);
    let r = ResultFile::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    verify_result(&parse_instance(THREE_SITES).unwrap(), &r).unwrap();
    let float = put(&dir, "f.json", &THREE_SITES.replace("rational", "float"));
    assert_eq!(run(&["solve", s(&float), "-o", s(&out)]).0, 0);
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.json");
    let bad = put(&dir, "bad.json", &SINGLE_SITE.replace(r#""weights": ["1/2"]"#, r#""weights": ["1"]"#));
    let (code, err) = run(&["solve", s(&bad), "-o", s(&out)]);
    assert_eq!(code, 2);
    assert!(err.contains("weights"), "{err}");
    assert!(!out.exists());
    assert_eq!(run(&["solve", "/no/such/file.json", "-o", s(&out)]).0, 2);
    let wrong = put(&dir, "g.json", GREEN);
    assert_eq!(run(&["solve", s(&wrong), "-o", s(&out)]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
}

#[test]
fn every_required_field_is_named_when_missing() {
    let cases: [(&str, &[&str]); 5] = [
        (SINGLE_SITE, &["kind", "mode", "polytope", "sites", "weights"]),
        (ENVELOPE, &["polytope", "constraints"]),
        (POISSON, &["vertices", "edges", "omega", "mu"]),
        (GREEN, &["edges", "x", "y"]),
        (THREE_SITES, &["weights"]),
    ];
    for (text, fields) in cases {
        let full: Value = serde_json::from_str(text).unwrap();
        for f in fields.iter() {
            let mut v = full.clone();
            v.as_object_mut().unwrap().remove(*f);
            match parse_instance(&v.to_string()) {
                Err(IoError::Validation { field, .. }) => assert_eq!(field, *f),
                other => panic!("{f}: {other:?}"),
            }
        }
    }
}

#[test]
fn instances_round_trip_through_their_canonical_form() {
    for text in [SINGLE_SITE, THREE_SITES, POISSON, GREEN, ENVELOPE] {
        let a = parse_instance(text).unwrap();
        let b = parse_instance(&a.to_json()).unwrap();
        assert_eq!(a, b);
        assert_eq!(nama::io::instance_hash(&a), nama::io::instance_hash(&b));
    }
}

#[test]
fn tampered_results_fail_verification() {
    let dir = TempDir::new().unwrap();
    let inp = put(&dir, "p.json", POISSON);
    let out = dir.path().join("p_out.json");
    assert_eq!(run(&["poisson", s(&inp), "-o", s(&out), "--no-timestamp"]).0, 0);
    let inst = parse_instance(POISSON).unwrap();
    let mut r = ResultFile::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    verify_result(&inst, &r).unwrap();
    r.solution["energy"] = Value::String("12345".into());
    assert!(verify_result(&inst, &r).is_err());
    let other = parse_instance(GREEN).unwrap();
    assert!(verify_result(&other, &r).is_err());
}
