//! Instance and result files: parse, solve, verify, export cells.

use nama::io::{export_cells_from_result, parse_instance, solve_result, verify_result, ResultFile};

const INSTANCE: &str = r#"{
  "kind": "toric-dirac",
  "mode": "rational",
  "polytope": [["0", "0"], ["1", "0"], ["0", "1"]],
  "sites": [["0", "0"], ["1", "1/2"]],
  "weights": ["1/4", "1/4"]
}"#;

fn main() {
    let inst = parse_instance(INSTANCE).unwrap();
    let (result, converged) = solve_result(&inst).unwrap();
    println!("converged: {converged}");
    let text = result.to_json();
    print!("{text}");

    // A result file re-validates against its instance.
    let reloaded = ResultFile::parse(&text).unwrap();
    verify_result(&inst, &reloaded).unwrap();
    println!("verified against instance {}", &reloaded.instance_hash[..12]);

    print!("{}", export_cells_from_result(&reloaded).unwrap());

    // Validation errors name the offending field.
    let bad = INSTANCE.replace(r#"["1/4", "1/4"]"#, r#"["1/4", "1/3"]"#);
    println!("{}", parse_instance(&bad).unwrap_err());
}
