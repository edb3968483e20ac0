//! Envelopes with slopes on the lattice (1/m)Z^2 approach the exact
//! envelope, and their orthogonality defect goes to zero.

use std::sync::Arc;

use nama::scalar::{format_scalar, ipoint, ratio, to_f64};
use nama::toric::{envelope, lattice_envelope, orthogonality_defect, sup_abs_diff, NewtonPolytope, TestFunction};

fn main() {
    let delta = NewtonPolytope::from_vertices(&[ipoint(&[0, 0]), ipoint(&[2, 0]), ipoint(&[0, 1])]).unwrap();
    let constraints = vec![
        (ipoint(&[0, 0]), ratio(0, 1)),
        (ipoint(&[3, 1]), ratio(7, 5)),
        (ipoint(&[-1, 2]), ratio(2, 3)),
    ];
    let shared = Arc::new(delta.clone());
    let branches = constraints
        .iter()
        .map(|c| envelope(&shared, std::slice::from_ref(c)).unwrap())
        .collect();
    let f = TestFunction::new(branches).unwrap();
    let exact = envelope(&delta, &constraints).unwrap();
    println!("exact envelope defect: {}", format_scalar(&orthogonality_defect(&f, &exact).unwrap()));
    for k in 0..=6 {
        let m = 1u64 << k;
        let phi = lattice_envelope(&delta, &constraints, m).unwrap();
        let defect = orthogonality_defect(&f, &phi).unwrap();
        let dist = sup_abs_diff(&exact, &phi).unwrap();
        println!("m = {m:>2}: defect {:.6}, sup |P - phi_m| {:.6}", to_f64(&defect), to_f64(&dist));
    }
}
