//! A toric potential from constraints, its Monge-Ampère measure, the
//! envelope of a two-branch test function and the energy.

use nama::scalar::{format_scalar, int, ipoint, ratio};
use nama::toric::{
    energy, energy_legendre, envelope, orthogonality_defect, psh_envelope, Evaluate, NewtonPolytope, TestFunction,
    ToricPsh,
};

fn show(name: &str, f: &ToricPsh) {
    println!("{name}:");
    for (p, w) in f.ma_measure().atoms() {
        let coords: Vec<String> = p.iter().map(format_scalar).collect();
        println!("  atom ({}) weight {}", coords.join(", "), format_scalar(w));
    }
}

fn main() {
    let square = NewtonPolytope::unit_cube(2);

    // The support function has all its mass at the origin.
    let g = ToricPsh::support_function(&square);
    show("support function", &g);

    // Largest convex function with slopes in the square below the data.
    let f = envelope(
        &square,
        &[(ipoint(&[0, 0]), int(0)), (ipoint(&[1, 0]), ratio(1, 2)), (ipoint(&[0, 1]), ratio(1, 3))],
    )
    .unwrap();
    show("envelope of three constraints", &f);
    println!("  value at (1/2, 1/2): {}", format_scalar(&f.value_at(&[ratio(1, 2), ratio(1, 2)])));

    // min of two potentials is not convex; its envelope is, and its
    // measure only charges the contact set.
    let a = envelope(&square, &[(ipoint(&[-1, 0]), int(0))]).unwrap();
    let b = envelope(&square, &[(ipoint(&[1, 1]), int(0))]).unwrap();
    let test = TestFunction::new(vec![a, b]).unwrap();
    let p = psh_envelope(&test);
    show("envelope of min(a, b)", &p);
    println!("  orthogonality defect: {}", format_scalar(&orthogonality_defect(&test, &p).unwrap()));

    let e = energy(&f, &g).unwrap();
    let l = energy_legendre(&f, &g).unwrap();
    println!("energy relative to the support function: {} (Legendre form: {})", format_scalar(&e), format_scalar(&l));
}
