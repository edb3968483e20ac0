//! Prescribing the Monge-Ampère measure as a finite sum of Dirac masses.
//!
//! In dimension 1 the solution is rational and rational mode finds it
//! exactly. In dimension 2 it is usually irrational: float mode converges
//! to 1e-10, while rational mode stops once the iterates get too large and
//! reports an exact (tiny) residual.

use nama::io::export_cells;
use nama::scalar::{format_scalar, ipoint, ratio, to_f64};
use nama::solver::{normalize, solve, DiracProblem, SolverConfig, SolverError};
use nama::toric::NewtonPolytope;

fn main() {
    let interval = NewtonPolytope::from_vertices(&[ipoint(&[-1]), ipoint(&[2])]).unwrap();
    let p1 = DiracProblem::new(
        interval,
        vec![ipoint(&[0]), vec![ratio(1, 2)], ipoint(&[3])],
        vec![ratio(1, 2), ratio(2, 1), ratio(1, 2)],
    )
    .unwrap();
    let exact = normalize(&solve(&p1, &SolverConfig::rational()).unwrap());
    println!("interval: {} steps, residual {}", exact.iterations, format_scalar(&exact.residual));
    for ((x, t), w) in p1.sites().iter().zip(&exact.t).zip(p1.weights()) {
        println!("  site {} weight {} -> t = {}", format_scalar(&x[0]), format_scalar(w), format_scalar(t));
    }

    let square = NewtonPolytope::unit_cube(2);
    let p2 = DiracProblem::new(
        square,
        vec![ipoint(&[0, 0]), ipoint(&[2, 1]), ipoint(&[-1, 2])],
        vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)],
    )
    .unwrap();
    let approx = normalize(&solve(&p2, &SolverConfig::float()).unwrap());
    let t: Vec<f64> = approx.t.iter().map(to_f64).collect();
    println!("square, float: {} steps, exact residual {:e}, t = {t:?}", approx.iterations, to_f64(&approx.residual));

    match solve(&p2, &SolverConfig::rational()) {
        Ok(s) => println!("square, rational: exact after {} steps", s.iterations),
        Err(SolverError::NotConverged(s)) => {
            println!("square, rational: stopped after {} steps, residual {:e}", s.iterations, to_f64(&s.residual))
        }
        Err(e) => println!("square, rational: {e}"),
    }

    println!("Laguerre cells of the float solution:");
    print!("{}", export_cells(&approx.potential, false));
}

