//! Potential theory on a metric graph: a Green function, a Poisson
//! solution and the energy functional it maximizes.

use nama::curve::{curvature, ddc, energy_graph, green, solve_poisson, Edge, GraphMeasure, Location, MetricGraph};
use nama::scalar::{format_scalar, int, ratio};

fn main() {
    // A triangle with a pendant edge.
    let edges = vec![
        Edge { u: 0, v: 1, length: int(1) },
        Edge { u: 1, v: 2, length: ratio(1, 2) },
        Edge { u: 2, v: 0, length: int(2) },
        Edge { u: 2, v: 3, length: ratio(3, 2) },
    ];
    let g = MetricGraph::new(4, edges).unwrap();

    let gxy = green(&g, 0, 3).unwrap();
    let vals: Vec<String> = gxy.values.iter().map(format_scalar).collect();
    println!("green(0, 3) at the vertices: [{}]", vals.join(", "));
    for (loc, w) in ddc(&g, &gxy).unwrap().atoms() {
        println!("  dd^c green: {loc} -> {}", format_scalar(w));
    }

    // omega: unit mass at vertex 0; mu: half at vertex 3, half inside
    // edge 1.
    let omega = GraphMeasure::dirac(Location::Vertex(0));
    let mu = GraphMeasure::new([
        (Location::Vertex(3), ratio(1, 2)),
        (Location::Edge { edge: 1, pos: ratio(1, 3) }, ratio(1, 2)),
    ]);
    let phi = solve_poisson(&g, &omega, &mu).unwrap();
    let vals: Vec<String> = phi.values.iter().map(format_scalar).collect();
    println!("poisson solution at the vertices: [{}]", vals.join(", "));
    println!("curvature equals mu: {}", curvature(&g, &phi, &omega).unwrap() == mu);
    let e = energy_graph(&g, &phi, &omega).unwrap();
    println!("E(phi) = {}, E(phi) - int phi dmu = {}", format_scalar(&e), format_scalar(&(&e - mu.integrate(&g, &phi))));
}
