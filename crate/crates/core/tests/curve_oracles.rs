use nama::curve::{
    curvature, ddc, energy_graph, green, solve_poisson, Edge, GraphFunction, GraphMeasure, Location, MetricGraph,
};
use nama::harness::{gen_graph, gen_graph_measure, rng::Rng, GenConfig};
use nama::scalar::{int, ratio, to_f64, Scalar};

/// Effective resistance between `x` and `y` from a dense float solve of
/// the weighted Laplacian, grounded at `y`.
fn resistance(g: &MetricGraph, x: usize, y: usize) -> f64 {
    let n = g.vertex_count();
    let mut l = vec![vec![0.0f64; n]; n];
    for e in g.edges() {
        let c = 1.0 / to_f64(&e.length);
        l[e.u][e.u] += c;
        l[e.v][e.v] += c;
        l[e.u][e.v] -= c;
        l[e.v][e.u] -= c;
    }
    let idx: Vec<usize> = (0..n).filter(|&v| v != y).collect();
    let mut a: Vec<Vec<f64>> = idx.iter().map(|&i| idx.iter().map(|&j| l[i][j]).collect()).collect();
    let mut b: Vec<f64> = idx.iter().map(|&i| if i == x { 1.0 } else { 0.0 }).collect();
    let m = idx.len();
    for c in 0..m {
        let piv = (c..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..m {
            let f = a[r][c] / a[c][c];
            for k in c..m {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut sol = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|k| a[r][k] * sol[k]).sum();
        sol[r] = (b[r] - s) / a[r][r];
    }
    sol[idx.iter().position(|&v| v == x).unwrap()]
}

#[test]
fn green_functions_encode_effective_resistance() {
    let mut rng = Rng::new(21);
    let cfg = GenConfig::new(21, 1);
    for _ in 0..40 {
        let g = gen_graph(&mut rng, &cfg, 12);
        let n = g.vertex_count();
        let x = rng.below(n as u64) as usize;
        let y = (x + 1) % n;
        let gxy = green(&g, x, y).unwrap();
        let drop = to_f64(&(&gxy.values[y] - &gxy.values[x]));
        let r = resistance(&g, x, y);
        assert!((drop - r).abs() < 1e-9 * r.max(1.0), "{drop} vs {r}");
    }
}

#[test]
fn poisson_solutions_superpose_green_functions() {
    // omega = delta_o and mu on vertices: phi = sum w_i g_{x_i, o} + c.
    let mut rng = Rng::new(4);
    let cfg = GenConfig::new(4, 1);
    for _ in 0..30 {
        let g = gen_graph(&mut rng, &cfg, 15);
        let o = rng.below(g.vertex_count() as u64) as usize;
        let omega = GraphMeasure::dirac(Location::Vertex(o));
        let mu = gen_graph_measure(&mut rng, &cfg, &g, &int(1), false);
        let phi = solve_poisson(&g, &omega, &mu).unwrap();
        let mut sum = GraphFunction::constant(&g, int(0));
        for (loc, w) in mu.atoms() {
            let Location::Vertex(v) = loc else { unreachable!() };
            if *v != o {
                sum = sum.linear_combination(&g, &int(1), &green(&g, *v, o).unwrap(), w);
            }
        }
        let diff = phi.linear_combination(&g, &int(1), &sum, &int(-1));
        let c = &diff.values[0];
        assert!(diff.values.iter().all(|v| v == c));
    }
}

#[test]
fn poisson_on_a_segment_matches_the_hand_solution() {
    // One edge of length 2, omega at the left end, mu at the midpoint:
    // phi falls with slope 1 up to the midpoint and is flat after it.
    let g = MetricGraph::new(2, vec![Edge { u: 0, v: 1, length: int(2) }]).unwrap();
    let omega = GraphMeasure::dirac(Location::Vertex(0));
    let mid = Location::Edge { edge: 0, pos: ratio(1, 2) };
    let mu = GraphMeasure::dirac(mid.clone());
    let phi = solve_poisson(&g, &omega, &mu).unwrap();
    assert_eq!(phi.value_at(&g, &Location::Vertex(0)), int(0));
    assert_eq!(phi.value_at(&g, &mid), int(-1));
    assert_eq!(phi.value_at(&g, &Location::Vertex(1)), int(-1));
    assert_eq!(curvature(&g, &phi, &omega).unwrap(), mu);
    // E(phi) = (1/2) int phi d(omega + mu) for one-dimensional energy.
    let e = energy_graph(&g, &phi, &omega).unwrap();
    assert_eq!(e, ratio(-1, 2));
}

#[test]
fn ddc_kills_constants_and_has_zero_mass() {
    let mut rng = Rng::new(8);
    let cfg = GenConfig::new(8, 1);
    for _ in 0..30 {
        let g = gen_graph(&mut rng, &cfg, 20);
        let c = GraphFunction::constant(&g, ratio(3, 7));
        assert_eq!(ddc(&g, &c).unwrap().total_mass(), int(0));
        assert!(ddc(&g, &c).unwrap().atoms().next().is_none());
        let vals: Vec<Scalar> = (0..g.vertex_count()).map(|_| rng.ratio(-3, 3, 5)).collect();
        let f = GraphFunction::from_vertex_values(&g, vals).unwrap();
        assert_eq!(ddc(&g, &f).unwrap().total_mass(), int(0));
    }
}

#[test]
fn invalid_graphs_are_rejected() {
    assert!(MetricGraph::new(2, vec![Edge { u: 0, v: 0, length: int(1) }]).is_err());
    assert!(MetricGraph::new(3, vec![Edge { u: 0, v: 1, length: int(1) }]).is_err());
    assert!(MetricGraph::new(2, vec![Edge { u: 0, v: 1, length: int(0) }]).is_err());
    let g = MetricGraph::new(2, vec![Edge { u: 0, v: 1, length: int(1) }]).unwrap();
    assert!(green(&g, 1, 1).is_err());
    let omega = GraphMeasure::dirac(Location::Vertex(0));
    let heavy = GraphMeasure::new([(Location::Vertex(1), int(2))]);
    assert!(solve_poisson(&g, &omega, &heavy).is_err());
}
