use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::rng::Rng;
use super::HarnessError;
use crate::curve::{Edge, GraphMeasure, Location, MetricGraph};
use crate::polyhedra::hull;
use crate::scalar::{int, sub_points, Point, Scalar};
use crate::solver::DiracProblem;
use crate::toric::{envelope_in, AtomicMeasure, NewtonPolytope, TestFunction, ToricPsh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    pub dimension: usize,
    /// Maximum vertex count of generated polytopes.
    pub polytope_complexity: usize,
    /// Maximum generator count of generated potentials.
    pub function_complexity: usize,
    /// Maximum numerator and denominator magnitude of coefficients.
    pub coefficient_bound: u64,
}

impl GenConfig {
    pub fn new(seed: u64, dimension: usize) -> GenConfig {
        GenConfig {
            seed,
            dimension,
            polytope_complexity: 6,
            function_complexity: 5,
            coefficient_bound: 6,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(1..=2).contains(&self.dimension) {
            return Err(HarnessError::InvalidConfig(format!("dimension {} is not 1 or 2", self.dimension)));
        }
        if self.polytope_complexity < 1 || self.function_complexity < 1 || self.coefficient_bound < 1 {
            return Err(HarnessError::InvalidConfig("all bounds must be at least 1".into()));
        }
        Ok(())
    }

    pub fn rng(&self) -> Rng {
        Rng::new(self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToricInstance {
    pub delta: NewtonPolytope,
    pub potentials: Vec<ToricPsh>,
    pub test_functions: Vec<TestFunction>,
    /// Positive atoms of total mass `vol(delta)`.
    pub measure: AtomicMeasure,
}

/// Two potentials, two test functions and a measure over one polytope.
pub fn gen_toric_instance(cfg: &GenConfig) -> ToricInstance {
    let mut rng = cfg.rng();
    let delta = Arc::new(gen_polytope(&mut rng, cfg));
    let potentials = (0..2).map(|_| gen_potential(&mut rng, cfg, &delta)).collect();
    let test_functions = (0..2).map(|_| gen_test_function(&mut rng, cfg, &delta)).collect();
    let measure = gen_measure(&mut rng, cfg, &delta);
    ToricInstance {
        delta: (*delta).clone(),
        potentials,
        test_functions,
        measure,
    }
}

/// Coordinate in `[-half_side, half_side]`.
fn coord(rng: &mut Rng, cfg: &GenConfig, half_side: i64) -> Scalar {
    rng.ratio(-half_side, half_side, cfg.coefficient_bound)
}

pub fn gen_point(rng: &mut Rng, cfg: &GenConfig, dim: usize) -> Point {
    (0..dim).map(|_| coord(rng, cfg, 2)).collect()
}

pub fn gen_polytope(rng: &mut Rng, cfg: &GenConfig) -> NewtonPolytope {
    let b = cfg.coefficient_bound;
    if cfg.dimension == 1 {
        let lo = rng.ratio(-1, 0, b);
        let width = rng.ratio(0, 2, b);
        let width = if width.is_zero() { Scalar::one() } else { width };
        return NewtonPolytope::from_vertices(&[vec![lo.clone()], vec![lo + width]]).expect("interval");
    }
    match rng.below(4) {
        0 => return NewtonPolytope::unit_cube(2),
        1 => return NewtonPolytope::standard_simplex(2),
        _ => {}
    }
    let max_k = cfg.polytope_complexity.max(3) as i64;
    for _ in 0..32 {
        let k = rng.range(3, max_k);
        let pts: Vec<Point> = (0..k).map(|_| vec![rng.ratio(-1, 1, b), rng.ratio(-1, 1, b)]).collect();
        if let Ok(body) = hull(&pts, 2) {
            if let Ok(delta) = NewtonPolytope::new(body) {
                return delta;
            }
        }
    }
    NewtonPolytope::standard_simplex(2)
}

/// Polytope with integer vertices.
pub fn gen_lattice_polytope(rng: &mut Rng, cfg: &GenConfig) -> NewtonPolytope {
    if cfg.dimension == 1 {
        let lo = rng.range(-1, 0);
        let hi = lo + rng.range(1, 2);
        return NewtonPolytope::from_vertices(&[vec![int(lo)], vec![int(hi)]]).expect("interval");
    }
    let max_k = cfg.polytope_complexity.max(3) as i64;
    for _ in 0..32 {
        let k = rng.range(3, max_k);
        let pts: Vec<Point> = (0..k).map(|_| vec![int(rng.range(-1, 1)), int(rng.range(-1, 1))]).collect();
        if let Ok(body) = hull(&pts, 2) {
            if let Ok(delta) = NewtonPolytope::new(body) {
                return delta;
            }
        }
    }
    NewtonPolytope::unit_cube(2)
}

/// Constraints `(x_a, g(x_a - z) + noise)` with sites in a box of side 4.
pub fn gen_constraints(rng: &mut Rng, cfg: &GenConfig, delta: &NewtonPolytope) -> Vec<(Point, Scalar)> {
    let dim = delta.dim();
    let k = rng.range(1, cfg.function_complexity as i64);
    let z = gen_point(rng, cfg, dim);
    (0..k)
        .map(|_| {
            let x = gen_point(rng, cfg, dim);
            let noise = rng.ratio(-1, 1, cfg.coefficient_bound) / int(2);
            let t = delta.body().support(&sub_points(&x, &z)) + noise;
            (x, t)
        })
        .collect()
}

pub fn gen_potential(rng: &mut Rng, cfg: &GenConfig, delta: &Arc<NewtonPolytope>) -> ToricPsh {
    let c = gen_constraints(rng, cfg, delta);
    envelope_in(delta.clone(), &c).expect("nonempty constraints")
}

pub fn gen_test_function(rng: &mut Rng, cfg: &GenConfig, delta: &Arc<NewtonPolytope>) -> TestFunction {
    let k = rng.range(1, 3);
    TestFunction::new((0..k).map(|_| gen_potential(rng, cfg, delta)).collect()).expect("shared polytope")
}

/// Distinct sites and positive integer proportions scaled to `total`.
fn gen_sites_weights(rng: &mut Rng, cfg: &GenConfig, dim: usize, k: usize, total: &Scalar) -> (Vec<Point>, Vec<Scalar>) {
    let mut sites: Vec<Point> = Vec::new();
    let mut tries = 0;
    while sites.len() < k && tries < 50 * k {
        let x = gen_point(rng, cfg, dim);
        if !sites.contains(&x) {
            sites.push(x);
        }
        tries += 1;
    }
    let parts: Vec<i64> = sites.iter().map(|_| rng.range(1, cfg.coefficient_bound as i64)).collect();
    let sum: i64 = parts.iter().sum();
    let weights = parts
        .iter()
        .map(|a| total * Scalar::new(BigInt::from(*a), BigInt::from(sum)))
        .collect();
    (sites, weights)
}

pub fn gen_measure(rng: &mut Rng, cfg: &GenConfig, delta: &NewtonPolytope) -> AtomicMeasure {
    let k = rng.range(1, cfg.function_complexity as i64) as usize;
    let (sites, weights) = gen_sites_weights(rng, cfg, delta.dim(), k, delta.volume());
    AtomicMeasure::new(sites.into_iter().zip(weights)).expect("positive weights")
}

pub fn gen_dirac_problem(rng: &mut Rng, cfg: &GenConfig, delta: &NewtonPolytope, max_sites: usize) -> DiracProblem {
    let k = rng.range(1, max_sites.max(1) as i64) as usize;
    let (sites, weights) = gen_sites_weights(rng, cfg, delta.dim(), k, delta.volume());
    DiracProblem::new(delta.clone(), sites, weights).expect("distinct sites, positive weights")
}

/// Connected graph: a random spanning tree plus a few extra edges,
/// possibly parallel.
pub fn gen_graph(rng: &mut Rng, cfg: &GenConfig, max_vertices: usize) -> MetricGraph {
    let n = rng.range(2, max_vertices.max(2) as i64) as usize;
    let b = cfg.coefficient_bound;
    let length = |rng: &mut Rng| {
        let l = rng.ratio(0, 2, b);
        if l.is_zero() {
            Scalar::one()
        } else {
            l
        }
    };
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.below(v as u64) as usize;
        edges.push(Edge { u, v, length: length(rng) });
    }
    for _ in 0..rng.below(n as u64 / 2 + 1) {
        let u = rng.below(n as u64) as usize;
        let v = rng.below(n as u64) as usize;
        if u != v {
            edges.push(Edge { u, v, length: length(rng) });
        }
    }
    MetricGraph::new(n, edges).expect("spanning tree")
}

/// Positive measure of total mass `mass`; interior edge atoms only when
/// `edge_atoms` is set.
pub fn gen_graph_measure(rng: &mut Rng, cfg: &GenConfig, g: &MetricGraph, mass: &Scalar, edge_atoms: bool) -> GraphMeasure {
    let k = rng.range(1, 4);
    let mut atoms: Vec<(Location, i64)> = Vec::new();
    for _ in 0..k {
        let loc = if edge_atoms && !g.edges().is_empty() && rng.chance(1, 2) {
            let q = rng.range(2, cfg.coefficient_bound.max(2) as i64);
            let p = rng.range(1, q - 1);
            Location::Edge {
                edge: rng.below(g.edges().len() as u64) as usize,
                pos: Scalar::new(BigInt::from(p), BigInt::from(q)),
            }
        } else {
            Location::Vertex(rng.below(g.vertex_count() as u64) as usize)
        };
        atoms.push((loc, rng.range(1, cfg.coefficient_bound as i64)));
    }
    let sum: i64 = atoms.iter().map(|(_, a)| a).sum();
    GraphMeasure::new(
        atoms
            .into_iter()
            .map(|(l, a)| (l, mass * Scalar::new(BigInt::from(a), BigInt::from(sum)))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instance() {
        for dim in [1, 2] {
            let cfg = GenConfig::new(42, dim);
            assert_eq!(gen_toric_instance(&cfg), gen_toric_instance(&cfg));
        }
    }

    #[test]
    fn bounds_are_respected() {
        let mut cfg = GenConfig::new(3, 1);
        cfg.function_complexity = 2;
        for seed in 0..50 {
            cfg.seed = seed;
            let inst = gen_toric_instance(&cfg);
            assert_eq!(inst.delta.dim(), 1);
            for f in &inst.potentials {
                assert!(f.generators().len() <= 2);
            }
            assert_eq!(&inst.measure.total_mass(), inst.delta.volume());
        }
    }
}
