//! Metric graphs: the Laplacian `dd^c`, Green functions, the Poisson
//! equation `omega + dd^c phi = mu`, and the energy in dimension one.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::linalg::Lu;
use crate::scalar::{format_scalar, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("edge {0} is a self-loop")]
    SelfLoop(usize),
    #[error("edge {0} has non-positive length")]
    NonPositiveLength(usize),
    #[error("vertex {0} does not exist")]
    VertexOutOfRange(usize),
    #[error("edge {0} does not exist")]
    EdgeOutOfRange(usize),
    #[error("edge position {0} is not strictly between 0 and 1")]
    BadPosition(String),
    #[error("the graph is not connected")]
    Disconnected,
    #[error("the graph has no vertices")]
    Empty,
    #[error("source and target coincide")]
    SameVertex,
    #[error("measures have masses {omega} and {mu}")]
    MassMismatch { omega: String, mu: String },
    #[error("input measures must be positive")]
    NegativeWeight,
    #[error("function does not match the graph")]
    ShapeMismatch,
    #[error("omega + dd^c phi is negative at {0}")]
    NotPsh(Location),
}

/// A point of the graph: a vertex or an interior point of an edge at
/// relative position `pos` (from the edge's first endpoint).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Location {
    Vertex(usize),
    Edge { edge: usize, pos: Scalar },
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Location::Vertex(v) => write!(f, "vertex {v}"),
            Location::Edge { edge, pos } => write!(f, "edge {edge} at {}", format_scalar(pos)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: Scalar,
}

/// A connected metric graph without self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricGraph {
    vertices: usize,
    edges: Vec<Edge>,
}

impl MetricGraph {
    pub fn new(vertices: usize, edges: Vec<Edge>) -> Result<Self, CurveError> {
        if vertices == 0 {
            return Err(CurveError::Empty);
        }
        for (i, e) in edges.iter().enumerate() {
            if e.u >= vertices {
                return Err(CurveError::VertexOutOfRange(e.u));
            }
            if e.v >= vertices {
                return Err(CurveError::VertexOutOfRange(e.v));
            }
            if e.u == e.v {
                return Err(CurveError::SelfLoop(i));
            }
            if !e.length.is_positive() {
                return Err(CurveError::NonPositiveLength(i));
            }
        }
        let g = MetricGraph { vertices, edges };
        if !g.is_connected() {
            return Err(CurveError::Disconnected);
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.vertices).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        (0..self.vertices).all(|v| find(&mut parent, v) == root)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    fn check_location(&self, loc: &Location) -> Result<(), CurveError> {
        match loc {
            Location::Vertex(v) if *v >= self.vertices => Err(CurveError::VertexOutOfRange(*v)),
            Location::Edge { edge, .. } if *edge >= self.edges.len() => Err(CurveError::EdgeOutOfRange(*edge)),
            Location::Edge { pos, .. } if !pos.is_positive() || *pos >= Scalar::one() => {
                Err(CurveError::BadPosition(format_scalar(pos)))
            }
            _ => Ok(()),
        }
    }

    /// Weighted Laplacian with edge weights `1/length`; `(L f)(v)` is the
    /// sum of outgoing slopes of the linear interpolant at `v`.
    fn laplacian(&self) -> Vec<Vec<Scalar>> {
        let n = self.vertices;
        let mut l = vec![vec![Scalar::zero(); n]; n];
        for e in &self.edges {
            let w = Scalar::one() / &e.length;
            l[e.u][e.v] += &w;
            l[e.v][e.u] += &w;
            l[e.u][e.u] -= &w;
            l[e.v][e.v] -= &w;
        }
        l
    }
}

/// Continuous function, affine in arc length between consecutive knots.
/// `breakpoints[e]` holds interior knots `(pos, value)` of edge `e`,
/// sorted by position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphFunction {
    pub values: Vec<Scalar>,
    pub breakpoints: Vec<Vec<(Scalar, Scalar)>>,
}

impl GraphFunction {
    pub fn from_vertex_values(g: &MetricGraph, values: Vec<Scalar>) -> Result<Self, CurveError> {
        if values.len() != g.vertex_count() {
            return Err(CurveError::ShapeMismatch);
        }
        Ok(GraphFunction {
            values,
            breakpoints: vec![Vec::new(); g.edges().len()],
        })
    }

    pub fn constant(g: &MetricGraph, c: Scalar) -> Self {
        GraphFunction {
            values: vec![c; g.vertex_count()],
            breakpoints: vec![Vec::new(); g.edges().len()],
        }
    }

    pub fn check(&self, g: &MetricGraph) -> Result<(), CurveError> {
        if self.values.len() != g.vertex_count() || self.breakpoints.len() != g.edges().len() {
            return Err(CurveError::ShapeMismatch);
        }
        for bps in &self.breakpoints {
            let mut prev = Scalar::zero();
            for (p, _) in bps {
                if *p <= prev || *p >= Scalar::one() {
                    return Err(CurveError::BadPosition(format_scalar(p)));
                }
                prev = p.clone();
            }
        }
        Ok(())
    }

    /// Knots of edge `e` as `(pos, value)`, endpoints included.
    fn edge_knots(&self, g: &MetricGraph, e: usize) -> Vec<(Scalar, Scalar)> {
        let edge = &g.edges()[e];
        let mut k = Vec::with_capacity(self.breakpoints[e].len() + 2);
        k.push((Scalar::zero(), self.values[edge.u].clone()));
        k.extend(self.breakpoints[e].iter().cloned());
        k.push((Scalar::one(), self.values[edge.v].clone()));
        k
    }

    pub fn value_at(&self, g: &MetricGraph, loc: &Location) -> Scalar {
        match loc {
            Location::Vertex(v) => self.values[*v].clone(),
            Location::Edge { edge, pos } => {
                let knots = self.edge_knots(g, *edge);
                for w in knots.windows(2) {
                    let ((p0, v0), (p1, v1)) = (&w[0], &w[1]);
                    if pos <= p1 {
                        return v0 + (v1 - v0) * (pos - p0) / (p1 - p0);
                    }
                }
                unreachable!("position inside (0, 1)")
            }
        }
    }

    /// Vertices and all interior knots.
    pub fn knots(&self) -> Vec<Location> {
        let mut out: Vec<Location> = (0..self.values.len()).map(Location::Vertex).collect();
        for (e, bps) in self.breakpoints.iter().enumerate() {
            out.extend(bps.iter().map(|(p, _)| Location::Edge {
                edge: e,
                pos: p.clone(),
            }));
        }
        out
    }

    pub fn shift(&self, c: &Scalar) -> GraphFunction {
        GraphFunction {
            values: self.values.iter().map(|v| v + c).collect(),
            breakpoints: self
                .breakpoints
                .iter()
                .map(|b| b.iter().map(|(p, v)| (p.clone(), v + c)).collect())
                .collect(),
        }
    }

    /// `a * self + b * other`, on the union of knots.
    pub fn linear_combination(&self, g: &MetricGraph, a: &Scalar, other: &GraphFunction, b: &Scalar) -> GraphFunction {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let breakpoints = (0..g.edges().len())
            .map(|e| {
                let mut pos: Vec<Scalar> = self.breakpoints[e]
                    .iter()
                    .chain(&other.breakpoints[e])
                    .map(|(p, _)| p.clone())
                    .collect();
                pos.sort();
                pos.dedup();
                pos.into_iter()
                    .map(|p| {
                        let loc = Location::Edge { edge: e, pos: p.clone() };
                        let v = a * self.value_at(g, &loc) + b * other.value_at(g, &loc);
                        (p, v)
                    })
                    .collect()
            })
            .collect();
        GraphFunction { values, breakpoints }
    }

    /// Pointwise maximum, adding knots where the two functions cross.
    pub fn max(&self, g: &MetricGraph, other: &GraphFunction) -> GraphFunction {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| if x >= y { x.clone() } else { y.clone() })
            .collect();
        let breakpoints = (0..g.edges().len())
            .map(|e| {
                let mut pos: Vec<Scalar> = self.breakpoints[e]
                    .iter()
                    .chain(&other.breakpoints[e])
                    .map(|(p, _)| p.clone())
                    .collect();
                pos.push(Scalar::zero());
                pos.push(Scalar::one());
                pos.sort();
                pos.dedup();
                let at = |f: &GraphFunction, p: &Scalar| -> Scalar {
                    let edge = &g.edges()[e];
                    if p.is_zero() {
                        f.values[edge.u].clone()
                    } else if p.is_one() {
                        f.values[edge.v].clone()
                    } else {
                        f.value_at(g, &Location::Edge { edge: e, pos: p.clone() })
                    }
                };
                let mut out: Vec<(Scalar, Scalar)> = Vec::new();
                for w in pos.windows(2) {
                    let (p0, p1) = (&w[0], &w[1]);
                    let d0 = at(self, p0) - at(other, p0);
                    let d1 = at(self, p1) - at(other, p1);
                    if !p0.is_zero() {
                        let v = std::cmp::max(at(self, p0), at(other, p0));
                        out.push((p0.clone(), v));
                    }
                    if (d0.is_positive() && d1.is_negative()) || (d0.is_negative() && d1.is_positive()) {
                        let s = &d0 / (&d0 - &d1);
                        let p = p0 + (p1 - p0) * s;
                        let v = at(self, &p);
                        out.push((p, v));
                    }
                }
                out
            })
            .collect();
        GraphFunction { values, breakpoints }
    }
}

/// Atoms at vertices and at interior edge points. Weights may have any
/// sign (output of `dd^c`); inputs to the Poisson solver must be positive.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GraphMeasure {
    atoms: BTreeMap<Location, Scalar>,
}

impl GraphMeasure {
    pub fn new(atoms: impl IntoIterator<Item = (Location, Scalar)>) -> Self {
        let mut m = GraphMeasure::default();
        for (loc, w) in atoms {
            m.add(loc, w);
        }
        m
    }

    pub fn dirac(loc: Location) -> Self {
        GraphMeasure::new([(loc, Scalar::one())])
    }

    pub fn add(&mut self, loc: Location, w: Scalar) {
        let entry = self.atoms.entry(loc.clone()).or_insert_with(Scalar::zero);
        *entry += w;
        if entry.is_zero() {
            self.atoms.remove(&loc);
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Location, &Scalar)> {
        self.atoms.iter()
    }

    pub fn weight_at(&self, loc: &Location) -> Scalar {
        self.atoms.get(loc).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn total_mass(&self) -> Scalar {
        self.atoms.values().sum()
    }

    pub fn is_positive(&self) -> bool {
        self.atoms.values().all(|w| w.is_positive())
    }

    pub fn plus(&self, other: &GraphMeasure) -> GraphMeasure {
        let mut out = self.clone();
        for (l, w) in other.atoms() {
            out.add(l.clone(), w.clone());
        }
        out
    }

    pub fn minus(&self, other: &GraphMeasure) -> GraphMeasure {
        let mut out = self.clone();
        for (l, w) in other.atoms() {
            out.add(l.clone(), -w);
        }
        out
    }

    pub fn integrate(&self, g: &MetricGraph, f: &GraphFunction) -> Scalar {
        self.atoms.iter().map(|(l, w)| f.value_at(g, l) * w).sum()
    }

    fn check(&self, g: &MetricGraph) -> Result<(), CurveError> {
        for l in self.atoms.keys() {
            g.check_location(l)?;
        }
        Ok(())
    }
}

/// `dd^c f`: at every knot, the sum of outgoing slopes.
pub fn ddc(g: &MetricGraph, f: &GraphFunction) -> Result<GraphMeasure, CurveError> {
    f.check(g)?;
    let mut out = GraphMeasure::default();
    for (e, edge) in g.edges().iter().enumerate() {
        let knots = f.edge_knots(g, e);
        let slopes: Vec<Scalar> = knots
            .windows(2)
            .map(|w| (&w[1].1 - &w[0].1) / ((&w[1].0 - &w[0].0) * &edge.length))
            .collect();
        out.add(Location::Vertex(edge.u), slopes[0].clone());
        out.add(Location::Vertex(edge.v), -slopes[slopes.len() - 1].clone());
        for (k, (p, _)) in f.breakpoints[e].iter().enumerate() {
            out.add(
                Location::Edge { edge: e, pos: p.clone() },
                &slopes[k + 1] - &slopes[k],
            );
        }
    }
    Ok(out)
}

/// The graph with every edge-interior atom location turned into a vertex.
struct Subdivision {
    graph: MetricGraph,
    /// For each original edge, the inserted `(pos, vertex)` in order.
    inserted: Vec<Vec<(Scalar, usize)>>,
}

impl Subdivision {
    fn new(g: &MetricGraph, locations: impl IntoIterator<Item = Location>) -> Self {
        let mut per_edge: Vec<Vec<Scalar>> = vec![Vec::new(); g.edges().len()];
        for loc in locations {
            if let Location::Edge { edge, pos } = loc {
                per_edge[edge].push(pos);
            }
        }
        let mut n = g.vertex_count();
        let mut edges = Vec::new();
        let mut inserted = Vec::with_capacity(per_edge.len());
        for (e, mut pos) in per_edge.into_iter().enumerate() {
            pos.sort();
            pos.dedup();
            let orig = &g.edges()[e];
            let mut prev = (Scalar::zero(), orig.u);
            let mut ins = Vec::new();
            for p in pos {
                let id = n;
                n += 1;
                edges.push(Edge {
                    u: prev.1,
                    v: id,
                    length: (&p - &prev.0) * &orig.length,
                });
                ins.push((p.clone(), id));
                prev = (p, id);
            }
            edges.push(Edge {
                u: prev.1,
                v: orig.v,
                length: (Scalar::one() - &prev.0) * &orig.length,
            });
            inserted.push(ins);
        }
        Subdivision {
            graph: MetricGraph { vertices: n, edges },
            inserted,
        }
    }

    fn vertex_of(&self, loc: &Location) -> usize {
        match loc {
            Location::Vertex(v) => *v,
            Location::Edge { edge, pos } => {
                self.inserted[*edge]
                    .iter()
                    .find(|(p, _)| p == pos)
                    .expect("location was inserted")
                    .1
            }
        }
    }

    fn lift(&self, original_vertices: usize, values: &[Scalar]) -> GraphFunction {
        GraphFunction {
            values: values[..original_vertices].to_vec(),
            breakpoints: self
                .inserted
                .iter()
                .map(|ins| ins.iter().map(|(p, id)| (p.clone(), values[*id].clone())).collect())
                .collect(),
        }
    }
}

/// Factored Laplacian with one vertex grounded at value 0.
pub struct GroundedLaplacian {
    n: usize,
    ground: usize,
    lu: Lu<Scalar>,
}

impl GroundedLaplacian {
    pub fn new(g: &MetricGraph, ground: usize) -> Result<Self, CurveError> {
        if ground >= g.vertex_count() {
            return Err(CurveError::VertexOutOfRange(ground));
        }
        let l = g.laplacian();
        let keep: Vec<usize> = (0..g.vertex_count()).filter(|&v| v != ground).collect();
        let reduced: Vec<Vec<Scalar>> = keep
            .iter()
            .map(|&i| keep.iter().map(|&j| l[i][j].clone()).collect())
            .collect();
        let lu = if reduced.is_empty() {
            Lu::factor(Vec::new()).expect("empty system")
        } else {
            Lu::factor(reduced).ok_or(CurveError::Disconnected)?
        };
        Ok(GroundedLaplacian {
            n: g.vertex_count(),
            ground,
            lu,
        })
    }

    /// Solves `L f = rhs` (which must sum to zero) with `f(ground) = 0`.
    pub fn solve(&self, rhs: &[Scalar]) -> Vec<Scalar> {
        let b: Vec<Scalar> = (0..self.n).filter(|&v| v != self.ground).map(|v| rhs[v].clone()).collect();
        let x = self.lu.solve(&b);
        let mut out = Vec::with_capacity(self.n);
        let mut it = x.into_iter();
        for v in 0..self.n {
            out.push(if v == self.ground {
                Scalar::zero()
            } else {
                it.next().expect("one value per vertex")
            });
        }
        out
    }
}

/// `g` with `dd^c g = delta_x - delta_y` and `g(y) = 0`.
pub fn green(g: &MetricGraph, x: usize, y: usize) -> Result<GraphFunction, CurveError> {
    let lap = GroundedLaplacian::new(g, y)?;
    green_with(g, &lap, x, y)
}

/// Green function reusing a factorization (grounded anywhere).
pub fn green_with(g: &MetricGraph, lap: &GroundedLaplacian, x: usize, y: usize) -> Result<GraphFunction, CurveError> {
    for v in [x, y] {
        if v >= g.vertex_count() {
            return Err(CurveError::VertexOutOfRange(v));
        }
    }
    if x == y {
        return Err(CurveError::SameVertex);
    }
    let mut rhs = vec![Scalar::zero(); g.vertex_count()];
    rhs[x] += Scalar::one();
    rhs[y] -= Scalar::one();
    let values = lap.solve(&rhs);
    let c = -values[y].clone();
    Ok(GraphFunction::from_vertex_values(g, values)?.shift(&c))
}

fn check_poisson_inputs(g: &MetricGraph, omega: &GraphMeasure, mu: &GraphMeasure) -> Result<(), CurveError> {
    omega.check(g)?;
    mu.check(g)?;
    if !omega.is_positive() || !mu.is_positive() {
        return Err(CurveError::NegativeWeight);
    }
    let (a, b) = (omega.total_mass(), mu.total_mass());
    if a != b || !a.is_positive() {
        return Err(CurveError::MassMismatch {
            omega: format_scalar(&a),
            mu: format_scalar(&b),
        });
    }
    Ok(())
}

/// `phi` with `omega + dd^c phi = mu` and maximum 0.
pub fn solve_poisson(g: &MetricGraph, omega: &GraphMeasure, mu: &GraphMeasure) -> Result<GraphFunction, CurveError> {
    solve_poisson_grounded(g, omega, mu, 0)
}

/// As [`solve_poisson`], eliminating the given (original) vertex.
pub fn solve_poisson_grounded(
    g: &MetricGraph,
    omega: &GraphMeasure,
    mu: &GraphMeasure,
    ground: usize,
) -> Result<GraphFunction, CurveError> {
    check_poisson_inputs(g, omega, mu)?;
    if ground >= g.vertex_count() {
        return Err(CurveError::VertexOutOfRange(ground));
    }
    let locs = omega.atoms().chain(mu.atoms()).map(|(l, _)| l.clone());
    let sub = Subdivision::new(g, locs);
    let lap = GroundedLaplacian::new(&sub.graph, ground)?;
    let mut rhs = vec![Scalar::zero(); sub.graph.vertex_count()];
    for (l, w) in mu.atoms() {
        rhs[sub.vertex_of(l)] += w;
    }
    for (l, w) in omega.atoms() {
        rhs[sub.vertex_of(l)] -= w;
    }
    let values = lap.solve(&rhs);
    let top = values.iter().max().expect("vertices").clone();
    Ok(sub.lift(g.vertex_count(), &values).shift(&-top))
}

/// `omega + dd^c phi`, after checking it is nonnegative.
pub fn curvature(g: &MetricGraph, phi: &GraphFunction, omega: &GraphMeasure) -> Result<GraphMeasure, CurveError> {
    omega.check(g)?;
    let m = omega.plus(&ddc(g, phi)?);
    if let Some((l, _)) = m.atoms().find(|(_, w)| w.is_negative()) {
        return Err(CurveError::NotPsh(l.clone()));
    }
    Ok(m)
}

/// `E(phi) = (\int phi omega + \int phi (omega + dd^c phi)) / 2`.
pub fn energy_graph(g: &MetricGraph, phi: &GraphFunction, omega: &GraphMeasure) -> Result<Scalar, CurveError> {
    let curv = curvature(g, phi, omega)?;
    Ok((omega.integrate(g, phi) + curv.integrate(g, phi)) / Scalar::from_integer(2.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn path() -> MetricGraph {
        MetricGraph::new(2, vec![Edge { u: 0, v: 1, length: int(1) }]).unwrap()
    }

    #[test]
    fn two_vertex_slopes() {
        let g = path();
        let f = GraphFunction::from_vertex_values(&g, vec![int(0), int(-1)]).unwrap();
        let m = ddc(&g, &f).unwrap();
        assert_eq!(m.weight_at(&Location::Vertex(0)), int(-1));
        assert_eq!(m.weight_at(&Location::Vertex(1)), int(1));
    }

    #[test]
    fn green_round_trip_on_a_path() {
        let g = path();
        let gr = green(&g, 1, 0).unwrap();
        assert_eq!(gr.values, vec![int(0), int(-1)]);
        let m = ddc(&g, &gr).unwrap();
        assert_eq!(m, GraphMeasure::new([(Location::Vertex(1), int(1)), (Location::Vertex(0), int(-1))]));
        assert_eq!(green(&g, 0, 0), Err(CurveError::SameVertex));
    }

    #[test]
    fn poisson_with_an_edge_atom() {
        let g = MetricGraph::new(2, vec![Edge { u: 0, v: 1, length: int(2) }]).unwrap();
        let omega = GraphMeasure::new([(Location::Vertex(0), ratio(1, 2)), (Location::Vertex(1), ratio(1, 2))]);
        let mid = Location::Edge { edge: 0, pos: ratio(1, 2) };
        let mu = GraphMeasure::dirac(mid.clone());
        let phi = solve_poisson(&g, &omega, &mu).unwrap();
        assert_eq!(omega.plus(&ddc(&g, &phi).unwrap()), mu);
        assert_eq!(phi.value_at(&g, &mid), ratio(-1, 2));
        assert_eq!(phi.values, vec![int(0), int(0)]);
    }

    #[test]
    fn disconnected_and_self_loops_are_rejected() {
        assert_eq!(
            MetricGraph::new(3, vec![Edge { u: 0, v: 1, length: int(1) }]),
            Err(CurveError::Disconnected)
        );
        assert_eq!(
            MetricGraph::new(1, vec![Edge { u: 0, v: 0, length: int(1) }]),
            Err(CurveError::SelfLoop(0))
        );
    }

    #[test]
    fn max_adds_the_crossing() {
        let g = path();
        let f = GraphFunction::from_vertex_values(&g, vec![int(0), int(1)]).unwrap();
        let h = GraphFunction::from_vertex_values(&g, vec![int(1), int(0)]).unwrap();
        let m = f.max(&g, &h);
        assert_eq!(m.breakpoints[0], vec![(ratio(1, 2), ratio(1, 2))]);
    }
}
