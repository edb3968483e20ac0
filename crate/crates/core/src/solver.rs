//! Variational solver for `MA(phi) = sum_i w_i delta_{x_i}` over a Newton
//! polytope.
//!
//! The unknown is the vector `t` of values at the sites; the potential is
//! `envelope(sites, t)`. We maximize the concave dual objective
//! `F(t) = E(envelope(t), ref) - sum_i w_i t_i`, whose gradient is
//! `H_i(t) - w_i` with `H_i` the Laguerre cell volumes.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::linalg::solve_dense;
use crate::polyhedra::planar;
use crate::scalar::{factorial, from_f64, ratio, scale_point, Field, Point, Scalar};
use crate::toric::laguerre::{face_coupling, laguerre_cells};
use crate::toric::{
    energy, energy_legendre, envelope, AtomicMeasure, NewtonPolytope, ToricError, ToricPsh,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("weights sum to {total} but the polytope has volume {volume}")]
    MassMismatch { total: Scalar, volume: Scalar },
    #[error("no convergence after {} iterations (residual {})", .0.iterations, .0.residual)]
    NotConverged(Box<Solution>),
    #[error("expected {expected} values, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("site {0} appears twice")]
    DuplicateSite(usize),
    #[error("weight {0} is not positive")]
    NonPositiveWeight(usize),
    #[error("the two energy formulas disagree: {0} vs {1}")]
    EnergyMismatch(Scalar, Scalar),
    #[error(transparent)]
    Toric(#[from] ToricError),
}

/// Target measure `sum_i w_i delta_{x_i}` over `delta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiracProblem {
    delta: Arc<NewtonPolytope>,
    sites: Vec<Point>,
    weights: Vec<Scalar>,
}

impl DiracProblem {
    /// Checks shapes, distinct sites and positive weights. The mass
    /// balance is checked by [`DiracProblem::check_mass`] and by `solve`.
    pub fn new(delta: NewtonPolytope, sites: Vec<Point>, weights: Vec<Scalar>) -> Result<Self, SolverError> {
        if sites.len() != weights.len() {
            return Err(SolverError::ArityMismatch {
                expected: sites.len(),
                found: weights.len(),
            });
        }
        if sites.is_empty() {
            return Err(SolverError::ArityMismatch { expected: 1, found: 0 });
        }
        for (i, x) in sites.iter().enumerate() {
            delta.check_point(x)?;
            if sites[..i].contains(x) {
                return Err(SolverError::DuplicateSite(i));
            }
        }
        if let Some(i) = weights.iter().position(|w| !w.is_positive()) {
            return Err(SolverError::NonPositiveWeight(i));
        }
        Ok(DiracProblem {
            delta: Arc::new(delta),
            sites,
            weights,
        })
    }

    pub fn delta(&self) -> &NewtonPolytope {
        &self.delta
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn weights(&self) -> &[Scalar] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn check_mass(&self) -> Result<(), SolverError> {
        let total: Scalar = self.weights.iter().sum();
        if &total != self.delta.volume() {
            return Err(SolverError::MassMismatch {
                total,
                volume: self.delta.volume().clone(),
            });
        }
        Ok(())
    }

    /// Weighted barycenter of the sites.
    pub fn barycenter(&self) -> Point {
        let total: Scalar = self.weights.iter().sum();
        let mut acc = vec![Scalar::zero(); self.delta.dim()];
        for (x, w) in self.sites.iter().zip(&self.weights) {
            for (a, c) in acc.iter_mut().zip(x) {
                *a += c * w;
            }
        }
        scale_point(&acc, &(Scalar::one() / total))
    }

    /// Reference potential: the envelope of `(barycenter, 0)`.
    pub fn reference(&self) -> ToricPsh {
        envelope(&self.delta, &[(self.barycenter(), Scalar::zero())]).expect("one constraint")
    }

    /// `t_i = g(x_i - barycenter)`.
    pub fn initial_t(&self) -> Vec<Scalar> {
        let c = self.barycenter();
        self.sites
            .iter()
            .map(|x| self.delta.body().support(&crate::scalar::sub_points(x, &c)))
            .collect()
    }

    pub fn potential(&self, t: &[Scalar]) -> Result<ToricPsh, SolverError> {
        self.check_arity(t.len())?;
        let constraints: Vec<(Point, Scalar)> = self.sites.iter().cloned().zip(t.iter().cloned()).collect();
        Ok(envelope(&self.delta, &constraints)?)
    }

    fn check_arity(&self, found: usize) -> Result<(), SolverError> {
        if found != self.sites.len() {
            return Err(SolverError::ArityMismatch {
                expected: self.sites.len(),
                found,
            });
        }
        Ok(())
    }

    fn geometry<F: Field>(&self) -> Geometry<F> {
        let c = self.barycenter();
        let ref_integral = crate::scalar::dot(&c, &self.delta.body().moment());
        let conv = |p: &Point| p.iter().map(F::from_scalar).collect::<Vec<F>>();
        Geometry {
            dim: self.delta.dim(),
            delta: self.delta.vertices().iter().map(conv).collect(),
            sites: self.sites.iter().map(conv).collect(),
            weights: self.weights.iter().map(F::from_scalar).collect(),
            ref_integral: F::from_scalar(&ref_integral),
            volume: F::from_scalar(self.delta.volume()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Rational,
    Float,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Rational => "rational",
            Mode::Float => "float",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Stop when `max_i |H_i - w_i| <= tol * vol(delta)`.
    pub tol: Scalar,
    pub max_iter: usize,
    /// Initial step length of the line search, in `(0, 1]`.
    pub damping: Scalar,
    pub mode: Mode,
    pub initial_t: Option<Vec<Scalar>>,
}

impl SolverConfig {
    pub fn float() -> Self {
        SolverConfig {
            tol: ratio(1, 10_000_000_000),
            max_iter: 10_000,
            damping: Scalar::one(),
            mode: Mode::Float,
            initial_t: None,
        }
    }

    pub fn rational() -> Self {
        SolverConfig {
            tol: Scalar::zero(),
            max_iter: 200,
            damping: Scalar::one(),
            mode: Mode::Rational,
            initial_t: None,
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::float()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub t: Vec<Scalar>,
    pub potential: ToricPsh,
    pub masses: AtomicMeasure,
    /// `max_i |mass_i - w_i|`, exact.
    pub residual: Scalar,
    pub iterations: usize,
    pub objective: Scalar,
    /// Objective after each accepted step, starting with the initial value.
    pub trace: Vec<Scalar>,
}

struct Geometry<F> {
    dim: usize,
    delta: Vec<Vec<F>>,
    sites: Vec<Vec<F>>,
    weights: Vec<F>,
    ref_integral: F,
    volume: F,
}

struct State<F> {
    t: Vec<F>,
    cells: Vec<Vec<Vec<F>>>,
    masses: Vec<F>,
    value: F,
}

impl<F: Field> State<F> {
    fn gradient(&self, g: &Geometry<F>) -> Vec<F> {
        self.masses
            .iter()
            .zip(&g.weights)
            .map(|(h, w)| h.clone() - w.clone())
            .collect()
    }

    fn residual(&self, g: &Geometry<F>) -> F {
        self.gradient(g)
            .into_iter()
            .fold(F::zero(), |acc, x| if x.abs() > acc { x.abs() } else { acc })
    }

    fn all_positive(&self) -> bool {
        self.masses.iter().all(|m| m.is_positive())
    }
}

fn evaluate<F: Field>(g: &Geometry<F>, t: Vec<F>) -> State<F> {
    let cells = laguerre_cells(g.dim, &g.delta, &g.sites, &t);
    let masses: Vec<F> = cells.iter().map(|c| planar::volume(g.dim, c)).collect();
    // F(t) = \int u_ref - \int u_t - <w, t>.
    let mut value = g.ref_integral.clone();
    for i in 0..t.len() {
        let moment = planar::moment(g.dim, &cells[i]);
        value = value - planar::dot(&g.sites[i], &moment) + t[i].clone() * masses[i].clone()
            - g.weights[i].clone() * t[i].clone();
    }
    State {
        t,
        cells,
        masses,
        value,
    }
}

/// Newton direction from the exact cell-adjacency Hessian, with the
/// first coordinate grounded. `None` if the reduced Hessian is singular.
fn newton_direction<F: Field>(g: &Geometry<F>, s: &State<F>) -> Option<Vec<F>> {
    let n = s.t.len();
    if n == 1 {
        return Some(vec![F::zero()]);
    }
    let mut hess = vec![vec![F::zero(); n]; n];
    for a in 0..n {
        for b in 0..n {
            if a == b || s.cells[a].is_empty() || s.cells[b].is_empty() {
                continue;
            }
            let c = face_coupling(g.dim, &s.cells[a], &g.sites[a], &g.sites[b], &s.t[a], &s.t[b]);
            hess[a][b] = c.clone();
            hess[a][a] = hess[a][a].clone() - c;
        }
    }
    let grad = s.gradient(g);
    let reduced: Vec<Vec<F>> = hess[1..].iter().map(|r| r[1..].to_vec()).collect();
    let rhs: Vec<F> = grad[1..].iter().map(|x| -x.clone()).collect();
    let delta = solve_dense(reduced, &rhs)?;
    let mut out = vec![F::zero()];
    out.extend(delta);
    Some(out)
}

/// Backtracking from `step`: accepts the first trial that keeps every
/// previously positive cell positive and does not decrease the objective.
fn line_search<F: Field>(
    g: &Geometry<F>,
    s: &State<F>,
    dir: &[F],
    step: F,
    halvings: usize,
) -> Option<State<F>> {
    let mut alpha = step;
    let old_res = s.residual(g);
    for _ in 0..=halvings {
        let t: Vec<F> = s
            .t
            .iter()
            .zip(dir)
            .map(|(a, d)| a.clone() + alpha.clone() * d.clone())
            .collect();
        let trial = evaluate(g, t);
        let keeps_cells = s
            .masses
            .iter()
            .zip(&trial.masses)
            .all(|(old, new)| !old.is_positive() || new.is_positive());
        if keeps_cells {
            if trial.value >= s.value {
                return Some(trial);
            }
            // Float mode only: objective flat to rounding, residual smaller.
            let scale = if s.value.abs() > F::one() { s.value.abs() } else { F::one() };
            let diff = s.value.clone() - trial.value.clone();
            let flat = !diff.is_zero() && diff.negligible(&(scale * g.volume.clone()));
            if flat && trial.residual(g) < old_res {
                return Some(trial);
            }
        }
        alpha = alpha * F::half();
    }
    None
}

/// Exact ascent stops once an iterate needs more bits than this. In
/// dimension 2 the solution is generally irrational, and Newton roughly
/// triples the size of `t` per step.
const MAX_EXACT_BITS: u64 = 4096;

/// Runs ascent until the float/exact residual target is met.
fn ascend<F: Field>(
    g: &Geometry<F>,
    start: Vec<F>,
    target: &F,
    damping: &F,
    max_iter: usize,
    trace: &mut Vec<F>,
    iterations: &mut usize,
) -> State<F> {
    let mut s = evaluate(g, start);
    trace.push(s.value.clone());
    while *iterations < max_iter && s.residual(g) > *target {
        let mut next = None;
        if s.all_positive() {
            if let Some(dir) = newton_direction(g, &s) {
                next = line_search(g, &s, &dir, damping.clone(), 40);
            }
        }
        if next.is_none() {
            let dir = s.gradient(g);
            let norm = dir
                .iter()
                .fold(F::zero(), |acc, x| if x.abs() > acc { x.abs() } else { acc });
            let scale = if norm > F::one() { F::one() / norm } else { F::one() };
            next = line_search(g, &s, &dir, damping.clone() * scale, 60);
        }
        match next {
            Some(n) => {
                s = n;
                *iterations += 1;
                trace.push(s.value.clone());
                if s.t.iter().any(|v| v.bits() > MAX_EXACT_BITS) {
                    break;
                }
            }
            None => break,
        }
    }
    s
}

fn finish(
    p: &DiracProblem,
    t: Vec<Scalar>,
    iterations: usize,
    trace: Vec<Scalar>,
) -> Result<Solution, SolverError> {
    let potential = p.potential(&t)?;
    let masses = potential.ma_measure();
    let residual = p
        .sites
        .iter()
        .zip(&p.weights)
        .map(|(x, w)| (masses.weight_at(x) - w).abs())
        .max()
        .unwrap_or_else(Scalar::zero);
    let objective = evaluate(&p.geometry::<Scalar>(), t.clone()).value;
    Ok(Solution {
        t,
        potential,
        masses,
        residual,
        iterations,
        objective,
        trace,
    })
}

/// A start with every cell of positive volume, so that Newton steps apply
/// from the first iteration. `t0` is kept if it already has that
/// property; otherwise it is blended towards a paraboloid lift
/// `t_i = lambda |x_i|^2 + <c, x_i>` (`c` the mean vertex of the polytope),
/// whose cells are Voronoi cells seen through `delta` and all nonempty
/// once `lambda` is small.
fn positive_start(p: &DiracProblem, t0: Vec<Scalar>) -> Vec<Scalar> {
    let g = p.geometry::<Scalar>();
    let positive = |t: &[Scalar]| evaluate(&g, t.to_vec()).all_positive();
    if positive(&t0) {
        return t0;
    }
    let verts = p.delta.vertices();
    let c = scale_point(
        &verts.iter().fold(vec![Scalar::zero(); p.delta.dim()], |acc, v| crate::scalar::add_points(&acc, v)),
        &(Scalar::one() / Scalar::from_integer(verts.len().into())),
    );
    let mut lambda = Scalar::one();
    let mut lift = None;
    for _ in 0..200 {
        let t: Vec<Scalar> = p
            .sites
            .iter()
            .map(|x| &lambda * crate::scalar::dot(x, x) + crate::scalar::dot(&c, x))
            .collect();
        if positive(&t) {
            lift = Some(t);
            break;
        }
        lambda = lambda * ratio(1, 2);
    }
    let Some(lift) = lift else {
        return t0;
    };
    // Weight 1 - 2^-k on the lift, for the first k that works.
    let mut keep = ratio(1, 2);
    for _ in 0..60 {
        let t: Vec<Scalar> = t0.iter().zip(&lift).map(|(a, b)| a * &keep + b * (Scalar::one() - &keep)).collect();
        if positive(&t) {
            return t;
        }
        keep = keep * ratio(1, 2);
    }
    lift
}

pub fn solve(p: &DiracProblem, cfg: &SolverConfig) -> Result<Solution, SolverError> {
    p.check_mass()?;
    let start = match &cfg.initial_t {
        Some(t) => {
            p.check_arity(t.len())?;
            t.clone()
        }
        None => p.initial_t(),
    };
    let start = positive_start(p, start);
    let bound = &cfg.tol * p.delta.volume();
    let mut iterations = 0;
    let sol = match cfg.mode {
        Mode::Rational => {
            let g = p.geometry::<Scalar>();
            let mut trace = Vec::new();
            let s = ascend(&g, start, &bound, &cfg.damping, cfg.max_iter, &mut trace, &mut iterations);
            finish(p, s.t, iterations, trace)?
        }
        Mode::Float => {
            let g = p.geometry::<f64>();
            let mut t: Vec<f64> = start.iter().map(crate::scalar::to_f64).collect();
            let mut target = crate::scalar::to_f64(&bound);
            let damping = crate::scalar::to_f64(&cfg.damping);
            let mut trace = Vec::new();
            loop {
                let s = ascend(&g, t, &target, &damping, cfg.max_iter, &mut trace, &mut iterations);
                let exact: Vec<Scalar> = s
                    .t
                    .iter()
                    .map(|v| from_f64(*v).expect("finite iterate"))
                    .collect();
                let trace_q = trace.iter().map(|v| from_f64(*v).unwrap_or_else(Scalar::zero)).collect();
                let sol = finish(p, exact, iterations, trace_q)?;
                let stalled = s.residual(&g) > target;
                if sol.residual <= bound || stalled || iterations >= cfg.max_iter || target < 1e-300 {
                    break sol;
                }
                // Float residual met the target but the exact one did not.
                target /= 16.0;
                t = s.t;
            }
        }
    };
    if sol.residual <= bound {
        Ok(sol)
    } else {
        Err(SolverError::NotConverged(Box::new(sol)))
    }
}

/// `(F(t), grad F(t))`, exact. The energy term is computed both from mixed
/// Monge-Ampère measures and from the Legendre integral; a disagreement is
/// reported as an error.
pub fn dual_objective(p: &DiracProblem, t: &[Scalar]) -> Result<(Scalar, Vec<Scalar>), SolverError> {
    p.check_arity(t.len())?;
    let f = p.potential(t)?;
    let reference = p.reference();
    let e = energy(&f, &reference)?;
    let e_dual = energy_legendre(&f, &reference)?;
    if e != e_dual {
        return Err(SolverError::EnergyMismatch(e, e_dual));
    }
    let pairing: Scalar = p.weights.iter().zip(t).map(|(w, v)| w * v).sum();
    let ma = f.ma_measure();
    let grad = p
        .sites
        .iter()
        .zip(&p.weights)
        .map(|(x, w)| ma.weight_at(x) - w)
        .collect();
    Ok((e - pairing, grad))
}

/// Exact objective and gradient without the cross-check.
pub fn dual_objective_fast(p: &DiracProblem, t: &[Scalar]) -> Result<(Scalar, Vec<Scalar>), SolverError> {
    p.check_arity(t.len())?;
    let g = p.geometry::<Scalar>();
    let s = evaluate(&g, t.to_vec());
    let grad = s.gradient(&g);
    Ok((s.value, grad))
}

/// The same objective in floating point.
pub fn dual_objective_float(p: &DiracProblem, t: &[f64]) -> Result<(f64, Vec<f64>), SolverError> {
    p.check_arity(t.len())?;
    let g = p.geometry::<f64>();
    let s = evaluate(&g, t.to_vec());
    let grad = s.gradient(&g);
    Ok((s.value, grad))
}

/// Shifts `t` so that the potential has maximum 0 over the sites (and so
/// over their hull, which contains every atom).
pub fn normalize(s: &Solution) -> Solution {
    use crate::toric::Evaluate;
    let sup = s
        .masses
        .atoms()
        .iter()
        .map(|(x, _)| s.potential.value_at(x))
        .chain(s.potential.generators().iter().map(|(x, _)| s.potential.value_at(x)))
        .max()
        .unwrap_or_else(Scalar::zero);
    let c = -sup;
    let mut out = s.clone();
    out.t = s.t.iter().map(|v| v + &c).collect();
    out.potential = s.potential.shift(&c);
    out
}

/// `n! MA(f)`: the curvature measure of the associated metric.
pub fn cl_measure(f: &ToricPsh) -> AtomicMeasure {
    f.ma_measure().scaled(&factorial(f.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ipoint};

    #[test]
    fn single_site_is_solved_at_the_start() {
        let sq = NewtonPolytope::unit_cube(2);
        let p = DiracProblem::new(sq.clone(), vec![vec![ratio(1, 3), int(2)]], vec![int(1)]).unwrap();
        let s = solve(&p, &SolverConfig::rational()).unwrap();
        assert_eq!(s.iterations, 0);
        assert_eq!(s.residual, int(0));
        assert_eq!(s.potential, envelope(&sq, &[(vec![ratio(1, 3), int(2)], int(0))]).unwrap());
    }

    #[test]
    fn two_sites_on_the_square() {
        let sq = NewtonPolytope::unit_cube(2);
        let p = DiracProblem::new(sq, vec![ipoint(&[0, 0]), ipoint(&[1, 0])], vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let s = solve(&p, &SolverConfig::rational()).unwrap();
        assert_eq!(s.residual, int(0));
        assert_eq!(&s.t[1] - &s.t[0], ratio(1, 2));
    }

    #[test]
    fn mass_mismatch_is_reported() {
        let i = NewtonPolytope::unit_cube(1);
        let p = DiracProblem::new(i, vec![ipoint(&[0])], vec![int(2)]).unwrap();
        assert!(matches!(solve(&p, &SolverConfig::rational()), Err(SolverError::MassMismatch { .. })));
    }

    #[test]
    fn float_mode_meets_the_exact_residual_bound() {
        let tri = NewtonPolytope::standard_simplex(2);
        let p = DiracProblem::new(
            tri,
            vec![ipoint(&[0, 0]), ipoint(&[2, 1]), vec![ratio(-1, 3), int(1)]],
            vec![ratio(1, 6), ratio(1, 4), ratio(1, 12)],
        )
        .unwrap();
        let s = solve(&p, &SolverConfig::float()).unwrap();
        assert!(s.residual <= ratio(1, 10_000_000_000) * ratio(1, 2));
        for w in s.trace.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }
}
