//! Toric potentials: convex piecewise-affine functions with slopes in a
//! Newton polytope, their envelopes and Monge-Ampère measures.

mod combine;
mod energy;
pub mod laguerre;
mod lattice;
mod psh;

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::polyhedra::{hull, GeometryError, Polytope};
use crate::scalar::{format_scalar, Point, Scalar};

pub use combine::{convex_combination, max_combine, overlay_points, sup_abs_diff, sup_diff};
pub use energy::{energy, energy_legendre, mixed_ma};
pub use lattice::lattice_envelope;
pub use psh::{envelope, psh_envelope, ToricPsh};
pub(crate) use psh::envelope_in;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ToricError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the Newton polytope must be full-dimensional")]
    NotFullDimensional,
    #[error("potentials live over different polytopes")]
    DeltaMismatch,
    #[error("expected {expected} potentials, got {found}")]
    WrongArity { expected: usize, found: usize },
    #[error("at least one constraint is required")]
    NoConstraints,
    #[error("no slopes of the lattice (1/{0})Z^n lie in the polytope")]
    EmptyLattice(u64),
    #[error("lattice slopes of (1/{0})Z^n in the polytope do not span it")]
    DegenerateLattice(u64),
    #[error("candidate exceeds the function at {}: {} > {}", fmt_point(.point), format_scalar(.phi), format_scalar(.f))]
    NotDominated { point: Point, phi: Scalar, f: Scalar },
    #[error("a test function needs at least one branch")]
    NoBranches,
    #[error("measure weights must be positive")]
    NonPositiveWeight,
}

pub(crate) fn fmt_point(p: &[Scalar]) -> String {
    let parts: Vec<String> = p.iter().map(format_scalar).collect();
    format!("({})", parts.join(", "))
}

/// A full-dimensional rational polytope.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NewtonPolytope {
    body: Polytope,
    volume: Scalar,
}

impl NewtonPolytope {
    pub fn new(body: Polytope) -> Result<Self, ToricError> {
        if !body.is_full_dimensional() {
            return Err(ToricError::NotFullDimensional);
        }
        let volume = body.volume();
        Ok(NewtonPolytope { body, volume })
    }

    pub fn from_vertices(points: &[Point]) -> Result<Self, ToricError> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        Self::new(hull(points, dim)?)
    }

    /// `[0,1]^n`.
    pub fn unit_cube(dim: usize) -> Self {
        let lo = vec![Scalar::zero(); dim];
        let hi = vec![crate::scalar::int(1); dim];
        Self::new(Polytope::cube(&lo, &hi).expect("dimension 1 or 2")).expect("full-dimensional")
    }

    /// `conv{0, e_1, ..., e_n}`.
    pub fn standard_simplex(dim: usize) -> Self {
        let mut pts = vec![vec![Scalar::zero(); dim]];
        for i in 0..dim {
            let mut e = vec![Scalar::zero(); dim];
            e[i] = crate::scalar::int(1);
            pts.push(e);
        }
        Self::from_vertices(&pts).expect("full-dimensional")
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    pub fn body(&self) -> &Polytope {
        &self.body
    }

    pub fn vertices(&self) -> &[Point] {
        self.body.vertices()
    }

    pub fn volume(&self) -> &Scalar {
        &self.volume
    }

    pub fn check_point(&self, y: &[Scalar]) -> Result<(), ToricError> {
        if y.len() != self.dim() {
            return Err(ToricError::DimensionMismatch {
                expected: self.dim(),
                found: y.len(),
            });
        }
        Ok(())
    }

    /// `g(y) = max_{m in delta} <m, y>`.
    pub fn support_value(&self, y: &[Scalar]) -> Result<Scalar, ToricError> {
        self.check_point(y)?;
        Ok(self.body.support(y))
    }

    /// Sup-norm diameter `max_{m, m'} |m - m'|_inf`.
    pub fn diameter_inf(&self) -> Scalar {
        let v = self.vertices();
        let mut best = Scalar::zero();
        for a in v {
            for b in v {
                for (x, y) in a.iter().zip(b) {
                    let d = (x - y).abs();
                    if d > best {
                        best = d;
                    }
                }
            }
        }
        best
    }
}

pub fn support_value(delta: &NewtonPolytope, y: &[Scalar]) -> Result<Scalar, ToricError> {
    delta.support_value(y)
}

/// Finitely many points with positive weights, sorted by point.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AtomicMeasure {
    atoms: Vec<(Point, Scalar)>,
}

impl AtomicMeasure {
    /// Sums weights at repeated points and drops zero totals. Negative
    /// totals are rejected.
    pub fn new(atoms: impl IntoIterator<Item = (Point, Scalar)>) -> Result<Self, ToricError> {
        let mut merged: BTreeMap<Point, Scalar> = BTreeMap::new();
        for (p, w) in atoms {
            *merged.entry(p).or_insert_with(Scalar::zero) += w;
        }
        let mut out = Vec::with_capacity(merged.len());
        for (p, w) in merged {
            if w.is_negative() {
                return Err(ToricError::NonPositiveWeight);
            }
            if !w.is_zero() {
                out.push((p, w));
            }
        }
        Ok(AtomicMeasure { atoms: out })
    }

    pub fn dirac(point: Point, weight: Scalar) -> Self {
        AtomicMeasure {
            atoms: vec![(point, weight)],
        }
    }

    pub fn atoms(&self) -> &[(Point, Scalar)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> Scalar {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// Weight at `p`, zero if `p` is not an atom.
    pub fn weight_at(&self, p: &[Scalar]) -> Scalar {
        self.atoms
            .binary_search_by(|(q, _)| q.as_slice().cmp(p))
            .map(|i| self.atoms[i].1.clone())
            .unwrap_or_else(|_| Scalar::zero())
    }

    /// Mass of the atoms satisfying `pred`.
    pub fn mass_where(&self, mut pred: impl FnMut(&Point) -> bool) -> Scalar {
        self.atoms
            .iter()
            .filter(|(p, _)| pred(p))
            .map(|(_, w)| w)
            .sum()
    }

    pub fn scaled(&self, factor: &Scalar) -> AtomicMeasure {
        AtomicMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|(p, w)| (p.clone(), w * factor))
                .collect(),
        }
    }
}

/// Anything that can be evaluated exactly at a point.
pub trait Evaluate {
    fn value_at(&self, y: &[Scalar]) -> Scalar;
}

/// `\int g dmu`.
pub fn integrate<G: Evaluate + ?Sized>(g: &G, mu: &AtomicMeasure) -> Scalar {
    mu.atoms().iter().map(|(p, w)| g.value_at(p) * w).sum()
}

/// `f = min` over branches: the continuous test functions used for
/// envelopes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestFunction {
    branches: Vec<ToricPsh>,
}

impl TestFunction {
    pub fn new(branches: Vec<ToricPsh>) -> Result<Self, ToricError> {
        let first = branches.first().ok_or(ToricError::NoBranches)?;
        for b in &branches[1..] {
            if b.delta() != first.delta() {
                return Err(ToricError::DeltaMismatch);
            }
        }
        Ok(TestFunction { branches })
    }

    pub fn branches(&self) -> &[ToricPsh] {
        &self.branches
    }

    pub fn delta(&self) -> &NewtonPolytope {
        self.branches[0].delta()
    }

    pub fn evaluate(&self, y: &[Scalar]) -> Result<Scalar, ToricError> {
        self.delta().check_point(y)?;
        Ok(self.value_at(y))
    }

    pub fn shift(&self, c: &Scalar) -> TestFunction {
        TestFunction {
            branches: self.branches.iter().map(|b| b.shift(c)).collect(),
        }
    }

    /// Every generator site of every branch.
    pub fn branch_sites(&self) -> Vec<Point> {
        let mut sites: Vec<Point> = self
            .branches
            .iter()
            .flat_map(|b| b.generators().iter().map(|(x, _)| x.clone()))
            .collect();
        sites.sort();
        sites.dedup();
        sites
    }

    /// `(1 - s) self + s other`, again a minimum of convex branches.
    pub fn combine(&self, other: &TestFunction, s: &Scalar) -> Result<TestFunction, ToricError> {
        let mut branches = Vec::new();
        for f in &self.branches {
            for g in &other.branches {
                branches.push(convex_combination(f, g, s)?);
            }
        }
        TestFunction::new(branches)
    }
}

impl Evaluate for TestFunction {
    fn value_at(&self, y: &[Scalar]) -> Scalar {
        self.branches
            .iter()
            .map(|b| b.value_at(y))
            .min()
            .expect("at least one branch")
    }
}

/// `\int (f - phi) dMA(phi)`, after checking `phi <= f` at the atoms of
/// `MA(phi)` and at the branch sites of `f`.
pub fn orthogonality_defect(f: &TestFunction, phi: &ToricPsh) -> Result<Scalar, ToricError> {
    defect_against(f, phi, &phi.ma_measure())
}

pub(crate) fn defect_against(
    f: &TestFunction,
    phi: &ToricPsh,
    ma: &AtomicMeasure,
) -> Result<Scalar, ToricError> {
    let checked = ma
        .atoms()
        .iter()
        .map(|(p, _)| p.clone())
        .chain(f.branch_sites());
    for p in checked {
        let (a, b) = (phi.value_at(&p), f.value_at(&p));
        if a > b {
            return Err(ToricError::NotDominated {
                point: p,
                phi: a,
                f: b,
            });
        }
    }
    Ok(ma
        .atoms()
        .iter()
        .map(|(p, w)| (f.value_at(p) - phi.value_at(p)) * w)
        .sum())
}
