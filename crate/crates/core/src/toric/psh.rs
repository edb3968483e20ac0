use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use super::laguerre::laguerre_cells;
use super::{AtomicMeasure, Evaluate, NewtonPolytope, TestFunction, ToricError};
use crate::polyhedra::{hull, planar, LowerHull, Polytope};
use crate::scalar::{dot, Point, Scalar};

/// `f(y) = sup_{m in delta} (<m, y> - u(m))` with
/// `u(m) = max_a (<x_a, m> - t_a)`.
///
/// Generators are sorted by site and each has a Laguerre cell of positive
/// volume; `cells[i]` is the cell of `generators[i]`.
#[derive(Debug, Clone)]
pub struct ToricPsh {
    delta: Arc<NewtonPolytope>,
    generators: Vec<(Point, Scalar)>,
    cells: Vec<Polytope>,
    /// Vertices of the induced subdivision of delta, with intercept `-u(m)`.
    pieces: Vec<(Point, Scalar)>,
}

impl PartialEq for ToricPsh {
    fn eq(&self, other: &Self) -> bool {
        same_delta(&self.delta, &other.delta) && self.generators == other.generators
    }
}

impl Eq for ToricPsh {}

pub(crate) fn same_delta(a: &Arc<NewtonPolytope>, b: &Arc<NewtonPolytope>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl ToricPsh {
    /// Assembles a potential from generators that are already known to be
    /// irredundant, together with their cells.
    pub(crate) fn from_cells(
        delta: Arc<NewtonPolytope>,
        mut parts: Vec<(Point, Scalar, Polytope)>,
    ) -> ToricPsh {
        parts.sort_by(|a, b| a.0.cmp(&b.0));
        let mut pieces: BTreeMap<Point, Scalar> = BTreeMap::new();
        for (x, t, cell) in &parts {
            for v in cell.vertices() {
                pieces
                    .entry(v.clone())
                    .or_insert_with(|| t - dot(x, v));
            }
        }
        let mut generators = Vec::with_capacity(parts.len());
        let mut cells = Vec::with_capacity(parts.len());
        for (x, t, cell) in parts {
            generators.push((x, t));
            cells.push(cell);
        }
        ToricPsh {
            delta,
            generators,
            cells,
            pieces: pieces.into_iter().collect(),
        }
    }

    pub(crate) fn from_lower_hull(delta: Arc<NewtonPolytope>, lh: LowerHull) -> ToricPsh {
        let parts = lh
            .cells
            .into_iter()
            .map(|c| (c.slope, c.offset, c.region))
            .collect();
        ToricPsh::from_cells(delta, parts)
    }

    /// The support function `g_delta`, i.e. the envelope of `(0, 0)`.
    pub fn support_function(delta: &NewtonPolytope) -> ToricPsh {
        let origin = vec![Scalar::zero(); delta.dim()];
        envelope(delta, &[(origin, Scalar::zero())]).expect("one constraint")
    }

    pub fn delta(&self) -> &NewtonPolytope {
        &self.delta
    }

    pub fn delta_arc(&self) -> &Arc<NewtonPolytope> {
        &self.delta
    }

    pub fn dim(&self) -> usize {
        self.delta.dim()
    }

    pub fn generators(&self) -> &[(Point, Scalar)] {
        &self.generators
    }

    pub fn cells(&self) -> &[Polytope] {
        &self.cells
    }

    /// Affine pieces `(slope, intercept)` with `f(y) = max <m, y> + c`.
    pub fn to_pieces(&self) -> &[(Point, Scalar)] {
        &self.pieces
    }

    pub fn evaluate(&self, y: &[Scalar]) -> Result<Scalar, ToricError> {
        self.delta.check_point(y)?;
        Ok(self.value_at(y))
    }

    /// The dual function `u(m) = max_a (<x_a, m> - t_a)` on delta.
    pub fn dual_value(&self, m: &[Scalar]) -> Scalar {
        self.generators
            .iter()
            .map(|(x, t)| dot(x, m) - t)
            .max()
            .expect("at least one generator")
    }

    /// The set of slopes of `f` at `y`.
    pub fn subdifferential(&self, y: &[Scalar]) -> Polytope {
        let values: Vec<Scalar> = self.pieces.iter().map(|(m, c)| dot(m, y) + c).collect();
        let best = values.iter().max().expect("pieces").clone();
        let active: Vec<Point> = self
            .pieces
            .iter()
            .zip(&values)
            .filter(|(_, v)| **v == best)
            .map(|((m, _), _)| m.clone())
            .collect();
        hull(&active, self.dim()).expect("nonempty active set")
    }

    /// Atoms at the sites, weighted by Laguerre cell volumes.
    pub fn ma_measure(&self) -> AtomicMeasure {
        AtomicMeasure::new(
            self.generators
                .iter()
                .zip(&self.cells)
                .map(|((x, _), c)| (x.clone(), c.volume())),
        )
        .expect("cell volumes are positive")
    }

    /// `f + c`.
    pub fn shift(&self, c: &Scalar) -> ToricPsh {
        ToricPsh {
            delta: self.delta.clone(),
            generators: self
                .generators
                .iter()
                .map(|(x, t)| (x.clone(), t + c))
                .collect(),
            cells: self.cells.clone(),
            pieces: self.pieces.iter().map(|(m, v)| (m.clone(), v + c)).collect(),
        }
    }

    pub fn check_same_delta(&self, other: &ToricPsh) -> Result<(), ToricError> {
        if same_delta(&self.delta, &other.delta) {
            Ok(())
        } else {
            Err(ToricError::DeltaMismatch)
        }
    }

    /// Recomputes the canonical form from scratch and reports the first
    /// discrepancy.
    pub fn validate(&self) -> Result<(), String> {
        let again = envelope(&self.delta, &self.generators).map_err(|e| e.to_string())?;
        if again.generators != self.generators {
            return Err("generators are not irredundant".into());
        }
        if again.cells != self.cells {
            return Err("cached cells disagree with a fresh computation".into());
        }
        if again.pieces != self.pieces {
            return Err("cached pieces disagree with a fresh computation".into());
        }
        for ((x, t), cell) in self.generators.iter().zip(&self.cells) {
            if !cell.volume().is_positive() {
                return Err(format!("empty cell at {}", super::fmt_point(x)));
            }
            if &self.value_at(x) != t {
                return Err(format!("value at {} differs from its generator", super::fmt_point(x)));
            }
        }
        for (m, _) in &self.pieces {
            if !self.delta.body().contains(m) {
                return Err(format!("slope {} outside the polytope", super::fmt_point(m)));
            }
        }
        let total: Scalar = self.cells.iter().map(|c| c.volume()).sum();
        if &total != self.delta.volume() {
            return Err("cell volumes do not add up to the polytope volume".into());
        }
        Ok(())
    }
}

impl Evaluate for ToricPsh {
    fn value_at(&self, y: &[Scalar]) -> Scalar {
        self.pieces
            .iter()
            .map(|(m, c)| dot(m, y) + c)
            .max()
            .expect("pieces")
    }
}

/// The largest convex function with slopes in `delta` and `f(x_a) <= t_a`.
pub fn envelope(delta: &NewtonPolytope, constraints: &[(Point, Scalar)]) -> Result<ToricPsh, ToricError> {
    envelope_in(Arc::new(delta.clone()), constraints)
}

pub(crate) fn envelope_in(
    delta: Arc<NewtonPolytope>,
    constraints: &[(Point, Scalar)],
) -> Result<ToricPsh, ToricError> {
    if constraints.is_empty() {
        return Err(ToricError::NoConstraints);
    }
    let mut merged: BTreeMap<&Point, &Scalar> = BTreeMap::new();
    for (x, t) in constraints {
        delta.check_point(x)?;
        merged
            .entry(x)
            .and_modify(|cur| {
                if t < *cur {
                    *cur = t;
                }
            })
            .or_insert(t);
    }
    let sites: Vec<Point> = merged.keys().map(|x| (*x).clone()).collect();
    let values: Vec<Scalar> = merged.values().map(|t| (*t).clone()).collect();
    let dim = delta.dim();
    let cells = laguerre_cells(dim, delta.vertices(), &sites, &values);
    let parts = sites
        .into_iter()
        .zip(values)
        .zip(cells)
        .filter_map(|((x, t), cell)| {
            let cell = planar::hull(dim, &cell);
            if planar::volume(dim, &cell).is_positive() {
                Some((x, t, Polytope::from_canonical(dim, cell)))
            } else {
                None
            }
        })
        .collect();
    Ok(ToricPsh::from_cells(delta, parts))
}

/// The largest potential below a test function: the envelope of the
/// union of all branch generators.
pub fn psh_envelope(f: &TestFunction) -> ToricPsh {
    let constraints: Vec<(Point, Scalar)> = f
        .branches()
        .iter()
        .flat_map(|b| b.generators().iter().cloned())
        .collect();
    envelope_in(f.branches()[0].delta_arc().clone(), &constraints).expect("branches have generators")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ipoint, ratio};

    #[test]
    fn single_constraint_is_a_translated_support_function() {
        let sq = NewtonPolytope::unit_cube(2);
        let x = vec![ratio(1, 3), int(-2)];
        let f = envelope(&sq, &[(x.clone(), int(0))]).unwrap();
        assert_eq!(f.generators(), &[(x.clone(), int(0))]);
        for y in [ipoint(&[0, 0]), ipoint(&[5, -7]), vec![ratio(-1, 2), int(3)]] {
            let shifted: Point = y.iter().zip(&x).map(|(a, b)| a - b).collect();
            assert_eq!(f.value_at(&y), sq.support_value(&shifted).unwrap());
        }
        assert_eq!(f.ma_measure().atoms(), &[(x, int(1))]);
    }

    #[test]
    fn unit_interval_examples() {
        let i = NewtonPolytope::unit_cube(1);
        let g = ToricPsh::support_function(&i);
        assert_eq!(g.to_pieces(), &[(ipoint(&[0]), int(0)), (ipoint(&[1]), int(0))]);
        let f = envelope(&i, &[(ipoint(&[0]), int(0)), (ipoint(&[1]), int(0))]).unwrap();
        for (y, v) in [(-3, 0), (0, 0), (1, 0), (4, 3)] {
            assert_eq!(f.value_at(&ipoint(&[y])), int(v));
        }
        // The constraint at 0 is tight but its cell is the point {0}, so the
        // only slope jump is at 1.
        assert_eq!(f.ma_measure().atoms(), &[(ipoint(&[1]), int(1))]);
        let h = envelope(&i, &[(ipoint(&[2]), int(0))]).unwrap();
        assert_eq!(h.to_pieces(), &[(ipoint(&[0]), int(0)), (ipoint(&[1]), int(-2))]);
    }

    #[test]
    fn redundant_constraints_are_pruned() {
        let i = NewtonPolytope::unit_cube(1);
        // f(1) <= 5 is implied by f(0) <= 0 since slopes are at most 1.
        let f = envelope(&i, &[(ipoint(&[0]), int(0)), (ipoint(&[1]), int(5)), (ipoint(&[0]), int(3))]).unwrap();
        assert_eq!(f.generators(), &[(ipoint(&[0]), int(0))]);
        f.validate().unwrap();
    }

    #[test]
    fn subdifferential_at_a_site_is_the_cell() {
        let sq = NewtonPolytope::unit_cube(2);
        let f = envelope(&sq, &[(ipoint(&[0, 0]), int(0)), (ipoint(&[1, 0]), ratio(1, 2))]).unwrap();
        assert_eq!(f.subdifferential(&ipoint(&[0, 0])), f.cells()[0]);
        assert_eq!(f.cells()[0].volume(), ratio(1, 2));
    }
}
