//! Envelopes with slopes restricted to `delta ∩ (1/m) Z^n`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use super::psh::{envelope_in, ToricPsh};
use super::{NewtonPolytope, ToricError};
use crate::polyhedra::{hull, lower_hull, GeometryError, Polytope};
use crate::scalar::{ceil, dot, floor, Point, Scalar};

fn lattice_value(k: &BigInt, m: u64) -> Scalar {
    Scalar::new(k.clone(), BigInt::from(m))
}

/// Lattice points of a convex cell that are leftmost or rightmost in
/// their row; every vertex of the hull of all lattice points in the cell
/// is among them.
fn row_extremes(cell: &Polytope, m: u64) -> Vec<Point> {
    let scale = Scalar::from_integer(BigInt::from(m));
    let span = |lo: &Scalar, hi: &Scalar| -> Option<(BigInt, BigInt)> {
        let a = ceil(&(lo * &scale));
        let b = floor(&(hi * &scale));
        (a <= b).then_some((a, b))
    };
    let verts = cell.vertices();
    if cell.dim() == 1 {
        let (lo, hi) = (&verts[0][0], &verts[verts.len() - 1][0]);
        return match span(lo, hi) {
            Some((a, b)) if a == b => vec![vec![lattice_value(&a, m)]],
            Some((a, b)) => vec![vec![lattice_value(&a, m)], vec![lattice_value(&b, m)]],
            None => Vec::new(),
        };
    }
    let ys = verts.iter().map(|v| &v[1]);
    let ymin = ys.clone().min().expect("nonempty cell").clone();
    let ymax = ys.max().expect("nonempty cell").clone();
    let Some((r0, r1)) = span(&ymin, &ymax) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut row = r0;
    while row <= r1 {
        let y = lattice_value(&row, m);
        let mut xs: Vec<Scalar> = Vec::new();
        for i in 0..verts.len() {
            let (p, q) = (&verts[i], &verts[(i + 1) % verts.len()]);
            let (lo, hi) = if p[1] <= q[1] { (p, q) } else { (q, p) };
            if y < lo[1] || y > hi[1] {
                continue;
            }
            if lo[1] == hi[1] {
                xs.push(lo[0].clone());
                xs.push(hi[0].clone());
            } else {
                let s = (&y - &lo[1]) / (&hi[1] - &lo[1]);
                xs.push(&lo[0] + s * (&hi[0] - &lo[0]));
            }
        }
        if let (Some(xlo), Some(xhi)) = (xs.iter().min(), xs.iter().max()) {
            if let Some((a, b)) = span(xlo, xhi) {
                out.push(vec![lattice_value(&a, m), y.clone()]);
                if a != b {
                    out.push(vec![lattice_value(&b, m), y.clone()]);
                }
            }
        }
        row += 1;
    }
    out
}

/// `phi_m(y) = max_q (<q, y> - u(q))` over lattice slopes `q` in `delta`,
/// where `u(q) = max_a (<x_a, q> - t_a)`.
///
/// The result lives over the hull of those lattice slopes, which is
/// `delta` itself whenever `delta` has vertices in `(1/m) Z^n`.
pub fn lattice_envelope(
    delta: &NewtonPolytope,
    constraints: &[(Point, Scalar)],
    m: u64,
) -> Result<ToricPsh, ToricError> {
    let exact = envelope_in(Arc::new(delta.clone()), constraints)?;
    if m == 0 {
        return Err(ToricError::EmptyLattice(m));
    }
    let mut lifted: BTreeMap<Point, Scalar> = BTreeMap::new();
    for ((x, t), cell) in exact.generators().iter().zip(exact.cells()) {
        for q in row_extremes(cell, m) {
            let u = dot(x, &q) - t;
            lifted.entry(q).or_insert(u);
        }
    }
    if lifted.is_empty() {
        return Err(ToricError::EmptyLattice(m));
    }
    let slopes: Vec<Point> = lifted.keys().cloned().collect();
    let body = hull(&slopes, delta.dim())?;
    if !body.is_full_dimensional() {
        return Err(ToricError::DegenerateLattice(m));
    }
    let target = if &body == delta.body() {
        exact.delta_arc().clone()
    } else {
        Arc::new(NewtonPolytope::new(body)?)
    };
    let points: Vec<(Point, Scalar)> = lifted.into_iter().collect();
    let lh = lower_hull(&points).map_err(|e| match e {
        GeometryError::DegenerateSpan => ToricError::DegenerateLattice(m),
        other => other.into(),
    })?;
    debug_assert!(lh.dropped.is_empty());
    let phi = ToricPsh::from_lower_hull(target, lh);
    debug_assert!(!phi.generators().is_empty() && !phi.delta().volume().is_zero());
    Ok(phi)
}
