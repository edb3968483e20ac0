//! Pointwise maxima and convex combinations of potentials, and the
//! common refinement of their primal complexes.

use num_traits::{One, Signed, Zero};

use super::psh::ToricPsh;
use super::{Evaluate, ToricError};
use crate::polyhedra::{convex_mix, lower_hull, planar};
use crate::scalar::{add_points, dot, scale_point, sub_points, Point, Scalar};

/// `max(f, g)`, rebuilt by conjugating the union of both piece lists.
pub fn max_combine(f: &ToricPsh, g: &ToricPsh) -> Result<ToricPsh, ToricError> {
    f.check_same_delta(g)?;
    let lifted: Vec<(Point, Scalar)> = f
        .to_pieces()
        .iter()
        .chain(g.to_pieces())
        .map(|(m, c)| (m.clone(), -c))
        .collect();
    let lh = lower_hull(&lifted)?;
    Ok(ToricPsh::from_lower_hull(f.delta_arc().clone(), lh))
}

/// `(1 - s) f + s g` for `s` in `[0, 1]`.
///
/// Its sites are the vertices of the common refinement where the mixed
/// subdifferential `(1 - s) df(y) + s dg(y)` is full-dimensional; that set
/// is the cell.
pub fn convex_combination(f: &ToricPsh, g: &ToricPsh, s: &Scalar) -> Result<ToricPsh, ToricError> {
    f.check_same_delta(g)?;
    if s.is_zero() {
        return Ok(f.clone());
    }
    if s.is_one() {
        return Ok(g.clone());
    }
    let r = Scalar::one() - s;
    let mut parts = Vec::new();
    for y in overlay_points(f, g) {
        let cell = convex_mix(&f.subdifferential(&y), &g.subdifferential(&y), s)?;
        if cell.volume().is_positive() {
            let value = &r * f.value_at(&y) + s * g.value_at(&y);
            parts.push((y, value, cell));
        }
    }
    let h = ToricPsh::from_cells(f.delta_arc().clone(), parts);
    debug_assert_eq!(
        h.cells().iter().map(|c| c.volume()).sum::<Scalar>(),
        *h.delta().volume()
    );
    Ok(h)
}

enum PrimalEdge {
    Segment(Point, Point),
    Ray(Point, Point),
}

impl PrimalEdge {
    fn origin_dir(&self) -> (&Point, Point, bool) {
        match self {
            PrimalEdge::Segment(p, q) => (p, sub_points(q, p), true),
            PrimalEdge::Ray(p, d) => (p, d.clone(), false),
        }
    }
}

/// Edges and rays of the complex on which `f` is piecewise affine.
fn primal_edges(f: &ToricPsh) -> Vec<PrimalEdge> {
    let gens = f.generators();
    let cells = f.cells();
    let mut out = Vec::new();
    for a in 0..gens.len() {
        for b in a + 1..gens.len() {
            let shared = cells[a]
                .vertices()
                .iter()
                .filter(|v| cells[b].vertices().contains(v))
                .count();
            if shared >= 2 {
                out.push(PrimalEdge::Segment(gens[a].0.clone(), gens[b].0.clone()));
            }
        }
        let verts = cells[a].vertices();
        for i in 0..verts.len() {
            let (v, w) = (&verts[i], &verts[(i + 1) % verts.len()]);
            for h in f.delta().body().facets() {
                if dot(&h.normal, v) == h.offset && dot(&h.normal, w) == h.offset {
                    out.push(PrimalEdge::Ray(gens[a].0.clone(), h.normal.clone()));
                }
            }
        }
    }
    out
}

fn crossing(e1: &PrimalEdge, e2: &PrimalEdge) -> Option<Point> {
    let (p, d, bounded_d) = e1.origin_dir();
    let (q, e, bounded_e) = e2.origin_dir();
    let zero = vec![Scalar::zero(), Scalar::zero()];
    let den = planar::cross(&zero, &d, &e);
    if den.is_zero() {
        return None;
    }
    let qp = sub_points(q, p);
    let alpha = planar::cross(&zero, &qp, &e) / &den;
    let beta = planar::cross(&zero, &qp, &d) / &den;
    let in_range = |v: &Scalar, bounded: bool| !v.is_negative() && (!bounded || *v <= Scalar::one());
    if in_range(&alpha, bounded_d) && in_range(&beta, bounded_e) {
        Some(add_points(p, &scale_point(&d, &alpha)))
    } else {
        None
    }
}

/// Vertices of the common refinement of the primal complexes of `f` and
/// `g`: both site sets plus transversal crossings of their edges.
pub fn overlay_points(f: &ToricPsh, g: &ToricPsh) -> Vec<Point> {
    let mut pts: Vec<Point> = f
        .generators()
        .iter()
        .chain(g.generators())
        .map(|(x, _)| x.clone())
        .collect();
    if f.dim() == 2 {
        let ef = primal_edges(f);
        let eg = primal_edges(g);
        for a in &ef {
            for b in &eg {
                if let Some(y) = crossing(a, b) {
                    pts.push(y);
                }
            }
        }
    }
    pts.sort();
    pts.dedup();
    pts
}

/// `sup (f - g)` over the whole space; `f - g` is bounded and affine on
/// the pointed cells of the common refinement, so the vertices suffice.
pub fn sup_diff(f: &ToricPsh, g: &ToricPsh) -> Result<Scalar, ToricError> {
    f.check_same_delta(g)?;
    Ok(overlay_points(f, g)
        .iter()
        .map(|y| f.value_at(y) - g.value_at(y))
        .max()
        .expect("at least one site"))
}

/// `sup |f - g|`.
pub fn sup_abs_diff(f: &ToricPsh, g: &ToricPsh) -> Result<Scalar, ToricError> {
    let a = sup_diff(f, g)?;
    let b = sup_diff(g, f)?;
    Ok(if a > b { a } else { b })
}
