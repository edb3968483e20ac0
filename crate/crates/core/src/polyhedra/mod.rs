//! Exact convex geometry in dimension one and two.

pub mod lower_hull;
pub mod planar;

use num_traits::{One, Zero};

use crate::scalar::{dot, int, Point, Scalar};

pub use lower_hull::{lower_hull, LowerHull, LowerHullCell};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("dimension {0} is not supported (exact mode handles 1 and 2)")]
    DimensionUnsupported(usize),
    #[error("no input points")]
    EmptyInput,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("base points do not affinely span the ambient space")]
    DegenerateSpan,
}

/// `{m : <normal, m> <= offset}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HalfSpace {
    pub normal: Point,
    pub offset: Scalar,
}

impl HalfSpace {
    pub fn new(normal: Point, offset: Scalar) -> Self {
        HalfSpace { normal, offset }
    }

    pub fn contains(&self, m: &[Scalar]) -> bool {
        dot(&self.normal, m) <= self.offset
    }

    /// The closed opposite half-space `{<normal, m> >= offset}`.
    pub fn complement(&self) -> HalfSpace {
        HalfSpace {
            normal: self.normal.iter().map(|a| -a).collect(),
            offset: -self.offset.clone(),
        }
    }
}

/// A convex polytope given by its vertices and a matching facet list.
///
/// Vertices are irredundant. In the plane they run counter-clockwise from
/// the lexicographically smallest; on the line they are `[lo, hi]`.
/// Empty and lower-dimensional polytopes are ordinary values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Point>,
    facets: Vec<HalfSpace>,
}

fn check_dim(dim: usize) -> Result<(), GeometryError> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(GeometryError::DimensionUnsupported(dim))
    }
}

impl Polytope {
    pub fn empty(dim: usize) -> Self {
        // 0 <= -1: an infeasible system with the right shape.
        Polytope {
            dim,
            vertices: Vec::new(),
            facets: vec![HalfSpace::new(vec![Scalar::zero(); dim], int(-1))],
        }
    }

    /// Builds from a vertex list already in canonical order.
    pub(crate) fn from_canonical(dim: usize, vertices: Vec<Point>) -> Self {
        if vertices.is_empty() {
            return Polytope::empty(dim);
        }
        let facets = facets_of(dim, &vertices);
        Polytope {
            dim,
            vertices,
            facets,
        }
    }

    /// Axis-aligned box `prod [lo_i, hi_i]`.
    pub fn cube(lo: &[Scalar], hi: &[Scalar]) -> Result<Self, GeometryError> {
        let dim = lo.len();
        check_dim(dim)?;
        let pts: Vec<Point> = match dim {
            1 => vec![vec![lo[0].clone()], vec![hi[0].clone()]],
            _ => vec![
                vec![lo[0].clone(), lo[1].clone()],
                vec![hi[0].clone(), lo[1].clone()],
                vec![hi[0].clone(), hi[1].clone()],
                vec![lo[0].clone(), hi[1].clone()],
            ],
        };
        hull(&pts, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn facets(&self) -> &[HalfSpace] {
        &self.facets
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Dimension of the affine hull, `None` when empty.
    pub fn affine_dim(&self) -> Option<usize> {
        match self.vertices.len() {
            0 => None,
            1 => Some(0),
            2 => Some(1),
            _ => Some(2),
        }
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim() == Some(self.dim)
    }

    pub fn volume(&self) -> Scalar {
        planar::volume(self.dim, &self.vertices)
    }

    /// `\int_P m dm`.
    pub fn moment(&self) -> Point {
        planar::moment(self.dim, &self.vertices)
    }

    pub fn contains(&self, m: &[Scalar]) -> bool {
        if self.is_empty() {
            return false;
        }
        match self.affine_dim() {
            Some(0) => self.vertices[0].as_slice() == m,
            Some(1) if self.dim == 2 => {
                let (a, b) = (&self.vertices[0], &self.vertices[1]);
                if !planar::cross(a, b, m).is_zero() {
                    return false;
                }
                let d = crate::scalar::sub_points(b, a);
                let s = dot(&d, &crate::scalar::sub_points(m, a));
                s >= Scalar::zero() && s <= dot(&d, &d)
            }
            _ => self.facets.iter().all(|h| h.contains(m)),
        }
    }

    /// `max_{m in P} <m, y>`; zero for the empty polytope.
    pub fn support(&self, y: &[Scalar]) -> Scalar {
        self.vertices
            .iter()
            .map(|v| dot(v, y))
            .max()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn translate(&self, shift: &[Scalar]) -> Polytope {
        let vertices = self
            .vertices
            .iter()
            .map(|v| crate::scalar::add_points(v, shift))
            .collect();
        Polytope::from_canonical(self.dim, vertices)
    }

    /// Dilation by a nonnegative factor.
    pub fn scale(&self, lambda: &Scalar) -> Polytope {
        if lambda.is_zero() && !self.is_empty() {
            return Polytope::from_canonical(self.dim, vec![vec![Scalar::zero(); self.dim]]);
        }
        let vertices = self
            .vertices
            .iter()
            .map(|v| crate::scalar::scale_point(v, lambda))
            .collect();
        Polytope::from_canonical(self.dim, vertices)
    }
}

fn facets_of(dim: usize, vertices: &[Point]) -> Vec<HalfSpace> {
    match (dim, vertices.len()) {
        (_, 0) => Polytope::empty(dim).facets,
        (1, 1) => vec![
            HalfSpace::new(vec![int(1)], vertices[0][0].clone()),
            HalfSpace::new(vec![int(-1)], -vertices[0][0].clone()),
        ],
        (1, _) => vec![
            HalfSpace::new(vec![int(-1)], -vertices[0][0].clone()),
            HalfSpace::new(vec![int(1)], vertices[1][0].clone()),
        ],
        (_, 1) => {
            let p = &vertices[0];
            vec![
                HalfSpace::new(vec![int(1), int(0)], p[0].clone()),
                HalfSpace::new(vec![int(-1), int(0)], -p[0].clone()),
                HalfSpace::new(vec![int(0), int(1)], p[1].clone()),
                HalfSpace::new(vec![int(0), int(-1)], -p[1].clone()),
            ]
        }
        (_, 2) => {
            // A segment: the two sides of its line plus the end caps.
            let (p, q) = (&vertices[0], &vertices[1]);
            let d = crate::scalar::sub_points(q, p);
            let n = vec![d[1].clone(), -d[0].clone()];
            let c = dot(&n, p);
            vec![
                HalfSpace::new(n.clone(), c.clone()),
                HalfSpace::new(n.iter().map(|a| -a).collect(), -c),
                HalfSpace::new(d.iter().map(|a| -a).collect(), -dot(&d, p)),
                HalfSpace::new(d.clone(), dot(&d, q)),
            ]
        }
        _ => {
            let k = vertices.len();
            (0..k)
                .map(|i| {
                    let p = &vertices[i];
                    let q = &vertices[(i + 1) % k];
                    let normal = vec![&q[1] - &p[1], &p[0] - &q[0]];
                    let offset = dot(&normal, p);
                    HalfSpace::new(normal, offset)
                })
                .collect()
        }
    }
}

fn check_points(points: &[Point], dim: usize) -> Result<(), GeometryError> {
    for p in points {
        if p.len() != dim {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
    }
    Ok(())
}

/// Convex hull of `points` in `Q^dim`.
pub fn hull(points: &[Point], dim: usize) -> Result<Polytope, GeometryError> {
    check_dim(dim)?;
    if points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    check_points(points, dim)?;
    Ok(Polytope::from_canonical(dim, planar::hull(dim, points)))
}

/// `p` intersected with every half-space.
pub fn clip(p: &Polytope, halfspaces: &[HalfSpace]) -> Result<Polytope, GeometryError> {
    for h in halfspaces {
        if h.normal.len() != p.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: p.dim,
                found: h.normal.len(),
            });
        }
    }
    let mut set = p.vertices.clone();
    for h in halfspaces {
        if set.is_empty() {
            break;
        }
        set = planar::clip(p.dim, &set, &h.normal, &h.offset);
    }
    Ok(Polytope::from_canonical(p.dim, planar::hull(p.dim, &set)))
}

pub fn volume(p: &Polytope) -> Scalar {
    p.volume()
}

pub fn minkowski_sum(p: &Polytope, q: &Polytope) -> Result<Polytope, GeometryError> {
    if p.dim != q.dim {
        return Err(GeometryError::DimensionMismatch {
            expected: p.dim,
            found: q.dim,
        });
    }
    if p.is_empty() || q.is_empty() {
        return Ok(Polytope::empty(p.dim));
    }
    let sums: Vec<Point> = p
        .vertices
        .iter()
        .flat_map(|a| q.vertices.iter().map(move |b| crate::scalar::add_points(a, b)))
        .collect();
    hull(&sums, p.dim)
}

/// `(1 - s) p + s q` for `s` in `[0, 1]`.
pub fn convex_mix(p: &Polytope, q: &Polytope, s: &Scalar) -> Result<Polytope, GeometryError> {
    let a = p.scale(&(Scalar::one() - s));
    let b = q.scale(s);
    minkowski_sum(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ipoint, ratio};

    fn unit_square() -> Polytope {
        Polytope::cube(&ipoint(&[0, 0]), &ipoint(&[1, 1])).unwrap()
    }

    #[test]
    fn interior_point_is_dropped() {
        let p = hull(
            &[
                ipoint(&[0, 0]),
                ipoint(&[1, 0]),
                ipoint(&[0, 1]),
                vec![ratio(1, 3), ratio(1, 3)],
            ],
            2,
        )
        .unwrap();
        assert_eq!(p.vertices().len(), 3);
        assert_eq!(p.volume(), ratio(1, 2));
    }

    #[test]
    fn segment_in_the_line() {
        let p = hull(&[ipoint(&[1]), ipoint(&[0])], 1).unwrap();
        assert_eq!(p.vertices(), &[ipoint(&[0]), ipoint(&[1])]);
        assert_eq!(p.volume(), int(1));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(hull(&[], 2), Err(GeometryError::EmptyInput));
        assert_eq!(
            hull(&[ipoint(&[0, 0, 0, 0])], 4),
            Err(GeometryError::DimensionUnsupported(4))
        );
        assert!(matches!(
            hull(&[ipoint(&[0])], 2),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn clipping_the_square() {
        let sq = unit_square();
        let half = clip(&sq, &[HalfSpace::new(ipoint(&[1, 0]), ratio(1, 2))]).unwrap();
        assert_eq!(half.volume(), ratio(1, 2));
        assert_eq!(half.vertices().len(), 4);
        let none = clip(&sq, &[HalfSpace::new(ipoint(&[1, 0]), int(-1))]).unwrap();
        assert!(none.is_empty());
        assert_eq!(none.volume(), int(0));
        let edge = clip(&sq, &[HalfSpace::new(ipoint(&[1, 0]), int(0))]).unwrap();
        assert_eq!(edge.affine_dim(), Some(1));
    }

    #[test]
    fn minkowski_examples() {
        let i = hull(&[ipoint(&[0]), ipoint(&[1])], 1).unwrap();
        let s = minkowski_sum(&i, &i).unwrap();
        assert_eq!(s.vertices(), &[ipoint(&[0]), ipoint(&[2])]);
        let seg = hull(&[ipoint(&[0, 0]), ipoint(&[1, 0])], 2).unwrap();
        let r = minkowski_sum(&unit_square(), &seg).unwrap();
        assert_eq!(
            r,
            Polytope::cube(&ipoint(&[0, 0]), &ipoint(&[2, 1])).unwrap()
        );
    }

    #[test]
    fn facets_match_vertices() {
        let p = hull(
            &[ipoint(&[0, 0]), ipoint(&[3, 1]), ipoint(&[1, 2]), ipoint(&[-1, 1])],
            2,
        )
        .unwrap();
        for h in p.facets() {
            let on: usize = p
                .vertices()
                .iter()
                .filter(|v| dot(&h.normal, v) == h.offset)
                .count();
            assert_eq!(on, 2);
            assert!(p.vertices().iter().all(|v| h.contains(v)));
        }
        assert!(p.contains(&ipoint(&[1, 1])));
        assert!(!p.contains(&ipoint(&[3, 3])));
    }
}
