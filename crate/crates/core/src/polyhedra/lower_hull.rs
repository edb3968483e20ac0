//! Lower convex hulls of lifted point sets, i.e. regular subdivisions.
//!
//! In the plane the lower hull is read off an incremental 3-d hull. All
//! coordinates are first multiplied by a common denominator so that the
//! orientation tests run on integers.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{hull, planar, GeometryError, Polytope};
use crate::scalar::{common_denominator, dot, Point, Scalar};

/// One cell of a regular subdivision: on `region` the lower hull is the
/// affine function `m -> <slope, m> - offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerHullCell {
    pub slope: Point,
    pub offset: Scalar,
    pub region: Polytope,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerHull {
    pub dim: usize,
    /// Sorted by `(slope, offset)`.
    pub cells: Vec<LowerHullCell>,
    /// Indices of input points lying strictly above the hull.
    pub dropped: Vec<usize>,
}

impl LowerHull {
    /// Value of the hull function at a point of its domain.
    pub fn evaluate(&self, m: &[Scalar]) -> Scalar {
        self.cells
            .iter()
            .map(|c| dot(&c.slope, m) - &c.offset)
            .max()
            .expect("a lower hull has at least one cell")
    }
}

pub fn lower_hull(lifted: &[(Point, Scalar)]) -> Result<LowerHull, GeometryError> {
    let Some((first, _)) = lifted.first() else {
        return Err(GeometryError::EmptyInput);
    };
    let dim = first.len();
    if dim != 1 && dim != 2 {
        return Err(GeometryError::DimensionUnsupported(dim));
    }
    for (p, _) in lifted {
        if p.len() != dim {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
    }
    // Lowest height per base point.
    let mut lowest: BTreeMap<&Point, &Scalar> = BTreeMap::new();
    for (p, h) in lifted {
        lowest
            .entry(p)
            .and_modify(|cur| {
                if h < *cur {
                    *cur = h;
                }
            })
            .or_insert(h);
    }
    let pts: Vec<(Point, Scalar)> = lowest
        .into_iter()
        .map(|(p, h)| (p.clone(), h.clone()))
        .collect();
    let cells = if dim == 1 {
        cells_1d(&pts)?
    } else {
        cells_2d(&pts)?
    };
    let mut out = LowerHull {
        dim,
        cells,
        dropped: Vec::new(),
    };
    out.dropped = lifted
        .iter()
        .enumerate()
        .filter(|(_, (p, h))| *h > out.evaluate(p))
        .map(|(i, _)| i)
        .collect();
    Ok(out)
}

fn cells_1d(pts: &[(Point, Scalar)]) -> Result<Vec<LowerHullCell>, GeometryError> {
    if pts.len() < 2 {
        return Err(GeometryError::DegenerateSpan);
    }
    // `pts` is sorted by base coordinate already.
    let as_plane: Vec<Vec<Scalar>> = pts
        .iter()
        .map(|(p, h)| vec![p[0].clone(), h.clone()])
        .collect();
    let mut chain: Vec<&Vec<Scalar>> = Vec::new();
    for q in &as_plane {
        while chain.len() >= 2
            && planar::cross(chain[chain.len() - 2], chain[chain.len() - 1], q) <= Scalar::zero()
        {
            chain.pop();
        }
        chain.push(q);
    }
    Ok(chain
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let slope = (&b[1] - &a[1]) / (&b[0] - &a[0]);
            let offset = &slope * &a[0] - &a[1];
            LowerHullCell {
                slope: vec![slope],
                offset,
                region: Polytope::from_canonical(1, vec![vec![a[0].clone()], vec![b[0].clone()]]),
            }
        })
        .collect())
}

type I3 = [BigInt; 3];

fn sub3(a: &I3, b: &I3) -> I3 {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

fn cross3(a: &I3, b: &I3) -> I3 {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

fn dot3(a: &I3, b: &I3) -> BigInt {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

struct Face {
    v: [usize; 3],
    normal: I3,
    offset: BigInt,
    alive: bool,
}

struct Hull3 {
    pts: Vec<I3>,
    /// Four times an interior point, to orient faces outward.
    inner4: I3,
    faces: Vec<Face>,
    edges: HashMap<(usize, usize), usize>,
}

impl Hull3 {
    fn add_face(&mut self, a: usize, b: usize, c: usize) {
        let mut v = [a, b, c];
        let mut normal = cross3(&sub3(&self.pts[b], &self.pts[a]), &sub3(&self.pts[c], &self.pts[a]));
        let mut offset = dot3(&normal, &self.pts[a]);
        let four = BigInt::from(4);
        if dot3(&normal, &self.inner4) > &offset * &four {
            v.swap(1, 2);
            normal = [-&normal[0], -&normal[1], -&normal[2]];
            offset = -offset;
        }
        let id = self.faces.len();
        for k in 0..3 {
            self.edges.insert((v[k], v[(k + 1) % 3]), id);
        }
        self.faces.push(Face {
            v,
            normal,
            offset,
            alive: true,
        });
    }

    fn insert(&mut self, p: usize) {
        let point = self.pts[p].clone();
        let visible: Vec<usize> = (0..self.faces.len())
            .filter(|&f| {
                let face = &self.faces[f];
                face.alive && dot3(&face.normal, &point) > face.offset
            })
            .collect();
        if visible.is_empty() {
            return;
        }
        let mut horizon = Vec::new();
        for &f in &visible {
            let v = self.faces[f].v;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                let twin = self.edges[&(b, a)];
                let twin_face = &self.faces[twin];
                if !(dot3(&twin_face.normal, &point) > twin_face.offset) {
                    horizon.push((a, b));
                }
            }
        }
        for &f in &visible {
            self.faces[f].alive = false;
            let v = self.faces[f].v;
            for k in 0..3 {
                self.edges.remove(&(v[k], v[(k + 1) % 3]));
            }
        }
        for (a, b) in horizon {
            self.add_face(a, b, p);
        }
    }
}

fn cells_2d(pts: &[(Point, Scalar)]) -> Result<Vec<LowerHullCell>, GeometryError> {
    let n = pts.len();
    let a = 0;
    let b = (1..n).next().ok_or(GeometryError::DegenerateSpan)?;
    let c = (2..n)
        .find(|&i| !planar::cross(&pts[a].0, &pts[b].0, &pts[i].0).is_zero())
        .ok_or(GeometryError::DegenerateSpan)?;

    let denom = common_denominator(pts.iter().flat_map(|(p, h)| p.iter().chain(std::iter::once(h))));
    let scale = |q: &Scalar| -> BigInt { (q * Scalar::from_integer(denom.clone())).to_integer() };
    let mut ipts: Vec<I3> = pts
        .iter()
        .map(|(p, h)| [scale(&p[0]), scale(&p[1]), scale(h)])
        .collect();
    let max_z = ipts.iter().map(|q| q[2].clone()).max().unwrap();
    let top = [ipts[a][0].clone(), ipts[a][1].clone(), max_z + BigInt::from(1)];
    ipts.push(top);
    let t = n;
    let mut inner4 = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
    for &i in &[a, b, c, t] {
        for k in 0..3 {
            inner4[k] += &ipts[i][k];
        }
    }
    let mut h = Hull3 {
        pts: ipts,
        inner4,
        faces: Vec::new(),
        edges: HashMap::new(),
    };
    h.add_face(a, b, c);
    h.add_face(a, b, t);
    h.add_face(b, c, t);
    h.add_face(c, a, t);
    for i in 0..n {
        if i != a && i != b && i != c {
            h.insert(i);
        }
    }

    let d = Scalar::from_integer(denom);
    let mut groups: BTreeMap<(Point, Scalar), Vec<usize>> = BTreeMap::new();
    for f in h.faces.iter().filter(|f| f.alive && f.normal[2].is_negative()) {
        let nz = Scalar::from_integer(f.normal[2].clone());
        let slope = vec![
            -Scalar::from_integer(f.normal[0].clone()) / &nz,
            -Scalar::from_integer(f.normal[1].clone()) / &nz,
        ];
        let offset = -Scalar::from_integer(f.offset.clone()) / (&nz * &d);
        groups.entry((slope, offset)).or_default().extend(f.v);
    }
    groups
        .into_iter()
        .map(|((slope, offset), idx)| {
            let base: Vec<Point> = idx.iter().map(|&i| pts[i].0.clone()).collect();
            Ok(LowerHullCell {
                slope,
                offset,
                region: hull(&base, 2)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ipoint, ratio};

    #[test]
    fn collinear_middle_point_above_chord_is_dropped() {
        let lifted = vec![
            (ipoint(&[0]), int(0)),
            (ipoint(&[1]), int(1)),
            (ipoint(&[2]), int(0)),
        ];
        let lh = lower_hull(&lifted).unwrap();
        assert_eq!(lh.dropped, vec![1]);
        assert_eq!(lh.cells.len(), 1);
        assert_eq!(lh.cells[0].slope, ipoint(&[0]));
    }

    #[test]
    fn convex_data_keeps_every_point() {
        let lifted: Vec<(Point, Scalar)> = [(0, 0), (1, 0), (0, 1), (1, 1)]
            .iter()
            .map(|&(x, y)| (ipoint(&[x, y]), int(x * x + y * y + x * y)))
            .collect();
        let lh = lower_hull(&lifted).unwrap();
        assert!(lh.dropped.is_empty());
        assert_eq!(lh.cells.len(), 2);
        let total: Scalar = lh.cells.iter().map(|c| c.region.volume()).sum();
        assert_eq!(total, int(1));
        for (p, h) in &lifted {
            assert_eq!(&lh.evaluate(p), h);
        }
    }

    #[test]
    fn planar_lift_is_one_cell() {
        let lifted: Vec<(Point, Scalar)> = [(0, 0), (2, 0), (0, 2), (1, 1), (1, 0)]
            .iter()
            .map(|&(x, y)| (ipoint(&[x, y]), ratio(x, 2) - int(y)))
            .collect();
        let lh = lower_hull(&lifted).unwrap();
        assert_eq!(lh.cells.len(), 1);
        assert_eq!(lh.cells[0].slope, vec![ratio(1, 2), int(-1)]);
        assert_eq!(lh.cells[0].offset, int(0));
        assert_eq!(lh.cells[0].region.volume(), int(2));
    }

    #[test]
    fn degenerate_span() {
        let lifted = vec![
            (ipoint(&[0, 0]), int(0)),
            (ipoint(&[1, 1]), int(0)),
            (ipoint(&[2, 2]), int(5)),
        ];
        assert_eq!(lower_hull(&lifted), Err(GeometryError::DegenerateSpan));
    }
}
