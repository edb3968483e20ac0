//! Dimension-generic kernels on convex sets in the line and the plane.
//!
//! A convex set is stored as its vertex list: `[lo, hi]` (or `[p]`) in
//! dimension one, a counter-clockwise polygon in dimension two. Degenerate
//! polygons (a segment or a point) are allowed and have zero volume.

use crate::scalar::Field;

/// `(a - o) x (b - o)`.
pub fn cross<F: Field>(o: &[F], a: &[F], b: &[F]) -> F {
    (a[0].clone() - o[0].clone()) * (b[1].clone() - o[1].clone())
        - (a[1].clone() - o[1].clone()) * (b[0].clone() - o[0].clone())
}

pub fn dot<F: Field>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .fold(F::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn lex_less<F: Field>(a: &[F], b: &[F]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Convex hull in the plane: counter-clockwise, starting at the
/// lexicographically smallest vertex, with collinear points removed.
/// Collinear inputs give the two extreme points; a single distinct point
/// gives itself.
pub fn hull_2d<F: Field>(points: &[Vec<F>]) -> Vec<Vec<F>> {
    let mut pts: Vec<Vec<F>> = points.to_vec();
    pts.sort_by(|a, b| lex_less(a, b));
    pts.dedup_by(|a, b| lex_less(a, b) == std::cmp::Ordering::Equal);
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Vec<F>> = Vec::with_capacity(pts.len());
    for p in &pts {
        while lower.len() >= 2
            && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= F::zero()
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<F>> = Vec::with_capacity(pts.len());
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= F::zero()
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && lex_less(&lower[0], &lower[1]) == std::cmp::Ordering::Equal {
        lower.truncate(1);
    }
    lower
}

/// Hull of points on the line: `[min, max]`, or `[p]` when they coincide.
pub fn hull_1d<F: Field>(points: &[Vec<F>]) -> Vec<Vec<F>> {
    let mut iter = points.iter();
    let Some(first) = iter.next() else {
        return Vec::new();
    };
    let (mut lo, mut hi) = (first[0].clone(), first[0].clone());
    for p in iter {
        if p[0] < lo {
            lo = p[0].clone();
        }
        if p[0] > hi {
            hi = p[0].clone();
        }
    }
    if lo == hi {
        vec![vec![lo]]
    } else {
        vec![vec![lo], vec![hi]]
    }
}

pub fn hull<F: Field>(dim: usize, points: &[Vec<F>]) -> Vec<Vec<F>> {
    match dim {
        1 => hull_1d(points),
        _ => hull_2d(points),
    }
}

/// Intersects a convex set with `{m : <normal, m> <= offset}`.
pub fn clip<F: Field>(dim: usize, set: &[Vec<F>], normal: &[F], offset: &F) -> Vec<Vec<F>> {
    if set.is_empty() {
        return Vec::new();
    }
    match dim {
        1 => clip_1d(set, &normal[0], offset),
        _ => clip_2d(set, normal, offset),
    }
}

fn clip_1d<F: Field>(set: &[Vec<F>], a: &F, b: &F) -> Vec<Vec<F>> {
    let mut lo = set[0][0].clone();
    let mut hi = set[set.len() - 1][0].clone();
    if a.is_zero() {
        return if *b < F::zero() { Vec::new() } else { set.to_vec() };
    }
    let bound = b.clone() / a.clone();
    if *a > F::zero() {
        if bound < hi {
            hi = bound;
        }
    } else if bound > lo {
        lo = bound;
    }
    if lo > hi {
        Vec::new()
    } else if lo == hi {
        vec![vec![lo]]
    } else {
        vec![vec![lo], vec![hi]]
    }
}

fn clip_2d<F: Field>(poly: &[Vec<F>], normal: &[F], offset: &F) -> Vec<Vec<F>> {
    let values: Vec<F> = poly
        .iter()
        .map(|p| dot(normal, p) - offset.clone())
        .collect();
    if values.iter().all(|v| *v <= F::zero()) {
        return poly.to_vec();
    }
    let zero = F::zero();
    let mut out: Vec<Vec<F>> = Vec::with_capacity(poly.len() + 1);
    let k = poly.len();
    for i in 0..k {
        let j = (i + 1) % k;
        let (vp, vq) = (&values[i], &values[j]);
        if *vp <= zero {
            out.push(poly[i].clone());
        }
        if (*vp < zero && *vq > zero) || (*vp > zero && *vq < zero) {
            let lambda = vp.clone() / (vp.clone() - vq.clone());
            let p = &poly[i];
            let q = &poly[j];
            out.push(
                p.iter()
                    .zip(q)
                    .map(|(x, y)| x.clone() + lambda.clone() * (y.clone() - x.clone()))
                    .collect(),
            );
        }
    }
    // Degenerate inputs (segments) can emit the same crossing twice.
    out.dedup_by(|a, b| a == b);
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

/// Lebesgue measure in the ambient dimension.
pub fn volume<F: Field>(dim: usize, set: &[Vec<F>]) -> F {
    match dim {
        1 => {
            if set.len() == 2 {
                set[1][0].clone() - set[0][0].clone()
            } else {
                F::zero()
            }
        }
        _ => {
            if set.len() < 3 {
                return F::zero();
            }
            let mut twice = F::zero();
            for i in 0..set.len() {
                let j = (i + 1) % set.len();
                twice = twice + set[i][0].clone() * set[j][1].clone()
                    - set[j][0].clone() * set[i][1].clone();
            }
            twice * F::half()
        }
    }
}

/// First moment `\int_set m dm`.
pub fn moment<F: Field>(dim: usize, set: &[Vec<F>]) -> Vec<F> {
    match dim {
        1 => {
            if set.len() == 2 {
                let (lo, hi) = (&set[0][0], &set[1][0]);
                vec![(hi.clone() * hi.clone() - lo.clone() * lo.clone()) * F::half()]
            } else {
                vec![F::zero()]
            }
        }
        _ => {
            if set.len() < 3 {
                return vec![F::zero(), F::zero()];
            }
            let six = F::one() + F::one() + F::one() + F::one() + F::one() + F::one();
            let mut mx = F::zero();
            let mut my = F::zero();
            for i in 0..set.len() {
                let j = (i + 1) % set.len();
                let (p, q) = (&set[i], &set[j]);
                let c = p[0].clone() * q[1].clone() - q[0].clone() * p[1].clone();
                mx = mx + (p[0].clone() + q[0].clone()) * c.clone();
                my = my + (p[1].clone() + q[1].clone()) * c;
            }
            vec![mx / six.clone(), my / six]
        }
    }
}
