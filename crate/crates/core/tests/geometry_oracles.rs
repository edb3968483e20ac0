use nama::polyhedra::{clip, convex_mix, hull, minkowski_sum, HalfSpace, Polytope};
use nama::scalar::{dot, int, ratio, Point, Scalar};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn q() -> impl Strategy<Value = Scalar> {
    (-12i64..=12, 1i64..=4).prop_map(|(p, d)| ratio(p, d))
}

fn pt2() -> impl Strategy<Value = Point> {
    (q(), q()).prop_map(|(a, b)| vec![a, b])
}

fn cross(o: &[Scalar], a: &[Scalar], b: &[Scalar]) -> Scalar {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// `p` lies in some (possibly degenerate) triangle of the other points.
fn in_some_triangle(p: &Point, others: &[&Point]) -> bool {
    let k = others.len();
    let on_segment = |a: &Point, b: &Point| {
        cross(a, b, p).is_zero()
            && (0..2).all(|i| p[i] >= std::cmp::min(a[i].clone(), b[i].clone()) && p[i] <= std::cmp::max(a[i].clone(), b[i].clone()))
    };
    for i in 0..k {
        if others[i] == p {
            return true;
        }
        for j in i + 1..k {
            if on_segment(others[i], others[j]) {
                return true;
            }
            for l in j + 1..k {
                let (a, b, c) = (others[i], others[j], others[l]);
                let s = [cross(a, b, p), cross(b, c, p), cross(c, a, p)];
                let nonneg = s.iter().all(|x| !x.is_negative());
                let nonpos = s.iter().all(|x| !x.is_positive());
                if (nonneg || nonpos) && !cross(a, b, c).is_zero() {
                    return true;
                }
            }
        }
    }
    false
}

/// Area by the shoelace formula over an independently sorted vertex ring.
fn shoelace(vs: &[Point]) -> Scalar {
    let c: Point = (0..2)
        .map(|i| vs.iter().map(|v| v[i].clone()).sum::<Scalar>() / int(vs.len() as i64))
        .collect();
    let mut ring = vs.to_vec();
    ring.sort_by(|a, b| {
        let half = |v: &Point| (&v[1] - &c[1]).is_negative() || ((&v[1] - &c[1]).is_zero() && (&v[0] - &c[0]).is_negative());
        half(a).cmp(&half(b)).then_with(|| cross(&c, b, a).cmp(&Scalar::zero()))
    });
    let mut s = Scalar::zero();
    for i in 0..ring.len() {
        let (a, b) = (&ring[i], &ring[(i + 1) % ring.len()]);
        s += &a[0] * &b[1] - &a[1] * &b[0];
    }
    s.abs() / int(2)
}

fn support(vs: &[Point], y: &[Scalar]) -> Scalar {
    vs.iter().map(|v| dot(v, y)).max().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hull_vertices_match_the_brute_force_oracle(pts in prop::collection::vec(pt2(), 3..9)) {
        let Ok(h) = hull(&pts, 2) else { return Ok(()); };
        for p in &pts {
            let others: Vec<&Point> = pts.iter().filter(|x| *x != p).collect();
            let is_vertex = h.vertices().contains(p);
            prop_assert_eq!(is_vertex, !in_some_triangle(p, &others), "point {:?}", p);
            prop_assert!(h.contains(p));
        }
    }

    #[test]
    fn area_matches_shoelace(pts in prop::collection::vec(pt2(), 3..9)) {
        let Ok(h) = hull(&pts, 2) else { return Ok(()); };
        if h.vertices().len() >= 3 {
            prop_assert_eq!(h.volume(), shoelace(h.vertices()));
        }
    }

    #[test]
    fn a_cut_splits_the_area(pts in prop::collection::vec(pt2(), 3..8), n in pt2(), c in q()) {
        let Ok(p) = hull(&pts, 2) else { return Ok(()); };
        if n.iter().all(|x| x.is_zero()) { return Ok(()); }
        let h = HalfSpace::new(n, c);
        let a = clip(&p, std::slice::from_ref(&h)).unwrap();
        let b = clip(&p, &[h.complement()]).unwrap();
        prop_assert_eq!(a.volume() + b.volume(), p.volume());
        for v in a.vertices() {
            prop_assert!(h.contains(v) && p.contains(v));
        }
    }

    #[test]
    fn minkowski_support_is_additive(a in prop::collection::vec(pt2(), 1..6), b in prop::collection::vec(pt2(), 1..6), y in pt2()) {
        let (Ok(p), Ok(r)) = (hull(&a, 2), hull(&b, 2)) else { return Ok(()); };
        let s = minkowski_sum(&p, &r).unwrap();
        prop_assert_eq!(support(s.vertices(), &y), support(&a, &y) + support(&b, &y));
        let half = convex_mix(&p, &r, &ratio(1, 2)).unwrap();
        prop_assert_eq!(support(half.vertices(), &y) * int(2), support(&a, &y) + support(&b, &y));
    }

    #[test]
    fn intervals_behave(a in q(), b in q(), c in q()) {
        let Ok(i) = hull(&[vec![a.clone()], vec![b.clone()]], 1) else { return Ok(()); };
        prop_assert_eq!(i.volume(), (&a - &b).abs());
        let cut = clip(&i, &[HalfSpace::new(vec![int(1)], c.clone())]).unwrap();
        let lo = std::cmp::min(a.clone(), b.clone());
        let hi = std::cmp::max(a, b);
        let expect = if c <= lo { Scalar::zero() } else { std::cmp::min(c, hi.clone()) - lo };
        prop_assert_eq!(cut.volume(), expect);
    }
}

#[test]
fn grid_count_approximates_area() {
    // Midpoint counting on a 200 x 200 grid.
    let p: Polytope = hull(
        &[vec![int(0), int(0)], vec![int(2), ratio(1, 3)], vec![ratio(1, 2), int(2)], vec![int(-1), int(1)]],
        2,
    )
    .unwrap();
    let n = 200;
    let mut inside = 0u64;
    for i in 0..n {
        for j in 0..n {
            let x = ratio(-1, 1) + ratio(3 * (2 * i + 1), 2 * n);
            let y = ratio(3 * (2 * j + 1), 2 * n) - ratio(1, 2);
            if p.contains(&[x, y]) {
                inside += 1;
            }
        }
    }
    let estimate = inside as f64 * 9.0 / (n * n) as f64;
    let exact = nama::scalar::to_f64(&p.volume());
    assert!((estimate - exact).abs() < 0.05, "{estimate} vs {exact}");
}
