use std::sync::Arc;

use nama::harness::{gen_potential, gen_test_function, rng::Rng, GenConfig};
use nama::scalar::{dot, int, ipoint, ratio, to_f64, Point, Scalar};
use nama::toric::{
    convex_combination, energy, energy_legendre, envelope, lattice_envelope, max_combine, mixed_ma,
    orthogonality_defect, psh_envelope, sup_diff, Evaluate, NewtonPolytope, TestFunction, ToricPsh,
};
use proptest::prelude::*;

fn polytope(kind: u8) -> NewtonPolytope {
    match kind % 4 {
        0 => NewtonPolytope::unit_cube(2),
        1 => NewtonPolytope::standard_simplex(2),
        2 => NewtonPolytope::from_vertices(&[ipoint(&[-1, 0]), ipoint(&[1, -1]), ipoint(&[1, 1]), vec![ratio(-1, 2), int(1)]]).unwrap(),
        _ => NewtonPolytope::from_vertices(&[ipoint(&[-1]), vec![ratio(3, 2)]]).unwrap(),
    }
}

fn constraints(dim: usize) -> impl Strategy<Value = Vec<(Point, Scalar)>> {
    let coord = (-8i64..=8, 1i64..=3).prop_map(|(p, d)| ratio(p, d));
    prop::collection::vec((prop::collection::vec(coord.clone(), dim), coord), 1..6)
}

/// Slopes on a grid over the bounding box of `delta`, kept if inside.
fn grid_slopes(delta: &NewtonPolytope, n: i64) -> Vec<Point> {
    let dim = delta.dim();
    let lo: Vec<Scalar> = (0..dim).map(|i| delta.vertices().iter().map(|v| v[i].clone()).min().unwrap()).collect();
    let hi: Vec<Scalar> = (0..dim).map(|i| delta.vertices().iter().map(|v| v[i].clone()).max().unwrap()).collect();
    let step = |i: usize, k: i64| &lo[i] + (&hi[i] - &lo[i]) * ratio(2 * k + 1, 2 * n);
    let mut out = Vec::new();
    if dim == 1 {
        for k in 0..n {
            out.push(vec![step(0, k)]);
        }
    } else {
        for a in 0..n {
            for b in 0..n {
                let m = vec![step(0, a), step(1, b)];
                if delta.body().contains(&m) {
                    out.push(m);
                }
            }
        }
    }
    out
}

fn legendre_at(c: &[(Point, Scalar)], m: &[Scalar]) -> Scalar {
    c.iter().map(|(x, t)| dot(x, m) - t).max().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn envelope_matches_the_slope_grid_oracle(kind in 0u8..4, c1 in constraints(1), c2 in constraints(2)) {
        let delta = polytope(kind);
        let c = if delta.dim() == 1 { c1 } else { c2 };
        let f = envelope(&delta, &c).unwrap();
        let slopes = grid_slopes(&delta, 40);
        let reach = c.iter().map(|(x, _)| x.iter().map(|v| to_f64(v).abs()).sum::<f64>()).fold(0.0, f64::max);
        for (x, t) in &c {
            prop_assert!(f.value_at(x) <= *t);
            // A lower bound from grid slopes and an upper bound from its
            // Lipschitz constant in the slope.
            let y = x;
            let lower = slopes.iter().map(|m| to_f64(&(dot(m, y) - legendre_at(&c, m)))).fold(f64::MIN, f64::max);
            let width = delta.diameter_inf();
            let slack = to_f64(&width) / 40.0 * (reach + y.iter().map(|v| to_f64(v).abs()).sum::<f64>()) * 4.0;
            let v = to_f64(&f.value_at(y));
            prop_assert!(v >= lower - 1e-9 && v <= lower + slack + 1e-9, "{} vs grid {}", v, lower);
        }
    }

    #[test]
    fn atoms_match_laguerre_cell_counting(kind in 0u8..3, c in constraints(2)) {
        let delta = polytope(kind);
        let f = envelope(&delta, &c).unwrap();
        let ma = f.ma_measure();
        prop_assert_eq!(&ma.total_mass(), delta.volume());
        let slopes = grid_slopes(&delta, 60);
        let cell_area = to_f64(delta.volume()) / slopes.len() as f64;
        for (x, w) in ma.atoms() {
            let count = slopes
                .iter()
                .filter(|m| {
                    let best = legendre_at(&c, m);
                    c.iter().any(|(z, t)| z == x && dot(z, m) - t == best)
                })
                .count();
            let estimate = count as f64 * cell_area;
            prop_assert!((estimate - to_f64(w)).abs() < 0.08 * to_f64(delta.volume()), "{} vs {}", estimate, to_f64(w));
        }
    }

    #[test]
    fn max_and_mix_are_pointwise(c1 in constraints(2), c2 in constraints(2), s in 0i64..=4, probe in prop::collection::vec(prop::collection::vec((-6i64..=6).prop_map(|k| ratio(k, 2)), 2), 6)) {
        let delta = Arc::new(NewtonPolytope::unit_cube(2));
        let f = envelope(&delta, &c1).unwrap();
        let g = envelope(&delta, &c2).unwrap();
        let h = max_combine(&f, &g).unwrap();
        let t = ratio(s, 4);
        let mix = convex_combination(&f, &g, &t).unwrap();
        for y in &probe {
            prop_assert_eq!(h.value_at(y), std::cmp::max(f.value_at(y), g.value_at(y)));
            prop_assert_eq!(mix.value_at(y), (int(1) - &t) * f.value_at(y) + &t * g.value_at(y));
        }
        prop_assert_eq!(&h.ma_measure().total_mass(), delta.volume());
        let up = sup_diff(&f, &g).unwrap();
        for y in &probe {
            prop_assert!(f.value_at(y) - g.value_at(y) <= up);
        }
    }
}

#[test]
fn generated_potentials_are_canonical() {
    for seed in 0..1000u64 {
        let cfg = GenConfig::new(seed, 1 + (seed % 2) as usize);
        let mut rng = cfg.rng();
        let delta = Arc::new(nama::harness::gen_polytope(&mut rng, &cfg));
        let f = gen_potential(&mut rng, &cfg, &delta);
        f.validate().unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
}

#[test]
fn energy_in_one_dimension_matches_direct_integration() {
    // E(f) - E(g) = (1/2) int (f - g) d(MA f + MA g) for n = 1.
    let mut rng = Rng::new(5);
    let cfg = GenConfig::new(5, 1);
    for _ in 0..40 {
        let delta = Arc::new(nama::harness::gen_polytope(&mut rng, &cfg));
        let f = gen_potential(&mut rng, &cfg, &delta);
        let g = ToricPsh::support_function(&delta);
        let d = |p: &Point| f.value_at(p) - g.value_at(p);
        let sum: Scalar = f.ma_measure().atoms().iter().chain(g.ma_measure().atoms()).map(|(p, w)| d(p) * w).sum();
        assert_eq!(energy(&f, &g).unwrap(), sum / int(2));
        assert_eq!(energy_legendre(&f, &g).unwrap(), energy(&f, &g).unwrap());
    }
}

#[test]
fn mixed_measure_of_equal_arguments_is_ma() {
    let mut rng = Rng::new(9);
    let cfg = GenConfig::new(9, 2);
    for _ in 0..20 {
        let delta = Arc::new(nama::harness::gen_polytope(&mut rng, &cfg));
        let f = gen_potential(&mut rng, &cfg, &delta);
        assert_eq!(mixed_ma(&[&f, &f]).unwrap(), f.ma_measure());
    }
}

#[test]
fn envelope_of_a_test_function_has_zero_defect() {
    let mut rng = Rng::new(3);
    for i in 0..60 {
        let cfg = GenConfig::new(i, 1 + (i % 2) as usize);
        let delta = Arc::new(nama::harness::gen_polytope(&mut rng, &cfg));
        let f: TestFunction = gen_test_function(&mut rng, &cfg, &delta);
        let p = psh_envelope(&f);
        assert_eq!(orthogonality_defect(&f, &p).unwrap(), int(0));
    }
}

#[test]
fn lattice_envelopes_increase_to_the_envelope() {
    let delta = NewtonPolytope::from_vertices(&[ipoint(&[0, 0]), ipoint(&[2, 0]), ipoint(&[0, 2])]).unwrap();
    let c = vec![
        (ipoint(&[0, 0]), int(0)),
        (vec![ratio(5, 2), int(1)], ratio(3, 2)),
        (vec![int(-1), ratio(3, 2)], ratio(2, 3)),
    ];
    let exact = envelope(&delta, &c).unwrap();
    let mut prev: Option<ToricPsh> = None;
    for k in 0..6 {
        let phi = lattice_envelope(&delta, &c, 1 << k).unwrap();
        assert!(sup_diff(&phi, &exact).unwrap() <= int(0));
        if let Some(p) = &prev {
            assert!(sup_diff(p, &phi).unwrap() <= int(0), "refinement at m = {}", 1 << k);
        }
        prev = Some(phi);
    }
}
