use std::sync::Arc;

use nama::harness::{
    capacity_lower, gen_polytope, gen_test_function, orthogonality_violations, rng::case_seed, run_case, run_suite,
    run_suite_dims, GenConfig, HarnessError, SUITES,
};
use nama::scalar::{int, ipoint, ratio, Point, Scalar};
use nama::toric::{envelope, psh_envelope, AtomicMeasure, Evaluate, NewtonPolytope, ToricPsh};

#[test]
fn reports_are_deterministic() {
    for suite in ["locality", "energy_identities", "graph_suite"] {
        let cfg = GenConfig::new(11, 2);
        let a = run_suite_dims(suite, &cfg, 24, &[1, 2]).unwrap();
        let b = run_suite_dims(suite, &cfg, 24, &[1, 2]).unwrap();
        assert!(a.same_content(&b), "{suite}");
        assert!(a.passed(), "{suite}: {:?}", a.failures);
    }
}

#[test]
fn every_named_suite_runs() {
    for suite in SUITES {
        let r = run_suite(suite, &GenConfig::new(3, 1), 2).unwrap();
        assert_eq!(r.cases, 2);
    }
    assert_eq!(
        run_suite("no_such_suite", &GenConfig::new(0, 1), 1),
        Err(HarnessError::UnknownSuite("no_such_suite".into()))
    );
    assert!(matches!(run_suite("locality", &GenConfig::new(0, 3), 1), Err(HarnessError::InvalidConfig(_))));
}

#[test]
fn moving_mass_between_atoms_is_caught() {
    // Total mass stays right, so only the per-atom check can notice.
    let mut caught = 0;
    for seed in 0..40u64 {
        let cfg = GenConfig::new(seed, 1 + (seed % 2) as usize);
        let mut rng = cfg.rng();
        let delta = Arc::new(gen_polytope(&mut rng, &cfg));
        let f = gen_test_function(&mut rng, &cfg, &delta);
        let p = psh_envelope(&f);
        let ma = p.ma_measure();
        assert!(orthogonality_violations(&f, &p, &ma).is_empty(), "seed {seed}");
        if ma.len() < 2 {
            continue;
        }
        let eps = ma.atoms()[0].1.clone() / int(7);
        let moved: Vec<(Point, Scalar)> = ma
            .atoms()
            .iter()
            .enumerate()
            .map(|(i, (x, w))| match i {
                0 => (x.clone(), w - &eps),
                1 => (x.clone(), w + &eps),
                _ => (x.clone(), w.clone()),
            })
            .collect();
        let bad = AtomicMeasure::new(moved).unwrap();
        let v = orthogonality_violations(&f, &p, &bad);
        assert!(v.iter().all(|v| v.assertion != "orthogonality.mass"));
        assert!(v.iter().any(|v| v.assertion == "orthogonality.atom_weight"), "seed {seed}");
        caught += 1;
    }
    assert!(caught > 10);
}

#[test]
fn capacity_lower_bound_on_the_square() {
    // With g(y) = max(0, y_1) + max(0, y_2), the candidate g(. - x) - g(-x)
    // lies in [g - |x|_1, g], so it is admissible iff |x|_1 <= 1, and its
    // whole mass 1 sits at x.
    let sq = NewtonPolytope::unit_cube(2);
    let g = ToricPsh::support_function(&sq);
    let cand = |x: &Point| {
        let minus: Point = x.iter().map(|c| -c).collect();
        envelope(&sq, &[(x.clone(), -g.value_at(&minus))]).unwrap()
    };
    let sites = [vec![ratio(1, 4), ratio(-1, 4)], vec![ratio(1, 2), int(0)], vec![ratio(-1, 3), ratio(2, 3)]];
    let ok: Vec<ToricPsh> = sites.iter().map(cand).collect();
    assert_eq!(capacity_lower(&sq, &[sites[1].clone()], &ok).unwrap(), int(1));
    assert_eq!(capacity_lower(&sq, &[ipoint(&[5, 5])], &ok).unwrap(), int(0));
    let mut bad = ok.clone();
    bad.push(cand(&vec![int(1), ratio(1, 2)]));
    assert_eq!(capacity_lower(&sq, &[sites[0].clone()], &bad), Err(HarnessError::CandidateOutOfRange(3)));
}

#[test]
fn a_failure_replays_alone() {
    // The one known decay miss (dimension 1, seed 7, 300 cases).
    let cfg = GenConfig::new(7, 1);
    let r = run_suite("zariski_defect", &cfg, 300).unwrap();
    assert_eq!(r.failures.len(), 1);
    let f = &r.failures[0];
    assert_eq!(f.assertion, "zariski.decay");
    let idx = (0..300u64).find(|&i| case_seed(7, i) == f.seed).unwrap();
    let again = run_case("zariski_defect", &GenConfig { seed: f.seed, ..cfg }).unwrap();
    assert_eq!(again, r.failures, "case {idx}");
    assert!(f.witness.get("instances").is_some());
}
