use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use super::gen::{
    gen_dirac_problem, gen_graph, gen_graph_measure, gen_lattice_polytope, gen_point, gen_polytope, gen_potential,
    gen_test_function, GenConfig,
};
use super::rng::Rng;
use super::{capacity_lower, Failure};
use crate::curve::{
    curvature, ddc, energy_graph, green, solve_poisson, solve_poisson_grounded, GraphFunction, GraphMeasure,
    GroundedLaplacian, Location, MetricGraph,
};
use crate::io::{Instance, InstanceFile};
use crate::linalg::solve_dense;
use crate::scalar::{format_scalar, int, l1_norm, to_f64, Point, Scalar};
use crate::solver::{dual_objective, dual_objective_fast, dual_objective_float, normalize, solve, DiracProblem, Mode, SolverConfig};
use crate::toric::{
    convex_combination, defect_against, energy, energy_legendre, envelope, envelope_in, fmt_point, lattice_envelope,
    max_combine, mixed_ma, orthogonality_defect, psh_envelope, sup_abs_diff, sup_diff, AtomicMeasure, Evaluate,
    NewtonPolytope, TestFunction, ToricPsh,
};

type CaseResult = Result<(), Box<dyn std::error::Error>>;

/// Relative tolerance of float finite differences against the exact
/// gradient, relative to `max(|gradient|, vol)`.
const FD_TOL: f64 = 1e-4;
const FD_STEP: f64 = 1e-6;
/// Agreement of two float solves, in `t` and in sup norm.
const AGREE_TOL: f64 = 1e-8;
/// Float objective may dip by this much relative to `max(1, |F|) vol`.
const ASCENT_SLACK: f64 = 1e-11;

struct Case {
    seed: u64,
    cfg: GenConfig,
    rng: Rng,
    failures: Vec<Failure>,
}

impl Case {
    fn fail(&mut self, assertion: &str, instances: Vec<Value>, detail: String) {
        self.failures.push(Failure {
            seed: self.seed,
            witness: json!({"detail": detail, "instances": instances}),
            assertion: assertion.to_string(),
        });
    }

    fn check(&mut self, ok: bool, assertion: &str, instances: impl FnOnce() -> Vec<Value>, detail: impl FnOnce() -> String) {
        if !ok {
            let inst = instances();
            let d = detail();
            self.fail(assertion, inst, d);
        }
    }

    fn polytope(&mut self) -> Arc<NewtonPolytope> {
        Arc::new(gen_polytope(&mut self.rng, &self.cfg))
    }

    fn potential(&mut self, delta: &Arc<NewtonPolytope>) -> ToricPsh {
        gen_potential(&mut self.rng, &self.cfg, delta)
    }

    fn ratio(&mut self, lo: i64, hi: i64) -> Scalar {
        self.rng.ratio(lo, hi, self.cfg.coefficient_bound)
    }
}

pub(crate) fn run(name: &str, cfg: &GenConfig) -> Option<Vec<Failure>> {
    let body: fn(&mut Case) -> CaseResult = match name {
        "locality" => locality,
        "comparison" => comparison,
        "superadditivity" => superadditivity,
        "envelope_axioms" => envelope_axioms,
        "orthogonality" => orthogonality,
        "differentiability" => differentiability,
        "energy_identities" => energy_identities,
        "capacity" => capacity,
        "uniqueness" => uniqueness,
        "zariski_defect" => zariski_defect,
        "graph_suite" => graph_suite,
        _ => return None,
    };
    let mut case = Case {
        seed: cfg.seed,
        cfg: *cfg,
        rng: cfg.rng(),
        failures: Vec::new(),
    };
    if let Err(e) = body(&mut case) {
        case.fail(&format!("{name}.error"), Vec::new(), e.to_string());
    }
    Some(case.failures)
}

fn psh_instance(f: &ToricPsh) -> Value {
    InstanceFile::new(
        Mode::Rational,
        Instance::ToricEnvelope {
            delta: f.delta().clone(),
            constraints: f.generators().to_vec(),
            reference: None,
        },
    )
    .to_value()
}

fn test_instances(f: &TestFunction) -> Vec<Value> {
    f.branches().iter().map(psh_instance).collect()
}

fn dirac_instance(p: &DiracProblem, mode: Mode) -> Value {
    InstanceFile::new(mode, Instance::ToricDirac { problem: p.clone(), solver: None }).to_value()
}

fn poisson_instance(g: &MetricGraph, omega: &GraphMeasure, mu: &GraphMeasure) -> Value {
    InstanceFile::new(
        Mode::Rational,
        Instance::CurvePoisson {
            graph: g.clone(),
            omega: omega.clone(),
            mu: mu.clone(),
        },
    )
    .to_value()
}

fn s(q: &Scalar) -> String {
    format_scalar(q)
}

fn pow(q: &Scalar, n: usize) -> Scalar {
    (0..n).fold(Scalar::one(), |acc, _| acc * q)
}

/// Two potentials over one polytope, shifted (usually) so that each is
/// larger somewhere.
fn crossing_pair(case: &mut Case) -> Result<(ToricPsh, ToricPsh), Box<dyn std::error::Error>> {
    let delta = case.polytope();
    let phi = case.potential(&delta);
    let psi = case.potential(&delta);
    if case.rng.chance(1, 4) {
        return Ok((phi, psi));
    }
    let hi = sup_diff(&phi, &psi)?;
    let lo = -sup_diff(&psi, &phi)?;
    let mid = (hi + lo) / int(2);
    Ok((phi, psi.shift(&mid)))
}

fn atom_points(ms: &[&AtomicMeasure]) -> BTreeSet<Point> {
    ms.iter().flat_map(|m| m.atoms().iter().map(|(p, _)| p.clone())).collect()
}

fn locality(case: &mut Case) -> CaseResult {
    let (phi, psi) = crossing_pair(case)?;
    let h = max_combine(&phi, &psi)?;
    let mh = h.ma_measure();
    for (a, b) in [(&phi, &psi), (&psi, &phi)] {
        let ma = a.ma_measure();
        for p in atom_points(&[&mh, &ma]) {
            if a.value_at(&p) > b.value_at(&p) {
                let (wh, wa) = (mh.weight_at(&p), ma.weight_at(&p));
                case.check(
                    wh == wa,
                    "locality.restriction",
                    || vec![psh_instance(a), psh_instance(b)],
                    || format!("at {}: MA(max) = {} but MA = {}", fmt_point(&p), s(&wh), s(&wa)),
                );
            }
        }
    }
    for p in crate::toric::overlay_points(&phi, &psi) {
        let expect = std::cmp::max(phi.value_at(&p), psi.value_at(&p));
        let got = h.value_at(&p);
        case.check(
            got == expect,
            "locality.max_value",
            || vec![psh_instance(&phi), psh_instance(&psi)],
            || format!("at {}: max_combine gives {} instead of {}", fmt_point(&p), s(&got), s(&expect)),
        );
    }
    Ok(())
}

fn comparison(case: &mut Case) -> CaseResult {
    let (phi, psi) = crossing_pair(case)?;
    let (ma_phi, ma_psi) = (phi.ma_measure(), psi.ma_measure());
    let vol = phi.delta().volume().clone();
    for (name, m) in [("phi", &ma_phi), ("psi", &ma_psi)] {
        let total = m.total_mass();
        case.check(
            total == vol,
            "comparison.mass",
            || vec![psh_instance(&phi), psh_instance(&psi)],
            || format!("MA({name}) has mass {} but the polytope has volume {}", s(&total), s(&vol)),
        );
    }
    for (a, b, ma_a, ma_b) in [(&phi, &psi, &ma_phi, &ma_psi), (&psi, &phi, &ma_psi, &ma_phi)] {
        let below = |p: &Point| a.value_at(p) < b.value_at(p);
        let lhs = ma_b.mass_where(below);
        let rhs = ma_a.mass_where(below);
        case.check(
            lhs <= rhs,
            "comparison.mass_inequality",
            || vec![psh_instance(a), psh_instance(b)],
            || format!("MA(psi) on {{phi < psi}} is {} > MA(phi) there, {}", s(&lhs), s(&rhs)),
        );
    }
    Ok(())
}

fn superadditivity(case: &mut Case) -> CaseResult {
    let (phi, psi) = crossing_pair(case)?;
    let n = phi.dim();
    let (ma_phi, ma_psi) = (phi.ma_measure(), psi.ma_measure());
    for t in [Scalar::new(1.into(), 2.into()), Scalar::new(1.into(), 4.into())] {
        let h = convex_combination(&phi, &psi, &t)?;
        let mh = h.ma_measure();
        let total = mh.total_mass();
        case.check(
            &total == phi.delta().volume(),
            "superadditivity.mass",
            || vec![psh_instance(&phi), psh_instance(&psi)],
            || format!("combination at {} has mass {}", s(&t), s(&total)),
        );
        let (a, b) = (pow(&(Scalar::one() - &t), n), pow(&t, n));
        for p in atom_points(&[&ma_phi, &ma_psi]) {
            let lower = &a * ma_phi.weight_at(&p) + &b * ma_psi.weight_at(&p);
            let got = mh.weight_at(&p);
            case.check(
                got >= lower,
                "superadditivity.atomwise",
                || vec![psh_instance(&phi), psh_instance(&psi)],
                || format!("at {} with t = {}: MA(h) = {} < {}", fmt_point(&p), s(&t), s(&got), s(&lower)),
            );
        }
    }
    Ok(())
}

fn sample_points(case: &mut Case, fs: &[&ToricPsh], extra: usize) -> Vec<Point> {
    let dim = fs[0].dim();
    let mut pts: BTreeSet<Point> = fs.iter().flat_map(|f| f.generators().iter().map(|(x, _)| x.clone())).collect();
    for _ in 0..extra {
        pts.insert(gen_point(&mut case.rng, &case.cfg, dim));
    }
    pts.into_iter().collect()
}

fn envelope_axioms(case: &mut Case) -> CaseResult {
    let delta = case.polytope();
    let f = gen_test_function(&mut case.rng, &case.cfg, &delta);
    let g = gen_test_function(&mut case.rng, &case.cfg, &delta);
    let (pf, pg) = (psh_envelope(&f), psh_envelope(&g));
    let both = || {
        let mut v = test_instances(&f);
        v.extend(test_instances(&g));
        v
    };

    // Contact and domination.
    for p in sample_points(case, &[&pf], 6) {
        let (a, b) = (pf.value_at(&p), f.value_at(&p));
        case.check(a <= b, "envelope.below", || test_instances(&f), || format!("P(f) > f at {}", fmt_point(&p)));
    }
    for (p, _) in pf.ma_measure().atoms() {
        let (a, b) = (pf.value_at(p), f.value_at(p));
        case.check(
            a == b,
            "envelope.contact",
            || test_instances(&f),
            || format!("MA(P(f)) charges {} where P(f) = {} < f = {}", fmt_point(p), s(&a), s(&b)),
        );
    }

    // Monotonicity: adding a branch can only lower the envelope.
    let mut branches = f.branches().to_vec();
    branches.push(case.potential(&delta));
    let lower = TestFunction::new(branches)?;
    let gap = sup_diff(&psh_envelope(&lower), &pf)?;
    case.check(
        !gap.is_positive(),
        "envelope.monotone",
        || test_instances(&lower),
        || format!("P(min(f, h)) exceeds P(f) by {}", s(&gap)),
    );

    let c = case.ratio(-2, 2);
    let shifted = psh_envelope(&f.shift(&c));
    case.check(
        shifted == pf.shift(&c),
        "envelope.translation",
        || test_instances(&f),
        || format!("P(f + {}) is not P(f) + {}", s(&c), s(&c)),
    );

    // Lipschitz bound, with sup |f - g| taken over the atoms of both
    // envelopes and the contact points among branch sites.
    let mut pts = atom_points(&[&pf.ma_measure(), &pg.ma_measure()]);
    for x in f.branch_sites().into_iter().chain(g.branch_sites()) {
        if pf.value_at(&x) == f.value_at(&x) || pg.value_at(&x) == g.value_at(&x) {
            pts.insert(x);
        }
    }
    let bound = pts
        .iter()
        .map(|p| (f.value_at(p) - g.value_at(p)).abs())
        .max()
        .expect("atoms exist");
    let dist = sup_abs_diff(&pf, &pg)?;
    case.check(
        dist <= bound,
        "envelope.lipschitz",
        both,
        || format!("sup |P(f) - P(g)| = {} exceeds {}", s(&dist), s(&bound)),
    );

    for k in 1..=3 {
        let t = Scalar::new(k.into(), 4.into());
        let h = f.combine(&g, &t)?;
        let ph = psh_envelope(&h);
        let mix = convex_combination(&pf, &pg, &t)?;
        let gap = sup_diff(&mix, &ph)?;
        case.check(
            !gap.is_positive(),
            "envelope.concavity",
            both,
            || format!("(1-t)P(f) + tP(g) exceeds P((1-t)f + tg) by {} at t = {}", s(&gap), s(&t)),
        );
        for p in sample_points(case, &[&pf, &pg], 3) {
            let lhs = ph.value_at(&p);
            let rhs = (Scalar::one() - &t) * pf.value_at(&p) + &t * pg.value_at(&p);
            case.check(
                lhs >= rhs,
                "envelope.concavity",
                both,
                || format!("at {} with t = {}: {} < {}", fmt_point(&p), s(&t), s(&lhs), s(&rhs)),
            );
        }
    }
    Ok(())
}

/// A violated orthogonality assertion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub assertion: String,
    pub detail: String,
}

/// Checks `ma` as the Monge-Ampère measure of `phi = P(f)`: zero defect,
/// total mass, and every weight against the volume of the
/// subdifferential at its point.
pub fn orthogonality_violations(f: &TestFunction, phi: &ToricPsh, ma: &AtomicMeasure) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |a: &str, d: String| {
        out.push(Violation {
            assertion: a.to_string(),
            detail: d,
        })
    };
    match defect_against(f, phi, ma) {
        Ok(d) if d.is_zero() => {}
        Ok(d) => push("orthogonality.defect", format!("defect {} is not zero", s(&d))),
        Err(e) => push("orthogonality.dominated", e.to_string()),
    }
    let total = ma.total_mass();
    if &total != phi.delta().volume() {
        push(
            "orthogonality.mass",
            format!("total mass {} differs from the volume {}", s(&total), s(phi.delta().volume())),
        );
    }
    let points: BTreeSet<Point> = ma
        .atoms()
        .iter()
        .map(|(p, _)| p.clone())
        .chain(phi.generators().iter().map(|(x, _)| x.clone()))
        .collect();
    for p in points {
        let expect = phi.subdifferential(&p).volume();
        let got = ma.weight_at(&p);
        if got != expect {
            push(
                "orthogonality.atom_weight",
                format!(
                    "atom at {} has weight {} but the subdifferential there has volume {}",
                    fmt_point(&p),
                    s(&got),
                    s(&expect)
                ),
            );
        }
    }
    out
}

fn orthogonality(case: &mut Case) -> CaseResult {
    let delta = case.polytope();
    let f = gen_test_function(&mut case.rng, &case.cfg, &delta);
    let p = psh_envelope(&f);
    if let Err(e) = p.validate() {
        case.fail("orthogonality.canonical", test_instances(&f), e);
    }
    for v in orthogonality_violations(&f, &p, &p.ma_measure()) {
        case.fail(&v.assertion, test_instances(&f), v.detail);
    }
    let c = case.ratio(0, 2);
    let d = orthogonality_defect(&f, &p.shift(&-&c))?;
    let expect = &c * delta.volume();
    case.check(
        d == expect,
        "orthogonality.shift",
        || test_instances(&f),
        || format!("defect of P(f) - {} is {} instead of {}", s(&c), s(&d), s(&expect)),
    );
    Ok(())
}

/// Forward differences of `values` at equally spaced nodes.
fn forward_differences(values: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![values[0].clone()];
    let mut row = values.to_vec();
    while row.len() > 1 {
        row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
        out.push(row[0].clone());
    }
    out
}

fn random_t(case: &mut Case, p: &DiracProblem) -> Vec<Scalar> {
    p.initial_t().into_iter().map(|t| t + case.ratio(-1, 1)).collect()
}

fn differentiability(case: &mut Case) -> CaseResult {
    let delta = gen_polytope(&mut case.rng, &case.cfg);
    let max_sites = case.cfg.function_complexity.min(6);
    let p = gen_dirac_problem(&mut case.rng, &case.cfg, &delta, max_sites);
    let t = random_t(case, &p);
    let n = delta.dim();
    let witness = || vec![dirac_instance(&p, Mode::Rational)];

    let (value, grad) = dual_objective(&p, &t)?;
    let (fast, fast_grad) = dual_objective_fast(&p, &t)?;
    case.check(
        value == fast && grad == fast_grad,
        "differentiability.consistency",
        witness,
        || format!("energy-based value {} vs cell-based {}", s(&value), s(&fast)),
    );
    let f = p.potential(&t)?;
    let ma = f.ma_measure();
    for (i, (x, w)) in p.sites().iter().zip(p.weights()).enumerate() {
        let expect = ma.weight_at(x) - w;
        case.check(
            grad[i] == expect,
            "differentiability.gradient",
            witness,
            || format!("coordinate {i}: gradient {} but mass minus weight is {}", s(&grad[i]), s(&expect)),
        );
    }

    // Near 0+, s -> F(t + s v) is a polynomial of degree n + 1.
    let dim_t = t.len();
    let mut dirs: Vec<Vec<Scalar>> = Vec::new();
    let mut e = vec![Scalar::zero(); dim_t];
    e[case.rng.below(dim_t as u64) as usize] = Scalar::one();
    dirs.push(e);
    dirs.push((0..dim_t).map(|_| int(case.rng.range(-2, 2))).collect());
    for v in dirs {
        let expect: Scalar = grad.iter().zip(&v).map(|(g, c)| g * c).sum();
        // The (n + 2)-th difference can vanish by accident across pieces,
        // so two consecutive scales must give the same derivative.
        let estimate = |eps: &Scalar| -> Result<Option<Scalar>, crate::solver::SolverError> {
            let values = (0..=n + 2)
                .map(|k| {
                    let step = eps * int(k as i64);
                    let tk: Vec<Scalar> = t.iter().zip(&v).map(|(a, c)| a + &step * c).collect();
                    dual_objective_fast(&p, &tk).map(|r| r.0)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let diffs = forward_differences(&values);
            if !diffs[n + 2].is_zero() {
                return Ok(None);
            }
            // Newton's forward formula for the derivative at 0.
            let d: Scalar = (1..=n + 1)
                .map(|k| {
                    let sign = if k % 2 == 1 { int(1) } else { int(-1) };
                    sign * &diffs[k] / int(k as i64)
                })
                .sum();
            Ok(Some(d / eps))
        };
        let mut eps = Scalar::one();
        let mut found = None;
        let mut prev = None;
        for _ in 0..60 {
            let cur = estimate(&eps)?;
            if cur.is_some() && cur == prev {
                found = cur;
                break;
            }
            prev = cur;
            eps /= int(2);
        }
        match found {
            Some(d) => case.check(
                d == expect,
                "differentiability.directional",
                witness,
                || format!("one-sided derivative {} but <grad, v> = {}", s(&d), s(&expect)),
            ),
            None => case.fail(
                "differentiability.directional",
                witness(),
                "no polynomial piece found near 0".into(),
            ),
        }
    }

    // Float mode: central differences.
    let tf: Vec<f64> = t.iter().map(to_f64).collect();
    let (_, gf) = dual_objective_float(&p, &tf)?;
    let vol = to_f64(delta.volume());
    for i in 0..dim_t {
        let mut up = tf.clone();
        let mut down = tf.clone();
        up[i] += FD_STEP;
        down[i] -= FD_STEP;
        let fd = (dual_objective_float(&p, &up)?.0 - dual_objective_float(&p, &down)?.0) / (up[i] - down[i]);
        let scale = gf[i].abs().max(vol);
        case.check(
            (fd - gf[i]).abs() <= FD_TOL * scale,
            "differentiability.finite_difference",
            || vec![dirac_instance(&p, Mode::Float)],
            || format!("coordinate {i}: central difference {fd:e}, gradient {:e}", gf[i]),
        );
    }
    Ok(())
}

/// Interpolating polynomial coefficients through `(s_k, v_k)`.
fn interpolate(nodes: &[Scalar], values: &[Scalar]) -> Vec<Scalar> {
    let rows: Vec<Vec<Scalar>> = nodes
        .iter()
        .map(|x| (0..nodes.len()).map(|j| pow(x, j)).collect())
        .collect();
    solve_dense(rows, values).expect("distinct nodes")
}

fn poly_eval(c: &[Scalar], x: &Scalar) -> Scalar {
    c.iter().rev().fold(Scalar::zero(), |acc, a| acc * x + a)
}

fn energy_identities(case: &mut Case) -> CaseResult {
    let delta = case.polytope();
    let phi = case.potential(&delta);
    let psi = case.potential(&delta);
    let theta = case.potential(&delta);
    let rho = crate::toric::envelope_in(delta.clone(), &[(vec![Scalar::zero(); delta.dim()], Scalar::zero())])?;
    let n = delta.dim();
    let np1 = int(n as i64 + 1);
    let pair = || vec![psh_instance(&phi), psh_instance(&psi)];
    let diff = |p: &Point| psi.value_at(p) - phi.value_at(p);

    let (e_phi, e_psi) = (energy(&phi, &rho)?, energy(&psi, &rho)?);
    for (f, e) in [(&phi, &e_phi), (&psi, &e_psi)] {
        let l = energy_legendre(f, &rho)?;
        case.check(
            &l == e,
            "energy.legendre",
            || vec![psh_instance(f)],
            || format!("mixed-measure energy {} vs Legendre integral {}", s(e), s(&l)),
        );
    }

    let mut sum = Scalar::zero();
    for j in 0..=n {
        let mut args: Vec<&ToricPsh> = vec![&phi; j];
        args.extend(std::iter::repeat(&psi).take(n - j));
        sum += mixed_ma(&args)?.atoms().iter().map(|(p, w)| diff(p) * w).sum::<Scalar>();
    }
    let rhs = sum / &np1;
    let lhs = &e_psi - &e_phi;
    case.check(
        lhs == rhs,
        "energy.difference",
        pair,
        || format!("E(psi) - E(phi) = {} but the mixed sum is {}", s(&lhs), s(&rhs)),
    );

    let c = case.ratio(-2, 2);
    let shifted = energy(&phi.shift(&c), &rho)?;
    let expect = &e_phi + &c * delta.volume();
    case.check(
        shifted == expect,
        "energy.shift",
        || vec![psh_instance(&phi)],
        || format!("E(phi + {}) = {} instead of {}", s(&c), s(&shifted), s(&expect)),
    );

    // s -> E((1-s) phi + s psi) is a polynomial of degree n + 1.
    let nodes: Vec<Scalar> = (0..=n + 1).map(|k| Scalar::new(k.into(), (n + 1).into())).collect();
    let values = nodes
        .iter()
        .map(|t| energy(&convex_combination(&phi, &psi, t)?, &rho))
        .collect::<Result<Vec<_>, _>>()?;
    let coef = interpolate(&nodes, &values);
    let probe = Scalar::new(1.into(), (2 * (n + 1)).into());
    let at_probe = energy(&convex_combination(&phi, &psi, &probe)?, &rho)?;
    let predicted = poly_eval(&coef, &probe);
    case.check(
        at_probe == predicted,
        "energy.polynomial",
        pair,
        || format!("E at s = {} is {} but the interpolant gives {}", s(&probe), s(&at_probe), s(&predicted)),
    );
    let ma_phi = phi.ma_measure();
    let first: Scalar = ma_phi.atoms().iter().map(|(p, w)| diff(p) * w).sum();
    case.check(
        coef[1] == first,
        "energy.first_derivative",
        pair,
        || format!("linear coefficient {} but int (psi - phi) MA(phi) = {}", s(&coef[1]), s(&first)),
    );
    let mut mixed_args: Vec<&ToricPsh> = vec![&phi; n - 1];
    mixed_args.push(&psi);
    let mixed = mixed_ma(&mixed_args)?;
    let second = int(n as i64)
        * (mixed.atoms().iter().map(|(p, w)| diff(p) * w).sum::<Scalar>() - &first);
    let twice_c2 = int(2) * &coef[2];
    case.check(
        twice_c2 == second,
        "energy.second_derivative",
        pair,
        || format!("2 c2 = {} but the mixed expression is {}", s(&twice_c2), s(&second)),
    );
    let c3 = coef.get(3).cloned().unwrap_or_else(Scalar::zero);
    let at_one = &twice_c2 + int(6) * c3;
    case.check(
        !twice_c2.is_positive() && !at_one.is_positive(),
        "energy.concavity",
        pair,
        || format!("second derivative {} at 0 and {} at 1", s(&twice_c2), s(&at_one)),
    );

    // Pairing B(a, b) = int (a - rho) d[MA(b, theta) - MA(rho, theta)].
    let perturbation = |b: &ToricPsh| -> Result<AtomicMeasure, crate::toric::ToricError> {
        if n == 1 {
            return Ok(b.ma_measure());
        }
        mixed_ma(&[b, &theta])
    };
    let base = perturbation(&rho)?;
    let pairing = |a: &ToricPsh, mb: &AtomicMeasure| -> Scalar {
        let h = |p: &Point| a.value_at(p) - rho.value_at(p);
        mb.atoms().iter().map(|(p, w)| h(p) * w).sum::<Scalar>()
            - base.atoms().iter().map(|(p, w)| h(p) * w).sum::<Scalar>()
    };
    let (m_phi, m_psi) = (perturbation(&phi)?, perturbation(&psi)?);
    let (ab, ba) = (pairing(&phi, &m_psi), pairing(&psi, &m_phi));
    case.check(
        ab == ba,
        "energy.symmetry",
        || vec![psh_instance(&phi), psh_instance(&psi), psh_instance(&theta)],
        || format!("B(phi, psi) = {} but B(psi, phi) = {}", s(&ab), s(&ba)),
    );
    for (f, m) in [(&phi, &m_phi), (&psi, &m_psi)] {
        let q = pairing(f, m);
        case.check(
            !q.is_positive(),
            "energy.negativity",
            || vec![psh_instance(f), psh_instance(&theta)],
            || format!("B(h, h) = {} > 0", s(&q)),
        );
    }
    Ok(())
}

/// Shifts `u` down so that `u <= g`, and returns the shifted potential
/// with `M = sup (g - u)`.
fn normalized_below(u: &ToricPsh, g: &ToricPsh) -> Result<(ToricPsh, Scalar), crate::toric::ToricError> {
    let top = sup_diff(u, g)?;
    let u1 = u.shift(&-top);
    let depth = sup_diff(g, &u1)?;
    Ok((u1, depth))
}

fn capacity(case: &mut Case) -> CaseResult {
    let delta = case.polytope();
    let n = delta.dim();
    let g = crate::toric::envelope_in(delta.clone(), &[(vec![Scalar::zero(); n], Scalar::zero())])?;
    let vol = delta.volume().clone();

    let u0 = case.potential(&delta);
    let (u, depth) = normalized_below(&u0, &g)?;
    let m = if depth > Scalar::one() { depth } else { Scalar::one() };
    let u_m = convex_combination(&g, &u, &(Scalar::one() / &m))?;

    // Single-generator candidate at a small site: total mass on one point.
    let mut x = gen_point(&mut case.rng, &case.cfg, n);
    let width = delta.body().support(&x) + delta.body().support(&x.iter().map(|c| -c).collect::<Vec<_>>());
    if width > Scalar::one() {
        x = x.iter().map(|c| c / &width).collect();
    }
    let single = envelope_in(delta.clone(), &[(x.clone(), Scalar::zero())])?;
    let (single, _) = normalized_below(&single, &g)?;

    let mut candidates = vec![g.clone(), u_m.clone(), single.clone()];
    for _ in 0..2 {
        let v0 = case.potential(&delta);
        let (v, d) = normalized_below(&v0, &g)?;
        candidates.push(if d > Scalar::one() {
            convex_combination(&g, &v, &(Scalar::one() / &d))?
        } else {
            v
        });
    }
    let cand_instances = |extra: &[&ToricPsh]| -> Vec<Value> {
        extra.iter().map(|f| psh_instance(f)).chain(candidates.iter().map(psh_instance)).collect()
    };

    let positive = capacity_lower(&delta, std::slice::from_ref(&x), std::slice::from_ref(&single))?;
    case.check(
        positive == vol && positive.is_positive(),
        "capacity.positive",
        || cand_instances(&[]),
        || format!("single-site capacity bound {} instead of {}", s(&positive), s(&vol)),
    );
    let mut everything: Vec<Point> = candidates
        .iter()
        .flat_map(|c| c.ma_measure().atoms().iter().map(|(p, _)| p.clone()).collect::<Vec<_>>())
        .collect();
    everything.push(vec![Scalar::zero(); n]);
    let total = capacity_lower(&delta, &everything, &candidates)?;
    case.check(
        total == vol,
        "capacity.total",
        || cand_instances(&[]),
        || format!("capacity of all atoms is {} instead of {}", s(&total), s(&vol)),
    );

    // MA(u)(E) <= M^n MA(u/M)(E) <= M^n capacity_lower(E).
    let ma_u = u.ma_measure();
    let mut region: Vec<Point> = Vec::new();
    for (p, _) in ma_u.atoms().iter().chain(u_m.ma_measure().atoms()) {
        if case.rng.chance(1, 2) {
            region.push(p.clone());
        }
    }
    region.push(gen_point(&mut case.rng, &case.cfg, n));
    let set: BTreeSet<&Point> = region.iter().collect();
    let mass_u = ma_u.mass_where(|p| set.contains(p));
    let mn = pow(&m, n);
    let termwise = &mn * u_m.ma_measure().mass_where(|p| set.contains(p));
    case.check(
        mass_u <= termwise,
        "capacity.linear_bound_termwise",
        || cand_instances(&[&u]),
        || format!("MA(u)(E) = {} > M^n MA(u/M)(E) = {} with M = {}", s(&mass_u), s(&termwise), s(&m)),
    );
    let cap = capacity_lower(&delta, &region, &candidates)?;
    let bound = &mn * &cap;
    case.check(
        mass_u <= bound,
        "capacity.linear_bound",
        || cand_instances(&[&u]),
        || format!("MA(u)(E) = {} > M^n Cap(E) = {}", s(&mass_u), s(&bound)),
    );

    // Cap{phi < psi} <= t^-n MA(phi){phi < (1-t) psi + t} for psi <= 0.
    let (psi, _) = normalized_below(&case.potential(&delta), &g)?;
    let phi0 = case.potential(&delta);
    let hi = sup_diff(&phi0, &psi)?;
    let lo = -sup_diff(&psi, &phi0)?;
    let phi = phi0.shift(&(-(hi + lo) / int(2)));
    let ma_phi = phi.ma_measure();
    let below: Vec<Point> = candidates
        .iter()
        .flat_map(|c| c.ma_measure().atoms().iter().map(|(p, _)| p.clone()).collect::<Vec<_>>())
        .filter(|p| phi.value_at(p) < psi.value_at(p))
        .collect();
    let left = capacity_lower(&delta, &below, &candidates)?;
    for t in [Scalar::new(1.into(), 4.into()), Scalar::new(1.into(), 2.into())] {
        let r = Scalar::one() - &t;
        let mass = ma_phi.mass_where(|p| phi.value_at(p) < &r * psi.value_at(p) + &t * g.value_at(p) + &t);
        let right = mass / pow(&t, n);
        case.check(
            left <= right,
            "capacity.sublevel",
            || cand_instances(&[&phi, &psi]),
            || format!("lower capacity {} exceeds {} at t = {}", s(&left), s(&right), s(&t)),
        );
    }
    Ok(())
}

fn uniqueness(case: &mut Case) -> CaseResult {
    if case.cfg.dimension == 2 {
        uniqueness_float(case)?;
    }
    uniqueness_interval(case)
}

fn optimality_checks(case: &mut Case, p: &DiracProblem, t: &[Scalar], residual: &Scalar, mode: Mode) -> CaseResult {
    let (best, _) = dual_objective_fast(p, t)?;
    for _ in 0..100 {
        let v: Vec<Scalar> = t.iter().map(|_| case.ratio(-1, 1)).collect();
        let eps = Scalar::new(BigInt::one(), BigInt::one() << case.rng.range(4, 20) as usize);
        let trial: Vec<Scalar> = t.iter().zip(&v).map(|(a, c)| a + &eps * c).collect();
        let (value, _) = dual_objective_fast(p, &trial)?;
        let slack = &eps * residual * l1_norm(&v);
        case.check(
            value <= &best + &slack,
            "uniqueness.optimality",
            || vec![dirac_instance(p, mode)],
            || format!("perturbation raises the objective from {} to {}", s(&best), s(&value)),
        );
    }
    Ok(())
}

fn uniqueness_float(case: &mut Case) -> CaseResult {
    let delta = gen_polytope(&mut case.rng, &case.cfg);
    let p = gen_dirac_problem(&mut case.rng, &case.cfg, &delta, 8);
    let witness = || vec![dirac_instance(&p, Mode::Float)];
    let cfg = SolverConfig::float();
    let mut cfg2 = cfg.clone();
    cfg2.initial_t = Some(random_t(case, &p));
    let mut sols = Vec::new();
    for c in [&cfg, &cfg2] {
        match solve(&p, c) {
            Ok(sol) => sols.push(sol),
            Err(e) => {
                case.fail("uniqueness.converged", witness(), e.to_string());
                return Ok(());
            }
        }
    }
    let vol = to_f64(delta.volume());
    for sol in &sols {
        let slack = |v: f64| ASCENT_SLACK * v.abs().max(1.0) * vol;
        let tr: Vec<f64> = sol.trace.iter().map(to_f64).collect();
        let ok = tr.windows(2).all(|w| w[1] >= w[0] - slack(w[0]));
        case.check(ok, "uniqueness.monotone", witness, || "objective decreased along the ascent".into());
    }
    let d: Vec<f64> = sols[0].t.iter().zip(&sols[1].t).map(|(a, b)| to_f64(&(a - b))).collect();
    let spread = d.iter().cloned().fold(f64::MIN, f64::max) - d.iter().cloned().fold(f64::MAX, f64::min);
    case.check(
        spread <= AGREE_TOL,
        "uniqueness.agree",
        witness,
        || format!("t vectors differ by a non-constant of spread {spread:e}"),
    );
    let (a, b) = (normalize(&sols[0]), normalize(&sols[1]));
    let gap = to_f64(&sup_abs_diff(&a.potential, &b.potential)?);
    case.check(
        gap <= AGREE_TOL,
        "uniqueness.domination",
        witness,
        || format!("normalized solutions differ by {gap:e} in sup norm"),
    );
    let (t, r) = (sols[0].t.clone(), sols[0].residual.clone());
    optimality_checks(case, &p, &t, &r, Mode::Float)
}

fn uniqueness_interval(case: &mut Case) -> CaseResult {
    let cfg1 = GenConfig { dimension: 1, ..case.cfg };
    let delta = gen_polytope(&mut case.rng, &cfg1);
    let p = gen_dirac_problem(&mut case.rng, &cfg1, &delta, cfg1.function_complexity);
    let witness = || vec![dirac_instance(&p, Mode::Rational)];
    let cfg = SolverConfig::rational();
    let mut cfg2 = cfg.clone();
    cfg2.initial_t = Some(random_t(case, &p));
    let (s1, s2) = match (solve(&p, &cfg), solve(&p, &cfg2)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            case.fail("uniqueness.exact_interval", witness(), e.to_string());
            return Ok(());
        }
    };
    case.check(s1.trace.windows(2).all(|w| w[1] >= w[0]), "uniqueness.monotone", witness, || {
        "exact objective decreased".into()
    });
    let d: Vec<Scalar> = s1.t.iter().zip(&s2.t).map(|(a, b)| a - b).collect();
    case.check(d.iter().all(|x| x == &d[0]), "uniqueness.agree", witness, || {
        "exact solutions differ by a non-constant".into()
    });

    // Slopes 0-th vertex, then cumulative weights in site order.
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&i, &j| p.sites()[i].cmp(&p.sites()[j]));
    let lo = delta.vertices()[0][0].clone();
    let mut expect = vec![lo.clone()];
    let mut acc = lo;
    for &i in &order {
        acc += &p.weights()[i];
        expect.push(acc.clone());
    }
    let pieces = s1.potential.to_pieces();
    let slopes: Vec<Scalar> = pieces.iter().map(|(m, _)| m[0].clone()).collect();
    case.check(slopes == expect, "uniqueness.slope_jumps", witness, || {
        format!(
            "slopes {:?}, expected {:?}",
            slopes.iter().map(s).collect::<Vec<_>>(),
            expect.iter().map(s).collect::<Vec<_>>()
        )
    });
    if slopes == expect {
        for (k, &i) in order.iter().enumerate() {
            let ((m0, c0), (m1, c1)) = (&pieces[k], &pieces[k + 1]);
            let kink = (c0 - c1) / (&m1[0] - &m0[0]);
            case.check(kink == p.sites()[i][0], "uniqueness.slope_jumps", witness, || {
                format!("kink at {} instead of the site {}", s(&kink), s(&p.sites()[i][0]))
            });
        }
    }
    let (t, r) = (s1.t.clone(), s1.residual.clone());
    optimality_checks(case, &p, &t, &r, Mode::Rational)
}

fn zariski_defect(case: &mut Case) -> CaseResult {
    let delta = gen_lattice_polytope(&mut case.rng, &case.cfg);
    let arc = Arc::new(delta.clone());
    let constraints = super::gen::gen_constraints(&mut case.rng, &case.cfg, &delta);
    let branches = constraints
        .iter()
        .map(|c| envelope_in(arc.clone(), std::slice::from_ref(c)))
        .collect::<Result<Vec<_>, _>>()?;
    let f = TestFunction::new(branches)?;
    let exact = envelope(&delta, &constraints)?;
    let witness = || vec![psh_instance(&exact)];
    let mut defects = Vec::new();
    let mut last = None;
    for k in 0..=6 {
        let m = 1u64 << k;
        let phi = lattice_envelope(&delta, &constraints, m)?;
        let d = orthogonality_defect(&f, &phi)?;
        case.check(!d.is_negative(), "zariski.nonnegative", witness, || {
            format!("defect {} at m = {m}", s(&d))
        });
        let on_lattice = exact
            .to_pieces()
            .iter()
            .all(|(q, _)| q.iter().all(|c| (c * int(m as i64)).is_integer()));
        if on_lattice {
            case.check(d.is_zero(), "zariski.exact_when_lattice", witness, || {
                format!("slopes lie on the 1/{m} lattice but the defect is {}", s(&d))
            });
        }
        defects.push(d);
        last = Some(phi);
    }
    let (first, final_) = (&defects[0], &defects[defects.len() - 1]);
    case.check(final_ * int(8) <= *first, "zariski.decay", witness, || {
        format!("defect {} at m = 1 but {} at m = 64", s(first), s(final_))
    });
    let phi64 = last.expect("seven levels");
    let diam = delta.diameter_inf();
    let reach = constraints.iter().map(|(x, _)| l1_norm(x)).max().expect("constraints");
    let lip = &diam * int(2) * &reach;
    for (x, _) in &constraints {
        let gap = (exact.value_at(x) - phi64.value_at(x)).abs();
        let bound = int(2) * &lip / int(64);
        case.check(gap <= bound, "zariski.uniform", witness, || {
            format!("at {}: |P - phi_64| = {} > {}", fmt_point(x), s(&gap), s(&bound))
        });
    }
    Ok(())
}

fn is_constant(g: &MetricGraph, f: &GraphFunction) -> bool {
    let knots = f.knots();
    let v0 = f.value_at(g, &knots[0]);
    knots.iter().all(|k| f.value_at(g, k) == v0)
}

fn graph_suite(case: &mut Case) -> CaseResult {
    let g = gen_graph(&mut case.rng, &case.cfg, 30);
    let n = g.vertex_count();
    let mass = int(case.rng.range(1, 4));
    let omega = gen_graph_measure(&mut case.rng, &case.cfg, &g, &mass, false);
    let mu = gen_graph_measure(&mut case.rng, &case.cfg, &g, &mass, true);
    let witness = || vec![poisson_instance(&g, &omega, &mu)];

    let x = case.rng.below(n as u64) as usize;
    let y = (x + 1 + case.rng.below(n as u64 - 1) as usize) % n;
    let gxy = green(&g, x, y)?;
    let gyx = green(&g, y, x)?;
    let expect = GraphMeasure::new([(Location::Vertex(x), int(1)), (Location::Vertex(y), int(-1))]);
    let got = ddc(&g, &gxy)?;
    case.check(got == expect, "graph.green", witness, || format!("dd^c g_{{{x},{y}}} is not delta_x - delta_y"));
    case.check(gxy.values[y].is_zero(), "graph.green", witness, || "g(y) is not 0".into());
    let sum = gxy.linear_combination(&g, &int(1), &gyx, &int(1));
    case.check(is_constant(&g, &sum), "graph.green_symmetry", witness, || {
        "g_{x,y} + g_{y,x} is not constant".into()
    });

    let phi = solve_poisson(&g, &omega, &mu)?;
    let back = omega.plus(&ddc(&g, &phi)?);
    case.check(back == mu, "graph.poisson_roundtrip", witness, || "omega + dd^c phi differs from mu".into());
    let top = phi.knots().iter().map(|k| phi.value_at(&g, k)).max().expect("knots");
    case.check(top.is_zero(), "graph.normalized", witness, || format!("sup phi = {}", s(&top)));
    let other = solve_poisson_grounded(&g, &omega, &mu, n - 1)?;
    let gap = phi.linear_combination(&g, &int(1), &other, &int(-1));
    case.check(is_constant(&g, &gap), "graph.uniqueness", witness, || {
        "solutions with different grounds differ by a non-constant".into()
    });

    // Competitors: omega-psh functions built from vertex Poisson solutions.
    let lap = GroundedLaplacian::new(&g, 0)?;
    let mut base: Vec<GraphFunction> = Vec::new();
    for _ in 0..4 {
        let nu = gen_graph_measure(&mut case.rng, &case.cfg, &g, &mass, false);
        let mut rhs = vec![Scalar::zero(); n];
        for (l, w) in nu.atoms() {
            if let Location::Vertex(v) = l {
                rhs[*v] += w;
            }
        }
        for (l, w) in omega.atoms() {
            if let Location::Vertex(v) = l {
                rhs[*v] -= w;
            }
        }
        base.push(GraphFunction::from_vertex_values(&g, lap.solve(&rhs))?);
    }
    let functional = |f: &GraphFunction| -> Result<Scalar, crate::curve::CurveError> {
        Ok(energy_graph(&g, f, &omega)? - mu.integrate(&g, f))
    };
    let best = functional(&phi)?;
    for _ in 0..100 {
        let a = base[case.rng.below(4) as usize].clone();
        let b = base[case.rng.below(4) as usize].clone();
        let c = case.ratio(-1, 1);
        let psi = match case.rng.below(4) {
            0 => a.shift(&c),
            1 => {
                let t = Scalar::new(case.rng.range(0, 8).into(), 8.into());
                a.linear_combination(&g, &(Scalar::one() - &t), &b, &t).shift(&c)
            }
            2 => a.max(&g, &b.shift(&c)),
            _ => phi.max(&g, &a.shift(&c)),
        };
        match functional(&psi) {
            Ok(v) => case.check(v <= best, "graph.variational", witness, || {
                format!("a competitor reaches {} above the solution's {}", s(&v), s(&best))
            }),
            Err(e) => case.fail("graph.competitor", witness(), e.to_string()),
        }
    }

    // Comparison and locality on a crossing pair.
    let (a, b0) = (&base[0], &base[1]);
    let d: Vec<Scalar> = a.values.iter().zip(&b0.values).map(|(p, q)| p - q).collect();
    let mid = (d.iter().max().expect("vertices") + d.iter().min().expect("vertices")) / int(2);
    let b = b0.shift(&mid);
    let (ma_a, ma_b) = (curvature(&g, a, &omega)?, curvature(&g, &b, &omega)?);
    let lower = |l: &Location| a.value_at(&g, l) < b.value_at(&g, l);
    let mass_of = |m: &GraphMeasure| -> Scalar { m.atoms().filter(|(l, _)| lower(l)).map(|(_, w)| w.clone()).sum() };
    let (lhs, rhs) = (mass_of(&ma_b), mass_of(&ma_a));
    case.check(lhs <= rhs, "graph.comparison", witness, || {
        format!("curvature of psi on {{phi < psi}} is {} > {}", s(&lhs), s(&rhs))
    });
    let h = a.max(&g, &b);
    let ma_h = curvature(&g, &h, &omega)?;
    let locs: BTreeSet<Location> = ma_h.atoms().chain(ma_a.atoms()).map(|(l, _)| l.clone()).collect();
    for l in locs {
        if a.value_at(&g, &l) > b.value_at(&g, &l) {
            let (wh, wa) = (ma_h.weight_at(&l), ma_a.weight_at(&l));
            case.check(wh == wa, "graph.locality", witness, || {
                format!("at {l}: curvature of the max is {} but {}", s(&wh), s(&wa))
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_differences_of_a_cubic() {
        let v: Vec<Scalar> = (0..5).map(|k| int(k * k * k)).collect();
        let d = forward_differences(&v);
        assert_eq!(d, vec![int(0), int(1), int(6), int(6), int(0)]);
    }

    #[test]
    fn interpolation_recovers_coefficients() {
        let nodes: Vec<Scalar> = (0..3).map(int).collect();
        let vals: Vec<Scalar> = nodes.iter().map(|x| int(2) + x * int(3) - x * x).collect();
        assert_eq!(interpolate(&nodes, &vals), vec![int(2), int(3), int(-1)]);
    }

    #[test]
    fn corrupted_measure_names_the_atom() {
        let sq = Arc::new(NewtonPolytope::unit_cube(2));
        let a = envelope_in(sq.clone(), &[(vec![int(0), int(0)], int(0))]).unwrap();
        let b = envelope_in(sq, &[(vec![int(1), int(0)], int(0))]).unwrap();
        let f = TestFunction::new(vec![a, b]).unwrap();
        let p = psh_envelope(&f);
        assert!(orthogonality_violations(&f, &p, &p.ma_measure()).is_empty());
        let atoms: Vec<(Point, Scalar)> = p
            .ma_measure()
            .atoms()
            .iter()
            .enumerate()
            .map(|(i, (x, w))| (x.clone(), if i == 0 { w + Scalar::new(1.into(), 1000.into()) } else { w.clone() }))
            .collect();
        let bad = AtomicMeasure::new(atoms).unwrap();
        let v = orthogonality_violations(&f, &p, &bad);
        let hit = v.iter().find(|v| v.assertion == "orthogonality.atom_weight").unwrap();
        assert!(hit.detail.contains(&fmt_point(&bad.atoms()[0].0)), "{}", hit.detail);
    }
}
