//! Seeded instance generation and the executable property suites.
//!
//! Every suite runs `cases` independent instances. Case `i` draws its own
//! seed from the run seed (see [`rng`]), so a failure can be replayed
//! alone with [`run_case`]. Assertions are exact unless a suite states a
//! float tolerance.

mod gen;
pub mod rng;
mod suites;

use std::collections::BTreeSet;
use std::time::Instant;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use gen::{
    gen_constraints, gen_dirac_problem, gen_graph, gen_graph_measure, gen_lattice_polytope, gen_measure, gen_point,
    gen_polytope, gen_potential, gen_test_function, gen_toric_instance, GenConfig, ToricInstance,
};
pub use suites::{orthogonality_violations, Violation};

use crate::scalar::{Point, Scalar};
use crate::toric::{sup_diff, NewtonPolytope, ToricPsh};

pub const SUITES: [&str; 11] = [
    "locality",
    "comparison",
    "superadditivity",
    "envelope_axioms",
    "orthogonality",
    "differentiability",
    "energy_identities",
    "capacity",
    "uniqueness",
    "zariski_defect",
    "graph_suite",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("candidate {0} is not within [-1, 0] of the support function")]
    CandidateOutOfRange(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub seed: u64,
    /// `{"detail": ..., "instances": [...]}`; instances use the instance
    /// file format.
    pub witness: serde_json::Value,
    pub assertion: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub cases: usize,
    pub failures: Vec<Failure>,
    pub elapsed_ms: u64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Equality ignoring the elapsed time.
    pub fn same_content(&self, other: &CheckReport) -> bool {
        self.suite == other.suite && self.cases == other.cases && self.failures == other.failures
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain JSON values");
        s.push('\n');
        s
    }
}

/// Threads for case-level parallelism: `NAMA_THREADS` if set to a
/// positive integer, otherwise the hardware count.
pub fn thread_count() -> usize {
    std::env::var("NAMA_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

pub fn run_suite(name: &str, cfg: &GenConfig, cases: usize) -> Result<CheckReport, HarnessError> {
    run_suite_dims(name, cfg, cases, &[cfg.dimension])
}

/// As [`run_suite`], with case `i` in dimension `dims[i % dims.len()]`.
pub fn run_suite_dims(name: &str, cfg: &GenConfig, cases: usize, dims: &[usize]) -> Result<CheckReport, HarnessError> {
    if !SUITES.contains(&name) {
        return Err(HarnessError::UnknownSuite(name.to_string()));
    }
    if dims.is_empty() {
        return Err(HarnessError::InvalidConfig("no dimension given".into()));
    }
    for &d in dims {
        GenConfig { dimension: d, ..*cfg }.validate()?;
    }
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
    let mut failures: Vec<Failure> = pool.install(|| {
        (0..cases)
            .into_par_iter()
            .flat_map_iter(|i| {
                let case_cfg = GenConfig {
                    seed: rng::case_seed(cfg.seed, i as u64),
                    dimension: dims[i % dims.len()],
                    ..*cfg
                };
                run_case(name, &case_cfg).expect("suite name checked")
            })
            .collect()
    });
    failures.sort_by(|a, b| (a.seed, &a.assertion).cmp(&(b.seed, &b.assertion)));
    Ok(CheckReport {
        suite: name.to_string(),
        cases,
        failures,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// One case of a suite, with `cfg.seed` as the case seed.
pub fn run_case(name: &str, cfg: &GenConfig) -> Result<Vec<Failure>, HarnessError> {
    cfg.validate()?;
    suites::run(name, cfg).ok_or_else(|| HarnessError::UnknownSuite(name.to_string()))
}

/// Largest mass that a candidate puts on `region`, over candidates `u`
/// with `-1 <= u - g <= 0` everywhere (`g` the support function). A
/// lower bound for the capacity of `region`.
pub fn capacity_lower(delta: &NewtonPolytope, region: &[Point], candidates: &[ToricPsh]) -> Result<Scalar, HarnessError> {
    let g = ToricPsh::support_function(delta);
    let set: BTreeSet<&Point> = region.iter().collect();
    let mut best = Scalar::zero();
    for (i, c) in candidates.iter().enumerate() {
        let above = sup_diff(c, &g).map_err(|_| HarnessError::CandidateOutOfRange(i))?;
        let below = sup_diff(&g, c).map_err(|_| HarnessError::CandidateOutOfRange(i))?;
        if above > Scalar::zero() || below > Scalar::one() {
            return Err(HarnessError::CandidateOutOfRange(i));
        }
        let m = c.ma_measure().mass_where(|p| set.contains(p));
        if m > best {
            best = m;
        }
    }
    Ok(best)
}
