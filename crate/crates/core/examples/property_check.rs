//! Running the property suites programmatically and replaying a case.

use nama::harness::{run_case, run_suite, GenConfig, SUITES};

fn main() {
    let cases = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    for (i, name) in SUITES.iter().enumerate() {
        let cfg = GenConfig::new(7, 1 + i % 2);
        let report = run_suite(name, &cfg, cases).unwrap();
        println!(
            "{:<18} dim {} {:>3} cases {:>5} ms  {}",
            name,
            cfg.dimension,
            report.cases,
            report.elapsed_ms,
            if report.passed() { "pass" } else { "FAIL" }
        );
        for f in &report.failures {
            // Each failure replays alone from its seed.
            let again = run_case(name, &GenConfig { seed: f.seed, ..cfg }).unwrap();
            println!("  seed {} {} (replayed: {} failures)", f.seed, f.assertion, again.len());
        }
    }
}
