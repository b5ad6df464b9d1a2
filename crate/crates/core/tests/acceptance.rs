//! Acceptance run: every criterion is a group of named verify checks. One
//! line per criterion; the process fails if any criterion fails.

use pmech::verify::{check_info, run_suite, Check, Suite, VerifyConfig};
use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

const CRITERIA: [&str; 10] = [
    "group axioms",
    "convolution oracle equivalence",
    "antiderivative",
    "bracket algebra",
    "representation homomorphism",
    "bracket images",
    "oscillator",
    "correspondence slope",
    "Bargmann picture",
    "consistency of dynamics",
];

fn main() -> ExitCode {
    let cfg = VerifyConfig::default();
    let mut by_criterion: BTreeMap<u8, Vec<Check>> = BTreeMap::new();
    let mut aborted: BTreeMap<u8, String> = BTreeMap::new();
    for suite in Suite::ALL {
        let t0 = Instant::now();
        match run_suite(suite, &cfg) {
            Ok(checks) => {
                for c in checks {
                    if let Some(n) = check_info(&c.check).and_then(|i| i.criterion) {
                        by_criterion.entry(n).or_default().push(c);
                    }
                }
            }
            Err(e) => {
                // every criterion fed by this suite fails
                for info in pmech::verify::CHECKS.iter().filter(|i| Suite::of_check(i.name) == Some(suite)) {
                    if let Some(n) = info.criterion {
                        aborted.insert(n, format!("{} suite aborted: {e}", suite.name()));
                    }
                }
            }
        }
        eprintln!("  ({} suite: {:.1} s)", suite.name(), t0.elapsed().as_secs_f64());
    }

    let mut failed = 0;
    for (i, title) in CRITERIA.iter().enumerate() {
        let n = i as u8 + 1;
        let checks = by_criterion.get(&n).map(Vec::as_slice).unwrap_or(&[]);
        let pass = !aborted.contains_key(&n) && !checks.is_empty() && checks.iter().all(|c| c.pass);
        let detail = match aborted.get(&n) {
            Some(msg) => msg.clone(),
            None => checks
                .iter()
                .map(|c| format!("{} {:.2e}/{:.0e}", c.check, c.residual, c.tolerance))
                .collect::<Vec<_>>()
                .join(", "),
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {n:>2} {:<32} {}  {detail}", title, if pass { "PASS" } else { "FAIL" });
    }
    if failed == 0 {
        println!("all {} criteria pass", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} criteria fail", CRITERIA.len());
        ExitCode::FAILURE
    }
}
