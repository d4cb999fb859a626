//! Runs the shipped verification suite: every identity, bound, and
//! monotonicity check across the preset scenarios, with hypothesis gating
//! reported per check.

use std::time::Instant;

fn main() {
    let started = Instant::now();
    let cases = listflow::verify::default_suite_cases();
    let outcome = match listflow::verify::run_suite(&cases) {
        Ok(outcome) => outcome,
        Err(err) => {
            eprintln!("suite aborted: {err}");
            std::process::exit(err.exit_code());
        }
    };

    for report in &outcome.reports {
        let status = if !report.pass {
            "FAIL"
        } else if report.report_only() {
            "PASS (report-only)"
        } else {
            "PASS"
        };
        println!(
            "{:<55} {:<13} residual {:>9.3e}  tol {:>7.1e}  {}",
            report.check.name,
            report.check.kind.label(),
            report.residual_max,
            report.check.tolerance,
            status
        );
    }

    println!("\nhypothesis regimes exercised:");
    for (regime, labels) in &outcome.regimes {
        println!("  {:<18} {}", regime, labels.join(", "));
    }

    println!(
        "\n{} checks, overall {} in {:.1}s",
        outcome.reports.len(),
        if outcome.pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    std::process::exit(if outcome.pass { 0 } else { 1 });
}
