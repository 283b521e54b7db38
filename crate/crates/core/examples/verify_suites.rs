//! Runs the identity suites at reduced size and prints each member.

use aac_calculus::harness::{run_suite, SuiteConfig, SuiteId};

fn main() -> aac_calculus::Result<()> {
    let cfg = SuiteConfig { instances: 24, ..SuiteConfig::default() };
    for suite in run_suite(&SuiteId::ALL, &cfg)? {
        println!("{} {}", suite.suite, suite.verdict());
        for m in &suite.members {
            println!("  {:<34} {} max_gap={:.3e} tol={:.0e}", m.member, m.verdict, m.max_gap, m.tolerance);
        }
    }
    Ok(())
}
