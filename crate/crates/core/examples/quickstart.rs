//! Generates a knapsack instance, runs the epsilon-constraint method with
//! strong warm starts and propagation, and checks the front by enumeration.

use moowarm::ecm::{run_ecm, EcmConfig, WarmPolicy};
use moowarm::instances::{generate, Family, GenSpec};
use moowarm::pareto::brute_force_oracle;

fn main() -> moowarm::Result<()> {
    let problem = generate(&GenSpec::new(Family::Kp, 10, 3, 1))?;

    let config = EcmConfig {
        warm: WarmPolicy::Strong,
        propagate: true,
        ..EcmConfig::new(10, "o+-".parse()?)
    };
    let report = run_ecm(&problem, &config)?;
    println!(
        "{} subproblems, {} skipped, {} warm starts, {} nondominated points",
        report.records.len(),
        report.totals.skips,
        report.stats.warm_starts,
        report.archive.len()
    );

    let front = brute_force_oracle(&problem)?;
    for entry in report.archive.entries() {
        assert!(front.contains(&entry.objectives));
        println!("{}", entry.objectives);
    }
    Ok(())
}
