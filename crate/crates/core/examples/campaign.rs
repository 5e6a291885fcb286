//! Run a short version of every verification scenario and print the
//! summaries. `cargo run --example campaign -- 50` sets the trial count.

use cstar_morita::scenario::{default_campaign, run_scenario, DEFAULT_SEED};

fn main() -> cstar_morita::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let mut all = true;
    for scenario in default_campaign(DEFAULT_SEED, trials) {
        let report = run_scenario(&scenario)?;
        all &= report.pass;
        print!("{}", report.to_human(false));
    }
    println!("{}", if all { "all scenarios pass" } else { "some scenarios fail" });
    Ok(())
}
