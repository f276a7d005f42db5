//! Curate small-gap instances and compare many-stage walks on them.

use msqw::evolver::Walker;
use msqw::harness::{curate_hard, median};
use msqw::schedule::build_schedule;
use msqw::stats::SpreadMethod;

fn main() -> msqw::Result<()> {
    let curated = curate_hard(8, 10, 0.05, 1, false)?;
    println!(
        "{} instances after {} attempts (acceptance {:.3})",
        curated.problems.len(),
        curated.attempts,
        curated.acceptance_rate
    );
    for m in [1, 5, 10, 20, 50] {
        let mut probs = Vec::new();
        for (i, p) in curated.problems.iter().enumerate() {
            let s = build_schedule(p, m, SpreadMethod::Gumbel)?;
            probs.push(
                Walker::new(p)?
                    .mc_short_time_average(&s, 20, i as u64)?
                    .success_prob,
            );
        }
        println!("m = {m:>2}: median success {:.4}", median(&probs)?);
    }
    Ok(())
}
