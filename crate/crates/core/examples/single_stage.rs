//! Success probability of a single-stage walk as a function of time,
//! against its heuristic time window.

use msqw::evolver::Walker;
use msqw::ising::sk_instance;
use msqw::schedule::{build_schedule, Stage};
use msqw::stats::SpreadMethod;

fn main() -> msqw::Result<()> {
    let p = sk_instance(12, 5, 0, false)?;
    let walker = Walker::new(&p)?;
    let s = build_schedule(&p, 1, SpreadMethod::Gumbel)?;
    let Stage { gamma, time } = s.stages[0];
    println!(
        "gamma = {gamma:.4}, heuristic window [{time:.3}, {:.3}]",
        2.0 * time
    );
    for i in 0..=20 {
        let t = 0.2 * i as f64 * time;
        let out = walker.run(&[Stage { gamma, time: t }])?;
        println!(
            "t = {t:6.3}  P = {:.5}",
            walker.success_probability(&out.state)?
        );
    }
    let avg = walker.mc_short_time_average(&s, 100, 1)?;
    println!(
        "window average {:.5} +- {:.5}",
        avg.success_prob, avg.stderr
    );
    Ok(())
}
