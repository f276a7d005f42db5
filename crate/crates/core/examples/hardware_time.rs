//! Map walk schedules onto wall-clock time on an annealer with a given
//! `A(s)`, `B(s)` table.
//!
//! `cargo run --example hardware_time -- crates/core/data/example_schedule.csv`

use msqw::hardware::{default_alpha, hardware_time, HardwareSchedule};
use msqw::ising::sk_instance;
use msqw::schedule::build_schedule;
use msqw::stats::SpreadMethod;

fn main() -> msqw::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/example_schedule.csv").into()
    });
    let hw = HardwareSchedule::read(&path)?;
    let p = sk_instance(12, 2, 0, false)?;
    let alpha = default_alpha(p.n());
    println!("alpha = {alpha:.4}");
    for m in [1, 2, 5, 10] {
        let s = build_schedule(&p, m, SpreadMethod::Gumbel)?;
        let t = hardware_time(&s, &hw, alpha)?;
        let points: Vec<String> = t.stages.iter().map(|st| format!("{:.3}", st.s)).collect();
        println!(
            "m = {m:>2}: {:.3} ns, anneal points [{}]",
            t.total_ns,
            points.join(", ")
        );
    }
    Ok(())
}
