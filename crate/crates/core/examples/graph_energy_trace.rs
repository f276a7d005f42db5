//! Driver energy during a single stage next to its short-time quadratic
//! approximation `n - t^2 <Delta^2> / 2`.

use msqw::evolver::{write_trace_csv, Walker};
use msqw::ising::sk_instance;
use msqw::schedule::build_schedule;
use msqw::stats::SpreadMethod;

fn main() -> msqw::Result<()> {
    let p = sk_instance(12, 4, 0, false)?;
    let s = build_schedule(&p, 1, SpreadMethod::Gumbel)?;
    let trace =
        Walker::new(&p)?.graph_energy_trace(s.stages[0].gamma, 2.0 * s.stages[0].time, 40)?;
    write_trace_csv(&trace, std::io::stdout())
}
