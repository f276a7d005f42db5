//! Heuristic hopping rates and stage times for several stage counts.

use msqw::ising::sk_instance;
use msqw::schedule::build_schedule;
use msqw::stats::SpreadMethod;

fn main() -> msqw::Result<()> {
    let p = sk_instance(10, 1, 0, false)?;
    for m in [1, 2, 5, 10] {
        let s = build_schedule(&p, m, SpreadMethod::Gumbel)?;
        println!(
            "m = {m:>2}: spread {:.3}, total time {:.3}",
            s.spread_used,
            s.total_time()
        );
        for (k, st) in s.stages.iter().enumerate() {
            println!(
                "    stage {:>2}: gamma {:8.4}  t {:7.4}",
                k + 1,
                st.gamma,
                st.time
            );
        }
    }
    let s = build_schedule(&p, 3, SpreadMethod::Gumbel)?;
    s.write_csv(std::io::stdout())?;
    Ok(())
}
