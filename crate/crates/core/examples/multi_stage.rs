//! Short-time averaged success probability against stage count on a few
//! typical instances.

use msqw::evolver::Walker;
use msqw::ising::sk_instance;
use msqw::schedule::build_schedule;
use msqw::stats::SpreadMethod;

fn main() -> msqw::Result<()> {
    let n = 10;
    let stages = [1, 2, 5, 10, 20];
    print!("instance               ");
    stages.iter().for_each(|m| print!("  m={m:<5}"));
    println!();
    for i in 0..5 {
        let p = sk_instance(n, 11, i, false)?;
        let walker = Walker::new(&p)?;
        print!("{}", p.label());
        for &m in &stages {
            let s = build_schedule(&p, m, SpreadMethod::Gumbel)?;
            let r = walker.mc_short_time_average(&s, 20, i as u64)?;
            print!("  {:.4} ", r.success_prob);
        }
        println!();
    }
    Ok(())
}
