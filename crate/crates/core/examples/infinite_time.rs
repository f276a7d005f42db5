//! Infinite-time averaged success probability from the nested eigenbasis
//! formula, for increasing stage counts.

use msqw::exact::p_inf_nested_with;
use msqw::exact::DegeneracyMode;
use msqw::ising::sk_instance;
use msqw::schedule::build_schedule;
use msqw::stats::SpreadMethod;

fn main() -> msqw::Result<()> {
    let p = sk_instance(8, 2, 0, false)?;
    println!("{}", p.label());
    for m in [1, 2, 5, 10, 20] {
        let s = build_schedule(&p, m, SpreadMethod::Gumbel)?;
        let r = p_inf_nested_with(&p, &s.gammas(), DegeneracyMode::Ungrouped, 12)?;
        println!("m = {m:>2}: P_inf = {:.5}", r.value);
    }
    Ok(())
}
