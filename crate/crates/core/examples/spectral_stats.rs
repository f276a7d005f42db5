//! Closed-form spectral moments and spread estimates compared with the
//! enumerated spectrum.

use msqw::ising::{brute_force_spectrum, energies, sk_instance};
use msqw::stats::{estimate_spread, SpreadMethod, StatsSummary};

fn main() -> msqw::Result<()> {
    let p = sk_instance(12, 3, 0, false)?;
    let stats = StatsSummary::compute(&p);
    let e = energies(&p, 24)?;
    let brute = |k: i32| e.iter().map(|x| x.powi(k)).sum::<f64>() / e.len() as f64;

    println!("moment   closed form        enumerated");
    for (k, v) in [(2, stats.m2), (3, stats.m3), (4, stats.m4), (5, stats.m5)] {
        println!("<H^{k}>   {v:>16.9}  {:>16.9}", brute(k));
    }
    println!(
        "<Delta^2> = {:.6}, kurtosis = {:.4}",
        stats.delta_sq,
        stats.kurtosis()
    );

    let exact = brute_force_spectrum(&p)?.spread();
    for method in [
        SpreadMethod::ErfHeuristic,
        SpreadMethod::NormalFit,
        SpreadMethod::Gumbel,
    ] {
        let est = estimate_spread(&p, method)?.value;
        println!(
            "{method:<14} spread {est:8.4}  (exact {exact:.4}, ratio {:.3})",
            est / exact
        );
    }
    Ok(())
}
