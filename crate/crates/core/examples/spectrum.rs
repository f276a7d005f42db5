//! Exhaustive spectrum of a generated SK instance and of its Z2-symmetric
//! reduction.
//!
//! `cargo run --release --example spectrum -- 12 7`

use msqw::ising::{brute_force_spectrum, sk_instance, symmetry_reduce, IsingProblem};

fn main() -> msqw::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(12), |s| s.parse()).expect("n");
    let seed: u64 = args.next().map_or(Ok(7), |s| s.parse()).expect("seed");

    let p = sk_instance(n, seed, 0, false)?;
    let s = brute_force_spectrum(&p)?;
    println!("{}: n = {n}", p.label());
    println!(
        "  E0 = {:.6}  E_max = {:.6}  spread = {:.6}",
        s.e_min,
        s.e_max,
        s.spread()
    );
    println!(
        "  ground states {:?}, gap to first excited {:.6}",
        s.ground_indices, s.min_gap
    );

    let couplings: Vec<_> = p.couplings().collect();
    let symmetric = IsingProblem::new(vec![0.0; n], &couplings)?;
    let full = brute_force_spectrum(&symmetric)?;
    let reduced = brute_force_spectrum(&symmetry_reduce(&symmetric)?)?;
    println!(
        "zero-field copy: {} ground states",
        full.ground_indices.len()
    );
    println!(
        "  fixing the last spin: E0 {:.6} -> {:.6} on {} qubits",
        full.e_min,
        reduced.e_min,
        n - 1
    );
    Ok(())
}
