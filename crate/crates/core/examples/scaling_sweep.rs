//! Sweep over qubit and stage counts, then fit `ln P = a n + b` per stage
//! count. Writes `sweep.csv` in the working directory.

use msqw::harness::{fit_scaling, summarize, sweep, write_records, SweepConfig};

fn main() -> msqw::Result<()> {
    let cfg = SweepConfig::parse(
        "n-min = 5
         n-max = 10
         stages = 1, 2, 5
         instances = 40
         samples = 20
         seed = 1",
    )?;
    let records = sweep(&cfg, &[])?;
    let file = std::fs::File::create("sweep.csv").map_err(|e| msqw::Error::io("sweep.csv", e))?;
    write_records(&records, file, false)?;

    for pt in summarize(&records, 1000, cfg.seed)? {
        println!(
            "n = {:>2} m = {:>2}: median {:.4} +- {:.4}",
            pt.n, pt.m, pt.median, pt.stderr
        );
    }
    for f in fit_scaling(&records)? {
        println!(
            "m = {:>2}: a = {:.4} +- {:.4}, b = {:.3} +- {:.3}, r2 = {:.3}",
            f.m, f.a, f.a_stderr, f.b, f.b_stderr, f.r2
        );
    }
    Ok(())
}
