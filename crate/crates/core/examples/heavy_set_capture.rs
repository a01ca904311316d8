//! Compare learned frontiers with the exact heavy and admissible sets.

use smoothdt::harness::{run_coeff_recovery, ExperimentConfig, ExperimentKind, TreeSource};

fn main() -> smoothdt::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::CoeffRecovery, 12, 0.1);
    cfg.tree = TreeSource::Random(8);
    cfg.m = 100_000;
    cfg.trials = 10;
    cfg.depth_cap = Some(12);
    println!("trial heavy admissible frontier missing extra error");
    for r in run_coeff_recovery(&cfg)? {
        println!(
            "{:>5} {:>5} {:>10} {:>8} {:>7} {:>5} {:.4}",
            r.trial,
            r.heavy_size,
            r.admissible_size,
            r.final_frontier_size,
            r.missing,
            r.extra,
            r.error.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
