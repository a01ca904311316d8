//! A parity of log2(n) variables under a nearly uniform distribution: base
//! bits with bias in [0.49, 0.51] and a small perturbation. Writes the trial
//! CSV and its config sidecar.
//!
//! cargo run --release --example near_uniform_campaign -- [out.csv]

use smoothdt::harness::{
    run_learn_experiment, summarize, write_records, write_sidecar, BaseMeans, ExperimentConfig, ExperimentKind,
    MeanConvention, TreeSource,
};

fn main() -> smoothdt::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "near_uniform.csv".into());
    let mut cfg = ExperimentConfig::new(ExperimentKind::Learn, 16, 0.01);
    cfg.tree = TreeSource::Parity(4);
    cfg.mu = BaseMeans::Range(0.49, 0.51);
    cfg.mu_convention = MeanConvention::ZeroOne;
    cfg.m = 200_000;
    cfg.trials = 10;
    cfg.depth_cap = Some(4);
    cfg.max_fail_rate = 1.0;

    let records = run_learn_experiment(&cfg)?;
    write_records(&records, std::fs::File::create(&out)?)?;
    let side = write_sidecar(&cfg, out.as_ref())?;
    let s = summarize(&records, cfg.eps, cfg.delta);
    println!(
        "{} of {} trials reached error <= {}; {} FAIL",
        s.within_eps, s.trials, cfg.eps, s.fails
    );
    println!("wrote {out} and {}", side.display());
    Ok(())
}
