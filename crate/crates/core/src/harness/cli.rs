//! Command-line front end. [`run`] returns the process exit code: 0 on
//! success, 1 on invalid input, 2 when a campaign's FAIL rate exceeds
//! `--max-fail-rate`.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::{
    run_coeff_recovery, run_learn_experiment, run_oracle_coeffs, run_propagation_check, run_sz_check, summarize,
    write_records, write_sidecar, BaseMeans, EvalMode, ExperimentConfig, ExperimentKind, MeanConvention, TreeSource,
};
use crate::error::{Error, Result};
use crate::learner::MuSource;
use crate::oracle::{write_report, CoeffForm};

#[derive(Parser, Debug)]
#[command(
    name = "smoothdt",
    version,
    about = "Learn decision trees under perturbed product distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learning campaign: one CSV row per trial.
    Learn(CommonArgs),
    /// Anti-concentration grid against its bound and closed forms.
    SzCheck(CommonArgs),
    /// Coefficient-propagation frequencies against the union bound.
    PropagationCheck(CommonArgs),
    /// Learning trials checked against the exact heavy and admissible sets.
    CoeffRecovery(CommonArgs),
    /// Exact coefficients of one target as a `subset,value` CSV.
    OracleCoeffs(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    c: f64,
    /// Examples per trial.
    #[arg(long, default_value_t = 10_000)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials (learning) or Monte-Carlo draws (checks).
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    workers: Option<usize>,
    /// Result file; stdout when absent. A `<out>.config.json` sidecar is
    /// written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// exact | mc:<points> [default: exact when n <= 20].
    #[arg(long)]
    eval: Option<String>,
    /// random:<size> | parity:<k> | file:<path>
    #[arg(long, default_value = "random:8")]
    tree: String,
    /// zero | random | random:<lo>:<hi> | file:<path>
    #[arg(long, default_value = "random")]
    mu: String,
    /// Units of --mu ranges and files: pm1 (means of ±1 bits) or 01 (bias).
    #[arg(long, default_value = "pm1")]
    mu_convention: String,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Learner depth cap [default: floor(ln(m) / 12 * (1 - max |mu_i|))].
    #[arg(long)]
    depth_cap: Option<usize>,
    /// Learner threshold [default: m^(-1/3)].
    #[arg(long)]
    threshold: Option<f64>,
    /// Give the learner empirical means instead of the true ones.
    #[arg(long)]
    estimate_mu: bool,
    #[arg(long, default_value_t = 0.0)]
    max_fail_rate: f64,
    /// Comma-separated a values for propagation-check.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    /// b for propagation-check.
    #[arg(long)]
    beta: Option<f64>,
    /// hat (normalized) or bar (partially normalized), for oracle-coeffs.
    #[arg(long, default_value = "hat")]
    form: String,
    /// Add a wall_time column (output is then no longer reproducible).
    #[arg(long)]
    timing: bool,
}

impl CommonArgs {
    fn config(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(kind, self.n, self.c);
        cfg.m = self.m;
        cfg.seed = self.seed;
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        cfg.workers = self.workers;
        if let Some(e) = &self.eval {
            cfg.eval = e.parse::<EvalMode>()?;
        }
        cfg.tree = self.tree.parse::<TreeSource>()?;
        cfg.mu = self.mu.parse::<BaseMeans>()?;
        cfg.mu_convention = self.mu_convention.parse::<MeanConvention>()?;
        cfg.eps = self.eps;
        cfg.delta = self.delta;
        cfg.depth_cap = self.depth_cap;
        cfg.threshold = self.threshold;
        if self.estimate_mu {
            cfg.learner_mu = MuSource::Estimated;
        }
        cfg.max_fail_rate = self.max_fail_rate;
        if let Some(a) = &self.alphas {
            cfg.alphas = a.clone();
        }
        if let Some(b) = self.beta {
            cfg.beta = b;
        }
        cfg.form = match self.form.as_str() {
            "hat" => CoeffForm::Normalized,
            "bar" => CoeffForm::PartiallyNormalized,
            other => return Err(Error::Config(format!("form must be hat or bar, got {other:?}"))),
        };
        cfg.timing = self.timing;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn emit(out: Option<&Path>, cfg: &ExperimentConfig, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let mut f = fs::File::create(path).map_err(|e| Error::File {
                path: path.to_path_buf(),
                source: e,
            })?;
            write(&mut f)?;
            write_sidecar(cfg, path)?;
        }
        None => write(&mut io::stdout().lock())?,
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<i32> {
    let (kind, args) = match &command {
        Command::Learn(a) => (ExperimentKind::Learn, a),
        Command::SzCheck(a) => (ExperimentKind::SzCheck, a),
        Command::PropagationCheck(a) => (ExperimentKind::PropagationCheck, a),
        Command::CoeffRecovery(a) => (ExperimentKind::CoeffRecovery, a),
        Command::OracleCoeffs(a) => (ExperimentKind::OracleCoeffs, a),
    };
    let cfg = args.config(kind)?;
    let out = args.out.as_deref();
    match kind {
        ExperimentKind::Learn => {
            let records = run_learn_experiment(&cfg)?;
            emit(out, &cfg, |w| write_records(&records, w))?;
            let s = summarize(&records, cfg.eps, cfg.delta);
            eprintln!(
                "trials {} fails {} within eps {} mean error {}",
                s.trials,
                s.fails,
                s.within_eps,
                s.mean_error.map(|e| format!("{e:.6}")).unwrap_or_else(|| "n/a".into())
            );
            Ok(fail_code(s.fail_rate, cfg.max_fail_rate))
        }
        ExperimentKind::CoeffRecovery => {
            let records = run_coeff_recovery(&cfg)?;
            emit(out, &cfg, |w| write_records(&records, w))?;
            let captured = records.iter().filter(|r| r.captured).count();
            let contained = records.iter().filter(|r| r.contained).count();
            let fails = records.iter().filter(|r| r.fail).count();
            eprintln!(
                "trials {} captured {captured} contained {contained} fails {fails}",
                records.len()
            );
            Ok(fail_code(fails as f64 / records.len() as f64, cfg.max_fail_rate))
        }
        ExperimentKind::SzCheck | ExperimentKind::PropagationCheck => {
            let rows = if kind == ExperimentKind::SzCheck {
                run_sz_check(&cfg)?
            } else {
                run_propagation_check(&cfg)?
            };
            emit(out, &cfg, |w| write_report(&rows, w))?;
            let failed = rows.iter().filter(|r| !r.pass).count();
            eprintln!("rows {} passing {}", rows.len(), rows.len() - failed);
            Ok(0)
        }
        ExperimentKind::OracleCoeffs => {
            emit(out, &cfg, |w| run_oracle_coeffs(&cfg, w))?;
            Ok(0)
        }
    }
}

fn fail_code(rate: f64, limit: f64) -> i32 {
    if rate > limit {
        eprintln!("FAIL rate {rate} exceeds limit {limit}");
        2
    } else {
        0
    }
}
