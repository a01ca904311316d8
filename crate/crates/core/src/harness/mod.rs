//! Seeded experiment campaigns.
//!
//! A campaign is an [`ExperimentConfig`] plus a master seed. Trial `k` gets
//! the seed `derive_seed(master, "trial", k)`, and every random choice inside
//! the trial (tree, base means, perturbation, sample, evaluation points) comes
//! from a labeled sub-stream of that seed, so one row can be replayed alone
//! with [`run_learn_trial`] and results never depend on the worker count.

pub mod cli;
mod records;

use std::fmt;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{perturb, random_base_mu, read_means, sample_seeded, Dataset, ProductDist};
use crate::error::{Error, Result};
use crate::fourier::{expand_exact, to_partially_normalized, write_coeffs, SubsetIndex, ENUMERATION_CAP};
use crate::learner::{empirical_error, exact_error, learn, LearnerConfig, MuSource};
use crate::oracle::{
    admissible_set, exact_squared_loss, propagation_bound, propagation_frequency, sz_bound, sz_exact, sz_probability,
    AnalysisParams, CoeffForm, HeavySet, ReportRow,
};
use crate::rng::{derive_seed, label, stream};
use crate::tree::{parity_tree, parse_tree, random_tree, DecisionTree};

pub use records::{write_records, Record, RecoveryRecord, TrialRecord};

/// Monte-Carlo evaluation size used when exact enumeration is out of reach.
pub const DEFAULT_MC_POINTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Learn,
    SzCheck,
    PropagationCheck,
    CoeffRecovery,
    OracleCoeffs,
}

/// How target trees are produced for each trial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum TreeSource {
    /// `random:<size>`: a fresh random tree with `size` leaves per trial.
    Random(usize),
    /// `parity:<k>`: parity of `k` variables chosen at random per trial.
    Parity(usize),
    /// `file:<path>`: the same tree, read once, in every trial.
    File(PathBuf),
}

impl TreeSource {
    /// Builds the tree for one trial. File sources are re-read; use
    /// [`TreeSource::load`] once and [`TreeSource::build_with`] in loops.
    pub fn build<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DecisionTree> {
        let fixed = self.load(n)?;
        self.build_with(fixed.as_ref(), n, rng)
    }

    /// Reads the file of a `file:` source.
    pub fn load(&self, n: usize) -> Result<Option<DecisionTree>> {
        match self {
            TreeSource::File(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::File {
                    path: path.clone(),
                    source: e,
                })?;
                let tree = parse_tree(&text, n).map_err(|e| Error::InFile {
                    path: path.clone(),
                    source: Box::new(e),
                })?;
                Ok(Some(tree))
            }
            _ => Ok(None),
        }
    }

    pub fn build_with<R: Rng + ?Sized>(
        &self,
        fixed: Option<&DecisionTree>,
        n: usize,
        rng: &mut R,
    ) -> Result<DecisionTree> {
        match self {
            TreeSource::Random(size) => random_tree(n, *size, rng),
            TreeSource::Parity(k) => {
                if *k > n {
                    return Err(Error::Config(format!(
                        "parity of {k} variables needs n >= {k}, got {n}"
                    )));
                }
                let mut vars: Vec<usize> = rand::seq::index::sample(rng, n, *k)
                    .into_iter()
                    .map(|i| i + 1)
                    .collect();
                vars.sort_unstable();
                parity_tree(SubsetIndex::from_vars(&vars, n)?, n)
            }
            TreeSource::File(_) => match fixed {
                Some(t) => Ok(t.clone()),
                None => self.load(n).map(|t| t.expect("file source loads a tree")),
            },
        }
    }

    /// Size hint for the analysis parameters when no tree is at hand.
    pub fn nominal_size(&self) -> Option<usize> {
        match self {
            TreeSource::Random(s) => Some(*s),
            TreeSource::Parity(k) => Some(1usize << k),
            TreeSource::File(_) => None,
        }
    }
}

impl fmt::Display for TreeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeSource::Random(s) => write!(f, "random:{s}"),
            TreeSource::Parity(k) => write!(f, "parity:{k}"),
            TreeSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for TreeSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "tree source must be random:<size>, parity:<k> or file:<path>, got {s:?}"
            ))
        };
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "random" => Ok(TreeSource::Random(arg.parse().map_err(|_| bad())?)),
            "parity" => Ok(TreeSource::Parity(arg.parse().map_err(|_| bad())?)),
            "file" if !arg.is_empty() => Ok(TreeSource::File(PathBuf::from(arg))),
            _ => Err(bad()),
        }
    }
}

impl From<TreeSource> for String {
    fn from(t: TreeSource) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for TreeSource {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Which unit a mean vector is written in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeanConvention {
    /// Means of `±1` coordinates, in `[-1, 1]`.
    #[default]
    #[serde(rename = "pm1")]
    PlusMinusOne,
    /// Probabilities of a 1 bit, in `[0, 1]`, mapped by `mu = 2p - 1`.
    #[serde(rename = "01")]
    ZeroOne,
}

impl MeanConvention {
    pub fn to_pm1(self, v: f64) -> f64 {
        match self {
            MeanConvention::PlusMinusOne => v,
            MeanConvention::ZeroOne => 2.0 * v - 1.0,
        }
    }
}

impl FromStr for MeanConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pm1" => Ok(MeanConvention::PlusMinusOne),
            "01" => Ok(MeanConvention::ZeroOne),
            _ => Err(Error::Config(format!("mean convention must be pm1 or 01, got {s:?}"))),
        }
    }
}

/// Where the adversary's base mean vector comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum BaseMeans {
    /// The uniform distribution.
    Zero,
    /// Uniform over the `2c`-bounded box, fresh per trial.
    Random,
    /// `random:<lo>:<hi>`: each coordinate uniform in `[lo, hi]`, fresh per
    /// trial, in the configured convention.
    Range(f64, f64),
    /// `file:<path>`: one mean per line, in the configured convention.
    File(PathBuf),
}

impl BaseMeans {
    /// Reads the file of a `file:` source, converted to `±1` means.
    pub fn load(&self, n: usize, convention: MeanConvention) -> Result<Option<Vec<f64>>> {
        match self {
            BaseMeans::File(path) => {
                let f = fs::File::open(path).map_err(|e| Error::File {
                    path: path.clone(),
                    source: e,
                })?;
                let raw = read_means(BufReader::new(f)).map_err(|e| Error::InFile {
                    path: path.clone(),
                    source: Box::new(e),
                })?;
                if raw.len() != n {
                    return Err(Error::InFile {
                        path: path.clone(),
                        source: Box::new(Error::DimensionMismatch {
                            expected: n,
                            got: raw.len(),
                        }),
                    });
                }
                Ok(Some(raw.into_iter().map(|v| convention.to_pm1(v)).collect()))
            }
            _ => Ok(None),
        }
    }

    pub fn draw<R: Rng + ?Sized>(
        &self,
        fixed: Option<&[f64]>,
        n: usize,
        c: f64,
        convention: MeanConvention,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        Ok(match self {
            BaseMeans::Zero => vec![0.0; n],
            BaseMeans::Random => random_base_mu(n, c, rng),
            BaseMeans::Range(lo, hi) => {
                let (a, b) = (convention.to_pm1(*lo), convention.to_pm1(*hi));
                (0..n).map(|_| rng.gen_range(a..=b)).collect()
            }
            BaseMeans::File(_) => match fixed {
                Some(mu) => mu.to_vec(),
                None => self.load(n, convention)?.expect("file source loads means"),
            },
        })
    }
}

impl fmt::Display for BaseMeans {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseMeans::Zero => write!(f, "zero"),
            BaseMeans::Random => write!(f, "random"),
            BaseMeans::Range(lo, hi) => write!(f, "random:{lo}:{hi}"),
            BaseMeans::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for BaseMeans {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "means must be zero, random, random:<lo>:<hi> or file:<path>, got {s:?}"
            ))
        };
        match s {
            "zero" => return Ok(BaseMeans::Zero),
            "random" => return Ok(BaseMeans::Random),
            _ => {}
        }
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(bad());
            }
            return Ok(BaseMeans::File(PathBuf::from(path)));
        }
        let range = s.strip_prefix("random:").ok_or_else(bad)?;
        let (lo, hi) = range.split_once(':').ok_or_else(bad)?;
        let lo: f64 = lo.parse().map_err(|_| bad())?;
        let hi: f64 = hi.parse().map_err(|_| bad())?;
        if !(lo <= hi) {
            return Err(bad());
        }
        Ok(BaseMeans::Range(lo, hi))
    }
}

impl From<BaseMeans> for String {
    fn from(m: BaseMeans) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for BaseMeans {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// How the error of a hypothesis is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum EvalMode {
    Exact,
    MonteCarlo(usize),
}

impl EvalMode {
    /// Exact enumeration when it is affordable.
    pub fn default_for(n: usize) -> Self {
        if n <= ENUMERATION_CAP {
            EvalMode::Exact
        } else {
            EvalMode::MonteCarlo(DEFAULT_MC_POINTS)
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalMode::Exact => write!(f, "exact"),
            EvalMode::MonteCarlo(k) => write!(f, "mc:{k}"),
        }
    }
}

impl FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(EvalMode::Exact);
        }
        match s.strip_prefix("mc:").map(str::parse::<usize>) {
            Some(Ok(k)) if k > 0 => Ok(EvalMode::MonteCarlo(k)),
            _ => Err(Error::Config(format!(
                "eval mode must be exact or mc:<points>, got {s:?}"
            ))),
        }
    }
}

impl From<EvalMode> for String {
    fn from(e: EvalMode) -> String {
        e.to_string()
    }
}

impl TryFrom<String> for EvalMode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Everything that determines a campaign's output, echoed to the JSON
/// sidecar next to each result file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    pub c: f64,
    /// Examples per trial.
    pub m: usize,
    /// Target error, used in summaries and the containment check.
    pub eps: f64,
    /// Allowed fraction of trials above `eps`.
    pub delta: f64,
    pub tree: TreeSource,
    pub mu: BaseMeans,
    pub mu_convention: MeanConvention,
    pub seed: u64,
    /// Trials for learning campaigns; Monte-Carlo draws for the checks.
    pub trials: usize,
    pub eval: EvalMode,
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
    pub depth_cap: Option<usize>,
    pub threshold: Option<f64>,
    pub learner_mu: MuSource,
    /// Fraction of FAIL outcomes above which a campaign counts as failed.
    pub max_fail_rate: f64,
    /// Grid of `a` values for the propagation check.
    pub alphas: Vec<f64>,
    /// `b` for the propagation check.
    pub beta: f64,
    /// Largest `d` in the anti-concentration grid.
    pub sz_max_degree: usize,
    /// `eps` grid for the anti-concentration check.
    pub sz_eps: Vec<f64>,
    /// Coefficient form written by `oracle-coeffs`.
    pub form: CoeffForm,
    /// Adds a wall-time column to trial records.
    pub timing: bool,
}

impl ExperimentConfig {
    /// Defaults for `kind` on `n` variables with margin `c`.
    pub fn new(kind: ExperimentKind, n: usize, c: f64) -> Self {
        let trials = match kind {
            ExperimentKind::SzCheck => 1_000_000,
            ExperimentKind::PropagationCheck => 10_000,
            _ => 20,
        };
        ExperimentConfig {
            kind,
            n,
            c,
            m: 10_000,
            eps: 0.1,
            delta: 0.1,
            tree: TreeSource::Random(8),
            mu: BaseMeans::Random,
            mu_convention: MeanConvention::PlusMinusOne,
            seed: 0,
            trials,
            eval: EvalMode::default_for(n),
            workers: None,
            depth_cap: None,
            threshold: None,
            learner_mu: MuSource::Exact,
            max_fail_rate: 0.0,
            alphas: vec![0.0, 1e-4, 1e-3, 1e-2],
            beta: 0.05,
            sz_max_degree: 5,
            sz_eps: vec![1e-1, 1e-2, 1e-3, 1e-4],
            form: CoeffForm::Normalized,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let trial_based = matches!(self.kind, ExperimentKind::Learn | ExperimentKind::CoeffRecovery);
        if self.kind != ExperimentKind::SzCheck && !(1..=64).contains(&self.n) {
            return bad(format!("n must be in 1..=64, got {}", self.n));
        }
        if self.kind != ExperimentKind::SzCheck && !(self.c > 0.0 && self.c < 0.25) {
            return bad(format!("c must be in (0, 1/4), got {}", self.c));
        }
        if self.trials == 0 || self.m == 0 {
            return bad("trial and example counts must be positive".into());
        }
        if self.workers == Some(0) {
            return bad("worker count must be positive".into());
        }
        if !(self.eps > 0.0 && self.eps < 1.0) || !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!(
                "eps and delta must lie in (0, 1), got {} and {}",
                self.eps, self.delta
            ));
        }
        if !(0.0..=1.0).contains(&self.max_fail_rate) {
            return bad(format!("max fail rate must lie in [0, 1], got {}", self.max_fail_rate));
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0) {
                return bad(format!("threshold must be positive, got {t}"));
            }
        }
        let needs_enumeration = matches!(
            self.kind,
            ExperimentKind::CoeffRecovery | ExperimentKind::PropagationCheck | ExperimentKind::OracleCoeffs
        ) || (trial_based && self.eval == EvalMode::Exact);
        if needs_enumeration && self.n > ENUMERATION_CAP {
            return bad(format!(
                "{:?} with n = {} needs exact enumeration, capped at n = {ENUMERATION_CAP}",
                self.kind, self.n
            ));
        }
        if let BaseMeans::Range(lo, hi) = self.mu {
            let (a, b) = (self.mu_convention.to_pm1(lo), self.mu_convention.to_pm1(hi));
            let lim = if self.kind == ExperimentKind::OracleCoeffs {
                1.0 - self.c
            } else {
                1.0 - 2.0 * self.c
            };
            if a < -lim || b > lim {
                return bad(format!("mean range [{a}, {b}] leaves the box [-{lim}, {lim}]"));
            }
        }
        if self.kind == ExperimentKind::SzCheck
            && (self.sz_max_degree == 0 || self.sz_eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)))
        {
            return bad("sz grid needs degree >= 1 and eps values in (0, 1)".into());
        }
        if self.kind == ExperimentKind::PropagationCheck && (self.alphas.iter().any(|a| *a < 0.0) || !(self.beta > 0.0))
        {
            return bad("propagation grid needs a >= 0 and b > 0".into());
        }
        Ok(())
    }

    /// Runs `work` on a pool with the configured worker count.
    pub fn with_workers<T: Send>(&self, work: impl FnOnce() -> T + Send) -> Result<T> {
        match self.workers {
            None => Ok(work()),
            Some(k) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
                Ok(pool.install(work))
            }
        }
    }

    fn learner(&self) -> LearnerConfig {
        let mut lc = LearnerConfig::new(self.c).with_mu_source(self.learner_mu);
        lc.threshold = self.threshold;
        lc.depth_cap = self.depth_cap;
        lc
    }

    /// Seed of trial `k`.
    pub fn trial_seed(&self, k: usize) -> u64 {
        derive_seed(self.seed, label::TRIAL, k as u64)
    }
}

/// Writes `config` as pretty JSON to `<out>.config.json`.
pub fn write_sidecar(config: &ExperimentConfig, out: &Path) -> Result<PathBuf> {
    let mut name = out.as_os_str().to_owned();
    name.push(".config.json");
    let path = PathBuf::from(name);
    let mut f = fs::File::create(&path).map_err(|e| Error::File {
        path: path.clone(),
        source: e,
    })?;
    serde_json::to_writer_pretty(&mut f, config)?;
    writeln!(f)?;
    Ok(path)
}

/// Hex prefix of the SHA-256 of a vector's little-endian bytes.
pub fn digest(values: &[f64]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Inputs shared by all trials, loaded once.
struct Fixed {
    tree: Option<DecisionTree>,
    mu: Option<Vec<f64>>,
}

impl Fixed {
    fn load(config: &ExperimentConfig) -> Result<Self> {
        Ok(Fixed {
            tree: config.tree.load(config.n)?,
            mu: config.mu.load(config.n, config.mu_convention)?,
        })
    }
}

/// One perturbed instance: target, base means, perturbation.
pub struct Instance {
    pub tree: DecisionTree,
    pub base_mu: Vec<f64>,
    pub delta: Vec<f64>,
    pub dist: ProductDist,
}

fn draw_instance(config: &ExperimentConfig, fixed: &Fixed, seed: u64) -> Result<Instance> {
    let n = config.n;
    let tree = config
        .tree
        .build_with(fixed.tree.as_ref(), n, &mut stream(seed, label::TREE, 0))?;
    let base_mu = config.mu.draw(
        fixed.mu.as_deref(),
        n,
        config.c,
        config.mu_convention,
        &mut stream(seed, label::BASE_MU, 0),
    )?;
    let pert = perturb(&base_mu, config.c, &mut stream(seed, label::DELTA, 0))?;
    let delta = pert.delta.clone();
    Ok(Instance {
        tree,
        base_mu,
        delta,
        dist: pert.into_dist(),
    })
}

/// Everything one learning trial produced, before it is flattened to a row.
pub struct TrialRun {
    pub instance: Instance,
    pub outcome: crate::learner::LearnOutcome,
    pub error: Option<f64>,
    pub squared_loss: Option<f64>,
}

fn learn_trial(config: &ExperimentConfig, fixed: &Fixed, seed: u64) -> Result<TrialRun> {
    let instance = draw_instance(config, fixed, seed)?;
    let xs = sample_seeded(&instance.dist, config.m, derive_seed(seed, label::SAMPLE, 0));
    let data = Dataset::label(&instance.tree, xs, instance.dist.mu().to_vec())?;
    let outcome = learn(&data, &config.learner())?;
    let (error, squared_loss) = match outcome.hypothesis() {
        None => (None, None),
        Some(h) => {
            let error = match config.eval {
                EvalMode::Exact => exact_error(h, &instance.dist, &instance.tree)?,
                EvalMode::MonteCarlo(k) => {
                    empirical_error(h, &instance.dist, &instance.tree, k, &mut stream(seed, label::EVAL, 0))?
                }
            };
            let loss = if config.eval == EvalMode::Exact && h.mu() == instance.dist.mu() {
                Some(exact_squared_loss(h.poly(), &instance.dist, &instance.tree)?.pointwise)
            } else {
                None
            };
            (Some(error), loss)
        }
    };
    Ok(TrialRun {
        instance,
        outcome,
        error,
        squared_loss,
    })
}

/// Replays the learning trial with seed `trial_seed` (the `seed` column of a
/// [`TrialRecord`]).
pub fn run_learn_trial(config: &ExperimentConfig, trial_seed: u64) -> Result<TrialRun> {
    config.validate()?;
    let fixed = Fixed::load(config)?;
    learn_trial(config, &fixed, trial_seed)
}

fn record_of(k: usize, seed: u64, run: &TrialRun, wall: Option<f64>) -> TrialRecord {
    let d = &run.outcome.diagnostics;
    TrialRecord {
        trial: k,
        seed,
        mu_base_digest: digest(&run.instance.base_mu),
        delta_digest: digest(&run.instance.delta),
        frontier_sizes: d.frontier_sizes.clone(),
        final_frontier_size: run.outcome.frontier.len(),
        fail: run.outcome.is_fail(),
        error: run.error,
        squared_loss: run.squared_loss,
        wall_time: wall,
    }
}

/// Runs every trial of a learning campaign, in parallel, rows in trial order.
pub fn run_learn_experiment(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let fixed = Fixed::load(config)?;
    config.with_workers(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|k| {
                let seed = config.trial_seed(k);
                let start = Instant::now();
                let run = learn_trial(config, &fixed, seed)?;
                let wall = config.timing.then(|| start.elapsed().as_secs_f64());
                Ok(record_of(k, seed, &run, wall))
            })
            .collect::<Result<Vec<_>>>()
    })?
}

/// Learning trials checked against the exact heavy and admissible sets.
///
/// Capture: every `S` with `|f^(S, mu)| >= 2t` and `|S| <= D` is in the final
/// frontier. Containment: every frontier set other than the empty set has
/// `|f^(S, mu)| >= t - tau` with `tau = t sqrt(eps) / 4`.
pub fn run_coeff_recovery(config: &ExperimentConfig) -> Result<Vec<RecoveryRecord>> {
    config.validate()?;
    let fixed = Fixed::load(config)?;
    config.with_workers(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|k| {
                let seed = config.trial_seed(k);
                let run = learn_trial(config, &fixed, seed)?;
                let dist = &run.instance.dist;
                let params = AnalysisParams::new(run.instance.tree.size(), config.eps, config.c, config.m, dist.mu())?;
                let resolved = run.outcome.diagnostics.params;
                let t = resolved.threshold;
                let tau = t * config.eps.sqrt() / 4.0;
                let fhat = expand_exact(&run.instance.tree, dist)?;
                let heavy = HeavySet::from_poly(&fhat, 2.0 * t, resolved.depth_cap);
                let admissible = admissible_set(&fhat, t, tau, resolved.depth_cap);
                let frontier = &run.outcome.frontier;
                let missing = heavy.sets.iter().filter(|s| !frontier.contains(**s)).count();
                let extra = frontier.sets().iter().filter(|s| !admissible.contains(s)).count();
                let base = record_of(k, seed, &run, None);
                Ok(RecoveryRecord {
                    trial: k,
                    seed,
                    mu_base_digest: base.mu_base_digest,
                    delta_digest: base.delta_digest,
                    tree_size: run.instance.tree.size(),
                    threshold: t,
                    tau,
                    needed_degree: params.d,
                    depth_cap: resolved.depth_cap,
                    heavy_size: heavy.len(),
                    admissible_size: admissible.len(),
                    final_frontier_size: frontier.len(),
                    missing,
                    extra,
                    captured: missing == 0,
                    contained: extra == 0,
                    fail: base.fail,
                    error: run.error,
                    squared_loss: run.squared_loss,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?
}

/// The paper-style sum `eps Σ_{i<d} ln(1/eps)^i` without factorials.
pub fn sz_unscaled_sum(d: usize, eps: f64) -> f64 {
    let l = (1.0 / eps).ln();
    eps * (0..d).map(|i| l.powi(i as i32)).sum::<f64>()
}

/// Anti-concentration grid. For each `(d, eps)`: the Monte-Carlo frequency
/// against the `2^d sqrt(eps)` bound, against the factorial closed form
/// (3 standard errors), and against the factorial-free sum (3 standard
/// errors), which agrees with the others only for `d <= 2`.
pub fn run_sz_check(config: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    config.validate()?;
    let grid: Vec<(usize, f64)> = (1..=config.sz_max_degree)
        .flat_map(|d| config.sz_eps.iter().map(move |&e| (d, e)))
        .collect();
    config.with_workers(|| {
        let mut rows = Vec::new();
        for (i, &(d, eps)) in grid.iter().enumerate() {
            let mc = sz_probability(d, eps, config.trials, derive_seed(config.seed, "sz-grid", i as u64))?;
            let params = format!("d={d};eps={eps};trials={}", config.trials);
            let row = |quantity: &str, bound: f64, pass: bool| ReportRow {
                quantity: quantity.into(),
                params: params.clone(),
                estimate: mc.estimate,
                stderr: mc.stderr,
                bound,
                pass,
            };
            let bound = sz_bound(d, eps);
            rows.push(row("sz-bound", bound, mc.estimate <= bound));
            let exact = sz_exact(d, eps);
            rows.push(row("sz-exact", exact, mc.within(exact, 3.0)));
            let sum = sz_unscaled_sum(d, eps);
            rows.push(row("sz-unscaled-sum", sum, mc.within(sum, 3.0)));
        }
        Ok(rows)
    })?
}

/// Propagation-event frequencies over random perturbations for one target
/// (drawn from the tree source with the master seed) and each `a` in the
/// grid, in both coefficient forms, with the union bound for degree cap `D`
/// (the configured depth cap, or `n`). Every row reuses the same
/// perturbations, so frequencies are nondecreasing in `a`.
pub fn run_propagation_check(config: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    config.validate()?;
    let fixed = Fixed::load(config)?;
    let n = config.n;
    let tree = config
        .tree
        .build_with(fixed.tree.as_ref(), n, &mut stream(config.seed, label::TREE, 0))?;
    let base_mu = config.mu.draw(
        fixed.mu.as_deref(),
        n,
        config.c,
        config.mu_convention,
        &mut stream(config.seed, label::BASE_MU, 0),
    )?;
    let cap = config.depth_cap.unwrap_or(n);
    let seed = derive_seed(config.seed, "propagation", 0);
    config.with_workers(|| {
        let mut rows = Vec::new();
        for form in [CoeffForm::Normalized, CoeffForm::PartiallyNormalized] {
            for &a in &config.alphas {
                let mc = propagation_frequency(
                    &tree,
                    &base_mu,
                    config.c,
                    a,
                    config.beta,
                    cap,
                    form,
                    config.trials,
                    seed,
                )?;
                let bound = propagation_bound(form, a, config.beta, config.c, cap);
                let quantity = match form {
                    CoeffForm::Normalized => "propagation-normalized",
                    CoeffForm::PartiallyNormalized => "propagation-partially-normalized",
                };
                rows.push(ReportRow {
                    quantity: quantity.into(),
                    params: format!(
                        "a={a};b={};d={cap};trials={};tree_size={}",
                        config.beta,
                        config.trials,
                        tree.size()
                    ),
                    estimate: mc.estimate,
                    stderr: mc.stderr,
                    bound,
                    pass: mc.estimate <= bound,
                });
            }
        }
        Ok(rows)
    })?
}

/// Exact coefficients of one target at the base means (no perturbation),
/// written as the coefficient CSV in the configured form.
pub fn run_oracle_coeffs<W: Write>(config: &ExperimentConfig, out: W) -> Result<()> {
    config.validate()?;
    let fixed = Fixed::load(config)?;
    let n = config.n;
    let tree = config
        .tree
        .build_with(fixed.tree.as_ref(), n, &mut stream(config.seed, label::TREE, 0))?;
    let mu = config.mu.draw(
        fixed.mu.as_deref(),
        n,
        config.c,
        config.mu_convention,
        &mut stream(config.seed, label::BASE_MU, 0),
    )?;
    let dist = ProductDist::new(mu, config.c)?;
    let fhat = expand_exact(&tree, &dist)?;
    match config.form {
        CoeffForm::Normalized => write_coeffs(&fhat, out),
        CoeffForm::PartiallyNormalized => write_coeffs(&to_partially_normalized(&fhat)?, out),
    }
}

/// Campaign totals for a learning run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub fails: usize,
    pub fail_rate: f64,
    /// Trials that learned a hypothesis with error at most `eps`.
    pub within_eps: usize,
    /// Whether `within_eps >= (1 - delta) * trials`.
    pub meets_confidence: bool,
    pub mean_error: Option<f64>,
}

pub fn summarize(records: &[TrialRecord], eps: f64, delta: f64) -> Summary {
    let trials = records.len();
    let fails = records.iter().filter(|r| r.fail).count();
    let errors: Vec<f64> = records.iter().filter_map(|r| r.error).collect();
    let within_eps = errors.iter().filter(|&&e| e <= eps).count();
    Summary {
        trials,
        fails,
        fail_rate: if trials == 0 { 0.0 } else { fails as f64 / trials as f64 },
        within_eps,
        meets_confidence: within_eps as f64 >= (1.0 - delta) * trials as f64,
        mean_error: (!errors.is_empty()).then(|| errors.iter().sum::<f64>() / errors.len() as f64),
    }
}

#[cfg(test)]
mod tests;
