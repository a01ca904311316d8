//! Top-down discovery of heavy normalized Fourier coefficients from random
//! examples, producing a polynomial threshold hypothesis.
//!
//! Starting from `S_0 = {∅}`, level `d` adds every `S ∪ {i}` with
//! `S ∈ S_{d-1}` whose estimate `e(S ∪ {i}) = (1/m) Σ_j y_j z_{S∪{i}}(x_j)`
//! has magnitude at least the threshold `t`. The run aborts with
//! [`Verdict::Fail`] as soon as a level holds more than `m` sets. The
//! hypothesis is the sign of `Σ_{S ∈ S_D} e(S) z_S(x)`.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{estimate_means, sample, Dataset, ProductDist};
use crate::error::{Error, Result};
use crate::fourier::{
    expectation, ordered_sum, read_coeffs, write_coeffs, Basis, BooleanFunction, SparsePoly, SubsetIndex,
};
use crate::tree::check_point;

/// Where the learner takes its mean vector from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuSource {
    /// The dataset's `mu_used`, normally the true mean vector.
    #[default]
    Exact,
    /// Clamped empirical means of the same examples.
    Estimated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub c: f64,
    /// Overrides `t = m^{-1/3}`.
    pub threshold: Option<f64>,
    /// Overrides `D = floor(ln(m) / 12 * (1 - max_i |mu_i|))`.
    pub depth_cap: Option<usize>,
    /// Overrides the frontier cap `m`.
    pub frontier_cap: Option<usize>,
    pub mu_source: MuSource,
}

impl LearnerConfig {
    pub fn new(c: f64) -> Self {
        LearnerConfig {
            c,
            threshold: None,
            depth_cap: None,
            frontier_cap: None,
            mu_source: MuSource::Exact,
        }
    }

    pub fn with_threshold(mut self, t: f64) -> Self {
        self.threshold = Some(t);
        self
    }

    pub fn with_depth_cap(mut self, d: usize) -> Self {
        self.depth_cap = Some(d);
        self
    }

    pub fn with_frontier_cap(mut self, cap: usize) -> Self {
        self.frontier_cap = Some(cap);
        self
    }

    pub fn with_mu_source(mut self, source: MuSource) -> Self {
        self.mu_source = source;
        self
    }

    /// Concrete parameters for a run on `m` examples with means `mu`.
    pub fn resolve(&self, m: usize, mu: &[f64]) -> Result<ResolvedParams> {
        let threshold = self.threshold.unwrap_or_else(|| default_threshold(m));
        if !(threshold > 0.0) {
            return Err(Error::Config(format!("threshold must be positive, got {threshold}")));
        }
        let frontier_cap = self.frontier_cap.unwrap_or(m);
        if frontier_cap == 0 {
            return Err(Error::Config("frontier cap must be at least 1".into()));
        }
        let depth_cap = self.depth_cap.unwrap_or_else(|| default_depth_cap(m, mu));
        Ok(ResolvedParams {
            threshold,
            depth_cap,
            frontier_cap,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub threshold: f64,
    pub depth_cap: usize,
    pub frontier_cap: usize,
}

/// `m^{-1/3}`.
pub fn default_threshold(m: usize) -> f64 {
    (m as f64).powf(-1.0 / 3.0)
}

/// `floor(ln(m) / 12 * (1 - max_i |mu_i|))`, using the natural logarithm.
pub fn default_depth_cap(m: usize, mu: &[f64]) -> usize {
    let max_abs = mu.iter().fold(0.0f64, |a, m| a.max(m.abs()));
    let d = (m as f64).ln() / 12.0 * (1.0 - max_abs);
    if d.is_finite() && d > 0.0 {
        d.floor() as usize
    } else {
        0
    }
}

/// Nested families `S_0 ⊆ S_1 ⊆ ... ⊆ S_d`, stored as one insertion-ordered
/// list plus the length of each level's prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct Frontier {
    sets: Vec<SubsetIndex>,
    estimates: HashMap<SubsetIndex, f64>,
    level_ends: Vec<usize>,
}

impl Frontier {
    /// All retained sets in insertion order.
    pub fn sets(&self) -> &[SubsetIndex] {
        &self.sets
    }

    /// `S_d`; the last completed level when `d` is past the end.
    pub fn level(&self, d: usize) -> &[SubsetIndex] {
        let end = self.level_ends[d.min(self.level_ends.len() - 1)];
        &self.sets[..end]
    }

    pub fn levels(&self) -> usize {
        self.level_ends.len()
    }

    pub fn estimate(&self, s: SubsetIndex) -> Option<f64> {
        self.estimates.get(&s).copied()
    }

    pub fn contains(&self, s: SubsetIndex) -> bool {
        self.estimates.contains_key(&s)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// The sign of a sparse character-basis polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    poly: SparsePoly,
    sigma: Vec<f64>,
}

impl Hypothesis {
    /// `poly` must be in the character basis.
    pub fn new(poly: SparsePoly) -> Result<Self> {
        let Basis::Character { mu } = poly.basis() else {
            return Err(Error::BasisMismatch);
        };
        let sigma = mu.iter().map(|m| (1.0 - m * m).sqrt()).collect();
        Ok(Hypothesis { poly, sigma })
    }

    pub fn poly(&self) -> &SparsePoly {
        &self.poly
    }

    pub fn n(&self) -> usize {
        self.poly.n()
    }

    pub fn mu(&self) -> &[f64] {
        self.poly.basis().mu().expect("character basis")
    }

    /// `p(x)` before taking the sign.
    pub fn score(&self, x: &[i8]) -> f64 {
        let z: Vec<f64> = x
            .iter()
            .zip(self.mu())
            .zip(&self.sigma)
            .map(|((&v, m), s)| (v as f64 - m) / s)
            .collect();
        self.poly
            .iter()
            .map(|(s, c)| c * s.members().map(|i| z[i]).product::<f64>())
            .sum()
    }

    /// `sgn(p(x))` with `sgn(0) = +1`.
    pub fn predict(&self, x: &[i8]) -> Result<i8> {
        check_point(x, self.n())?;
        Ok(self.sign_at(x))
    }

    pub(crate) fn sign_at(&self, x: &[i8]) -> i8 {
        if self.score(x) < 0.0 {
            -1
        } else {
            1
        }
    }

    /// Coefficient table preceded by a `#hypothesis n=<n> mu=<m1;m2;...>` line.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let mu: Vec<String> = self.mu().iter().map(|m| m.to_string()).collect();
        writeln!(w, "#hypothesis n={} mu={}", self.n(), mu.join(";"))?;
        write_coeffs(&self.poly, w)
    }

    pub fn read<R: BufRead>(mut r: R) -> Result<Self> {
        let mut first = String::new();
        r.read_line(&mut first)?;
        let bad = || Error::Format(format!("bad hypothesis header {:?}", first.trim_end()));
        let rest = first.trim().strip_prefix("#hypothesis ").ok_or_else(bad)?;
        let mut n = None;
        let mut mu = None;
        for field in rest.split_whitespace() {
            match field.split_once('=') {
                Some(("n", v)) => n = Some(v.parse::<usize>().map_err(|_| bad())?),
                Some(("mu", v)) => {
                    mu = Some(
                        v.split(';')
                            .map(|t| t.parse::<f64>().map_err(|_| bad()))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                _ => return Err(bad()),
            }
        }
        let (n, mu) = (n.ok_or_else(bad)?, mu.ok_or_else(bad)?);
        if mu.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: mu.len(),
            });
        }
        Self::new(read_coeffs(r, n, Basis::Character { mu })?)
    }
}

impl BooleanFunction for Hypothesis {
    fn n(&self) -> usize {
        self.poly.n()
    }

    fn value(&self, x: &[i8]) -> f64 {
        self.sign_at(x) as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Learned(Hypothesis),
    /// Level `level` held `frontier_size` sets, more than the cap.
    Fail {
        level: usize,
        frontier_size: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub params: ResolvedParams,
    pub mu: Vec<f64>,
    /// `|S_d|` for each completed level, starting with `|S_0| = 1`.
    pub frontier_sizes: Vec<usize>,
    /// New candidates estimated at each level (index 0 is the empty set).
    pub candidates_per_level: Vec<usize>,
    pub estimates_computed: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnOutcome {
    pub verdict: Verdict,
    pub frontier: Frontier,
    pub diagnostics: Diagnostics,
}

impl LearnOutcome {
    pub fn is_fail(&self) -> bool {
        matches!(self.verdict, Verdict::Fail { .. })
    }

    pub fn hypothesis(&self) -> Option<&Hypothesis> {
        match &self.verdict {
            Verdict::Learned(h) => Some(h),
            Verdict::Fail { .. } => None,
        }
    }
}

/// Runs the learner on `dataset`.
///
/// Candidates are generated from each level's newly added sets in insertion
/// order with `i` ascending; a set reached from several parents is estimated
/// once. Extending older sets again would only recompute estimates already
/// rejected, so the result equals extending all of `S_{d-1}`. Estimation is
/// parallel over parents, and each estimate is a fixed-order sum, so the
/// outcome does not depend on the thread count.
pub fn learn(dataset: &Dataset, config: &LearnerConfig) -> Result<LearnOutcome> {
    let n = dataset.n();
    let m = dataset.len();
    let mu = match config.mu_source {
        MuSource::Exact => dataset.mu_used().to_vec(),
        MuSource::Estimated => estimate_means(dataset.xs(), config.c)?,
    };
    let dist = ProductDist::new(mu, config.c)?;
    let params = config.resolve(m, dist.mu())?;

    // z columns, one contiguous vector per variable.
    let zcols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (zm, zp) = dist.z_values(i);
            dataset.xs().iter().map(|x| if x[i] > 0 { zp } else { zm }).collect()
        })
        .collect();
    let ys: Vec<f64> = dataset.ys().iter().map(|&y| y as f64).collect();
    let inv_m = 1.0 / m as f64;

    let empty_estimate = ordered_sum(m, |j| ys[j]) * inv_m;
    let mut frontier = Frontier {
        sets: vec![SubsetIndex::EMPTY],
        estimates: HashMap::from([(SubsetIndex::EMPTY, empty_estimate)]),
        level_ends: vec![1],
    };
    let mut evaluated: HashSet<SubsetIndex> = HashSet::from([SubsetIndex::EMPTY]);
    let mut diagnostics = Diagnostics {
        params,
        mu: dist.mu().to_vec(),
        frontier_sizes: vec![1],
        candidates_per_level: vec![1],
        estimates_computed: 1,
    };
    let mut newest: Vec<SubsetIndex> = vec![SubsetIndex::EMPTY];

    for level in 1..=params.depth_cap {
        // Candidates grouped by the first parent that reaches them.
        let mut groups: Vec<(SubsetIndex, Vec<usize>)> = Vec::new();
        let mut count = 0;
        for &parent in &newest {
            let vars: Vec<usize> = (0..n)
                .filter(|&i| !parent.contains(i) && evaluated.insert(parent.with(i)))
                .collect();
            count += vars.len();
            if !vars.is_empty() {
                groups.push((parent, vars));
            }
        }
        let estimates: Vec<Vec<(SubsetIndex, f64)>> = groups
            .par_iter()
            .map(|(parent, vars)| {
                let mut w = ys.clone();
                for i in parent.members() {
                    for (wj, zj) in w.iter_mut().zip(&zcols[i]) {
                        *wj *= zj;
                    }
                }
                vars.iter()
                    .map(|&i| {
                        let z = &zcols[i];
                        (parent.with(i), ordered_sum(m, |j| w[j] * z[j]) * inv_m)
                    })
                    .collect()
            })
            .collect();

        newest.clear();
        for (s, e) in estimates.into_iter().flatten() {
            if e.abs() >= params.threshold {
                frontier.sets.push(s);
                frontier.estimates.insert(s, e);
                newest.push(s);
            }
        }
        frontier.level_ends.push(frontier.sets.len());
        diagnostics.frontier_sizes.push(frontier.sets.len());
        diagnostics.candidates_per_level.push(count);
        diagnostics.estimates_computed += count;

        if frontier.sets.len() > params.frontier_cap {
            let verdict = Verdict::Fail {
                level,
                frontier_size: frontier.sets.len(),
            };
            return Ok(LearnOutcome {
                verdict,
                frontier,
                diagnostics,
            });
        }
        if newest.is_empty() {
            break;
        }
    }

    let terms: Vec<_> = frontier.sets.iter().map(|s| (*s, frontier.estimates[s])).collect();
    let poly = SparsePoly::new(n, Basis::Character { mu: dist.mu().to_vec() }, terms)?;
    let verdict = Verdict::Learned(Hypothesis::new(poly)?);
    Ok(LearnOutcome {
        verdict,
        frontier,
        diagnostics,
    })
}

fn check_same_n<A: BooleanFunction + ?Sized, B: BooleanFunction + ?Sized>(
    a: &A,
    b: &B,
    dist: &ProductDist,
) -> Result<()> {
    for got in [a.n(), b.n()] {
        if got != dist.n() {
            return Err(Error::DimensionMismatch {
                expected: dist.n(),
                got,
            });
        }
    }
    Ok(())
}

/// `Pr_{x ~ D_mu}[h(x) != f(x)]` by weighted enumeration.
pub fn exact_error<H, F>(h: &H, dist: &ProductDist, f: &F) -> Result<f64>
where
    H: BooleanFunction + ?Sized,
    F: BooleanFunction + ?Sized,
{
    check_same_n(h, f, dist)?;
    expectation(dist, |x| if h.value(x) != f.value(x) { 1.0 } else { 0.0 })
}

/// Monte-Carlo estimate of the disagreement probability from `trials` fresh points.
pub fn empirical_error<H, F, R>(h: &H, dist: &ProductDist, f: &F, trials: usize, rng: &mut R) -> Result<f64>
where
    H: BooleanFunction + ?Sized,
    F: BooleanFunction + ?Sized,
    R: Rng + ?Sized,
{
    check_same_n(h, f, dist)?;
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let xs = sample(dist, trials, rng);
    let wrong = xs.iter().filter(|x| h.value(x) != f.value(x)).count();
    Ok(wrong as f64 / trials as f64)
}
