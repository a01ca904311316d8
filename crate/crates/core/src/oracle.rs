//! Brute-force ground truth.
//!
//! Exact heavy-coefficient sets, sparse-approximation mass, squared loss by
//! two independent routes, and Monte-Carlo frequencies for the
//! anti-concentration and coefficient-propagation bounds. Everything here
//! enumerates the cube or simulates from a seed; nothing shares code paths
//! with the learner's estimation loop.

use std::collections::BTreeSet;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{perturb, ProductDist};
use crate::error::{Error, Result};
use crate::fourier::{
    characters_from_table, expand_exact, expectation, to_normalized, truth_table, Basis, BooleanFunction, SparsePoly,
    SubsetIndex, ZERO_TOL,
};
use crate::learner::default_depth_cap;
use crate::rng::stream;

/// Parameters from the learner's correctness argument, for a target of size
/// `s`, accuracy `eps`, margin `c`, and `m` examples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalysisParams {
    /// Degree up to which coefficients are needed: `(2/c) ln(12 s / eps)`.
    pub d: f64,
    /// Magnitude below which coefficients are dropped: `(eps / 12 s)^{1 + 2/c}`.
    pub beta: f64,
    /// Learner threshold `m^{-1/3}`.
    pub t: f64,
    /// Estimation accuracy `t sqrt(eps) / 4`.
    pub tau: f64,
    /// Learner depth cap.
    pub depth_cap: usize,
}

impl AnalysisParams {
    pub fn new(s: usize, eps: f64, c: f64, m: usize, mu: &[f64]) -> Result<Self> {
        if s == 0 || !(eps > 0.0 && eps < 1.0) || !(c > 0.0 && c < 0.5) || m == 0 {
            return Err(Error::Config(format!(
                "bad analysis inputs s={s} eps={eps} c={c} m={m}"
            )));
        }
        let ratio = 12.0 * s as f64 / eps;
        let t = (m as f64).powf(-1.0 / 3.0);
        Ok(AnalysisParams {
            d: 2.0 / c * ratio.ln(),
            beta: ratio.recip().powf(1.0 + 2.0 / c),
            t,
            tau: t * eps.sqrt() / 4.0,
            depth_cap: default_depth_cap(m, mu),
        })
    }

    /// Whether the depth cap exceeds `d`, the regime where the learner
    /// examines every degree that matters.
    pub fn theorem_regime(&self) -> bool {
        self.depth_cap as f64 > self.d
    }

    /// `d` rounded down, the degree cap for the needed feature set.
    pub fn degree(&self) -> usize {
        self.d.floor() as usize
    }
}

/// `{S : |S| <= degree_cap, |f^(S, mu)| >= threshold}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeavySet {
    pub threshold: f64,
    pub degree_cap: usize,
    pub sets: BTreeSet<SubsetIndex>,
}

impl HeavySet {
    /// Selects from a complete coefficient table.
    pub fn from_poly(poly: &SparsePoly, threshold: f64, degree_cap: usize) -> Self {
        let sets = poly
            .iter()
            .filter(|(s, v)| s.len() <= degree_cap && v.abs() >= threshold)
            .map(|(s, _)| s)
            .collect();
        HeavySet {
            threshold,
            degree_cap,
            sets,
        }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn contains(&self, s: SubsetIndex) -> bool {
        self.sets.contains(&s)
    }

    /// Every subset of every member: the sets a top-down search must pass
    /// through to reach the heavy ones.
    pub fn downward_closure(&self) -> BTreeSet<SubsetIndex> {
        self.sets.iter().flat_map(|s| s.subsets()).collect()
    }
}

/// Exact heavy set of `f` under `dist`.
pub fn heavy_set<F: BooleanFunction + ?Sized>(
    f: &F,
    dist: &ProductDist,
    threshold: f64,
    degree_cap: usize,
) -> Result<HeavySet> {
    Ok(HeavySet::from_poly(&expand_exact(f, dist)?, threshold, degree_cap))
}

/// `{∅} ∪ {S : |S| <= depth_cap, |f^(S, mu)| >= t - tau}`: the sets a run
/// with every estimate within `tau` of the truth can retain.
pub fn admissible_set(poly: &SparsePoly, t: f64, tau: f64, depth_cap: usize) -> BTreeSet<SubsetIndex> {
    let mut sets = HeavySet::from_poly(poly, t - tau, depth_cap).sets;
    sets.insert(SubsetIndex::EMPTY);
    sets
}

/// `Σ f^(S, mu)^2` over `S` with `|S| <= d` and `|f^(S, mu)| >= beta`.
pub fn sparse_approx_mass<F: BooleanFunction + ?Sized>(f: &F, dist: &ProductDist, beta: f64, d: usize) -> Result<f64> {
    let poly = expand_exact(f, dist)?;
    Ok(poly
        .iter()
        .filter(|(s, v)| s.len() <= d && v.abs() >= beta)
        .map(|(_, v)| v * v)
        .sum())
}

/// Lower bound on [`sparse_approx_mass`] for a size-`s` tree:
/// `1 - (4 (1 - c/2)^d s + 2^{d+2} beta)`.
pub fn sparse_mass_lower_bound(c: f64, d: usize, s: usize, beta: f64) -> f64 {
    1.0 - (4.0 * (1.0 - c / 2.0).powi(d as i32) * s as f64 + 2f64.powi(d as i32 + 2) * beta)
}

/// Bound on the probability that evaluation of a size-`s` tree passes depth
/// `d` under a `c`-bounded distribution: `(1 - c/2)^d s`.
pub fn truncation_bound(c: f64, d: usize, s: usize) -> f64 {
    (1.0 - c / 2.0).powi(d as i32) * s as f64
}

/// A Monte-Carlo frequency with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl McEstimate {
    pub fn from_count(hits: usize, trials: usize) -> Self {
        let p = hits as f64 / trials as f64;
        McEstimate {
            estimate: p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
        }
    }

    /// `|estimate - value| <= k * se`, using the standard error of `value`
    /// itself when that is larger (covers estimates of exactly 0 or 1).
    pub fn within(&self, value: f64, k: f64) -> bool {
        let se_value = (value * (1.0 - value) / self.trials as f64).max(0.0).sqrt();
        (self.estimate - value).abs() <= k * self.stderr.max(se_value)
    }
}

const MC_BLOCK: usize = 1 << 16;

/// Fraction of `x` uniform on `[-1,1]^d` with `|x_1 ... x_d| <= eps`.
/// Blocks of trials use streams derived from `seed`.
pub fn sz_probability(d: usize, eps: f64, trials: usize, seed: u64) -> Result<McEstimate> {
    if d == 0 || !(eps > 0.0 && eps < 1.0) || trials == 0 {
        return Err(Error::Config(format!(
            "sz_probability needs d >= 1, eps in (0,1), trials >= 1; got d={d} eps={eps}"
        )));
    }
    let hits: usize = (0..trials.div_ceil(MC_BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, "sz", b as u64);
            let len = MC_BLOCK.min(trials - b * MC_BLOCK);
            (0..len)
                .filter(|_| (0..d).map(|_| rng.gen_range(-1.0f64..1.0)).product::<f64>().abs() <= eps)
                .count()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(McEstimate::from_count(hits, trials))
}

/// Exact `Pr[|x_1 ... x_d| <= eps] = eps Σ_{i<d} ln(1/eps)^i / i!` for
/// `x` uniform on `[-1,1]^d`.
pub fn sz_exact(d: usize, eps: f64) -> f64 {
    let l = (1.0 / eps).ln();
    let mut term = 1.0;
    let mut sum = 0.0;
    for i in 0..d {
        if i > 0 {
            term *= l / i as f64;
        }
        sum += term;
    }
    eps * sum
}

/// Anti-concentration bound `2^d sqrt(eps)`.
pub fn sz_bound(d: usize, eps: f64) -> f64 {
    2f64.powi(d as i32) * eps.sqrt()
}

/// Which coefficients the propagation event is stated for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoeffForm {
    /// `f^(S, mu)`.
    Normalized,
    /// `f-(S, mu)`.
    PartiallyNormalized,
}

/// Union bound on the propagation event frequency for degree cap `d`:
/// `a^{1/2} b^{-5/2} (2/c)^{2d}` for normalized coefficients and
/// `a^{1/2} b^{-5/2} 4^d c^{-3d/2}` for partially normalized ones.
pub fn propagation_bound(form: CoeffForm, a: f64, b: f64, c: f64, d: usize) -> f64 {
    let d = d as f64;
    let base = a.sqrt() * b.powf(-2.5);
    match form {
        CoeffForm::Normalized => base * (2.0 / c).powf(2.0 * d),
        CoeffForm::PartiallyNormalized => base * 4f64.powf(d) * c.powf(-1.5 * d),
    }
}

/// Bound for a single pair `T ⊆ U` with `|U \ T| = k`:
/// `Pr[|f-(T)| <= a | |f-(U)| >= b] <= sqrt(a/b) (4/c)^{k/2}`.
pub fn conditional_bound(a: f64, b: f64, c: f64, k: usize) -> f64 {
    (a / b).sqrt() * (4.0 / c).powf(k as f64 / 2.0)
}

/// Whether some `T ⊆ U` with `|U| <= cap` has `|coef(T)| <= a` and
/// `|coef(U)| >= b`, for a dense table indexed by subset mask. Entries below
/// [`ZERO_TOL`] count as exact zeros.
pub fn propagation_event(coeffs: &[f64], a: f64, b: f64, cap: usize) -> bool {
    let mag = |s: SubsetIndex| {
        let v = coeffs[s.bits() as usize].abs();
        if v < ZERO_TOL {
            0.0
        } else {
            v
        }
    };
    (0..coeffs.len() as u64)
        .map(SubsetIndex::from_bits)
        .any(|u| u.len() <= cap && mag(u) >= b && u.subsets().any(|t| mag(t) <= a))
}

/// Frequency over random perturbations `delta` of the propagation event for
/// `f` at `mu = base_mu + delta`. Trial `k` draws its `delta` from the
/// stream `(seed, "delta", k)`.
#[allow(clippy::too_many_arguments)]
pub fn propagation_frequency<F: BooleanFunction + ?Sized>(
    f: &F,
    base_mu: &[f64],
    c: f64,
    a: f64,
    b: f64,
    degree_cap: usize,
    form: CoeffForm,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    if base_mu.len() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            got: base_mu.len(),
        });
    }
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let table = truth_table(f)?;
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|k| -> Result<bool> {
            let pert = perturb(base_mu, c, &mut stream(seed, "delta", k as u64))?;
            let dist = pert.dist();
            let mut coeffs = table.clone();
            characters_from_table(&mut coeffs, dist);
            if form == CoeffForm::PartiallyNormalized {
                for (idx, v) in coeffs.iter_mut().enumerate() {
                    let s = SubsetIndex::from_bits(idx as u64);
                    *v /= s.members().map(|i| dist.sigma()[i]).product::<f64>();
                }
            }
            Ok(propagation_event(&coeffs, a, b, degree_cap))
        })
        .collect::<Result<_>>()?;
    Ok(McEstimate::from_count(hits.iter().filter(|&&h| h).count(), trials))
}

/// `E[(p(x) - f(x))^2]` computed pointwise and in coefficient space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SquaredLoss {
    pub pointwise: f64,
    pub coefficient: f64,
}

/// Tolerance for the agreement of the two squared-loss routes.
pub const LOSS_AGREEMENT: f64 = 1e-9;

/// Squared loss of `poly` against `f` under `dist`, computed by weighted
/// enumeration of `(p(x) - f(x))^2` and by `Σ_S (p^(S) - f^(S))^2`. Fails if
/// the two disagree by more than [`LOSS_AGREEMENT`].
pub fn exact_squared_loss<F: BooleanFunction + ?Sized>(
    poly: &SparsePoly,
    dist: &ProductDist,
    f: &F,
) -> Result<SquaredLoss> {
    let chars = match poly.basis() {
        Basis::Character { mu } if mu == dist.mu() => poly.clone(),
        Basis::Centered { mu } if mu == dist.mu() => to_normalized(poly)?,
        _ => return Err(Error::BasisMismatch),
    };
    let pointwise = expectation(dist, |x| (poly.value_at(x) - f.value(x)).powi(2))?;
    let fhat = expand_exact(f, dist)?;
    let mut coefficient: f64 = fhat.iter().map(|(s, v)| (chars.get(s) - v).powi(2)).sum();
    coefficient += chars
        .iter()
        .filter(|(s, _)| !fhat.contains(*s))
        .map(|(_, v)| v * v)
        .sum::<f64>();
    if (pointwise - coefficient).abs() > LOSS_AGREEMENT {
        return Err(Error::OracleDisagreement(format!(
            "squared loss pointwise {pointwise} vs coefficient {coefficient}"
        )));
    }
    Ok(SquaredLoss { pointwise, coefficient })
}

/// One line of an oracle report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub quantity: String,
    pub params: String,
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

/// CSV with header `quantity,params,estimate,stderr,bound,pass`.
pub fn write_report<W: Write>(rows: &[ReportRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    if rows.is_empty() {
        out.write_record(["quantity", "params", "estimate", "stderr", "bound", "pass"])?;
    }
    out.flush()?;
    Ok(())
}
