//! Product distributions over `{-1,1}^n`, smoothed perturbations of their
//! means, sampling, and the standardizing map `z`.

use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::BooleanFunction;
use crate::rng::{label, stream};
use crate::tree::check_point;

/// Slack allowed when checking box constraints on means computed in floating point.
const BOUND_SLACK: f64 = 1e-12;

/// Examples per independently seeded block in [`sample_seeded`].
pub const SAMPLE_BLOCK: usize = 4096;

/// A `c`-bounded product distribution `D_mu`: independent bits with
/// `E[x_i] = mu_i` and `mu_i` in `[-1 + c, 1 - c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductDist {
    mu: Vec<f64>,
    sigma: Vec<f64>,
    c: f64,
}

impl ProductDist {
    pub fn new(mu: Vec<f64>, c: f64) -> Result<Self> {
        check_margin(c)?;
        if mu.is_empty() || mu.len() > crate::fourier::MAX_VARS {
            return Err(Error::UnsupportedDimension(mu.len()));
        }
        check_bounded(&mu, c)?;
        let sigma = mu.iter().map(|m| (1.0 - m * m).sqrt()).collect();
        Ok(ProductDist { mu, sigma, c })
    }

    /// The uniform distribution `D_0`.
    pub fn uniform(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![0.0; n], c)
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// `sqrt(1 - mu_i^2)` per coordinate.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `Pr[x_i = +1] = (1 + mu_i) / 2`.
    pub fn prob_plus(&self, i: usize) -> f64 {
        (1.0 + self.mu[i]) / 2.0
    }

    /// The two values `(z_i(-1), z_i(+1))` taken by the standardized coordinate.
    pub fn z_values(&self, i: usize) -> (f64, f64) {
        let (m, s) = (self.mu[i], self.sigma[i]);
        ((-1.0 - m) / s, (1.0 - m) / s)
    }

    pub fn z_coord(&self, i: usize, xi: i8) -> f64 {
        (xi as f64 - self.mu[i]) / self.sigma[i]
    }

    /// `z_S(x) = prod_{i in S} z_i(x)`.
    pub fn z_product(&self, s: crate::fourier::SubsetIndex, x: &[i8]) -> f64 {
        s.members().map(|i| self.z_coord(i, x[i])).product()
    }
}

fn check_margin(c: f64) -> Result<()> {
    if c > 0.0 && c < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidMargin(c))
    }
}

fn check_bounded(mu: &[f64], margin: f64) -> Result<()> {
    for (index, &value) in mu.iter().enumerate() {
        if !(value.abs() <= 1.0 - margin + BOUND_SLACK) {
            return Err(Error::NotBounded { index, value, margin });
        }
    }
    Ok(())
}

/// A smoothed instance: the adversary's `base_mu` plus a uniform `delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    pub base_mu: Vec<f64>,
    pub delta: Vec<f64>,
    dist: ProductDist,
}

impl Perturbation {
    pub fn dist(&self) -> &ProductDist {
        &self.dist
    }

    pub fn into_dist(self) -> ProductDist {
        self.dist
    }
}

/// Draws `delta` uniformly from `[-c, c]^n` and returns `D_{base_mu + delta}`.
/// `base_mu` must be `2c`-bounded, which keeps the result `c`-bounded.
pub fn perturb<R: Rng + ?Sized>(base_mu: &[f64], c: f64, rng: &mut R) -> Result<Perturbation> {
    check_margin(c)?;
    if 2.0 * c >= 1.0 {
        return Err(Error::InvalidMargin(c));
    }
    check_bounded(base_mu, 2.0 * c)?;
    let delta: Vec<f64> = base_mu.iter().map(|_| rng.gen_range(-c..=c)).collect();
    let lim = 1.0 - c;
    let mu = base_mu
        .iter()
        .zip(&delta)
        .map(|(b, d)| (b + d).clamp(-lim, lim))
        .collect();
    Ok(Perturbation {
        base_mu: base_mu.to_vec(),
        delta,
        dist: ProductDist::new(mu, c)?,
    })
}

/// A base mean vector drawn uniformly from the `2c`-bounded box.
pub fn random_base_mu<R: Rng + ?Sized>(n: usize, c: f64, rng: &mut R) -> Vec<f64> {
    let lim = 1.0 - 2.0 * c;
    (0..n).map(|_| rng.gen_range(-lim..=lim)).collect()
}

/// Maps a `{0,1}` bias `p = Pr[b = 1]` to the `{-1,1}` mean `2p - 1`.
pub fn mean_from_bias(p: f64) -> f64 {
    2.0 * p - 1.0
}

/// Maps a `{0,1}` bit to its `{-1,1}` value `2b - 1`.
pub fn sign_from_bit(b: u8) -> i8 {
    2 * b as i8 - 1
}

fn draw_point<R: Rng + ?Sized>(dist: &ProductDist, rng: &mut R) -> Vec<i8> {
    (0..dist.n())
        .map(|i| if rng.gen::<f64>() < dist.prob_plus(i) { 1 } else { -1 })
        .collect()
}

/// `m` independent points from `D_mu`, drawn sequentially from `rng`.
pub fn sample<R: Rng + ?Sized>(dist: &ProductDist, m: usize, rng: &mut R) -> Vec<Vec<i8>> {
    (0..m).map(|_| draw_point(dist, rng)).collect()
}

/// `m` points generated in parallel blocks of [`SAMPLE_BLOCK`], each block
/// with its own stream derived from `seed`. The output depends only on
/// `(dist, m, seed)`, never on the number of worker threads.
pub fn sample_seeded(dist: &ProductDist, m: usize, seed: u64) -> Vec<Vec<i8>> {
    let blocks = m.div_ceil(SAMPLE_BLOCK);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = stream(seed, label::CHUNK, b as u64);
            let len = SAMPLE_BLOCK.min(m - b * SAMPLE_BLOCK);
            sample(dist, len, &mut rng)
        })
        .collect()
}

/// `z_i = (x_i - mu_i) / sqrt(1 - mu_i^2)`.
pub fn z_transform(dist: &ProductDist, x: &[i8]) -> Result<Vec<f64>> {
    check_point(x, dist.n())?;
    Ok(x.iter().enumerate().map(|(i, &xi)| dist.z_coord(i, xi)).collect())
}

/// `prod_i (1 + mu_i x_i) / 2`.
pub fn exact_point_prob(dist: &ProductDist, x: &[i8]) -> Result<f64> {
    check_point(x, dist.n())?;
    Ok(point_prob(dist, x))
}

pub(crate) fn point_prob(dist: &ProductDist, x: &[i8]) -> f64 {
    x.iter()
        .zip(dist.mu())
        .map(|(&xi, &m)| (1.0 + m * xi as f64) / 2.0)
        .product()
}

/// Per-coordinate sample means, clamped into `[-1 + c, 1 - c]`.
pub fn estimate_means(points: &[Vec<i8>], c: f64) -> Result<Vec<f64>> {
    check_margin(c)?;
    let first = points.first().ok_or(Error::EmptyDataset)?;
    let n = first.len();
    let mut sums = vec![0i64; n];
    for x in points {
        check_point(x, n)?;
        for (s, &v) in sums.iter_mut().zip(x) {
            *s += v as i64;
        }
    }
    let m = points.len() as f64;
    let lim = 1.0 - c;
    Ok(sums.into_iter().map(|s| (s as f64 / m).clamp(-lim, lim)).collect())
}

/// Labelled examples together with the mean vector handed to the learner.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n: usize,
    xs: Vec<Vec<i8>>,
    ys: Vec<i8>,
    mu_used: Vec<f64>,
}

impl Dataset {
    pub fn new(xs: Vec<Vec<i8>>, ys: Vec<i8>, mu_used: Vec<f64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch {
                expected: xs.len(),
                got: ys.len(),
            });
        }
        let n = mu_used.len();
        for x in &xs {
            check_point(x, n)?;
        }
        if let Some(&y) = ys.iter().find(|&&y| y != 1 && y != -1) {
            return Err(Error::InvalidCoordinate(y as i64));
        }
        Ok(Dataset { n, xs, ys, mu_used })
    }

    /// Labels `xs` with the target `f`.
    pub fn label<F: BooleanFunction + ?Sized>(f: &F, xs: Vec<Vec<i8>>, mu_used: Vec<f64>) -> Result<Self> {
        let ys = xs.par_iter().map(|x| if f.value(x) < 0.0 { -1 } else { 1 }).collect();
        Self::new(xs, ys, mu_used)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[Vec<i8>] {
        &self.xs
    }

    pub fn ys(&self) -> &[i8] {
        &self.ys
    }

    pub fn mu_used(&self) -> &[f64] {
        &self.mu_used
    }

    /// Same examples, different mean vector.
    pub fn with_mu(mut self, mu_used: Vec<f64>) -> Result<Self> {
        if mu_used.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: mu_used.len(),
            });
        }
        self.mu_used = mu_used;
        Ok(self)
    }

    /// CSV with header `x1,...,xn,y`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.n).map(|i| format!("x{i}")).collect();
        header.push("y".into());
        out.write_record(&header)?;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            let row = x.iter().chain(std::iter::once(y)).map(|v| v.to_string());
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the CSV written by [`Dataset::write_csv`]. `mu_used` must match
    /// the column count.
    pub fn read_csv<R: std::io::Read>(r: R, mu_used: Vec<f64>) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        let n = header
            .len()
            .checked_sub(1)
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Format("dataset needs at least one x column and y".into()))?;
        for (i, h) in header.iter().take(n).enumerate() {
            if h.trim() != format!("x{}", i + 1) {
                return Err(Error::Format(format!("unexpected header column {h:?}")));
            }
        }
        if header[n].trim() != "y" {
            return Err(Error::Format("last header column must be y".into()));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let vals: Vec<i8> = rec
                .iter()
                .map(|f| {
                    f.trim()
                        .parse::<i8>()
                        .map_err(|_| Error::Format(format!("bad entry {f:?}")))
                })
                .collect::<Result<_>>()?;
            ys.push(vals[n]);
            xs.push(vals[..n].to_vec());
        }
        if mu_used.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: mu_used.len(),
            });
        }
        Self::new(xs, ys, mu_used)
    }
}

/// Mean-vector file: one real per line; blank lines and `#` comments skipped.
pub fn read_means<R: BufRead>(r: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(t.parse().map_err(|_| Error::Format(format!("bad mean {t:?}")))?);
    }
    Ok(out)
}

pub fn write_means<W: Write>(mut w: W, mu: &[f64]) -> Result<()> {
    for m in mu {
        writeln!(w, "{m}")?;
    }
    Ok(())
}
