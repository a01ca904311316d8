//! Fourier analysis of Boolean functions under product distributions.
//!
//! Exact routines enumerate the whole cube and refuse above
//! [`ENUMERATION_CAP`] variables. Sample estimates use a fixed summation
//! order so they are bit-identical across runs and thread counts.

mod poly;
mod subset;

use std::collections::HashMap;

use crate::dist::{point_prob, Dataset, ProductDist};
use crate::error::{Error, Result};
use crate::tree::{DecisionTree, TreeNode};

pub use poly::{
    eval_poly, read_coeffs, to_normalized, to_partially_normalized, translate_basis, write_coeffs, Basis, SparsePoly,
    ZERO_TOL,
};
pub use subset::{Members, SubsetIndex, Subsets, MAX_VARS};

/// Largest `n` for which full enumeration is attempted (2^20 points).
pub const ENUMERATION_CAP: usize = 20;

/// A real-valued function on `{-1,1}^n`.
pub trait BooleanFunction: Sync {
    fn n(&self) -> usize;
    fn value(&self, x: &[i8]) -> f64;
}

impl<F: BooleanFunction + ?Sized> BooleanFunction for &F {
    fn n(&self) -> usize {
        (**self).n()
    }

    fn value(&self, x: &[i8]) -> f64 {
        (**self).value(x)
    }
}

/// Wraps a closure as a [`BooleanFunction`].
pub struct FnFunction<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[i8]) -> f64 + Sync> FnFunction<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnFunction { n, f }
    }
}

impl<F: Fn(&[i8]) -> f64 + Sync> BooleanFunction for FnFunction<F> {
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[i8]) -> f64 {
        (self.f)(x)
    }
}

pub(crate) fn check_cap(n: usize) -> Result<()> {
    if n > ENUMERATION_CAP {
        Err(Error::EnumerationCap {
            n,
            cap: ENUMERATION_CAP,
        })
    } else {
        Ok(())
    }
}

/// Writes the point with index `idx` into `x`: bit `i` set means `x_i = +1`.
pub fn point_from_index(idx: u64, x: &mut [i8]) {
    for (i, v) in x.iter_mut().enumerate() {
        *v = if idx >> i & 1 == 1 { 1 } else { -1 };
    }
}

/// Calls `visit(x, Pr[x])` for every point of the cube.
pub fn for_each_point<F: FnMut(&[i8], f64)>(dist: &ProductDist, mut visit: F) -> Result<()> {
    let n = dist.n();
    check_cap(n)?;
    let mut x = vec![0i8; n];
    for idx in 0..1u64 << n {
        point_from_index(idx, &mut x);
        visit(&x, point_prob(dist, &x));
    }
    Ok(())
}

/// Values of `f` on every point, indexed as in [`point_from_index`].
pub fn truth_table<F: BooleanFunction + ?Sized>(f: &F) -> Result<Vec<f64>> {
    let n = f.n();
    check_cap(n)?;
    let mut x = vec![0i8; n];
    Ok((0..1u64 << n)
        .map(|idx| {
            point_from_index(idx, &mut x);
            f.value(&x)
        })
        .collect())
}

fn check_dims<F: BooleanFunction + ?Sized>(f: &F, dist: &ProductDist) -> Result<()> {
    if f.n() != dist.n() {
        return Err(Error::DimensionMismatch {
            expected: dist.n(),
            got: f.n(),
        });
    }
    Ok(())
}

/// `f^(S, mu) = E_{x ~ D_mu}[f(x) z_S(x, mu)]` by direct enumeration.
pub fn exact_coeff<F: BooleanFunction + ?Sized>(f: &F, dist: &ProductDist, s: SubsetIndex) -> Result<f64> {
    check_dims(f, dist)?;
    s.check_within(dist.n())?;
    let mut acc = 0.0;
    for_each_point(dist, |x, p| acc += p * f.value(x) * dist.z_product(s, x))?;
    Ok(acc)
}

/// In-place change of basis from point values to `f^(S, mu)`, one coordinate
/// at a time. Afterwards entry `idx` holds the coefficient of the subset with
/// mask `idx`.
pub(crate) fn characters_from_table(table: &mut [f64], dist: &ProductDist) {
    let n = dist.n();
    debug_assert_eq!(table.len(), 1 << n);
    for i in 0..n {
        let (pp, pm) = (dist.prob_plus(i), 1.0 - dist.prob_plus(i));
        let (zm, zp) = dist.z_values(i);
        let bit = 1usize << i;
        for lo in (0..table.len()).filter(|j| j & bit == 0) {
            let (a, b) = (table[lo], table[lo | bit]);
            table[lo] = pm * a + pp * b;
            table[lo | bit] = pm * zm * a + pp * zp * b;
        }
    }
}

/// Every coefficient `f^(S, mu)` as a complete character-basis table.
pub fn expand_exact<F: BooleanFunction + ?Sized>(f: &F, dist: &ProductDist) -> Result<SparsePoly> {
    check_dims(f, dist)?;
    let mut table = truth_table(f)?;
    characters_from_table(&mut table, dist);
    Ok(dense_to_poly(&table, dist)?.complete())
}

/// Dense coefficient vector (index = subset mask) for `f` under `dist`.
pub fn exact_coeff_table<F: BooleanFunction + ?Sized>(f: &F, dist: &ProductDist) -> Result<Vec<f64>> {
    check_dims(f, dist)?;
    let mut table = truth_table(f)?;
    characters_from_table(&mut table, dist);
    Ok(table)
}

fn dense_to_poly(table: &[f64], dist: &ProductDist) -> Result<SparsePoly> {
    let terms = table
        .iter()
        .enumerate()
        .map(|(idx, &v)| (SubsetIndex::from_bits(idx as u64), v));
    SparsePoly::new(dist.n(), Basis::Character { mu: dist.mu().to_vec() }, terms)
}

/// Expansion of a decision tree read off its structure, without enumerating
/// the cube. Works for any `n`; the number of terms is at most `4^depth`.
///
/// At a node on `x_i`, substituting `x_i = mu_i + sigma_i z_i` into
/// `(1 + x_i)/2 f_pos + (1 - x_i)/2 f_neg` gives
/// `(1 + mu_i)/2 f_pos + (1 - mu_i)/2 f_neg + z_i sigma_i/2 (f_pos - f_neg)`.
pub fn expand_tree(tree: &DecisionTree, dist: &ProductDist) -> Result<SparsePoly> {
    if tree.n() != dist.n() {
        return Err(Error::DimensionMismatch {
            expected: dist.n(),
            got: tree.n(),
        });
    }
    fn go(node: &TreeNode, dist: &ProductDist) -> HashMap<SubsetIndex, f64> {
        match node {
            TreeNode::Leaf(v) => HashMap::from([(SubsetIndex::EMPTY, *v as f64)]),
            TreeNode::Internal { var, neg, pos } => {
                let (fp, fn_) = (go(pos, dist), go(neg, dist));
                let i = *var;
                let (a, b) = (dist.prob_plus(i), 1.0 - dist.prob_plus(i));
                let h = dist.sigma()[i] / 2.0;
                let mut out = HashMap::with_capacity(2 * (fp.len() + fn_.len()));
                for (&s, &v) in &fp {
                    *out.entry(s).or_insert(0.0) += a * v;
                    *out.entry(s.with(i)).or_insert(0.0) += h * v;
                }
                for (&s, &v) in &fn_ {
                    *out.entry(s).or_insert(0.0) += b * v;
                    *out.entry(s.with(i)).or_insert(0.0) -= h * v;
                }
                out
            }
        }
    }
    let mut terms: Vec<_> = go(tree.root(), dist).into_iter().collect();
    terms.sort_by_key(|t| t.0);
    Ok(SparsePoly::new(dist.n(), Basis::Character { mu: dist.mu().to_vec() }, terms)?.complete())
}

/// Classical uniform-distribution coefficient `2^{-n} sum_x f(x) x_S`.
pub fn uniform_coeff<F: BooleanFunction + ?Sized>(f: &F, s: SubsetIndex) -> Result<f64> {
    let n = f.n();
    check_cap(n)?;
    s.check_within(n)?;
    let mut x = vec![0i8; n];
    let mut acc = 0.0;
    for idx in 0..1u64 << n {
        point_from_index(idx, &mut x);
        let chi: i8 = s.members().map(|i| x[i]).product();
        acc += f.value(&x) * chi as f64;
    }
    Ok(acc / (1u64 << n) as f64)
}

/// Sum of `term(0..len)` in a fixed order: serial within blocks of 256,
/// then a pairwise reduction across blocks.
pub(crate) fn ordered_sum<F: Fn(usize) -> f64>(len: usize, term: F) -> f64 {
    const BLOCK: usize = 256;
    let mut partial: Vec<f64> = (0..len.div_ceil(BLOCK))
        .map(|b| (b * BLOCK..((b + 1) * BLOCK).min(len)).map(&term).sum())
        .collect();
    while partial.len() > 1 {
        partial = partial.chunks(2).map(|c| c.iter().sum()).collect();
    }
    partial.first().copied().unwrap_or(0.0)
}

/// A sample estimate `e(S) = (1/m) sum_j y_j z_S(x_j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoeffEstimate {
    pub subset: SubsetIndex,
    pub value: f64,
    pub m: usize,
}

/// Estimates `f^(S, mu)` from labelled data, with `z` taken at the dataset's
/// `mu_used`.
pub fn estimate_coeff(dataset: &Dataset, s: SubsetIndex) -> Result<CoeffEstimate> {
    let n = dataset.n();
    s.check_within(n)?;
    let mu = dataset.mu_used();
    let members: Vec<(usize, f64, f64)> = s
        .members()
        .map(|i| {
            let sd = (1.0 - mu[i] * mu[i]).sqrt();
            (i, (-1.0 - mu[i]) / sd, (1.0 - mu[i]) / sd)
        })
        .collect();
    let (xs, ys) = (dataset.xs(), dataset.ys());
    let m = dataset.len();
    let total = ordered_sum(m, |j| {
        let x = &xs[j];
        let z: f64 = members
            .iter()
            .map(|&(i, zm, zp)| if x[i] > 0 { zp } else { zm })
            .product();
        ys[j] as f64 * z
    });
    Ok(CoeffEstimate {
        subset: s,
        value: total / m as f64,
        m,
    })
}

/// `E_{x ~ D_mu}[g(x)]` by enumeration. Blocks of points are processed in
/// parallel and their partial sums combined in index order, so the result
/// does not depend on the thread count.
pub fn expectation<G>(dist: &ProductDist, g: G) -> Result<f64>
where
    G: Fn(&[i8]) -> f64 + Sync,
{
    use rayon::prelude::*;
    const BLOCK: u64 = 4096;
    let n = dist.n();
    check_cap(n)?;
    let total = 1u64 << n;
    let partial: Vec<f64> = (0..total.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut x = vec![0i8; n];
            let mut acc = 0.0;
            for idx in b * BLOCK..((b + 1) * BLOCK).min(total) {
                point_from_index(idx, &mut x);
                acc += point_prob(dist, &x) * g(&x);
            }
            acc
        })
        .collect();
    Ok(partial.iter().sum())
}
