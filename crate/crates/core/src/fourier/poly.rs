use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use crate::dist::ProductDist;
use crate::error::{Error, Result};
use crate::tree::check_point;

use super::SubsetIndex;

/// Coefficients with smaller magnitude are not stored.
pub const ZERO_TOL: f64 = 1e-15;

/// The basis a [`SparsePoly`] is written in.
#[derive(Clone, Debug, PartialEq)]
pub enum Basis {
    /// Plain monomials `x_S`.
    Monomial,
    /// Standardized characters `z_S(x, mu)`; coefficients are `f^(S, mu)`.
    Character { mu: Vec<f64> },
    /// Centered monomials `prod_{i in S} (x_i - mu_i)`; coefficients are the
    /// partially normalized `f-(S, mu)`.
    Centered { mu: Vec<f64> },
}

impl Basis {
    pub fn mu(&self) -> Option<&[f64]> {
        match self {
            Basis::Monomial => None,
            Basis::Character { mu } | Basis::Centered { mu } => Some(mu),
        }
    }
}

/// A multilinear polynomial stored as a map from subsets to coefficients.
///
/// `complete` marks tables produced by a full expansion: a missing subset is
/// then a true zero rather than an unestimated one.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePoly {
    n: usize,
    basis: Basis,
    coeffs: BTreeMap<SubsetIndex, f64>,
    complete: bool,
}

impl SparsePoly {
    pub fn new<I>(n: usize, basis: Basis, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (SubsetIndex, f64)>,
    {
        if let Some(mu) = basis.mu() {
            if mu.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: mu.len(),
                });
            }
        }
        let mut coeffs = BTreeMap::new();
        for (s, v) in terms {
            s.check_within(n)?;
            if v.abs() >= ZERO_TOL {
                coeffs.insert(s, v);
            }
        }
        Ok(SparsePoly {
            n,
            basis,
            coeffs,
            complete: false,
        })
    }

    pub(crate) fn complete(mut self) -> Self {
        self.complete = true;
        self
    }

    pub fn zero(n: usize, basis: Basis) -> Self {
        SparsePoly {
            n,
            basis,
            coeffs: BTreeMap::new(),
            complete: false,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Coefficient of `s`, zero when absent.
    pub fn get(&self, s: SubsetIndex) -> f64 {
        self.coeffs.get(&s).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, s: SubsetIndex) -> bool {
        self.coeffs.contains_key(&s)
    }

    /// Terms in graded order (by size, then mask).
    pub fn iter(&self) -> impl Iterator<Item = (SubsetIndex, f64)> + '_ {
        self.coeffs.iter().map(|(s, v)| (*s, *v))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `|S|` with a nonzero coefficient; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|s| s.len()).max().unwrap_or(0)
    }

    /// Sum of squared coefficients.
    pub fn mass(&self) -> f64 {
        self.coeffs.values().map(|v| v * v).sum()
    }

    /// Evaluates at `x` in the polynomial's own basis.
    pub fn value_at(&self, x: &[i8]) -> f64 {
        let coords: Vec<f64> = match &self.basis {
            Basis::Monomial => x.iter().map(|&v| v as f64).collect(),
            Basis::Centered { mu } => x.iter().zip(mu).map(|(&v, m)| v as f64 - m).collect(),
            Basis::Character { mu } => x
                .iter()
                .zip(mu)
                .map(|(&v, m)| (v as f64 - m) / (1.0 - m * m).sqrt())
                .collect(),
        };
        self.value_at_coords(&coords)
    }

    /// `sum_S c_S prod_{i in S} coords[i]`.
    pub(crate) fn value_at_coords(&self, coords: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .map(|(s, v)| v * s.members().map(|i| coords[i]).product::<f64>())
            .sum()
    }
}

/// Evaluates `poly` at `x` under `dist`. Character and centered polynomials
/// must have been built against `dist`'s mean vector.
pub fn eval_poly(poly: &SparsePoly, dist: &ProductDist, x: &[i8]) -> Result<f64> {
    check_point(x, dist.n())?;
    if poly.n() != dist.n() {
        return Err(Error::DimensionMismatch {
            expected: dist.n(),
            got: poly.n(),
        });
    }
    if let Some(mu) = poly.basis().mu() {
        if mu != dist.mu() {
            return Err(Error::BasisMismatch);
        }
    }
    Ok(poly.value_at(x))
}

fn sigma_product(mu: &[f64], s: SubsetIndex) -> f64 {
    s.members().map(|i| (1.0 - mu[i] * mu[i]).sqrt()).product()
}

/// `f-(S, mu) = f^(S, mu) / prod_{i in S} sqrt(1 - mu_i^2)`.
pub fn to_partially_normalized(poly: &SparsePoly) -> Result<SparsePoly> {
    let Basis::Character { mu } = poly.basis() else {
        return Err(Error::BasisMismatch);
    };
    let terms: Vec<_> = poly.iter().map(|(s, v)| (s, v / sigma_product(mu, s))).collect();
    let out = SparsePoly::new(poly.n, Basis::Centered { mu: mu.clone() }, terms)?;
    Ok(if poly.complete { out.complete() } else { out })
}

/// Inverse of [`to_partially_normalized`].
pub fn to_normalized(poly: &SparsePoly) -> Result<SparsePoly> {
    let Basis::Centered { mu } = poly.basis() else {
        return Err(Error::BasisMismatch);
    };
    let terms: Vec<_> = poly.iter().map(|(s, v)| (s, v * sigma_product(mu, s))).collect();
    let out = SparsePoly::new(poly.n, Basis::Character { mu: mu.clone() }, terms)?;
    Ok(if poly.complete { out.complete() } else { out })
}

/// Moves a complete centered table from `mu` to `mu + delta`:
/// `f-(S, mu + delta) = sum_{T ⊇ S} f-(T, mu) delta_{T \ S}`.
pub fn translate_basis(poly: &SparsePoly, delta: &[f64]) -> Result<SparsePoly> {
    let Basis::Centered { mu } = poly.basis() else {
        return Err(Error::BasisMismatch);
    };
    if !poly.is_complete() {
        return Err(Error::IncompleteTable);
    }
    if delta.len() != poly.n() {
        return Err(Error::DimensionMismatch {
            expected: poly.n(),
            got: delta.len(),
        });
    }
    let mut acc: HashMap<SubsetIndex, f64> = HashMap::new();
    for (t, v) in poly.iter() {
        for s in t.subsets() {
            let w: f64 = t.difference(s).members().map(|i| delta[i]).product();
            *acc.entry(s).or_insert(0.0) += v * w;
        }
    }
    let shifted: Vec<f64> = mu.iter().zip(delta).map(|(m, d)| m + d).collect();
    let mut terms: Vec<_> = acc.into_iter().collect();
    terms.sort_by_key(|t| t.0);
    Ok(SparsePoly::new(poly.n(), Basis::Centered { mu: shifted }, terms)?.complete())
}

/// Coefficient table as CSV with columns `subset,value`.
pub fn write_coeffs<W: Write>(poly: &SparsePoly, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["subset", "value"])?;
    for (s, v) in poly.iter() {
        out.write_record([s.to_string(), v.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a `subset,value` table into a polynomial over `n` variables.
pub fn read_coeffs<R: Read>(r: R, n: usize, basis: Basis) -> Result<SparsePoly> {
    let mut rd = csv::Reader::from_reader(r);
    {
        let h = rd.headers()?;
        if h.len() != 2 || &h[0] != "subset" || &h[1] != "value" {
            return Err(Error::Format(format!("expected header subset,value, got {h:?}")));
        }
    }
    let mut terms = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let s: SubsetIndex = rec[0].parse()?;
        let v: f64 = rec[1]
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad value {:?}", &rec[1])))?;
        terms.push((s, v));
    }
    SparsePoly::new(n, basis, terms)
}
