use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported variable count; subsets are 64-bit masks.
pub const MAX_VARS: usize = 64;

/// A subset `S` of the variables `{1, ..., n}`, stored as a bitmask.
///
/// Bit `k` set means variable `k + 1` belongs to `S`. Public constructors
/// taking variable numbers use the 1-based convention; [`SubsetIndex::with`]
/// and [`SubsetIndex::members`] work with 0-based positions.
///
/// Subsets order by cardinality first, then by mask, so sorted coefficient
/// tables list low degrees first.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct SubsetIndex(u64);

impl SubsetIndex {
    pub const EMPTY: SubsetIndex = SubsetIndex(0);

    pub const fn from_bits(bits: u64) -> Self {
        SubsetIndex(bits)
    }

    /// Builds a subset from 1-based variable numbers, each checked against `n`.
    pub fn from_vars(vars: &[usize], n: usize) -> Result<Self> {
        let mut bits = 0u64;
        for &v in vars {
            if v == 0 || v > n || v > MAX_VARS {
                return Err(Error::VariableOutOfRange { index: v, n });
            }
            bits |= 1 << (v - 1);
        }
        Ok(SubsetIndex(bits))
    }

    /// The subset `{1, ..., n}`.
    pub fn full(n: usize) -> Self {
        match n {
            0 => Self::EMPTY,
            n if n >= 64 => SubsetIndex(u64::MAX),
            n => SubsetIndex((1u64 << n) - 1),
        }
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Whether the 0-based position `i` is a member.
    pub const fn contains(self, i: usize) -> bool {
        (self.0 >> i) & 1 == 1
    }

    /// `self ∪ {i}` for a 0-based position.
    pub const fn with(self, i: usize) -> Self {
        SubsetIndex(self.0 | (1 << i))
    }

    pub const fn union(self, other: Self) -> Self {
        SubsetIndex(self.0 | other.0)
    }

    pub const fn difference(self, other: Self) -> Self {
        SubsetIndex(self.0 & !other.0)
    }

    pub const fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub const fn is_superset_of(self, other: Self) -> bool {
        other.is_subset_of(self)
    }

    /// Largest 1-based variable number in the set, 0 when empty.
    pub const fn max_var(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    /// Checks that every member lies in `{1, ..., n}`.
    pub fn check_within(self, n: usize) -> Result<()> {
        match self.max_var() {
            v if v > n => Err(Error::VariableOutOfRange { index: v, n }),
            _ => Ok(()),
        }
    }

    /// 0-based member positions in ascending order.
    pub fn members(self) -> Members {
        Members(self.0)
    }

    /// 1-based variable numbers in ascending order.
    pub fn vars(self) -> Vec<usize> {
        self.members().map(|i| i + 1).collect()
    }

    /// Every subset of `self`, the empty set first and `self` last.
    pub fn subsets(self) -> Subsets {
        Subsets {
            mask: self.0,
            next: Some(0),
        }
    }
}

impl Ord for SubsetIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then(self.0.cmp(&other.0))
    }
}

impl PartialOrd for SubsetIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

/// Submask enumeration in increasing numeric order.
pub struct Subsets {
    mask: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = SubsetIndex;

    fn next(&mut self) -> Option<SubsetIndex> {
        let cur = self.next?;
        self.next = if cur == self.mask {
            None
        } else {
            Some((cur.wrapping_sub(self.mask)) & self.mask)
        };
        Some(SubsetIndex(cur))
    }
}

/// `"empty"` or semicolon-separated 1-based indices, e.g. `1;3;4`.
impl fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("empty");
        }
        let mut first = true;
        for i in self.members() {
            if !first {
                f.write_str(";")?;
            }
            write!(f, "{}", i + 1)?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for SubsetIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "empty" {
            return Ok(Self::EMPTY);
        }
        let mut bits = 0u64;
        for part in s.split(';') {
            let v: usize = part
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad subset member {part:?} in {s:?}")))?;
            if v == 0 || v > MAX_VARS {
                return Err(Error::VariableOutOfRange { index: v, n: MAX_VARS });
            }
            bits |= 1 << (v - 1);
        }
        Ok(SubsetIndex(bits))
    }
}
