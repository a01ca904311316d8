//! Boolean decision trees over `{-1,1}^n`.
//!
//! Variables are 0-based inside the crate and 1-based in text form.
//! Trees are immutable once built; evaluation takes `&self` and is safe to
//! share across threads.

mod text;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fourier::{BooleanFunction, SubsetIndex, MAX_VARS};

pub use text::{parse_tree, serialize_tree};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeNode {
    /// A leaf labelled `+1` or `-1`.
    Leaf(i8),
    /// Reads the 0-based variable `var`; `neg` is followed when `x_var = -1`.
    Internal {
        var: usize,
        neg: Box<TreeNode>,
        pos: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn leaf(value: i8) -> Self {
        TreeNode::Leaf(value)
    }

    pub fn split(var: usize, neg: TreeNode, pos: TreeNode) -> Self {
        TreeNode::Internal {
            var,
            neg: Box::new(neg),
            pos: Box::new(pos),
        }
    }

    fn size(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 1,
            TreeNode::Internal { neg, pos, .. } => neg.size() + pos.size(),
        }
    }

    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Internal { neg, pos, .. } => 1 + neg.depth().max(pos.depth()),
        }
    }

    fn validate(&self, n: usize, path: SubsetIndex) -> Result<()> {
        match self {
            TreeNode::Leaf(v) if *v == 1 || *v == -1 => Ok(()),
            TreeNode::Leaf(v) => Err(Error::InvalidCoordinate(*v as i64)),
            TreeNode::Internal { var, neg, pos } => {
                if *var >= n {
                    return Err(Error::VariableOutOfRange { index: var + 1, n });
                }
                if path.contains(*var) {
                    return Err(Error::RepeatedVariable(var + 1));
                }
                let path = path.with(*var);
                neg.validate(n, path)?;
                pos.validate(n, path)
            }
        }
    }
}

/// A decision tree computing `f: {-1,1}^n -> {-1,1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionTree {
    root: TreeNode,
    n: usize,
}

impl DecisionTree {
    /// Validates the variable range, leaf labels, and that no variable is
    /// read twice on a root-to-leaf path.
    pub fn new(n: usize, root: TreeNode) -> Result<Self> {
        if n == 0 || n > MAX_VARS {
            return Err(Error::UnsupportedDimension(n));
        }
        root.validate(n, SubsetIndex::EMPTY)?;
        Ok(DecisionTree { root, n })
    }

    pub fn constant(n: usize, value: i8) -> Result<Self> {
        Self::new(n, TreeNode::Leaf(value))
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of leaves.
    pub fn size(&self) -> usize {
        self.root.size()
    }

    /// Longest root-to-leaf path in edges; a lone leaf has depth 0.
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Variables read anywhere in the tree.
    pub fn relevant_vars(&self) -> SubsetIndex {
        fn walk(node: &TreeNode, acc: &mut SubsetIndex) {
            if let TreeNode::Internal { var, neg, pos } = node {
                *acc = acc.with(*var);
                walk(neg, acc);
                walk(pos, acc);
            }
        }
        let mut acc = SubsetIndex::EMPTY;
        walk(&self.root, &mut acc);
        acc
    }

    /// Checked evaluation at a point of `{-1,1}^n`.
    pub fn evaluate(&self, x: &[i8]) -> Result<i8> {
        check_point(x, self.n)?;
        Ok(self.eval(x))
    }

    /// Evaluation without input checks; `x` must be a valid point.
    pub fn eval(&self, x: &[i8]) -> i8 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf(v) => return *v,
                TreeNode::Internal { var, neg, pos } => {
                    node = if x[*var] > 0 { pos } else { neg };
                }
            }
        }
    }

    /// Evaluates the multilinear extension at a real point using
    /// `f(x) = (1/2 + x_i/2) f_pos(x) + (1/2 - x_i/2) f_neg(x)` at every node.
    pub fn eval_multilinear(&self, x: &[f64]) -> f64 {
        fn go(node: &TreeNode, x: &[f64]) -> f64 {
            match node {
                TreeNode::Leaf(v) => *v as f64,
                TreeNode::Internal { var, neg, pos } => {
                    let xi = x[*var];
                    (0.5 + xi / 2.0) * go(pos, x) + (0.5 - xi / 2.0) * go(neg, x)
                }
            }
        }
        go(&self.root, x)
    }

    /// View of the tree with every internal node at depth `d` replaced by a
    /// `0` leaf.
    pub fn truncate(&self, d: usize) -> TruncatedTree<'_> {
        TruncatedTree { tree: self, depth: d }
    }
}

impl BooleanFunction for DecisionTree {
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[i8]) -> f64 {
        self.eval(x) as f64
    }
}

/// A tree cut off at a fixed depth; evaluates into `{-1, 0, +1}`.
#[derive(Clone, Copy, Debug)]
pub struct TruncatedTree<'a> {
    tree: &'a DecisionTree,
    depth: usize,
}

impl TruncatedTree<'_> {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn eval(&self, x: &[i8]) -> i8 {
        let mut node = &self.tree.root;
        let mut level = 0;
        loop {
            match node {
                TreeNode::Leaf(v) => return *v,
                TreeNode::Internal { .. } if level >= self.depth => return 0,
                TreeNode::Internal { var, neg, pos } => {
                    node = if x[*var] > 0 { pos } else { neg };
                    level += 1;
                }
            }
        }
    }
}

impl BooleanFunction for TruncatedTree<'_> {
    fn n(&self) -> usize {
        self.tree.n
    }

    fn value(&self, x: &[i8]) -> f64 {
        self.eval(x) as f64
    }
}

pub(crate) fn check_point(x: &[i8], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    match x.iter().find(|&&v| v != 1 && v != -1) {
        Some(&v) => Err(Error::InvalidCoordinate(v as i64)),
        None => Ok(()),
    }
}

/// Full tree computing `prod_{i in vars} x_i`, reading variables in
/// ascending order.
pub fn parity_tree(vars: SubsetIndex, n: usize) -> Result<DecisionTree> {
    if vars.is_empty() {
        return Err(Error::EmptyParity);
    }
    vars.check_within(n)?;
    fn build(order: &[usize], sign: i8) -> TreeNode {
        match order.split_first() {
            None => TreeNode::Leaf(sign),
            Some((&v, rest)) => TreeNode::split(v, build(rest, -sign), build(rest, sign)),
        }
    }
    let order: Vec<usize> = vars.members().collect();
    DecisionTree::new(n, build(&order, 1))
}

/// Random tree with exactly `target_size` leaves.
///
/// Starting from a single leaf, repeatedly picks a uniformly random leaf that
/// still has an unused variable on its path and splits it on a uniformly
/// random such variable. Leaf labels are drawn uniformly from `{-1, +1}`.
pub fn random_tree<R: Rng + ?Sized>(n: usize, target_size: usize, rng: &mut R) -> Result<DecisionTree> {
    if n == 0 || n > MAX_VARS {
        return Err(Error::UnsupportedDimension(n));
    }
    let feasible = target_size >= 1 && (n >= usize::BITS as usize - 1 || target_size <= 1usize << n);
    if !feasible {
        return Err(Error::InfeasibleSize { size: target_size, n });
    }

    enum Slot {
        Leaf,
        Split(usize, usize, usize),
    }
    let mut slots = vec![Slot::Leaf];
    // (slot id, variables used on the path to it)
    let mut open: Vec<(usize, SubsetIndex)> = vec![(0, SubsetIndex::EMPTY)];
    let mut leaves = 1;
    while leaves < target_size {
        let k = rng.gen_range(0..open.len());
        let (slot, used) = open.swap_remove(k);
        let free: Vec<usize> = (0..n).filter(|&i| !used.contains(i)).collect();
        let var = *free.choose(rng).expect("open leaves have a free variable");
        let (neg, pos) = (slots.len(), slots.len() + 1);
        slots.push(Slot::Leaf);
        slots.push(Slot::Leaf);
        slots[slot] = Slot::Split(var, neg, pos);
        let path = used.with(var);
        if path.len() < n {
            open.push((neg, path));
            open.push((pos, path));
        }
        leaves += 1;
    }

    fn assemble<R: Rng + ?Sized>(slots: &[Slot], id: usize, rng: &mut R) -> TreeNode {
        match slots[id] {
            Slot::Leaf => TreeNode::Leaf(if rng.gen::<bool>() { 1 } else { -1 }),
            Slot::Split(var, neg, pos) => {
                let neg = assemble(slots, neg, rng);
                let pos = assemble(slots, pos, rng);
                TreeNode::split(var, neg, pos)
            }
        }
    }
    let root = assemble(&slots, 0, rng);
    DecisionTree::new(n, root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn all_points(n: usize) -> impl Iterator<Item = Vec<i8>> {
        (0u64..1 << n).map(move |idx| (0..n).map(|i| if idx >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    fn x1_tree(n: usize) -> DecisionTree {
        DecisionTree::new(n, TreeNode::split(0, TreeNode::Leaf(-1), TreeNode::Leaf(1))).unwrap()
    }

    #[test]
    fn constant_and_identity() {
        let t = DecisionTree::constant(3, 1).unwrap();
        assert_eq!(t.evaluate(&[-1, 1, -1]).unwrap(), 1);
        assert_eq!((t.size(), t.depth()), (1, 0));
        let t = x1_tree(3);
        assert_eq!(t.evaluate(&[1, -1, -1]).unwrap(), 1);
        assert_eq!(t.evaluate(&[-1, 1, 1]).unwrap(), -1);
    }

    #[test]
    fn evaluate_rejects_bad_points() {
        let t = x1_tree(2);
        assert!(matches!(t.evaluate(&[1]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(t.evaluate(&[1, 0]), Err(Error::InvalidCoordinate(0))));
    }

    #[test]
    fn construction_checks() {
        let bad = TreeNode::split(
            0,
            TreeNode::split(0, TreeNode::Leaf(1), TreeNode::Leaf(-1)),
            TreeNode::Leaf(1),
        );
        assert!(matches!(DecisionTree::new(2, bad), Err(Error::RepeatedVariable(1))));
        let bad = TreeNode::split(2, TreeNode::Leaf(1), TreeNode::Leaf(-1));
        assert!(matches!(
            DecisionTree::new(2, bad),
            Err(Error::VariableOutOfRange { index: 3, n: 2 })
        ));
        assert!(DecisionTree::constant(2, 0).is_err());
        assert!(DecisionTree::constant(0, 1).is_err());
    }

    #[test]
    fn parity_trees_compute_products() {
        let s = SubsetIndex::from_vars(&[1, 2], 2).unwrap();
        let t = parity_tree(s, 2).unwrap();
        assert_eq!(t.evaluate(&[-1, 1]).unwrap(), -1);
        for x in all_points(2) {
            assert_eq!(t.eval(&x), x[0] * x[1]);
        }
        let s = SubsetIndex::from_vars(&[1, 2, 3], 8).unwrap();
        let t = parity_tree(s, 8).unwrap();
        assert_eq!((t.size(), t.depth()), (8, 3));
        for x in all_points(8) {
            assert_eq!(t.eval(&x), x[0] * x[1] * x[2]);
        }
        let t = parity_tree(SubsetIndex::from_vars(&[1], 2).unwrap(), 2).unwrap();
        assert_eq!(t, x1_tree(2));
    }

    #[test]
    fn parity_errors() {
        assert!(matches!(parity_tree(SubsetIndex::EMPTY, 3), Err(Error::EmptyParity)));
        assert!(parity_tree(SubsetIndex::from_bits(0b1000), 3).is_err());
    }

    #[test]
    fn parity_size_and_depth() {
        for k in 1..=5 {
            let t = parity_tree(SubsetIndex::full(k), 6).unwrap();
            assert_eq!(t.size(), 1 << k);
            assert_eq!(t.depth(), k);
        }
    }

    #[test]
    fn chain_tree_size_and_depth() {
        // x1 = -1 short-circuits to a leaf, otherwise read x2.
        let root = TreeNode::split(
            0,
            TreeNode::Leaf(-1),
            TreeNode::split(1, TreeNode::Leaf(1), TreeNode::Leaf(-1)),
        );
        let t = DecisionTree::new(2, root).unwrap();
        assert_eq!((t.size(), t.depth()), (3, 2));
    }

    #[test]
    fn random_tree_sizes() {
        let mut rng = stream(3, "tree", 0);
        let t = random_tree(4, 1, &mut rng).unwrap();
        assert_eq!(t.size(), 1);
        for size in [2, 5, 8, 13] {
            let t = random_tree(8, size, &mut rng).unwrap();
            assert_eq!(t.size(), size);
            t.root().validate(8, SubsetIndex::EMPTY).unwrap();
        }
        let full = random_tree(3, 8, &mut rng).unwrap();
        assert_eq!((full.size(), full.depth()), (8, 3));
    }

    #[test]
    fn random_tree_is_seed_deterministic() {
        let a = random_tree(8, 8, &mut stream(11, "tree", 0)).unwrap();
        let b = random_tree(8, 8, &mut stream(11, "tree", 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_tree_infeasible() {
        let mut rng = stream(0, "tree", 0);
        assert!(matches!(random_tree(3, 9, &mut rng), Err(Error::InfeasibleSize { .. })));
        assert!(matches!(random_tree(3, 0, &mut rng), Err(Error::InfeasibleSize { .. })));
    }

    #[test]
    fn truncation() {
        let mut rng = stream(5, "tree", 0);
        let t = random_tree(6, 9, &mut rng).unwrap();
        let full = t.truncate(t.depth());
        for x in all_points(6) {
            assert_eq!(full.eval(&x), t.eval(&x));
        }
        let p2 = parity_tree(SubsetIndex::full(2), 2).unwrap();
        assert!(all_points(2).all(|x| p2.truncate(0).eval(&x) == 0));
        let p3 = parity_tree(SubsetIndex::full(3), 3).unwrap();
        assert!(all_points(3).all(|x| p3.truncate(2).eval(&x) == 0));
    }

    #[test]
    fn truncation_zero_exactly_past_depth() {
        let root = TreeNode::split(
            0,
            TreeNode::Leaf(-1),
            TreeNode::split(1, TreeNode::Leaf(1), TreeNode::Leaf(-1)),
        );
        let t = DecisionTree::new(2, root).unwrap();
        let g = t.truncate(1);
        assert_eq!(g.eval(&[-1, 1]), -1);
        assert_eq!(g.eval(&[1, 1]), 0);
        assert_eq!(g.eval(&[1, -1]), 0);
    }

    #[test]
    fn multilinear_recursion_matches_on_cube() {
        let mut rng = stream(9, "tree", 0);
        for size in 1..12 {
            let t = random_tree(5, size, &mut rng).unwrap();
            for x in all_points(5) {
                let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
                assert_eq!(t.eval_multilinear(&xf), t.eval(&x) as f64);
            }
        }
    }
}
