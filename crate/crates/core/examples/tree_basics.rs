//! Build, print, parse and evaluate decision trees.

use smoothdt::rng::stream;
use smoothdt::tree::{parity_tree, parse_tree, random_tree, serialize_tree};
use smoothdt::{DecisionTree, SubsetIndex};

fn main() -> smoothdt::Result<()> {
    let t = parse_tree("(node 1 (leaf -1) (node 3 (leaf +1) (leaf -1)))", 4)?;
    println!("{}  size {} depth {}", serialize_tree(&t), t.size(), t.depth());
    for x in [[-1, 1, 1, 1], [1, 1, -1, 1], [1, 1, 1, 1]] {
        println!("  f({x:?}) = {}", t.evaluate(&x)?);
    }

    let p = parity_tree(SubsetIndex::from_vars(&[1, 2, 3], 4)?, 4)?;
    println!("parity of x1 x2 x3: size {}", p.size());
    let cut = p.truncate(2);
    println!("  truncated at depth 2 on (1,1,1,1): {}", cut.eval(&[1, 1, 1, 1]));

    let r: DecisionTree = random_tree(10, 8, &mut stream(7, "tree", 0))?;
    println!("random size-8 tree on 10 variables:\n  {}", serialize_tree(&r));
    println!("  relevant variables: {}", r.relevant_vars());
    Ok(())
}
