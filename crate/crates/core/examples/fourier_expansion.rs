//! Coefficients of a tree under a biased product distribution, both
//! normalizations, Parseval, and moving a table to new means.

use smoothdt::dist::ProductDist;
use smoothdt::fourier::{expand_tree, to_normalized, to_partially_normalized, translate_basis};
use smoothdt::tree::parse_tree;

fn main() -> smoothdt::Result<()> {
    let tree = parse_tree("(node 1 (node 2 (leaf -1) (leaf +1)) (node 3 (leaf +1) (leaf -1)))", 3)?;
    let dist = ProductDist::new(vec![0.3, -0.2, 0.5], 0.1)?;
    let hat = expand_tree(&tree, &dist)?;
    let bar = to_partially_normalized(&hat)?;
    println!("{:>8} {:>10} {:>10}", "S", "hat", "bar");
    for (s, v) in hat.iter() {
        println!("{:>8} {:>10.5} {:>10.5}", s.to_string(), v, bar.get(s));
    }
    println!("sum of squares: {:.12}", hat.mass());

    let delta = [-0.1, 0.05, 0.2];
    let moved = to_normalized(&translate_basis(&bar, &delta)?)?;
    let direct = expand_tree(&tree, &ProductDist::new(vec![0.2, -0.15, 0.7], 0.1)?)?;
    let gap = direct.iter().map(|(s, v)| (v - moved.get(s)).abs()).fold(0.0, f64::max);
    println!("translated vs direct at mu + delta: max gap {gap:.2e}");
    Ok(())
}
