//! How often a product of uniform [-1, 1] variables lands near zero.

use smoothdt::harness::sz_unscaled_sum;
use smoothdt::oracle::{sz_bound, sz_exact, sz_probability};

fn main() -> smoothdt::Result<()> {
    println!(
        "{:>2} {:>7} {:>10} {:>10} {:>10} {:>10}",
        "d", "eps", "sampled", "exact", "no 1/i!", "bound"
    );
    for d in 1..=5 {
        for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
            let mc = sz_probability(d, eps, 1_000_000, d as u64)?;
            println!(
                "{d:>2} {eps:>7} {:>10.6} {:>10.6} {:>10.6} {:>10.4}",
                mc.estimate,
                sz_exact(d, eps),
                sz_unscaled_sum(d, eps),
                sz_bound(d, eps)
            );
        }
    }
    Ok(())
}
