//! Reduce random generalized history instances to standard form and check
//! that the gap does not shrink.

use histgap::hamiltonian::assemble;
use histgap::history::{random_instance, reduce_to_standard};
use histgap::spectral::{ground_and_gap, Method, SolverOptions};

fn main() -> histgap::Result<()> {
    let opts = SolverOptions::default();
    for seed in 0..5 {
        let inst = random_instance(seed)?;
        let red = reduce_to_standard(&inst.state, &inst.hamiltonian)?;
        let a = ground_and_gap(&assemble(&inst.hamiltonian)?, Method::Auto, &opts)?;
        let b = ground_and_gap(&assemble(&red.hamiltonian)?, Method::Auto, &opts)?;
        println!(
            "seed {seed}: k={} k'={} penalty={:.3} gap {:.5} -> {:.5} (holds: {})",
            red.k,
            red.k_prime,
            red.penalty,
            a.gap,
            b.gap,
            a.gap <= b.gap + 1e-10
        );
    }
    Ok(())
}
