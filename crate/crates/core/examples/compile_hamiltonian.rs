//! Compile a circuit into a Feynman-Kitaev Hamiltonian with both clock
//! encodings and report the per-qudit normalization.

use histgap::hamiltonian::{
    compile_feynman_kitaev, gamma_norm, ClockKind, CompileOptions, Rescale,
};
use histgap::qcircuit::{sample_seeded_circuit, QuditRegister};

fn main() -> histgap::Result<()> {
    let circuit = sample_seeded_circuit(QuditRegister::new(3, 2)?, 8, 1)?;
    for clock in [ClockKind::Register, ClockKind::Unary] {
        let opts = CompileOptions {
            clock,
            rescale: Rescale::ByT,
            ..CompileOptions::default()
        };
        let fk = compile_feynman_kitaev(&circuit, &opts)?;
        let norm = gamma_norm(&fk.hamiltonian)?;
        println!(
            "{clock:?}: {} terms, locality {}, dim {}, gamma {:.4}",
            fk.hamiltonian.m(),
            fk.hamiltonian.locality(),
            fk.total_dim(),
            norm.gamma
        );
    }
    Ok(())
}
