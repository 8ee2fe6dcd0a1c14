//! Split a history state at a cut point and verify the energy identity.

use histgap::hamiltonian::{compile_feynman_kitaev, CompileOptions};
use histgap::history::{chain_history_state, uniform_amplitudes, xi_split, ClockLabeling};
use histgap::qcircuit::{sample_seeded_circuit, QuditRegister};
use histgap::spectral::energy;

fn main() -> histgap::Result<()> {
    let reg = QuditRegister::new(3, 2)?;
    let t = 15;
    let circuit = sample_seeded_circuit(reg, t, 5)?;
    let fk = compile_feynman_kitaev(&circuit, &CompileOptions::default())?;
    let hs = chain_history_state(
        &circuit,
        &uniform_amplitudes(t + 1),
        &reg.zero_state(),
        ClockLabeling::Register,
    )?;
    let e = energy(&hs.to_vector()?, &fk.hamiltonian)?;
    let split = xi_split(&hs, 8, 1)?;
    let parts = split.energies(&fk.hamiltonian)?;
    println!("lambda = {}", split.lambda);
    println!(
        "D0 = {:.6}, D1 = {:.6}, cross = {:.6}",
        parts.d0, parts.d1, parts.cross
    );
    println!("<Psi|H|Psi> = {e:.3e}, identity = {:.3e}", parts.identity);
    println!(
        "alternative cross coefficient gives {:.3e}",
        parts.alternative
    );
    Ok(())
}
