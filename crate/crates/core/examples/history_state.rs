//! Build a history state, embed it in the compiled Hamiltonian's space and
//! confirm it is a zero-energy ground state of the propagation terms.

use histgap::hamiltonian::{compile_feynman_kitaev, CompileOptions};
use histgap::history::{chain_history_state, uniform_amplitudes, ClockLabeling};
use histgap::qcircuit::{sample_seeded_circuit, QuditRegister};
use histgap::spectral::energy;

fn main() -> histgap::Result<()> {
    let reg = QuditRegister::new(3, 2)?;
    let circuit = sample_seeded_circuit(reg, 10, 3)?;
    let hs = chain_history_state(
        &circuit,
        &uniform_amplitudes(11),
        &reg.zero_state(),
        ClockLabeling::Register,
    )?;
    let fk = compile_feynman_kitaev(&circuit, &CompileOptions::default())?;
    let v = hs.to_vector()?;
    println!("dimension {}", v.len());
    println!("<Psi|H|Psi> = {:.3e}", energy(&v, &fk.hamiltonian)?);
    println!("history JSON: {} bytes", hs.to_json()?.len());
    Ok(())
}
