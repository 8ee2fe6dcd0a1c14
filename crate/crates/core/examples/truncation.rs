//! Truncate a history state after time `r`, grow the partner state from the
//! flipped input and evaluate the variational gap witness.

use histgap::hamiltonian::{compile_feynman_kitaev, CompileOptions};
use histgap::history::{chain_history_state, truncated_states, uniform_amplitudes, ClockLabeling};
use histgap::qcircuit::{sample_seeded_circuit, QuditRegister};
use histgap::spectral::energy;

fn main() -> histgap::Result<()> {
    let reg = QuditRegister::new(3, 2)?;
    let t = 16;
    let circuit = sample_seeded_circuit(reg, t, 11)?;
    let fk = compile_feynman_kitaev(&circuit, &CompileOptions::default())?;
    let hs = chain_history_state(
        &circuit,
        &uniform_amplitudes(t + 1),
        &reg.zero_state(),
        ClockLabeling::Register,
    )?;
    for r in [0, 2, 4, 8] {
        let tr = truncated_states(&circuit, &hs, r, &reg.flipped_state())?;
        let e_psi = energy(&tr.psi.to_vector()?, &fk.hamiltonian)?;
        let e_phi = energy(&tr.phi.to_vector()?, &fk.hamiltonian)?;
        println!(
            "r={r}: alpha={:.4}  <Phi~|Psi>={:.1e}  E(Psi~)={:.5}  E(Phi~)={:.5}",
            tr.alpha,
            tr.phi.inner(&hs)?.norm(),
            e_psi,
            e_phi
        );
    }
    Ok(())
}
