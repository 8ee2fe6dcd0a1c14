//! Sample a seeded local random circuit, evolve two orthogonal inputs and
//! check norm preservation and orthogonality along the trajectory.

use histgap::linalg;
use histgap::qcircuit::{evolve, sample_seeded_circuit, QuditRegister};

fn main() -> histgap::Result<()> {
    let reg = QuditRegister::new(4, 2)?;
    let circuit = sample_seeded_circuit(reg, 12, 7)?;
    let a = evolve(&circuit, &reg.zero_state())?;
    let b = evolve(&circuit, &reg.flipped_state())?;
    for (t, (x, y)) in a.iter().zip(&b).enumerate() {
        println!(
            "t={t:2}  |psi|={:.15}  |<psi|phi>|={:.2e}",
            linalg::norm(x),
            linalg::inner(x, y).norm()
        );
    }
    println!("circuit JSON: {} bytes", circuit.to_json()?.len());
    Ok(())
}
