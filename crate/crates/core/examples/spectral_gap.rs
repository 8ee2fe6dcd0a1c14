//! Ground energy and gap of an identity-circuit clock Hamiltonian, compared
//! with the closed form `1 - cos(pi / (T + 1))`.

use histgap::hamiltonian::{assemble, compile_feynman_kitaev, CompileOptions};
use histgap::qcircuit::{Circuit, QuditRegister};
use histgap::spectral::{ground_and_gap, Method, SolverOptions};

fn main() -> histgap::Result<()> {
    for t in [4, 8, 16, 32] {
        let circuit = Circuit::identity(QuditRegister::new(2, 2)?, t);
        let fk = compile_feynman_kitaev(&circuit, &CompileOptions::propagation_only())?;
        let a = assemble(&fk.hamiltonian)?;
        let s = ground_and_gap(&a, Method::Auto, &SolverOptions::default())?;
        let closed = 1.0 - (std::f64::consts::PI / (t as f64 + 1.0)).cos();
        println!(
            "T={t:2}  E0={:.2e}  level gap={:.10}  closed form={:.10}  ground multiplicity={}",
            s.e0, s.level_gap, closed, s.ground_multiplicity
        );
    }
    Ok(())
}
