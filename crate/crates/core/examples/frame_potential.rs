//! Monte-Carlo frame potentials of local random circuits against the Haar
//! value.

use histgap::analysis::{frame_potential, DesignEnsembleSpec, EnsembleKind};

fn main() -> histgap::Result<()> {
    for kind in [EnsembleKind::Haar, EnsembleKind::LocalRandomCircuit] {
        let spec = DesignEnsembleSpec {
            kind,
            n: 3,
            d: 2,
            depth: 100,
            samples: 400,
            seed: 42,
        };
        for s in [1, 2] {
            let fp = frame_potential(&spec, s)?;
            println!(
                "{kind:?} s={s}: {:.3} +- {:.3} (Haar {})",
                fp.estimate, fp.stderr, fp.haar_value
            );
        }
    }
    Ok(())
}
