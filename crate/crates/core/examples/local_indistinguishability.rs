//! Decay of the k-local distinguishability of `|0..0>` and `|0..01>` under
//! a random circuit, next to the Haar cross-overlap reference.

use histgap::analysis::{fh_experiment, haar_overlap_experiment, FhConfig, HaarOverlapConfig};

fn main() -> histgap::Result<()> {
    let cfg = FhConfig::new(4, 2, 1, vec![0, 10, 20, 40, 80], 5, 1);
    let fh = fh_experiment(&cfg)?;
    for m in &fh.aggregates.medians {
        println!("{m:?}");
    }
    let haar = haar_overlap_experiment(&HaarOverlapConfig {
        n: 4,
        d: 2,
        k: 1,
        samples: 20,
        seed: 1,
        grid: 32,
    })?;
    println!(
        "Haar cross overlap median {:.4}, reference d^(-n/2) = {:.4}",
        haar.aggregates.median, haar.aggregates.reference
    );
    Ok(())
}
