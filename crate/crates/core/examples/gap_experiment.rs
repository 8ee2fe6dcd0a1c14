//! Spectral-gap scaling of compiled random circuits with a power-law fit.

use histgap::analysis::{gap_experiment, GapConfig};

fn main() -> histgap::Result<()> {
    let cfg = GapConfig::new(3, 2, vec![8, 16, 32], 4, 2024);
    let report = gap_experiment(&cfg)?;
    for m in &report.aggregates.medians {
        println!("{m:?}");
    }
    println!(
        "fit exponent {:?}  (r2 {:?})",
        report.aggregates.fit_exponent, report.aggregates.fit_r2
    );
    report.write_csv(std::io::stdout().lock())?;
    Ok(())
}
