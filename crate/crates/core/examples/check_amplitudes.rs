//! Run both amplitude-condition checkers on the standard profiles.

use histgap::history::{
    check_amplitudes_case1, check_amplitudes_case2, profiles, AmplitudeCheckParams,
    AmplitudeProfile,
};

fn main() -> histgap::Result<()> {
    let t = 60;
    let mut params = AmplitudeCheckParams::new(3, 2, 10, 10);
    params.constant_scale = Some(5.0);
    for (name, (poset, amps)) in [
        ("uniform", profiles::uniform(t)),
        ("geometric", profiles::geometric(t, 0.2)),
    ] {
        let profile = AmplitudeProfile {
            poset: &poset,
            amplitudes: &amps,
        };
        let c1 = check_amplitudes_case1(profile, &params)?;
        println!(
            "{name:9} case 1: ratio {:.4} (<= {:.4}: {}), tail mass {:.4} (>= {:.4}: {})",
            c1.ratio,
            c1.ratio_threshold,
            c1.ratio_pass,
            c1.tail_mass,
            c1.tail_threshold,
            c1.tail_pass
        );
    }
    let (poset, amps) = profiles::zero_window(99, 12, 9);
    let mut p2 = AmplitudeCheckParams::new(3, 2, 3, 3);
    p2.theta = 3.0;
    let c2 = check_amplitudes_case2(
        AmplitudeProfile {
            poset: &poset,
            amplitudes: &amps,
        },
        &p2,
    )?;
    println!(
        "zero window case 2: u={} admissible={:?} cut found={:?} pass={}",
        c2.u, c2.admissible, c2.x0_found, c2.pass
    );
    Ok(())
}
