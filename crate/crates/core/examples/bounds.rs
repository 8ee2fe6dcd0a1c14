//! Closed-form evaluators: design lengths, net sizes, design orders and the
//! two lemma failure bounds with the plug-in deviation.

use histgap::analysis::{
    bhh_design_length, design_order, lemma_failure_bounds, net_sizes, BoundParams,
    DesignOrderVariant,
};

fn main() -> histgap::Result<()> {
    println!(
        "design length (n=1, d=2, s=1, eps=1/2): {}",
        bhh_design_length(1, 2, 1, 0.5)?
    );
    let nets = net_sizes(2, 2, 2, 0.5, 2, 1)?;
    println!(
        "net sizes: hamiltonian 10^{:.2}, circuit {}",
        nets.hamiltonian_net_bound.log10,
        nets.circuit_net_bound.exact.as_deref().unwrap_or("?")
    );
    for v in [
        DesignOrderVariant::S1Lemma8,
        DesignOrderVariant::SLemma9,
        DesignOrderVariant::SAppendix,
    ] {
        println!(
            "design order {v:?} at r=1e12, n=6: {}",
            design_order(1e12, 6, 2, v)
        );
    }
    let lb = lemma_failure_bounds(&BoundParams::new(6, 2, 2, 7, 400))?;
    println!(
        "delta={:.3e} s1={} s={} log10 P7={:.2} log10 P9={:.2} plug-in identity exact: {}",
        lb.delta, lb.s1, lb.s, lb.lemma7_log10, lb.lemma9_log10, lb.plug_in_identity_exact
    );
    Ok(())
}
