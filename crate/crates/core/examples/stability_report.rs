//! Routh verdict, capacitance thresholds and eigenvalues at several LPF bandwidths.

use vi_stab::model::{compute_equilibrium, Bandwidth, GridParams};
use vi_stab::stability::analyze;

fn main() -> vi_stab::Result<()> {
    for omega in [
        Bandwidth::Finite(125.0),
        Bandwidth::Finite(357.8),
        Bandwidth::Finite(716.0),
        Bandwidth::Infinite,
    ] {
        let p = GridParams::reference(omega);
        let eq = compute_equilibrium(&p, 46e3)?;
        let r = analyze(&p, &eq)?;
        println!("omega = {omega}");
        println!(
            "  stable={} marginal={} f2={:.4e} f1={:.4e} f0={:.4e}",
            r.stable, r.marginal, r.f2, r.f1, r.f0
        );
        println!(
            "  C2={:.4e} C1={:.4e} C0-={:.4e} C0={:.4e}",
            r.c2, r.c1, r.c0_minus, r.c0
        );
        for e in &r.eigs {
            println!("  lambda = {:+.3} {:+.3}i", e.re, e.im);
        }
    }
    Ok(())
}
