//! Virtual inertia sizing and the large-inertia approximation.

use vi_stab::design::{approximation_error, design_for};
use vi_stab::model::{compute_equilibrium, Bandwidth, GridParams};
use vi_stab::stability::c0;

fn main() -> vi_stab::Result<()> {
    let p = GridParams::reference(Bandwidth::Infinite);
    let eq = compute_equilibrium(&p, 46e3)?;
    let d = design_for(&eq, p.inductance, p.droop_gain)?;
    println!("C_base    = {:.3} mF", d.c_base * 1e3);
    println!(
        "omega_opt = {:.1} rad/s, C_opt = {:.3} mF",
        d.omega_opt,
        d.c_opt * 1e3
    );
    println!("omega_max = {:.1} rad/s", d.omega_max);

    println!(
        "\n{:>10} {:>12} {:>12} {:>8}",
        "omega", "C0 [mF]", "C_large [mF]", "error"
    );
    for omega in [20.0, 50.0, 125.0, d.omega_opt / 5.0, d.omega_opt] {
        let exact = c0(
            Bandwidth::Finite(omega),
            p.droop_gain,
            p.inductance,
            eq.r_effective,
        );
        let err = approximation_error(omega, p.droop_gain, p.inductance, eq.r_effective);
        println!(
            "{omega:>10.1} {:>12.3} {:>12.3} {:>7.1}%",
            exact * 1e3,
            d.c_large(omega) * 1e3,
            err * 100.0
        );
    }
    Ok(())
}
