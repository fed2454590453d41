//! Operating point of the reference grid across load levels.

use vi_stab::model::{compute_equilibrium, power_transfer_limit, Bandwidth, GridParams};

fn main() -> vi_stab::Result<()> {
    let p = GridParams::reference(Bandwidth::Infinite);
    let p_max = power_transfer_limit(&p)?;
    println!("transfer limit: {p_max} W");
    println!(
        "{:>10} {:>10} {:>10} {:>10}",
        "P [W]", "V_e [V]", "i_e [A]", "R_e [ohm]"
    );
    for power in [0.0, 10e3, 25e3, 40e3, 46e3, 50e3] {
        let eq = compute_equilibrium(&p, power)?;
        println!(
            "{power:>10.0} {:>10.3} {:>10.3} {:>10.5}",
            eq.v_cap, eq.current, eq.r_effective
        );
    }
    match compute_equilibrium(&p, 60e3) {
        Err(e) => println!("60 kW: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
