//! Largest stable load for the 14 mF bus as a function of LPF bandwidth.

use vi_stab::model::{Bandwidth, GridParams};
use vi_stab::sim::critical_power_default;

fn main() -> vi_stab::Result<()> {
    println!("{:>10} {:>12}", "omega", "P_crit [W]");
    for w in [50.0, 125.0, 250.0, 357.8, 500.0, 716.0, 2000.0, 1e4, 1e7] {
        let p = critical_power_default(&GridParams::reference(Bandwidth::Finite(w)));
        match p {
            Ok(p) => println!("{w:>10.1} {p:>12.1}"),
            Err(e) => println!("{w:>10.1} {e}"),
        }
    }
    let droop = critical_power_default(&GridParams::reference(Bandwidth::Infinite))?;
    println!("{:>10} {droop:>12.1}", "inf");
    Ok(())
}
