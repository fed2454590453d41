//! Required capacitance against LPF bandwidth, as CSV.
//!
//! `cargo run --example c0_curve > c0.csv`

use std::io;

use vi_stab::model::{Bandwidth, GridParams};
use vi_stab::sweep::{curve_c0_vs_omega, write_curve_csv, Axis, AxisName, Scale, SweepGrid};

fn main() -> vi_stab::Result<()> {
    let grid = SweepGrid {
        axis1: Axis {
            name: AxisName::Omega,
            scale: Scale::Log,
            min: 10.0,
            max: 1e5,
            n_points: 200,
        },
        axis2: None,
        fixed: GridParams::reference(Bandwidth::Infinite),
        power: 46e3,
    };
    let rows = curve_c0_vs_omega(&grid)?;
    let min = rows.iter().min_by(|a, b| a.c0.total_cmp(&b.c0)).unwrap();
    eprintln!(
        "minimum C0 = {:.4e} F at omega = {:.1} rad/s",
        min.c0, min.omega
    );
    write_curve_csv(&rows, io::stdout().lock())?;
    Ok(())
}
