//! Stability raster over (omega, C) with the eigenvalue cross-check.

use std::io;

use vi_stab::model::{Bandwidth, GridParams};
use vi_stab::sweep::{stability_map, Axis, AxisName, CellState, Scale, SweepGrid};

fn main() -> vi_stab::Result<()> {
    let grid = SweepGrid {
        axis1: Axis {
            name: AxisName::Omega,
            scale: Scale::Log,
            min: 10.0,
            max: 1e5,
            n_points: 72,
        },
        axis2: Some(Axis {
            name: AxisName::Capacitance,
            scale: Scale::Linear,
            min: 2e-3,
            max: 40e-3,
            n_points: 20,
        }),
        fixed: GridParams::reference(Bandwidth::Infinite),
        power: 46e3,
    };
    let map = stability_map(&grid, true)?;
    eprintln!("cross-check disagreements: {}", map.disagreements());

    // Capacitance grows upwards, bandwidth to the right.
    let (n1, n2) = (grid.axis1.n_points, grid.axis2.as_ref().unwrap().n_points);
    for i2 in (0..n2).rev() {
        let row: String = (0..n1)
            .map(|i1| match map.cell(i1, i2).state {
                CellState::Stable => '#',
                CellState::Marginal => '+',
                CellState::Unstable => '.',
                CellState::NoEquilibrium => 'x',
            })
            .collect();
        eprintln!("{:>6.1} mF |{row}", map.cell(0, i2).x2 * 1e3);
    }
    map.write_csv(io::stdout().lock())?;
    Ok(())
}
