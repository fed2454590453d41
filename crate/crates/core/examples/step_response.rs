//! Load steps under baseline, optimal and large virtual inertia.
//!
//! Writes one CSV per case into the directory given as the first argument
//! (default: the current directory).

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use vi_stab::model::{Bandwidth, GridParams};
use vi_stab::sim::{simulate, Scenario};

fn main() -> vi_stab::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let cases = [
        ("droop_45_47kw", Bandwidth::Infinite, 45e3, 47e3),
        ("optimal_43_45kw", Bandwidth::Finite(716.0), 43e3, 45e3),
        ("large_13_15kw", Bandwidth::Finite(125.0), 13e3, 15e3),
        ("large_15_20kw", Bandwidth::Finite(125.0), 15e3, 20e3),
    ];
    for (name, omega, p0, p1) in cases {
        let mut s = Scenario::step(GridParams::reference(omega), p0, p1, 0.1, 3.0);
        s.decimation = 100;
        let tr = simulate(&s)?;
        let path = dir.join(format!("{name}.csv"));
        tr.write_csv(BufWriter::new(File::create(&path)?))?;
        println!(
            "{name:<16} {:?} t_stop={:.3}s deviation={:.2e} -> {}",
            tr.verdict,
            tr.t_stop,
            tr.final_deviation,
            path.display()
        );
    }
    Ok(())
}
