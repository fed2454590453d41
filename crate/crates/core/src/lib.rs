//! Stability analysis of a DC grid formed by a virtual-inertia source
//! converter feeding a constant power load (CPL).
//!
//! - [`model`]: grid parameters, machine-emulation equivalence, equilibria.
//! - [`stability`]: Jacobian, characteristic cubic, Routh verdict,
//!   capacitance thresholds, the single `C > C₀` criterion, and an
//!   eigenvalue oracle.
//! - [`design`]: baseline, optimal, maximum and large-inertia sizing.
//! - [`sim`]: fixed-step RK4 simulation under stepped CPL power.
//! - [`sweep`]: `C₀(ω)` curves and 2-D stability maps as CSV.
//! - [`verify`]: seeded randomized agreement checks.
//! - [`cli`]: the `vi-stab` command line.
//!
//! ```
//! use vi_stab::model::{compute_equilibrium, Bandwidth, GridParams};
//! use vi_stab::stability::theorem1_stable;
//!
//! let p = GridParams::reference(Bandwidth::Finite(716.0));
//! let eq = compute_equilibrium(&p, 45_000.0).unwrap();
//! assert!(theorem1_stable(&p, &eq).unwrap());
//! ```

pub mod cli;
pub mod design;
pub mod error;
pub mod model;
pub mod sim;
pub mod stability;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
