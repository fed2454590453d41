//! Batch evaluation over parameter grids: the `C₀(ω)` curve and 2-D stability maps.
//!
//! Cells are evaluated in parallel on the current rayon pool; output is
//! always row-major (first axis outer) regardless of evaluation order.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{compute_equilibrium, Bandwidth, GridParams};
use crate::stability::{
    capacitance_thresholds, char_poly, droop_eigenvalues, eigenvalues, routh_verdict,
    theorem1_stable,
};

/// Relative distance to a threshold inside which a cell is reported marginal.
pub const MARGINAL_BAND: f64 = 1e-3;

/// Environment variable capping sweep parallelism (`0` or unset = automatic).
pub const THREADS_ENV: &str = "VI_STAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisName {
    Omega,
    Capacitance,
    Power,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::Omega => "omega",
            AxisName::Capacitance => "capacitance",
            AxisName::Power => "power",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisName,
    pub scale: Scale,
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
}

impl Axis {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidGrid(m));
        if self.n_points < 2 {
            return bad(format!(
                "{} axis needs at least 2 points",
                self.name.as_str()
            ));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return bad(format!("{} axis requires min < max", self.name.as_str()));
        }
        if self.scale == Scale::Log && self.min <= 0.0 {
            return bad(format!("{} log axis requires min > 0", self.name.as_str()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|i| {
                let u = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * u,
                    Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * u).exp(),
                }
            })
            .collect()
    }
}

impl std::str::FromStr for Axis {
    type Err = String;

    /// `name:scale:min:max:n`, e.g. `omega:log:10:1e5:1000`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [name, scale, min, max, n] = parts.as_slice() else {
            return Err(format!("axis `{s}` must look like name:scale:min:max:n"));
        };
        let name = match *name {
            "omega" => AxisName::Omega,
            "capacitance" => AxisName::Capacitance,
            "power" => AxisName::Power,
            other => return Err(format!("unknown axis `{other}`")),
        };
        let scale = match *scale {
            "linear" | "lin" => Scale::Linear,
            "log" => Scale::Log,
            other => return Err(format!("unknown scale `{other}`")),
        };
        let num = |v: &str| v.parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
        Ok(Axis {
            name,
            scale,
            min: num(min)?,
            max: num(max)?,
            n_points: n.parse().map_err(|e| format!("`{n}`: {e}"))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub axis1: Axis,
    #[serde(default)]
    pub axis2: Option<Axis>,
    /// Values for everything not on an axis.
    pub fixed: GridParams,
    pub power: f64,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            if a2.name == self.axis1.name {
                return Err(Error::InvalidGrid("axes must be distinct".into()));
            }
        }
        Ok(())
    }
}

fn apply(params: GridParams, power: f64, axis: AxisName, value: f64) -> (GridParams, f64) {
    match axis {
        AxisName::Omega => (params.with_bandwidth(Bandwidth::Finite(value)), power),
        AxisName::Capacitance => (params.with_capacitance(value), power),
        AxisName::Power => (params, value),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub omega: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0_minus: f64,
    pub c0: f64,
    pub c_base: f64,
}

/// Thresholds along a 1-D bandwidth sweep at fixed power, with the droop-only
/// baseline `L/(K R_e)` as a constant reference column.
pub fn curve_c0_vs_omega(grid: &SweepGrid) -> Result<Vec<CurveRow>> {
    grid.validate()?;
    if grid.axis1.name != AxisName::Omega || grid.axis2.is_some() {
        return Err(Error::InvalidGrid(
            "C0 curve needs a single omega axis".into(),
        ));
    }
    let eq = compute_equilibrium(&grid.fixed, grid.power)?;
    let c_base = grid.fixed.inductance / (grid.fixed.droop_gain * eq.r_effective);
    grid.axis1
        .values()
        .into_par_iter()
        .map(|omega| {
            let p = grid.fixed.with_bandwidth(Bandwidth::Finite(omega));
            let t = capacitance_thresholds(&p, &eq)?;
            Ok(CurveRow {
                omega,
                c2: t.c2,
                c1: t.c1,
                c0_minus: t.c0_minus,
                c0: t.c0,
                c_base,
            })
        })
        .collect()
}

pub fn write_curve_csv<W: Write>(rows: &[CurveRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "omega,c2,c1,c0_minus,c0,c_base")?;
    for r in rows {
        writeln!(
            w,
            "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
            r.omega, r.c2, r.c1, r.c0_minus, r.c0, r.c_base
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellState {
    Stable,
    Marginal,
    Unstable,
    NoEquilibrium,
}

impl CellState {
    pub fn as_str(self) -> &'static str {
        match self {
            CellState::Stable => "stable",
            CellState::Marginal => "marginal",
            CellState::Unstable => "unstable",
            CellState::NoEquilibrium => "no-equilibrium",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub x1: f64,
    pub x2: f64,
    pub state: CellState,
    /// Eigenvalue-sign verdict, when the cross-check is enabled and applicable.
    pub eigen_stable: Option<bool>,
}

impl Cell {
    /// `false` only when the eigenvalue check ran on a non-marginal cell and disagreed.
    pub fn agrees(&self) -> bool {
        match (self.state, self.eigen_stable) {
            (CellState::Stable, Some(e)) => e,
            (CellState::Unstable, Some(e)) => !e,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityMap {
    pub axis1: Axis,
    pub axis2: Axis,
    /// Row-major: `cells[i1 * axis2.n_points + i2]`.
    pub cells: Vec<Cell>,
}

impl StabilityMap {
    pub fn cell(&self, i1: usize, i2: usize) -> &Cell {
        &self.cells[i1 * self.axis2.n_points + i2]
    }

    pub fn disagreements(&self) -> usize {
        self.cells.iter().filter(|c| !c.agrees()).count()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "{},{},state,eigen_stable",
            self.axis1.name.as_str(),
            self.axis2.name.as_str()
        )?;
        for c in &self.cells {
            let eig = match c.eigen_stable {
                Some(true) => "true",
                Some(false) => "false",
                None => "",
            };
            writeln!(w, "{:.8e},{:.8e},{},{}", c.x1, c.x2, c.state.as_str(), eig)?;
        }
        Ok(())
    }
}

fn near(c: f64, threshold: f64) -> bool {
    threshold > 0.0 && (c - threshold).abs() <= MARGINAL_BAND * threshold
}

/// Classifies one operating point. Errors other than a missing equilibrium propagate.
pub fn classify(
    params: &GridParams,
    power: f64,
    cross_check: bool,
) -> Result<(CellState, Option<bool>)> {
    let eq = match compute_equilibrium(params, power) {
        Ok(eq) => eq,
        Err(Error::NoEquilibrium { .. }) => return Ok((CellState::NoEquilibrium, None)),
        Err(e) => return Err(e),
    };
    if !eq.is_loaded() {
        return Ok((CellState::Stable, None));
    }
    let t = capacitance_thresholds(params, &eq)?;
    let c = params.capacitance;
    let mut marginal = t.as_array().iter().any(|&th| near(c, th))
        || eq.r_effective - params.droop_gain <= MARGINAL_BAND * params.droop_gain;
    if params.lpf_bandwidth.finite().is_some() {
        marginal |= routh_verdict(params, &eq)?.marginal;
    }
    let state = if marginal {
        CellState::Marginal
    } else if theorem1_stable(params, &eq)? {
        CellState::Stable
    } else {
        CellState::Unstable
    };
    let eigen_stable = if cross_check {
        let max_re = match params.lpf_bandwidth {
            Bandwidth::Finite(_) => eigenvalues(&char_poly(params, &eq)?).max_real_part,
            Bandwidth::Infinite => droop_eigenvalues(params, &eq)?
                .iter()
                .map(|z| z.re)
                .fold(f64::NEG_INFINITY, f64::max),
        };
        Some(max_re < 0.0)
    } else {
        None
    };
    Ok((state, eigen_stable))
}

pub fn stability_map(grid: &SweepGrid, cross_check: bool) -> Result<StabilityMap> {
    grid.validate()?;
    let axis2 = grid
        .axis2
        .ok_or_else(|| Error::InvalidGrid("stability map needs two axes".into()))?;
    let (v1, v2) = (grid.axis1.values(), axis2.values());
    let n2 = v2.len();
    let cells = (0..v1.len() * n2)
        .into_par_iter()
        .map(|idx| {
            let (x1, x2) = (v1[idx / n2], v2[idx % n2]);
            let (p, power) = apply(grid.fixed, grid.power, grid.axis1.name, x1);
            let (p, power) = apply(p, power, axis2.name, x2);
            let (state, eigen_stable) = classify(&p, power, cross_check)?;
            Ok(Cell {
                x1,
                x2,
                state,
                eigen_stable,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityMap {
        axis1: grid.axis1,
        axis2,
        cells,
    })
}

/// Sidecar describing how a sweep output was produced.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub kind: &'static str,
    pub grid: &'a SweepGrid,
    pub rows: usize,
    pub float_format: &'static str,
    pub version: &'static str,
}

impl<'a> Manifest<'a> {
    pub fn new(kind: &'static str, grid: &'a SweepGrid, rows: usize) -> Self {
        Self {
            kind,
            grid,
            rows,
            float_format: "9 significant digits, scientific",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// Thread count from [`THREADS_ENV`]; `0`, unset or unparsable means automatic.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}
