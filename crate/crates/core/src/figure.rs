//! Curve data for photon-efficiency plots, written as CSV.
//!
//! Three sweeps are supported:
//!
//! * photon efficiency against the photon budget at fixed transmissivity;
//! * photon efficiency against transmissivity at fixed budget;
//! * photon efficiency against spectral efficiency for `m` identical modes.
//!
//! For the last one, spectral efficiency is total bits per channel use
//! divided by `m`, and photon efficiency is total bits per photon. The x axis
//! is a grid of spectral efficiencies; for each curve the budget that attains
//! it is found by bisection, so both curves share one axis.
//!
//! Numbers are written with 17 significant digits and `\n` line endings, so
//! identical requests produce identical files.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::allocation::{multi_mode_bound, BoundKind};
use crate::entropy::{
    capacity_infinite, lower_bound_single, photon_efficiency, upper_bound_single, PhotonBudget, Transmissivity, Unit,
};
use crate::error::{domain, Result};
use crate::modes::ModeSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

/// Axis specification: `points` values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
}

impl Grid {
    pub fn linear(start: f64, stop: f64, points: usize) -> Self {
        Self { start, stop, points, scale: Scale::Linear }
    }

    pub fn log(start: f64, stop: f64, points: usize) -> Self {
        Self { start, stop, points, scale: Scale::Log }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points < 2 {
            return Err(domain(format!("grid needs at least 2 points, got {}", self.points)));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(domain(format!(
                "grid must be strictly increasing, got {} .. {}",
                self.start, self.stop
            )));
        }
        let last = (self.points - 1) as f64;
        let values: Vec<f64> = match self.scale {
            Scale::Linear => (0..self.points)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / last)
                .collect(),
            Scale::Log => {
                if self.start <= 0.0 {
                    return Err(domain("log-spaced grid needs a positive start"));
                }
                let (a, b) = (self.start.log10(), self.stop.log10());
                (0..self.points)
                    .map(|i| 10f64.powf(a + (b - a) * i as f64 / last))
                    .collect()
            }
        };
        // Pin the endpoints so the axis covers exactly [start, stop].
        let mut values = values;
        values[0] = self.start;
        *values.last_mut().expect("points >= 2") = self.stop;
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain("grid is not strictly increasing at double precision"));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "figure", rename_all = "snake_case")]
pub enum FigureKind {
    PhotonEffVsNbar { eta: f64 },
    PhotonEffVsEta { nbar: f64 },
    PhotonEffVsSpectralEff { modes: usize, eta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRequest {
    pub kind: FigureKind,
    pub grid: Grid,
}

impl FigureRequest {
    /// Photon efficiency against budget, `eta = 0.7`, budgets `1e-6 .. 1e-1`.
    pub fn nbar_sweep() -> Self {
        Self { kind: FigureKind::PhotonEffVsNbar { eta: 0.7 }, grid: Grid::log(1e-6, 1e-1, 61) }
    }

    /// Photon efficiency against transmissivity, `nbar = 1e-3`, `eta` in `0.5 .. 1`.
    pub fn eta_sweep() -> Self {
        Self { kind: FigureKind::PhotonEffVsEta { nbar: 1e-3 }, grid: Grid::linear(0.5, 1.0, 51) }
    }

    /// Photon against spectral efficiency for 1000 modes at `eta = 0.9`.
    pub fn spectral_sweep() -> Self {
        Self {
            kind: FigureKind::PhotonEffVsSpectralEff { modes: 1000, eta: 0.9 },
            grid: Grid::log(1e-4, 1.0, 41),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub columns: [&'static str; 3],
    /// `(axis, lower, upper)` per grid point.
    pub rows: Vec<[f64; 3]>,
}

impl FigureTable {
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", row[0], row[1], row[2]);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// A gnuplot script plotting `csv_path`.
    pub fn gnuplot_script(&self, csv_path: &str, log_x: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "set datafile separator ','");
        let _ = writeln!(s, "set key autotitle columnhead");
        let _ = writeln!(s, "set xlabel '{}'", self.columns[0]);
        let _ = writeln!(s, "set ylabel 'bits per photon'");
        if log_x {
            let _ = writeln!(s, "set logscale x");
        }
        let _ = writeln!(
            s,
            "plot '{csv_path}' using 1:3 with lines dashtype 2, '' using 1:2 with lines"
        );
        s
    }
}

pub fn run_figure(req: &FigureRequest) -> Result<FigureTable> {
    let axis = req.grid.values()?;
    match req.kind {
        FigureKind::PhotonEffVsNbar { eta } => {
            let eta = Transmissivity::new(eta)?;
            if axis[0] <= 0.0 {
                return Err(domain("photon budgets must be positive"));
            }
            let rows = axis
                .iter()
                .map(|&x| {
                    let nbar = PhotonBudget::new(x)?;
                    Ok([
                        x,
                        photon_efficiency(lower_bound_single(eta, nbar), nbar, Unit::Bits)?,
                        photon_efficiency(upper_bound_single(eta, nbar), nbar, Unit::Bits)?,
                    ])
                })
                .collect::<Result<_>>()?;
            Ok(FigureTable {
                columns: ["nbar", "lower_bits_per_photon", "upper_bits_per_photon"],
                rows,
            })
        }
        FigureKind::PhotonEffVsEta { nbar } => {
            let nbar = PhotonBudget::new(nbar)?;
            if nbar.get() == 0.0 {
                return Err(domain("photon efficiency needs nbar > 0"));
            }
            let rows = axis
                .iter()
                .map(|&x| {
                    let eta = Transmissivity::new(x)?;
                    Ok([
                        x,
                        photon_efficiency(lower_bound_single(eta, nbar), nbar, Unit::Bits)?,
                        photon_efficiency(upper_bound_single(eta, nbar), nbar, Unit::Bits)?,
                    ])
                })
                .collect::<Result<_>>()?;
            Ok(FigureTable {
                columns: ["eta", "lower_bits_per_photon", "upper_bits_per_photon"],
                rows,
            })
        }
        FigureKind::PhotonEffVsSpectralEff { modes, eta } => {
            if modes == 0 {
                return Err(domain("need at least one mode"));
            }
            let eta = Transmissivity::new(eta)?;
            if !eta.is_positive_rate() {
                return Err(domain("spectral sweep needs eta > 1/2"));
            }
            if axis[0] <= 0.0 {
                return Err(domain("spectral efficiencies must be positive"));
            }
            let ceiling = Unit::Bits.from_nats(capacity_infinite(eta));
            if let Some(&top) = axis.last().filter(|&&top| top >= ceiling) {
                return Err(domain(format!(
                    "spectral efficiency {top} bits per mode is unreachable by the lower bound (limit {ceiling})"
                )));
            }
            let spectrum = ModeSpectrum::new(vec![eta.get(); modes])?;
            let rows = axis
                .iter()
                .map(|&se| {
                    let total_bits = se * modes as f64;
                    let lower = budget_for_rate(&spectrum, BoundKind::Lower, total_bits)?;
                    let upper = budget_for_rate(&spectrum, BoundKind::Upper, total_bits)?;
                    Ok([se, total_bits / lower, total_bits / upper])
                })
                .collect::<Result<_>>()?;
            Ok(FigureTable {
                columns: [
                    "spectral_efficiency_bits_per_mode",
                    "lower_bits_per_photon",
                    "upper_bits_per_photon",
                ],
                rows,
            })
        }
    }
}

/// Smallest budget whose multi-mode bound reaches `bits` per channel use.
fn budget_for_rate(spectrum: &ModeSpectrum, kind: BoundKind, bits: f64) -> Result<f64> {
    let rate = |ln_n: f64| -> Result<f64> {
        Ok(multi_mode_bound(spectrum, PhotonBudget::new(ln_n.exp())?, kind)?.bits())
    };
    let (mut lo, mut hi) = (-690.0f64, 60.0f64);
    if rate(hi)? < bits {
        return Err(domain(format!("rate {bits} bits is out of reach")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rate(mid)? < bits {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi.exp())
}
