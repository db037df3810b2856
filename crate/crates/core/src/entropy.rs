//! Thermal-state entropy and the single-mode private-capacity bounds.
//!
//! All values are in nats. [`BoundValue::bits`] and [`Unit`] are the only
//! places where base-2 conversion happens.

use std::f64::consts::LN_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Power transmissivity of the Alice-to-Bob beam splitter, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Transmissivity(f64);

impl Transmissivity {
    pub fn new(eta: f64) -> Result<Self> {
        if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
            return Err(domain(format!("transmissivity must lie in [0, 1], got {eta}")));
        }
        Ok(Self(eta))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Whether Bob's channel beats Eve's, i.e. `eta > 1/2`.
    #[inline]
    pub fn is_positive_rate(self) -> bool {
        self.0 > 0.5
    }
}

/// Mean photon number per channel use.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct PhotonBudget(f64);

impl PhotonBudget {
    pub fn new(nbar: f64) -> Result<Self> {
        if !nbar.is_finite() || nbar < 0.0 {
            return Err(domain(format!("photon budget must be finite and >= 0, got {nbar}")));
        }
        Ok(Self(nbar))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

/// Information unit used at presentation boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Bits,
    Nats,
}

impl Unit {
    /// Convert a value in nats to this unit.
    #[inline]
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            Unit::Nats => nats,
            Unit::Bits => nats / LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Bits => "bits",
            Unit::Nats => "nats",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A rate bound in nats per channel use.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize)]
#[serde(transparent)]
pub struct BoundValue(f64);

impl BoundValue {
    pub const ZERO: BoundValue = BoundValue(0.0);

    pub fn from_nats(nats: f64) -> Result<Self> {
        if nats.is_nan() || nats < 0.0 {
            return Err(domain(format!("bound value must be >= 0 nats, got {nats}")));
        }
        Ok(Self(nats))
    }

    /// Bounds are nonnegative by construction; tiny negative round-off is clamped.
    pub(crate) fn clamped(nats: f64) -> Self {
        Self(nats.max(0.0))
    }

    #[inline]
    pub fn nats(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn bits(self) -> f64 {
        self.0 / LN_2
    }

    #[inline]
    pub fn in_unit(self, unit: Unit) -> f64 {
        unit.from_nats(self.0)
    }
}

/// Entropy of a thermal state with mean photon number `x`:
/// `g(x) = (1+x) ln(1+x) - x ln x`, with `g(0) = 0`.
pub fn g_entropy(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(domain(format!("g(x) requires finite x >= 0, got {x}")));
    }
    Ok(g_unchecked(x))
}

/// `g` without argument validation. Rewritten as `ln(1+x) + x ln(1 + 1/x)`
/// so neither branch subtracts two large terms.
#[inline]
pub(crate) fn g_unchecked(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x < 1.0 {
        x.ln_1p() + x * (x.ln_1p() - x.ln())
    } else {
        x.ln_1p() + x * x.recip().ln_1p()
    }
}

#[inline]
pub(crate) fn lower_unchecked(eta: f64, nbar: f64) -> f64 {
    if eta > 0.5 {
        (g_unchecked(eta * nbar) - g_unchecked((1.0 - eta) * nbar)).max(0.0)
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn upper_unchecked(eta: f64, nbar: f64) -> f64 {
    if eta > 0.5 {
        g_unchecked((2.0 * eta - 1.0) * nbar)
    } else {
        0.0
    }
}

/// Achievable rate `L(eta, nbar) = g(eta nbar) - g((1-eta) nbar)` for `eta > 1/2`, else 0.
pub fn lower_bound_single(eta: Transmissivity, nbar: PhotonBudget) -> BoundValue {
    BoundValue::clamped(lower_unchecked(eta.get(), nbar.get()))
}

/// Converse `U(eta, nbar) = g((2 eta - 1) nbar)` for `eta > 1/2`, else 0.
pub fn upper_bound_single(eta: Transmissivity, nbar: PhotonBudget) -> BoundValue {
    BoundValue::clamped(upper_unchecked(eta.get(), nbar.get()))
}

/// Private capacity with unlimited photons, `max(0, ln eta - ln(1 - eta))`.
/// Returns `f64::INFINITY` at `eta = 1`.
pub fn capacity_infinite(eta: Transmissivity) -> f64 {
    let eta = eta.get();
    if eta <= 0.5 {
        return 0.0;
    }
    if eta == 1.0 {
        return f64::INFINITY;
    }
    (eta.ln() - (1.0 - eta).ln()).max(0.0)
}

/// Bracket on the `O(nbar)/nbar` term of the low-photon expansion
/// `C = (2 eta - 1) nbar ln(1/nbar) + O(nbar)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticCoefficients {
    pub lower: f64,
    pub upper: f64,
}

/// `x (1 + ln(1/x))` with the `x ln(1/x) -> 0` convention at `x = 0`.
fn xlog_term(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (1.0 - x.ln())
    }
}

pub fn asymptotic_coefficients(eta: Transmissivity) -> Result<AsymptoticCoefficients> {
    let eta = eta.get();
    if eta <= 0.5 {
        return Err(domain(format!(
            "asymptotic coefficients need eta > 1/2, got {eta}"
        )));
    }
    Ok(AsymptoticCoefficients {
        lower: xlog_term(eta) - xlog_term(1.0 - eta),
        upper: xlog_term(2.0 * eta - 1.0),
    })
}

/// Information per photon, `bound / nbar`, in the requested unit.
pub fn photon_efficiency(bound: BoundValue, nbar: PhotonBudget, unit: Unit) -> Result<f64> {
    if nbar.get() <= 0.0 {
        return Err(domain("photon efficiency needs nbar > 0"));
    }
    Ok(unit.from_nats(bound.nats()) / nbar.get())
}
