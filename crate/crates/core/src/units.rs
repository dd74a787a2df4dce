//! Unit system: energies in meV, times in fs, angular frequencies in rad/fs.
//!
//! Ordinary frequencies are quoted in THz (ν, with ω = 2πν).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Reduced Planck constant in meV·fs.
pub const HBAR_MEV_FS: f64 = 658.2119;

/// Conversions between the three frequency-like units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitContext {
    pub hbar: f64,
}

impl Default for UnitContext {
    fn default() -> Self {
        UnitContext { hbar: HBAR_MEV_FS }
    }
}

impl UnitContext {
    pub fn mev_to_rad_per_fs(&self, mev: f64) -> f64 {
        mev / self.hbar
    }

    pub fn rad_per_fs_to_mev(&self, omega: f64) -> f64 {
        omega * self.hbar
    }

    /// 1 THz = 1e-3 fs⁻¹.
    pub fn thz_to_rad_per_fs(&self, thz: f64) -> f64 {
        2.0 * PI * thz * 1e-3
    }

    pub fn rad_per_fs_to_thz(&self, omega: f64) -> f64 {
        omega / (2.0 * PI) * 1e3
    }

    pub fn mev_to_thz(&self, mev: f64) -> f64 {
        self.rad_per_fs_to_thz(self.mev_to_rad_per_fs(mev))
    }

    pub fn thz_to_mev(&self, thz: f64) -> f64 {
        self.rad_per_fs_to_mev(self.thz_to_rad_per_fs(thz))
    }

    /// Convert `value` in `unit` to rad/fs.
    pub fn to_rad_per_fs(&self, value: f64, unit: FrequencyUnit) -> f64 {
        match unit {
            FrequencyUnit::MeV => self.mev_to_rad_per_fs(value),
            FrequencyUnit::THz => self.thz_to_rad_per_fs(value),
            FrequencyUnit::RadPerFs => value,
        }
    }

    pub fn from_rad_per_fs(&self, omega: f64, unit: FrequencyUnit) -> f64 {
        match unit {
            FrequencyUnit::MeV => self.rad_per_fs_to_mev(omega),
            FrequencyUnit::THz => self.rad_per_fs_to_thz(omega),
            FrequencyUnit::RadPerFs => omega,
        }
    }

    /// The same quantity expressed in all three units.
    pub fn resolve(&self, value: f64, unit: FrequencyUnit) -> Resolved {
        let omega = self.to_rad_per_fs(value, unit);
        Resolved {
            mev: self.rad_per_fs_to_mev(omega),
            thz: self.rad_per_fs_to_thz(omega),
            rad_per_fs: omega,
        }
    }
}

/// A frequency-like quantity in every supported unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    #[serde(rename = "meV")]
    pub mev: f64,
    #[serde(rename = "THz")]
    pub thz: f64,
    #[serde(rename = "rad/fs")]
    pub rad_per_fs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrequencyUnit {
    #[serde(rename = "meV")]
    MeV,
    #[serde(rename = "THz")]
    THz,
    #[serde(rename = "rad/fs")]
    RadPerFs,
}

impl fmt::Display for FrequencyUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrequencyUnit::MeV => "meV",
            FrequencyUnit::THz => "THz",
            FrequencyUnit::RadPerFs => "rad/fs",
        })
    }
}

impl FromStr for FrequencyUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "meV" | "mev" => Ok(FrequencyUnit::MeV),
            "THz" | "thz" => Ok(FrequencyUnit::THz),
            "rad/fs" => Ok(FrequencyUnit::RadPerFs),
            other => Err(Error::invalid(format!(
                "unknown unit {other:?} (expected meV, THz or rad/fs)"
            ))),
        }
    }
}

/// Fringe period of the grating written by two beams of wavelength
/// `wavelength` crossing at `crossing_angle` radians. Same length unit out as in.
pub fn grating_period(wavelength: f64, crossing_angle: f64) -> Result<f64, Error> {
    if !wavelength.is_finite() || !crossing_angle.is_finite() {
        return Err(Error::NonFinite("grating parameters"));
    }
    if wavelength <= 0.0 {
        return Err(Error::invalid("wavelength must be positive"));
    }
    if crossing_angle <= 0.0 || crossing_angle > PI {
        return Err(Error::invalid("crossing angle must lie in (0, π]"));
    }
    Ok(wavelength / (2.0 * (crossing_angle / 2.0).sin()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caption_energies_match_caption_frequencies() {
        let u = UnitContext::default();
        for (mev, thz) in [(1510.0, 365.0), (1640.0, 397.0)] {
            let rel = (u.mev_to_thz(mev) - thz).abs() / thz;
            assert!(rel < 2e-3, "{mev} meV -> {} THz", u.mev_to_thz(mev));
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let u = UnitContext::default();
        for mev in [0.5, 66.0, 1510.0, 1640.0, 12345.678] {
            let back = u.thz_to_mev(u.mev_to_thz(mev));
            assert!((back - mev).abs() <= 1e-12 * mev);
        }
    }

    #[test]
    fn grating_period_values() {
        assert!((grating_period(800.0, PI).unwrap() - 400.0).abs() < 1e-9);
        let p = grating_period(800.0, 0.1).unwrap();
        assert!((p - 800.0 / (2.0 * 0.05f64.sin())).abs() < 1e-9);
        assert!((p / 1000.0 - 8.003).abs() < 1e-3);
        assert!(grating_period(800.0, 0.0).is_err());
        assert!(grating_period(-1.0, 0.3).is_err());
    }

    #[test]
    fn unit_parsing() {
        assert_eq!("meV".parse::<FrequencyUnit>().unwrap(), FrequencyUnit::MeV);
        assert_eq!("rad/fs".parse::<FrequencyUnit>().unwrap(), FrequencyUnit::RadPerFs);
        assert!("eV".parse::<FrequencyUnit>().is_err());
    }
}
