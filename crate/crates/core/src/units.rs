//! Exact-factor unit conversions for the quantities the config surface
//! accepts. Ordinary frequencies (Hz, kHz, MHz) convert to angular rad/s;
//! everything internal is SI and angular.

use crate::constants::K_B;
use crate::error::{CoreError, Result};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    GaussPerCm,
    TeslaPerMeter,
    Gauss,
    Tesla,
    Hertz,
    Kilohertz,
    Megahertz,
    RadPerSec,
    MicroKelvin,
    Joule,
}

impl Unit {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "G/cm" => Some(Self::GaussPerCm),
            "T/m" => Some(Self::TeslaPerMeter),
            "G" => Some(Self::Gauss),
            "T" => Some(Self::Tesla),
            "Hz" => Some(Self::Hertz),
            "kHz" => Some(Self::Kilohertz),
            "MHz" => Some(Self::Megahertz),
            "rad/s" => Some(Self::RadPerSec),
            "uK" | "µK" => Some(Self::MicroKelvin),
            "J" => Some(Self::Joule),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::GaussPerCm => "G/cm",
            Self::TeslaPerMeter => "T/m",
            Self::Gauss => "G",
            Self::Tesla => "T",
            Self::Hertz => "Hz",
            Self::Kilohertz => "kHz",
            Self::Megahertz => "MHz",
            Self::RadPerSec => "rad/s",
            Self::MicroKelvin => "uK",
            Self::Joule => "J",
        }
    }
}

/// Converts `value` between the supported unit pairs by exact factor.
pub fn convert(value: f64, from: Unit, to: Unit) -> Result<f64> {
    use Unit::*;
    if from == to {
        return Ok(value);
    }
    let factor = match (from, to) {
        (GaussPerCm, TeslaPerMeter) => 1e-2,
        (TeslaPerMeter, GaussPerCm) => 1e2,
        (Gauss, Tesla) => 1e-4,
        (Tesla, Gauss) => 1e4,
        (Hertz, RadPerSec) => TAU,
        (RadPerSec, Hertz) => 1.0 / TAU,
        (Kilohertz, RadPerSec) => TAU * 1e3,
        (RadPerSec, Kilohertz) => 1.0 / (TAU * 1e3),
        (Megahertz, RadPerSec) => TAU * 1e6,
        (RadPerSec, Megahertz) => 1.0 / (TAU * 1e6),
        (MicroKelvin, Joule) => K_B * 1e-6,
        (Joule, MicroKelvin) => 1.0 / (K_B * 1e-6),
        (from, to) => {
            return Err(CoreError::UnsupportedConversion {
                from: from.label().into(),
                to: to.label().into(),
            })
        }
    };
    Ok(value * factor)
}
