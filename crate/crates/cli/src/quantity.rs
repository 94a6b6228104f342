//! Unit-suffixed quantity parsing for the config surface. Every physical
//! value must carry an explicit suffix; bare numbers are rejected. All
//! results are SI, frequencies angular (rad/s), energies joules.

use crate::error::{CliError, Result};
use dressedlat_core::constants::{ATOMIC_MASS, G_EARTH, H, K_B};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Time,
    /// Ordinary-frequency suffixes convert to angular rad/s.
    Frequency,
    Field,
    Gradient,
    Mass,
    Energy,
    Acceleration,
}

impl Dimension {
    fn factor(&self, unit: &str) -> Option<f64> {
        match self {
            Self::Length => match unit {
                "m" => Some(1.0),
                "cm" => Some(1e-2),
                "mm" => Some(1e-3),
                "um" | "µm" => Some(1e-6),
                "nm" => Some(1e-9),
                _ => None,
            },
            Self::Time => match unit {
                "s" => Some(1.0),
                "ms" => Some(1e-3),
                "us" | "µs" => Some(1e-6),
                "ns" => Some(1e-9),
                _ => None,
            },
            Self::Frequency => match unit {
                "rad/s" => Some(1.0),
                "Hz" => Some(TAU),
                "kHz" => Some(TAU * 1e3),
                "MHz" => Some(TAU * 1e6),
                "GHz" => Some(TAU * 1e9),
                _ => None,
            },
            Self::Field => match unit {
                "T" => Some(1.0),
                "mT" => Some(1e-3),
                "G" => Some(1e-4),
                "mG" => Some(1e-7),
                _ => None,
            },
            Self::Gradient => match unit {
                "T/m" => Some(1.0),
                "G/cm" => Some(1e-2),
                _ => None,
            },
            Self::Mass => match unit {
                "kg" => Some(1.0),
                "u" | "amu" => Some(ATOMIC_MASS),
                _ => None,
            },
            Self::Energy => match unit {
                "J" => Some(1.0),
                "uK" | "µK" => Some(K_B * 1e-6),
                // frequency-equivalent energies: E = h * f
                "Hz" => Some(H),
                "kHz" => Some(H * 1e3),
                "MHz" => Some(H * 1e6),
                "GHz" => Some(H * 1e9),
                _ => None,
            },
            Self::Acceleration => match unit {
                "m/s^2" | "m/s²" => Some(1.0),
                "g" => Some(G_EARTH),
                _ => None,
            },
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Self::Length => "length",
            Self::Time => "time",
            Self::Frequency => "frequency",
            Self::Field => "magnetic field",
            Self::Gradient => "field gradient",
            Self::Mass => "mass",
            Self::Energy => "energy",
            Self::Acceleration => "acceleration",
        }
    }
}

/// Parses `"<number> <unit>"` into SI for the given dimension.
pub fn parse(text: &str, dimension: Dimension) -> Result<f64> {
    let trimmed = text.trim();
    let split = trimmed
        .find(|c: char| c.is_whitespace())
        .ok_or_else(|| missing_unit(trimmed, dimension))?;
    let (num, unit) = trimmed.split_at(split);
    let unit = unit.trim();
    if unit.is_empty() {
        return Err(missing_unit(trimmed, dimension));
    }
    let value: f64 = num
        .parse()
        .map_err(|_| CliError::config(format!("bad number in {trimmed:?}")))?;
    let factor = dimension.factor(unit).ok_or_else(|| {
        CliError::config(format!(
            "unknown {} unit {unit:?} in {trimmed:?}",
            dimension.name()
        ))
    })?;
    Ok(value * factor)
}

fn missing_unit(text: &str, dimension: Dimension) -> CliError {
    CliError::config(format!(
        "{:?} needs an explicit {} unit (e.g. \"200 G/cm\")",
        text,
        dimension.name()
    ))
}
