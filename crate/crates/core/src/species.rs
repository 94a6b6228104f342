//! Atomic species: mass plus a list of hyperfine manifolds (F, g_F, energy
//! offset). Only the linear Zeeman regime is modelled; nuclear microstructure
//! beyond (F, g_F) is out of scope.

use crate::constants::{ATOMIC_MASS, H, MU_B};
use crate::error::{CoreError, Result};

/// One hyperfine manifold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manifold {
    /// Total spin F (non-negative half-integer).
    pub f: f64,
    /// Signed Landé g-factor of the manifold.
    pub g_f: f64,
    /// Energy offset of the manifold within the ground state (J).
    pub e_offset: f64,
}

impl Manifold {
    pub fn new(f: f64, g_f: f64, e_offset: f64) -> Result<Self> {
        if !is_half_integer(f) || f < 0.0 {
            return Err(CoreError::InvalidSpin(f));
        }
        Ok(Self { f, g_f, e_offset })
    }

    /// Checks that m_F is a valid sublevel of this manifold.
    pub fn validate_sublevel(&self, m_f: f64) -> Result<()> {
        validate_sublevel(self.f, m_f)
    }

    /// Number of Zeeman sublevels, 2F+1.
    pub fn level_count(&self) -> usize {
        (2.0 * self.f).round() as usize + 1
    }

    /// Sublevels m_F = -F .. +F in ascending order.
    pub fn sublevels(&self) -> Vec<f64> {
        (0..self.level_count()).map(|k| -self.f + k as f64).collect()
    }
}

/// An atom as far as this crate cares: a mass and its hyperfine manifolds,
/// sorted by energy offset.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSpecies {
    pub name: String,
    /// Mass (kg).
    pub mass: f64,
    pub manifolds: Vec<Manifold>,
}

impl AtomSpecies {
    pub fn new(name: impl Into<String>, mass: f64, mut manifolds: Vec<Manifold>) -> Result<Self> {
        if !mass.is_finite() || mass <= 0.0 {
            return Err(CoreError::DomainError(format!("mass must be positive, got {mass}")));
        }
        manifolds.sort_by(|a, b| a.e_offset.partial_cmp(&b.e_offset).unwrap());
        Ok(Self { name: name.into(), mass, manifolds })
    }

    /// ⁶Li ground state, F = 1/2 manifold (g_F = -2/3).
    pub fn lithium6() -> Self {
        Self {
            name: "Li6".into(),
            mass: 6.015_122_887_4 * ATOMIC_MASS,
            manifolds: vec![Manifold { f: 0.5, g_f: -2.0 / 3.0, e_offset: 0.0 }],
        }
    }

    /// ⁷Li ground state, F = 2 manifold (g_F = 1/2).
    pub fn lithium7() -> Self {
        Self {
            name: "Li7".into(),
            mass: 7.016_003_436_6 * ATOMIC_MASS,
            manifolds: vec![Manifold { f: 2.0, g_f: 0.5, e_offset: 0.0 }],
        }
    }

    /// ⁸⁷Rb ground state, F = 1 and F = 2 manifolds split by h·6.8347 GHz.
    pub fn rubidium87() -> Self {
        let splitting = H * 6.834_682_610_904_29e9;
        Self {
            name: "Rb87".into(),
            mass: 86.909_180_531_0 * ATOMIC_MASS,
            manifolds: vec![
                Manifold { f: 1.0, g_f: -0.5, e_offset: 0.0 },
                Manifold { f: 2.0, g_f: 0.5, e_offset: splitting },
            ],
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "li6" | "6li" | "lithium6" => Some(Self::lithium6()),
            "li7" | "7li" | "lithium7" => Some(Self::lithium7()),
            "rb87" | "87rb" | "rubidium87" => Some(Self::rubidium87()),
            _ => None,
        }
    }

    /// The manifold to use when none is named: the lowest-lying one.
    pub fn ground_manifold(&self) -> &Manifold {
        &self.manifolds[0]
    }

    pub fn manifold_with_f(&self, f: f64) -> Option<&Manifold> {
        self.manifolds.iter().find(|m| (m.f - f).abs() < 1e-9)
    }
}

/// Linear Zeeman energy μ_B·g_F·m_F·B of a sublevel (J).
pub fn zeeman_energy(manifold: &Manifold, m_f: f64, field: f64) -> Result<f64> {
    manifold.validate_sublevel(m_f)?;
    Ok(MU_B * manifold.g_f * m_f * field)
}

pub(crate) fn is_half_integer(x: f64) -> bool {
    let doubled = 2.0 * x;
    (doubled - doubled.round()).abs() < 1e-9
}

pub(crate) fn validate_sublevel(f: f64, m_f: f64) -> Result<()> {
    if !is_half_integer(f) || f < 0.0 {
        return Err(CoreError::InvalidSpin(f));
    }
    let valid = is_half_integer(m_f)
        && m_f.abs() <= f + 1e-9
        && ((m_f - f) - (m_f - f).round()).abs() < 1e-9;
    if valid {
        Ok(())
    } else {
        Err(CoreError::InvalidSublevel { f, m_f })
    }
}
