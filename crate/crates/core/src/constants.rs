//! Physical constants, CODATA 2018 snapshot.
//!
//! `H` (the Planck constant) is exact in the 2019 SI; `HBAR` is derived from
//! it so that h = 2π·ħ holds to the last bit. All quantities SI, all
//! frequencies in this crate are angular (rad/s) unless a name says otherwise.

/// Planck constant (J·s), exact.
pub const H: f64 = 6.62607015e-34;

/// Reduced Planck constant ħ = h/2π (J·s).
pub const HBAR: f64 = H / (2.0 * std::f64::consts::PI);

/// Bohr magneton (J/T).
pub const MU_B: f64 = 9.2740100783e-24;

/// Boltzmann constant (J/K), exact.
pub const K_B: f64 = 1.380649e-23;

/// Atomic mass unit (kg).
pub const ATOMIC_MASS: f64 = 1.66053906660e-27;

/// Standard gravitational acceleration (m/s²).
pub const G_EARTH: f64 = 9.80665;

/// Identifier for the constant snapshot, echoed into run manifests.
pub const SNAPSHOT: &str = "CODATA-2018";

/// The constant set bundled as a value, for provenance records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub mu_b: f64,
    pub hbar: f64,
    pub h: f64,
    pub k_b: f64,
    pub atomic_mass: f64,
    pub g_earth: f64,
}

impl PhysicalConstants {
    pub const fn codata2018() -> Self {
        Self {
            mu_b: MU_B,
            hbar: HBAR,
            h: H,
            k_b: K_B,
            atomic_mass: ATOMIC_MASS,
            g_earth: G_EARTH,
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata2018()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_is_two_pi_hbar() {
        let (h, hbar) = (H, HBAR);
        assert!((h - 2.0 * std::f64::consts::PI * hbar).abs() <= f64::EPSILON * h);
    }

    #[test]
    fn all_positive() {
        let c = PhysicalConstants::codata2018();
        for v in [c.mu_b, c.hbar, c.h, c.k_b, c.atomic_mass, c.g_earth] {
            assert!(v > 0.0 && v.is_finite());
        }
    }

    #[test]
    fn magnitudes_physical() {
        assert!(MU_B > 9.2e-24 && MU_B < 9.3e-24);
        assert!(HBAR > 1.05e-34 && HBAR < 1.06e-34);
        // mu_B/h ~ 1.3996 MHz/G
        assert!((MU_B / H / 1e10 - 1.3996).abs() < 1e-3);
    }
}
