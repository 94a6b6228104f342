//! Magnetic coupling strength between adjacent Zeeman sublevels driven by an
//! oscillating field. Only the field component transverse to the static-field
//! orientation couples, hence the cross product.

use crate::constants::{HBAR, MU_B};
use crate::error::{CoreError, Result};
use crate::species::validate_sublevel;

/// Rabi frequency Ω = (μ_B g_F / 4ħ)·|B_rf × ê_B|·sqrt(F(F+1) − m_F·m_F'),
/// returned as a magnitude in rad/s.
pub fn rabi_frequency(
    b_rf: [f64; 3],
    e_b: [f64; 3],
    f: f64,
    g_f: f64,
    m_f: f64,
    m_f_prime: f64,
) -> Result<f64> {
    validate_sublevel(f, m_f)?;
    validate_sublevel(f, m_f_prime)?;
    if ((m_f - m_f_prime).abs() - 1.0).abs() > 1e-9 {
        return Err(CoreError::NonAdjacentSublevels(m_f, m_f_prime));
    }
    let norm = norm3(e_b);
    if (norm - 1.0).abs() > 1e-12 {
        return Err(CoreError::NonUnitOrientation(norm));
    }
    let transverse = norm3(cross(b_rf, e_b));
    let spin_factor = (f * (f + 1.0) - m_f * m_f_prime).sqrt();
    Ok((MU_B * g_f / (4.0 * HBAR) * transverse * spin_factor).abs())
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}
