//! Closed-form lattice analytics for comb-generated adiabatic gratings:
//! lattice constant, modulation depth, recoil energy, Bragg and propagation
//! velocities, Landau-Zener adiabaticity, the interband-tunneling criterion,
//! and the (Ω, d) regime diagram. All formulas use |g_F| so lengths and
//! velocities come out positive.

use crate::constants::{H, HBAR, MU_B};
use crate::error::{CoreError, Result};
use crate::species::AtomSpecies;

/// Lattice quantities derived from a comb spacing and drive strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    /// Lattice constant (m).
    pub lattice_constant: f64,
    /// Modulation depth (J); non-positive means no lattice.
    pub depth: f64,
    /// Recoil energy (J).
    pub recoil: f64,
    /// Bragg-matched atomic velocity (m/s).
    pub bragg_velocity: f64,
    /// Grating propagation velocity d/t_n (m/s), when a ramp period is given.
    pub propagation_velocity: Option<f64>,
    /// Ramp period (s).
    pub ramp_period: Option<f64>,
}

/// Depth with its "no lattice" flag; the value may legitimately be <= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationDepth {
    pub energy: f64,
    pub lattice_forms: bool,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CoreError::DomainError(format!("{name} must be positive, got {v}")))
    }
}

/// d = 2ħ·Δω / (μ_B·|g_F|·b)
pub fn lattice_constant(delta_omega: f64, gradient: f64, g_f: f64) -> Result<f64> {
    positive("delta_omega", delta_omega)?;
    positive("gradient", gradient)?;
    if g_f == 0.0 {
        return Err(CoreError::DomainError("g_F must be nonzero".into()));
    }
    Ok(2.0 * HBAR * delta_omega / (MU_B * g_f.abs() * gradient))
}

/// V_ad = ħ(Δω/2 − Ω); flagged "no lattice" when the depth is not positive.
pub fn modulation_depth(delta_omega: f64, rabi: f64) -> Result<ModulationDepth> {
    positive("delta_omega", delta_omega)?;
    if rabi < 0.0 {
        return Err(CoreError::DomainError("rabi must be >= 0".into()));
    }
    let energy = HBAR * (0.5 * delta_omega - rabi);
    Ok(ModulationDepth { energy, lattice_forms: energy > 0.0 })
}

/// E_r = h² / (8·m·d²)
pub fn recoil_energy(species: &AtomSpecies, lattice_const: f64) -> Result<f64> {
    positive("d", lattice_const)?;
    Ok(H * H / (8.0 * species.mass * lattice_const * lattice_const))
}

/// v = h / (m·d)
pub fn bragg_velocity(species: &AtomSpecies, lattice_const: f64) -> Result<f64> {
    positive("d", lattice_const)?;
    Ok(H / (species.mass * lattice_const))
}

/// v = d / t_n
pub fn propagation_velocity(lattice_const: f64, ramp_period: f64) -> Result<f64> {
    positive("d", lattice_const)?;
    positive("t_n", ramp_period)?;
    Ok(lattice_const / ramp_period)
}

/// Probability of staying on the adiabatic branch when crossing a resonance
/// at speed v: P = 1 − exp(−h·Ω² / (μ_B·|g_F|·v·b)). The v = 0 limit is 1.
pub fn landau_zener_probability(rabi: f64, velocity: f64, gradient: f64, g_f: f64) -> Result<f64> {
    positive("gradient", gradient)?;
    if g_f == 0.0 {
        return Err(CoreError::DomainError("g_F must be nonzero".into()));
    }
    if rabi < 0.0 || velocity < 0.0 {
        return Err(CoreError::DomainError("rabi and velocity must be >= 0".into()));
    }
    if velocity == 0.0 {
        return Ok(1.0);
    }
    let exponent = H * rabi * rabi / (MU_B * g_f.abs() * velocity * gradient);
    Ok(1.0 - (-exponent).exp())
}

/// Adiabaticity ratio m·Ω²·d / (μ_B·|g_F|·b), the Landau-Zener exponent
/// evaluated at the Bragg velocity. "Adiabatic" means ratio >= margin.
pub fn adiabaticity_margin(
    species: &AtomSpecies,
    rabi: f64,
    lattice_const: f64,
    gradient: f64,
    g_f: f64,
) -> Result<f64> {
    positive("d", lattice_const)?;
    positive("gradient", gradient)?;
    positive("rabi", rabi)?;
    if g_f == 0.0 {
        return Err(CoreError::DomainError("g_F must be nonzero".into()));
    }
    Ok(species.mass * rabi * rabi * lattice_const / (MU_B * g_f.abs() * gradient))
}

/// Interband-tunneling ratio (π/4)·V_ad² / (E_r·m·a·d) under acceleration a.
/// "Bloch safe" means ratio >= margin.
pub fn bloch_margin(species: &AtomSpecies, depth: f64, lattice_const: f64, accel: f64) -> Result<f64> {
    positive("d", lattice_const)?;
    positive("a", accel)?;
    if depth < 0.0 {
        return Err(CoreError::DomainError("depth must be >= 0".into()));
    }
    let recoil = recoil_energy(species, lattice_const)?;
    Ok(std::f64::consts::FRAC_PI_4 * depth * depth
        / (recoil * species.mass * accel * lattice_const))
}

/// Gradient at which the grating propagation velocity equals the Bragg
/// velocity: b = sqrt(2ħm/(π·t_n))·Δω/(μ_B·|g_F|).
pub fn bragg_gradient(species: &AtomSpecies, delta_omega: f64, ramp_period: f64, g_f: f64) -> Result<f64> {
    positive("delta_omega", delta_omega)?;
    positive("t_n", ramp_period)?;
    if g_f == 0.0 {
        return Err(CoreError::DomainError("g_F must be nonzero".into()));
    }
    Ok((2.0 * HBAR * species.mass / (std::f64::consts::PI * ramp_period)).sqrt() * delta_omega
        / (MU_B * g_f.abs()))
}

/// Largest d solving V_ad(d) = E_r(d) at fixed Ω and b, with Δω eliminated
/// through the lattice-constant relation:
/// d·μ_B·|g_F|·b/4 − ħΩ = h²/(8·m·d²). Bracketed bisection to 1e-12 relative.
pub fn critical_depth_root(
    species: &AtomSpecies,
    rabi: f64,
    gradient: f64,
    g_f: f64,
) -> Result<f64> {
    positive("gradient", gradient)?;
    positive("rabi", rabi)?;
    if g_f == 0.0 {
        return Err(CoreError::DomainError("g_F must be nonzero".into()));
    }
    let c1 = MU_B * g_f.abs() * gradient;
    let f = |d: f64| 0.25 * d * c1 - HBAR * rabi - H * H / (8.0 * species.mass * d * d);
    // f is strictly increasing: bracket the single positive root
    let mut lo = 1e-12;
    let mut hi = 1e-3;
    let mut tries = 0;
    while f(lo) > 0.0 {
        lo *= 0.25;
        tries += 1;
        if tries > 200 {
            return Err(CoreError::BracketFailure { lo, hi });
        }
    }
    tries = 0;
    while f(hi) < 0.0 {
        hi *= 4.0;
        tries += 1;
        if tries > 200 {
            return Err(CoreError::BracketFailure { lo, hi });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bundles the scalar relations at one (Δω, Ω, b, t_n) operating point.
pub fn lattice_params(
    species: &AtomSpecies,
    g_f: f64,
    delta_omega: f64,
    rabi: f64,
    gradient: f64,
    ramp_period: Option<f64>,
) -> Result<LatticeParams> {
    let d = lattice_constant(delta_omega, gradient, g_f)?;
    let depth = modulation_depth(delta_omega, rabi)?;
    let recoil = recoil_energy(species, d)?;
    let v_brg = bragg_velocity(species, d)?;
    let v_prop = match ramp_period {
        Some(t) => Some(propagation_velocity(d, t)?),
        None => None,
    };
    Ok(LatticeParams {
        lattice_constant: d,
        depth: depth.energy,
        recoil,
        bragg_velocity: v_brg,
        propagation_velocity: v_prop,
        ramp_period,
    })
}

// ---------------------------------------------------------------------------
// regime diagram
// ---------------------------------------------------------------------------

/// Classification flags of one (Ω, d) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeCell {
    pub adiabaticity_ratio: f64,
    pub depth: f64,
    pub recoil: f64,
    pub bloch_ratio: f64,
    pub adiabatic: bool,
    pub deep: bool,
    pub bloch_safe: bool,
}

/// Raster classification of the (Ω, d) plane against the three criteria,
/// plus analytic boundary polylines.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeDiagram {
    pub omega_axis: Vec<f64>,
    pub d_axis: Vec<f64>,
    /// Row-major cells: `cells[i_omega * d_axis.len() + i_d]`.
    pub cells: Vec<RegimeCell>,
    /// Analytic (Ω, d) polylines: adiabaticity ratio = margin.
    pub adiabatic_boundary: Vec<(f64, f64)>,
    /// Analytic depth-equals-recoil curve d(Ω).
    pub depth_boundary: Vec<(f64, f64)>,
    /// Interband-tunneling boundary bloch ratio = margin.
    pub bloch_boundary: Vec<(f64, f64)>,
    pub gradient: f64,
    pub accel: f64,
    pub margin: f64,
    pub species: String,
}

/// Classifies a single operating point; the diagram is this applied per cell.
pub fn classify_point(
    species: &AtomSpecies,
    g_f: f64,
    rabi: f64,
    d: f64,
    gradient: f64,
    accel: f64,
    margin: f64,
) -> Result<RegimeCell> {
    // Δω implied by the lattice-constant relation
    let delta_omega = 0.5 * d * MU_B * g_f.abs() * gradient / HBAR;
    let depth = modulation_depth(delta_omega, rabi)?;
    let recoil = recoil_energy(species, d)?;
    let adiabaticity = adiabaticity_margin(species, rabi, d, gradient, g_f)?;
    let clamped_depth = depth.energy.max(0.0);
    let bloch = bloch_margin(species, clamped_depth, d, accel)?;
    Ok(RegimeCell {
        adiabaticity_ratio: adiabaticity,
        depth: depth.energy,
        recoil,
        bloch_ratio: bloch,
        adiabatic: adiabaticity >= margin,
        deep: depth.energy >= recoil,
        bloch_safe: bloch >= margin,
    })
}

/// Builds the regime diagram over log-spaced (Ω, d) axes.
#[allow(clippy::too_many_arguments)]
pub fn regime_diagram(
    species: &AtomSpecies,
    g_f: f64,
    omega_range: (f64, f64),
    d_range: (f64, f64),
    resolution: (usize, usize),
    gradient: f64,
    accel: f64,
    margin: f64,
) -> Result<RegimeDiagram> {
    if resolution.0 < 2 || resolution.1 < 2 {
        return Err(CoreError::DomainError("resolution must be >= 2 per axis".into()));
    }
    positive("omega_min", omega_range.0)?;
    positive("d_min", d_range.0)?;
    if omega_range.1 <= omega_range.0 || d_range.1 <= d_range.0 {
        return Err(CoreError::DomainError("ranges must be increasing".into()));
    }
    let omega_axis = log_space(omega_range.0, omega_range.1, resolution.0);
    let d_axis = log_space(d_range.0, d_range.1, resolution.1);
    let mut cells = Vec::with_capacity(omega_axis.len() * d_axis.len());
    for &w in &omega_axis {
        for &d in &d_axis {
            cells.push(classify_point(species, g_f, w, d, gradient, accel, margin)?);
        }
    }

    let c1 = MU_B * g_f.abs() * gradient;
    let mut adiabatic_boundary = Vec::with_capacity(omega_axis.len());
    let mut depth_boundary = Vec::with_capacity(omega_axis.len());
    let mut bloch_boundary = Vec::with_capacity(omega_axis.len());
    for &w in &omega_axis {
        adiabatic_boundary.push((w, margin * c1 / (species.mass * w * w)));
        depth_boundary.push((w, critical_depth_root(species, w, gradient, g_f)?));
        if let Some(d) = bloch_boundary_root(w, c1, accel, margin) {
            bloch_boundary.push((w, d));
        }
    }

    Ok(RegimeDiagram {
        omega_axis,
        d_axis,
        cells,
        adiabatic_boundary,
        depth_boundary,
        bloch_boundary,
        gradient,
        accel,
        margin,
        species: species.name.clone(),
    })
}

/// d at which the interband ratio equals the margin: monotone bisection of
/// 2π·d·(d·c1/4 − ħΩ)² / (h²·a) = margin, above the zero-depth threshold.
/// The mass cancels between the recoil energy and the force term.
fn bloch_boundary_root(rabi: f64, c1: f64, accel: f64, margin: f64) -> Option<f64> {
    let d0 = 4.0 * HBAR * rabi / c1; // depth vanishes here
    let ratio = |d: f64| {
        let depth = 0.25 * d * c1 - HBAR * rabi;
        2.0 * std::f64::consts::PI * d * depth * depth / (H * H * accel)
    };
    // expand upward until ratio exceeds margin
    let mut lo = d0 * (1.0 + 1e-9);
    let mut hi = d0.max(1e-9) * 2.0;
    let mut tries = 0;
    while ratio(hi) < margin {
        hi *= 2.0;
        tries += 1;
        if tries > 300 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) < margin {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

// ---------------------------------------------------------------------------
// grid measurements (oracles for the closed forms)
// ---------------------------------------------------------------------------

/// Peak-to-peak value of one branch over a position interval.
pub fn measured_depth(
    positions: &[f64],
    values: &[f64],
    interval: (f64, f64),
) -> Result<f64> {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut seen = false;
    for (z, v) in positions.iter().zip(values) {
        if *z >= interval.0 && *z <= interval.1 {
            min = min.min(*v);
            max = max.max(*v);
            seen = true;
        }
    }
    if !seen {
        return Err(CoreError::EmptyRegion { lo: interval.0, hi: interval.1 });
    }
    Ok(max - min)
}

/// Mean spacing of the branch minima, located by parabolic interpolation of
/// sampled local minima below `min + prominence·(max − min)`. The prominence
/// gate rejects the shallow sampled dips the switch-point jumps create.
pub fn measured_period(positions: &[f64], values: &[f64], prominence: f64) -> Result<f64> {
    let minima = branch_minima(positions, values, prominence);
    if minima.len() < 2 {
        return Err(CoreError::DomainError(format!(
            "need at least 2 lattice minima, found {}",
            minima.len()
        )));
    }
    // least-squares slope of position vs minimum index
    let n = minima.len() as f64;
    let mean_i = (n - 1.0) / 2.0;
    let mean_z = minima.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, z) in minima.iter().enumerate() {
        let di = i as f64 - mean_i;
        num += di * (z - mean_z);
        den += di * di;
    }
    Ok(num / den)
}

/// Sub-grid positions of the prominent local minima of a sampled branch.
pub fn branch_minima(positions: &[f64], values: &[f64], prominence: f64) -> Vec<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let threshold = lo + prominence * (hi - lo);
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (y1, y2, y3) = (values[i - 1], values[i], values[i + 1]);
        if y2 < y1 && y2 <= y3 && y2 < threshold {
            let denom = y1 - 2.0 * y2 + y3;
            let shift = if denom > 0.0 { 0.5 * (y1 - y3) / denom } else { 0.0 };
            let dz = positions[i + 1] - positions[i];
            out.push(positions[i] + shift * dz);
        }
    }
    out
}
