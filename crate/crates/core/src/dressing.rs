//! Dressed-state engine: two-level Hamiltonians and eigenvalues, off-resonant
//! shifts, local-resonance selection among comb components, Stark-sum
//! corrections, and the unfolding of piecewise dressed energies into
//! continuous adiabatic potentials, in 1D and 2D and for (2F+1)-level
//! manifolds.
//!
//! Resonance geometry is set by the Zeeman splitting magnitude
//! u(z) = μ_B·|g_F|·|B(z)|, so species with negative g-factors produce the
//! same potentials as their positive-g counterparts. The raw two-level
//! operations below take the signed g_F and evaluate their formulas verbatim.

use std::fmt;
use std::sync::Arc;

use crate::comb::{ModelWarning, RfComb};
use crate::constants::{G_EARTH, HBAR, MU_B};
use crate::eigen;
use crate::error::{CoreError, Result};
use crate::field::FieldModel;
use crate::species::{AtomSpecies, Manifold};

/// Minimum grid points per fully-covered resonance region.
pub const MIN_POINTS_PER_REGION: usize = 8;

/// Position-dependent multiplier applied to every component's Rabi frequency,
/// for drives whose polarization geometry varies across the trap. The default
/// (absent) profile is the constant 1.
pub type RabiProfile = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A ± pair of dressed energies (J). `plus` carries the branch the formulas
/// write with the upper sign; for the exact eigenvalues `plus >= 0 >= minus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyPair {
    pub plus: f64,
    pub minus: f64,
}

impl EnergyPair {
    pub fn gap(&self) -> f64 {
        self.plus - self.minus
    }
}

/// Options for the unfolding operations.
#[derive(Clone, Default)]
pub struct UnfoldOptions {
    /// Correct detunings with the combined Stark shift of the non-resonant
    /// components.
    pub stark: bool,
    /// Add the gravitational term m·g·z to every branch.
    pub gravity: bool,
    /// The coupled sublevel pair for the two-level reduction. Defaults to
    /// (-1/2, +1/2) when F = 1/2; required otherwise.
    pub m_pair: Option<(f64, f64)>,
    /// Optional spatial Rabi-frequency profile.
    pub rabi_profile: Option<RabiProfile>,
}

impl fmt::Debug for UnfoldOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnfoldOptions")
            .field("stark", &self.stark)
            .field("gravity", &self.gravity)
            .field("m_pair", &self.m_pair)
            .field("rabi_profile", &self.rabi_profile.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

impl UnfoldOptions {
    pub fn stark(mut self, on: bool) -> Self {
        self.stark = on;
        self
    }
    pub fn gravity(mut self, on: bool) -> Self {
        self.gravity = on;
        self
    }
}

/// Unfolded adiabatic potentials on a 1D position grid.
///
/// `branches[k]` is the k-th continuous branch, labelled by its low-field
/// diabatic character m_F = -F + k (two levels: k = 0 is the "-" branch).
/// Unfolded branches cross, so the label order is fixed by provenance, not by
/// pointwise sorting.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticPotentialGrid {
    pub positions: Vec<f64>,
    pub branches: Vec<Vec<f64>>,
    pub stark_corrected: bool,
    pub gravity: bool,
    pub species: String,
    pub field: FieldModel,
    pub warnings: Vec<ModelWarning>,
}

impl AdiabaticPotentialGrid {
    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Pointwise adiabatic potentials over an (x, z) grid; values stored row-major
/// as `branches[b][ix * z.len() + iz]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialMap2D {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub branches: Vec<Vec<f64>>,
    pub stark_corrected: bool,
    pub gravity: bool,
    pub species: String,
    pub field: FieldModel,
    pub warnings: Vec<ModelWarning>,
}

impl PotentialMap2D {
    pub fn value(&self, branch: usize, ix: usize, iz: usize) -> f64 {
        self.branches[branch][ix * self.z.len() + iz]
    }
}

// ---------------------------------------------------------------------------
// raw two-level operations (signed g_F, formulas verbatim)
// ---------------------------------------------------------------------------

/// Rotating-frame two-level Hamiltonian: diagonal ±(μ_B·g_F·B − ħω)/2,
/// off-diagonal ħΩ/2. Symmetric and traceless.
pub fn two_level_hamiltonian(b_field: f64, omega: f64, rabi: f64, g_f: f64) -> [[f64; 2]; 2] {
    let half_det = 0.5 * (MU_B * g_f * b_field - HBAR * omega);
    let coupling = 0.5 * HBAR * rabi;
    [[half_det, coupling], [coupling, -half_det]]
}

/// Exact dressed eigenvalues ±(1/2)·sqrt(ħ²Ω² + (μ_B·g_F·B − ħω)²).
pub fn dressed_eigenvalues(b_field: f64, omega: f64, rabi: f64, g_f: f64) -> EnergyPair {
    let det = MU_B * g_f * b_field - HBAR * omega;
    let e = 0.5 * (HBAR * rabi).hypot(det);
    EnergyPair { plus: e, minus: -e }
}

/// First-order off-resonant expansion: ±δ/2 ± ħ²Ω²/(4δ) with
/// δ = μ_B·g_F·B − ħω. The second term is the dynamic Stark shift. The pair
/// follows the formula's signs, so for δ < 0 `plus` is the lower energy.
/// Exactly at resonance the expansion is singular.
pub fn off_resonant_shift(
    b_field: f64,
    omega: f64,
    rabi: f64,
    g_f: f64,
) -> Result<(EnergyPair, Option<ModelWarning>)> {
    let det = MU_B * g_f * b_field - HBAR * omega;
    if det == 0.0 {
        return Err(CoreError::SingularInput(
            "off-resonant expansion at zero detuning".into(),
        ));
    }
    let ratio = (HBAR * rabi / det).abs();
    let warning = (ratio >= 0.5).then_some(ModelWarning::LargeCouplingRatio { ratio });
    let plus = 0.5 * det + (HBAR * rabi).powi(2) / (4.0 * det);
    Ok((EnergyPair { plus, minus: -plus }, warning))
}

// ---------------------------------------------------------------------------
// position-dependent operations (resonance via |g_F|)
// ---------------------------------------------------------------------------

fn splitting_energy(z: f64, field: &FieldModel, g_f: f64) -> Result<f64> {
    Ok(MU_B * g_f.abs() * field.magnitude(&[z])?)
}

fn region_of(u: f64, comb: &RfComb) -> usize {
    let mut best = 0usize;
    let mut best_dist = f64::INFINITY;
    for (i, c) in comb.components().iter().enumerate() {
        let dist = (u - HBAR * c.omega).abs();
        if dist < best_dist {
            best_dist = dist;
            best = i;
        }
    }
    best
}

/// Index (0-based) of the comb component closest to resonance at `z`:
/// argmin over n of |μ_B·|g_F|·|B(z)| − ħω_n|; ties go to the lower index.
pub fn local_resonant_index(z: f64, field: &FieldModel, comb: &RfComb, g_f: f64) -> Result<usize> {
    Ok(region_of(splitting_energy(z, field, g_f)?, comb))
}

/// Combined Stark shift L_n(z) = Σ_{j≠n} ħ²Ω_j²/(4(u(z) − ħω_j)) of the
/// components that are not locally resonant (J).
pub fn stark_sum(
    z: f64,
    field: &FieldModel,
    comb: &RfComb,
    g_f: f64,
    excluded: usize,
) -> Result<f64> {
    let u = splitting_energy(z, field, g_f)?;
    stark_sum_at(u, comb, excluded, 1.0)
}

fn stark_sum_at(u: f64, comb: &RfComb, excluded: usize, rabi_scale: f64) -> Result<f64> {
    let mut total = 0.0;
    for (j, c) in comb.components().iter().enumerate() {
        if j == excluded {
            continue;
        }
        let det = u - HBAR * c.omega;
        if det.abs() <= 1e-15 * HBAR * c.omega {
            return Err(CoreError::SingularInput(format!(
                "component {j} is resonant while excluded index is {excluded}"
            )));
        }
        total += (HBAR * c.rabi * rabi_scale).powi(2) / (4.0 * det);
    }
    Ok(total)
}

/// Eigenvalues with the locally resonant component's detuning shifted by the
/// combined Stark term of all others:
/// ±(1/2)·sqrt(ħ²Ω² + (u − ħω_n + 2L_n)²).
pub fn corrected_eigenvalues(
    z: f64,
    field: &FieldModel,
    comb: &RfComb,
    g_f: f64,
) -> Result<EnergyPair> {
    let u = splitting_energy(z, field, g_f)?;
    let n = region_of(u, comb);
    let shift = stark_sum_at(u, comb, n, 1.0)?;
    let chi = u - HBAR * comb.omega(n) + 2.0 * shift;
    let e = 0.5 * (HBAR * comb.rabi(n)).hypot(chi);
    Ok(EnergyPair { plus: e, minus: -e })
}

// ---------------------------------------------------------------------------
// unfolding engine
// ---------------------------------------------------------------------------

/// Precomputed per-region bookkeeping shared by the 1D and 2D evaluators.
/// Everything position-dependent factors through u = μ_B|g_F||B|, so the
/// tables are built once per comb.
struct UnfoldEngine<'a> {
    comb: &'a RfComb,
    stark: bool,
    /// Branch count (2 for the closed-form path, 2F+1 for the tridiagonal).
    levels: usize,
    /// Sublevels -F..F when levels > 2 or the manifold pair when levels == 2.
    sublevels: Vec<f64>,
    f: f64,
    /// `slot[r][k]`: sorted-eigenvalue index branch k occupies in region r.
    slot: Vec<Vec<usize>>,
    /// `offset[r][k]`: unfolding constant of branch k in region r (J).
    offset: Vec<Vec<f64>>,
}

impl<'a> UnfoldEngine<'a> {
    /// Builds the branch/region tables. Branch k starts (region 0) with the
    /// diabatic character m = sublevels[k]; at each region boundary the
    /// sorted-index assignment reverses and the offset absorbs the photon
    /// energy m_right·ħ(ω_{r+1} − ω_r) of the component swap, which for
    /// F = 1/2 reproduces the two-level unfolding identically.
    fn new(comb: &'a RfComb, f: f64, stark: bool) -> Self {
        let levels = (2.0 * f).round() as usize + 1;
        let sublevels: Vec<f64> = (0..levels).map(|k| -f + k as f64).collect();
        let regions = comb.len();
        let mut slot = Vec::with_capacity(regions);
        let mut offset = Vec::with_capacity(regions);
        let first: Vec<usize> = (0..levels).map(|k| levels - 1 - k).collect();
        let first_off: Vec<f64> = sublevels.iter().map(|m| m * HBAR * comb.omega(0)).collect();
        slot.push(first);
        offset.push(first_off);
        for r in 0..regions - 1 {
            let d_omega = comb.omega(r + 1) - comb.omega(r);
            let mut next_slot = vec![0usize; levels];
            let mut next_off = vec![0.0; levels];
            for k in 0..levels {
                let i = slot[r][k];
                let m_right = sublevels[i];
                next_off[k] = offset[r][k] + m_right * HBAR * d_omega;
                next_slot[k] = levels - 1 - i;
            }
            slot.push(next_slot);
            offset.push(next_off);
        }
        Self { comb, stark, levels, sublevels, f, slot, offset }
    }

    /// Stark-corrected (or bare) detuning of region r at splitting u.
    fn detuning(&self, u: f64, r: usize, rabi_scale: f64) -> Result<f64> {
        let mut chi = u - HBAR * self.comb.omega(r);
        if self.stark {
            chi += 2.0 * stark_sum_at(u, self.comb, r, rabi_scale)?;
        }
        Ok(chi)
    }

    /// Branch energies at splitting u, ordered by branch label.
    fn eval(&self, u: f64, rabi_scale: f64) -> Result<Vec<f64>> {
        let r = region_of(u, self.comb);
        let chi = self.detuning(u, r, rabi_scale)?;
        let rabi = self.comb.rabi(r) * rabi_scale;
        if self.levels == 2 {
            let e = 0.5 * (HBAR * rabi).hypot(chi);
            let lam = [-e, e];
            Ok((0..2).map(|k| lam[self.slot[r][k]] + self.offset[r][k]).collect())
        } else {
            let diag: Vec<f64> = self.sublevels.iter().map(|m| m * chi).collect();
            let off: Vec<f64> = (0..self.levels - 1)
                .map(|i| {
                    let m = self.sublevels[i];
                    let m2 = self.sublevels[i + 1];
                    0.5 * HBAR * rabi * (self.f * (self.f + 1.0) - m * m2).sqrt()
                })
                .collect();
            let lam = eigen::tridiagonal_eigenvalues(&diag, &off)
                .map_err(|_| CoreError::EigenFailure { position: f64::NAN })?;
            Ok((0..self.levels)
                .map(|k| lam[self.slot[r][k]] + self.offset[r][k])
                .collect())
        }
    }
}

/// Analytic switch boundaries of a Linear1D field on the positive axis, as
/// (z, region-below, region-above) with regions 0-based, ascending in z.
fn linear_boundaries(field: &FieldModel, comb: &RfComb, g_f: f64) -> Vec<(f64, usize, usize)> {
    let FieldModel::Linear1D { gradient, offset } = *field else {
        return Vec::new();
    };
    if gradient <= 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for n in 0..comb.len() - 1 {
        let u_b = 0.5 * HBAR * (comb.omega(n) + comb.omega(n + 1));
        let b_mag = u_b / (MU_B * g_f.abs());
        if b_mag < offset {
            continue; // this switch level is never reached
        }
        let z = (b_mag * b_mag - offset * offset).sqrt() / gradient;
        out.push((z, n, n + 1));
    }
    out
}

fn check_resolution(
    positions: &[f64],
    field: &FieldModel,
    comb: &RfComb,
    g_f: f64,
) -> Result<()> {
    if positions.len() < 2 || comb.len() < 2 {
        return Ok(());
    }
    let plus = linear_boundaries(field, comb, g_f);
    if plus.is_empty() {
        return Ok(());
    }
    // Mirror the boundaries onto the negative axis and collect the fully
    // covered inter-boundary intervals. An edge records the region entered
    // when crossing it moving toward +z.
    let mut edges: Vec<(f64, usize)> = Vec::new();
    for &(z, below, _) in plus.iter().rev() {
        if z > 0.0 {
            edges.push((-z, below));
        }
    }
    for &(z, _, above) in &plus {
        edges.push((z, above));
    }
    edges.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let lo = positions[0];
    let hi = positions[positions.len() - 1];
    // interval between consecutive edges, fully inside [lo, hi]
    for w in edges.windows(2) {
        let (za, ra) = w[0];
        let (zb, _) = w[1];
        if za < lo || zb > hi {
            continue;
        }
        let count = positions.iter().filter(|&&z| z >= za && z < zb).count();
        if count < MIN_POINTS_PER_REGION {
            return Err(CoreError::GridResolution {
                region: ra + 1,
                points: count,
                min: MIN_POINTS_PER_REGION,
            });
        }
    }
    Ok(())
}

fn validate_pair(f: f64, options: &UnfoldOptions) -> Result<(f64, f64)> {
    match options.m_pair {
        Some((a, b)) => {
            crate::species::validate_sublevel(f, a)?;
            crate::species::validate_sublevel(f, b)?;
            if ((a - b).abs() - 1.0).abs() > 1e-9 {
                return Err(CoreError::NonAdjacentSublevels(a, b));
            }
            Ok((a, b))
        }
        None if (f - 0.5).abs() < 1e-9 => Ok((-0.5, 0.5)),
        None => Err(CoreError::MissingSublevelPair { f }),
    }
}

/// Unfolds the locally dressed two-level energies along a 1D grid into the
/// two continuous adiabatic branches:
/// V_±(z) = (−1)^n·(E_± ∓ ħω_n/2) ∓ Σ_{k<n} (−1)^k·ħω_k, with n = n(z) the
/// locally resonant component (1-based in the sign factors) and E from the
/// exact eigenvalues or their Stark-corrected form.
pub fn unfold_adiabatic(
    grid: &[f64],
    field: &FieldModel,
    comb: &RfComb,
    species: &AtomSpecies,
    options: &UnfoldOptions,
) -> Result<AdiabaticPotentialGrid> {
    let manifold = *species.ground_manifold();
    validate_pair(manifold.f, options)?;
    let mut positions = grid.to_vec();
    if positions.is_empty() {
        return Err(CoreError::DomainError("empty position grid".into()));
    }
    positions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    check_resolution(&positions, field, comb, manifold.g_f)?;

    let engine = UnfoldEngine::new(comb, 0.5, options.stark);
    let mut branches = vec![vec![0.0; positions.len()]; 2];
    for (i, &z) in positions.iter().enumerate() {
        let u = splitting_energy(z, field, manifold.g_f)?;
        let scale = options.rabi_profile.as_ref().map_or(1.0, |p| p(&[z]));
        let vals = engine.eval(u, scale)?;
        let grav = if options.gravity { species.mass * G_EARTH * z } else { 0.0 };
        for b in 0..2 {
            branches[b][i] = vals[b] + grav;
        }
    }
    finish_grid(positions, branches, field, comb, species, options)
}

/// Unfolded adiabatic potentials of a full (2F+1)-level manifold. At each
/// position the rotating-frame tridiagonal (diagonal m·(u − ħω_n), adjacent
/// coupling (ħΩ/2)·sqrt(F(F+1) − m·m')) is diagonalized; branches are carried
/// across region boundaries by the index-reversal relabeling with
/// photon-energy offsets, which reduces exactly to the two-level unfolding at
/// F = 1/2.
pub fn multilevel_potentials(
    grid: &[f64],
    field: &FieldModel,
    comb: &RfComb,
    species: &AtomSpecies,
    manifold: &Manifold,
    options: &UnfoldOptions,
) -> Result<AdiabaticPotentialGrid> {
    let mut positions = grid.to_vec();
    if positions.is_empty() {
        return Err(CoreError::DomainError("empty position grid".into()));
    }
    positions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    check_resolution(&positions, field, comb, manifold.g_f)?;

    let engine = UnfoldEngine::new(comb, manifold.f, options.stark);
    let levels = engine.levels;
    let mut branches = vec![vec![0.0; positions.len()]; levels];
    for (i, &z) in positions.iter().enumerate() {
        let u = splitting_energy(z, field, manifold.g_f)?;
        let scale = options.rabi_profile.as_ref().map_or(1.0, |p| p(&[z]));
        let vals = engine.eval(u, scale).map_err(|e| match e {
            CoreError::EigenFailure { .. } => CoreError::EigenFailure { position: z },
            other => other,
        })?;
        let grav = if options.gravity { species.mass * G_EARTH * z } else { 0.0 };
        for b in 0..levels {
            branches[b][i] = vals[b] + grav;
        }
    }
    finish_grid(positions, branches, field, comb, species, options)
}

fn finish_grid(
    positions: Vec<f64>,
    branches: Vec<Vec<f64>>,
    field: &FieldModel,
    comb: &RfComb,
    species: &AtomSpecies,
    options: &UnfoldOptions,
) -> Result<AdiabaticPotentialGrid> {
    for b in &branches {
        if b.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::DomainError("non-finite potential value".into()));
        }
    }
    Ok(AdiabaticPotentialGrid {
        positions,
        branches,
        stark_corrected: options.stark,
        gravity: options.gravity,
        species: species.name.clone(),
        field: *field,
        warnings: comb.validity_warnings(),
    })
}

/// Pointwise adiabatic potentials over a 2D quadrupole field. Values depend
/// on position only through |B(x,z)|, so iso-potential contours follow the
/// field's elliptic contours. Uses the two-level closed form for F = 1/2 (or
/// an explicit pair), the tridiagonal machinery otherwise. Gravity acts along
/// the second (z) coordinate.
pub fn potential_map_2d(
    x_grid: &[f64],
    z_grid: &[f64],
    field: &FieldModel,
    comb: &RfComb,
    species: &AtomSpecies,
    manifold: &Manifold,
    options: &UnfoldOptions,
) -> Result<PotentialMap2D> {
    if field.dimension() != 2 {
        return Err(CoreError::DimensionMismatch { expected: 2, got: field.dimension() });
    }
    if x_grid.is_empty() || z_grid.is_empty() {
        return Err(CoreError::DomainError("empty position grid".into()));
    }
    let two_level = options.m_pair.is_some() || (manifold.f - 0.5).abs() < 1e-9;
    if two_level {
        validate_pair(manifold.f, options)?;
    }
    let mut x = x_grid.to_vec();
    let mut z = z_grid.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    z.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let f_eff = if two_level { 0.5 } else { manifold.f };
    let engine = UnfoldEngine::new(comb, f_eff, options.stark);
    let levels = engine.levels;
    let mut branches = vec![vec![0.0; x.len() * z.len()]; levels];
    for (ix, &xv) in x.iter().enumerate() {
        for (iz, &zv) in z.iter().enumerate() {
            let u = MU_B * manifold.g_f.abs() * field.magnitude(&[xv, zv])?;
            let scale = options.rabi_profile.as_ref().map_or(1.0, |p| p(&[xv, zv]));
            let vals = engine.eval(u, scale).map_err(|e| match e {
                CoreError::EigenFailure { .. } => CoreError::EigenFailure { position: zv },
                other => other,
            })?;
            let grav = if options.gravity { species.mass * G_EARTH * zv } else { 0.0 };
            for b in 0..levels {
                branches[b][ix * z.len() + iz] = vals[b] + grav;
            }
        }
    }
    for b in &branches {
        if b.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::DomainError("non-finite potential value".into()));
        }
    }
    Ok(PotentialMap2D {
        x,
        z,
        branches,
        stark_corrected: options.stark,
        gravity: options.gravity,
        species: species.name.clone(),
        field: *field,
        warnings: comb.validity_warnings(),
    })
}

/// Analytic switch positions (positive axis) where the locally resonant
/// component changes, for a Linear1D field: |B| such that
/// u = ħ(ω_n + ω_{n+1})/2.
pub fn switch_positions(field: &FieldModel, comb: &RfComb, g_f: f64) -> Vec<f64> {
    linear_boundaries(field, comb, g_f).into_iter().map(|(z, _, _)| z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn li6() -> AtomSpecies {
        AtomSpecies::lithium6()
    }

    fn fig2_comb() -> RfComb {
        RfComb::uniform_rabi(&[TAU * 2e3, TAU * 4e3, TAU * 8e3], TAU * 700.0).unwrap()
    }

    #[test]
    fn hamiltonian_structure() {
        let h = two_level_hamiltonian(1e-4, TAU * 5e3, TAU * 700.0, -2.0 / 3.0);
        assert_eq!(h[0][1], h[1][0]);
        assert_eq!(h[0][0], -h[1][1]);
        let det = MU_B * (-2.0 / 3.0) * 1e-4 - HBAR * TAU * 5e3;
        assert!((h[0][0] - 0.5 * det).abs() < 1e-45);
        assert!((h[0][1] - 0.5 * HBAR * TAU * 700.0).abs() < 1e-45);
    }

    #[test]
    fn hamiltonian_zero_on_resonance_without_coupling() {
        // mu_B g_F B = hbar omega, Omega = 0
        let g_f = -2.0 / 3.0;
        let omega = TAU * 5e3;
        let b = HBAR * omega / (MU_B * g_f);
        let h = two_level_hamiltonian(b, omega, 0.0, g_f);
        for row in h {
            for v in row {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn eigenvalues_on_resonance_give_rabi_gap() {
        let g_f = -2.0 / 3.0;
        let omega = TAU * 5e3;
        let rabi = TAU * 700.0;
        let b = HBAR * omega / (MU_B * g_f);
        let pair = dressed_eigenvalues(b, omega, rabi, g_f);
        let gap = pair.gap();
        assert!((gap - crate::constants::H * 700.0).abs() <= 1e-12 * gap);
        assert_eq!(pair.plus, -pair.minus);
    }

    #[test]
    fn eigenvalues_without_coupling() {
        let pair = dressed_eigenvalues(2e-4, TAU * 5e3, 0.0, 0.5);
        let det = MU_B * 0.5 * 2e-4 - HBAR * TAU * 5e3;
        assert!((pair.plus - 0.5 * det.abs()).abs() <= 1e-15 * pair.plus);
    }

    #[test]
    fn off_resonant_matches_detuning_at_zero_rabi() {
        let (pair, warn) = off_resonant_shift(3e-4, TAU * 5e3, 0.0, 0.5).unwrap();
        let det = MU_B * 0.5 * 3e-4 - HBAR * TAU * 5e3;
        assert_eq!(pair.plus, 0.5 * det);
        assert!(warn.is_none());
    }

    #[test]
    fn off_resonant_shift_odd_in_detuning() {
        let omega = TAU * 5e3;
        let g_f = 0.5;
        let b_res = HBAR * omega / (MU_B * g_f);
        let rabi = TAU * 100.0;
        let (hi, _) = off_resonant_shift(b_res * 1.3, omega, rabi, g_f).unwrap();
        let (lo, _) = off_resonant_shift(b_res * 0.7, omega, rabi, g_f).unwrap();
        let det_hi = MU_B * g_f * b_res * 1.3 - HBAR * omega;
        let det_lo = MU_B * g_f * b_res * 0.7 - HBAR * omega;
        let stark_hi = hi.plus - 0.5 * det_hi;
        let stark_lo = lo.plus - 0.5 * det_lo;
        assert!(stark_hi > 0.0 && stark_lo < 0.0);
    }

    #[test]
    fn off_resonant_singular_and_warning() {
        let omega = TAU * 5e3;
        let g_f = 0.5;
        let b_res = HBAR * omega / (MU_B * g_f);
        assert!(off_resonant_shift(b_res, omega, TAU * 100.0, g_f).is_err());
        let near = b_res * 1.001;
        let (_, warn) = off_resonant_shift(near, omega, TAU * 700.0, g_f).unwrap();
        assert!(warn.is_some(), "ratio above 0.5 should warn");
    }

    #[test]
    fn taylor_remainder_bound() {
        // |approx - exact| <= hbar^4 Omega^4 / (8 |det|^3), exact branch taken
        // with the detuning's sign.
        let mut state = 0xdead_beef_cafe_f00du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state as f64 / u64::MAX as f64
        };
        for _ in 0..5000 {
            let omega = TAU * (1e3 + 9e3 * next());
            let g_f = if next() > 0.5 { 0.5 } else { -2.0 / 3.0 };
            let b = (0.2 + 5.0 * next()) * 1e-4;
            let det = MU_B * g_f * b - HBAR * omega;
            let rabi = 0.45 * det.abs() / HBAR * next();
            let (pair, _) = off_resonant_shift(b, omega, rabi, g_f).unwrap();
            let exact = det.signum() * dressed_eigenvalues(b, omega, rabi, g_f).plus;
            let bound = (HBAR * rabi).powi(4) / (8.0 * det.abs().powi(3));
            assert!(
                (pair.plus - exact).abs() <= bound + 1e-18 * exact.abs(),
                "remainder exceeded bound"
            );
        }
    }

    #[test]
    fn closed_form_matches_tridiagonal_solver() {
        let mut state = 0x1234_5678_9abc_def0u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state as f64 / u64::MAX as f64
        };
        for _ in 0..2000 {
            let b = next() * 5e-4;
            let omega = TAU * (0.5e3 + 9e3 * next());
            let rabi = TAU * 2e3 * next();
            let g_f = [-2.0 / 3.0, 0.5, -0.5, 1.0][(next() * 4.0) as usize % 4];
            let h = two_level_hamiltonian(b, omega, rabi, g_f);
            let eig = eigen::tridiagonal_eigenvalues(&[h[0][0], h[1][1]], &[h[0][1]]).unwrap();
            let pair = dressed_eigenvalues(b, omega, rabi, g_f);
            let scale = pair.plus.max(1e-300);
            assert!((eig[0] - pair.minus).abs() <= 1e-12 * scale);
            assert!((eig[1] - pair.plus).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn single_component_always_selected() {
        let comb = RfComb::uniform_rabi(&[TAU * 5e3], TAU * 700.0).unwrap();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        for z in [0.0, 1e-7, 5e-6] {
            assert_eq!(local_resonant_index(z, &field, &comb, -2.0 / 3.0).unwrap(), 0);
        }
    }

    #[test]
    fn midpoint_tie_goes_to_lower_index() {
        let comb = fig2_comb();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let g_f = -2.0 / 3.0;
        // exact switch position between components 0 and 1
        let z = switch_positions(&field, &comb, g_f)[0];
        let n = local_resonant_index(z, &field, &comb, g_f).unwrap();
        assert!(n == 0 || n == 1);
        // nudge to the exact tie in u-space via the splitting itself
        let u_mid = 0.5 * HBAR * (comb.omega(0) + comb.omega(1));
        assert_eq!(region_of(u_mid, &comb), 0);
    }

    #[test]
    fn switch_positions_sit_at_analytic_midpoints() {
        let comb = fig2_comb();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let g_f = -2.0 / 3.0;
        let zs = switch_positions(&field, &comb, g_f);
        assert_eq!(zs.len(), 2);
        for (k, &z) in zs.iter().enumerate() {
            let u = MU_B * g_f.abs() * 2.0 * z;
            let mid = 0.5 * HBAR * (comb.omega(k) + comb.omega(k + 1));
            assert!((u - mid).abs() <= 1e-12 * mid);
        }
        // just below/above each switch the selected component flips
        for (k, &z) in zs.iter().enumerate() {
            let below = local_resonant_index(z * (1.0 - 1e-9), &field, &comb, g_f).unwrap();
            let above = local_resonant_index(z * (1.0 + 1e-9), &field, &comb, g_f).unwrap();
            assert_eq!(below, k);
            assert_eq!(above, k + 1);
        }
    }

    #[test]
    fn stark_sum_single_component_is_zero() {
        let comb = RfComb::uniform_rabi(&[TAU * 5e3], TAU * 700.0).unwrap();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        assert_eq!(stark_sum(1e-7, &field, &comb, -2.0 / 3.0, 0).unwrap(), 0.0);
    }

    #[test]
    fn stark_sum_two_component_arithmetic() {
        // at the resonance of component 0: L_0 = -hbar Omega^2 / (4 d_omega)
        let g_f = 0.5;
        let rabi = TAU * 300.0;
        let omegas = [TAU * 2e3, TAU * 5e3];
        let comb = RfComb::uniform_rabi(&omegas, rabi).unwrap();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let z = HBAR * omegas[0] / (MU_B * g_f * 2.0);
        let l = stark_sum(z, &field, &comb, g_f, 0).unwrap();
        let expected = -HBAR * rabi * rabi / (4.0 * (omegas[1] - omegas[0]));
        assert!((l - expected).abs() <= 1e-12 * expected.abs());
    }

    #[test]
    fn stark_sum_odd_under_detuning_reflection() {
        // mirroring every off-resonant detuning flips the sum's sign, and a
        // comb symmetric about the evaluation point cancels term by term
        let g_f = 0.5;
        let rabi = TAU * 300.0;
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let scale = MU_B * g_f * 2.0;
        let z = HBAR * TAU * 6e3 / scale;
        // comb A: detunings +{2,1} kHz; comb B mirrors them to -{1,2} kHz
        let a = RfComb::uniform_rabi(&[TAU * 4e3, TAU * 5e3, TAU * 6e3], rabi).unwrap();
        let b = RfComb::uniform_rabi(&[TAU * 6e3, TAU * 7e3, TAU * 8e3], rabi).unwrap();
        let l_a = stark_sum(z, &field, &a, g_f, 2).unwrap();
        let l_b = stark_sum(z, &field, &b, g_f, 0).unwrap();
        assert!(l_a > 0.0);
        assert!((l_a + l_b).abs() <= 1e-12 * l_a, "{l_a} vs {l_b}");

        let sym = RfComb::uniform_rabi(&[TAU * 2e3, TAU * 6e3, TAU * 10e3], rabi).unwrap();
        let l_sym = stark_sum(z, &field, &sym, g_f, 1).unwrap();
        assert!(l_sym.abs() <= 1e-12 * l_a, "symmetric terms must cancel, got {l_sym}");
    }

    #[test]
    fn stark_sum_singular_when_excluding_wrong_component() {
        let comb = fig2_comb();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let g_f: f64 = -2.0 / 3.0;
        // at the resonance of component 0 but excluding component 2
        let z = HBAR * comb.omega(0) / (MU_B * g_f.abs() * 2.0);
        assert!(matches!(
            stark_sum(z, &field, &comb, g_f, 2),
            Err(CoreError::SingularInput(_))
        ));
    }

    #[test]
    fn corrected_equals_plain_for_single_component() {
        let comb = RfComb::uniform_rabi(&[TAU * 5e3], TAU * 700.0).unwrap();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let g_f = -2.0 / 3.0;
        for z in [0.0, 1e-7, 2.7e-7, 1e-6] {
            let corr = corrected_eigenvalues(z, &field, &comb, g_f).unwrap();
            let u = MU_B * g_f.abs() * field.magnitude(&[z]).unwrap();
            let e = 0.5 * (HBAR * comb.rabi(0)).hypot(u - HBAR * comb.omega(0));
            assert!((corr.plus - e).abs() <= 1e-15 * e.max(1e-300));
            assert_eq!(corr.plus, -corr.minus);
        }
    }

    #[test]
    fn unfold_single_component_v_shapes() {
        // Omega -> 0: branches reduce to +-(1/2)|u - hbar w|, folded; the "+"
        // branch is hbar w/2 - u/2 for u < hbar w (region 1 sign flip).
        let comb = RfComb::uniform_rabi(&[TAU * 5e3], 1e-9).unwrap();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let species = li6();
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 2e-9).collect();
        let out =
            unfold_adiabatic(&grid, &field, &comb, &species, &UnfoldOptions::default()).unwrap();
        for (i, &z) in out.positions.iter().enumerate() {
            let u = MU_B * (2.0 / 3.0) * 2.0 * z;
            // folded: the "+" branch peaks at the resonance
            let expect_plus = 0.5 * HBAR * comb.omega(0) - 0.5 * (u - HBAR * comb.omega(0)).abs();
            assert!(
                (out.branches[1][i] - expect_plus).abs() <= 1e-9 * HBAR * comb.omega(0),
                "z={z}"
            );
            assert!((out.branches[0][i] + expect_plus).abs() <= 1e-9 * HBAR * comb.omega(0));
        }
    }

    #[test]
    fn unfold_branches_sum_to_zero_without_gravity() {
        let comb = fig2_comb();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let species = li6();
        let grid: Vec<f64> = (0..4000).map(|i| -0.8e-6 + i as f64 * 0.4e-9).collect();
        for stark in [false, true] {
            let out = unfold_adiabatic(
                &grid,
                &field,
                &comb,
                &species,
                &UnfoldOptions::default().stark(stark),
            )
            .unwrap();
            for i in 0..out.len() {
                let s = out.branches[0][i] + out.branches[1][i];
                assert!(s.abs() <= 1e-9 * HBAR * comb.omega(0), "sum {s}");
            }
        }
    }

    #[test]
    fn stark_correction_shrinks_every_switch_jump() {
        let comb = fig2_comb();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let g_f = -2.0 / 3.0;
        for (k, &z) in switch_positions(&field, &comb, g_f).iter().enumerate() {
            let u = MU_B * g_f.abs() * 2.0 * z;
            let jump = |stark: bool| {
                let engine = UnfoldEngine::new(&comb, 0.5, stark);
                let left = {
                    let chi = engine.detuning(u, k, 1.0).unwrap();
                    let e = 0.5 * (HBAR * comb.rabi(k)).hypot(chi);
                    let lam = [-e, e];
                    lam[engine.slot[k][1]] + engine.offset[k][1]
                };
                let right = {
                    let chi = engine.detuning(u, k + 1, 1.0).unwrap();
                    let e = 0.5 * (HBAR * comb.rabi(k + 1)).hypot(chi);
                    let lam = [-e, e];
                    lam[engine.slot[k + 1][1]] + engine.offset[k + 1][1]
                };
                (right - left).abs()
            };
            assert!(
                jump(true) < jump(false),
                "switch {k}: corrected {} !< uncorrected {}",
                jump(true),
                jump(false)
            );
        }
    }

    #[test]
    fn gravity_shifts_branches_by_mgz() {
        let comb = fig2_comb();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let species = li6();
        let grid: Vec<f64> = (0..300).map(|i| -0.6e-6 + i as f64 * 4e-9).collect();
        let base =
            unfold_adiabatic(&grid, &field, &comb, &species, &UnfoldOptions::default()).unwrap();
        let with_g = unfold_adiabatic(
            &grid,
            &field,
            &comb,
            &species,
            &UnfoldOptions::default().gravity(true),
        )
        .unwrap();
        for b in 0..2 {
            for i in 0..base.len() {
                let diff = with_g.branches[b][i] - base.branches[b][i];
                let expect = species.mass * G_EARTH * base.positions[i];
                assert!((diff - expect).abs() <= (1e-12 * expect.abs()).max(1e-45));
            }
        }
    }

    #[test]
    fn resolution_error_on_coarse_grid() {
        let comb = fig2_comb();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let species = li6();
        // a handful of points spanning several regions
        let grid: Vec<f64> = (0..12).map(|i| i as f64 * 6e-8).collect();
        let err = unfold_adiabatic(&grid, &field, &comb, &species, &UnfoldOptions::default());
        assert!(matches!(err, Err(CoreError::GridResolution { .. })), "{err:?}");
    }

    #[test]
    fn multilevel_reduces_to_two_level_at_f_half() {
        let comb = fig2_comb();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let species = li6();
        let manifold = species.manifolds[0];
        let grid: Vec<f64> = (0..3000).map(|i| -0.75e-6 + i as f64 * 0.5e-9).collect();
        for stark in [false, true] {
            let opts = UnfoldOptions::default().stark(stark);
            let two = unfold_adiabatic(&grid, &field, &comb, &species, &opts).unwrap();
            let multi =
                multilevel_potentials(&grid, &field, &comb, &species, &manifold, &opts).unwrap();
            let scale = HBAR * comb.omega(2);
            for b in 0..2 {
                for i in 0..two.len() {
                    assert!(
                        (two.branches[b][i] - multi.branches[b][i]).abs() <= 1e-10 * scale,
                        "stark={stark} b={b} i={i}"
                    );
                }
            }
        }
    }

    #[test]
    fn multilevel_gaps_at_resonance_equal_rabi() {
        // at u = hbar w_n the tridiagonal is Omega * J_x: eigenvalues m*hbar*Omega
        let rabi = TAU * 500.0;
        let comb = RfComb::uniform_rabi(&[TAU * 2e3, TAU * 4e3, TAU * 7e3], rabi).unwrap();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let species = AtomSpecies::lithium7();
        let manifold = species.manifolds[0]; // F = 2
        let g_f = manifold.g_f;
        let engine = UnfoldEngine::new(&comb, 2.0, false);
        for n in 0..comb.len() {
            let z = HBAR * comb.omega(n) / (MU_B * g_f.abs() * 2.0);
            let grid = [z];
            // bypass the resolution check with a single-point grid
            let out = multilevel_potentials(
                &grid,
                &field,
                &comb,
                &species,
                &manifold,
                &UnfoldOptions::default(),
            )
            .unwrap();
            // strip the unfolding constants to recover the local dressed
            // spectrum at the resonance; its adjacent gaps are hbar*Omega
            let mut vals: Vec<f64> =
                (0..5).map(|b| out.branches[b][0] - engine.offset[n][b]).collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for w in vals.windows(2) {
                let gap = w[1] - w[0];
                assert!(
                    (gap - HBAR * rabi).abs() <= 1e-9 * HBAR * rabi,
                    "gap {} vs {}",
                    gap,
                    HBAR * rabi
                );
            }
        }
    }

    #[test]
    fn multilevel_zero_rabi_is_diagonal() {
        let comb = RfComb::uniform_rabi(&[TAU * 2e3, TAU * 4e3], 0.0).unwrap();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let species = AtomSpecies::lithium7();
        let manifold = species.manifolds[0];
        let z = HBAR * comb.omega(0) / (MU_B * manifold.g_f * 2.0);
        let out = multilevel_potentials(
            &[z],
            &field,
            &comb,
            &species,
            &manifold,
            &UnfoldOptions::default(),
        )
        .unwrap();
        // on resonance with Omega = 0 every branch collapses onto the
        // bookkeeping constant m*hbar*w_1
        let mut vals: Vec<f64> = (0..5).map(|b| out.branches[b][0]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (k, v) in vals.iter().enumerate() {
            let m = -2.0 + k as f64;
            assert!((v - m * HBAR * comb.omega(0)).abs() <= 1e-9 * HBAR * comb.omega(0));
        }
    }

    #[test]
    fn map2d_depends_only_on_field_magnitude() {
        let field = FieldModel::quadrupole(1.4, 2.0, 0.0).unwrap();
        let comb = RfComb::uniform_rabi(&[TAU * 2e3, TAU * 4e3, TAU * 7e3], TAU * 500.0).unwrap();
        let species = li6();
        let manifold = species.manifolds[0];
        // centered construction keeps the grid exactly mirror-symmetric
        let xs: Vec<f64> = (0..21).map(|i| (i as f64 - 10.0) * 4e-8).collect();
        let zs = xs.clone();
        let map = potential_map_2d(
            &xs,
            &zs,
            &field,
            &comb,
            &species,
            &manifold,
            &UnfoldOptions::default(),
        )
        .unwrap();
        // symmetric grid: (x,z) vs (-x,-z) identical
        let n = xs.len();
        for b in 0..2 {
            for ix in 0..n {
                for iz in 0..n {
                    let a = map.value(b, ix, iz);
                    let c = map.value(b, n - 1 - ix, n - 1 - iz);
                    assert_eq!(a, c);
                }
            }
        }
        // equal |B| at two unrelated points gives equal potentials
        let b_target = field.magnitude(&[1e-7, 1e-7]).unwrap();
        // find x' with |B(x',0)| = b_target: x' = b_target/gx
        let x_alt = b_target / 1.4;
        let u = MU_B * manifold.g_f.abs() * b_target;
        let engine = UnfoldEngine::new(&comb, 0.5, false);
        let v1 = engine.eval(u, 1.0).unwrap();
        let u2 = MU_B * manifold.g_f.abs() * field.magnitude(&[x_alt, 0.0]).unwrap();
        let v2 = engine.eval(u2, 1.0).unwrap();
        assert!((v1[0] - v2[0]).abs() <= 1e-9 * HBAR * comb.omega(0));
    }

    #[test]
    fn map2d_resonance_rings_are_ellipses() {
        let (gx, gz) = (1.4, 2.0);
        let field = FieldModel::quadrupole(gx, gz, 0.0).unwrap();
        let comb = RfComb::uniform_rabi(&[TAU * 2e3, TAU * 4e3, TAU * 7e3], TAU * 500.0).unwrap();
        let g_f = 2.0 / 3.0;
        for n in 0..3 {
            let r = HBAR * comb.omega(n) / (MU_B * g_f);
            let (x_semi, z_semi) = (r / gx, r / gz);
            for k in 0..32 {
                let th = k as f64 / 32.0 * TAU;
                let (x, z) = (x_semi * th.cos(), z_semi * th.sin());
                let u = MU_B * g_f * field.magnitude(&[x, z]).unwrap();
                assert!(
                    (u - HBAR * comb.omega(n)).abs() <= 1e-12 * HBAR * comb.omega(n),
                    "point off the resonance ellipse"
                );
            }
        }
    }

    #[test]
    fn map2d_rejects_linear_field() {
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let comb = fig2_comb();
        let species = li6();
        let manifold = species.manifolds[0];
        assert!(potential_map_2d(
            &[0.0],
            &[0.0],
            &field,
            &comb,
            &species,
            &manifold,
            &UnfoldOptions::default()
        )
        .is_err());
    }

    #[test]
    fn explicit_pair_required_above_f_half() {
        let comb = fig2_comb();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let species = AtomSpecies::lithium7();
        let grid: Vec<f64> = (0..100).map(|i| i as f64 * 1e-8).collect();
        let err = unfold_adiabatic(&grid, &field, &comb, &species, &UnfoldOptions::default());
        assert!(matches!(err, Err(CoreError::MissingSublevelPair { .. })));
        let opts = UnfoldOptions { m_pair: Some((1.0, 2.0)), ..Default::default() };
        assert!(unfold_adiabatic(&grid, &field, &comb, &species, &opts).is_ok());
    }

    #[test]
    fn rabi_profile_scales_gap() {
        let comb = RfComb::uniform_rabi(&[TAU * 5e3], TAU * 700.0).unwrap();
        let field = FieldModel::linear(2.0, 0.0).unwrap();
        let species = li6();
        let g_f: f64 = -2.0 / 3.0;
        let z_res = HBAR * comb.omega(0) / (MU_B * g_f.abs() * 2.0);
        let grid = [z_res];
        let profile: RabiProfile = Arc::new(|_p: &[f64]| 0.5);
        let opts = UnfoldOptions { rabi_profile: Some(profile), ..Default::default() };
        let scaled = unfold_adiabatic(&grid, &field, &comb, &species, &opts).unwrap();
        // region 1 unfolding: V_+ - V_- = hbar*w_1 - 2E, so the dressed gap
        // at resonance is hbar*w_1 minus the branch difference
        let dressed_gap = HBAR * comb.omega(0) - (scaled.branches[1][0] - scaled.branches[0][0]);
        let expect = 0.5 * HBAR * TAU * 700.0;
        assert!((dressed_gap - expect).abs() <= 1e-9 * expect);
    }
}
