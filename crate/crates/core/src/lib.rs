//! Adiabatic ("dressed") potentials for atoms in static magnetic field
//! gradients irradiated by multifrequency rf or microwave fields, and the
//! lattice, Bragg, Landau-Zener, Bloch, and trap-shaping quantities built on
//! them.
//!
//! Conventions: SI units throughout; every frequency is angular (rad/s).
//! Config-style inputs with Hz-family suffixes are converted at the boundary
//! (see [`units`]). All operations are pure functions of their arguments;
//! values are immutable once constructed and safe to share across threads.

pub mod comb;
pub mod constants;
pub mod dressing;
pub mod eigen;
pub mod error;
pub mod field;
pub mod lattice;
pub mod rabi;
pub mod shaping;
pub mod species;
pub mod units;
pub mod waveform;

pub use comb::{CombComponent, ModelWarning, RfComb};
pub use dressing::{
    corrected_eigenvalues, dressed_eigenvalues, local_resonant_index, multilevel_potentials,
    off_resonant_shift, potential_map_2d, stark_sum, two_level_hamiltonian, unfold_adiabatic,
    AdiabaticPotentialGrid, EnergyPair, PotentialMap2D, UnfoldOptions,
};
pub use error::{CoreError, Result};
pub use field::FieldModel;
pub use species::{zeeman_energy, AtomSpecies, Manifold};
