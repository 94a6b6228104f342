//! Radio-frequency combs: an ordered list of drive components, each with its
//! own Rabi frequency.

use crate::error::{CoreError, Result};
use std::fmt;

/// One drive tone: angular frequency and Rabi frequency, both rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombComponent {
    pub omega: f64,
    pub rabi: f64,
}

/// Drive components labelled in ascending frequency order.
#[derive(Debug, Clone, PartialEq)]
pub struct RfComb {
    components: Vec<CombComponent>,
}

/// Non-fatal model-validity notices. Computation proceeds; callers decide
/// whether to surface them.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelWarning {
    /// The single-nearly-resonant-component picture degrades when adjacent
    /// components are closer than twice the largest Rabi frequency.
    NarrowSpacing { spacing: f64, max_rabi: f64 },
    /// Off-resonant expansion used outside its validity ratio.
    LargeCouplingRatio { ratio: f64 },
}

impl fmt::Display for ModelWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NarrowSpacing { spacing, max_rabi } => write!(
                f,
                "comb spacing {spacing:.6e} rad/s is below 2x max Rabi {max_rabi:.6e} rad/s; \
                 nearest-resonance model degrades"
            ),
            Self::LargeCouplingRatio { ratio } => write!(
                f,
                "coupling/detuning ratio {ratio:.3} exceeds 0.5; off-resonant expansion is crude"
            ),
        }
    }
}

impl RfComb {
    pub fn new(components: Vec<CombComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(CoreError::EmptyComb);
        }
        for (i, c) in components.iter().enumerate() {
            if !c.omega.is_finite() || c.omega <= 0.0 {
                return Err(CoreError::UnsortedComb(i));
            }
            if i > 0 && c.omega <= components[i - 1].omega {
                return Err(CoreError::UnsortedComb(i));
            }
            if c.rabi < 0.0 || !c.rabi.is_finite() {
                return Err(CoreError::NegativeRabi(i));
            }
        }
        Ok(Self { components })
    }

    /// Comb with one shared Rabi frequency across all components.
    pub fn uniform_rabi(omegas: &[f64], rabi: f64) -> Result<Self> {
        Self::new(omegas.iter().map(|&omega| CombComponent { omega, rabi }).collect())
    }

    pub fn components(&self) -> &[CombComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty combs
    }

    pub fn omega(&self, idx: usize) -> f64 {
        self.components[idx].omega
    }

    pub fn rabi(&self, idx: usize) -> f64 {
        self.components[idx].rabi
    }

    pub fn max_rabi(&self) -> f64 {
        self.components.iter().map(|c| c.rabi).fold(0.0, f64::max)
    }

    /// Smallest spacing between adjacent components; None for a single tone.
    pub fn min_spacing(&self) -> Option<f64> {
        self.components
            .windows(2)
            .map(|w| w[1].omega - w[0].omega)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }

    /// Mean spacing between adjacent components; 0 for a single tone.
    pub fn mean_spacing(&self) -> f64 {
        if self.components.len() < 2 {
            return 0.0;
        }
        (self.components.last().unwrap().omega - self.components[0].omega)
            / (self.components.len() - 1) as f64
    }

    /// Unfolding-approximation guard: spacing must exceed 2x max Rabi.
    pub fn validity_warnings(&self) -> Vec<ModelWarning> {
        let mut out = Vec::new();
        if let Some(spacing) = self.min_spacing() {
            let max_rabi = self.max_rabi();
            if spacing < 2.0 * max_rabi {
                out.push(ModelWarning::NarrowSpacing { spacing, max_rabi });
            }
        }
        out
    }
}
