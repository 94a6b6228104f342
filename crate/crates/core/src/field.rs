//! Static magnetic field models. Offsets are combined in quadrature
//! (Ioffe-type), so the magnitude never vanishes when an offset is present
//! and is even under a full sign flip of the position.

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldModel {
    /// |B|(z) = sqrt((b·z)² + B0²)
    Linear1D { gradient: f64, offset: f64 },
    /// |B|(x,z) = sqrt((b_x·x)² + (b_z·z)² + B0²)
    Quadrupole2D { gradient_x: f64, gradient_z: f64, offset: f64 },
}

impl FieldModel {
    pub fn linear(gradient: f64, offset: f64) -> Result<Self> {
        check_nonneg("gradient", gradient)?;
        check_nonneg("offset", offset)?;
        Ok(Self::Linear1D { gradient, offset })
    }

    pub fn quadrupole(gradient_x: f64, gradient_z: f64, offset: f64) -> Result<Self> {
        check_nonneg("gradient_x", gradient_x)?;
        check_nonneg("gradient_z", gradient_z)?;
        check_nonneg("offset", offset)?;
        Ok(Self::Quadrupole2D { gradient_x, gradient_z, offset })
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Linear1D { .. } => 1,
            Self::Quadrupole2D { .. } => 2,
        }
    }

    pub fn offset(&self) -> f64 {
        match *self {
            Self::Linear1D { offset, .. } | Self::Quadrupole2D { offset, .. } => offset,
        }
    }

    /// Field magnitude (T) at a 1- or 2-component position (m).
    pub fn magnitude(&self, position: &[f64]) -> Result<f64> {
        match *self {
            Self::Linear1D { gradient, offset } => {
                if position.len() != 1 {
                    return Err(CoreError::DimensionMismatch { expected: 1, got: position.len() });
                }
                Ok((gradient * position[0]).hypot(offset))
            }
            Self::Quadrupole2D { gradient_x, gradient_z, offset } => {
                if position.len() != 2 {
                    return Err(CoreError::DimensionMismatch { expected: 2, got: position.len() });
                }
                let planar = (gradient_x * position[0]).hypot(gradient_z * position[1]);
                Ok(planar.hypot(offset))
            }
        }
    }

    /// Shortcut for the 1D model.
    pub fn magnitude_1d(&self, z: f64) -> Result<f64> {
        self.magnitude(&[z])
    }
}

fn check_nonneg(what: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CoreError::DomainError(format!("{what} must be finite and >= 0, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_zero_crossing() {
        let f = FieldModel::linear(2.0, 0.0).unwrap();
        assert_eq!(f.magnitude(&[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn linear_one_gauss_at_50_um() {
        let f = FieldModel::linear(2.0, 0.0).unwrap();
        let b = f.magnitude(&[50e-6]).unwrap();
        assert!((b - 1.0e-4).abs() < 1e-19, "expected 1 G, got {b} T");
    }

    #[test]
    fn quadrupole_even_under_sign_flip() {
        let f = FieldModel::quadrupole(1.4, 2.0, 0.0).unwrap();
        let a = f.magnitude(&[3.1e-5, -1.7e-5]).unwrap();
        let b = f.magnitude(&[-3.1e-5, 1.7e-5]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn magnitude_never_below_offset() {
        let f = FieldModel::linear(2.0, 5e-5).unwrap();
        for z in [-1e-3, -1e-6, 0.0, 4e-5, 8e-2] {
            assert!(f.magnitude(&[z]).unwrap() >= 5e-5);
        }
        let q = FieldModel::quadrupole(1.0, 2.0, 1e-4).unwrap();
        assert_eq!(q.magnitude(&[0.0, 0.0]).unwrap(), 1e-4);
    }

    #[test]
    fn monotone_in_abs_z() {
        let f = FieldModel::linear(2.0, 1e-5).unwrap();
        let mut prev = -1.0;
        for i in 0..100 {
            let z = i as f64 * 1e-6;
            let b = f.magnitude(&[z]).unwrap();
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let f = FieldModel::linear(2.0, 0.0).unwrap();
        assert!(matches!(
            f.magnitude(&[1.0, 2.0]),
            Err(CoreError::DimensionMismatch { expected: 1, got: 2 })
        ));
        let q = FieldModel::quadrupole(1.0, 1.0, 0.0).unwrap();
        assert!(q.magnitude(&[1.0]).is_err());
    }

    #[test]
    fn negative_gradient_rejected() {
        assert!(FieldModel::linear(-1.0, 0.0).is_err());
        assert!(FieldModel::quadrupole(1.0, 1.0, -2e-4).is_err());
    }
}
