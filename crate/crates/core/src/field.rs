//! Per-element design fields.

use std::ops::Deref;

use crate::error::{Error, Result};

/// Per-element control vector over the mesh elements.
///
/// A continuous field has entries in `[0, 1]`; a binary field has entries in
/// `{0, 1}` (stored as `f64` so both share one representation).
#[derive(Debug, Clone, PartialEq)]
pub struct DesignField(Vec<f64>);

impl DesignField {
    pub fn from_vec(values: Vec<f64>) -> Self {
        DesignField(values)
    }

    /// Constant field of the given value.
    pub fn uniform(len: usize, value: f64) -> Self {
        DesignField(vec![value; len])
    }

    pub fn zeros(len: usize) -> Self {
        Self::uniform(len, 0.0)
    }

    /// Binary field from a boolean mask.
    pub fn from_bools(mask: &[bool]) -> Self {
        DesignField(mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// True if every entry is within `tol` of 0 or 1.
    pub fn is_binary(&self, tol: f64) -> bool {
        self.0
            .iter()
            .all(|&x| x.abs() <= tol || (x - 1.0).abs() <= tol)
    }

    /// Boolean mask of a binary field. Errors on the first non-binary entry.
    pub fn to_bools(&self, tol: f64) -> Result<Vec<bool>> {
        self.0
            .iter()
            .enumerate()
            .map(|(e, &x)| {
                if x.abs() <= tol {
                    Ok(false)
                } else if (x - 1.0).abs() <= tol {
                    Ok(true)
                } else {
                    Err(Error::NonBinaryDesign {
                        element: e,
                        value: x,
                    })
                }
            })
            .collect()
    }

    /// Verifies every entry lies in `[0, 1]` within `tol`.
    pub fn check_box(&self, tol: f64) -> Result<()> {
        for (e, &x) in self.0.iter().enumerate() {
            if x < -tol || x > 1.0 + tol {
                return Err(Error::DesignOutOfRange {
                    element: e,
                    value: x,
                });
            }
        }
        Ok(())
    }
}

impl Deref for DesignField {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for DesignField {
    fn from(values: Vec<f64>) -> Self {
        DesignField(values)
    }
}

/// Squared Euclidean distance between two equally sized slices.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
