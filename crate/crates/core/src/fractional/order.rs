use serde::{Deserialize, Serialize};

use super::INTEGER_TOL;
use crate::{Error, Result};

/// An order `γ = m + s` split into integer part `m = ⌊γ⌋` and fractional part `s ∈ [0,1)`.
///
/// Values within [`INTEGER_TOL`] of an integer are snapped to it, so `1.9999999999`
/// becomes `m = 2, s = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalOrder {
    gamma: f64,
    m: u32,
    s: f64,
}

impl FractionalOrder {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::domain(format!("order must be finite and nonnegative, got {gamma}")));
        }
        let rounded = gamma.round();
        let (m, s) = if (gamma - rounded).abs() < INTEGER_TOL {
            (rounded, 0.0)
        } else {
            let m = gamma.floor();
            (m, gamma - m)
        };
        Ok(Self { gamma: m + s, m: m as u32, s })
    }

    /// Builds the order from its parts. `s` must lie in `[0,1)`.
    pub fn from_parts(m: u32, s: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&s) {
            return Err(Error::domain(format!("fractional part must lie in [0,1), got {s}")));
        }
        Ok(Self { gamma: m as f64 + s, m, s })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn integer_part(&self) -> u32 {
        self.m
    }

    pub fn fractional_part(&self) -> f64 {
        self.s
    }

    pub fn is_integer(&self) -> bool {
        self.s == 0.0
    }
}
