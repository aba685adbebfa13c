//! Equation families and their parameters.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// linearized Kuramoto–Sivashinsky
    Lks,
    /// β-time-fractional SPIDE
    Tf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub family: Family,
    pub epsilon: f64,
    pub theta: f64,
    pub beta: f64,
    pub dim: usize,
}

impl ModelParams {
    pub fn lks(epsilon: f64, theta: f64, dim: usize) -> Result<Self> {
        let p = ModelParams {
            family: Family::Lks,
            epsilon,
            theta,
            beta: f64::NAN,
            dim,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn tf(beta: f64, dim: usize) -> Result<Self> {
        let p = ModelParams {
            family: Family::Tf,
            epsilon: f64::NAN,
            theta: f64::NAN,
            beta,
            dim,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::Domain(format!("dim must be 1, 2 or 3, got {}", self.dim)));
        }
        match self.family {
            Family::Lks => {
                if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
                    return Err(Error::Domain(format!("epsilon must be positive, got {}", self.epsilon)));
                }
                if !self.theta.is_finite() {
                    return Err(Error::Domain(format!("theta must be finite, got {}", self.theta)));
                }
            }
            Family::Tf => {
                if !(self.beta > 0.0 && self.beta <= 0.5) {
                    return Err(Error::Domain(format!("beta must lie in (0, 1/2], got {}", self.beta)));
                }
            }
        }
        Ok(())
    }

    /// Temporal Hölder index of the base field: (4−d)/8 or (2−βd)/4.
    pub fn temporal_h(&self) -> f64 {
        let d = self.dim as f64;
        match self.family {
            Family::Lks => (4.0 - d) / 8.0,
            Family::Tf => (2.0 - self.beta * d) / 4.0,
        }
    }

    /// Temporal Hölder index of the d=1 spatial gradient: 1/8 or (2−3β)/4.
    pub fn gradient_temporal_h(&self) -> f64 {
        match self.family {
            Family::Lks => 0.125,
            Family::Tf => (2.0 - 3.0 * self.beta) / 4.0,
        }
    }

    /// Whether β is of the form 1/2^k, where the temporal spectral identity is proven.
    pub fn dyadic_beta(&self) -> bool {
        if self.family != Family::Tf {
            return true;
        }
        let k = -(self.beta.log2());
        (k - k.round()).abs() < 1e-12 && k >= 1.0
    }
}
