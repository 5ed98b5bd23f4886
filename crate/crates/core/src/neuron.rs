//! Scalar leaky integrate-and-fire mathematics in normalized units
//! (rest potential 0, firing threshold 1).

use serde::{Deserialize, Serialize};

use crate::numerics::Real;
use crate::{Error, Result};

/// Normalized firing threshold.
pub const THRESHOLD: f64 = 1.0;

/// Surrogate slope used for every experiment unless configured otherwise.
pub const DEFAULT_SURROGATE_SLOPE: f64 = 10.0;

/// A LIF neuron in physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifPhysical {
    /// mV
    pub v_rest: f64,
    /// mV
    pub v_th: f64,
    pub resistance: f64,
    /// ms
    pub tau: f64,
}

impl LifPhysical {
    pub fn validate(&self) -> Result<()> {
        if self.v_th == self.v_rest {
            return Err(Error::DegenerateModel(format!(
                "threshold equals rest potential ({} mV)",
                self.v_rest
            )));
        }
        if !(self.tau > 0.0) {
            return Err(Error::Parameter(format!("tau must be positive, got {}", self.tau)));
        }
        Ok(())
    }

    /// Scale that maps physical input current into the normalized model.
    pub fn current_scale(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.resistance / (self.v_th - self.v_rest))
    }
}

/// Discrete-time normalized LIF parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifNormalized {
    pub beta: f64,
    /// ms
    pub dt: f64,
}

impl LifNormalized {
    pub fn new(beta: f64, dt: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Parameter(format!("beta must lie in [0, 1], got {beta}")));
        }
        if !(dt > 0.0) {
            return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
        }
        Ok(LifNormalized { beta, dt })
    }

    pub fn from_tau(tau: f64, dt: f64) -> Result<Self> {
        LifNormalized::new(beta_from_tau(tau, dt)?, dt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateCfg {
    pub slope: f64,
}

impl SurrogateCfg {
    pub fn new(slope: f64) -> Result<Self> {
        if !(slope > 0.0) || !slope.is_finite() {
            return Err(Error::Parameter(format!("surrogate slope must be positive, got {slope}")));
        }
        Ok(SurrogateCfg { slope })
    }
}

impl Default for SurrogateCfg {
    fn default() -> Self {
        SurrogateCfg {
            slope: DEFAULT_SURROGATE_SLOPE,
        }
    }
}

/// `(v - v_rest) / (v_th - v_rest)`.
pub fn normalize_potential(p: &LifPhysical, v: f64) -> Result<f64> {
    if p.v_th == p.v_rest {
        return Err(Error::DegenerateModel(format!(
            "threshold equals rest potential ({} mV)",
            p.v_rest
        )));
    }
    Ok((v - p.v_rest) / (p.v_th - p.v_rest))
}

/// Decay factor `exp(-dt/tau)`.
pub fn beta_from_tau(tau: f64, dt: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Parameter(format!("tau must be positive, got {tau}")));
    }
    if !(dt > 0.0) {
        return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
    }
    Ok((-dt / tau).exp())
}

/// First-order decay factor `1 - dt/tau` of the explicit Euler step.
///
/// Unlike [`beta_from_tau`] this is only accurate to O(dt); the exponential
/// factor integrates a constant current exactly.
pub fn beta_forward_euler(tau: f64, dt: f64) -> Result<f64> {
    if !(tau > 0.0) || !(dt > 0.0) || dt > tau {
        return Err(Error::Parameter(format!(
            "forward Euler needs 0 < dt <= tau, got dt={dt}, tau={tau}"
        )));
    }
    Ok(1.0 - dt / tau)
}

/// Heaviside spike: 1 iff `v > 1` strictly.
#[inline]
pub fn spike_fn<T: Real>(v: T) -> T {
    if v > T::one() {
        T::one()
    } else {
        T::zero()
    }
}

/// `(slope·|v - 1| + 1)^-2`, peaked at threshold.
#[inline]
pub fn surrogate_grad<T: Real>(v: T, slope: T) -> T {
    let d = slope * (v - T::one()).abs() + T::one();
    T::one() / (d * d)
}

/// Clamp a decay factor into `[0, 1]`.
#[inline]
pub fn clip_beta<T: Real>(beta: T) -> T {
    if beta > T::one() {
        T::one()
    } else if beta < T::zero() {
        T::zero()
    } else {
        beta
    }
}
