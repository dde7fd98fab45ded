//! The discrete map step and its continuous-time right-hand side.

use crate::params::{MapConfig, ModelParams, State};
use core::fmt;

/// Tolerance on |1 - C| below which the grazing term gM/(1-C) is singular.
pub const GRAZING_TOL: f64 = 1e-12;

/// The grazing denominator 1 - C vanished (within 1e-12).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainError;

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "grazing singularity: C = 1 within 1e-12")
    }
}

impl core::error::Error for DomainError {}

/// Two-variable ODE right-hand side (dM/dt, dC/dt).
///
/// Every term of each component carries the respective cover factor, so the
/// M = 0 and C = 0 axes are invariant exactly (0 times anything is 0).
pub fn continuous_rhs(p: &ModelParams, s: &State) -> Result<(f64, f64), DomainError> {
    let (m, c) = (s.m, s.c);
    if (1.0 - c).abs() < GRAZING_TOL {
        return Err(DomainError);
    }
    let dm = m * (p.r * (1.0 - m / p.k) + p.a * c - p.g / (1.0 - c) + p.gamma * (1.0 - m - c));
    let dc = c * (p.alpha * (1.0 - m - c) - p.d - p.a * m);
    Ok((dm, dc))
}

/// One forward-Euler step: s + delta * continuous_rhs(s).
///
/// Shares the rhs arithmetic exactly, so Euler consistency
/// `step(cfg, s) - s == delta * continuous_rhs(p, s)` holds bit-for-bit.
pub fn step(cfg: &MapConfig, s: &State) -> Result<State, DomainError> {
    let (dm, dc) = continuous_rhs(&cfg.params, s)?;
    Ok(State { m: s.m + cfg.delta * dm, c: s.c + cfg.delta * dc })
}
