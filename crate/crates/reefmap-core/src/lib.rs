//! Core numerics for a discrete-time macroalgae–coral reef map.
//!
//! The map advances macroalgae cover M and coral cover C by a forward-Euler
//! step of size delta; turf cover is the derived remainder S = 1 - M - C.
//! This crate carries the full analysis pipeline: equilibrium enumeration,
//! linear stability with critical step-size thresholds, flip and
//! Neimark–Sacker discriminants via center-manifold reduction, OGY and
//! hybrid chaos control design, and an orbit/bifurcation-sweep engine.
//!
//! `no_std` + `alloc`; all operations are pure and thread-safe.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod control;
pub mod equilibria;
pub mod flip;
pub mod model;
pub mod ns;
pub mod orbit;
pub mod params;
pub mod stability;

pub use control::{hybrid_design, hybrid_simulate, ogy_design, ogy_lines_from, ogy_simulate};
pub use equilibria::{closed_form_equilibria, interior_equilibria, EquilibriumSet};
pub use flip::{flip_discriminants, flip_point, taylor_coeffs, FlipBranch, FlipReport, TaylorCoeffs};
pub use model::{continuous_rhs, step, DomainError};
pub use ns::{ns_discriminant, ns_frame, NsFrame, NsReport};
pub use orbit::{classify_attractor, iterate, lyapunov, sweep, AttractorKind, AttractorSummary, SweepSpec};
pub use params::{validate, MapConfig, ModelParams, State};
pub use stability::{char_data, classify, jacobian, lemma1_case, CharData, Jacobian2, StabilityReport};
