//! Model parameters, map configuration, and phase-plane state.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// The seven ecological rates defining one reef model instance.
///
/// All rates are nonnegative; `k` (carrying capacity) and `alpha`
/// (coral overgrowth of turf) must be strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Intrinsic macroalgae growth rate.
    pub r: f64,
    /// Macroalgae carrying capacity (cover fraction).
    pub k: f64,
    /// Coral-overgrowth-by-macroalgae rate.
    pub a: f64,
    /// Grazing rate.
    pub g: f64,
    /// Macroalgae spread rate over turf.
    pub gamma: f64,
    /// Coral-overgrowth-of-turf rate.
    pub alpha: f64,
    /// Coral mortality rate.
    pub d: f64,
}

/// ModelParams plus step size: a fully specified discrete map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapConfig {
    pub params: ModelParams,
    /// Step size delta; must be finite and > 0 for a valid map.
    pub delta: f64,
}

impl MapConfig {
    pub fn new(params: ModelParams, delta: f64) -> MapConfig {
        MapConfig { params, delta }
    }
}

/// One point (M, C) of the phase plane.
///
/// No positivity or sum bound is enforced on iterates: chaotic orbits at
/// large delta may exit the unit simplex. Only non-finite values are
/// rejected, and only by the checked constructor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub m: f64,
    pub c: f64,
}

impl State {
    pub fn new(m: f64, c: f64) -> Option<State> {
        if m.is_finite() && c.is_finite() {
            Some(State { m, c })
        } else {
            None
        }
    }

    /// Derived turf cover S = 1 - M - C (never stored).
    pub fn s(&self) -> f64 {
        1.0 - self.m - self.c
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.c)
    }
}

/// Outcome of parameter validation: the list of violated constraints.
/// Empty list means valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationResult {
    pub violations: Vec<String>,
}

impl ValidationResult {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check a parameter set against the model constraints.
pub fn validate(p: &ModelParams) -> ValidationResult {
    use alloc::format;
    let mut violations = Vec::new();
    let fields = [
        ("r", p.r),
        ("k", p.k),
        ("a", p.a),
        ("g", p.g),
        ("gamma", p.gamma),
        ("alpha", p.alpha),
        ("d", p.d),
    ];
    for (name, val) in fields {
        if !val.is_finite() {
            violations.push(format!("{name} must be finite"));
        } else if val < 0.0 {
            violations.push(format!("{name} must be >= 0"));
        }
    }
    if p.k == 0.0 {
        violations.push(String::from("k must be > 0"));
    }
    if p.alpha == 0.0 {
        violations.push(String::from("alpha must be > 0"));
    }
    ValidationResult { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_params() -> ModelParams {
        ModelParams { r: 0.2, k: 0.5, a: 0.65, g: 0.3, gamma: 0.4, alpha: 0.6, d: 0.1 }
    }

    #[test]
    fn positive_params_are_valid() {
        assert!(validate(&table_params()).is_valid());
    }

    #[test]
    fn zero_k_is_flagged() {
        let mut p = table_params();
        p.k = 0.0;
        let v = validate(&p);
        assert!(v.violations.iter().any(|s| s.contains("k must be > 0")));
    }

    #[test]
    fn negative_r_is_flagged() {
        let mut p = table_params();
        p.r = -0.1;
        let v = validate(&p);
        assert!(v.violations.iter().any(|s| s.contains("r must be >= 0")));
    }

    #[test]
    fn zero_alpha_is_flagged() {
        let mut p = table_params();
        p.alpha = 0.0;
        assert!(!validate(&p).is_valid());
    }

    #[test]
    fn state_rejects_non_finite() {
        assert!(State::new(f64::NAN, 0.0).is_none());
        assert!(State::new(0.0, f64::INFINITY).is_none());
        assert!(State::new(0.2, 0.3).is_some());
    }

    #[test]
    fn derived_cover_sums_to_one() {
        let s = State { m: 0.2, c: 0.3 };
        assert_eq!(s.m + s.c + s.s(), 1.0);
    }
}
