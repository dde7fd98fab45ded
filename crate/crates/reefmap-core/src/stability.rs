//! Linearization and stability classification of fixed points.
//!
//! The Jacobian of the map has the form I + delta*K where K depends only on
//! the state and the continuous-time parameters, so the reduced quantities
//! U and V below are independent of the step size. Stability thresholds in
//! delta come out in closed form from the characteristic polynomial
//! F(lambda) = lambda^2 + A*lambda + B evaluated at +-1.

use crate::model::{continuous_rhs, GRAZING_TOL};
use crate::params::{MapConfig, State};
use alloc::format;
use alloc::string::String;
use core::fmt;
use num_complex::Complex64;

/// A point must satisfy the fixed-point residual below this to be classified.
const RESIDUAL_TOL: f64 = 1e-8;
/// Eigenvalue modulus within this of 1 counts as non-hyperbolic.
const MODULUS_TOL: f64 = 1e-9;
/// Tolerance for boundary tests on F(-1), B-1, and threshold matching.
const BOUNDARY_TOL: f64 = 1e-9;

/// 2x2 Jacobian of the map at a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Jacobian2 {
    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }
}

/// Jacobian of the one-step map at `s`.
pub fn jacobian(cfg: &MapConfig, s: &State) -> Jacobian2 {
    let p = &cfg.params;
    let dl = cfg.delta;
    let (m, c) = (s.m, s.c);
    let w = 1.0 - c;
    Jacobian2 {
        a11: 1.0 + dl * p.r - 2.0 * dl * p.r * m / p.k + dl * p.a * c - dl * p.g / w
            + dl * p.gamma
            - 2.0 * dl * p.gamma * m
            - dl * p.gamma * c,
        a12: dl * p.a * m - dl * p.g * m / (w * w) - dl * p.gamma * m,
        a21: -dl * p.alpha * c - dl * p.a * c,
        a22: 1.0 + dl * p.alpha - dl * p.alpha * m - 2.0 * dl * p.alpha * c - dl * p.d
            - dl * p.a * m,
    }
}

/// Characteristic data of a 2x2 Jacobian.
///
/// `a` and `b` are the coefficients of F(lambda) = lambda^2 + a*lambda + b,
/// i.e. a = -trace and b = det. `u1`, `u2`, `u`, `v` are the step-size-free
/// reductions; `f1` and `fm1` are F(1) and F(-1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharData {
    pub a: f64,
    pub b: f64,
    pub u1: f64,
    pub u2: f64,
    pub u: f64,
    pub v: f64,
    pub f1: f64,
    pub fm1: f64,
    pub eigs: [Complex64; 2],
}

/// Eigenvalues of lambda^2 + a*lambda + b, numerically stable form.
fn quadratic_eigs(a: f64, b: f64) -> [Complex64; 2] {
    let disc = a * a - 4.0 * b;
    if disc >= 0.0 {
        let sq = libm::sqrt(disc);
        let q = -(a + libm::copysign(1.0, a) * sq) / 2.0;
        let (l1, l2) = if q == 0.0 { (0.0, 0.0) } else { (q, b / q) };
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        [Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)]
    } else {
        let re = -a / 2.0;
        let im = libm::sqrt(-disc) / 2.0;
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

/// Eigenvalues of a 2x2 matrix, sorted ascending when real.
pub fn eigenvalues(j: &Jacobian2) -> [Complex64; 2] {
    quadratic_eigs(-j.trace(), j.det())
}

/// Characteristic quantities of the map's Jacobian.
pub fn char_data(cfg: &MapConfig, j: &Jacobian2) -> CharData {
    let dl = cfg.delta;
    let u1 = (j.a11 - 1.0) / dl;
    let u2 = (j.a22 - 1.0) / dl;
    let u = u1 + u2;
    let v = u1 * u2 - j.a12 * j.a21 / (dl * dl);
    let a = -j.trace();
    let b = j.det();
    CharData {
        a,
        b,
        u1,
        u2,
        u,
        v,
        f1: 1.0 + a + b,
        fm1: 1.0 - a + b,
        eigs: quadratic_eigs(a, b),
    }
}

/// Location of the two characteristic roots relative to the unit circle,
/// valid under the positivity hypothesis F(1) > 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootLocation {
    /// |l1| < 1 and |l2| < 1.
    BothInside,
    /// |l1| < 1 < |l2|.
    Split,
    /// |l1| > 1 and |l2| > 1.
    BothOutside,
    /// One root at -1, the other off the unit circle.
    FlipBoundary,
    /// Complex pair on the unit circle.
    UnitComplexPair,
    /// F(1) <= 0, so the trichotomy does not apply.
    HypothesisViolated,
}

/// Classify root location from F(+-1), the coefficients, and the discriminant.
pub fn lemma1_case(cd: &CharData) -> RootLocation {
    if cd.f1 <= 0.0 {
        return RootLocation::HypothesisViolated;
    }
    let disc = cd.a * cd.a - 4.0 * cd.b;
    if cd.fm1.abs() <= BOUNDARY_TOL && cd.a.abs() > BOUNDARY_TOL && (cd.a - 2.0).abs() > BOUNDARY_TOL
    {
        return RootLocation::FlipBoundary;
    }
    if disc < 0.0 && (cd.b - 1.0).abs() <= BOUNDARY_TOL {
        return RootLocation::UnitComplexPair;
    }
    if cd.fm1 > 0.0 && cd.b < 1.0 {
        RootLocation::BothInside
    } else if cd.fm1 < 0.0 {
        RootLocation::Split
    } else if cd.fm1 > 0.0 && cd.b > 1.0 {
        RootLocation::BothOutside
    } else {
        // other F(-1) = 0 corners (double root at -1) are degenerate
        RootLocation::HypothesisViolated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    Sink,
    Saddle,
    Source,
    NonHyperbolic,
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StabilityClass::Sink => "sink",
            StabilityClass::Saddle => "saddle",
            StabilityClass::Source => "source",
            StabilityClass::NonHyperbolic => "non-hyperbolic",
        };
        f.write_str(s)
    }
}

/// Which bifurcation boundary the current step size sits on, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    None,
    /// delta at the first flip threshold.
    F1,
    /// delta at the second flip threshold.
    F2,
    /// delta at the invariant-circle threshold.
    NsBoundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub class: StabilityClass,
    /// First flip threshold; present only in the flip regime U < -2 sqrt(V).
    pub delta_minus: Option<f64>,
    /// Second flip threshold; present only in the flip regime.
    pub delta_plus: Option<f64>,
    /// Invariant-circle threshold; present only when -2 sqrt(V) < U < 0.
    pub delta_ns: Option<f64>,
    pub region: Region,
    /// True when V <= 0 and the interval classification does not apply;
    /// the class then comes from raw eigenvalue moduli.
    pub outside_theorem1: bool,
    pub char_data: CharData,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifyError {
    /// The supplied point does not satisfy the fixed-point residual bound.
    NotAFixedPoint { residual: f64 },
    /// The point sits on the grazing singularity.
    Singular,
    /// Interval route and eigenvalue moduli disagree (should never happen).
    InternalInconsistency { detail: String },
}

impl fmt::Display for ClassifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifyError::NotAFixedPoint { residual } => {
                write!(f, "not a fixed point (residual {residual:.3e})")
            }
            ClassifyError::Singular => write!(f, "state is on the grazing singularity"),
            ClassifyError::InternalInconsistency { detail } => {
                write!(f, "internal inconsistency: {detail}")
            }
        }
    }
}

impl core::error::Error for ClassifyError {}

fn class_from_moduli(eigs: &[Complex64; 2]) -> StabilityClass {
    let m1 = eigs[0].norm();
    let m2 = eigs[1].norm();
    if (m1 - 1.0).abs() < MODULUS_TOL || (m2 - 1.0).abs() < MODULUS_TOL {
        return StabilityClass::NonHyperbolic;
    }
    match ((m1 < 1.0), (m2 < 1.0)) {
        (true, true) => StabilityClass::Sink,
        (false, false) => StabilityClass::Source,
        _ => StabilityClass::Saddle,
    }
}

fn near(delta: f64, threshold: f64) -> bool {
    (delta - threshold).abs() <= BOUNDARY_TOL * delta.abs().max(1.0)
}

/// Classify a fixed point of the map at the configured step size.
///
/// For V > 0 the class comes from the closed-form threshold intervals and is
/// cross-checked against eigenvalue moduli; for V <= 0 the moduli alone
/// decide and `outside_theorem1` is set.
pub fn classify(cfg: &MapConfig, s: &State) -> Result<StabilityReport, ClassifyError> {
    let residual = match continuous_rhs(&cfg.params, s) {
        Ok((dm, dc)) => dm.abs().max(dc.abs()),
        Err(_) => return Err(ClassifyError::Singular),
    };
    if residual >= RESIDUAL_TOL {
        return Err(ClassifyError::NotAFixedPoint { residual });
    }
    if (1.0 - s.c).abs() < GRAZING_TOL {
        return Err(ClassifyError::Singular);
    }
    let cd = char_data(cfg, &jacobian(cfg, s));
    let (u, v, dl) = (cd.u, cd.v, cfg.delta);

    let mut delta_minus = None;
    let mut delta_plus = None;
    let mut delta_ns = None;
    let mut region = Region::None;
    let moduli_class = class_from_moduli(&cd.eigs);

    let (class, outside) = if v > 0.0 {
        let two_sqrt_v = 2.0 * libm::sqrt(v);
        let interval_class = if u < -two_sqrt_v {
            // flip regime: real eigenvalues, lower one crosses -1 twice
            let root = libm::sqrt(u * u - 4.0 * v);
            let dm = (-u - root) / v;
            let dp = (-u + root) / v;
            delta_minus = Some(dm);
            delta_plus = Some(dp);
            if near(dl, dm) {
                region = Region::F1;
            } else if near(dl, dp) {
                region = Region::F2;
            }
            if dl < dm {
                StabilityClass::Sink
            } else if dl < dp {
                StabilityClass::Saddle
            } else {
                StabilityClass::Source
            }
        } else if u < 0.0 {
            // complex regime: conjugate pair leaves the unit circle once
            let dns = -u / v;
            delta_ns = Some(dns);
            if near(dl, dns) {
                region = Region::NsBoundary;
            }
            if dl < dns { StabilityClass::Sink } else { StabilityClass::Source }
        } else {
            StabilityClass::Source
        };
        if region != Region::None || moduli_class == StabilityClass::NonHyperbolic {
            (StabilityClass::NonHyperbolic, false)
        } else if interval_class != moduli_class {
            return Err(ClassifyError::InternalInconsistency {
                detail: format!(
                    "interval route {interval_class} vs moduli {moduli_class} at delta {dl}"
                ),
            });
        } else {
            (interval_class, false)
        }
    } else {
        (moduli_class, true)
    };

    Ok(StabilityReport {
        class,
        delta_minus,
        delta_plus,
        delta_ns,
        region,
        outside_theorem1: outside,
        char_data: cd,
    })
}
