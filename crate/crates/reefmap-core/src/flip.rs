//! Period-doubling analysis: critical step size, center-manifold reduction,
//! and the discriminants deciding existence and stability of the emergent
//! 2-cycle.
//!
//! The reduction works on the shifted expansion of the map around the
//! equilibrium: coefficients i/j below multiply x^p y^q (delta*)^s where
//! (x, y) = (M - M*, C - C*) and delta* is the step-size offset from the
//! critical value. Factorials are absorbed into the coefficients.

use crate::model::{continuous_rhs, GRAZING_TOL};
use crate::params::{MapConfig, State};
use crate::stability::{char_data, jacobian};
use core::fmt;

/// Expansion points must be fixed points up to this residual. The loose bound
/// deliberately admits rounded published equilibria (4-decimal coordinates).
const REFERENCE_RESIDUAL_TOL: f64 = 1e-2;
/// |i010| below this makes the eigenvector transform singular.
const TRANSFORM_TOL: f64 = 1e-10;
/// lambda2 this close to +-1 degenerates the center-manifold denominators.
const LAMBDA2_GUARD: f64 = 1e-6;
/// |Omega| below this is reported as a degenerate bifurcation.
const DEGENERATE_OMEGA: f64 = 1e-9;
/// Relative disagreement between formulaic and direct lambda2 worth flagging.
const LAMBDA2_MISMATCH_RTOL: f64 = 1e-6;

/// Taylor coefficients of the shifted map up to total order 3 in (x, y) and
/// order 1 in the step-size offset. The second component is quadratic with no
/// x^2, x^3, or y^3 terms, so those fields do not exist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorCoeffs {
    pub i100: f64,
    pub i010: f64,
    pub i200: f64,
    pub i020: f64,
    pub i110: f64,
    pub i101: f64,
    pub i011: f64,
    pub i201: f64,
    pub i111: f64,
    pub i120: f64,
    pub i300: f64,
    pub i030: f64,
    pub j100: f64,
    pub j010: f64,
    pub j020: f64,
    pub j110: f64,
    pub j101: f64,
    pub j011: f64,
    pub j111: f64,
}

/// Which zero of F(-1) along the step size to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipBranch {
    /// First crossing, delta = (-U - sqrt(U^2-4V))/V.
    F1,
    /// Second crossing, delta = (-U + sqrt(U^2-4V))/V.
    F2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlipVerdict {
    StableP2,
    UnstableP2,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipReport {
    /// Critical step size for the requested branch.
    pub delta1: f64,
    /// Second eigenvalue by the trace identity, 3 + U*delta1.
    pub lambda2: f64,
    /// Second eigenvalue computed directly from the Jacobian at delta1.
    pub lambda2_direct: f64,
    /// True when the two lambda2 values disagree beyond tolerance.
    pub lambda2_mismatch: bool,
    /// True when V > 0 and U < -2 sqrt(V) (both crossings exist and are
    /// genuine flips); false means the report is an extrapolation outside
    /// that regime and delta1 is the single F(-1) zero.
    pub in_region: bool,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub b5: f64,
    /// Omega1 = 2 b2 (transversality).
    pub omega1: f64,
    /// Omega2 = 2 b1^2 + 2 b5 (2-cycle stability; > 0 means stable).
    pub omega2: f64,
    pub verdict: FlipVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlipError {
    NotAFixedPoint { residual: f64 },
    Singular,
    /// No positive real critical step size on the requested branch.
    NotInFlipRegion,
    /// i010 = 0 or lambda2 = +-1: the reduction transform is singular.
    DegenerateTransform,
}

impl fmt::Display for FlipError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlipError::NotAFixedPoint { residual } => {
                write!(f, "not a fixed point (residual {residual:.3e})")
            }
            FlipError::Singular => write!(f, "state is on the grazing singularity"),
            FlipError::NotInFlipRegion => {
                write!(f, "no positive flip point on this branch")
            }
            FlipError::DegenerateTransform => {
                write!(f, "center-manifold transform is singular here")
            }
        }
    }
}

impl core::error::Error for FlipError {}

fn check_reference_point(cfg: &MapConfig, e: &State) -> Result<(), FlipError> {
    if (1.0 - e.c).abs() < GRAZING_TOL {
        return Err(FlipError::Singular);
    }
    let residual = match continuous_rhs(&cfg.params, e) {
        Ok((dm, dc)) => dm.abs().max(dc.abs()),
        Err(_) => return Err(FlipError::Singular),
    };
    if residual > REFERENCE_RESIDUAL_TOL {
        return Err(FlipError::NotAFixedPoint { residual });
    }
    Ok(())
}

/// Closed-form Taylor coefficients of the shifted map at `e`.
pub fn taylor_coeffs(cfg: &MapConfig, e: &State) -> Result<TaylorCoeffs, FlipError> {
    check_reference_point(cfg, e)?;
    let j = jacobian(cfg, e);
    let p = &cfg.params;
    let dl = cfg.delta;
    let w = 1.0 - e.c;
    let w2 = w * w;
    let w3 = w2 * w;
    Ok(TaylorCoeffs {
        i100: j.a11,
        i010: j.a12,
        i200: dl * (-p.r / p.k - p.gamma),
        i020: -dl * p.g * e.m / w3,
        i110: dl * (p.a - p.g / w2 - p.gamma),
        i101: (j.a11 - 1.0) / dl,
        i011: j.a12 / dl,
        i201: -p.r / p.k - p.gamma,
        i111: p.a - p.g / w2 - p.gamma,
        i120: -dl * p.g / w3,
        i300: 0.0,
        i030: -dl * p.g * e.m / (w3 * w),
        j100: j.a21,
        j010: j.a22,
        j020: -dl * p.alpha,
        j110: -dl * (p.alpha + p.a),
        j101: -(p.alpha + p.a) * e.c,
        j011: (j.a22 - 1.0) / dl,
        j111: -(p.alpha + p.a),
    })
}

/// Critical step size where F(-1) = 0 on the requested branch.
pub fn flip_point(cfg: &MapConfig, e: &State, branch: FlipBranch) -> Result<f64, FlipError> {
    if (1.0 - e.c).abs() < GRAZING_TOL {
        return Err(FlipError::Singular);
    }
    let cd = char_data(cfg, &jacobian(cfg, e));
    let (u, v) = (cd.u, cd.v);
    if v.abs() < 1e-14 {
        // F(-1)(s) = 4 + 2 s u degenerates to a linear equation
        return match branch {
            FlipBranch::F1 if u < 0.0 => Ok(-2.0 / u),
            _ => Err(FlipError::NotInFlipRegion),
        };
    }
    let disc = u * u - 4.0 * v;
    if disc < 0.0 {
        return Err(FlipError::NotInFlipRegion);
    }
    let root = libm::sqrt(disc);
    let d1 = match branch {
        FlipBranch::F1 => (-u - root) / v,
        FlipBranch::F2 => (-u + root) / v,
    };
    if !d1.is_finite() || d1 <= 0.0 {
        return Err(FlipError::NotInFlipRegion);
    }
    Ok(d1)
}

/// Whether (U, V) sits in the regime where both flip crossings are genuine.
pub fn in_flip_region(u: f64, v: f64) -> bool {
    v > 0.0 && u < -2.0 * libm::sqrt(v)
}

/// Center-manifold coefficients and flip discriminants at the critical point.
pub fn flip_discriminants(
    cfg: &MapConfig,
    e: &State,
    branch: FlipBranch,
) -> Result<FlipReport, FlipError> {
    check_reference_point(cfg, e)?;
    let delta1 = flip_point(cfg, e, branch)?;
    let cd0 = char_data(cfg, &jacobian(cfg, e));
    let (u, v) = (cd0.u, cd0.v);
    let lam2 = 3.0 + u * delta1;

    let cfg1 = MapConfig::new(cfg.params, delta1);
    let cd1 = char_data(&cfg1, &jacobian(&cfg1, e));
    // the eigenvalue pair at delta1 is {-1, lambda2}; take the one farther
    // from -1 as the direct reading
    let (e0, e1) = (cd1.eigs[0].re, cd1.eigs[1].re);
    let lambda2_direct = if (e0 + 1.0).abs() >= (e1 + 1.0).abs() { e0 } else { e1 };
    let lambda2_mismatch =
        (lam2 - lambda2_direct).abs() > LAMBDA2_MISMATCH_RTOL * lam2.abs().max(1.0);

    let t = taylor_coeffs(&cfg1, e)?;
    if t.i010.abs() < TRANSFORM_TOL {
        return Err(FlipError::DegenerateTransform);
    }
    if (1.0 + lam2).abs() < LAMBDA2_GUARD || (1.0 - lam2).abs() < LAMBDA2_GUARD {
        return Err(FlipError::DegenerateTransform);
    }

    // delta-derivatives of the pure-y quadratic coefficients
    let i021 = t.i020 / delta1;
    let j021 = t.j020 / delta1;

    let (i100, i010) = (t.i100, t.i010);
    let den = i010 * (1.0 + lam2);
    let comb_a = |ic: f64, jc: f64| (lam2 - i100) * ic - i010 * jc;
    let comb_ai = |ic: f64| (lam2 - i100) * ic;
    let comb_b = |ic: f64, jc: f64| (1.0 + i100) * ic + i010 * jc;
    let comb_bi = |ic: f64| (1.0 + i100) * ic;

    let a_xy = comb_a(t.i110, t.j110);
    let a_x2 = comb_ai(t.i200);
    let a_y2 = comb_a(t.i020, t.j020);
    let a_xy2 = comb_ai(t.i120);
    let a_y3 = comb_ai(t.i030);
    let a_x3 = comb_ai(t.i300);
    let a_xd = comb_a(t.i101, t.j101);
    let a_yd = comb_a(t.i011, t.j011);
    let a_xyd = comb_a(t.i111, t.j111);
    let a_x2d = comb_ai(t.i201);
    let a_y2d = comb_a(i021, j021);
    let b_xy = comb_b(t.i110, t.j110);
    let b_x2 = comb_bi(t.i200);
    let b_y2 = comb_b(t.i020, t.j020);
    let b_xd = comb_b(t.i101, t.j101);
    let b_yd = comb_b(t.i011, t.j011);

    let one_p = 1.0 + i100;
    let a1 = (-b_xy * i010 * one_p + b_x2 * i010 * i010 + b_y2 * one_p * one_p)
        / (i010 * (1.0 - lam2 * lam2));
    let a2 = -(b_xd * i010 - b_yd * one_p) / (i010 * (1.0 + lam2) * (1.0 + lam2));
    let a3 = 0.0;

    let b1 = (-a_xy * i010 * one_p + a_x2 * i010 * i010 + a_y2 * one_p * one_p) / den;
    let b2 = (a_xd * i010 - a_yd * one_p) / den;
    let b3 = (a_xy * i010 * (lam2 - 1.0 - 2.0 * i100) * a2
        + a_xd * i010 * a1
        + a_yd * (lam2 - i100) * a1
        - a_xyd * i010 * one_p
        + 2.0 * a_x2 * i010 * i010 * a2
        + a_x2d * i010 * i010
        + a_y2 * (-2.0 * one_p * (lam2 - i100) * a2)
        + a_y2d * one_p * one_p)
        / den;
    let b4 = (a_xd * a2 * i010 + a_yd * (lam2 - i100) * a2) / den;
    let b5 = (a_xy * i010 * a1 * (lam2 - 1.0 - 2.0 * i100)
        + 2.0 * a_x2 * i010 * i010 * a1
        + a_x3 * i010 * i010 * i010
        + a_y2 * (-2.0 * one_p * (lam2 - i100) * a1)
        + a_xy2 * i010 * one_p * one_p
        + a_y3 * (-(one_p * one_p * one_p)))
        / den;

    let omega1 = 2.0 * b2;
    let omega2 = 2.0 * b1 * b1 + 2.0 * b5;
    let verdict = if omega1.abs() < DEGENERATE_OMEGA || omega2.abs() < DEGENERATE_OMEGA {
        FlipVerdict::Degenerate
    } else if omega2 > 0.0 {
        FlipVerdict::StableP2
    } else {
        FlipVerdict::UnstableP2
    };

    Ok(FlipReport {
        delta1,
        lambda2: lam2,
        lambda2_direct,
        lambda2_mismatch,
        in_region: in_flip_region(u, v),
        a1,
        a2,
        a3,
        b1,
        b2,
        b3,
        b4,
        b5,
        omega1,
        omega2,
        verdict,
    })
}
