//! Neimark-Sacker analysis: the circle-crossing step size, the complex
//! eigenframe there, and the first Lyapunov quantity deciding whether the
//! bifurcating invariant curve attracts or repels.
//!
//! All frame quantities are carried as complex numbers even when the
//! discriminant 4V - U^2 is negative; the algebra stays valid formally and
//! the imaginary parts simply migrate between components. "Bar" quantities
//! are assembled with -i in place of +i rather than by numeric conjugation,
//! which matters exactly in that formal regime.

use crate::flip::{taylor_coeffs, FlipError, TaylorCoeffs};
use crate::params::{MapConfig, State};
use crate::stability::{char_data, jacobian};
use core::fmt;
use num_complex::Complex64;

/// |V| below this leaves no finite circle-crossing step size.
const V_TOL: f64 = 1e-14;
/// |i010| below this makes the eigenvector transform singular.
const TRANSFORM_TOL: f64 = 1e-10;
/// |sigma2| below this collapses the rotation and the normal form.
const SIGMA2_TOL: f64 = 1e-12;
/// |Psi| below this is reported as a degenerate bifurcation.
const DEGENERATE_PSI: f64 = 1e-9;
/// Relative tolerance for the low-order resonance exclusions.
const RESONANCE_RTOL: f64 = 1e-9;

/// Eigenframe of the Jacobian at the circle-crossing step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsFrame {
    /// Step size where the eigenvalue product crosses 1, -U/V.
    pub delta2: f64,
    /// Eigenvalue sigma1 + i sigma2 (formal when sigma2 is imaginary).
    pub lambda: Complex64,
    /// Formal conjugate sigma1 - i sigma2.
    pub lambda_bar: Complex64,
    /// Real part of the eigenvalue, 1 + U delta2 / 2.
    pub sigma1: f64,
    /// (delta2/2) sqrt(4V - U^2), imaginary when the discriminant is negative.
    pub sigma2: Complex64,
    /// Speed at which the eigenvalue modulus crosses 1, -U/2.
    pub d_mod: f64,
    /// [no 4th-root resonance (U^2 != 2V), no cube-root resonance (U^2 != 3V)].
    pub resonance_ok: [bool; 2],
    /// True when U < 0 and U^2 < 4V: delta2 > 0 and the pair is genuinely
    /// complex, so the crossing is an actual Neimark-Sacker point.
    pub in_region: bool,
}

/// Second and third partials of the transformed map (g3, g4) at the origin,
/// in the eigenframe coordinates (u, v).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GPartials {
    pub g3_uu: Complex64,
    pub g3_vv: Complex64,
    pub g3_uv: Complex64,
    pub g3_uuu: Complex64,
    pub g3_uvv: Complex64,
    pub g3_uuv: Complex64,
    pub g3_vvv: Complex64,
    pub g4_uu: Complex64,
    pub g4_vv: Complex64,
    pub g4_uv: Complex64,
    pub g4_uuu: Complex64,
    pub g4_uvv: Complex64,
    pub g4_uuv: Complex64,
    pub g4_vvv: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsVerdict {
    AttractingCurve,
    RepellingCurve,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsReport {
    pub varsigma1: Complex64,
    pub varsigma2: Complex64,
    pub varsigma3: Complex64,
    pub varsigma4: Complex64,
    /// First Lyapunov quantity; negative means the curve attracts.
    pub psi: f64,
    pub verdict: NsVerdict,
    pub g_partials: GPartials,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NsError {
    NotAFixedPoint { residual: f64 },
    Singular,
    /// V is (numerically) zero: no finite circle-crossing step size.
    NotInNsRegion,
    /// i010 = 0 or sigma2 = 0: the eigenframe transform is singular.
    DegenerateTransform,
}

impl fmt::Display for NsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NsError::NotAFixedPoint { residual } => {
                write!(f, "not a fixed point (residual {residual:.3e})")
            }
            NsError::Singular => write!(f, "state is on the grazing singularity"),
            NsError::NotInNsRegion => write!(f, "no finite circle-crossing step size"),
            NsError::DegenerateTransform => {
                write!(f, "eigenframe transform is singular here")
            }
        }
    }
}

impl core::error::Error for NsError {}

fn lift(e: FlipError) -> NsError {
    match e {
        FlipError::NotAFixedPoint { residual } => NsError::NotAFixedPoint { residual },
        FlipError::Singular => NsError::Singular,
        // taylor_coeffs can only fail in the two ways above
        _ => NsError::DegenerateTransform,
    }
}

fn ne_rel(x: f64, y: f64) -> bool {
    (x - y).abs() > RESONANCE_RTOL * x.abs().max(y.abs()).max(1e-12)
}

/// Eigenframe at the circle-crossing step size delta2 = -U/V.
pub fn ns_frame(cfg: &MapConfig, e: &State) -> Result<NsFrame, NsError> {
    taylor_coeffs(cfg, e).map_err(lift)?;
    let cd = char_data(cfg, &jacobian(cfg, e));
    let (u, v) = (cd.u, cd.v);
    if v.abs() < V_TOL {
        return Err(NsError::NotInNsRegion);
    }
    let delta2 = -u / v;
    let sigma1 = 1.0 + u * delta2 / 2.0;
    let disc = 4.0 * v - u * u;
    let half = delta2 / 2.0;
    let sigma2 = if disc >= 0.0 {
        Complex64::new(half * libm::sqrt(disc), 0.0)
    } else {
        Complex64::new(0.0, half * libm::sqrt(-disc))
    };
    let i = Complex64::new(0.0, 1.0);
    let lambda = Complex64::new(sigma1, 0.0) + i * sigma2;
    let lambda_bar = Complex64::new(sigma1, 0.0) - i * sigma2;
    Ok(NsFrame {
        delta2,
        lambda,
        lambda_bar,
        sigma1,
        sigma2,
        d_mod: -u / 2.0,
        resonance_ok: [ne_rel(u * u, 2.0 * v), ne_rel(u * u, 3.0 * v)],
        in_region: u < 0.0 && u * u < 4.0 * v,
    })
}

struct Inner {
    mm: Complex64,
    cc: Complex64,
    mc: Complex64,
    mmm: Complex64,
    mcc: Complex64,
    mmc: Complex64,
    ccc: Complex64,
}

fn inner_terms(t: &TaylorCoeffs, q: f64, sigma2: Complex64) -> (Inner, Inner) {
    let re = |x: f64| Complex64::new(x, 0.0);
    let s2 = sigma2 * sigma2;
    let s3 = s2 * sigma2;
    let i = Inner {
        mm: re(2.0 * t.i200 * t.i010 * t.i010 + 2.0 * t.i020 * q * q
            + 2.0 * t.i110 * t.i010 * q),
        cc: re(2.0 * t.i020) * s2,
        mc: re(-2.0 * t.i020 * q) * sigma2 - re(t.i110 * t.i010) * sigma2,
        mmm: re(6.0 * t.i120 * t.i010 * q * q + 6.0 * t.i030 * q * q * q),
        mcc: re(2.0 * t.i120 * t.i010) * s2 + re(6.0 * t.i030 * q) * s2,
        mmc: re(-4.0 * t.i120 * t.i010 * q) * sigma2 - re(6.0 * t.i030 * q * q) * sigma2,
        ccc: re(-6.0 * t.i030) * s3,
    };
    let zero = Complex64::new(0.0, 0.0);
    let j = Inner {
        mm: re(2.0 * t.j020 * q * q + 2.0 * t.j110 * t.i010 * q),
        cc: re(2.0 * t.j020) * s2,
        mc: re(-2.0 * t.j020 * q) * sigma2 - re(t.j110 * t.i010) * sigma2,
        mmm: zero,
        mcc: zero,
        mmc: zero,
        ccc: zero,
    };
    (i, j)
}

/// First Lyapunov quantity and normal-form data at the circle crossing.
pub fn ns_discriminant(cfg: &MapConfig, e: &State) -> Result<NsReport, NsError> {
    let frame = ns_frame(cfg, e)?;
    let cfg2 = MapConfig::new(cfg.params, frame.delta2);
    let t = taylor_coeffs(&cfg2, e).map_err(lift)?;
    if t.i010.abs() < TRANSFORM_TOL {
        return Err(NsError::DegenerateTransform);
    }
    if frame.sigma2.norm() < SIGMA2_TOL {
        return Err(NsError::DegenerateTransform);
    }

    let q = frame.sigma1 - t.i100;
    let (inner, jx) = inner_terms(&t, q, frame.sigma2);
    let i010 = Complex64::new(t.i010, 0.0);
    let front = Complex64::new(t.i100 - frame.sigma1, 0.0);
    let g3 = |x: Complex64| x / i010;
    let g4 = |x: Complex64, jv: Complex64| {
        -(front * x + i010 * jv) / (frame.sigma2 * i010)
    };

    let g = GPartials {
        g3_uu: g3(inner.mm),
        g3_vv: g3(inner.cc),
        g3_uv: g3(inner.mc),
        g3_uuu: g3(inner.mmm),
        g3_uvv: g3(inner.mcc),
        g3_uuv: g3(inner.mmc),
        g3_vvv: g3(inner.ccc),
        g4_uu: g4(inner.mm, jx.mm),
        g4_vv: g4(inner.cc, jx.cc),
        g4_uv: g4(inner.mc, jx.mc),
        g4_uuu: g4(inner.mmm, jx.mmm),
        g4_uvv: g4(inner.mcc, jx.mcc),
        g4_uuv: g4(inner.mmc, jx.mmc),
        g4_vvv: g4(inner.ccc, jx.ccc),
    };

    let i = Complex64::new(0.0, 1.0);
    let two = Complex64::new(2.0, 0.0);
    let vs1 = ((g.g3_uu - g.g3_vv + two * g.g4_uv)
        + i * (g.g4_uu - g.g4_vv - two * g.g3_uv))
        / 8.0;
    let vs2 = ((g.g3_uu + g.g3_vv) + i * (g.g4_uu + g.g4_vv)) / 4.0;
    let vs3 = ((g.g3_uu - g.g3_vv - two * g.g4_uv)
        + i * (g.g4_uu - g.g4_vv + two * g.g3_uv))
        / 8.0;
    let vs4 = ((g.g3_uuu + g.g3_uvv + g.g4_uuv + g.g4_vvv)
        + i * (g.g4_uuu + g.g4_uvv - g.g3_uuv - g.g3_vvv))
        / 16.0;
    // formal bars: -i in place of +i, not numeric conjugation
    let vs2b = ((g.g3_uu + g.g3_vv) - i * (g.g4_uu + g.g4_vv)) / 4.0;
    let vs3b = ((g.g3_uu - g.g3_vv - two * g.g4_uv)
        - i * (g.g4_uu - g.g4_vv + two * g.g3_uv))
        / 8.0;

    let one = Complex64::new(1.0, 0.0);
    let (lam, lamb) = (frame.lambda, frame.lambda_bar);
    let head = (one - two * lam) * lamb * lamb / (one - lam);
    let psi = -(head * vs1 * vs2).re - 0.5 * (vs2 * vs2b).re - (vs3 * vs3b).re
        + (lamb * vs4).re;

    let verdict = if !frame.resonance_ok[0] || !frame.resonance_ok[1] || psi.abs() < DEGENERATE_PSI
    {
        NsVerdict::Degenerate
    } else if psi < 0.0 {
        NsVerdict::AttractingCurve
    } else {
        NsVerdict::RepellingCurve
    };

    Ok(NsReport {
        varsigma1: vs1,
        varsigma2: vs2,
        varsigma3: vs3,
        varsigma4: vs4,
        psi,
        verdict,
        g_partials: g,
    })
}
