//! Fixed-point enumeration: trivial, axial, and interior equilibria.
//!
//! Interior points are intersections of the coral nullcline (affine in M)
//! with the macroalgae nullcline, reduced to a 1-D root problem in M.
//! Multiplying the residual by the grazing denominator shows it is a
//! quadratic in M, so the root count is structurally at most two.

use crate::model::continuous_rhs;
use crate::params::{ModelParams, State};
use alloc::vec::Vec;

/// Number of scan cells over the admissible M-interval.
const SCAN_CELLS: usize = 4096;
/// Bisection residual target on the nullcline function phi.
const PHI_TOL: f64 = 1e-12;
/// Adjacent sign-change roots closer than this in residual are one tangency.
const PAIR_MERGE_PHI: f64 = 1e-6;
/// |phi| threshold for tangency roots found without a sign change.
const TANGENCY_PHI: f64 = 1e-8;

/// All ecologically relevant fixed points of the map.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSet {
    /// E0 = (0, 0).
    pub trivial: State,
    /// (M_A, 0) when M_A is inside (0, 1).
    pub axial_m: Option<State>,
    /// (0, C_A) when C_A is inside (0, 1).
    pub axial_c: Option<State>,
    /// Zero to two coexistence points, sorted by ascending M.
    pub interior: Vec<State>,
}

/// The coral nullcline solved for C: alpha(1-M-C) - d - aM = 0.
pub fn coral_nullcline_c(p: &ModelParams, m: f64) -> f64 {
    1.0 - p.d / p.alpha - m * (p.alpha + p.a) / p.alpha
}

/// Macroalgae nullcline residual along the coral nullcline.
pub fn phi(p: &ModelParams, m: f64) -> f64 {
    let c = coral_nullcline_c(p, m);
    p.r * (1.0 - m / p.k) + p.a * c - p.g / (1.0 - c) + p.gamma * (1.0 - m - c)
}

/// Trivial and axial fixed points in closed form.
pub fn closed_form_equilibria(p: &ModelParams) -> (State, Option<State>, Option<State>) {
    let trivial = State { m: 0.0, c: 0.0 };
    let m_a = (p.r - p.g + p.gamma) * p.k / (p.r + p.k * p.gamma);
    let axial_m = if m_a > 0.0 && m_a < 1.0 { Some(State { m: m_a, c: 0.0 }) } else { None };
    let c_a = 1.0 - p.d / p.alpha;
    let axial_c = if c_a > 0.0 && c_a < 1.0 { Some(State { m: 0.0, c: c_a }) } else { None };
    (trivial, axial_m, axial_c)
}

fn bisect(p: &ModelParams, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = phi(p, lo);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval exhausted at f64 resolution
        }
        let fmid = phi(p, mid);
        if fmid == 0.0 {
            return mid;
        }
        if (flo < 0.0) == (fmid < 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        if libm::fabs(fmid) < PHI_TOL {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    // return whichever bracket point has the smallest residual
    let mut best = mid;
    let mut best_phi = libm::fabs(phi(p, mid));
    for cand in [lo, hi] {
        let f = libm::fabs(phi(p, cand));
        if f < best_phi {
            best = cand;
            best_phi = f;
        }
    }
    best
}

/// Interior equilibria via uniform scan plus bisection, sorted by M.
pub fn interior_equilibria(p: &ModelParams) -> Vec<State> {
    let mut roots: Vec<f64> = Vec::new();
    if p.alpha <= p.d || p.alpha + p.a <= 0.0 {
        return Vec::new(); // coral nullcline never enters the interior
    }
    let m_hi = (p.alpha - p.d) / (p.alpha + p.a);

    // Grid of phi values; index 0 sits on the M=0 boundary and is skipped
    // when the grazing denominator degenerates there (d = 0).
    let mut vals: Vec<f64> = Vec::with_capacity(SCAN_CELLS + 1);
    for i in 0..=SCAN_CELLS {
        let m = m_hi * (i as f64) / (SCAN_CELLS as f64);
        let c = coral_nullcline_c(p, m);
        if (1.0 - c).abs() < 1e-12 {
            vals.push(f64::NAN);
        } else {
            vals.push(phi(p, m));
        }
    }
    let grid_m = |i: usize| m_hi * (i as f64) / (SCAN_CELLS as f64);

    // Sign-change cells -> bisection; exact grid zeros recorded directly.
    for i in 0..SCAN_CELLS {
        let (f0, f1) = (vals[i], vals[i + 1]);
        if f0.is_nan() || f1.is_nan() {
            continue;
        }
        if f0 == 0.0 {
            roots.push(grid_m(i));
        } else if f0 * f1 < 0.0 {
            roots.push(bisect(p, grid_m(i), grid_m(i + 1)));
        }
    }
    if vals[SCAN_CELLS] == 0.0 {
        roots.push(grid_m(SCAN_CELLS));
    }

    roots.retain(|&m| m > 1e-9 && coral_nullcline_c(p, m) > 1e-9);
    roots.sort_by(|x, y| x.partial_cmp(y).expect("roots are finite"));
    roots.dedup_by(|x, y| (*x - *y).abs() < 1e-10);

    // A root pair with |phi| below PAIR_MERGE_PHI on the whole gap between
    // them is one physical tangency; keep the lower true crossing.
    let mut merged: Vec<f64> = Vec::new();
    for &root in &roots {
        if let Some(&prev) = merged.last() {
            let mut gap_max = 0.0f64;
            for j in 1..64 {
                let m = prev + (root - prev) * (j as f64) / 64.0;
                gap_max = gap_max.max(libm::fabs(phi(p, m)));
            }
            if gap_max < PAIR_MERGE_PHI {
                continue;
            }
        }
        merged.push(root);
    }
    let mut roots = merged;

    // Tangency without a sign change: a local minimum of |phi| that dips
    // below threshold while phi keeps one sign (curvature check).
    for i in 1..SCAN_CELLS {
        let (fa, fb, fc) = (vals[i - 1], vals[i], vals[i + 1]);
        if fa.is_nan() || fb.is_nan() || fc.is_nan() {
            continue;
        }
        let same_sign = (fa > 0.0) == (fb > 0.0) && (fb > 0.0) == (fc > 0.0);
        if !same_sign || fa == 0.0 || fb == 0.0 || fc == 0.0 {
            continue;
        }
        if !(libm::fabs(fb) < libm::fabs(fa) && libm::fabs(fb) < libm::fabs(fc)) {
            continue;
        }
        // ternary search on |phi| over the bracket
        let (mut lo, mut hi) = (grid_m(i - 1), grid_m(i + 1));
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if libm::fabs(phi(p, m1)) < libm::fabs(phi(p, m2)) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let m_min = 0.5 * (lo + hi);
        let f_min = libm::fabs(phi(p, m_min));
        let already = roots.iter().any(|&r| (r - m_min).abs() < 1e-6);
        // the residual bound on the returned point stays authoritative
        if !already && f_min < TANGENCY_PHI && m_min * f_min < 1e-9 && m_min > 1e-9 {
            roots.push(m_min);
        }
    }
    roots.sort_by(|x, y| x.partial_cmp(y).expect("roots are finite"));

    roots
        .into_iter()
        .map(|m| State { m, c: coral_nullcline_c(p, m) })
        .collect()
}

/// Convenience: the full equilibrium set.
pub fn find(p: &ModelParams) -> EquilibriumSet {
    let (trivial, axial_m, axial_c) = closed_form_equilibria(p);
    EquilibriumSet { trivial, axial_m, axial_c, interior: interior_equilibria(p) }
}

/// Max-norm of the continuous rhs at a point (the fixed-point residual).
pub fn residual(p: &ModelParams, s: &State) -> f64 {
    match continuous_rhs(p, s) {
        Ok((dm, dc)) => libm::fabs(dm).max(libm::fabs(dc)),
        Err(_) => f64::INFINITY,
    }
}
