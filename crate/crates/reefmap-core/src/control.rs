//! Chaos control: OGY-style step-size feedback around an unstable fixed
//! point, and the hybrid scheme that blends the map with the identity.
//!
//! OGY gain selection reduces to three half-plane conditions in the gain
//! plane (the Jury conditions of the closed loop, each linear in the gains);
//! their intersection, when bounded, is the stabilizing triangle.

use crate::model::{continuous_rhs, step, GRAZING_TOL};
use crate::params::{MapConfig, State};
use crate::stability::{eigenvalues, jacobian, Jacobian2};
use alloc::vec::Vec;
use core::fmt;

/// Fixed-point residual gate for control design.
const RESIDUAL_TOL: f64 = 1e-8;
/// |det C| below this means the linearized pair (J, B) is uncontrollable.
const CONTROLLABILITY_TOL: f64 = 1e-12;
/// Two boundary lines with cross product below this are treated as parallel.
const PARALLEL_TOL: f64 = 1e-12;
/// Orbit magnitude beyond this counts as divergence.
const DIVERGENCE_CUTOFF: f64 = 1e6;

/// Half-plane boundary rho1*x + rho2*y + c = 0 in the gain plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OgyLine {
    pub rho1: f64,
    pub rho2: f64,
    pub c: f64,
}

impl OgyLine {
    /// Signed value at a gain pair; the stable side is given per line below.
    pub fn eval(&self, rho1: f64, rho2: f64) -> f64 {
        self.rho1 * rho1 + self.rho2 * rho2 + self.c
    }
}

/// Gain-plane geometry for step-size feedback around a fixed point.
///
/// Stability of the closed loop J - B*H with H = (rho1, rho2) is equivalent
/// to lines[0] < 0, lines[1] < 0, lines[2] > 0 at the gain pair.
#[derive(Debug, Clone, PartialEq)]
pub struct OgyDesign {
    pub j: Jacobian2,
    /// Control direction: sensitivity of the map to the step size.
    pub b: (f64, f64),
    /// Controllability matrix [B, J B] by columns.
    pub cmat: [[f64; 2]; 2],
    pub det_c: f64,
    pub controllable: bool,
    pub lines: [OgyLine; 3],
    /// Vertices of the stabilizing region, one per boundary pair that
    /// intersects on the correct side of the third line.
    pub triangle: Vec<(f64, f64)>,
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlError {
    NotAFixedPoint { residual: f64 },
    Singular,
}

impl fmt::Display for ControlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlError::NotAFixedPoint { residual } => {
                write!(f, "not a fixed point (residual {residual:.3e})")
            }
            ControlError::Singular => write!(f, "state is on the grazing singularity"),
        }
    }
}

impl core::error::Error for ControlError {}

/// Closed-loop matrix J - B*H for the gain row H = (rho1, rho2).
pub fn closed_loop(j: &Jacobian2, b: (f64, f64), gains: (f64, f64)) -> Jacobian2 {
    Jacobian2 {
        a11: j.a11 - b.0 * gains.0,
        a12: j.a12 - b.0 * gains.1,
        a21: j.a21 - b.1 * gains.0,
        a22: j.a22 - b.1 * gains.1,
    }
}

/// Largest eigenvalue modulus of a 2x2 matrix.
pub fn spectral_radius(j: &Jacobian2) -> f64 {
    let e = eigenvalues(j);
    e[0].norm().max(e[1].norm())
}

/// Gain-plane design for an explicit linearization (J, B).
pub fn ogy_lines_from(j: &Jacobian2, b: (f64, f64)) -> OgyDesign {
    let (b1, b2) = b;
    let tr = j.trace();
    let det = j.det();
    let c1 = j.a22 * b1 - j.a12 * b2;
    let c2 = j.a11 * b2 - j.a21 * b1;
    let lines = [
        OgyLine { rho1: -c1, rho2: -c2, c: det - 1.0 },
        OgyLine { rho1: -(b1 - c1), rho2: -(b2 - c2), c: -(1.0 - tr + det) },
        OgyLine { rho1: -(b1 + c1), rho2: -(b2 + c2), c: 1.0 + tr + det },
    ];

    let mut triangle = Vec::new();
    for (i, k, third) in [(0usize, 1usize, 2usize), (0, 2, 1), (1, 2, 0)] {
        let (li, lk) = (&lines[i], &lines[k]);
        let den = li.rho1 * lk.rho2 - li.rho2 * lk.rho1;
        if den.abs() < PARALLEL_TOL {
            continue;
        }
        let x = (-li.c * lk.rho2 + lk.c * li.rho2) / den;
        let y = (-li.rho1 * lk.c + lk.rho1 * li.c) / den;
        let side = lines[third].eval(x, y);
        let ok = if third == 2 { side > 0.0 } else { side < 0.0 };
        if ok {
            triangle.push((x, y));
        }
    }
    let bounded = triangle.len() == 3;

    let jb = (j.a11 * b1 + j.a12 * b2, j.a21 * b1 + j.a22 * b2);
    let cmat = [[b1, jb.0], [b2, jb.1]];
    let det_c = b1 * jb.1 - b2 * jb.0;
    OgyDesign {
        j: *j,
        b,
        cmat,
        det_c,
        controllable: det_c.abs() >= CONTROLLABILITY_TOL,
        lines,
        triangle,
        bounded,
    }
}

/// Gain-plane design at a fixed point of the map, with B taken as the
/// step-size sensitivity (the continuous-time vector field there).
pub fn ogy_design(cfg: &MapConfig, e: &State) -> Result<OgyDesign, ControlError> {
    if (1.0 - e.c).abs() < GRAZING_TOL {
        return Err(ControlError::Singular);
    }
    let rhs = continuous_rhs(&cfg.params, e).map_err(|_| ControlError::Singular)?;
    let residual = rhs.0.abs().max(rhs.1.abs());
    if residual > RESIDUAL_TOL {
        return Err(ControlError::NotAFixedPoint { residual });
    }
    let j = jacobian(cfg, e);
    Ok(ogy_lines_from(&j, rhs))
}

/// Controlled orbit of the full nonlinear map under step-size feedback.
#[derive(Debug, Clone, PartialEq)]
pub struct OgyRun {
    /// States after each step; index 0 is the first stepped state.
    pub states: Vec<State>,
    /// Step size actually used to produce each state.
    pub deltas: Vec<f64>,
    /// First step index opening a sustained capture window, if any.
    pub captured: Option<usize>,
    /// Step index where the orbit diverged or hit the singularity, if any.
    pub diverged: Option<usize>,
}

/// First index in `states` where the sup-distance to `target` stays below
/// `tol` for `run_len` consecutive samples.
pub fn capture_index(
    states: &[State],
    target: &State,
    tol: f64,
    run_len: usize,
) -> Option<usize> {
    let mut first = None;
    let mut run = 0usize;
    for (n, s) in states.iter().enumerate() {
        let dist = (s.m - target.m).abs().max((s.c - target.c).abs());
        if dist < tol {
            if first.is_none() {
                first = Some(n);
            }
            run += 1;
            if run >= run_len {
                return first;
            }
        } else {
            first = None;
            run = 0;
        }
    }
    None
}

/// Iterate the map with delta_n = delta0 - rho1 (M - M*) - rho2 (C - C*),
/// switching the feedback off whenever it would move the step size by more
/// than `epsilon`.
pub fn ogy_simulate(
    cfg: &MapConfig,
    target: &State,
    gains: (f64, f64),
    epsilon: f64,
    steps: usize,
    ic: State,
) -> OgyRun {
    let delta0 = cfg.delta;
    let mut states = Vec::with_capacity(steps);
    let mut deltas = Vec::with_capacity(steps);
    let mut s = ic;
    let mut diverged = None;
    for n in 0..steps {
        let mut dn = delta0 - gains.0 * (s.m - target.m) - gains.1 * (s.c - target.c);
        if (dn - delta0).abs() > epsilon {
            dn = delta0;
        }
        let cfg_n = MapConfig::new(cfg.params, dn);
        match step(&cfg_n, &s) {
            Ok(next) => {
                s = next;
                states.push(s);
                deltas.push(dn);
                if !s.m.is_finite()
                    || !s.c.is_finite()
                    || s.m.abs() > DIVERGENCE_CUTOFF
                    || s.c.abs() > DIVERGENCE_CUTOFF
                {
                    diverged = Some(n);
                    break;
                }
            }
            Err(_) => {
                diverged = Some(n);
                break;
            }
        }
    }
    let captured = capture_index(&states, target, 1e-6, 100);
    OgyRun { states, deltas, captured, diverged }
}

/// Orbit of the linearized closed loop x_{n+1} = (J - B H) x_n.
pub fn closed_loop_orbit(
    j: &Jacobian2,
    b: (f64, f64),
    gains: (f64, f64),
    x0: (f64, f64),
    steps: usize,
) -> Vec<(f64, f64)> {
    let a = closed_loop(j, b, gains);
    let mut out = Vec::with_capacity(steps);
    let mut x = x0;
    for _ in 0..steps {
        x = (a.a11 * x.0 + a.a12 * x.1, a.a21 * x.0 + a.a22 * x.1);
        out.push(x);
    }
    out
}

/// Hybrid-control design at a fixed point: the open interval of blend
/// weights zeta for which zeta*J + (1-zeta)*I is Schur stable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridDesign {
    pub j: Jacobian2,
    /// Stabilizing open interval (0, hi], reported as its endpoints; None
    /// when no blend weight in (0, 1] stabilizes the point.
    pub zeta_interval: Option<(f64, f64)>,
}

impl HybridDesign {
    /// Blended matrix zeta*J + (1-zeta)*I.
    pub fn j_star(&self, zeta: f64) -> Jacobian2 {
        Jacobian2 {
            a11: zeta * self.j.a11 + (1.0 - zeta),
            a12: zeta * self.j.a12,
            a21: zeta * self.j.a21,
            a22: zeta * self.j.a22 + (1.0 - zeta),
        }
    }
}

/// Stabilizing blend interval at a fixed point. Blending with weight zeta is
/// the map with effective step size zeta*delta, so the interval is the
/// stable-step window rescaled by the working step size.
pub fn hybrid_design(cfg: &MapConfig, e: &State) -> Result<HybridDesign, ControlError> {
    if (1.0 - e.c).abs() < GRAZING_TOL {
        return Err(ControlError::Singular);
    }
    let rhs = continuous_rhs(&cfg.params, e).map_err(|_| ControlError::Singular)?;
    let residual = rhs.0.abs().max(rhs.1.abs());
    if residual > RESIDUAL_TOL {
        return Err(ControlError::NotAFixedPoint { residual });
    }
    let j = jacobian(cfg, e);
    let cd = crate::stability::char_data(cfg, &j);
    let (u, v) = (cd.u, cd.v);
    let zeta_interval = if v <= 0.0 || u >= 0.0 {
        None
    } else {
        let s_max = if u < -2.0 * libm::sqrt(v) {
            (-u - libm::sqrt(u * u - 4.0 * v)) / v
        } else {
            -u / v
        };
        let hi = (s_max / cfg.delta).min(1.0);
        Some((0.0, hi))
    };
    Ok(HybridDesign { j, zeta_interval })
}

/// Orbit of the blended map zeta*T(s) + (1-zeta)*s. zeta must lie in (0, 1];
/// zeta = 1 runs the plain map bit-for-bit.
pub fn hybrid_simulate(
    cfg: &MapConfig,
    zeta: f64,
    ic: State,
    steps: usize,
) -> Result<Vec<State>, crate::model::DomainError> {
    assert!(zeta > 0.0 && zeta <= 1.0, "blend weight must be in (0, 1]");
    let mut out = Vec::with_capacity(steps);
    let mut s = ic;
    for _ in 0..steps {
        let next = step(cfg, &s)?;
        s = if zeta == 1.0 {
            next
        } else {
            State {
                m: zeta * next.m + (1.0 - zeta) * s.m,
                c: zeta * next.c + (1.0 - zeta) * s.c,
            }
        };
        out.push(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{closed_form_equilibria, interior_equilibria};
    use crate::params::ModelParams;
    use proptest::prelude::*;

    fn fig2() -> ModelParams {
        ModelParams { r: 0.2, k: 0.5, a: 0.65, g: 0.3, gamma: 0.4, alpha: 0.6, d: 0.1 }
    }

    fn ns2() -> ModelParams {
        ModelParams { r: 0.6, k: 0.9, a: 0.45, g: 0.3, gamma: 0.4, alpha: 0.6, d: 0.1 }
    }

    fn reference_jb() -> (Jacobian2, (f64, f64)) {
        (
            Jacobian2 { a11: 1.5050, a12: 0.0360, a21: -0.1260, a22: 1.2480 },
            (0.0410, 0.0694),
        )
    }

    #[test]
    fn gain_plane_lines_at_reference_linearization() {
        let (j, b) = reference_jb();
        let d = ogy_lines_from(&j, b);
        let want = [
            (-0.0486696, -0.109613, 0.882776),
            (0.0076696, 0.040213, -0.129776),
            (-0.0896696, -0.179013, 5.635776),
        ];
        for (line, w) in d.lines.iter().zip(want) {
            assert!((line.rho1 - w.0).abs() < 1e-12, "{line:?}");
            assert!((line.rho2 - w.1).abs() < 1e-12, "{line:?}");
            assert!((line.c - w.2).abs() < 1e-12, "{line:?}");
        }
        assert!((d.det_c - -0.001116463).abs() < 1e-9);
        assert!(d.controllable);
        assert!((d.cmat[0][1] - 0.0642034).abs() < 1e-10);
        assert!((d.cmat[1][1] - 0.0814452).abs() < 1e-10);
    }

    #[test]
    fn stabilizing_triangle_at_reference_linearization() {
        let (j, b) = reference_jb();
        let d = ogy_lines_from(&j, b);
        assert!(d.bounded);
        let want = [
            (19.05476417, -0.40699324),
            (411.77005725, -174.77769953),
            (91.09120182, -14.14609906),
        ];
        for (v, w) in d.triangle.iter().zip(want) {
            assert!((v.0 - w.0).abs() < 1e-6 && (v.1 - w.1).abs() < 1e-6, "{v:?}");
        }
        // centroid is strictly inside and the closed loop contracts there
        let cx = d.triangle.iter().map(|v| v.0).sum::<f64>() / 3.0;
        let cy = d.triangle.iter().map(|v| v.1).sum::<f64>() / 3.0;
        assert!((cx - 173.97200775).abs() < 1e-6);
        assert!((cy - -63.11026394).abs() < 1e-6);
        assert!(d.lines[0].eval(cx, cy) < 0.0);
        assert!(d.lines[1].eval(cx, cy) < 0.0);
        assert!(d.lines[2].eval(cx, cy) > 0.0);
        assert!(spectral_radius(&closed_loop(&j, b, (cx, cy))) < 1.0);
        // zero gain leaves the open loop, which is unstable here
        assert!(spectral_radius(&closed_loop(&j, b, (0.0, 0.0))) > 1.0);
        assert!(d.lines[0].eval(0.0, 0.0) > 0.0);
    }

    #[test]
    fn exact_fixed_point_is_uncontrollable_through_step_size() {
        let p = fig2();
        let cfg = MapConfig::new(p, 1.0);
        let e = interior_equilibria(&p)[1];
        let d = ogy_design(&cfg, &e).unwrap();
        assert!(d.b.0.abs() < 1e-12 && d.b.1.abs() < 1e-12);
        assert!(!d.controllable);
    }

    #[test]
    fn off_equilibrium_design_is_rejected() {
        let cfg = MapConfig::new(fig2(), 1.0);
        let err = ogy_design(&cfg, &State { m: 0.3, c: 0.2 }).unwrap_err();
        assert!(matches!(err, ControlError::NotAFixedPoint { .. }));
    }

    #[test]
    fn zero_gain_run_is_bit_identical_to_plain_iteration() {
        let cfg = MapConfig::new(fig2(), 1.0);
        let e = interior_equilibria(&fig2())[1];
        let ic = State { m: 0.2, c: 0.3 };
        let run = ogy_simulate(&cfg, &e, (0.0, 0.0), 0.2, 50, ic);
        let mut s = ic;
        for (n, got) in run.states.iter().enumerate() {
            s = step(&cfg, &s).unwrap();
            assert!(s.m == got.m && s.c == got.c, "step {n} differs");
            assert_eq!(run.deltas[n], 1.0);
        }
        assert_eq!(run.diverged, None);
    }

    #[test]
    fn hybrid_interval_on_coral_axis_point() {
        let p = ns2();
        let cfg = MapConfig::new(p, 3.1);
        let e = closed_form_equilibria(&p).2.unwrap();
        let d = hybrid_design(&cfg, &e).unwrap();
        let (lo, hi) = d.zeta_interval.unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.850762141).abs() < 1e-9, "hi = {hi}");
        // at the upper endpoint one eigenvalue of the blend sits on the circle
        let eigs = eigenvalues(&d.j_star(hi));
        let near = (eigs[0].re + 1.0).abs().min((eigs[1].re + 1.0).abs());
        assert!(near < 1e-8, "eigs = {eigs:?}");
        let other = if (eigs[0].re + 1.0).abs() < (eigs[1].re + 1.0).abs() {
            eigs[1].re
        } else {
            eigs[0].re
        };
        assert!((other - -0.31868132).abs() < 1e-7);
    }

    #[test]
    fn hybrid_interval_second_reference_set() {
        let p = ModelParams { r: 0.5, k: 0.7, a: 0.65, g: 0.3, gamma: 0.4, alpha: 0.6, d: 0.1 };
        let cfg = MapConfig::new(p, 3.3);
        let e = closed_form_equilibria(&p).2.unwrap();
        let d = hybrid_design(&cfg, &e).unwrap();
        let (_, hi) = d.zeta_interval.unwrap();
        assert!((hi - 0.876232202).abs() < 1e-9, "hi = {hi}");
    }

    #[test]
    fn hybrid_interval_empty_at_saddle_type_interior_point() {
        let p = ModelParams { r: 0.5, k: 0.7, a: 0.65, g: 0.3, gamma: 0.4, alpha: 0.6, d: 0.1 };
        let cfg = MapConfig::new(p, 1.0);
        let e = interior_equilibria(&p)
            .into_iter()
            .find(|s| (s.m - 0.063310147099).abs() < 1e-6)
            .unwrap();
        let d = hybrid_design(&cfg, &e).unwrap();
        assert_eq!(d.zeta_interval, None);
    }

    #[test]
    fn hybrid_captures_at_reference_blends() {
        let p = ns2();
        let cfg = MapConfig::new(p, 3.1);
        let e = closed_form_equilibria(&p).2.unwrap();
        let ic = State { m: 0.08, c: 0.68 };
        for (zeta, want) in [(0.2, 61), (0.3, 39), (0.5, 20), (0.8, 64)] {
            let states = hybrid_simulate(&cfg, zeta, ic, 1000).unwrap();
            let got = capture_index(&states, &e, 1e-6, 100);
            assert_eq!(got, Some(want), "zeta = {zeta}");
        }
    }

    #[test]
    fn full_blend_is_bit_identical_to_the_plain_map() {
        let cfg = MapConfig::new(ns2(), 3.1);
        let ic = State { m: 0.08, c: 0.68 };
        let blended = hybrid_simulate(&cfg, 1.0, ic, 50).unwrap();
        let mut s = ic;
        for got in &blended {
            s = step(&cfg, &s).unwrap();
            assert!(s.m == got.m && s.c == got.c);
        }
    }

    #[test]
    fn blending_preserves_fixed_points() {
        let p = ns2();
        let cfg = MapConfig::new(p, 3.1);
        let e = closed_form_equilibria(&p).2.unwrap();
        let states = hybrid_simulate(&cfg, 0.37, e, 10).unwrap();
        for s in &states {
            assert!((s.m - e.m).abs() < 1e-14 && (s.c - e.c).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn jury_lines_match_the_spectral_radius(
            a11 in -2.0f64..2.0, a12 in -2.0f64..2.0,
            a21 in -2.0f64..2.0, a22 in -2.0f64..2.0,
            b1 in -1.0f64..1.0, b2 in -1.0f64..1.0,
            r1 in -5.0f64..5.0, r2 in -5.0f64..5.0,
        ) {
            let j = Jacobian2 { a11, a12, a21, a22 };
            let d = ogy_lines_from(&j, (b1, b2));
            let evals = [
                d.lines[0].eval(r1, r2),
                d.lines[1].eval(r1, r2),
                d.lines[2].eval(r1, r2),
            ];
            let rho = spectral_radius(&closed_loop(&j, (b1, b2), (r1, r2)));
            // skip razor-edge cases on either side of the correspondence
            prop_assume!(evals.iter().all(|v| v.abs() > 1e-9));
            prop_assume!((rho - 1.0).abs() > 1e-9);
            let stable_side = evals[0] < 0.0 && evals[1] < 0.0 && evals[2] > 0.0;
            prop_assert_eq!(stable_side, rho < 1.0,
                "lines {:?} vs spectral radius {}", evals, rho);
        }
    }
}
