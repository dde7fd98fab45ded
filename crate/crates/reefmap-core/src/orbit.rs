//! Orbit engine: iteration with divergence tracking, period detection,
//! attractor classification, Lyapunov exponents, and parameter sweeps.

use crate::model::step;
use crate::params::{MapConfig, State};
use crate::stability::jacobian;
use alloc::vec::Vec;
use core::fmt;

/// Orbit magnitude beyond this counts as divergence.
const DIVERGENCE_CUTOFF: f64 = 1e6;
/// Sup-norm recurrence tolerance for period detection.
const PERIOD_TOL: f64 = 1e-6;
/// Largest period the detector reports.
const MAX_PERIOD: usize = 64;
/// Classification needs at least this many retained samples.
const MIN_SAMPLES: usize = 512;
/// Lyapunov exponents above this count as chaotic.
const CHAOS_TOL: f64 = 0.005;
/// Tangent-iteration length used by the classifier.
const LYAP_STEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceCause {
    /// A coordinate left [-1e6, 1e6] or stopped being finite.
    Magnitude,
    /// The orbit landed on the grazing singularity C = 1.
    GrazingSingularity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Divergence {
    /// Total steps applied from the initial condition when the orbit broke.
    pub step: usize,
    pub cause: DivergenceCause,
}

/// Post-transient samples of one orbit, plus an optional divergence marker.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub samples: Vec<State>,
    pub divergence: Option<Divergence>,
}

/// Iterate the map, discard `transient` steps, and retain the next `samples`
/// states. Divergence cuts the orbit short and is recorded, not fatal.
pub fn iterate(cfg: &MapConfig, ic: State, transient: usize, samples: usize) -> Orbit {
    let mut out = Vec::with_capacity(samples);
    let mut s = ic;
    let total = transient + samples;
    for n in 0..total {
        match step(cfg, &s) {
            Ok(next) => s = next,
            Err(_) => {
                return Orbit {
                    samples: out,
                    divergence: Some(Divergence {
                        step: n,
                        cause: DivergenceCause::GrazingSingularity,
                    }),
                };
            }
        }
        if !s.m.is_finite()
            || !s.c.is_finite()
            || s.m.abs() > DIVERGENCE_CUTOFF
            || s.c.abs() > DIVERGENCE_CUTOFF
        {
            return Orbit {
                samples: out,
                divergence: Some(Divergence { step: n, cause: DivergenceCause::Magnitude }),
            };
        }
        if n >= transient {
            out.push(s);
        }
    }
    Orbit { samples: out, divergence: None }
}

/// Minimal period k <= 64 such that every sample recurs after k steps within
/// sup-norm 1e-6. Ascending search makes the reported k minimal.
pub fn detect_period(samples: &[State]) -> Option<usize> {
    for k in 1..=MAX_PERIOD {
        if samples.len() <= k {
            return None;
        }
        let mut worst = 0.0f64;
        for n in 0..samples.len() - k {
            let d = (samples[n + k].m - samples[n].m)
                .abs()
                .max((samples[n + k].c - samples[n].c).abs());
            worst = worst.max(d);
        }
        if worst < PERIOD_TOL {
            return Some(k);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttractorKind {
    FixedPoint,
    PeriodK(usize),
    QuasiPeriodic,
    Chaotic,
    Divergent,
}

impl fmt::Display for AttractorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttractorKind::FixedPoint => write!(f, "fixed_point"),
            AttractorKind::PeriodK(_) => write!(f, "periodic"),
            AttractorKind::QuasiPeriodic => write!(f, "quasiperiodic"),
            AttractorKind::Chaotic => write!(f, "chaotic"),
            AttractorKind::Divergent => write!(f, "divergent"),
        }
    }
}

/// What an orbit settled onto, with the evidence retained.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractorSummary {
    pub kind: AttractorKind,
    /// Retained post-transient states the verdict was made from.
    pub samples: Vec<State>,
    /// Largest Lyapunov exponent; computed only for aperiodic orbits.
    pub lyapunov: Option<f64>,
    /// Detected period; 1 for fixed points.
    pub period: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitError {
    InsufficientSamples { got: usize },
}

impl fmt::Display for OrbitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitError::InsufficientSamples { got } => {
                write!(f, "need at least {MIN_SAMPLES} samples, got {got}")
            }
        }
    }
}

impl core::error::Error for OrbitError {}

/// Largest Lyapunov exponent from `ic`: iterate a unit tangent vector with
/// the Jacobian, renormalizing every step, and average the log stretch.
/// Returns NaN if the orbit diverges within the n steps.
pub fn lyapunov(cfg: &MapConfig, ic: State, n: usize) -> f64 {
    let mut s = ic;
    let (mut v1, mut v2) = (1.0f64, 0.0f64);
    let mut acc = 0.0f64;
    for _ in 0..n {
        let j = jacobian(cfg, &s);
        let (w1, w2) = (j.a11 * v1 + j.a12 * v2, j.a21 * v1 + j.a22 * v2);
        let nv = libm::sqrt(w1 * w1 + w2 * w2);
        if !nv.is_finite() || nv <= 0.0 {
            return f64::NAN;
        }
        acc += libm::log(nv);
        v1 = w1 / nv;
        v2 = w2 / nv;
        match step(cfg, &s) {
            Ok(next) => s = next,
            Err(_) => return f64::NAN,
        }
        if !s.m.is_finite()
            || !s.c.is_finite()
            || s.m.abs() > DIVERGENCE_CUTOFF
            || s.c.abs() > DIVERGENCE_CUTOFF
        {
            return f64::NAN;
        }
    }
    acc / n as f64
}

/// Log-stretch average of a tangent vector carried along already-retained
/// samples; the cheap exponent estimate used inside sweeps.
pub fn lyapunov_along(cfg: &MapConfig, samples: &[State]) -> f64 {
    let (mut v1, mut v2) = (1.0f64, 0.0f64);
    let mut acc = 0.0f64;
    for s in samples {
        let j = jacobian(cfg, s);
        let (w1, w2) = (j.a11 * v1 + j.a12 * v2, j.a21 * v1 + j.a22 * v2);
        let nv = libm::sqrt(w1 * w1 + w2 * w2);
        if !nv.is_finite() || nv <= 0.0 {
            return f64::NAN;
        }
        acc += libm::log(nv);
        v1 = w1 / nv;
        v2 = w2 / nv;
    }
    acc / samples.len().max(1) as f64
}

fn summarize(cfg: &MapConfig, orbit: &Orbit, lyap_full: bool) -> AttractorSummary {
    if orbit.divergence.is_some() {
        return AttractorSummary {
            kind: AttractorKind::Divergent,
            samples: orbit.samples.clone(),
            lyapunov: None,
            period: None,
        };
    }
    if let Some(k) = detect_period(&orbit.samples) {
        let kind = if k == 1 { AttractorKind::FixedPoint } else { AttractorKind::PeriodK(k) };
        return AttractorSummary {
            kind,
            samples: orbit.samples.clone(),
            lyapunov: None,
            period: Some(k),
        };
    }
    let lam = if lyap_full {
        lyapunov(cfg, orbit.samples[0], LYAP_STEPS)
    } else {
        lyapunov_along(cfg, &orbit.samples)
    };
    let kind = if lam > CHAOS_TOL { AttractorKind::Chaotic } else { AttractorKind::QuasiPeriodic };
    AttractorSummary { kind, samples: orbit.samples.clone(), lyapunov: Some(lam), period: None }
}

/// Classify what an orbit settled onto. Divergent orbits classify as such
/// regardless of sample count; bounded orbits need at least 512 samples.
pub fn classify_attractor(cfg: &MapConfig, orbit: &Orbit) -> Result<AttractorSummary, OrbitError> {
    if orbit.divergence.is_none() && orbit.samples.len() < MIN_SAMPLES {
        return Err(OrbitError::InsufficientSamples { got: orbit.samples.len() });
    }
    Ok(summarize(cfg, orbit, true))
}

/// Which scalar the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Delta,
    R,
}

/// One bifurcation-diagram job: a grid of parameter values crossed with
/// initial conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: MapConfig,
    pub param: SweepParam,
    pub lo: f64,
    pub hi: f64,
    pub grid: usize,
    pub ics: Vec<State>,
    pub transient: usize,
    pub samples: usize,
}

impl SweepSpec {
    /// Grid value i of grid-1 equal subdivisions of [lo, hi].
    pub fn grid_value(&self, i: usize) -> f64 {
        self.lo + (self.hi - self.lo) * i as f64 / (self.grid - 1) as f64
    }

    /// Map configuration with the swept parameter set to `value`.
    pub fn cell_config(&self, value: f64) -> MapConfig {
        match self.param {
            SweepParam::Delta => MapConfig::new(self.base.params, value),
            SweepParam::R => {
                let mut p = self.base.params;
                p.r = value;
                MapConfig::new(p, self.base.delta)
            }
        }
    }
}

/// Result for one (grid value, initial condition) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub param_index: usize,
    pub ic_index: usize,
    pub param_value: f64,
    pub summary: AttractorSummary,
}

/// Evaluate one sweep cell. Pure in the spec and the two indices, so cells
/// can be computed in any order (or in parallel) with identical results.
pub fn sweep_cell(spec: &SweepSpec, param_index: usize, ic_index: usize) -> SweepCell {
    let value = spec.grid_value(param_index);
    let cfg = spec.cell_config(value);
    let orbit = iterate(&cfg, spec.ics[ic_index], spec.transient, spec.samples);
    // sweeps stay within a fixed per-cell budget: the exponent for aperiodic
    // cells is read from a tangent vector carried along the retained samples
    let summary = summarize(&cfg, &orbit, false);
    SweepCell { param_index, ic_index, param_value: value, summary }
}

/// Run every cell in deterministic (param index, ic index) order.
pub fn sweep(spec: &SweepSpec) -> Vec<SweepCell> {
    let mut out = Vec::with_capacity(spec.grid * spec.ics.len());
    for pi in 0..spec.grid {
        for ii in 0..spec.ics.len() {
            out.push(sweep_cell(spec, pi, ii));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::interior_equilibria;
    use crate::flip::{flip_point, FlipBranch};
    use crate::params::ModelParams;
    use crate::stability::{char_data, eigenvalues};

    fn fig2() -> ModelParams {
        ModelParams { r: 0.2, k: 0.5, a: 0.65, g: 0.3, gamma: 0.4, alpha: 0.6, d: 0.1 }
    }

    fn cascade(r: f64) -> ModelParams {
        ModelParams { r, k: 0.3, a: 0.9, g: 0.5, gamma: 0.8, alpha: 0.5, d: 0.1 }
    }

    #[test]
    fn equilibrium_orbit_is_a_fixed_point() {
        let p = fig2();
        let cfg = MapConfig::new(p, 1.0);
        let e = interior_equilibria(&p)[1];
        let orbit = iterate(&cfg, e, 0, 600);
        assert_eq!(orbit.divergence, None);
        assert_eq!(orbit.samples.len(), 600);
        for s in &orbit.samples {
            assert!((s.m - e.m).abs() < 1e-9 && (s.c - e.c).abs() < 1e-9);
        }
        let sum = classify_attractor(&cfg, &orbit).unwrap();
        assert_eq!(sum.kind, AttractorKind::FixedPoint);
        assert_eq!(sum.period, Some(1));
    }

    #[test]
    fn synthetic_two_cycle_detects_period_two() {
        let a = State { m: 0.1, c: 0.2 };
        let b = State { m: 0.3, c: 0.4 };
        let mut samples = Vec::new();
        for n in 0..600 {
            samples.push(if n % 2 == 0 { a } else { b });
        }
        assert_eq!(detect_period(&samples), Some(2));
        let orbit = Orbit { samples, divergence: None };
        let cfg = MapConfig::new(fig2(), 1.0);
        let sum = classify_attractor(&cfg, &orbit).unwrap();
        assert_eq!(sum.kind, AttractorKind::PeriodK(2));
    }

    #[test]
    fn period_detection_is_minimal() {
        let mut samples = Vec::new();
        for n in 0..600 {
            let phase = n % 6;
            samples.push(State { m: 0.1 + 0.01 * phase as f64, c: 0.5 });
        }
        assert_eq!(detect_period(&samples), Some(6));
    }

    #[test]
    fn runaway_orbit_is_marked_divergent() {
        let cfg = MapConfig::new(cascade(1.0), 12.0);
        let orbit = iterate(&cfg, State { m: 0.5, c: 0.3 }, 0, 512);
        let div = orbit.divergence.expect("orbit should blow up");
        assert_eq!(div.cause, DivergenceCause::Magnitude);
        let sum = classify_attractor(&cfg, &orbit).unwrap();
        assert_eq!(sum.kind, AttractorKind::Divergent);
    }

    #[test]
    fn grazing_start_is_marked_singular() {
        let cfg = MapConfig::new(fig2(), 1.0);
        let orbit = iterate(&cfg, State { m: 0.1, c: 1.0 - 1e-13 }, 0, 512);
        let div = orbit.divergence.unwrap();
        assert_eq!(div.step, 0);
        assert_eq!(div.cause, DivergenceCause::GrazingSingularity);
    }

    #[test]
    fn short_bounded_orbit_is_insufficient() {
        let cfg = MapConfig::new(fig2(), 1.0);
        let orbit = iterate(&cfg, State { m: 0.2, c: 0.3 }, 0, 100);
        assert_eq!(
            classify_attractor(&cfg, &orbit),
            Err(OrbitError::InsufficientSamples { got: 100 })
        );
    }

    #[test]
    fn flip_crossing_produces_a_two_cycle() {
        let p = fig2();
        let e = interior_equilibria(&p)[1];
        let cfg1 = MapConfig::new(p, 1.0);
        let d1 = flip_point(&cfg1, &e, FlipBranch::F1).unwrap();
        for factor in [1.001, 1.01] {
            let cfg = MapConfig::new(p, d1 * factor);
            let ic = State { m: e.m + 1e-4, c: e.c };
            let orbit = iterate(&cfg, ic, 20_000, 512);
            let sum = classify_attractor(&cfg, &orbit).unwrap();
            assert_eq!(sum.kind, AttractorKind::PeriodK(2), "factor {factor}");
        }
    }

    #[test]
    fn circle_crossing_produces_a_quasiperiodic_orbit() {
        // just past a genuine Neimark-Sacker point the orbit settles on the
        // bifurcating invariant curve
        let p = ModelParams {
            r: 0.479651,
            k: 0.473239,
            a: 0.905817,
            g: 0.443217,
            gamma: 0.160045,
            d: 0.220165,
            alpha: 0.633458,
        };
        let e = interior_equilibria(&p)
            .into_iter()
            .find(|s| (s.m - 0.198170384).abs() < 1e-6)
            .unwrap();
        let d2 = crate::ns::ns_frame(&MapConfig::new(p, 1.0), &e).unwrap().delta2;
        for factor in [1.005, 1.02] {
            let cfg = MapConfig::new(p, d2 * factor);
            let ic = State { m: e.m + 1e-3, c: e.c };
            let orbit = iterate(&cfg, ic, 8000, 512);
            let sum = classify_attractor(&cfg, &orbit).unwrap();
            assert_eq!(sum.kind, AttractorKind::QuasiPeriodic, "factor {factor}");
            assert!(sum.lyapunov.unwrap().abs() < CHAOS_TOL);
        }
    }

    #[test]
    fn lyapunov_at_a_sink_matches_the_log_spectral_radius() {
        let p = fig2();
        let cfg = MapConfig::new(p, 1.0);
        let e = interior_equilibria(&p)[1];
        let lam = lyapunov(&cfg, e, 10_000);
        let eigs = eigenvalues(&crate::stability::jacobian(&cfg, &e));
        let want = libm::log(eigs[0].norm().max(eigs[1].norm()));
        assert!((lam - want).abs() < 1e-2, "{lam} vs {want}");
        // sanity on the modulus route: this point is a sink
        let cd = char_data(&cfg, &crate::stability::jacobian(&cfg, &e));
        assert!(cd.eigs[0].norm() < 1.0 && cd.eigs[1].norm() < 1.0);
    }

    #[test]
    fn remerging_cascade_has_low_periods_past_the_bubble() {
        let p = cascade(0.76);
        let ic = State { m: 0.04, c: 0.66 };
        for (delta, want) in [(2.65, 4usize), (2.7, 10)] {
            let cfg = MapConfig::new(p, delta);
            let orbit = iterate(&cfg, ic, 1988, 512);
            let sum = classify_attractor(&cfg, &orbit).unwrap();
            assert_eq!(sum.kind, AttractorKind::PeriodK(want), "delta {delta}");
        }
    }

    #[test]
    fn chaotic_cell_has_positive_exponent() {
        let p = cascade(0.76);
        let cfg = MapConfig::new(p, 2.6);
        let orbit = iterate(&cfg, State { m: 0.04, c: 0.66 }, 1988, 512);
        let sum = classify_attractor(&cfg, &orbit).unwrap();
        assert_eq!(sum.kind, AttractorKind::Chaotic);
        assert!(sum.lyapunov.unwrap() > 0.05);
    }

    #[test]
    fn sweep_cells_are_deterministic_and_ordered() {
        let spec = SweepSpec {
            base: MapConfig::new(cascade(0.78), 1.0),
            param: SweepParam::Delta,
            lo: 2.2,
            hi: 2.8,
            grid: 21,
            ics: alloc::vec![State { m: 0.04, c: 0.66 }, State { m: 0.035, c: 0.59 }],
            transient: 500,
            samples: 64,
        };
        let a = sweep(&spec);
        let b = sweep(&spec);
        assert_eq!(a, b);
        assert_eq!(a.len(), 42);
        for (n, cell) in a.iter().enumerate() {
            assert_eq!(cell.param_index, n / 2);
            assert_eq!(cell.ic_index, n % 2);
            assert_eq!(cell.param_value, spec.grid_value(n / 2));
        }
        // out-of-order single-cell evaluation reproduces the same summary
        let lone = sweep_cell(&spec, 7, 1);
        assert_eq!(lone, a[15]);
    }

    #[test]
    fn sweep_grid_hits_both_endpoints() {
        let spec = SweepSpec {
            base: MapConfig::new(fig2(), 1.0),
            param: SweepParam::R,
            lo: 0.1,
            hi: 0.9,
            grid: 5,
            ics: alloc::vec![State { m: 0.2, c: 0.3 }],
            transient: 10,
            samples: 4,
        };
        assert_eq!(spec.grid_value(0), 0.1);
        assert_eq!(spec.grid_value(4), 0.9);
        let cfg = spec.cell_config(0.5);
        assert_eq!(cfg.params.r, 0.5);
        assert_eq!(cfg.delta, 1.0);
    }
}
