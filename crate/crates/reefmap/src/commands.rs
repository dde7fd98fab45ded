//! One runner per subcommand. Each writes `<out>/<cmd>.csv` (plot-ready,
//! `--precision` decimals) and `<out>/<cmd>.txt` (a report embedding the
//! resolved configuration, fixed 9-decimal floats).

use crate::config::RunConfig;
use crate::csvout::{render, Field};
use crate::{CliError, CommonArgs, FlipArgs, HybridArgs, OgyArgs, OrbitArgs, PointArgs, SweepArgs};
use rayon::prelude::*;
use reefmap_core::control::{
    capture_index, closed_loop, hybrid_design, hybrid_simulate, ogy_design, ogy_lines_from,
    ogy_simulate, spectral_radius, ControlError, OgyDesign,
};
use reefmap_core::equilibria;
use reefmap_core::flip::{flip_discriminants, FlipBranch, FlipError, FlipVerdict};
use reefmap_core::ns::{ns_discriminant, ns_frame, NsError, NsVerdict};
use reefmap_core::orbit::{
    classify_attractor, iterate, sweep_cell, AttractorKind, OrbitError, SweepParam, SweepSpec,
};
use reefmap_core::params::{MapConfig, State};
use reefmap_core::stability::{classify, ClassifyError, Jacobian2, Region};
use std::fmt::Write as _;
use std::path::Path;

/// Parse one `M,C` pair.
pub fn parse_state(text: &str) -> Result<State, CliError> {
    let Some((m, c)) = text.split_once(',') else {
        return Err(CliError::Usage(format!("expected M,C, got `{text}`")));
    };
    let m: f64 = m
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("`{}` is not a number", m.trim())))?;
    let c: f64 = c
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("`{}` is not a number", c.trim())))?;
    State::new(m, c).ok_or_else(|| CliError::Domain(format!("non-finite state `{text}`")))
}

fn parse_states(specs: &[String]) -> Result<Vec<State>, CliError> {
    specs.iter().map(|s| parse_state(s)).collect()
}

/// Point an analysis command operates on: `--point`, else the first `--ic`,
/// else the first interior equilibrium, else the coral then macroalgae axial
/// point.
fn analysis_point(
    cfg: &MapConfig,
    point: &Option<String>,
    ics: &[String],
) -> Result<State, CliError> {
    if let Some(text) = point {
        return parse_state(text);
    }
    if let Some(first) = ics.first() {
        return parse_state(first);
    }
    let eq = equilibria::find(&cfg.params);
    eq.interior
        .first()
        .copied()
        .or(eq.axial_c)
        .or(eq.axial_m)
        .ok_or_else(|| {
            CliError::Domain(
                "no equilibrium to analyze; pass --point or --ic".to_string(),
            )
        })
}

fn write_outputs(out: &Path, cmd: &str, csv: &str, report: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))?;
    let csv_path = out.join(format!("{cmd}.csv"));
    let txt_path = out.join(format!("{cmd}.txt"));
    std::fs::write(&csv_path, csv)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", csv_path.display())))?;
    std::fs::write(&txt_path, report)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", txt_path.display())))?;
    println!("wrote {} and {}", csv_path.display(), txt_path.display());
    Ok(())
}

fn report_header(cmd: &str, cfg: &RunConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "command: {cmd}");
    let _ = writeln!(s, "\n[configuration]");
    s.push_str(&cfg.emit());
    let _ = writeln!(s, "\n[results]");
    s
}

fn region_token(r: Region) -> &'static str {
    match r {
        Region::None => "none",
        Region::F1 => "f1",
        Region::F2 => "f2",
        Region::NsBoundary => "ns_boundary",
    }
}

fn flip_verdict_token(v: FlipVerdict) -> &'static str {
    match v {
        FlipVerdict::StableP2 => "stable_p2",
        FlipVerdict::UnstableP2 => "unstable_p2",
        FlipVerdict::Degenerate => "degenerate",
    }
}

fn ns_verdict_token(v: NsVerdict) -> &'static str {
    match v {
        NsVerdict::AttractingCurve => "attracting_curve",
        NsVerdict::RepellingCurve => "repelling_curve",
        NsVerdict::Degenerate => "degenerate",
    }
}

fn opt_num(x: Option<f64>) -> Field {
    x.map(Field::Num).unwrap_or(Field::Empty)
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<FlipError> for CliError {
    fn from(e: FlipError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<NsError> for CliError {
    fn from(e: NsError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<ControlError> for CliError {
    fn from(e: ControlError) -> Self {
        CliError::Domain(e.to_string())
    }
}

pub fn run_equilibria(common: &CommonArgs, run: &RunConfig) -> Result<(), CliError> {
    let p = run.params;
    let eq = equilibria::find(&p);
    let mut rows = Vec::new();
    let mut push = |kind: &str, s: &State| {
        rows.push(vec![
            Field::Text(kind.to_string()),
            Field::Num(s.m),
            Field::Num(s.c),
            Field::Num(equilibria::residual(&p, s)),
        ]);
    };
    push("trivial", &eq.trivial);
    if let Some(s) = &eq.axial_m {
        push("axial_macroalgae", s);
    }
    if let Some(s) = &eq.axial_c {
        push("axial_coral", s);
    }
    for s in &eq.interior {
        push("interior", s);
    }
    let csv = render(&["kind", "M", "C", "residual"], &rows, common.precision);

    let mut report = report_header("equilibria", run);
    let _ = writeln!(report, "equilibria found: {}", rows.len());
    let _ = writeln!(report, "trivial: ({:.9}, {:.9})", eq.trivial.m, eq.trivial.c);
    if let Some(s) = &eq.axial_m {
        let _ = writeln!(report, "axial_macroalgae: ({:.9}, {:.9})", s.m, s.c);
    }
    if let Some(s) = &eq.axial_c {
        let _ = writeln!(report, "axial_coral: ({:.9}, {:.9})", s.m, s.c);
    }
    for s in &eq.interior {
        let _ = writeln!(
            report,
            "interior: ({:.9}, {:.9})  residual {:.3e}",
            s.m,
            s.c,
            equilibria::residual(&p, s)
        );
    }
    write_outputs(&common.out, "equilibria", &csv, &report)
}

pub fn run_classify(args: &PointArgs, run: &RunConfig) -> Result<(), CliError> {
    let cfg = run.map_config();
    let point = analysis_point(&cfg, &args.point, &args.common.ic)?;
    let rep = classify(&cfg, &point)?;
    let cd = &rep.char_data;
    let row = vec![
        Field::Num(point.m),
        Field::Num(point.c),
        Field::Text(rep.class.to_string()),
        Field::Text(region_token(rep.region).to_string()),
        Field::Text(rep.outside_theorem1.to_string()),
        opt_num(rep.delta_minus),
        opt_num(rep.delta_plus),
        opt_num(rep.delta_ns),
        Field::Num(cd.u),
        Field::Num(cd.v),
        Field::Num(-cd.a),
        Field::Num(cd.b),
        Field::Num(cd.f1),
        Field::Num(cd.fm1),
        Field::Num(cd.eigs[0].re),
        Field::Num(cd.eigs[0].im),
        Field::Num(cd.eigs[1].re),
        Field::Num(cd.eigs[1].im),
    ];
    let csv = render(
        &[
            "M", "C", "class", "region", "outside_theorem1", "delta_minus", "delta_plus",
            "delta_ns", "U", "V", "trace", "det", "f1", "fm1", "eig1_re", "eig1_im", "eig2_re",
            "eig2_im",
        ],
        &[row],
        args.common.precision,
    );

    let mut report = report_header("classify", run);
    let _ = writeln!(report, "point: ({:.9}, {:.9})", point.m, point.c);
    let _ = writeln!(report, "class: {}", rep.class);
    let _ = writeln!(report, "region: {}", region_token(rep.region));
    let _ = writeln!(report, "outside_theorem1: {}", rep.outside_theorem1);
    if let Some(d) = rep.delta_minus {
        let _ = writeln!(report, "delta_minus: {d:.9}");
    }
    if let Some(d) = rep.delta_plus {
        let _ = writeln!(report, "delta_plus: {d:.9}");
    }
    if let Some(d) = rep.delta_ns {
        let _ = writeln!(report, "delta_ns: {d:.9}");
    }
    let _ = writeln!(report, "U: {:.9}  V: {:.9}", cd.u, cd.v);
    let _ = writeln!(report, "trace: {:.9}  det: {:.9}", -cd.a, cd.b);
    let _ = writeln!(report, "F(1): {:.9}  F(-1): {:.9}", cd.f1, cd.fm1);
    let _ = writeln!(
        report,
        "eigenvalues: {:.9}{:+.9}i, {:.9}{:+.9}i",
        cd.eigs[0].re, cd.eigs[0].im, cd.eigs[1].re, cd.eigs[1].im
    );
    write_outputs(&args.common.out, "classify", &csv, &report)
}

pub fn run_flip(args: &FlipArgs, run: &RunConfig) -> Result<(), CliError> {
    let cfg = run.map_config();
    let point = analysis_point(&cfg, &args.point.point, &args.point.common.ic)?;
    let branch = match args.branch.as_str() {
        "f1" => FlipBranch::F1,
        "f2" => FlipBranch::F2,
        other => {
            return Err(CliError::Usage(format!(
                "--branch must be f1 or f2, got `{other}`"
            )))
        }
    };
    let rep = flip_discriminants(&cfg, &point, branch)?;
    let row = vec![
        Field::Num(point.m),
        Field::Num(point.c),
        Field::Text(args.branch.clone()),
        Field::Num(rep.delta1),
        Field::Num(rep.lambda2),
        Field::Num(rep.a1),
        Field::Num(rep.a2),
        Field::Num(rep.a3),
        Field::Num(rep.b1),
        Field::Num(rep.b2),
        Field::Num(rep.b3),
        Field::Num(rep.b4),
        Field::Num(rep.b5),
        Field::Num(rep.omega1),
        Field::Num(rep.omega2),
        Field::Text(flip_verdict_token(rep.verdict).to_string()),
        Field::Text(rep.in_region.to_string()),
    ];
    let csv = render(
        &[
            "M", "C", "branch", "delta1", "lambda2", "a1", "a2", "a3", "b1", "b2", "b3", "b4",
            "b5", "omega1", "omega2", "verdict", "in_region",
        ],
        &[row],
        args.point.common.precision,
    );

    let mut report = report_header("flip", run);
    let _ = writeln!(report, "point: ({:.9}, {:.9})", point.m, point.c);
    let _ = writeln!(report, "branch: {}", args.branch);
    let _ = writeln!(report, "delta1: {:.9}", rep.delta1);
    let _ = writeln!(report, "lambda2: {:.9}", rep.lambda2);
    let _ = writeln!(report, "lambda2_direct: {:.9}", rep.lambda2_direct);
    let _ = writeln!(report, "lambda2_mismatch: {}", rep.lambda2_mismatch);
    let _ = writeln!(report, "in_region: {}", rep.in_region);
    let _ = writeln!(report, "a1: {:.9}  a2: {:.9}  a3: {:.9}", rep.a1, rep.a2, rep.a3);
    let _ = writeln!(
        report,
        "b1: {:.9}  b2: {:.9}  b3: {:.9}  b4: {:.9}  b5: {:.9}",
        rep.b1, rep.b2, rep.b3, rep.b4, rep.b5
    );
    let _ = writeln!(report, "omega1: {:.9}", rep.omega1);
    let _ = writeln!(report, "omega2: {:.9}", rep.omega2);
    let _ = writeln!(report, "verdict: {}", flip_verdict_token(rep.verdict));
    write_outputs(&args.point.common.out, "flip", &csv, &report)
}

pub fn run_ns(args: &PointArgs, run: &RunConfig) -> Result<(), CliError> {
    let cfg = run.map_config();
    let point = analysis_point(&cfg, &args.point, &args.common.ic)?;
    let frame = ns_frame(&cfg, &point)?;
    let rep = ns_discriminant(&cfg, &point)?;
    let row = vec![
        Field::Num(point.m),
        Field::Num(point.c),
        Field::Num(frame.delta2),
        Field::Num(frame.sigma1),
        Field::Num(frame.sigma2.re),
        Field::Num(frame.sigma2.im),
        Field::Num(frame.lambda.re),
        Field::Num(frame.lambda.im),
        Field::Num(frame.d_mod),
        Field::Num(rep.psi),
        Field::Text(ns_verdict_token(rep.verdict).to_string()),
        Field::Text(frame.in_region.to_string()),
    ];
    let csv = render(
        &[
            "M", "C", "delta2", "sigma1", "sigma2_re", "sigma2_im", "lambda_re", "lambda_im",
            "d_mod", "psi", "verdict", "in_region",
        ],
        &[row],
        args.common.precision,
    );

    let mut report = report_header("ns", run);
    let _ = writeln!(report, "point: ({:.9}, {:.9})", point.m, point.c);
    let _ = writeln!(report, "delta2: {:.9}", frame.delta2);
    let _ = writeln!(
        report,
        "lambda: {:.9}{:+.9}i  |lambda|: {:.9}",
        frame.lambda.re,
        frame.lambda.im,
        frame.lambda.norm()
    );
    let _ = writeln!(report, "sigma1: {:.9}", frame.sigma1);
    let _ = writeln!(report, "sigma2: {:.9}{:+.9}i", frame.sigma2.re, frame.sigma2.im);
    let _ = writeln!(report, "d_mod: {:.9}", frame.d_mod);
    let _ = writeln!(
        report,
        "resonance_ok: [{}, {}]",
        frame.resonance_ok[0], frame.resonance_ok[1]
    );
    let _ = writeln!(report, "in_region: {}", frame.in_region);
    for (name, z) in [
        ("varsigma1", rep.varsigma1),
        ("varsigma2", rep.varsigma2),
        ("varsigma3", rep.varsigma3),
        ("varsigma4", rep.varsigma4),
    ] {
        let _ = writeln!(report, "{name}: {:.9}{:+.9}i", z.re, z.im);
    }
    let g = &rep.g_partials;
    for (name, z) in [
        ("g3_uu", g.g3_uu),
        ("g3_vv", g.g3_vv),
        ("g3_uv", g.g3_uv),
        ("g3_uuu", g.g3_uuu),
        ("g3_uvv", g.g3_uvv),
        ("g3_uuv", g.g3_uuv),
        ("g3_vvv", g.g3_vvv),
        ("g4_uu", g.g4_uu),
        ("g4_vv", g.g4_vv),
        ("g4_uv", g.g4_uv),
        ("g4_uuu", g.g4_uuu),
        ("g4_uvv", g.g4_uvv),
        ("g4_uuv", g.g4_uuv),
        ("g4_vvv", g.g4_vvv),
    ] {
        let _ = writeln!(report, "{name}: {:.9}{:+.9}i", z.re, z.im);
    }
    let _ = writeln!(report, "psi: {:.9}", rep.psi);
    let _ = writeln!(report, "verdict: {}", ns_verdict_token(rep.verdict));
    write_outputs(&args.common.out, "ns", &csv, &report)
}

/// Read a `--jb` linearization file: keys j11, j12, j21, j22, b1, b2.
fn parse_jb(path: &Path) -> Result<(Jacobian2, (f64, f64)), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let pairs = crate::config::parse_pairs(&text)?;
    let get = |name: &str| -> Result<f64, CliError> {
        pairs
            .iter()
            .rev()
            .find(|(k, _)| k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| CliError::Usage(format!("{}: missing key `{name}`", path.display())))
    };
    let j = Jacobian2 {
        a11: get("j11")?,
        a12: get("j12")?,
        a21: get("j21")?,
        a22: get("j22")?,
    };
    let b = (get("b1")?, get("b2")?);
    for (k, _) in &pairs {
        if !matches!(k.as_str(), "j11" | "j12" | "j21" | "j22" | "b1" | "b2") {
            return Err(CliError::Usage(format!(
                "{}: unknown key `{k}`",
                path.display()
            )));
        }
    }
    Ok((j, b))
}

fn design_rows(design: &OgyDesign) -> Vec<Vec<Field>> {
    let mut rows = Vec::new();
    for (i, line) in design.lines.iter().enumerate() {
        rows.push(vec![
            Field::Text(format!("line{}", i + 1)),
            Field::Num(line.rho1),
            Field::Num(line.rho2),
            Field::Num(line.c),
        ]);
    }
    for (i, (x, y)) in design.triangle.iter().enumerate() {
        rows.push(vec![
            Field::Text(format!("vertex{}", i + 1)),
            Field::Num(*x),
            Field::Num(*y),
            Field::Empty,
        ]);
    }
    rows.push(vec![
        Field::Text("det_c".to_string()),
        Field::Num(design.det_c),
        Field::Empty,
        Field::Empty,
    ]);
    rows.push(vec![
        Field::Text("controllable".to_string()),
        Field::Text(design.controllable.to_string()),
        Field::Empty,
        Field::Empty,
    ]);
    rows.push(vec![
        Field::Text("bounded".to_string()),
        Field::Text(design.bounded.to_string()),
        Field::Empty,
        Field::Empty,
    ]);
    rows
}

pub fn run_ogy(args: &OgyArgs, run: &RunConfig) -> Result<(), CliError> {
    let cfg = run.map_config();
    // two input modes: an explicit linearization file, or a fixed point of
    // the configured map
    let (design, target) = if let Some(path) = &args.jb {
        let (j, b) = parse_jb(path)?;
        (ogy_lines_from(&j, b), None)
    } else {
        let point = analysis_point(&cfg, &args.point.point, &args.point.common.ic)?;
        (ogy_design(&cfg, &point)?, Some(point))
    };

    let mut rows = design_rows(&design);
    let mut report = report_header("ogy", run);
    if let Some(t) = &target {
        let _ = writeln!(report, "target: ({:.9}, {:.9})", t.m, t.c);
    } else {
        let _ = writeln!(report, "target: supplied linearization");
    }
    let _ = writeln!(
        report,
        "J: [[{:.9}, {:.9}], [{:.9}, {:.9}]]",
        design.j.a11, design.j.a12, design.j.a21, design.j.a22
    );
    let _ = writeln!(report, "B: ({:.9}, {:.9})", design.b.0, design.b.1);
    let _ = writeln!(report, "det_c: {:.9}", design.det_c);
    let _ = writeln!(report, "controllable: {}", design.controllable);
    for (i, line) in design.lines.iter().enumerate() {
        let _ = writeln!(
            report,
            "line{}: {:.9} rho1 {:+.9} rho2 {:+.9}",
            i + 1,
            line.rho1,
            line.rho2,
            line.c
        );
    }
    for (i, (x, y)) in design.triangle.iter().enumerate() {
        let _ = writeln!(report, "vertex{}: ({:.9}, {:.9})", i + 1, x, y);
    }
    let _ = writeln!(report, "bounded: {}", design.bounded);

    if let Some(gains_text) = &args.gains {
        let g = parse_state(gains_text).map_err(|_| {
            CliError::Usage(format!("--gains expects R1,R2, got `{gains_text}`"))
        })?;
        let gains = (g.m, g.c);
        let rho = spectral_radius(&closed_loop(&design.j, design.b, gains));
        rows.push(vec![
            Field::Text("gains".to_string()),
            Field::Num(gains.0),
            Field::Num(gains.1),
            Field::Empty,
        ]);
        rows.push(vec![
            Field::Text("spectral_radius".to_string()),
            Field::Num(rho),
            Field::Empty,
            Field::Empty,
        ]);
        let _ = writeln!(report, "gains: ({:.9}, {:.9})", gains.0, gains.1);
        let _ = writeln!(report, "closed-loop spectral radius: {:.9}", rho);

        if let Some(t) = &target {
            let ic = match args.point.common.ic.first() {
                Some(text) => parse_state(text)?,
                None => *t,
            };
            let sim = ogy_simulate(&cfg, t, gains, args.epsilon, args.steps, ic);
            rows.push(vec![
                Field::Text("captured".to_string()),
                sim.captured.map(|n| Field::Int(n as i64)).unwrap_or(Field::Empty),
                Field::Empty,
                Field::Empty,
            ]);
            let _ = writeln!(report, "run: {} steps from ({:.9}, {:.9})", args.steps, ic.m, ic.c);
            match sim.captured {
                Some(n) => {
                    let _ = writeln!(report, "captured at step {n}");
                }
                None => {
                    let _ = writeln!(report, "not captured");
                }
            }
            if let Some(n) = sim.diverged {
                let _ = writeln!(report, "diverged at step {n}");
            }
            if let Some(last) = sim.states.last() {
                let _ = writeln!(report, "final state: ({:.9}, {:.9})", last.m, last.c);
            }
        }
    }

    let csv = render(
        &["record", "value1", "value2", "value3"],
        &rows,
        args.point.common.precision,
    );
    write_outputs(&args.point.common.out, "ogy", &csv, &report)
}

pub fn run_hybrid(args: &HybridArgs, run: &RunConfig) -> Result<(), CliError> {
    if let Some(zeta) = args.zeta {
        if !(zeta > 0.0 && zeta <= 1.0) {
            return Err(CliError::Usage(format!(
                "--zeta must lie in (0, 1], got {zeta}"
            )));
        }
        if args.point.common.ic.is_empty() {
            return Err(CliError::Usage(
                "--zeta needs an --ic to simulate from".to_string(),
            ));
        }
    }
    let cfg = run.map_config();
    let point = analysis_point(&cfg, &args.point.point, &args.point.common.ic)?;
    let design = hybrid_design(&cfg, &point)?;

    let mut rows = Vec::new();
    let mut report = report_header("hybrid", run);
    let _ = writeln!(report, "point: ({:.9}, {:.9})", point.m, point.c);
    match design.zeta_interval {
        Some((lo, hi)) => {
            rows.push(vec![
                Field::Text("zeta_interval".to_string()),
                Field::Num(lo),
                Field::Num(hi),
                Field::Empty,
            ]);
            let _ = writeln!(report, "stabilizing zeta interval: ({lo:.9}, {hi:.9})");
            let eigs =
                reefmap_core::stability::eigenvalues(&design.j_star(hi));
            for (i, e) in eigs.iter().enumerate() {
                rows.push(vec![
                    Field::Text(format!("endpoint_eig{}", i + 1)),
                    Field::Num(e.re),
                    Field::Num(e.im),
                    Field::Empty,
                ]);
                let _ = writeln!(report, "endpoint eig{}: {:.9}{:+.9}i", i + 1, e.re, e.im);
            }
        }
        None => {
            rows.push(vec![
                Field::Text("zeta_interval".to_string()),
                Field::Empty,
                Field::Empty,
                Field::Empty,
            ]);
            let _ = writeln!(report, "no stabilizing zeta in (0, 1]");
        }
    }

    if let Some(zeta) = args.zeta {
        let ic = parse_state(args.point.common.ic.first().expect("checked above"))?;
        let states = hybrid_simulate(&cfg, zeta, ic, args.steps)
            .map_err(|e| CliError::Domain(e.to_string()))?;
        let captured = capture_index(&states, &point, 1e-6, 100);
        rows.push(vec![
            Field::Text("zeta".to_string()),
            Field::Num(zeta),
            Field::Empty,
            Field::Empty,
        ]);
        rows.push(vec![
            Field::Text("captured".to_string()),
            captured.map(|n| Field::Int(n as i64)).unwrap_or(Field::Empty),
            Field::Empty,
            Field::Empty,
        ]);
        let _ = writeln!(report, "zeta: {zeta:.9}");
        let _ = writeln!(report, "run: {} steps from ({:.9}, {:.9})", args.steps, ic.m, ic.c);
        match captured {
            Some(n) => {
                let _ = writeln!(report, "captured at step {n}");
            }
            None => {
                let _ = writeln!(report, "not captured");
            }
        }
        if let Some(last) = states.last() {
            rows.push(vec![
                Field::Text("final_state".to_string()),
                Field::Num(last.m),
                Field::Num(last.c),
                Field::Empty,
            ]);
            let _ = writeln!(report, "final state: ({:.9}, {:.9})", last.m, last.c);
        }
    }

    let csv = render(
        &["record", "value1", "value2", "value3"],
        &rows,
        args.point.common.precision,
    );
    write_outputs(&args.point.common.out, "hybrid", &csv, &report)
}

fn summary_line(kind: &AttractorKind, period: Option<usize>, lyap: Option<f64>) -> String {
    let mut s = format!("kind {kind}");
    if let Some(p) = period {
        let _ = write!(s, "  period {p}");
    }
    if let Some(l) = lyap {
        let _ = write!(s, "  lyapunov {l:.9}");
    }
    s
}

pub fn run_orbit(args: &OrbitArgs, run: &RunConfig) -> Result<(), CliError> {
    let cfg = run.map_config();
    if args.common.ic.is_empty() {
        return Err(CliError::Usage("orbit needs at least one --ic".to_string()));
    }
    let ics = parse_states(&args.common.ic)?;

    let mut rows = Vec::new();
    let mut report = report_header("orbit", run);
    let _ = writeln!(
        report,
        "transient: {}  samples: {}",
        args.transient, args.samples
    );
    for (i, ic) in ics.iter().enumerate() {
        let orbit = iterate(&cfg, *ic, args.transient, args.samples);
        for (n, s) in orbit.samples.iter().enumerate() {
            rows.push(vec![
                Field::Int(i as i64),
                Field::Int(n as i64),
                Field::Num(s.m),
                Field::Num(s.c),
            ]);
        }
        let _ = writeln!(report, "\nic {}: ({:.9}, {:.9})", i, ic.m, ic.c);
        if let Some(d) = &orbit.divergence {
            let _ = writeln!(report, "orbit broke at step {}: {:?}", d.step, d.cause);
        }
        match classify_attractor(&cfg, &orbit) {
            Ok(sum) => {
                let _ = writeln!(
                    report,
                    "{}",
                    summary_line(&sum.kind, sum.period, sum.lyapunov)
                );
            }
            Err(OrbitError::InsufficientSamples { got }) => {
                let _ = writeln!(
                    report,
                    "retained {got} samples; too few to classify"
                );
            }
        }
    }
    let csv = render(
        &["ic_index", "sample_index", "M", "C"],
        &rows,
        args.common.precision,
    );
    write_outputs(&args.common.out, "orbit", &csv, &report)
}

/// Parse `LO:HI:N` into a strictly increasing grid description.
pub fn parse_range(text: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "--range expects LO:HI:N, got `{text}`"
        )));
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("`{}` is not a number", parts[0])))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("`{}` is not a number", parts[1])))?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("`{}` is not a grid size", parts[2])))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::Usage(format!(
            "--range needs LO < HI, got {lo}:{hi}"
        )));
    }
    if n < 2 {
        return Err(CliError::Usage(format!(
            "--range needs at least 2 grid points, got {n}"
        )));
    }
    Ok((lo, hi, n))
}

pub fn run_sweep(args: &SweepArgs, run: &RunConfig) -> Result<(), CliError> {
    let cfg = run.map_config();
    if args.common.ic.is_empty() {
        return Err(CliError::Usage("sweep needs at least one --ic".to_string()));
    }
    let ics = parse_states(&args.common.ic)?;
    let (lo, hi, grid) = parse_range(&args.range)?;
    let param = match args.param.as_str() {
        "delta" => SweepParam::Delta,
        "r" => SweepParam::R,
        other => {
            return Err(CliError::Usage(format!(
                "--param must be delta or r, got `{other}`"
            )))
        }
    };
    let spec = SweepSpec {
        base: cfg,
        param,
        lo,
        hi,
        grid,
        ics,
        transient: args.transient,
        samples: args.samples,
    };

    // cells are pure in (spec, indices), so a parallel map over the flat
    // index reproduces the sequential order exactly
    let nic = spec.ics.len();
    let cells: Vec<_> = (0..grid * nic)
        .into_par_iter()
        .map(|idx| sweep_cell(&spec, idx / nic, idx % nic))
        .collect();

    let mut rows = Vec::new();
    let mut report = report_header("sweep", run);
    let _ = writeln!(
        report,
        "param: {}  range: [{lo}, {hi}] in {grid} points  transient: {}  samples: {}",
        args.param, args.transient, args.samples
    );
    for cell in &cells {
        let sum = &cell.summary;
        for (n, s) in sum.samples.iter().enumerate() {
            rows.push(vec![
                Field::Num(cell.param_value),
                Field::Int(cell.ic_index as i64),
                Field::Int(n as i64),
                Field::Num(s.m),
                Field::Num(s.c),
                Field::Text(sum.kind.to_string()),
                sum.period.map(|p| Field::Int(p as i64)).unwrap_or(Field::Empty),
            ]);
        }
        let _ = writeln!(
            report,
            "{} = {:.9}  ic {}: {}",
            args.param,
            cell.param_value,
            cell.ic_index,
            summary_line(&sum.kind, sum.period, sum.lyapunov)
        );
    }
    let csv = render(
        &["param", "ic_index", "sample_index", "M", "C", "kind", "period"],
        &rows,
        args.common.precision,
    );
    write_outputs(&args.common.out, "sweep", &csv, &report)
}
