use isotropica::numerics::{hbar_fourier, SampledField};
use isotropica::phase::{oscillatory_integral, stationary_phase_leading, validate_phase};
use isotropica::profiles::Profile;
use isotropica::propagation::{track_trajectory, PropagatorConfig};
use isotropica::spectra::{
    diagonalize, gamma_decay, harmonic_surrogate, liouville_measure, profile_integral, scaled_trace_check,
    trace_series, weyl_count_check, Domain, LevelSetMeasure, LiouvilleMethod, Potential, SchrodingerProblem,
    SpectrumResult,
};
use isotropica::states::{
    bohr_sommerfeld_residue, decompose_model_state_with, sample_model_state, superpose, CoherentState,
    DecomposeOptions,
};
use isotropica::wavefront::{
    concentration_set, fbi_transform, hausdorff_distance, sample_submanifold, width_scaling, MomentAxis,
};
use serde_json::json;

use crate::config::*;
use crate::output::{cols, indexed, Cell, Outputs};

pub enum Failure {
    /// Config does not match the schema; carries the offending path.
    Schema(String),
    Invalid(String),
    Guard { guard: &'static str, detail: String },
    Io(std::io::Error),
}

impl From<isotropica::Error> for Failure {
    fn from(e: isotropica::Error) -> Self {
        match e.guard_name() {
            Some(guard) => Failure::Guard {
                guard,
                detail: e.to_string(),
            },
            None => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Run = Result<(), Failure>;

pub fn build_state(c: BuildState, out: &mut Outputs) -> Run {
    let field = c.state.sample(&c.grid, c.hbar)?;
    out.with_file("field.csv", |w| field.write_csv(w))?;
    out.json("field.json", &field.header())?;
    out.json("summary.json", &json!({ "norm": field.norm(), "sup": field.sup() }))?;
    Ok(())
}

pub fn decompose(c: Decompose, out: &mut Outputs) -> Run {
    let mut opts = DecomposeOptions::default();
    if let Some(s) = c.spacing_factor {
        opts.spacing_factor = s;
    }
    opts.range = c.range.clone();
    let mut rows = vec![];
    let mut nodes = vec![];
    let k = c.state.slow_dims;
    for &h in &c.hbars {
        let family = decompose_model_state_with(&c.state, h, &opts)?;
        let sup = superpose(&family, &c.grid, h)?;
        let direct = sample_model_state(&c.state, &c.grid, h)?;
        let rel = sup.field.sup_distance(&direct)? / direct.sup();
        rows.push(vec![
            Cell::F(h),
            Cell::U(family.len()),
            Cell::F(family.node_spacing),
            Cell::F(rel),
            Cell::B(sup.under_resolved),
        ]);
        for (i, tau) in family.nodes.iter().enumerate() {
            let mut r = vec![Cell::F(h), Cell::U(i)];
            r.extend(tau.iter().map(|t| Cell::F(*t)));
            r.push(Cell::F(family.weight(i)));
            nodes.push(r);
        }
    }
    out.csv(
        "roundtrip.csv",
        &cols(&["hbar", "members", "node_spacing", "relative_sup_error", "under_resolved"]),
        &rows,
    )?;
    let mut header = cols(&["hbar", "node"]);
    header.extend(indexed("tau", k));
    header.push("weight".into());
    out.csv("nodes.csv", &header, &nodes)?;
    Ok(())
}

fn maybe_fourier(field: SampledField, fourier: bool) -> isotropica::Result<SampledField> {
    if fourier {
        hbar_fourier(&field, 1)
    } else {
        Ok(field)
    }
}

pub fn wavefront(c: Wavefront, out: &mut Outputs) -> Run {
    let field = maybe_fourier(c.state.sample(&c.grid, c.hbar)?, c.fourier)?;
    let h = fbi_transform(&field, &c.phase_space)?;
    out.with_file("husimi.csv", |w| h.write_csv(w))?;
    let set = concentration_set(&h, c.threshold)?;
    let mut summary = json!({
        "max": h.max(),
        "total_mass": h.total_mass(),
        "under_resolved": h.under_resolved,
        "concentration_points": set.len(),
    });
    if let Some(r) = &c.reference {
        let target = sample_submanifold(&r.submanifold, &r.ranges)?;
        let d = hausdorff_distance(&set, &target);
        summary["hausdorff"] = json!(d);
        summary["hausdorff_over_sqrt_hbar"] = json!(d / c.hbar.sqrt());
    }
    out.json("summary.json", &summary)?;
    Ok(())
}

fn axis_label(a: &MomentAxis) -> String {
    match a {
        MomentAxis::Position(d) => format!("position-{d}"),
        MomentAxis::Momentum(d) => format!("momentum-{d}"),
    }
}

pub fn widths(c: Widths, out: &mut Outputs) -> Run {
    let fields = c
        .hbars
        .values()
        .iter()
        .map(|h| maybe_fourier(c.state.sample(&c.grid, *h)?, c.fourier))
        .collect::<isotropica::Result<Vec<_>>>()?;
    let mut rows = vec![];
    let mut fits = serde_json::Map::new();
    for a in &c.axes {
        let w = width_scaling(&fields, *a)?;
        for (h, m) in w.hbars.iter().zip(&w.moments) {
            rows.push(vec![
                Cell::S(axis_label(a)),
                Cell::F(*h),
                Cell::F(*m),
                Cell::F(w.fit.exponent),
            ]);
        }
        fits.insert(axis_label(a), serde_json::to_value(&w.fit).expect("fit serializes"));
    }
    out.csv("widths.csv", &cols(&["axis", "hbar", "variance", "exponent"]), &rows)?;
    out.json("summary.json", &fits)?;
    Ok(())
}

pub fn validate(c: ValidatePhase, out: &mut Outputs) -> Run {
    let f = c.phase.build()?;
    let report = validate_phase(&f, &c.seeds, c.tol)?;
    let rows: Vec<Vec<Cell>> = report
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            vec![
                Cell::U(i),
                Cell::B(s.full_rank),
                Cell::B(s.transverse),
                Cell::B(s.immersion),
                Cell::U(s.newton_iterations),
                Cell::F(s.singular_values.iter().cloned().fold(f64::INFINITY, f64::min)),
            ]
        })
        .collect();
    out.csv(
        "samples.csv",
        &cols(&["sample", "full_rank", "transverse", "immersion", "newton_iterations", "min_singular_value"]),
        &rows,
    )?;
    out.json("report.json", &json!({ "all_pass": report.all_pass(), "report": report }))?;
    Ok(())
}

pub fn oscillatory(c: OscillatoryEval, out: &mut Outputs) -> Run {
    let f = c.phase.build()?;
    let n = f.base_dim();
    let mut rows = vec![];
    for x in &c.points {
        let v = oscillatory_integral(&f, &c.amplitude, c.order, x, c.hbar)?;
        let mut r: Vec<Cell> = x.iter().map(|x| Cell::F(*x)).collect();
        r.push(Cell::F(v.re));
        r.push(Cell::F(v.im));
        if c.stationary_phase {
            let s = stationary_phase_leading(&f, &c.amplitude, c.order, x, c.hbar)?;
            r.push(Cell::F(s.value.re));
            r.push(Cell::F(s.value.im));
        }
        rows.push(r);
    }
    let mut header = indexed("x", n);
    header.extend(cols(&["re", "im"]));
    if c.stationary_phase {
        header.extend(cols(&["leading_re", "leading_im"]));
    }
    out.csv("values.csv", &header, &rows)?;
    Ok(())
}

fn problem(
    dim: usize,
    potential: &Potential,
    hbar: f64,
    points: Option<usize>,
    domain: Domain,
    window: f64,
) -> isotropica::Result<SchrodingerProblem> {
    let m = match points {
        Some(m) => m,
        None => SchrodingerProblem::minimal_points(dim, potential, hbar, domain, window)?,
    };
    SchrodingerProblem::new(dim, potential.clone(), hbar, m, domain, window)
}

pub fn spectrum(c: Spectrum, out: &mut Outputs) -> Run {
    let p = problem(c.dim, &c.potential, c.hbar, c.points, c.domain, c.window)?;
    let s = diagonalize(&p)?;
    let rows: Vec<Vec<Cell>> = s
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, e)| vec![Cell::U(i), Cell::F(*e)])
        .collect();
    out.csv("eigenvalues.csv", &cols(&["index", "eigenvalue"]), &rows)?;
    out.json(
        "summary.json",
        &json!({ "method": s.method, "count": s.count(), "points": p.points, "complete": s.complete }),
    )?;
    Ok(())
}

/// Spectrum complete on [−window, window] and the grid size used (0 for the
/// surrogate).
fn source_spectrum(src: &SpectrumSource, hbar: f64, window: f64) -> isotropica::Result<(SpectrumResult, usize)> {
    match src {
        SpectrumSource::HarmonicSurrogate => Ok((harmonic_surrogate(hbar, window)?, 0)),
        SpectrumSource::Operator {
            potential,
            dim,
            domain,
            points,
            ..
        } => {
            let p = problem(*dim, potential, hbar, *points, *domain, window)?;
            Ok((diagonalize(&p)?, p.points))
        }
    }
}

fn source_measure(src: &SpectrumSource) -> isotropica::Result<LevelSetMeasure> {
    match src {
        SpectrumSource::HarmonicSurrogate => Ok(LevelSetMeasure::exact(2.0 * std::f64::consts::PI, 0.0)),
        SpectrumSource::Operator {
            potential,
            dim,
            domain,
            ..
        } => liouville_measure(potential, *dim, *domain, 0.0, &LiouvilleMethod::VolumeDerivative),
    }
}

fn support_radius(phi: &Profile) -> Result<f64, Failure> {
    let (a, b) = phi
        .support()
        .ok_or_else(|| Failure::Invalid("test function must decay".into()))?;
    Ok(a.abs().max(b.abs()))
}

pub fn trace_check(c: TraceCheck, out: &mut Outputs) -> Run {
    let theta = source_measure(&c.source)?;
    let radius = support_radius(&c.phi)?;
    let mut records = vec![];
    let mut rows = vec![];
    for &h in c.hbar_schedule.values() {
        let (s, m) = source_spectrum(&c.source, h, radius * h.sqrt())?;
        let r = scaled_trace_check(&s, &c.phi, &theta)?;
        rows.push(vec![
            Cell::F(h),
            Cell::U(m),
            Cell::U(s.count()),
            Cell::F(r.lhs),
            Cell::F(r.rhs),
            Cell::F(r.ratio),
            Cell::F(r.deviation),
        ]);
        records.push(r);
    }
    out.csv(
        "trace.csv",
        &cols(&["hbar", "points", "eigenvalues", "lhs", "rhs", "ratio", "deviation"]),
        &rows,
    )?;
    let series = trace_series(records);
    let mode = if profile_integral(&c.phi)? == 0.0 { "decay-fit" } else { "ratio" };
    out.json(
        "summary.json",
        &json!({
            "mode": mode,
            "liouville_measure": theta,
            "correction": series.correction,
            "lhs_decay": series.lhs_decay,
        }),
    )?;
    Ok(())
}

pub fn weyl_count(c: WeylCount, seed: u64, out: &mut Outputs) -> Run {
    let theta = source_measure(&c.source)?;
    let mut summary = json!({ "liouville_measure": theta });
    if let SpectrumSource::Operator {
        potential,
        dim,
        domain,
        monte_carlo_samples,
        ..
    } = &c.source
    {
        let mc = liouville_measure(
            potential,
            *dim,
            *domain,
            0.0,
            &LiouvilleMethod::MonteCarlo {
                samples: *monte_carlo_samples,
                seed,
            },
        )?;
        summary["monte_carlo_measure"] = json!(mc);
        summary["estimators_agree_3_sigma"] = json!(theta.agrees_with(&mc, 3.0));
    }
    let mut rows = vec![];
    for &h in c.hbar_schedule.values() {
        let window = 2.0 * c.c * h.powf(c.alpha);
        let (s, m) = source_spectrum(&c.source, h, window)?;
        let r = weyl_count_check(&s, c.c, c.alpha, &theta)?;
        rows.push(vec![
            Cell::F(h),
            Cell::U(m),
            Cell::U(r.count),
            Cell::F(r.prediction),
            Cell::F(r.ratio),
        ]);
    }
    out.csv("weyl.csv", &cols(&["hbar", "points", "count", "prediction", "ratio"]), &rows)?;
    out.json("summary.json", &summary)?;
    Ok(())
}

pub fn gamma(c: GammaDecay, out: &mut Outputs) -> Run {
    let rep = gamma_decay(&c.rho, &c.cutoff, &c.lambdas, &c.hbars)?;
    let mut rows = vec![];
    for (i, h) in c.hbars.iter().enumerate() {
        for (j, l) in c.lambdas.iter().enumerate() {
            rows.push(vec![Cell::F(*h), Cell::F(*l), Cell::F(rep.magnitudes[i][j])]);
        }
    }
    out.csv("gamma.csv", &cols(&["hbar", "lambda", "abs_gamma"]), &rows)?;
    out.json(
        "summary.json",
        &json!({
            "bound_constant_k4_n4": rep.bound_constant(4, 4),
            "monotone_in_lambda": rep.monotone,
            "lambda_fits": rep.lambda_fits,
        }),
    )?;
    Ok(())
}

pub fn propagate(c: Propagate, out: &mut Outputs) -> Run {
    let p = problem(c.dim, &c.potential, c.hbar, c.points, c.domain, c.window)?;
    let cfg = match c.time_step {
        Some(dt) => PropagatorConfig {
            time_step: dt,
            order: 2,
        },
        None => PropagatorConfig::for_hbar(c.hbar),
    };
    let init = CoherentState::gaussian(c.position.clone(), c.momentum.clone())?;
    let traj = track_trajectory(&init, &p, &c.times, &cfg)?;
    let n = c.dim;
    let mut header = cols(&["t"]);
    header.extend(indexed("x_mean", n));
    header.extend(indexed("xi_mean", n));
    header.extend(indexed("x_classical", n));
    header.extend(indexed("xi_classical", n));
    header.push("deviation".into());
    let rows: Vec<Vec<Cell>> = traj
        .iter()
        .map(|r| {
            let mut row = vec![Cell::F(r.t)];
            for v in r
                .center
                .position
                .iter()
                .chain(&r.center.momentum)
                .chain(&r.classical.position)
                .chain(&r.classical.momentum)
            {
                row.push(Cell::F(*v));
            }
            row.push(Cell::F(r.deviation));
            row
        })
        .collect();
    out.csv("trajectory.csv", &header, &rows)?;
    let worst = traj.iter().map(|r| r.deviation).fold(0.0, f64::max);
    out.json(
        "summary.json",
        &json!({ "points": p.points, "max_deviation": worst, "max_deviation_over_sqrt_hbar": worst / c.hbar.sqrt() }),
    )?;
    Ok(())
}

pub fn bs_check(c: BsCheck, out: &mut Outputs) -> Run {
    let r = bohr_sommerfeld_residue(&c.curve, c.hbar)?;
    out.csv("residue.csv", &cols(&["residue"]), &[vec![Cell::F(r)]])?;
    out.json("summary.json", &json!({ "residue": r, "condition_holds": r.abs() < 1e-9 }))?;
    Ok(())
}
