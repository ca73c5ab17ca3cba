//! Split-step Schrödinger evolution, Hamiltonian flow and coherent-state
//! centre tracking.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::fourier::FftNd;
use crate::numerics::quadrature::pairwise_sum;
use crate::numerics::{Axis, GridSpec, SampledField};
use crate::spectra::{Potential, SchrodingerProblem};
use crate::states::{CoherentFamily, CoherentState};
use crate::wavefront::{fbi_transform, PhaseSpaceGrid};

/// Time step and splitting order for [`evolve`]. The number of steps is
/// ⌈|t|/time_step⌉, so the step actually taken never exceeds `time_step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorConfig {
    pub time_step: f64,
    #[serde(default = "strang")]
    pub order: u32,
}

fn strang() -> u32 {
    2
}

impl PropagatorConfig {
    /// Largest step allowed by the phase-resolution guard, √ħ/10.
    pub fn for_hbar(hbar: f64) -> Self {
        PropagatorConfig {
            time_step: hbar.sqrt() / 10.0,
            order: 2,
        }
    }

    pub fn validate(&self, hbar: f64) -> Result<()> {
        if self.order != 2 {
            return Err(Error::param(format!("only order-2 splitting is available, got {}", self.order)));
        }
        if !(self.time_step.is_finite() && self.time_step > 0.0) {
            return Err(Error::param("time step must be positive"));
        }
        let limit = hbar.sqrt() / 10.0;
        if self.time_step > limit {
            return Err(Error::resolution(
                "phase-resolution",
                format!("time step {:.3e} exceeds √ħ/10 = {limit:.3e}", self.time_step),
            ));
        }
        Ok(())
    }

    pub fn steps_for(&self, t: f64) -> usize {
        (t.abs() / self.time_step).ceil() as usize
    }
}

/// Phase-space point (x, ξ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
}

impl ClassicalState {
    pub fn new(position: Vec<f64>, momentum: Vec<f64>) -> Result<Self> {
        if position.len() != momentum.len() || position.is_empty() {
            return Err(Error::param("position and momentum must have the same positive dimension"));
        }
        if !position.iter().chain(&momentum).all(|v| v.is_finite()) {
            return Err(Error::NumericInput("phase-space point".into()));
        }
        Ok(ClassicalState { position, momentum })
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    /// ½|ξ|² + V(x).
    pub fn energy(&self, v: &Potential) -> f64 {
        0.5 * self.momentum.iter().map(|p| p * p).sum::<f64>() + v.eval(&self.position)
    }

    /// Euclidean phase-space distance, with positions compared through `axes`
    /// (minimal image on periodic axes) when given.
    pub fn distance(&self, other: &ClassicalState, axes: Option<&[Axis]>) -> f64 {
        let mut s = 0.0;
        for d in 0..self.dim() {
            let dx = match axes {
                Some(a) => a[d].displacement(self.position[d], other.position[d]),
                None => self.position[d] - other.position[d],
            };
            let dp = self.momentum[d] - other.momentum[d];
            s += dx * dx + dp * dp;
        }
        s.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub state: ClassicalState,
    /// |H(end) − H(start)| / max(|H(start)|, 1).
    pub energy_drift: f64,
    pub steps: usize,
}

/// 1/ω for the fastest small oscillation the potential can drive, bounded
/// through the largest possible curvature of V.
pub fn time_scale(v: &Potential) -> f64 {
    let curvature = match v {
        Potential::Free { .. } => 0.0,
        Potential::Trig { terms, .. } => terms
            .iter()
            .map(|t| t.coefficient.abs() * t.frequencies.iter().map(|k| (k * k) as f64).sum::<f64>())
            .sum(),
        Potential::Harmonic { omega, .. } => omega * omega,
    };
    if curvature > 0.0 {
        1.0 / curvature.sqrt()
    } else {
        1.0
    }
}

/// Relative step bound for the Hamiltonian flow, in units of [`time_scale`].
pub const FLOW_STEP_FRACTION: f64 = 1e-3;

/// Hamilton flow of ½|ξ|² + V by Störmer–Verlet at the largest admissible step.
pub fn classical_flow(v: &Potential, s0: &ClassicalState, t: f64) -> Result<FlowResult> {
    classical_flow_with_step(v, s0, t, FLOW_STEP_FRACTION * time_scale(v))
}

pub fn classical_flow_with_step(v: &Potential, s0: &ClassicalState, t: f64, step: f64) -> Result<FlowResult> {
    v.validate(s0.dim())?;
    if !t.is_finite() {
        return Err(Error::NumericInput("flow time".into()));
    }
    let limit = FLOW_STEP_FRACTION * time_scale(v);
    if !(step > 0.0 && step <= limit * (1.0 + 1e-12)) {
        return Err(Error::resolution(
            "flow-step",
            format!("flow step {step:.3e} must lie in (0, {limit:.3e}]"),
        ));
    }
    let steps = (t.abs() / step).ceil() as usize;
    let e0 = s0.energy(v);
    if steps == 0 {
        return Ok(FlowResult {
            state: s0.clone(),
            energy_drift: 0.0,
            steps,
        });
    }
    let h = t / steps as f64;
    let mut x = s0.position.clone();
    let mut p = s0.momentum.clone();
    let mut g = v.gradient(&x);
    for _ in 0..steps {
        for (pi, gi) in p.iter_mut().zip(&g) {
            *pi -= 0.5 * h * gi;
        }
        for (xi, pi) in x.iter_mut().zip(&p) {
            *xi += h * pi;
        }
        g = v.gradient(&x);
        for (pi, gi) in p.iter_mut().zip(&g) {
            *pi -= 0.5 * h * gi;
        }
    }
    let state = ClassicalState {
        position: x,
        momentum: p,
    };
    let energy_drift = (state.energy(v) - e0).abs() / e0.abs().max(1.0);
    Ok(FlowResult {
        state,
        energy_drift,
        steps,
    })
}

/// Periodic sample grid of a Schrödinger problem.
pub fn problem_grid(p: &SchrodingerProblem) -> Result<GridSpec> {
    let lo = p.domain.lower();
    let axis = Axis::periodic(lo, lo + p.domain.length(), p.points)?;
    GridSpec::new(vec![axis; p.dim])
}

fn check_on_problem_grid(field: &SampledField, p: &SchrodingerProblem) -> Result<()> {
    let want = problem_grid(p)?;
    let got = field.grid();
    let same = got.dim() == want.dim()
        && got.axes.iter().zip(&want.axes).all(|(a, b)| {
            a.periodic && a.points == b.points && (a.lower - b.lower).abs() <= 1e-12 * b.length() && (a.upper - b.upper).abs() <= 1e-12 * b.length()
        });
    if same {
        Ok(())
    } else {
        Err(Error::param("field is not sampled on the problem's periodic grid"))
    }
}

/// U(t)ψ = e^{-itP/ħ}ψ by Strang splitting between the potential and the
/// kinetic Fourier multiplier.
pub fn evolve(field: &SampledField, p: &SchrodingerProblem, t: f64, cfg: &PropagatorConfig) -> Result<SampledField> {
    p.validate()?;
    cfg.validate(p.hbar)?;
    check_on_problem_grid(field, p)?;
    if (field.hbar() - p.hbar).abs() > 1e-15 * p.hbar {
        return Err(Error::param("field and problem have different ħ"));
    }
    if !t.is_finite() {
        return Err(Error::NumericInput("evolution time".into()));
    }
    let steps = cfg.steps_for(t);
    if steps == 0 {
        return Ok(field.clone());
    }
    let h = t / steps as f64;
    let hbar = p.hbar;
    let grid = field.grid().clone();
    let total = grid.len();
    let potential: Vec<f64> = (0..total).map(|i| p.potential.eval(&grid.point(i))).collect();
    let half_v: Vec<Complex64> = potential.iter().map(|v| Complex64::from_polar(1.0, -0.5 * h * v / hbar)).collect();
    let full_v: Vec<Complex64> = potential.iter().map(|v| Complex64::from_polar(1.0, -h * v / hbar)).collect();
    // kinetic multiplier e^{-ihħκ²/2} in FFT ordering, with 1/M^n folded in
    let kappa = fft_wavenumbers(p);
    let m = p.points;
    let scale = 1.0 / total as f64;
    let kinetic: Vec<Complex64> = (0..total)
        .map(|flat| {
            let mut rem = flat;
            let mut k2 = 0.0;
            for _ in 0..p.dim {
                let k = kappa[rem % m];
                rem /= m;
                k2 += k * k;
            }
            Complex64::from_polar(scale, -0.5 * h * hbar * k2)
        })
        .collect();
    let fft = FftNd::new(&grid.shape());
    let mut psi = field.values().to_vec();
    mul(&mut psi, &half_v);
    for s in 0..steps {
        fft.transform(&mut psi, true);
        mul(&mut psi, &kinetic);
        fft.transform(&mut psi, false);
        mul(&mut psi, if s + 1 < steps { &full_v } else { &half_v });
    }
    SampledField::new(grid, psi, hbar)
}

fn mul(a: &mut [Complex64], b: &[Complex64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x *= y;
    }
}

/// Angular wavenumbers in FFT order: 0, 1, .., M/2−1, −M/2, .., −1 (times 2π/L).
fn fft_wavenumbers(p: &SchrodingerProblem) -> Vec<f64> {
    let m = p.points as i64;
    let base = 2.0 * PI / p.domain.length();
    (0..m).map(|j| base * if j < m / 2 { j } else { j - m } as f64).collect()
}

/// Husimi peaks further apart than this many √ħ count as separate clusters.
pub const CLUSTER_SEPARATION: f64 = 10.0;

/// A second peak at this fraction of the maximum makes the centre ambiguous.
pub const SECOND_PEAK_FRACTION: f64 = 0.5;

/// Husimi-weighted mean position and momentum of a field concentrated near
/// one phase-space point.
pub fn track_center(field: &SampledField) -> Result<ClassicalState> {
    let grid = field.grid();
    let n = grid.dim();
    let hbar = field.hbar();
    let sh = hbar.sqrt();
    if field.norm_sqr() == 0.0 {
        return Err(Error::Ambiguity("field is zero; there is no centre to track".into()));
    }
    let cap = if n == 1 { 400 } else { 32 };
    let step = 0.5 * sh;
    let mut pos_axes = Vec::with_capacity(n);
    let mut centres = Vec::with_capacity(n);
    for d in 0..n {
        let (c, r) = marginal_extent(field, d, Space::Position);
        let r = r + 4.0 * sh;
        centres.push(c);
        pos_axes.push(Axis::boxed(c - r, c + r, ((2.0 * r / step).ceil() as usize + 1).clamp(3, cap))?);
    }
    let mut mom_axes = Vec::with_capacity(n);
    for d in 0..n {
        let (c, r) = marginal_extent(field, d, Space::Momentum);
        let r = r + 4.0 * sh;
        mom_axes.push(Axis::boxed(c - r, c + r, ((2.0 * r / step).ceil() as usize + 1).clamp(3, cap))?);
    }
    let psg = PhaseSpaceGrid::new(GridSpec::new(pos_axes)?, GridSpec::new(mom_axes)?)?;
    let h = fbi_transform(field, &psg)?;
    let combined = psg.combined();
    let (imax, hmax) = h
        .values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .unwrap_or((0, 0.0));
    if hmax <= 0.0 {
        return Err(Error::Ambiguity("Husimi density vanishes on the search grid".into()));
    }
    let peak = split(&combined.point(imax), n);
    let mut x = vec![0.0; 2 * n];
    let mut weights = Vec::with_capacity(h.values.len());
    let mut first = vec![Vec::with_capacity(h.values.len()); 2 * n];
    for (i, v) in h.values.iter().enumerate() {
        combined.point_into(i, &mut x);
        let here = split(&x, n);
        if *v >= SECOND_PEAK_FRACTION * hmax && here.distance(&peak, Some(&grid.axes)) > CLUSTER_SEPARATION * sh {
            return Err(Error::Ambiguity(format!(
                "second Husimi peak at {:?} carries {:.2} of the maximum",
                x,
                v / hmax
            )));
        }
        weights.push(*v);
        for d in 0..n {
            first[d].push(v * grid.axes[d].displacement(x[d], centres[d]));
            first[n + d].push(v * x[n + d]);
        }
    }
    let mass = pairwise_sum(&weights);
    let mut position = Vec::with_capacity(n);
    let mut momentum = Vec::with_capacity(n);
    for d in 0..n {
        let mut xd = centres[d] + pairwise_sum(&first[d]) / mass;
        let ax = &grid.axes[d];
        if ax.periodic {
            xd = ax.lower + (xd - ax.lower).rem_euclid(ax.length());
        }
        position.push(xd);
        momentum.push(pairwise_sum(&first[n + d]) / mass);
    }
    ClassicalState::new(position, momentum)
}

fn split(x: &[f64], n: usize) -> ClassicalState {
    ClassicalState {
        position: x[..n].to_vec(),
        momentum: x[n..].to_vec(),
    }
}

enum Space {
    Position,
    Momentum,
}

/// Centre and radius of the region where the marginal density on axis `d`
/// exceeds 1e-12 of its maximum. Periodic position axes use the circular mean.
fn marginal_extent(field: &SampledField, d: usize, space: Space) -> (f64, f64) {
    let grid = field.grid();
    let ax = &grid.axes[d];
    let m = ax.points;
    let stride = grid.strides()[d];
    let (coords, marginal): (Vec<f64>, Vec<f64>) = match space {
        Space::Position => {
            let mut marg = vec![0.0; m];
            for (i, v) in field.values().iter().enumerate() {
                marg[(i / stride) % m] += v.norm_sqr();
            }
            (ax.coordinates(), marg)
        }
        Space::Momentum => {
            let fft = FftNd::new(&grid.shape());
            let mut data = field.values().to_vec();
            fft.transform_axis(&mut data, d, true);
            let mut marg = vec![0.0; m];
            for (i, v) in data.iter().enumerate() {
                marg[(i / stride) % m] += v.norm_sqr();
            }
            let base = 2.0 * PI * field.hbar() / (m as f64 * ax.spacing());
            let mi = m as i64;
            let xi = (0..mi).map(|j| base * if j < mi / 2 { j } else { j - mi } as f64).collect();
            (xi, marg)
        }
    };
    let top = marginal.iter().cloned().fold(0.0, f64::max);
    let periodic = matches!(space, Space::Position) && ax.periodic;
    let centre = if periodic {
        let l = ax.length();
        let (s, c) = marginal.iter().zip(&coords).fold((0.0, 0.0), |(s, c), (w, x)| {
            let a = 2.0 * PI * (x - ax.lower) / l;
            (s + w * a.sin(), c + w * a.cos())
        });
        ax.lower + l * f64::atan2(s, c).rem_euclid(2.0 * PI) / (2.0 * PI)
    } else {
        let mass: f64 = marginal.iter().sum();
        marginal.iter().zip(&coords).map(|(w, x)| w * x).sum::<f64>() / mass
    };
    let mut r: f64 = 0.0;
    for (w, x) in marginal.iter().zip(&coords) {
        if *w >= 1e-12 * top {
            let dx = if periodic { ax.displacement(*x, centre) } else { x - centre };
            r = r.max(dx.abs());
        }
    }
    (centre, r)
}

/// Evolves every family member and superposes the results with the family
/// weights.
pub fn propagate_superposition(
    family: &CoherentFamily,
    p: &SchrodingerProblem,
    t: f64,
    cfg: &PropagatorConfig,
) -> Result<SampledField> {
    if family.dim() != p.dim {
        return Err(Error::param("family and problem differ in dimension"));
    }
    let grid = problem_grid(p)?;
    let evolved: Vec<Result<SampledField>> = family
        .members
        .par_iter()
        .map(|m| evolve(&m.sample(&grid, p.hbar)?, p, t, cfg))
        .collect();
    let mut acc = SampledField::zeros(grid, p.hbar)?;
    for (i, e) in evolved.into_iter().enumerate() {
        let w = family.weight(i);
        acc = acc.combine(Complex64::new(1.0, 0.0), &e?, Complex64::new(w, 0.0))?;
    }
    Ok(acc)
}

/// One row of a centre-tracking run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub center: ClassicalState,
    pub classical: ClassicalState,
    pub deviation: f64,
}

/// Evolves a coherent state through increasing `times`, comparing the
/// Husimi centre with the classical flow at each time.
pub fn track_trajectory(
    initial: &CoherentState,
    p: &SchrodingerProblem,
    times: &[f64],
    cfg: &PropagatorConfig,
) -> Result<Vec<TrajectoryRow>> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("times must be nonnegative and nondecreasing"));
    }
    let grid = problem_grid(p)?;
    let s0 = ClassicalState::new(initial.position().to_vec(), initial.momentum().to_vec())?;
    let mut psi = initial.sample(&grid, p.hbar)?;
    let mut now = 0.0;
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        psi = evolve(&psi, p, t - now, cfg)?;
        now = t;
        let center = track_center(&psi)?;
        let classical = classical_flow(&p.potential, &s0, t)?.state;
        let deviation = center.distance(&classical, Some(&grid.axes));
        rows.push(TrajectoryRow {
            t,
            center,
            classical,
            deviation,
        });
    }
    Ok(rows)
}
