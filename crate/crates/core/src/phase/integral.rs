use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::function::PhaseFunction;
use crate::error::{Error, Result};
use crate::linalg::signature_and_condition;
use crate::numerics::field::check_hbar;
use crate::numerics::quadrature::pairwise_sum_complex;
use crate::profiles::Profile;

/// One separable term c·ħ^{power/2}·Π base(x)·Π t-profiles(t)·Π u-profiles(v).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeTerm {
    #[serde(default)]
    pub power: usize,
    #[serde(default = "unit")]
    pub coefficient: Complex64,
    /// Either empty (no x-dependence) or one profile per base coordinate.
    #[serde(default)]
    pub base: Vec<Profile>,
    #[serde(default)]
    pub t: Vec<Profile>,
    #[serde(default)]
    pub u: Vec<Profile>,
}

fn unit() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn default_depth() -> usize {
    4
}

/// Amplitude a(x, t, v, ħ) = Σ_j ħ^{j/2} a_j(x, t, v) with v = u/√ħ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Amplitude {
    pub terms: Vec<AmplitudeTerm>,
    #[serde(default = "default_depth")]
    pub depth: usize,
}

impl Amplitude {
    pub fn separable(t: Vec<Profile>, u: Vec<Profile>) -> Self {
        Amplitude {
            terms: vec![AmplitudeTerm {
                power: 0,
                coefficient: unit(),
                base: vec![],
                t,
                u,
            }],
            depth: default_depth(),
        }
    }

    pub fn zero(t_dim: usize, u_dim: usize) -> Self {
        Amplitude {
            terms: vec![AmplitudeTerm {
                power: 0,
                coefficient: Complex64::new(0.0, 0.0),
                base: vec![],
                t: vec![Profile::gaussian(1.0); t_dim],
                u: vec![Profile::gaussian(1.0); u_dim],
            }],
            depth: default_depth(),
        }
    }

    pub fn validate(&self, f: &PhaseFunction) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::param("amplitude has no terms"));
        }
        for (i, term) in self.terms.iter().enumerate() {
            if term.t.len() != f.t_dim() || term.u.len() != f.u_dim() {
                return Err(Error::param(format!(
                    "amplitude term {i} has {} t- and {} u-profiles, phase needs {} and {}",
                    term.t.len(),
                    term.u.len(),
                    f.t_dim(),
                    f.u_dim()
                )));
            }
            if !term.base.is_empty() && term.base.len() != f.base_dim() {
                return Err(Error::param(format!("amplitude term {i} base profiles do not match the base")));
            }
            for p in term.base.iter().chain(&term.t).chain(&term.u) {
                p.validate()?;
            }
            if let Some(j) = term.t.iter().position(|p| p.support().is_none()) {
                return Err(Error::param(format!(
                    "amplitude term {i}: t-profile {j} has no bounded support"
                )));
            }
            if let Some(j) = term.u.iter().position(|p| !p.is_rapidly_decreasing(40.0)) {
                return Err(Error::param(format!(
                    "amplitude term {i}: u-profile {j} does not decay rapidly"
                )));
            }
        }
        Ok(())
    }

    fn active_terms(&self) -> impl Iterator<Item = &AmplitudeTerm> {
        self.terms.iter().filter(move |t| t.power <= self.depth)
    }

    /// a(x, t, v, ħ) at fiber point s = (t, u); v = u/√ħ.
    pub fn eval(&self, x: &[f64], s: &[f64], hbar: f64) -> Complex64 {
        let sh = hbar.sqrt();
        self.active_terms()
            .map(|term| {
                let k = term.t.len();
                let b: f64 = term.base.iter().zip(x).map(|(p, x)| p.eval(*x)).product();
                let t: f64 = term.t.iter().zip(&s[..k]).map(|(p, t)| p.eval(*t)).product();
                let u: f64 = term.u.iter().zip(&s[k..]).map(|(p, u)| p.eval(u / sh)).product();
                term.coefficient * (b * t * u * sh.powi(term.power as i32))
            })
            .sum()
    }

    /// Quadrature box on the fiber: t-supports and √ħ-scaled u-supports.
    pub fn fiber_box(&self, hbar: f64) -> Vec<(f64, f64)> {
        let sh = hbar.sqrt();
        let first = &self.terms[0];
        let k = first.t.len();
        let l = first.u.len();
        let mut out = vec![(f64::INFINITY, f64::NEG_INFINITY); k + l];
        for term in self.active_terms() {
            for (d, p) in term.t.iter().chain(&term.u).enumerate() {
                let (a, b) = p.support().unwrap_or((-40.0, 40.0));
                let (a, b) = if d >= k { (a * sh, b * sh) } else { (a, b) };
                out[d] = (out[d].0.min(a), out[d].1.max(b));
            }
        }
        out
    }

    /// Smallest variation length per fiber axis.
    fn fiber_scales(&self, hbar: f64) -> Vec<f64> {
        let sh = hbar.sqrt();
        let k = self.terms[0].t.len();
        let mut out = vec![f64::INFINITY; k + self.terms[0].u.len()];
        for term in self.active_terms() {
            for (d, p) in term.t.iter().chain(&term.u).enumerate() {
                let s = p.resolution_scale() * if d >= k { sh } else { 1.0 };
                out[d] = out[d].min(s);
            }
        }
        out
    }
}

/// Node-density controls for [`oscillatory_integral_with`].
#[derive(Debug, Clone)]
pub struct QuadratureOptions {
    /// Minimum number of nodes per local period 2πħ/|∂f| along each axis.
    pub nodes_per_period: f64,
    /// Nodes per variation length of the amplitude profiles.
    pub nodes_per_scale: f64,
    /// Refuse rather than use more nodes than this on one axis.
    pub max_nodes_per_axis: usize,
    /// Fixed node counts per fiber axis instead of automatic sizing; checked
    /// against the density guard.
    pub fixed_nodes: Option<Vec<usize>>,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            nodes_per_period: 16.0,
            nodes_per_scale: 4.0,
            max_nodes_per_axis: 1 << 24,
            fixed_nodes: None,
        }
    }
}

fn full_point(x: &[f64], s: &[f64]) -> Vec<f64> {
    let mut z = x.to_vec();
    z.extend_from_slice(s);
    z
}

/// Fiber points at which gradient bounds over the box are taken: all corners,
/// plus interior lattice points when the phase is not quadratic.
fn probe_points(bx: &[(f64, f64)], quadratic: bool) -> Vec<Vec<f64>> {
    let per: usize = if quadratic { 2 } else if bx.len() <= 3 { 9 } else { 3 };
    let total = per.pow(bx.len() as u32);
    (0..total)
        .map(|mut flat| {
            bx.iter()
                .map(|&(a, b)| {
                    let i = flat % per;
                    flat /= per;
                    a + (b - a) * i as f64 / (per - 1) as f64
                })
                .collect()
        })
        .collect()
}

struct AxisPlan {
    lo: f64,
    hi: f64,
    /// number of intervals (nodes = intervals + 1)
    intervals: usize,
}

impl AxisPlan {
    fn step(&self) -> f64 {
        (self.hi - self.lo) / self.intervals as f64
    }
    fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step()
    }
    fn weight(&self, i: usize) -> f64 {
        let h = self.step();
        if i == 0 || i == self.intervals {
            0.5 * h
        } else {
            h
        }
    }
}

fn intervals_for(len: f64, grad: f64, scale: f64, hbar: f64, opts: &QuadratureOptions) -> f64 {
    let oscill = len * grad * opts.nodes_per_period / (2.0 * PI * hbar);
    let smooth = if scale.is_finite() {
        len * opts.nodes_per_scale / scale
    } else {
        4.0
    };
    oscill.max(smooth).max(4.0)
}

/// ħ^{r−N/2} ∫ e^{if(x,t,u)/ħ} a(x, t, u/√ħ, ħ) dt du.
pub fn oscillatory_integral(
    f: &PhaseFunction,
    a: &Amplitude,
    order: f64,
    x: &[f64],
    hbar: f64,
) -> Result<Complex64> {
    oscillatory_integral_with(f, a, order, x, hbar, &QuadratureOptions::default())
}

pub fn oscillatory_integral_with(
    f: &PhaseFunction,
    a: &Amplitude,
    order: f64,
    x: &[f64],
    hbar: f64,
    opts: &QuadratureOptions,
) -> Result<Complex64> {
    check_hbar(hbar)?;
    a.validate(f)?;
    if x.len() != f.base_dim() {
        return Err(Error::param(format!(
            "point has {} coordinates, phase base dimension is {}",
            x.len(),
            f.base_dim()
        )));
    }
    if !order.is_finite() || !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NumericInput("order or evaluation point".into()));
    }
    let nf = f.fiber_dim();
    let prefactor = hbar.powf(order - nf as f64 / 2.0);
    if nf == 0 {
        return Ok(prefactor * Complex64::from_polar(1.0, f.value(x) / hbar) * a.eval(x, &[], hbar));
    }
    if a.active_terms().all(|t| t.coefficient == Complex64::new(0.0, 0.0)) {
        return Ok(Complex64::new(0.0, 0.0));
    }

    let n = f.base_dim();
    let bx = a.fiber_box(hbar);
    let scales = a.fiber_scales(hbar);
    let form = f.quadratic_form();
    let probes = probe_points(&bx, form.is_some());
    let safety = if form.is_some() { 1.0 } else { 1.25 };
    let mut gmax = vec![0.0f64; nf];
    let mut gmean = vec![0.0f64; nf];
    for s in &probes {
        let g = f.gradient(&full_point(x, s));
        for d in 0..nf {
            gmax[d] = gmax[d].max(g[n + d].abs() * safety);
            gmean[d] += g[n + d].abs() / probes.len() as f64;
        }
    }

    let required: Vec<f64> = (0..nf)
        .map(|d| intervals_for(bx[d].1 - bx[d].0, gmax[d], scales[d], hbar, opts))
        .collect();

    if let Some(fixed) = &opts.fixed_nodes {
        if fixed.len() != nf {
            return Err(Error::param("fixed node counts need one entry per fiber axis"));
        }
        for d in 0..nf {
            let len = bx[d].1 - bx[d].0;
            let osc = len * gmax[d] * opts.nodes_per_period / (2.0 * PI * hbar);
            if ((fixed[d].max(2) - 1) as f64) < osc {
                return Err(Error::resolution(
                    "oscillation-resolution",
                    format!(
                        "fiber axis {d}: {} nodes give fewer than {} per phase period; at least {} are needed",
                        fixed[d],
                        opts.nodes_per_period,
                        osc.ceil() as usize + 1
                    ),
                ));
            }
        }
        let plans: Vec<AxisPlan> = (0..nf)
            .map(|d| AxisPlan {
                lo: bx[d].0,
                hi: bx[d].1,
                intervals: fixed[d].max(2) - 1,
            })
            .collect();
        let sum = tensor_sum(f, a, x, hbar, &plans, None, opts)?;
        return Ok(prefactor * sum);
    }

    // innermost axis: the one whose local sizing saves the most work
    let inner = (0..nf)
        .min_by(|&p, &q| {
            let cost = |d: usize| {
                let outer: f64 = (0..nf).filter(|&a| a != d).map(|a| required[a]).product();
                let local = intervals_for(bx[d].1 - bx[d].0, gmean[d], scales[d], hbar, opts);
                outer * local
            };
            cost(p).total_cmp(&cost(q))
        })
        .unwrap_or(nf - 1);
    let mut plans = Vec::with_capacity(nf);
    for d in 0..nf {
        let need = required[d].ceil() as usize;
        if need > opts.max_nodes_per_axis {
            return Err(Error::resolution(
                "oscillation-resolution",
                format!(
                    "fiber axis {d} needs {need} nodes, above the limit {}",
                    opts.max_nodes_per_axis
                ),
            ));
        }
        plans.push(AxisPlan {
            lo: bx[d].0,
            hi: bx[d].1,
            intervals: need,
        });
    }
    let inner_plan = InnerPlan::new(&bx[inner], scales[inner], hbar, opts, gmax[inner])?;
    let sum = tensor_sum(f, a, x, hbar, &plans, Some((inner, inner_plan)), opts)?;
    Ok(prefactor * sum)
}

/// Power-of-two refinement levels on the innermost axis.
struct InnerPlan {
    lo: f64,
    hi: f64,
    base_intervals: usize,
    max_level: usize,
}

impl InnerPlan {
    fn new(bx: &(f64, f64), scale: f64, hbar: f64, opts: &QuadratureOptions, gmax: f64) -> Result<Self> {
        let len = bx.1 - bx.0;
        let smooth = intervals_for(len, 0.0, scale, hbar, opts);
        let base_intervals = smooth.ceil() as usize;
        let need = intervals_for(len, gmax, scale, hbar, opts);
        let mut max_level = 0;
        while ((base_intervals << max_level) as f64) < need {
            max_level += 1;
        }
        if base_intervals << max_level > opts.max_nodes_per_axis {
            return Err(Error::resolution(
                "oscillation-resolution",
                format!(
                    "inner fiber axis needs {} nodes, above the limit {}",
                    base_intervals << max_level,
                    opts.max_nodes_per_axis
                ),
            ));
        }
        Ok(InnerPlan {
            lo: bx.0,
            hi: bx.1,
            base_intervals,
            max_level,
        })
    }

    fn level_for(&self, local_grad: f64, hbar: f64, opts: &QuadratureOptions) -> usize {
        let need = (self.hi - self.lo) * local_grad * opts.nodes_per_period / (2.0 * PI * hbar);
        let mut level = 0;
        while ((self.base_intervals << level) as f64) < need && level < self.max_level {
            level += 1;
        }
        level
    }

    fn plan(&self, level: usize) -> AxisPlan {
        AxisPlan {
            lo: self.lo,
            hi: self.hi,
            intervals: self.base_intervals << level,
        }
    }
}

/// Sum over the tensor grid. With an inner axis, the inner line uses its own
/// level per outer node and a phase recurrence when f is affine along it.
fn tensor_sum(
    f: &PhaseFunction,
    a: &Amplitude,
    x: &[f64],
    hbar: f64,
    plans: &[AxisPlan],
    inner: Option<(usize, InnerPlan)>,
    opts: &QuadratureOptions,
) -> Result<Complex64> {
    let nf = plans.len();
    let n = f.base_dim();
    let k = f.t_dim();
    let sh = hbar.sqrt();
    let terms: Vec<&AmplitudeTerm> = a.active_terms().collect();
    let coeffs: Vec<Complex64> = terms
        .iter()
        .map(|t| {
            let b: f64 = t.base.iter().zip(x).map(|(p, x)| p.eval(*x)).product();
            t.coefficient * (b * sh.powi(t.power as i32))
        })
        .collect();
    let profile = |term: &AmplitudeTerm, d: usize, s: f64| -> f64 {
        if d < k {
            term.t[d].eval(s)
        } else {
            term.u[d - k].eval(s / sh)
        }
    };

    let (inner_axis, inner_plan) = match inner {
        Some((d, p)) => (Some(d), Some(p)),
        None => (None, None),
    };
    let outer_axes: Vec<usize> = (0..nf).filter(|d| Some(*d) != inner_axis).collect();
    let outer_counts: Vec<usize> = outer_axes.iter().map(|&d| plans[d].intervals + 1).collect();
    let outer_total: usize = outer_counts.iter().product();

    // per-level cache of inner-axis profile values × trapezoid weights, per term
    let inner_cache: Vec<Vec<Vec<f64>>> = match (&inner_plan, inner_axis) {
        (Some(ip), Some(d)) => (0..=ip.max_level)
            .map(|level| {
                let p = ip.plan(level);
                terms
                    .iter()
                    .map(|t| (0..=p.intervals).map(|i| profile(t, d, p.node(i)) * p.weight(i)).collect())
                    .collect()
            })
            .collect(),
        _ => vec![],
    };
    let affine_inner = match (f.quadratic_form(), inner_axis) {
        (Some(q), Some(d)) => q.is_affine_in(n + d),
        _ => false,
    };

    let per_outer: Vec<Complex64> = (0..outer_total)
        .into_par_iter()
        .with_min_len(64)
        .map(|flat| {
            let mut s = vec![0.0; nf];
            let mut w_outer = 1.0;
            let mut rem = flat;
            let mut idx = vec![0usize; outer_axes.len()];
            for (j, &d) in outer_axes.iter().enumerate().rev() {
                idx[j] = rem % outer_counts[j];
                rem /= outer_counts[j];
                s[d] = plans[d].node(idx[j]);
                w_outer *= plans[d].weight(idx[j]);
            }
            // outer amplitude factor per term
            let outer_amp: Vec<f64> = terms
                .iter()
                .map(|t| outer_axes.iter().map(|&d| profile(t, d, s[d])).product())
                .collect();
            if outer_amp.iter().all(|v| *v == 0.0) {
                return Complex64::new(0.0, 0.0);
            }
            match (inner_axis, &inner_plan) {
                (None, _) | (_, None) => {
                    let z = full_point(x, &s);
                    let e = Complex64::from_polar(w_outer, f.value(&z) / hbar);
                    let amp: Complex64 = coeffs.iter().zip(&outer_amp).map(|(c, o)| c * o).sum();
                    e * amp
                }
                (Some(d), Some(ip)) => {
                    let mut z = full_point(x, &s);
                    z[n + d] = ip.lo;
                    let g_lo = f.gradient(&z)[n + d];
                    let local = if affine_inner {
                        let mut zh = z.clone();
                        zh[n + d] = ip.hi;
                        g_lo.abs().max(f.gradient(&zh)[n + d].abs())
                    } else {
                        (0..=32)
                            .map(|i| {
                                let mut zi = z.clone();
                                zi[n + d] = ip.lo + (ip.hi - ip.lo) * i as f64 / 32.0;
                                f.gradient(&zi)[n + d].abs()
                            })
                            .fold(0.0, f64::max)
                            * 1.25
                    };
                    let level = ip.level_for(local, hbar, opts);
                    let plan = ip.plan(level);
                    let cache = &inner_cache[level];
                    let m = plan.intervals + 1;
                    let mut sums = vec![Complex64::new(0.0, 0.0); terms.len()];
                    if affine_inner {
                        let phi0 = f.value(&z) / hbar;
                        let dphi = g_lo * plan.step() / hbar;
                        let rot = Complex64::from_polar(1.0, dphi);
                        let mut e = Complex64::from_polar(1.0, phi0);
                        for i in 0..m {
                            if i % 64 == 0 {
                                e = Complex64::from_polar(1.0, phi0 + i as f64 * dphi);
                            }
                            for (sm, c) in sums.iter_mut().zip(cache) {
                                *sm += e * c[i];
                            }
                            e *= rot;
                        }
                    } else {
                        for i in 0..m {
                            z[n + d] = plan.node(i);
                            let e = Complex64::from_polar(1.0, f.value(&z) / hbar);
                            for (sm, c) in sums.iter_mut().zip(cache) {
                                *sm += e * c[i];
                            }
                        }
                    }
                    let total: Complex64 = sums
                        .iter()
                        .zip(&coeffs)
                        .zip(&outer_amp)
                        .map(|((sm, c), o)| sm * c * o)
                        .sum();
                    total * w_outer
                }
            }
        })
        .collect();
    Ok(pairwise_sum_complex(&per_outer))
}

/// Stationary-phase evaluation and what it found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryPhaseResult {
    pub value: Complex64,
    pub critical_points: Vec<Vec<f64>>,
    pub signatures: Vec<i32>,
    /// No critical point in the amplitude support: the integral is O(ħ^∞).
    pub nonstationary: bool,
}

/// Largest Hessian condition number accepted at a critical point.
pub const HESSIAN_CONDITION_LIMIT: f64 = 1e8;

/// Leading stationary-phase term ħ^{r−N/2} Σ (2πħ)^{N/2} |det H|^{-1/2}
/// e^{iπσ/4} e^{if/ħ} a over the fiber critical points in the amplitude box.
pub fn stationary_phase_leading(
    f: &PhaseFunction,
    a: &Amplitude,
    order: f64,
    x: &[f64],
    hbar: f64,
) -> Result<StationaryPhaseResult> {
    check_hbar(hbar)?;
    a.validate(f)?;
    if x.len() != f.base_dim() {
        return Err(Error::param("point dimension differs from the phase base"));
    }
    let n = f.base_dim();
    let nf = f.fiber_dim();
    let prefactor = hbar.powf(order - nf as f64 / 2.0);
    if nf == 0 {
        let value = prefactor * Complex64::from_polar(1.0, f.value(x) / hbar) * a.eval(x, &[], hbar);
        return Ok(StationaryPhaseResult {
            value,
            critical_points: vec![],
            signatures: vec![],
            nonstationary: false,
        });
    }
    let bx = a.fiber_box(hbar);
    let critical = find_fiber_critical_points(f, x, &bx);
    let mut value = Complex64::new(0.0, 0.0);
    let mut signatures = Vec::new();
    for s in &critical {
        let z = full_point(x, s);
        let h = f.hessian(&z).view((n, n), (nf, nf)).into_owned();
        let (sig, cond, det) = signature_and_condition(&h);
        let smallest = h.symmetric_eigen().eigenvalues.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
        // a root located to tolerance τ sits within ~√τ of a degenerate one
        let floor = 10.0 * critical_tolerance(f).sqrt();
        if !(cond < HESSIAN_CONDITION_LIMIT) || smallest <= floor {
            return Err(Error::DegenerateCriticalPoint(format!(
                "fiber Hessian condition number {cond:.3e}, smallest eigenvalue {smallest:.3e} at {s:?}"
            )));
        }
        signatures.push(sig);
        let mag = (2.0 * PI * hbar).powf(nf as f64 / 2.0) / det.abs().sqrt();
        let phase = PI * sig as f64 / 4.0 + f.value(&z) / hbar;
        value += Complex64::from_polar(mag, phase) * a.eval(x, s, hbar);
    }
    Ok(StationaryPhaseResult {
        value: prefactor * value,
        nonstationary: critical.is_empty(),
        critical_points: critical,
        signatures,
    })
}

/// Newton from a lattice of seeds (8 per unit length, at least 3 per axis) on
/// s ↦ d_s f(x, s) = 0; distinct roots inside the box.
/// Residual tolerance on d_s f: tighter when derivatives are exact.
fn critical_tolerance(f: &PhaseFunction) -> f64 {
    if f.has_analytic_derivatives() {
        1e-13
    } else {
        1e-8
    }
}

pub fn find_fiber_critical_points(f: &PhaseFunction, x: &[f64], bx: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let n = f.base_dim();
    let nf = bx.len();
    let per: Vec<usize> = bx
        .iter()
        .map(|(a, b)| (((b - a) * 8.0).ceil() as usize + 1).max(3))
        .collect();
    let total: usize = per.iter().product();
    let mut found: Vec<Vec<f64>> = Vec::new();
    let tol = critical_tolerance(f);
    let inside = |s: &[f64]| {
        s.iter()
            .zip(bx)
            .all(|(v, (a, b))| *v >= a - 1e-12 * (1.0 + a.abs()) && *v <= b + 1e-12 * (1.0 + b.abs()))
    };
    for flat in 0..total.min(200_000) {
        let mut rem = flat;
        let mut s: Vec<f64> = vec![0.0; nf];
        for d in (0..nf).rev() {
            let i = rem % per[d];
            rem /= per[d];
            s[d] = bx[d].0 + (bx[d].1 - bx[d].0) * i as f64 / (per[d] - 1) as f64;
        }
        let mut ok = false;
        for _ in 0..50 {
            let z = full_point(x, &s);
            let g: Vec<f64> = f.gradient(&z)[n..].to_vec();
            let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale = 1.0 + s.iter().map(|v| v.abs()).fold(0.0, f64::max);
            if gn < tol * scale {
                ok = true;
                break;
            }
            let h = f.hessian(&z).view((n, n), (nf, nf)).into_owned();
            let step = crate::linalg::min_norm_solve(&h, &g);
            for (si, st) in s.iter_mut().zip(&step) {
                *si -= st;
            }
            if !s.iter().all(|v| v.is_finite()) {
                break;
            }
        }
        if ok && inside(&s) {
            let dup = found.iter().any(|p| {
                p.iter()
                    .zip(&s)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
                    < 1e-8
            });
            if !dup {
                found.push(s);
            }
        }
    }
    found
}
