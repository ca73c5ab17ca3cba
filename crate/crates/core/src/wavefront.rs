//! Phase-space concentration diagnostics: Husimi densities, their
//! concentration sets and width scaling across ħ.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::pairwise_sum;
use crate::numerics::{hbar_fourier, loglog_fit, GridSpec, LogLogFit, SampledField};
use crate::profiles::GAUSSIAN_CUTOFF;
use crate::states::IsotropicSubmanifoldModel;

/// Product grid of positions x0 and momenta ξ0 on which Husimi densities live.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub position: GridSpec,
    pub momentum: GridSpec,
}

impl PhaseSpaceGrid {
    pub fn new(position: GridSpec, momentum: GridSpec) -> Result<Self> {
        position.validate()?;
        momentum.validate()?;
        if position.dim() != momentum.dim() {
            return Err(Error::param(format!(
                "position grid has dimension {}, momentum grid {}",
                position.dim(),
                momentum.dim()
            )));
        }
        Ok(PhaseSpaceGrid { position, momentum })
    }

    pub fn dim(&self) -> usize {
        self.position.dim()
    }

    /// The 2n-dimensional grid (x0 axes, then ξ0 axes).
    pub fn combined(&self) -> GridSpec {
        let mut axes = self.position.axes.clone();
        axes.extend(self.momentum.axes.iter().cloned());
        GridSpec { axes }
    }

    /// Largest spacing over all axes.
    pub fn coarsest_spacing(&self) -> f64 {
        self.position
            .axes
            .iter()
            .chain(&self.momentum.axes)
            .map(|a| a.spacing())
            .fold(0.0, f64::max)
    }
}

/// H(x0, ξ0) = |⟨ψ, g_{x0,ξ0}⟩|² on a phase-space grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HusimiField {
    pub grid: PhaseSpaceGrid,
    /// Row-major over (x0 axes, ξ0 axes).
    pub values: Vec<f64>,
    pub hbar: f64,
    /// Phase-space grid or sample grid coarser than √ħ.
    pub under_resolved: bool,
}

impl HusimiField {
    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Phase-space point of grid index `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.grid.combined().point(flat)
    }

    pub fn argmax(&self) -> Option<Vec<f64>> {
        let (i, v) = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        (*v > 0.0).then(|| self.point(i))
    }

    /// ∫∫ H dx0 dξ0 / (2πħ)^n, which equals ‖ψ‖² when the grid covers the mass.
    pub fn total_mass(&self) -> f64 {
        let w = self.grid.combined().weights();
        let s: Vec<f64> = self.values.iter().zip(&w).map(|(h, w)| h * w).collect();
        pairwise_sum(&s) / (2.0 * PI * self.hbar).powi(self.grid.dim() as i32)
    }

    /// Header `x0,..,xi0,..,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.grid.dim();
        let mut cols: Vec<String> = (0..n).map(|d| format!("x{d}")).collect();
        cols.extend((0..n).map(|d| format!("xi{d}")));
        cols.push("value".into());
        writeln!(w, "{}", cols.join(","))?;
        let g = self.grid.combined();
        let mut p = vec![0.0; 2 * n];
        for (i, v) in self.values.iter().enumerate() {
            g.point_into(i, &mut p);
            let mut line: Vec<String> = p.iter().map(|c| format!("{c:.16e}")).collect();
            line.push(format!("{v:.16e}"));
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// One axis of the separable transform: contracts sample index i into the
/// pair (p, q) of window centre and frequency.
fn transform_axis(
    data: &[Complex64],
    shape: &[usize],
    d: usize,
    kernel: &[Vec<(usize, Complex64)>],
) -> Vec<Complex64> {
    let outer: usize = shape[..d].iter().product();
    let inner: usize = shape[d + 1..].iter().product();
    let m = shape[d];
    let pq = kernel.len();
    let mut out = vec![Complex64::new(0.0, 0.0); outer * pq * inner];
    out.par_chunks_mut(pq * inner).enumerate().for_each(|(o, block)| {
        let src = &data[o * m * inner..(o + 1) * m * inner];
        for (r, row) in kernel.iter().enumerate() {
            let dst = &mut block[r * inner..(r + 1) * inner];
            for &(i, c) in row {
                let s = &src[i * inner..(i + 1) * inner];
                for (a, b) in dst.iter_mut().zip(s) {
                    *a += c * b;
                }
            }
        }
    });
    out
}

/// Husimi density of a sampled field: windowed ħ-Fourier transforms with
/// the Gaussian window (πħ)^{-1/4}e^{-(x−x0)²/2ħ} per axis, evaluated directly
/// on the requested centres and frequencies.
pub fn fbi_transform(field: &SampledField, psg: &PhaseSpaceGrid) -> Result<HusimiField> {
    let grid = field.grid();
    let n = grid.dim();
    if psg.dim() != n {
        return Err(Error::param(format!(
            "phase-space grid has dimension {}, field has {n}",
            psg.dim()
        )));
    }
    let hbar = field.hbar();
    let sh = hbar.sqrt();
    let cutoff = GAUSSIAN_CUTOFF * sh;
    let norm = (PI * hbar).powf(-0.25);
    // windows must be resolved and the requested momenta below the sample Nyquist limit
    let under_resolved = psg.coarsest_spacing() > sh
        || grid.axes.iter().zip(&psg.momentum.axes).any(|(a, m)| {
            a.spacing() > sh || m.lower.abs().max(m.upper.abs()) > PI * hbar / a.spacing()
        });

    let mut data = field.values().to_vec();
    let mut shape = grid.shape();
    for d in 0..n {
        let ax = &grid.axes[d];
        let w = ax.weights();
        let xs = ax.coordinates();
        let centres = psg.position.axes[d].coordinates();
        let freqs = psg.momentum.axes[d].coordinates();
        let mut kernel = Vec::with_capacity(centres.len() * freqs.len());
        for &x0 in &centres {
            // samples within the window, with displacement and real weight
            let window: Vec<(usize, f64, f64)> = xs
                .iter()
                .enumerate()
                .filter_map(|(i, &x)| {
                    let disp = ax.displacement(x, x0);
                    (disp.abs() <= cutoff).then(|| (i, disp, w[i] * norm * (-disp * disp / (2.0 * hbar)).exp()))
                })
                .collect();
            for &xi in &freqs {
                // the e^{-iξ0·x0/ħ} factor is a global phase per (x0, ξ0)
                kernel.push(
                    window
                        .iter()
                        .map(|&(i, disp, c)| (i, Complex64::from_polar(c, -xi * disp / hbar)))
                        .collect::<Vec<_>>(),
                );
            }
        }
        data = transform_axis(&data, &shape, d, &kernel);
        shape[d] = kernel.len();
    }

    // reorder (p0, q0, p1, q1, ..) into (p0, p1, .., q0, q1, ..)
    let combined = psg.combined();
    let pshape = psg.position.shape();
    let qshape = psg.momentum.shape();
    let mut values = vec![0.0; combined.len()];
    let cstrides = combined.strides();
    for (flat, v) in data.iter().enumerate() {
        let mut rem = flat;
        let mut target = 0;
        for d in (0..n).rev() {
            let pq = rem % shape[d];
            rem /= shape[d];
            let (p, q) = (pq / qshape[d], pq % qshape[d]);
            debug_assert!(p < pshape[d]);
            target += p * cstrides[d] + q * cstrides[n + d];
        }
        values[target] = v.norm_sqr();
    }
    Ok(HusimiField {
        grid: psg.clone(),
        values,
        hbar,
        under_resolved,
    })
}

/// Grid points where H ≥ threshold_fraction · max H. Empty for a zero field.
pub fn concentration_set(h: &HusimiField, threshold_fraction: f64) -> Result<Vec<Vec<f64>>> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::param("threshold fraction must lie in (0, 1)"));
    }
    let max = h.max();
    if max <= 0.0 {
        return Ok(vec![]);
    }
    let g = h.grid.combined();
    Ok(h.values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v >= threshold_fraction * max)
        .map(|(i, _)| g.point(i))
        .collect())
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// sup over a of the distance from a to the set b.
pub fn directed_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if b.is_empty() {
        return f64::INFINITY;
    }
    a.par_iter()
        .map(|p| b.iter().map(|q| euclid(p, q)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
}

pub fn hausdorff_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    directed_distance(a, b).max(directed_distance(b, a))
}

/// Samples of Σ as phase-space points (x, ξ), 64 per parameter dimension.
pub fn sample_submanifold(sigma: &IsotropicSubmanifoldModel, ranges: &[(f64, f64)]) -> Result<Vec<Vec<f64>>> {
    Ok(sigma
        .sample(64, ranges)?
        .into_iter()
        .map(|(mut x, xi)| {
            x.extend(xi);
            x
        })
        .collect())
}

/// Direction along which width is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentAxis {
    Position(usize),
    /// Uses |ψ̂|² with ψ̂ the ħ-Fourier transform.
    Momentum(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthScaling {
    pub axis: MomentAxis,
    pub hbars: Vec<f64>,
    /// Variance along the axis per ħ; 0 for a zero field.
    pub moments: Vec<f64>,
    pub fit: LogLogFit,
}

/// Least-squares fit of log(variance along axis) against log ħ.
pub fn width_scaling(states: &[SampledField], axis: MomentAxis) -> Result<WidthScaling> {
    if states.len() < 4 {
        return Err(Error::param("width scaling needs at least four ħ values"));
    }
    let mut hbars = Vec::with_capacity(states.len());
    let mut moments = Vec::with_capacity(states.len());
    for s in states {
        hbars.push(s.hbar());
        let m = match axis {
            MomentAxis::Position(d) => s.position_moments(d)?,
            MomentAxis::Momentum(d) => hbar_fourier(s, 1)?.position_moments(d)?,
        };
        moments.push(m.map(|(_, v)| v).unwrap_or(0.0));
    }
    let fit = loglog_fit(&hbars, &moments)?;
    Ok(WidthScaling {
        axis,
        hbars,
        moments,
        fit,
    })
}
