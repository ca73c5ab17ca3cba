use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::SampledField;
use super::grid::{Axis, GridSpec};
use crate::error::{Error, Result};

/// Multi-dimensional FFT over a row-major array, one 1D transform per axis.
pub(crate) struct FftNd {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl FftNd {
    pub(crate) fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        FftNd {
            shape: shape.to_vec(),
            forward: shape.iter().map(|&m| planner.plan_fft_forward(m)).collect(),
            inverse: shape.iter().map(|&m| planner.plan_fft_inverse(m)).collect(),
        }
    }

    /// Unnormalised transform along one axis: `forward` uses e^{-2πi jk/M}.
    pub(crate) fn transform_axis(&self, data: &mut [Complex64], axis: usize, forward: bool) {
        let m = self.shape[axis];
        let stride: usize = self.shape[axis + 1..].iter().product();
        let plan = if forward {
            &self.forward[axis]
        } else {
            &self.inverse[axis]
        };
        if stride == 1 {
            plan.process(data);
            return;
        }
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        let block = m * stride;
        for outer in 0..data.len() / block {
            let base = outer * block;
            for inner in 0..stride {
                for (j, l) in line.iter_mut().enumerate() {
                    *l = data[base + inner + j * stride];
                }
                plan.process(&mut line);
                for (j, l) in line.iter().enumerate() {
                    data[base + inner + j * stride] = *l;
                }
            }
        }
    }

    pub(crate) fn transform(&self, data: &mut [Complex64], forward: bool) {
        for axis in 0..self.shape.len() {
            self.transform_axis(data, axis, forward);
        }
    }
}

/// Guards applied by the ħ-Fourier transform.
#[derive(Debug, Clone, Copy)]
pub struct FourierOptions {
    /// Largest fraction of the output energy allowed in the outer bins of the
    /// dual grid before the transform is declared under-resolved.
    pub edge_tolerance: f64,
}

impl Default for FourierOptions {
    fn default() -> Self {
        FourierOptions {
            edge_tolerance: 1e-12,
        }
    }
}

/// Dual spacing 2πħ/(MΔx) of an axis.
pub fn dual_spacing(axis: &Axis, hbar: f64) -> f64 {
    2.0 * PI * hbar / (axis.points as f64 * axis.spacing())
}

/// ψ̂(ξ) = (2πħ)^{-n/2} Σ e^{-i·sign·x·ξ/ħ} ψ(x) Δx on the centred dual grid
/// ξ_k = (k − M/2)·2πħ/(MΔx).
pub fn hbar_fourier(field: &SampledField, sign: i32) -> Result<SampledField> {
    let lowers: Vec<f64> = field
        .grid()
        .axes
        .iter()
        .map(|a| -((a.points / 2) as f64) * dual_spacing(a, field.hbar()))
        .collect();
    hbar_fourier_with(field, sign, &lowers, FourierOptions::default())
}

/// Same transform onto the dual grid starting at `lower_bounds`; used to map
/// back onto a grid that is not centred at the origin.
pub fn hbar_fourier_onto(field: &SampledField, sign: i32, lower_bounds: &[f64]) -> Result<SampledField> {
    hbar_fourier_with(field, sign, lower_bounds, FourierOptions::default())
}

pub fn hbar_fourier_with(
    field: &SampledField,
    sign: i32,
    lower_bounds: &[f64],
    opts: FourierOptions,
) -> Result<SampledField> {
    if sign != 1 && sign != -1 {
        return Err(Error::param(format!("sign must be +1 or -1, got {sign}")));
    }
    let grid = field.grid();
    if lower_bounds.len() != grid.dim() {
        return Err(Error::param("one lower bound per axis is required"));
    }
    let hbar = field.hbar();
    let s = sign as f64;
    let shape = grid.shape();
    let strides = grid.strides();
    let mut data = field.values().to_vec();
    let fft = FftNd::new(&shape);
    let mut out_axes = Vec::with_capacity(grid.dim());

    for (d, axis) in grid.axes.iter().enumerate() {
        let m = axis.points;
        let dx = axis.spacing();
        let dxi = dual_spacing(axis, hbar);
        let a = axis.lower;
        let b = lower_bounds[d];
        let scale = dx / (2.0 * PI * hbar).sqrt();
        let pre: Vec<Complex64> = (0..m)
            .map(|j| Complex64::from_polar(1.0, -s * b * (j as f64 * dx) / hbar))
            .collect();
        let post: Vec<Complex64> = (0..m)
            .map(|k| Complex64::from_polar(scale, -s * a * (b + k as f64 * dxi) / hbar))
            .collect();
        for (i, v) in data.iter_mut().enumerate() {
            *v *= pre[(i / strides[d]) % m];
        }
        fft.transform_axis(&mut data, d, sign == 1);
        for (i, v) in data.iter_mut().enumerate() {
            *v *= post[(i / strides[d]) % m];
        }
        out_axes.push(Axis::boxed(b, b + (m as f64 - 1.0) * dxi, m)?);
    }

    let total: f64 = data.iter().map(|v| v.norm_sqr()).sum();
    if total > 0.0 {
        for (d, &m) in shape.iter().enumerate() {
            let band = (m / 32).max(1);
            let edge: f64 = data
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    let k = (i / strides[d]) % m;
                    k < band || k >= m - band
                })
                .map(|(_, v)| v.norm_sqr())
                .sum();
            if edge > opts.edge_tolerance * total {
                return Err(Error::resolution(
                    "fourier-nyquist",
                    format!(
                        "axis {d}: {:.3e} of the spectral energy sits at the edge of the dual grid; \
                         refine the grid spacing (dual half-width is {:.4e})",
                        edge / total,
                        PI * hbar / grid.axes[d].spacing()
                    ),
                ));
            }
        }
    }
    Ok(SampledField::from_parts(GridSpec::new(out_axes)?, data, hbar))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(step: f64, m: usize) -> GridSpec {
        GridSpec::new(vec![Axis::fft_centered(step, m).unwrap()]).unwrap()
    }

    fn coherent(x0: f64, xi0: f64, hbar: f64) -> impl Fn(&[f64]) -> Complex64 {
        move |x: &[f64]| {
            let norm = (PI * hbar).powf(-0.25);
            Complex64::from_polar(
                norm * (-(x[0] - x0).powi(2) / (2.0 * hbar)).exp(),
                xi0 * (x[0] - x0) / hbar,
            )
        }
    }

    #[test]
    fn gaussian_is_a_fixed_point() {
        let hbar = 0.01;
        let m = 512;
        let step = (2.0 * PI * hbar / m as f64).sqrt();
        let f = SampledField::from_fn(line(step, m), hbar, coherent(0.0, 0.0, hbar)).unwrap();
        let g = hbar_fourier(&f, 1).unwrap();
        // symmetric grid: the dual grid coincides with the input grid
        assert!((g.grid().axes[0].spacing() - step).abs() < 1e-14);
        let expect = SampledField::from_fn(g.grid().clone(), hbar, coherent(0.0, 0.0, hbar)).unwrap();
        assert!(g.sup_distance(&expect).unwrap() < 1e-8);
    }

    #[test]
    fn coherent_state_rotates() {
        let hbar = 0.01;
        let m = 1024;
        let f = SampledField::from_fn(line(0.01, m), hbar, coherent(1.0, 0.0, hbar)).unwrap();
        let g = hbar_fourier(&f, 1).unwrap();
        let expect =
            SampledField::from_fn(g.grid().clone(), hbar, coherent(0.0, -1.0, hbar)).unwrap();
        assert!(g.sup_distance(&expect).unwrap() < 1e-8);
    }

    #[test]
    fn round_trip_and_parseval_off_centre() {
        let hbar = 0.02;
        let g = GridSpec::new(vec![Axis::boxed(-2.3, 3.7, 600).unwrap()]).unwrap();
        let f = SampledField::from_fn(g.clone(), hbar, |x| {
            coherent(0.5, 0.7, hbar)(x) + coherent(1.2, -0.4, hbar)(x) * 0.3
        })
        .unwrap();
        let h = hbar_fourier(&f, 1).unwrap();
        assert!((h.norm() - f.norm()).abs() < 1e-10);
        let back = hbar_fourier_onto(&h, -1, &[g.axes[0].lower]).unwrap();
        assert!((back.grid().axes[0].spacing() - g.axes[0].spacing()).abs() < 1e-12);
        let diff = back
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn under_resolved_grid_is_refused() {
        let hbar = 0.001;
        // plane-wave momentum 3 exceeds the dual half-width πħ/Δx ≈ 0.31
        let f = SampledField::from_fn(line(0.01, 512), hbar, coherent(0.0, 3.0, 0.01)).unwrap();
        let err = hbar_fourier(&f, 1).unwrap_err();
        assert_eq!(err.guard_name(), Some("fourier-nyquist"));
        assert!(hbar_fourier(&f, 2).is_err());
    }
}
