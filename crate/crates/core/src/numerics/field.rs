use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use super::quadrature::{pairwise_sum, pairwise_sum_complex};
use crate::error::{Error, Result};

/// Complex samples of an ħ-dependent function on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: GridSpec,
    values: Vec<Complex64>,
    hbar: f64,
}

/// JSON header written next to a field's CSV samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldHeader {
    pub grid: GridSpec,
    pub hbar: f64,
}

pub(crate) fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::param(format!("hbar must be positive, got {hbar}")));
    }
    Ok(())
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>, hbar: f64) -> Result<Self> {
        grid.validate()?;
        check_hbar(hbar)?;
        if values.len() != grid.len() {
            return Err(Error::param(format!(
                "field has {} values but the grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NumericInput(format!("sample {i} is not finite")));
        }
        Ok(SampledField { grid, values, hbar })
    }

    /// Internal constructor for values produced by trusted numerical kernels.
    pub(crate) fn from_parts(grid: GridSpec, values: Vec<Complex64>, hbar: f64) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        SampledField { grid, values, hbar }
    }

    pub fn zeros(grid: GridSpec, hbar: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![Complex64::new(0.0, 0.0); n], hbar)
    }

    /// Samples `f` at every grid point.
    pub fn from_fn<F>(grid: GridSpec, hbar: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.point_into(i, &mut x);
                f(&x)
            })
            .collect();
        Self::new(grid, values, hbar)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub(crate) fn check_same_grid(&self, other: &SampledField) -> Result<()> {
        if !self.grid.same_nodes(&other.grid) {
            return Err(Error::param("fields live on different grids"));
        }
        Ok(())
    }

    /// Discrete L² norm squared with uniform cell weights.
    pub fn norm_sqr(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        pairwise_sum(&sq) * self.grid.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// ⟨self, other⟩ = Σ conj(self)·other·ΔV.
    pub fn inner(&self, other: &SampledField) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let prods: Vec<Complex64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .collect();
        Ok(pairwise_sum_complex(&prods) * self.grid.cell_volume())
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &SampledField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn scaled(&self, c: Complex64) -> SampledField {
        let values = self.values.iter().map(|v| v * c).collect();
        SampledField::from_parts(self.grid.clone(), values, self.hbar)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &SampledField, b: Complex64) -> Result<SampledField> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(SampledField::from_parts(self.grid.clone(), values, self.hbar))
    }

    pub fn conj(&self) -> SampledField {
        let values = self.values.iter().map(|v| v.conj()).collect();
        SampledField::from_parts(self.grid.clone(), values, self.hbar)
    }

    /// Mean and variance of the coordinate on `axis` under the density |ψ|².
    /// Returns `None` for a zero field.
    pub fn position_moments(&self, axis: usize) -> Result<Option<(f64, f64)>> {
        if axis >= self.dim() {
            return Err(Error::param(format!("axis {axis} out of range")));
        }
        let stride = self.grid.strides()[axis];
        let ax = &self.grid.axes[axis];
        let m = ax.points;
        let mut marginal = vec![0.0; m];
        for (i, v) in self.values.iter().enumerate() {
            marginal[(i / stride) % m] += v.norm_sqr();
        }
        let mass = pairwise_sum(&marginal);
        if mass <= 0.0 {
            return Ok(None);
        }
        let xs = ax.coordinates();
        let first: Vec<f64> = marginal.iter().zip(&xs).map(|(w, x)| w * x).collect();
        let mean = pairwise_sum(&first) / mass;
        let second: Vec<f64> = marginal
            .iter()
            .zip(&xs)
            .map(|(w, x)| w * (x - mean) * (x - mean))
            .collect();
        Ok(Some((mean, pairwise_sum(&second) / mass)))
    }

    pub fn header(&self) -> FieldHeader {
        FieldHeader {
            grid: self.grid.clone(),
            hbar: self.hbar,
        }
    }

    /// Writes `x_0,...,x_{n-1},re,im` rows in grid order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.dim();
        let cols: Vec<String> = (0..n).map(|d| format!("x{d}")).collect();
        writeln!(w, "{},re,im", cols.join(","))?;
        let mut x = vec![0.0; n];
        for (i, v) in self.values.iter().enumerate() {
            self.grid.point_into(i, &mut x);
            for c in &x {
                write!(w, "{},", super::fmt_f64(*c))?;
            }
            writeln!(w, "{},{}", super::fmt_f64(v.re), super::fmt_f64(v.im))?;
        }
        Ok(())
    }
}

/// Quadrature of the samples: trapezoid weights on boxed axes, uniform cells
/// on periodic axes. The summation plan is fixed (pairwise over the row-major
/// array), so the result is deterministic and exactly linear under
/// conjugation.
pub fn integrate_field(field: &SampledField) -> Result<Complex64> {
    if let Some(i) = field
        .values
        .iter()
        .position(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(Error::NumericInput(format!("sample {i} is not finite")));
    }
    let w = field.grid.weights();
    let terms: Vec<Complex64> = field.values.iter().zip(&w).map(|(v, w)| v * w).collect();
    Ok(pairwise_sum_complex(&terms))
}
