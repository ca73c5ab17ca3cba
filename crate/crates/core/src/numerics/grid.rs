use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One axis of a uniform tensor-product grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
    #[serde(default)]
    pub periodic: bool,
}

impl Axis {
    pub fn new(lower: f64, upper: f64, points: usize, periodic: bool) -> Result<Self> {
        let axis = Axis {
            lower,
            upper,
            points,
            periodic,
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn periodic(lower: f64, upper: f64, points: usize) -> Result<Self> {
        Self::new(lower, upper, points, true)
    }

    pub fn boxed(lower: f64, upper: f64, points: usize) -> Result<Self> {
        Self::new(lower, upper, points, false)
    }

    /// Boxed axis laid out the way the discrete Fourier transform expects:
    /// `points` nodes at `(j - points/2) * step`.
    pub fn fft_centered(step: f64, points: usize) -> Result<Self> {
        let lower = -((points / 2) as f64) * step;
        let upper = lower + (points as f64 - 1.0) * step;
        Self::boxed(lower, upper, points)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::param(format!(
                "axis needs at least 2 points, got {}",
                self.points
            )));
        }
        if !(self.lower.is_finite() && self.upper.is_finite()) || self.upper <= self.lower {
            return Err(Error::param(format!(
                "axis bounds must satisfy lower < upper, got [{}, {}]",
                self.lower, self.upper
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        if self.periodic {
            (self.upper - self.lower) / self.points as f64
        } else {
            (self.upper - self.lower) / (self.points as f64 - 1.0)
        }
    }

    /// Length of the domain covered by the axis (the period for periodic axes).
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        self.lower + i as f64 * self.spacing()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coordinate(i)).collect()
    }

    /// Quadrature weights: uniform cells for periodic axes, trapezoid otherwise.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.points];
        if !self.periodic {
            w[0] *= 0.5;
            w[self.points - 1] *= 0.5;
        }
        w
    }

    /// Index of the node closest to `x` (wrapped for periodic axes).
    pub fn nearest_index(&self, x: f64) -> usize {
        let h = self.spacing();
        let raw = ((x - self.lower) / h).round();
        if self.periodic {
            raw.rem_euclid(self.points as f64) as usize % self.points
        } else {
            raw.clamp(0.0, self.points as f64 - 1.0) as usize
        }
    }

    /// Signed displacement `x - y` (minimal image on periodic axes).
    pub fn displacement(&self, x: f64, y: f64) -> f64 {
        let d = x - y;
        if self.periodic {
            let l = self.length();
            d - l * (d / l).round()
        } else {
            d
        }
    }
}

/// Uniform tensor-product grid, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::param("grid needs at least one axis"));
        }
        for a in &axes {
            a.validate()?;
        }
        Ok(GridSpec { axes })
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::param("grid needs at least one axis"));
        }
        self.axes.iter().try_for_each(Axis::validate)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Same nodes up to round-off in the bounds (1e-12 of the axis length).
    pub fn same_nodes(&self, other: &GridSpec) -> bool {
        self.axes.len() == other.axes.len()
            && self.axes.iter().zip(&other.axes).all(|(a, b)| {
                let tol = 1e-12 * (a.upper - a.lower).abs();
                a.points == b.points
                    && a.periodic == b.periodic
                    && (a.lower - b.lower).abs() <= tol
                    && (a.upper - b.upper).abs() <= tol
            })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dim()];
        for d in (0..self.dim().saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * self.axes[d + 1].points;
        }
        strides
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for d in (0..self.dim()).rev() {
            let m = self.axes[d].points;
            idx[d] = flat % m;
            flat /= m;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, a)| acc * a.points + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.point_into(flat, &mut x);
        x
    }

    pub fn point_into(&self, mut flat: usize, out: &mut [f64]) {
        for d in (0..self.dim()).rev() {
            let m = self.axes[d].points;
            out[d] = self.axes[d].coordinate(flat % m);
            flat /= m;
        }
    }

    /// Sub-grid made of the listed axes, in the listed order.
    pub fn select_axes(&self, keep: &[usize]) -> Result<GridSpec> {
        let axes = keep
            .iter()
            .map(|&d| {
                self.axes
                    .get(d)
                    .cloned()
                    .ok_or_else(|| Error::param(format!("axis {d} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        GridSpec::new(axes)
    }

    /// Per-point quadrature weights (product of per-axis weights), row-major.
    pub fn weights(&self) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = self.axes.iter().map(Axis::weights).collect();
        let mut out = vec![1.0; self.len()];
        let strides = self.strides();
        for (d, w) in per_axis.iter().enumerate() {
            let m = w.len();
            for (flat, v) in out.iter_mut().enumerate() {
                *v *= w[(flat / strides[d]) % m];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_conventions() {
        let p = Axis::periodic(0.0, 1.0, 4).unwrap();
        let b = Axis::boxed(0.0, 1.0, 5).unwrap();
        assert_eq!(p.spacing(), 0.25);
        assert_eq!(b.spacing(), 0.25);
        assert_eq!(b.coordinate(4), 1.0);
    }

    #[test]
    fn rejects_degenerate_axes() {
        assert!(Axis::boxed(0.0, 1.0, 1).is_err());
        assert!(Axis::boxed(1.0, 1.0, 8).is_err());
        assert!(GridSpec::new(vec![]).is_err());
    }

    #[test]
    fn flat_and_multi_index_agree() {
        let g = GridSpec::new(vec![
            Axis::boxed(0.0, 1.0, 3).unwrap(),
            Axis::periodic(0.0, 1.0, 4).unwrap(),
        ])
        .unwrap();
        for flat in 0..g.len() {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
        assert_eq!(g.point(5), vec![0.5, 0.25]);
    }

    #[test]
    fn fft_centered_layout() {
        let a = Axis::fft_centered(0.5, 8).unwrap();
        assert_eq!(a.coordinate(4), 0.0);
        assert_eq!(a.lower, -2.0);
        assert!((a.spacing() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn periodic_displacement_is_minimal_image() {
        let a = Axis::periodic(0.0, 10.0, 16).unwrap();
        assert!((a.displacement(9.5, 0.5) + 1.0).abs() < 1e-12);
    }
}
