use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::SampledField;

/// Integrates a sampled field over every axis not listed in `keep`, with the
/// same weights as [`crate::numerics::integrate_field`]. The result lives on
/// the kept axes, in the listed order.
pub fn pushforward(field: &SampledField, keep: &[usize]) -> Result<SampledField> {
    let grid = field.grid();
    let dim = grid.dim();
    if keep.is_empty() {
        return Err(Error::param("pushforward must keep at least one axis"));
    }
    for (i, &d) in keep.iter().enumerate() {
        if d >= dim {
            return Err(Error::param(format!("axis {d} out of range for a {dim}-dimensional field")));
        }
        if keep[..i].contains(&d) {
            return Err(Error::param(format!("axis {d} listed twice")));
        }
    }
    let target = grid.select_axes(keep)?;
    let drop: Vec<usize> = (0..dim).filter(|d| !keep.contains(d)).collect();
    let drop_weights: Vec<Vec<f64>> = drop.iter().map(|&d| grid.axes[d].weights()).collect();
    let tstrides = target.strides();
    let mut out = vec![Complex64::new(0.0, 0.0); target.len()];
    for (flat, v) in field.values().iter().enumerate() {
        let idx = grid.multi_index(flat);
        let w: f64 = drop.iter().zip(&drop_weights).map(|(&d, w)| w[idx[d]]).product();
        let t: usize = keep.iter().zip(&tstrides).map(|(&d, s)| idx[d] * s).sum();
        out[t] += v * w;
    }
    SampledField::new(target, out, field.hbar())
}
