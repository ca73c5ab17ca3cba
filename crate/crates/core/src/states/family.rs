use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::coherent::{CoherentState, Envelope, WINDOW_CUTOFF};
use super::model::ModelIsotropicState;
use super::submanifold::IsotropicSubmanifoldModel;
use crate::error::{Error, Result};
use crate::numerics::field::check_hbar;
use crate::numerics::{GridSpec, SampledField};

/// τ-indexed family of coherent states with density and quadrature weights.
#[derive(Debug, Clone)]
pub struct CoherentFamily {
    pub submanifold: IsotropicSubmanifoldModel,
    pub nodes: Vec<Vec<f64>>,
    pub members: Vec<CoherentState>,
    /// Density w(τ) at each node.
    pub density: Vec<f64>,
    /// Quadrature weight dτ attached to each node.
    pub quadrature: Vec<f64>,
    /// Largest node spacing along any parameter axis (0 for a single node).
    pub node_spacing: f64,
}

impl CoherentFamily {
    pub fn new(
        submanifold: IsotropicSubmanifoldModel,
        nodes: Vec<Vec<f64>>,
        members: Vec<CoherentState>,
        density: Vec<f64>,
        quadrature: Vec<f64>,
        node_spacing: f64,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::param("family needs at least one node"));
        }
        if members.len() != nodes.len() || density.len() != nodes.len() || quadrature.len() != nodes.len() {
            return Err(Error::param("family nodes, members and weights differ in length"));
        }
        if !density.iter().chain(&quadrature).all(|w| w.is_finite()) {
            return Err(Error::NumericInput("family weights".into()));
        }
        if density.iter().any(|w| *w < 0.0) {
            return Err(Error::param("family density must be nonnegative"));
        }
        let n = members[0].dim();
        if members.iter().any(|m| m.dim() != n) {
            return Err(Error::param("family members differ in dimension"));
        }
        Ok(CoherentFamily {
            submanifold,
            nodes,
            members,
            density,
            quadrature,
            node_spacing,
        })
    }

    /// A family with one node and unit quadrature weight.
    pub fn singleton(member: CoherentState, weight: f64) -> Result<Self> {
        let submanifold = IsotropicSubmanifoldModel::Point {
            position: member.position().to_vec(),
            momentum: member.momentum().to_vec(),
        };
        Self::new(submanifold, vec![vec![]], vec![member], vec![weight], vec![1.0], 0.0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    /// Combined weight w(τ)·dτ of member `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.density[i] * self.quadrature[i]
    }
}

/// Options for [`decompose_model_state_with`].
#[derive(Debug, Clone)]
pub struct DecomposeOptions {
    /// Node spacing as a multiple of √ħ.
    pub spacing_factor: f64,
    /// Parameter range per slow axis; required when a slow profile does not decay.
    pub range: Option<Vec<(f64, f64)>>,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            spacing_factor: 0.25,
            range: None,
        }
    }
}

pub fn decompose_model_state(state: &ModelIsotropicState, hbar: f64) -> Result<CoherentFamily> {
    decompose_model_state_with(state, hbar, &DecomposeOptions::default())
}

/// Writes the state as ∫ (πħ)^{-k/2} Υ_τ dτ over τ ∈ ℝ^k with
/// Υ_τ = ħ^r e^{if/ħ} φ(x′, x″/√ħ) e^{-|x′−τ|²/ħ}.
pub fn decompose_model_state_with(
    state: &ModelIsotropicState,
    hbar: f64,
    opts: &DecomposeOptions,
) -> Result<CoherentFamily> {
    check_hbar(hbar)?;
    state.validate()?;
    if !(opts.spacing_factor > 0.0 && opts.spacing_factor.is_finite()) {
        return Err(Error::param("node spacing factor must be positive"));
    }
    let k = state.slow_dims;
    let shared = Arc::new(state.clone());
    let submanifold = IsotropicSubmanifoldModel::ModelSection {
        slow_dims: k,
        fast_dims: state.fast_dims,
        phase: state.phase.clone(),
    };
    let member_at = |tau: &[f64]| {
        let mut x0 = tau.to_vec();
        x0.extend(std::iter::repeat_n(0.0, state.fast_dims));
        let xi0 = state.phase.gradient(&x0);
        CoherentState::new(
            x0,
            xi0,
            state.phase.clone(),
            Envelope::Window {
                state: shared.clone(),
            },
            Complex64::new(1.0, 0.0),
        )
    };
    if k == 0 {
        let m = member_at(&[])?;
        return CoherentFamily::new(submanifold, vec![vec![]], vec![m], vec![1.0], vec![1.0], 0.0);
    }

    let sh = hbar.sqrt();
    let ranges: Vec<(f64, f64)> = match &opts.range {
        Some(r) if r.len() == k => r.clone(),
        Some(_) => return Err(Error::param(format!("decomposition range needs {k} intervals"))),
        None => state
            .slow_support()
            .into_iter()
            .enumerate()
            .map(|(d, s)| {
                s.ok_or_else(|| {
                    Error::param(format!(
                        "slow profile on axis {d} does not decay; give an explicit parameter range"
                    ))
                })
            })
            .collect::<Result<_>>()?,
    };
    // the window e^{-|x′−τ|²/ħ} reaches truncation level 6.07√ħ from τ
    let pad = 1.2 * WINDOW_CUTOFF * sh;
    let target = opts.spacing_factor * sh;
    let mut axes = Vec::with_capacity(k);
    let mut spacing: f64 = 0.0;
    let mut cell = 1.0;
    for &(lo, hi) in &ranges {
        let (a, b) = (lo - pad, hi + pad);
        let count = ((b - a) / target).ceil() as usize + 1;
        let h = (b - a) / (count - 1) as f64;
        spacing = spacing.max(h);
        cell *= h;
        axes.push((a, h, count));
    }
    let total: usize = axes.iter().map(|a| a.2).product();
    let mut nodes = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut tau = vec![0.0; k];
        for d in (0..k).rev() {
            let (a, h, m) = axes[d];
            tau[d] = a + (rem % m) as f64 * h;
            rem /= m;
        }
        nodes.push(tau);
    }
    let members = nodes.iter().map(|t| member_at(t)).collect::<Result<Vec<_>>>()?;
    let density = vec![(PI * hbar).powf(-(k as f64) / 2.0); total];
    CoherentFamily::new(submanifold, nodes, members, density, vec![cell; total], spacing)
}

/// Result of [`superpose`].
#[derive(Debug, Clone)]
pub struct Superposition {
    pub field: SampledField,
    /// Node spacing exceeded √ħ, so the τ-quadrature may not resolve the family.
    pub under_resolved: bool,
}

/// Σ_τ w(τ) dτ Υ_τ sampled on `grid`.
pub fn superpose(family: &CoherentFamily, grid: &GridSpec, hbar: f64) -> Result<Superposition> {
    check_hbar(hbar)?;
    grid.validate()?;
    if grid.dim() != family.dim() {
        return Err(Error::param("grid dimension differs from family dimension"));
    }
    // index window of every member on every axis
    let boxes: Vec<Vec<(usize, usize)>> = family
        .members
        .iter()
        .map(|m| member_index_box(m, grid, hbar))
        .collect();
    let strides = grid.strides();
    let first = &grid.axes[0];
    let slab = strides[0];
    // parallel over first-axis slabs; each point sums members in node order
    let slabs: Vec<Vec<Complex64>> = (0..first.points)
        .into_par_iter()
        .map(|i0| {
            let mut out = vec![Complex64::new(0.0, 0.0); slab];
            let mut x = vec![0.0; grid.dim()];
            for (m, member) in family.members.iter().enumerate() {
                let w = family.weight(m);
                let bx = &boxes[m];
                if w == 0.0 || i0 < bx[0].0 || i0 >= bx[0].1 {
                    continue;
                }
                let c = Complex64::new(w, 0.0);
                for_each_in_box(grid, &bx[1..], |local, idx_rest| {
                    x[0] = first.coordinate(i0);
                    for (d, &i) in idx_rest.iter().enumerate() {
                        x[d + 1] = grid.axes[d + 1].coordinate(i);
                    }
                    out[local] += c * member.eval(&x, hbar);
                });
            }
            out
        })
        .collect();
    let values: Vec<Complex64> = slabs.into_iter().flatten().collect();
    let field = SampledField::new(grid.clone(), values, hbar)?;
    Ok(Superposition {
        field,
        under_resolved: family.node_spacing > hbar.sqrt(),
    })
}

fn member_index_box(member: &CoherentState, grid: &GridSpec, hbar: f64) -> Vec<(usize, usize)> {
    member
        .support_box(hbar)
        .into_iter()
        .zip(&grid.axes)
        .map(|(b, axis)| match b {
            Some((lo, hi)) if !axis.periodic => {
                let h = axis.spacing();
                let i0 = ((lo - axis.lower) / h).floor().max(0.0) as usize;
                let i1 = (((hi - axis.lower) / h).ceil() as isize + 1).clamp(0, axis.points as isize) as usize;
                (i0.min(axis.points), i1)
            }
            _ => (0, axis.points),
        })
        .collect()
}

/// Calls `f(offset within slab, multi-index of axes 1..)` over a box of the
/// trailing axes.
fn for_each_in_box<F: FnMut(usize, &[usize])>(grid: &GridSpec, bx: &[(usize, usize)], mut f: F) {
    let d = bx.len();
    if bx.iter().any(|(a, b)| a >= b) {
        return;
    }
    let strides = grid.strides();
    let mut idx: Vec<usize> = bx.iter().map(|b| b.0).collect();
    loop {
        let local: usize = idx.iter().enumerate().map(|(a, i)| i * strides[a + 1]).sum();
        f(local, &idx);
        let mut a = d;
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < bx[a].1 {
                break;
            }
            idx[a] = bx[a].0;
        }
        if d == 0 {
            return;
        }
    }
}
