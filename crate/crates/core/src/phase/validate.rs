use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::function::PhaseFunction;
use crate::error::{Error, Result};
use crate::linalg::{min_norm_solve, null_space, rank};

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-12;
const STEP_TOL: f64 = 1e-6;

/// Outcome of the three non-degeneracy checks at one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleCheck {
    pub seed: Vec<f64>,
    /// Point on the critical set reached from the seed.
    pub critical_point: Vec<f64>,
    pub newton_iterations: usize,
    /// d_{(x,s)}(d_s f) has rank N.
    pub full_rank: bool,
    /// The critical set meets {u = 0} transversally.
    pub transverse: bool,
    /// (x, s) ↦ (x, d_x f) is an immersion on the critical set within {u = 0}.
    pub immersion: bool,
    pub singular_values: Vec<f64>,
}

impl SampleCheck {
    pub fn passes(&self) -> bool {
        self.full_rank && self.transverse && self.immersion
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub phase: String,
    pub base_dim: usize,
    pub t_dim: usize,
    pub u_dim: usize,
    pub samples: Vec<SampleCheck>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.samples.iter().all(SampleCheck::passes)
    }
}

/// Rows ∂_z(∂_{s_i} f), i over fiber variables: an N × (n+N) matrix.
fn fiber_jacobian(f: &PhaseFunction, z: &[f64]) -> DMatrix<f64> {
    let n = f.base_dim();
    let nf = f.fiber_dim();
    let h = f.hessian(z);
    h.rows(n, nf).into_owned()
}

fn fiber_gradient(f: &PhaseFunction, z: &[f64]) -> Vec<f64> {
    f.gradient(z)[f.base_dim()..].to_vec()
}

/// Minimum-norm Newton iteration on d_s f = 0, optionally also forcing u = 0.
fn refine(f: &PhaseFunction, seed: &[f64], fix_u: bool) -> Option<(Vec<f64>, usize)> {
    let n = f.base_dim();
    let k = f.t_dim();
    let l = f.u_dim();
    let mut z = seed.to_vec();
    for it in 0..=NEWTON_MAX_ITER {
        let mut res = fiber_gradient(f, &z);
        let mut jac = fiber_jacobian(f, &z);
        if fix_u {
            let rows = jac.nrows();
            jac = jac.insert_rows(rows, l, 0.0);
            for i in 0..l {
                jac[(rows + i, n + k + i)] = 1.0;
                res.push(z[n + k + i]);
            }
        }
        let scale = 1.0 + z.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let norm = res.iter().map(|r| r * r).sum::<f64>().sqrt();
        let step = min_norm_solve(&jac, &res);
        let step_norm = step.iter().map(|s| s * s).sum::<f64>().sqrt();
        // a small residual with a large Newton step means the iterate is
        // sliding along an asymptote, not sitting on a root
        if norm <= NEWTON_TOL * scale && step_norm <= STEP_TOL * scale {
            return Some((z, it));
        }
        if it == NEWTON_MAX_ITER {
            break;
        }
        for (zi, s) in z.iter_mut().zip(&step) {
            *zi -= s;
        }
        if !z.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    None
}

/// Checks the non-degeneracy conditions at critical points reached from the
/// seeds (full points z = (x, t, u)). `tol` is an absolute floor on singular
/// values, on top of the relative rank rule.
pub fn validate_phase(f: &PhaseFunction, seeds: &[Vec<f64>], tol: f64) -> Result<ValidationReport> {
    if seeds.is_empty() {
        return Err(Error::param("validation needs at least one seed"));
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::param("tolerance must be nonnegative"));
    }
    let n = f.base_dim();
    let nf = f.fiber_dim();
    let l = f.u_dim();
    let k = f.t_dim();
    let mut samples = Vec::with_capacity(seeds.len());
    for (i, seed) in seeds.iter().enumerate() {
        if seed.len() != f.total_dim() || !seed.iter().all(|v| v.is_finite()) {
            return Err(Error::param(format!(
                "seed {i} must have {} finite coordinates",
                f.total_dim()
            )));
        }
        let (z, iters) = refine(f, seed, false)
            .ok_or_else(|| Error::NoCriticalPoint(format!("Newton did not reach the critical set from seed {i}")))?;
        // a root found to residual τ may sit √τ away from a degenerate point
        let tol = tol.max(10.0 * NEWTON_TOL.sqrt());
        let ja = fiber_jacobian(f, &z);
        let full_rank = rank(&ja, tol) == nf;
        let singular_values = crate::linalg::singular_values(&ja);

        let (zu, _) = refine(f, &z, true).ok_or_else(|| {
            Error::NoCriticalPoint(format!("critical set does not meet u = 0 near seed {i}"))
        })?;
        let jb = fiber_jacobian(f, &zu);
        let mut stacked = jb.clone().insert_rows(nf, l, 0.0);
        for j in 0..l {
            stacked[(nf + j, n + k + j)] = 1.0;
        }
        let transverse = rank(&stacked, tol) == nf + l;

        // tangent space of C_f ∩ {u = 0}, pushed forward by (x, s) ↦ (x, d_x f)
        let tangent = null_space(&stacked, tol);
        let h = f.hessian(&zu);
        let mut dphi = DMatrix::zeros(2 * n, n + nf);
        for a in 0..n {
            dphi[(a, a)] = 1.0;
            for b in 0..n + nf {
                dphi[(n + a, b)] = h[(a, b)];
            }
        }
        let image = &dphi * &tangent;
        let immersion = tangent.ncols() == 0 || rank(&image, tol) == tangent.ncols();

        samples.push(SampleCheck {
            seed: seed.clone(),
            critical_point: z,
            newton_iterations: iters,
            full_rank,
            transverse,
            immersion,
            singular_values,
        });
    }
    Ok(ValidationReport {
        phase: f.name().to_string(),
        base_dim: n,
        t_dim: k,
        u_dim: l,
        samples,
    })
}
