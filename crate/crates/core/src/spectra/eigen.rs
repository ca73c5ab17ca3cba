use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::potential::Potential;
use super::problem::SchrodingerProblem;
use crate::error::{Error, Result};

/// Largest matrix order handed to the dense symmetric eigensolver.
pub const DENSE_LIMIT: usize = 2048;

/// Eigenvalues of a discretized operator inside a window where the list is
/// known to be complete.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub dim: usize,
    pub hbar: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Every eigenvalue of the discretization in [lo, hi] is listed.
    pub complete: (f64, f64),
    pub method: String,
    /// Orthonormal eigenvectors on the grid, one per eigenvalue, when retained.
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

impl SpectrumResult {
    pub fn count(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Whether the list is complete on [lo, hi].
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.complete.0 <= lo && hi <= self.complete.1
    }
}

/// Exact spectrum ħ(j + ½) − 1 of ½(x² + ξ²) − 1, restricted to [−window, window].
pub fn harmonic_surrogate(hbar: f64, window: f64) -> Result<SpectrumResult> {
    crate::numerics::field::check_hbar(hbar)?;
    if !(window >= 0.0 && window.is_finite()) {
        return Err(Error::param("window must be a nonnegative half-width"));
    }
    let first = (((1.0 - window) / hbar - 0.5).ceil()).max(0.0) as u64;
    let mut eigenvalues = Vec::new();
    let mut j = first;
    loop {
        let e = hbar * (j as f64 + 0.5) - 1.0;
        if e > window {
            break;
        }
        if e >= -window {
            eigenvalues.push(e);
        }
        j += 1;
    }
    Ok(SpectrumResult {
        dim: 1,
        hbar,
        eigenvalues,
        complete: (-window, window),
        method: "harmonic-exact".into(),
        eigenvectors: None,
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DiagonalizeOptions {
    /// Keep eigenvectors (dense path only).
    pub retain_vectors: bool,
}

pub fn diagonalize(p: &SchrodingerProblem) -> Result<SpectrumResult> {
    diagonalize_with(p, DiagonalizeOptions::default())
}

/// Diagonalizes each problem; independent problems run in parallel.
pub fn diagonalize_all(problems: &[SchrodingerProblem]) -> Vec<Result<SpectrumResult>> {
    problems.par_iter().map(diagonalize).collect()
}

pub fn diagonalize_with(p: &SchrodingerProblem, opts: DiagonalizeOptions) -> Result<SpectrumResult> {
    p.validate()?;
    let w = p.window;
    let (eigenvalues, vectors, method) = match p.dim {
        1 => {
            if p.points <= DENSE_LIMIT {
                let (e, v) = dense_1d(p, -w, w, opts.retain_vectors);
                (e, v, "dense-pseudospectral")
            } else if p.potential.is_periodic() && !opts.retain_vectors {
                (galerkin_1d(&p.potential, p.hbar, p.points, -w, w), None, "banded-sturm")
            } else {
                return Err(matrix_size(p.points));
            }
        }
        _ => {
            if let Some(parts) = p.potential.separate(2) {
                (separable_2d(p, &parts, -w, w), None, "separable-sum")
            } else if p.points * p.points <= DENSE_LIMIT {
                let (e, v) = dense_2d(p, -w, w, opts.retain_vectors);
                (e, v, "dense-pseudospectral")
            } else {
                return Err(matrix_size(p.points * p.points));
            }
        }
    };
    Ok(SpectrumResult {
        dim: p.dim,
        hbar: p.hbar,
        eigenvalues,
        complete: (-w, w),
        method: method.into(),
        eigenvectors: vectors,
    })
}

fn matrix_size(order: usize) -> Error {
    Error::resolution(
        "matrix-size",
        format!("matrix order {order} exceeds the dense limit {DENSE_LIMIT} and no banded or separable form applies"),
    )
}

/// Position-space kinetic matrix ½ħ²κ² of the Fourier pseudospectral
/// discretization, as a circulant kernel c(j − l).
fn kinetic_kernel(p: &SchrodingerProblem) -> Vec<f64> {
    let m = p.points;
    let kappa = p.wavenumbers();
    (0..m)
        .map(|d| {
            let s: f64 = (0..m)
                .map(|k| {
                    let kk = k as i64 - (m / 2) as i64;
                    0.5 * p.hbar * p.hbar * kappa[k] * kappa[k] * (2.0 * PI * (kk * d as i64) as f64 / m as f64).cos()
                })
                .sum();
            s / m as f64
        })
        .collect()
}

fn eigen_in(
    h: DMatrix<f64>,
    lo: f64,
    hi: f64,
    retain: bool,
) -> (Vec<f64>, Option<Vec<Vec<f64>>>) {
    let eig = h.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] >= lo && eig.eigenvalues[i] <= hi)
        .collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = retain.then(|| idx.iter().map(|&i| eig.eigenvectors.column(i).iter().cloned().collect()).collect());
    (values, vectors)
}

fn dense_1d(p: &SchrodingerProblem, lo: f64, hi: f64, retain: bool) -> (Vec<f64>, Option<Vec<Vec<f64>>>) {
    let m = p.points;
    let c = kinetic_kernel(p);
    let xs = p.coordinates();
    let h = DMatrix::from_fn(m, m, |j, l| {
        let t = c[(j + m - l) % m];
        if j == l {
            t + p.potential.eval(&[xs[j]])
        } else {
            t
        }
    });
    eigen_in(h, lo, hi, retain)
}

fn dense_2d(p: &SchrodingerProblem, lo: f64, hi: f64, retain: bool) -> (Vec<f64>, Option<Vec<Vec<f64>>>) {
    let m = p.points;
    let c = kinetic_kernel(p);
    let xs = p.coordinates();
    let n = m * m;
    let h = DMatrix::from_fn(n, n, |a, b| {
        let (a0, a1) = (a / m, a % m);
        let (b0, b1) = (b / m, b % m);
        let mut v = 0.0;
        if a1 == b1 {
            v += c[(a0 + m - b0) % m];
        }
        if a0 == b0 {
            v += c[(a1 + m - b1) % m];
        }
        if a == b {
            v += p.potential.eval(&[xs[a0], xs[a1]]);
        }
        v
    });
    eigen_in(h, lo, hi, retain)
}

/// Eigenvalues in [lo, hi] of a one-dimensional periodic potential on a grid
/// of `points`, by whichever of the dense or banded paths fits.
fn spectrum_1d(potential: &Potential, p: &SchrodingerProblem, lo: f64, hi: f64) -> Vec<f64> {
    if p.points <= DENSE_LIMIT || !potential.is_periodic() {
        let sub = SchrodingerProblem {
            dim: 1,
            potential: potential.clone(),
            ..p.clone()
        };
        dense_1d(&sub, lo, hi, false).0
    } else {
        galerkin_1d(potential, p.hbar, p.points, lo, hi)
    }
}

/// V = V₀(x) + V₁(y): eigenvalues are sums e + e′ of the one-dimensional
/// spectra.
fn separable_2d(p: &SchrodingerProblem, parts: &[Potential], lo: f64, hi: f64) -> Vec<f64> {
    let box_lo = [p.domain.lower()];
    let box_hi = [p.domain.lower() + p.domain.length()];
    let floors: Vec<f64> = parts.iter().map(|v| v.range_on(&box_lo, &box_hi).0).collect();
    let a = spectrum_1d(&parts[0], p, floors[0], hi - floors[1]);
    let b = spectrum_1d(&parts[1], p, floors[1], hi - floors[0]);
    let mut out: Vec<f64> = a
        .iter()
        .flat_map(|x| b.iter().map(move |y| x + y))
        .filter(|e| *e >= lo && *e <= hi)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Fourier–Galerkin matrix on modes −M/2 .. M/2−1: diagonal ½ħ²m² + V̂₀ and
/// bands V̂_k. Eigenvalues in [lo, hi] by Sturm-count multisection.
fn galerkin_1d(potential: &Potential, hbar: f64, points: usize, lo: f64, hi: f64) -> Vec<f64> {
    let m = points as i64;
    let band = potential.bandwidth(1)[0];
    let v0 = potential.fourier_coefficient_1d(0).re;
    let diag: Vec<f64> = (-m / 2..m / 2)
        .map(|k| 0.5 * hbar * hbar * (k * k) as f64 + v0)
        .collect();
    let scale = 1.0 + lo.abs().max(hi.abs());
    let tol = 1e-13 * scale;
    if band <= 1 {
        // a Hermitian tridiagonal matrix is unitarily similar to the real one
        // with off-diagonal moduli
        let e = potential.fourier_coefficient_1d(1).norm();
        let off = vec![e; diag.len().saturating_sub(1)];
        let sturm = TridiagonalSturm::new(diag, off);
        multisection(&|shifts: &[f64; LANES]| sturm.counts(shifts), lo, hi, tol)
    } else {
        let bands: Vec<Complex64> = (1..=band as i64).map(|k| potential.fourier_coefficient_1d(k)).collect();
        let sturm = BandedSturm { diag, bands };
        multisection(
            &|shifts: &[f64; LANES]| {
                let mut out = [0usize; LANES];
                for (o, s) in out.iter_mut().zip(shifts) {
                    *o = sturm.count(*s);
                }
                out
            },
            lo,
            hi,
            tol,
        )
    }
}

const LANES: usize = 8;

struct TridiagonalSturm {
    diag: Vec<f64>,
    off_sq: Vec<f64>,
    pivmin: f64,
}

impl TridiagonalSturm {
    fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        let norm = diag.iter().map(|d| d.abs()).fold(0.0, f64::max) + 2.0 * off.iter().map(|e| e.abs()).fold(0.0, f64::max);
        TridiagonalSturm {
            off_sq: off.iter().map(|e| e * e).collect(),
            diag,
            pivmin: f64::MIN_POSITIVE.max(norm * f64::EPSILON * 1e-3),
        }
    }

    /// Number of eigenvalues below each shift; lanes run interleaved.
    fn counts(&self, shifts: &[f64; LANES]) -> [usize; LANES] {
        let mut d = [0.0f64; LANES];
        let mut c = [0usize; LANES];
        for l in 0..LANES {
            d[l] = self.diag[0] - shifts[l];
            if d[l].abs() < self.pivmin {
                d[l] = -self.pivmin;
            }
            c[l] += (d[l] < 0.0) as usize;
        }
        for i in 1..self.diag.len() {
            let a = self.diag[i];
            let e2 = self.off_sq[i - 1];
            for l in 0..LANES {
                let mut v = (a - shifts[l]) - e2 / d[l];
                if v.abs() < self.pivmin {
                    v = -self.pivmin;
                }
                d[l] = v;
                c[l] += (v < 0.0) as usize;
            }
        }
        c
    }
}

/// Hermitian Toeplitz-banded plus diagonal matrix; inertia from LDLᴴ.
struct BandedSturm {
    diag: Vec<f64>,
    /// bands[k−1] = entry (i+k, i)
    bands: Vec<Complex64>,
}

impl BandedSturm {
    fn count(&self, shift: f64) -> usize {
        let n = self.diag.len();
        let b = self.bands.len();
        let norm = self.diag.iter().map(|d| d.abs()).fold(0.0, f64::max);
        let pivmin = f64::MIN_POSITIVE.max(norm * f64::EPSILON * 1e-3);
        // l[i][k] = L(i, i−1−k) for the b previous columns
        let mut l: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); b]; n];
        let mut d = vec![0.0f64; n];
        let mut negatives = 0;
        for i in 0..n {
            // L(i, j) for j in i−b .. i−1
            for jj in (0..b.min(i)).rev() {
                let j = i - 1 - jj;
                let mut v = self.bands[i - j - 1];
                // Σ_{q<j, i−q ≤ b} L(i,q) d_q conj(L(j,q))
                for q in i.saturating_sub(b)..j {
                    if j - q > b {
                        continue;
                    }
                    v -= l[i][i - 1 - q] * d[q] * l[j][j - 1 - q].conj();
                }
                l[i][jj] = v / d[j];
            }
            let mut dv = self.diag[i] - shift;
            for jj in 0..b.min(i) {
                let j = i - 1 - jj;
                dv -= l[i][jj].norm_sqr() * d[j];
            }
            if dv.abs() < pivmin {
                dv = -pivmin;
            }
            d[i] = dv;
            if dv < 0.0 {
                negatives += 1;
            }
        }
        negatives
    }
}

/// All eigenvalues in [lo, hi] given a batched count function N(σ) =
/// #{E < σ}, by repeated (LANES+1)-section down to width `tol`.
fn multisection<F>(counts: &F, lo: f64, hi: f64, tol: f64) -> Vec<f64>
where
    F: Fn(&[f64; LANES]) -> [usize; LANES],
{
    let hi_open = hi + tol;
    let mut ends = [lo; LANES];
    ends[1] = hi_open;
    let c = counts(&ends);
    let mut out = Vec::new();
    let mut stack = vec![(lo, hi_open, c[0], c[1])];
    while let Some((a, b, na, nb)) = stack.pop() {
        if nb <= na {
            continue;
        }
        if b - a <= tol {
            let mid = 0.5 * (a + b);
            out.extend(std::iter::repeat_n(mid, nb - na));
            continue;
        }
        let mut shifts = [0.0; LANES];
        for (k, s) in shifts.iter_mut().enumerate() {
            *s = a + (b - a) * (k + 1) as f64 / (LANES + 1) as f64;
        }
        let cs = counts(&shifts);
        let mut pa = a;
        let mut pn = na;
        for k in 0..=LANES {
            let (qb, qn) = if k < LANES { (shifts[k], cs[k]) } else { (b, nb) };
            if qn > pn {
                stack.push((pa, qb, pn, qn));
            }
            pa = qb;
            pn = qn;
        }
    }
    out.retain(|e| *e >= lo && *e <= hi);
    out.sort_by(f64::total_cmp);
    out
}
