use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::potential::Potential;
use super::problem::Domain;
use crate::error::{Error, Result};
use crate::numerics::quadrature::{composite_gauss_legendre, gauss_legendre, pairwise_sum};

/// Smallest |∇H| accepted on the sampled level set.
pub const REGULAR_VALUE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LiouvilleMethod {
    /// Central difference of phase-space volumes, Richardson-extrapolated.
    VolumeDerivative,
    MonteCarlo {
        #[serde(default)]
        samples: Option<u64>,
        #[serde(default)]
        seed: u64,
    },
}

/// |Θ| for Θ = {½|ξ|² + V = E} with an error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetMeasure {
    pub value: f64,
    pub energy: f64,
    pub method: String,
    pub error: f64,
}

impl LevelSetMeasure {
    /// Whether two estimates agree within `k` combined standard errors.
    pub fn agrees_with(&self, other: &LevelSetMeasure, k: f64) -> bool {
        let s = (self.error * self.error + other.error * other.error).sqrt();
        (self.value - other.value).abs() <= k * s
    }

    /// Known value with no estimation error.
    pub fn exact(value: f64, energy: f64) -> Self {
        LevelSetMeasure {
            value,
            energy,
            method: "exact".into(),
            error: 0.0,
        }
    }
}

struct Setup<'a> {
    potential: &'a Potential,
    dim: usize,
    lower: f64,
    length: f64,
    periodic: bool,
}

impl Setup<'_> {
    fn eval1(&self, fixed: Option<f64>, y: f64) -> f64 {
        match fixed {
            None => self.potential.eval(&[y]),
            Some(x) => self.potential.eval(&[x, y]),
        }
    }

    /// ∫ (E − V(y))₊^p dy along the last axis (optionally at fixed first
    /// coordinate), splitting at turning points and removing the endpoint
    /// singularity with y = a + (b − a)(1 − cos θ)/2.
    fn power_integral(&self, fixed: Option<f64>, e: f64, p: f64) -> f64 {
        const SCAN: usize = 2048;
        let h = self.length / SCAN as f64;
        let samples: Vec<f64> = (0..=SCAN).map(|i| self.eval1(fixed, self.lower + i as f64 * h)).collect();
        if samples.iter().all(|v| *v >= e) {
            return 0.0;
        }
        // on a torus start the scan at the maximum so no interval wraps
        let (start, count) = if self.periodic {
            let imax = (0..SCAN).max_by(|&a, &b| samples[a].total_cmp(&samples[b])).unwrap_or(0);
            (self.lower + imax as f64 * h, SCAN)
        } else {
            (self.lower, SCAN)
        };
        let f = |y: f64| self.eval1(fixed, y) - e;
        if self.periodic && f(start) < 0.0 {
            // allowed everywhere: periodic trapezoid is spectrally accurate
            let vals: Vec<f64> = (0..4 * SCAN)
                .map(|i| (-f(self.lower + i as f64 * self.length / (4 * SCAN) as f64)).powf(p))
                .collect();
            return pairwise_sum(&vals) * self.length / (4 * SCAN) as f64;
        }
        let mut edges = Vec::new();
        let mut inside = f(start) < 0.0;
        let mut a = if inside { Some(start) } else { None };
        for i in 1..=count {
            let y0 = start + (i - 1) as f64 * h;
            let y1 = start + i as f64 * h;
            let now = f(y1) < 0.0;
            if now != inside {
                let r = bisect_root(&f, y0, y1);
                if now {
                    a = Some(r);
                } else if let Some(a0) = a.take() {
                    edges.push((a0, r, true, true));
                }
                inside = now;
            }
        }
        if let Some(a0) = a {
            edges.push((a0, start + count as f64 * h, true, false));
        }
        let (gx, gw) = gauss_legendre(64);
        let mut total = 0.0;
        for (a, b, _, closes) in edges {
            let panels = ((b - a) / (0.25 * self.length) * 4.0).ceil().max(1.0) as usize;
            if !closes {
                // open at a box edge: plain composite rule
                let (nodes, w) = composite_gauss_legendre(a, b, panels, 32);
                total += nodes.iter().zip(&w).map(|(y, w)| (-f(*y)).max(0.0).powf(p) * w).sum::<f64>();
                continue;
            }
            let mut sum = 0.0;
            for q in 0..panels {
                let t0 = PI * q as f64 / panels as f64;
                let t1 = PI * (q + 1) as f64 / panels as f64;
                for (x, w) in gx.iter().zip(&gw) {
                    let th = t0 + 0.5 * (t1 - t0) * (x + 1.0);
                    let y = a + 0.5 * (b - a) * (1.0 - th.cos());
                    let jac = 0.5 * (b - a) * th.sin();
                    sum += (-f(y)).max(0.0).powf(p) * jac * 0.5 * (t1 - t0) * w;
                }
            }
            total += sum;
        }
        total
    }

    /// Vol{½|ξ|² + V ≤ E} = ω_n ∫ (2(E − V))₊^{n/2} dx.
    fn volume(&self, e: f64) -> f64 {
        match self.dim {
            1 => 2.0 * 2f64.sqrt() * self.power_integral(None, e, 0.5),
            _ => {
                let (nodes, w) = if self.periodic {
                    let m = 4096;
                    let h = self.length / m as f64;
                    ((0..m).map(|i| self.lower + i as f64 * h).collect(), vec![h; m])
                } else {
                    composite_gauss_legendre(self.lower, self.lower + self.length, 512, 8)
                };
                let vals: Vec<f64> = nodes
                    .par_iter()
                    .zip(&w)
                    .map(|(x, w)| 2.0 * PI * self.power_integral(Some(*x), e, 1.0) * w)
                    .collect();
                pairwise_sum(&vals)
            }
        }
    }
}

fn bisect_root<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) < 0.0) == (fa < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Samples the level set and checks |∇H|² = |∇V|² + 2(E − V) stays above
/// the floor squared. Returns false when the level set is empty.
fn check_regular_value(s: &Setup, e: f64) -> Result<bool> {
    let per: usize = if s.dim == 1 { 1 << 14 } else { 512 };
    let total = per.pow(s.dim as u32);
    let mut nonempty = false;
    let mut worst = f64::INFINITY;
    let mut at = vec![];
    let mut x = vec![0.0; s.dim];
    for flat in 0..total {
        let mut rem = flat;
        for d in (0..s.dim).rev() {
            let i = rem % per;
            rem /= per;
            let denom = if s.periodic { per } else { per - 1 } as f64;
            x[d] = s.lower + s.length * i as f64 / denom;
        }
        let v = s.potential.eval(&x);
        if v > e {
            continue;
        }
        nonempty = true;
        let g2: f64 = s.potential.gradient(&x).iter().map(|g| g * g).sum::<f64>() + 2.0 * (e - v);
        if g2 < worst {
            worst = g2;
            at = x.clone();
        }
    }
    if nonempty && worst.sqrt() <= REGULAR_VALUE_FLOOR {
        return Err(Error::HypothesisViolation(format!(
            "energy {e} is not a regular value: |∇H| = {:.3e} on the level set near x = {at:?}",
            worst.sqrt()
        )));
    }
    Ok(nonempty)
}

/// Liouville measure |Θ| = d/dE Vol{½|ξ|² + V ≤ E}.
pub fn liouville_measure(
    potential: &Potential,
    dim: usize,
    domain: Domain,
    energy: f64,
    method: &LiouvilleMethod,
) -> Result<LevelSetMeasure> {
    if !(1..=2).contains(&dim) {
        return Err(Error::param("dimension must be 1 or 2"));
    }
    potential.validate(dim)?;
    if !energy.is_finite() {
        return Err(Error::NumericInput("energy".into()));
    }
    if !potential.is_periodic() && matches!(domain, Domain::Torus) {
        return Err(Error::param("a confining potential needs a box domain"));
    }
    let s = Setup {
        potential,
        dim,
        lower: domain.lower(),
        length: domain.length(),
        periodic: matches!(domain, Domain::Torus),
    };
    let name = match method {
        LiouvilleMethod::VolumeDerivative => "volume-derivative",
        LiouvilleMethod::MonteCarlo { .. } => "monte-carlo",
    };
    if !check_regular_value(&s, energy)? {
        return Ok(LevelSetMeasure {
            value: 0.0,
            energy,
            method: name.into(),
            error: 0.0,
        });
    }
    let lo = vec![s.lower; dim];
    let hi = vec![s.lower + s.length; dim];
    let (vmin, _) = potential.range_on(&lo, &hi);
    let depth = energy - vmin;
    let scale = if depth > 0.0 { depth } else { 1.0 };
    match method {
        LiouvilleMethod::VolumeDerivative => {
            let delta = 1e-3 * scale;
            let d = |h: f64| (s.volume(energy + h) - s.volume(energy - h)) / (2.0 * h);
            let coarse = d(delta);
            let fine = d(0.5 * delta);
            let value = (4.0 * fine - coarse) / 3.0;
            Ok(LevelSetMeasure {
                value,
                energy,
                method: name.into(),
                error: (value - fine).abs().max(1e-12 * value.abs()),
            })
        }
        LiouvilleMethod::MonteCarlo { samples, seed } => {
            let n = samples.unwrap_or(if dim == 1 { 10_000_000 } else { 100_000_000 });
            if n == 0 {
                return Err(Error::param("Monte Carlo needs at least one sample"));
            }
            let delta = 1e-2 * scale;
            let pmax = (2.0 * (depth + delta)).sqrt() * 1.01;
            let chunks: u64 = 64;
            let hits: u64 = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    rng.set_stream(c);
                    let count = n / chunks + u64::from(c < n % chunks);
                    let mut x = vec![0.0; dim];
                    let mut hits = 0u64;
                    for _ in 0..count {
                        for xd in x.iter_mut() {
                            *xd = s.lower + s.length * rng.random::<f64>();
                        }
                        let mut k = 0.0;
                        for _ in 0..dim {
                            let xi = pmax * (2.0 * rng.random::<f64>() - 1.0);
                            k += 0.5 * xi * xi;
                        }
                        let h = k + potential.eval(&x) - energy;
                        if h.abs() <= delta {
                            hits += 1;
                        }
                    }
                    hits
                })
                .sum();
            let box_volume = s.length.powi(dim as i32) * (2.0 * pmax).powi(dim as i32);
            let p = hits as f64 / n as f64;
            let value = box_volume * p / (2.0 * delta);
            let error = box_volume * (p * (1.0 - p) / n as f64).sqrt() / (2.0 * delta);
            Ok(LevelSetMeasure {
                value,
                energy,
                method: name.into(),
                error,
            })
        }
    }
}
