use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::phase::StatePhase;
use crate::error::{Error, Result};

/// Largest endpoint gap for a parametrization to count as a closed loop.
pub const CLOSURE_TOLERANCE: f64 = 1e-10;

/// Nodes of the periodic trapezoid rule used for loop actions.
const LOOP_NODES: usize = 4096;

/// Parametrized isotropic submanifold τ ↦ (x(τ), ξ(τ)) of phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum IsotropicSubmanifoldModel {
    /// A single phase-space point.
    Point { position: Vec<f64>, momentum: Vec<f64> },
    /// {(τ, 0, ∇f(τ, 0))}, τ ∈ ℝ^slow_dims: where a model state concentrates.
    ModelSection {
        slow_dims: usize,
        fast_dims: usize,
        #[serde(default)]
        phase: StatePhase,
    },
    /// x = R cos 2πs, ξ = R sin 2πs in T*ℝ.
    Circle {
        radius: f64,
        #[serde(default)]
        warp: f64,
    },
    /// x = a cos 2πs, ξ = b sin 2πs.
    Ellipse {
        semi_x: f64,
        semi_xi: f64,
        #[serde(default)]
        warp: f64,
    },
    /// x = R cos 2πs, ξ = 0.
    ZeroSection {
        radius: f64,
        #[serde(default)]
        warp: f64,
    },
    /// Circle of the given radius traced over a fraction of a turn.
    Arc { radius: f64, fraction: f64 },
    /// Image under the rotation (x, ξ) ↦ (ξ, −x).
    FourierImage { inner: Box<IsotropicSubmanifoldModel> },
}

/// s ↦ s + w sin(2πs)/2π and its derivative; a diffeomorphism of the circle for |w| < 1.
fn warp(s: f64, w: f64) -> (f64, f64) {
    (
        s + w * (2.0 * PI * s).sin() / (2.0 * PI),
        1.0 + w * (2.0 * PI * s).cos(),
    )
}

impl IsotropicSubmanifoldModel {
    pub fn validate(&self) -> Result<()> {
        let warp_ok = |w: f64| w.is_finite() && w.abs() < 1.0;
        let ok = match self {
            Self::Point { position, momentum } => {
                !position.is_empty() && position.len() == momentum.len()
            }
            Self::ModelSection {
                slow_dims,
                fast_dims,
                phase,
            } => {
                phase.validate(slow_dims + fast_dims)?;
                slow_dims + fast_dims > 0
            }
            Self::Circle { radius, warp } | Self::ZeroSection { radius, warp } => {
                radius.is_finite() && *radius > 0.0 && warp_ok(*warp)
            }
            Self::Ellipse {
                semi_x,
                semi_xi,
                warp,
            } => *semi_x > 0.0 && *semi_xi > 0.0 && warp_ok(*warp),
            Self::Arc { radius, fraction } => *radius > 0.0 && *fraction > 0.0 && fraction.is_finite(),
            Self::FourierImage { inner } => return inner.validate(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid submanifold parameters: {self:?}")))
        }
    }

    /// Dimension n of the base (the submanifold lives in ℝ^{2n}).
    pub fn base_dim(&self) -> usize {
        match self {
            Self::Point { position, .. } => position.len(),
            Self::ModelSection {
                slow_dims,
                fast_dims,
                ..
            } => slow_dims + fast_dims,
            Self::FourierImage { inner } => inner.base_dim(),
            _ => 1,
        }
    }

    pub fn param_dim(&self) -> usize {
        match self {
            Self::Point { .. } => 0,
            Self::ModelSection { slow_dims, .. } => *slow_dims,
            Self::FourierImage { inner } => inner.param_dim(),
            _ => 1,
        }
    }

    pub fn is_loop(&self) -> bool {
        match self {
            Self::Circle { .. } | Self::Ellipse { .. } | Self::ZeroSection { .. } | Self::Arc { .. } => true,
            Self::FourierImage { inner } => inner.is_loop(),
            _ => false,
        }
    }

    pub fn eval(&self, tau: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (x, xi, _) = self.eval_with_velocity(tau);
        (x, xi)
    }

    /// (x, ξ, dx/dτ) for one-parameter families; for other families the
    /// velocity is empty.
    fn eval_with_velocity(&self, tau: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let loop_point = |a: f64, b: f64, w: f64, turns: f64| {
            let (s, ds) = warp(tau[0], w);
            let th = 2.0 * PI * turns * s;
            let dth = 2.0 * PI * turns * ds;
            (vec![a * th.cos()], vec![b * th.sin()], vec![-a * th.sin() * dth])
        };
        match self {
            Self::Point { position, momentum } => (position.clone(), momentum.clone(), vec![]),
            Self::ModelSection {
                slow_dims,
                fast_dims,
                phase,
            } => {
                let mut x = tau[..*slow_dims].to_vec();
                x.extend(std::iter::repeat_n(0.0, *fast_dims));
                let xi = phase.gradient(&x);
                (x, xi, vec![])
            }
            Self::Circle { radius, warp } => loop_point(*radius, *radius, *warp, 1.0),
            Self::Ellipse {
                semi_x,
                semi_xi,
                warp,
            } => loop_point(*semi_x, *semi_xi, *warp, 1.0),
            Self::ZeroSection { radius, warp } => loop_point(*radius, 0.0, *warp, 1.0),
            Self::Arc { radius, fraction } => loop_point(*radius, *radius, 0.0, *fraction),
            Self::FourierImage { inner } => {
                let (x, xi, _) = inner.eval_with_velocity(tau);
                let minus_x: Vec<f64> = x.iter().map(|v| -v).collect();
                // the velocity of the rotated x-component is that of the old ξ
                let vel = if inner.param_dim() == 1 {
                    let h = 1e-6;
                    let (_, xp) = inner.eval(&[tau[0] + h]);
                    let (_, xm) = inner.eval(&[tau[0] - h]);
                    xp.iter().zip(&xm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
                } else {
                    vec![]
                };
                (xi, minus_x, vel)
            }
        }
    }

    /// Largest |ω(∂_i, ∂_j)| of the pulled-back symplectic form at the given
    /// parameter values, by central differences.
    pub fn isotropy_residual(&self, samples: &[Vec<f64>]) -> f64 {
        let d = self.param_dim();
        if d < 2 {
            return 0.0;
        }
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for tau in samples {
            let partial = |i: usize| {
                let mut p = tau.clone();
                let mut m = tau.clone();
                p[i] += h;
                m[i] -= h;
                let (xp, kp) = self.eval(&p);
                let (xm, km) = self.eval(&m);
                let dx: Vec<f64> = xp.iter().zip(&xm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
                let dk: Vec<f64> = kp.iter().zip(&km).map(|(a, b)| (a - b) / (2.0 * h)).collect();
                (dx, dk)
            };
            let parts: Vec<_> = (0..d).map(partial).collect();
            for i in 0..d {
                for j in i + 1..d {
                    let (dxi, dki) = &parts[i];
                    let (dxj, dkj) = &parts[j];
                    let w: f64 = (0..dxi.len()).map(|a| dxi[a] * dkj[a] - dki[a] * dxj[a]).sum();
                    worst = worst.max(w.abs());
                }
            }
        }
        worst
    }

    /// Points on the submanifold: `per_dim` parameter values per parameter
    /// dimension over `ranges` (loops use one period and ignore `ranges`).
    pub fn sample(&self, per_dim: usize, ranges: &[(f64, f64)]) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        let d = self.param_dim();
        if d == 0 {
            return Ok(vec![self.eval(&[])]);
        }
        if self.is_loop() {
            return Ok((0..per_dim)
                .map(|i| self.eval(&[i as f64 / per_dim as f64]))
                .collect());
        }
        if ranges.len() != d || per_dim < 2 {
            return Err(Error::param(format!("need {d} parameter ranges and at least 2 points")));
        }
        let total = per_dim.pow(d as u32);
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut tau = vec![0.0; d];
            for a in (0..d).rev() {
                let i = rem % per_dim;
                rem /= per_dim;
                let (lo, hi) = ranges[a];
                tau[a] = lo + (hi - lo) * i as f64 / (per_dim - 1) as f64;
            }
            out.push(self.eval(&tau));
        }
        Ok(out)
    }
}

/// Reduces an angle to the representative in (−π, π].
pub fn reduce_mod_two_pi(a: f64) -> f64 {
    let r = a - 2.0 * PI * ((a - PI) / (2.0 * PI)).ceil();
    // the two ends of the interval are the same class; pick +π
    if (r + PI).abs() < 1e-12 {
        PI
    } else {
        r
    }
}

/// ∮ ξ·dx over a closed loop, divided by ħ when given, reduced modulo 2π to
/// (−π, π]. Zero means the Bohr–Sommerfeld condition holds.
pub fn bohr_sommerfeld_residue(curve: &IsotropicSubmanifoldModel, hbar: Option<f64>) -> Result<f64> {
    curve.validate()?;
    if !curve.is_loop() || curve.param_dim() != 1 {
        return Err(Error::Geometry("submanifold is not a one-parameter loop".into()));
    }
    let (x0, k0) = curve.eval(&[0.0]);
    let (x1, k1) = curve.eval(&[1.0]);
    let gap = x0
        .iter()
        .chain(&k0)
        .zip(x1.iter().chain(&k1))
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    if gap > CLOSURE_TOLERANCE {
        return Err(Error::Geometry(format!("loop endpoints differ by {gap:.3e}")));
    }
    if let Some(h) = hbar {
        crate::numerics::field::check_hbar(h)?;
    }
    let terms: Vec<f64> = (0..LOOP_NODES)
        .map(|i| {
            let s = i as f64 / LOOP_NODES as f64;
            let (_, xi, vel) = curve.eval_with_velocity(&[s]);
            xi.iter().zip(&vel).map(|(p, v)| p * v).sum::<f64>()
        })
        .collect();
    let action = crate::numerics::quadrature::pairwise_sum(&terms) / LOOP_NODES as f64;
    Ok(reduce_mod_two_pi(action / hbar.unwrap_or(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_residues() {
        let c = |r: f64| IsotropicSubmanifoldModel::Circle { radius: r, warp: 0.0 };
        assert!(bohr_sommerfeld_residue(&c(2f64.sqrt()), None).unwrap().abs() < 1e-12);
        let r1 = bohr_sommerfeld_residue(&c(1.0), None).unwrap();
        assert!((r1.abs() - PI).abs() < 1e-12);
        let r = 1.3;
        let expect = reduce_mod_two_pi(-PI * r * r);
        assert!((bohr_sommerfeld_residue(&c(r), None).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn reparametrization_invariance() {
        let plain = IsotropicSubmanifoldModel::Ellipse {
            semi_x: 1.1,
            semi_xi: 0.7,
            warp: 0.0,
        };
        let warped = IsotropicSubmanifoldModel::Ellipse {
            semi_x: 1.1,
            semi_xi: 0.7,
            warp: 0.6,
        };
        let a = bohr_sommerfeld_residue(&plain, None).unwrap();
        let b = bohr_sommerfeld_residue(&warped, None).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn zero_section_and_open_arc() {
        let z = IsotropicSubmanifoldModel::ZeroSection { radius: 3.0, warp: 0.2 };
        assert_eq!(bohr_sommerfeld_residue(&z, None).unwrap(), 0.0);
        let arc = IsotropicSubmanifoldModel::Arc {
            radius: 1.0,
            fraction: 0.75,
        };
        assert!(matches!(bohr_sommerfeld_residue(&arc, None), Err(Error::Geometry(_))));
    }

    #[test]
    fn hbar_scales_the_action() {
        let c = IsotropicSubmanifoldModel::Circle { radius: 1.0, warp: 0.0 };
        // −π/ħ with ħ = 1/4 is −4π ≡ 0
        assert!(bohr_sommerfeld_residue(&c, Some(0.25)).unwrap().abs() < 1e-10);
    }

    #[test]
    fn reduction_interval() {
        assert_eq!(reduce_mod_two_pi(-PI), PI);
        assert!((reduce_mod_two_pi(3.0 * PI + 0.5) - (-PI + 0.5)).abs() < 1e-12);
        assert!(reduce_mod_two_pi(4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn model_section_is_isotropic() {
        let s = IsotropicSubmanifoldModel::ModelSection {
            slow_dims: 2,
            fast_dims: 1,
            phase: StatePhase::Quadratic {
                matrix: vec![vec![1.0, 0.3, 0.0], vec![0.3, -2.0, 0.1], vec![0.0, 0.1, 0.5]],
                linear: vec![],
                constant: 0.0,
            },
        };
        let samples = vec![vec![0.1, 0.2], vec![-1.0, 0.5]];
        assert!(s.isotropy_residual(&samples) < 1e-8);
        let rotated = IsotropicSubmanifoldModel::FourierImage { inner: Box::new(s) };
        assert!(rotated.isotropy_residual(&samples) < 1e-8);
    }
}
