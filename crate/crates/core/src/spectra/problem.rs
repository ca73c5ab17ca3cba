use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::potential::Potential;
use crate::error::{Error, Result};
use crate::numerics::field::check_hbar;

/// Configuration space: the flat torus (ℝ/2πℤ)ⁿ or a large periodic box
/// [−L, L)ⁿ for confining potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Domain {
    Torus,
    Box { half_width: f64 },
}

impl Domain {
    pub fn length(&self) -> f64 {
        match self {
            Domain::Torus => 2.0 * PI,
            Domain::Box { half_width } => 2.0 * half_width,
        }
    }

    pub fn lower(&self) -> f64 {
        match self {
            Domain::Torus => 0.0,
            Domain::Box { half_width } => -half_width,
        }
    }
}

/// P = −½ħ²Δ + V on a grid of `points` per axis; eigenvalues are wanted in
/// [−window, window].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchrodingerProblem {
    pub dim: usize,
    pub potential: Potential,
    pub hbar: f64,
    pub points: usize,
    #[serde(default = "torus")]
    pub domain: Domain,
    pub window: f64,
}

fn torus() -> Domain {
    Domain::Torus
}

/// Momentum cutoff ħ(M/2)(2π/L) must exceed the classical momentum range by
/// this factor.
pub const MOMENTUM_MARGIN: f64 = 2.0;

/// Tunnelling action, in units of ħ, required between the classically
/// allowed region and the edge of a box.
const EDGE_ACTION: f64 = 40.0;

impl SchrodingerProblem {
    pub fn new(dim: usize, potential: Potential, hbar: f64, points: usize, domain: Domain, window: f64) -> Result<Self> {
        let p = SchrodingerProblem {
            dim,
            potential,
            hbar,
            points,
            domain,
            window,
        };
        p.validate()?;
        Ok(p)
    }

    /// Smallest power of two meeting the momentum guard for this ħ and window.
    pub fn minimal_points(dim: usize, potential: &Potential, hbar: f64, domain: Domain, window: f64) -> Result<usize> {
        let probe = SchrodingerProblem {
            dim,
            potential: potential.clone(),
            hbar,
            points: 2,
            domain,
            window,
        };
        let need = probe.required_points()?;
        Ok(need.next_power_of_two().max(8))
    }

    fn energy_range(&self) -> (f64, f64) {
        let lo = vec![self.domain.lower(); self.dim];
        let hi = vec![self.domain.lower() + self.domain.length(); self.dim];
        self.potential.range_on(&lo, &hi)
    }

    /// Largest classical momentum on {H ≤ window}.
    pub fn classical_momentum(&self) -> f64 {
        let (vmin, _) = self.energy_range();
        (2.0 * (self.window - vmin).max(0.0)).sqrt()
    }

    fn required_points(&self) -> Result<usize> {
        check_hbar(self.hbar)?;
        let p = self.classical_momentum();
        // ħ (M/2)(2π/L) ≥ margin · p
        let m = MOMENTUM_MARGIN * p * self.domain.length() / (PI * self.hbar);
        Ok(m.ceil().max(2.0) as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return Err(Error::param("torus dimension must be 1 or 2"));
        }
        check_hbar(self.hbar)?;
        self.potential.validate(self.dim)?;
        if !(self.window.is_finite() && self.window >= 0.0) {
            return Err(Error::param("energy window must be a nonnegative half-width"));
        }
        if let Domain::Box { half_width } = self.domain {
            if !(half_width.is_finite() && half_width > 0.0) {
                return Err(Error::param("box half-width must be positive"));
            }
        } else if !self.potential.is_periodic() {
            return Err(Error::param("a confining potential needs a box domain"));
        }
        if !self.points.is_power_of_two() || self.points < 2 {
            return Err(Error::param(format!("grid size {} is not a power of two", self.points)));
        }
        let need = self.required_points()?;
        if self.points < need {
            return Err(Error::resolution(
                "spectral-resolution",
                format!(
                    "momentum cutoff ħ(M/2)(2π/L) must be at least {MOMENTUM_MARGIN}× the classical momentum {:.4}; use M ≥ {}",
                    self.classical_momentum(),
                    need.next_power_of_two()
                ),
            ));
        }
        if let Domain::Box { half_width } = self.domain {
            self.check_box_edges(half_width)?;
        }
        Ok(())
    }

    /// The eigenfunctions below the window must have tunnelled to nothing at
    /// the edges: action ∫ √(2(V − W))₊ from the last allowed point to each
    /// edge along every axis through the origin.
    fn check_box_edges(&self, half_width: f64) -> Result<()> {
        let n = 4000;
        for d in 0..self.dim {
            for sign in [-1.0, 1.0] {
                let mut action = 0.0;
                let h = half_width / n as f64;
                for i in (0..n).rev() {
                    let mut x = vec![0.0; self.dim];
                    x[d] = sign * (i as f64 + 0.5) * h;
                    let excess = self.potential.eval(&x) - self.window;
                    if excess <= 0.0 {
                        break;
                    }
                    action += (2.0 * excess).sqrt() * h;
                }
                if action < EDGE_ACTION * self.hbar {
                    return Err(Error::resolution(
                        "spectral-resolution",
                        format!(
                            "box edge on axis {d} is too close to the allowed region (action {:.3e} < {:.1}ħ); enlarge the box",
                            action, EDGE_ACTION
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.domain.length() / self.points as f64
    }

    pub fn coordinates(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points).map(|i| self.domain.lower() + i as f64 * h).collect()
    }

    /// Angular wavenumbers κ_k = 2πk/L for k = −M/2 .. M/2−1, ascending.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let m = self.points as i64;
        let l = self.domain.length();
        (-m / 2..m / 2).map(|k| 2.0 * PI * k as f64 / l).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_reports_minimal_size() {
        let v = Potential::cosine(1.0, -0.3);
        let m = SchrodingerProblem::minimal_points(1, &v, 1e-2, Domain::Torus, 0.1).unwrap();
        assert!(SchrodingerProblem::new(1, v.clone(), 1e-2, m, Domain::Torus, 0.1).is_ok());
        let err = SchrodingerProblem::new(1, v, 1e-2, m / 2, Domain::Torus, 0.1).unwrap_err();
        assert_eq!(err.guard_name(), Some("spectral-resolution"));
        assert!(err.to_string().contains(&format!("M ≥ {m}")));
    }

    #[test]
    fn small_box_is_refused() {
        let v = Potential::Harmonic { omega: 1.0, shift: -1.0 };
        assert!(SchrodingerProblem::new(1, v.clone(), 0.1, 512, Domain::Box { half_width: 8.0 }, 4.5).is_ok());
        let err = SchrodingerProblem::new(1, v, 0.1, 512, Domain::Box { half_width: 3.0 }, 4.5).unwrap_err();
        assert_eq!(err.guard_name(), Some("spectral-resolution"));
    }

    #[test]
    fn rejects_non_power_of_two() {
        let v = Potential::Free { value: 0.0 };
        assert!(SchrodingerProblem::new(1, v, 0.1, 100, Domain::Torus, 1.0).is_err());
    }
}
