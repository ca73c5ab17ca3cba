use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::model::ModelIsotropicState;
use super::phase::StatePhase;
use crate::error::{Error, Result};
use crate::numerics::field::check_hbar;
use crate::numerics::{GridSpec, SampledField};
use crate::profiles::GAUSSIAN_CUTOFF;

/// Largest allowed |∇f(x0) − ξ0|.
pub const CENTER_TOLERANCE: f64 = 1e-10;

/// e^{-d²/ħ} < 1e-16 once d > this multiple of √ħ.
pub(crate) const WINDOW_CUTOFF: f64 = 6.069_640_819_933_6;

/// Profile of a coherent state around its centre.
#[derive(Debug, Clone)]
pub enum Envelope {
    /// L²-normalised (π w² ħ)^{-n/4} e^{-|x−x0|²/(2w²ħ)}.
    Gaussian { width: f64 },
    /// ħ^r φ(x′, x″/√ħ) e^{-|x′−x0′|²/ħ}, a Gaussian-windowed slice of a model
    /// state (its phase is carried by the coherent state).
    Window { state: Arc<ModelIsotropicState> },
}

/// State concentrated at a single phase-space point (x0, ξ0).
#[derive(Debug, Clone)]
pub struct CoherentState {
    position: Vec<f64>,
    momentum: Vec<f64>,
    phase: StatePhase,
    envelope: Envelope,
    prefactor: Complex64,
}

impl CoherentState {
    pub fn new(
        position: Vec<f64>,
        momentum: Vec<f64>,
        phase: StatePhase,
        envelope: Envelope,
        prefactor: Complex64,
    ) -> Result<Self> {
        let n = position.len();
        if n == 0 || momentum.len() != n {
            return Err(Error::param("centre position and momentum must have the same positive dimension"));
        }
        if !position.iter().chain(&momentum).all(|v| v.is_finite()) {
            return Err(Error::NumericInput("coherent state centre".into()));
        }
        phase.validate(n)?;
        match &envelope {
            Envelope::Gaussian { width } if !(*width > 0.0 && width.is_finite()) => {
                return Err(Error::param("coherent envelope width must be positive"));
            }
            Envelope::Window { state } if state.dim() != n => {
                return Err(Error::param("windowed envelope dimension differs from the centre"));
            }
            _ => {}
        }
        let grad = phase.gradient(&position);
        let mismatch = grad
            .iter()
            .zip(&momentum)
            .map(|(g, p)| (g - p).powi(2))
            .sum::<f64>()
            .sqrt();
        if mismatch >= CENTER_TOLERANCE {
            return Err(Error::param(format!(
                "phase gradient at the centre differs from the momentum by {mismatch:.3e}"
            )));
        }
        Ok(CoherentState {
            position,
            momentum,
            phase,
            envelope,
            prefactor,
        })
    }

    /// L²-normalised Gaussian g_{x0,ξ0}.
    pub fn gaussian(position: Vec<f64>, momentum: Vec<f64>) -> Result<Self> {
        let phase = StatePhase::plane_wave(&position, &momentum);
        Self::new(
            position,
            momentum,
            phase,
            Envelope::Gaussian { width: 1.0 },
            Complex64::new(1.0, 0.0),
        )
    }

    pub fn position(&self) -> &[f64] {
        &self.position
    }

    pub fn momentum(&self) -> &[f64] {
        &self.momentum
    }

    pub fn phase(&self) -> &StatePhase {
        &self.phase
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    pub fn prefactor(&self) -> Complex64 {
        self.prefactor
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    pub fn with_prefactor(mut self, c: Complex64) -> Self {
        self.prefactor = c;
        self
    }

    pub fn eval(&self, x: &[f64], hbar: f64) -> Complex64 {
        let amp = match &self.envelope {
            Envelope::Gaussian { width } => {
                let n = self.dim() as f64;
                let d2: f64 = x.iter().zip(&self.position).map(|(a, b)| (a - b).powi(2)).sum();
                (PI * width * width * hbar).powf(-n / 4.0) * (-d2 / (2.0 * width * width * hbar)).exp()
            }
            Envelope::Window { state } => {
                let k = state.slow_dims;
                let d2: f64 = x[..k]
                    .iter()
                    .zip(&self.position[..k])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                let window = (-d2 / hbar).exp();
                if window == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let sh = hbar.sqrt();
                let v: Vec<f64> = x[k..].iter().map(|xi| xi / sh).collect();
                return self.prefactor
                    * state.amplitude(&x[..k], &v, hbar)
                    * Complex64::from_polar(hbar.powf(state.order) * window, self.phase.value(x) / hbar);
            }
        };
        self.prefactor * Complex64::from_polar(amp, self.phase.value(x) / hbar)
    }

    /// Per-axis box outside which the state is below truncation level;
    /// `None` on an axis where it does not decay.
    pub fn support_box(&self, hbar: f64) -> Vec<Option<(f64, f64)>> {
        let sh = hbar.sqrt();
        match &self.envelope {
            Envelope::Gaussian { width } => self
                .position
                .iter()
                .map(|&c| {
                    let r = GAUSSIAN_CUTOFF * width * sh;
                    Some((c - r, c + r))
                })
                .collect(),
            Envelope::Window { state } => {
                let k = state.slow_dims;
                let slow = state.slow_support();
                let fast = state.fast_support();
                let mut out = Vec::with_capacity(self.dim());
                for d in 0..k {
                    let c = self.position[d];
                    let r = WINDOW_CUTOFF * sh;
                    let (mut lo, mut hi) = (c - r, c + r);
                    if let Some((a, b)) = slow[d] {
                        lo = lo.max(a);
                        hi = hi.min(b);
                    }
                    out.push(Some((lo, hi.max(lo))));
                }
                for f in fast {
                    out.push(f.map(|(a, b)| (a * sh, b * sh)));
                }
                out
            }
        }
    }

    pub fn sample(&self, grid: &GridSpec, hbar: f64) -> Result<SampledField> {
        check_hbar(hbar)?;
        if grid.dim() != self.dim() {
            return Err(Error::param("grid dimension differs from state dimension"));
        }
        SampledField::from_fn(grid.clone(), hbar, |x| self.eval(x, hbar))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Axis;

    #[test]
    fn normalised_gaussian_has_unit_norm() {
        let hbar = 0.01;
        let g = CoherentState::gaussian(vec![0.2], vec![-0.7]).unwrap();
        let grid = GridSpec::new(vec![Axis::boxed(-1.5, 1.5, 3001).unwrap()]).unwrap();
        let f = g.sample(&grid, hbar).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-10);
        assert!((g.eval(&[0.2], hbar).re - (PI * hbar).powf(-0.25)).abs() < 1e-12);
    }

    #[test]
    fn centre_invariant_is_enforced() {
        let err = CoherentState::new(
            vec![0.0],
            vec![1.0],
            StatePhase::Zero,
            Envelope::Gaussian { width: 1.0 },
            Complex64::new(1.0, 0.0),
        );
        assert!(err.is_err());
    }

    #[test]
    fn support_box_contains_the_mass() {
        let hbar = 1e-3;
        let g = CoherentState::gaussian(vec![1.0, -1.0], vec![0.0, 0.0]).unwrap();
        let b = g.support_box(hbar);
        let (lo, hi) = b[0].unwrap();
        assert!(g.eval(&[hi, -1.0], hbar).norm() / g.eval(&[1.0, -1.0], hbar).norm() < 1.1e-16);
        assert!((hi - lo - 2.0 * GAUSSIAN_CUTOFF * hbar.sqrt()).abs() < 1e-12);
    }
}
