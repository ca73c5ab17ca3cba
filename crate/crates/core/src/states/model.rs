use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::phase::StatePhase;
use crate::error::{Error, Result};
use crate::numerics::field::check_hbar;
use crate::numerics::{GridSpec, SampledField};
use crate::profiles::Profile;

/// One term c·ħ^{power/2}·Π slow_i(x′_i)·Π fast_j(v_j) of the amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileTerm {
    #[serde(default)]
    pub power: usize,
    #[serde(default = "unit")]
    pub coefficient: Complex64,
    #[serde(default)]
    pub slow: Vec<Profile>,
    #[serde(default)]
    pub fast: Vec<Profile>,
}

fn unit() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn default_depth() -> usize {
    4
}

impl ProfileTerm {
    pub fn new(power: usize, coefficient: Complex64, slow: Vec<Profile>, fast: Vec<Profile>) -> Self {
        ProfileTerm {
            power,
            coefficient,
            slow,
            fast,
        }
    }

    pub fn eval(&self, slow_x: &[f64], v: &[f64]) -> Complex64 {
        let s: f64 = self.slow.iter().zip(slow_x).map(|(p, x)| p.eval(*x)).product();
        let f: f64 = self.fast.iter().zip(v).map(|(p, v)| p.eval(*v)).product();
        self.coefficient * (s * f)
    }
}

/// ħ^r e^{if(x)/ħ} Σ_{j ≤ depth} φ_j(x′, x″/√ħ) ħ^{j/2} with x = (x′, x″),
/// x′ the first `slow_dims` coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelIsotropicState {
    pub slow_dims: usize,
    pub fast_dims: usize,
    #[serde(default)]
    pub order: f64,
    #[serde(default)]
    pub phase: StatePhase,
    pub terms: Vec<ProfileTerm>,
    #[serde(default = "default_depth")]
    pub depth: usize,
}

/// Range of v on which fast profiles are checked for rapid decay.
const DECAY_CHECK_RANGE: f64 = 40.0;

impl ModelIsotropicState {
    /// Leading-order state with a single product profile.
    pub fn simple(slow: Vec<Profile>, fast: Vec<Profile>, order: f64, phase: StatePhase) -> Result<Self> {
        let s = ModelIsotropicState {
            slow_dims: slow.len(),
            fast_dims: fast.len(),
            order,
            phase,
            terms: vec![ProfileTerm::new(0, unit(), slow, fast)],
            depth: default_depth(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.slow_dims + self.fast_dims
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::param("state needs at least one dimension"));
        }
        if !self.order.is_finite() {
            return Err(Error::NumericInput("state order".into()));
        }
        self.phase.validate(self.dim())?;
        for (i, t) in self.terms.iter().enumerate() {
            if t.slow.len() != self.slow_dims || t.fast.len() != self.fast_dims {
                return Err(Error::param(format!(
                    "term {i} has {} slow and {} fast profiles, expected {} and {}",
                    t.slow.len(),
                    t.fast.len(),
                    self.slow_dims,
                    self.fast_dims
                )));
            }
            if !(t.coefficient.re.is_finite() && t.coefficient.im.is_finite()) {
                return Err(Error::NumericInput(format!("term {i} coefficient")));
            }
            for p in t.slow.iter().chain(&t.fast) {
                p.validate()?;
            }
            if let Some(j) = t.fast.iter().position(|p| !p.is_rapidly_decreasing(DECAY_CHECK_RANGE)) {
                return Err(Error::param(format!(
                    "term {i}: fast profile {j} does not decay rapidly in the scaled variable"
                )));
            }
        }
        Ok(())
    }

    /// Σ_{j ≤ depth} φ_j(x′, v) ħ^{j/2}.
    pub fn amplitude(&self, slow_x: &[f64], v: &[f64], hbar: f64) -> Complex64 {
        let sh = hbar.sqrt();
        self.terms
            .iter()
            .filter(|t| t.power <= self.depth)
            .map(|t| t.eval(slow_x, v) * sh.powi(t.power as i32))
            .sum()
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], hbar: f64) -> Complex64 {
        let sh = hbar.sqrt();
        let k = self.slow_dims;
        let v: Vec<f64> = x[k..].iter().map(|xi| xi / sh).collect();
        let amp = self.amplitude(&x[..k], &v, hbar);
        amp * Complex64::from_polar(hbar.powf(self.order), self.phase.value(x) / hbar)
    }

    /// Per slow axis, the interval outside which every term vanishes to
    /// truncation level (`None` if some profile does not decay).
    pub fn slow_support(&self) -> Vec<Option<(f64, f64)>> {
        (0..self.slow_dims)
            .map(|d| union_support(self.terms.iter().map(|t| &t.slow[d])))
            .collect()
    }

    /// Per fast axis, the support in the scaled variable v.
    pub fn fast_support(&self) -> Vec<Option<(f64, f64)>> {
        (0..self.fast_dims)
            .map(|d| union_support(self.terms.iter().map(|t| &t.fast[d])))
            .collect()
    }
}

fn union_support<'a>(profiles: impl Iterator<Item = &'a Profile>) -> Option<(f64, f64)> {
    let mut out: Option<(f64, f64)> = None;
    for p in profiles {
        let (a, b) = p.support()?;
        out = Some(match out {
            None => (a, b),
            Some((lo, hi)) => (lo.min(a), hi.max(b)),
        });
    }
    Some(out.unwrap_or((0.0, 0.0)))
}

pub fn eval_model_state(state: &ModelIsotropicState, x: &[f64], hbar: f64) -> Result<Complex64> {
    check_hbar(hbar)?;
    state.validate()?;
    if x.len() != state.dim() {
        return Err(Error::param(format!(
            "point has {} coordinates, state dimension is {}",
            x.len(),
            state.dim()
        )));
    }
    Ok(state.eval_unchecked(x, hbar))
}

pub fn sample_model_state(state: &ModelIsotropicState, grid: &GridSpec, hbar: f64) -> Result<SampledField> {
    check_hbar(hbar)?;
    state.validate()?;
    if grid.dim() != state.dim() {
        return Err(Error::param("grid dimension differs from state dimension"));
    }
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .with_min_len(1024)
        .map(|i| state.eval_unchecked(&grid.point(i), hbar))
        .collect();
    SampledField::new(grid.clone(), values, hbar)
}
