use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::fit::{loglog_fit, LogLogFit};
use crate::numerics::quadrature::{composite_gauss_legendre, pairwise_sum_complex};
use crate::profiles::Profile;

/// Level, relative to its peak, below which the outer profile is dropped.
const TAIL_LEVEL: f64 = 1e-200;

/// Radius beyond which a profile counts as non-decaying.
const TAIL_SEARCH_LIMIT: f64 = 1e4;

/// Outer radius of the region where |ρ(v)| ≥ TAIL_LEVEL·sup|ρ|.
fn tail_radius(rho: &Profile) -> Result<f64> {
    let step = rho.resolution_scale().min(1.0) / 4.0;
    let peak = (0..=4000)
        .map(|i| rho.eval(-20.0 + 0.01 * i as f64).abs())
        .fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    let mut r = TAIL_SEARCH_LIMIT;
    // walk inward from the limit to the last point above the level
    let mut seen = false;
    while r > 0.0 {
        if rho.eval(r).abs().max(rho.eval(-r).abs()) >= TAIL_LEVEL * peak {
            seen = true;
            break;
        }
        r -= step.max(r * 1e-3);
    }
    if !seen {
        return Ok(0.0);
    }
    if r >= TAIL_SEARCH_LIMIT - step {
        return Err(Error::resolution(
            "gamma-quadrature-box",
            format!("outer profile has not decayed by |v| = {TAIL_SEARCH_LIMIT}"),
        ));
    }
    Ok(r + step)
}

/// Half-width of the set where the cutoff is exactly one, and the radius
/// beyond which it is exactly zero (infinite for a constant cutoff).
fn cutoff_extent(chi: &Profile) -> Result<(f64, f64)> {
    match chi {
        Profile::Bump {
            center,
            plateau,
            taper,
        } if *center == 0.0 && *plateau > 0.0 => Ok((*plateau, plateau + taper)),
        Profile::Constant { value } if *value == 1.0 => Ok((f64::INFINITY, f64::INFINITY)),
        _ => Err(Error::param("cutoff must be a centered bump with a plateau, or the constant 1")),
    }
}

/// γ(λ, ħ) = ∫ e^{iλs} ρ(s/√ħ) (1 − χ(s)) ds.
pub fn gamma(rho: &Profile, chi: &Profile, lambda: f64, hbar: f64) -> Result<Complex64> {
    rho.validate()?;
    chi.validate()?;
    crate::numerics::field::check_hbar(hbar)?;
    if !lambda.is_finite() {
        return Err(Error::NumericInput("lambda".into()));
    }
    let (inner, taper_end) = cutoff_extent(chi)?;
    if inner.is_infinite() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let r = hbar.sqrt();
    let outer = tail_radius(rho)? * r;
    if outer <= inner {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // panel width resolves the oscillation, the outer profile and the taper
    let taper = (taper_end - inner).max(f64::MIN_POSITIVE);
    let width = (2.0 * PI / lambda.abs().max(1e-300))
        .min(r * rho.resolution_scale())
        .min(taper / 8.0);
    let mut terms = Vec::new();
    for (a, b) in [(inner, outer), (-outer, -inner)] {
        let panels = ((b - a) / width).ceil().max(1.0) as usize;
        let (s, w) = composite_gauss_legendre(a, b, panels, 16);
        terms.extend(
            s.iter()
                .zip(&w)
                .map(|(s, w)| Complex64::from_polar(w * rho.eval(s / r) * (1.0 - chi.eval(*s)), lambda * s)),
        );
    }
    Ok(pairwise_sum_complex(&terms))
}

/// |γ| on a (λ, ħ) lattice with the bound constants and per-ħ decay in λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaDecayReport {
    pub lambdas: Vec<f64>,
    pub hbars: Vec<f64>,
    /// magnitudes[i][j] = |γ(λ_j, ħ_i)|.
    pub magnitudes: Vec<Vec<f64>>,
    /// Whether |γ| decreases along λ at each ħ.
    pub monotone: Vec<bool>,
    /// Fitted exponent of |γ| in λ at each ħ, where all values are positive.
    pub lambda_fits: Vec<Option<LogLogFit>>,
}

impl GammaDecayReport {
    /// Smallest C with |γ| ≤ C λ^{-k} ħ^{n} on the lattice.
    pub fn bound_constant(&self, k: i32, n: i32) -> f64 {
        let mut c: f64 = 0.0;
        for (h, row) in self.hbars.iter().zip(&self.magnitudes) {
            for (l, g) in self.lambdas.iter().zip(row) {
                c = c.max(g * l.abs().powi(k) * h.powi(-n));
            }
        }
        c
    }
}

pub fn gamma_decay(rho: &Profile, chi: &Profile, lambdas: &[f64], hbars: &[f64]) -> Result<GammaDecayReport> {
    if lambdas.is_empty() || hbars.is_empty() {
        return Err(Error::param("lattice is empty"));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) || lambdas[0] <= 0.0 {
        return Err(Error::param("frequencies must be positive and increasing"));
    }
    let mut magnitudes = Vec::with_capacity(hbars.len());
    for h in hbars {
        let row = lambdas
            .iter()
            .map(|l| gamma(rho, chi, *l, *h).map(|g| g.norm()))
            .collect::<Result<Vec<_>>>()?;
        magnitudes.push(row);
    }
    let monotone = magnitudes.iter().map(|row| row.windows(2).all(|w| w[1] <= w[0])).collect();
    let lambda_fits = magnitudes
        .iter()
        .map(|row| {
            if row.iter().all(|g| *g > 0.0) {
                loglog_fit(lambdas, row).ok()
            } else {
                None
            }
        })
        .collect();
    Ok(GammaDecayReport {
        lambdas: lambdas.to_vec(),
        hbars: hbars.to_vec(),
        magnitudes,
        monotone,
        lambda_fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cutoff() -> Profile {
        Profile::Bump {
            center: 0.0,
            plateau: 1.0,
            taper: 1.0,
        }
    }

    #[test]
    fn tail_bound() {
        // |γ| ≤ ∫_{|s|≥1} e^{-s²/2ħ} ds ≤ 2√ħ e^{-1/2ħ}
        let h = 0.01;
        let g = gamma(&Profile::standard_gaussian(), &cutoff(), 10.0, h).unwrap();
        assert!(g.norm() < 1e-8);
        assert!(g.norm() <= 2.0 * h.sqrt() * (-0.5 / h).exp());
    }

    #[test]
    fn trivial_cutoff() {
        let g = gamma(&Profile::standard_gaussian(), &Profile::Constant { value: 1.0 }, 3.0, 0.1).unwrap();
        assert_eq!(g, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn matches_direct_sum() {
        // plain trapezoid on a fine grid as the reference
        let (rho, chi, l, h) = (Profile::standard_gaussian(), cutoff(), 5.0, 0.1f64);
        let ds = 1e-4;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut s = -12.0;
        while s <= 12.0 {
            acc += Complex64::from_polar(rho.eval(s / h.sqrt()) * (1.0 - chi.eval(s)) * ds, l * s);
            s += ds;
        }
        let g = gamma(&rho, &chi, l, h).unwrap();
        assert!((g - acc).norm() < 1e-9 * acc.norm().max(1e-12), "{g} {acc}");
    }

    #[test]
    fn decays_in_lambda() {
        let rep = gamma_decay(&Profile::standard_gaussian(), &cutoff(), &[5.0, 10.0, 20.0, 40.0], &[0.1]).unwrap();
        assert!(rep.monotone[0], "{:?}", rep.magnitudes);
        assert!(rep.bound_constant(4, 4).is_finite());
    }

    #[test]
    fn non_decaying_outer_profile_is_refused() {
        let err = gamma(&Profile::Constant { value: 1.0 }, &cutoff(), 1.0, 0.1).unwrap_err();
        assert_eq!(err.guard_name(), Some("gamma-quadrature-box"));
    }
}
