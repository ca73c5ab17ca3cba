use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::eigen::SpectrumResult;
use super::liouville::LevelSetMeasure;
use crate::error::{Error, Result};
use crate::numerics::fit::{loglog_fit, LogLogFit};
use crate::numerics::quadrature::composite_gauss_legendre;
use crate::profiles::Profile;

/// Multipliers φ(E_j/√ħ) of the operator φ(P/√ħ) on the eigenbasis.
pub fn apply_p_phi(s: &SpectrumResult, phi: &Profile) -> Result<Vec<f64>> {
    phi.validate()?;
    let r = s.hbar.sqrt();
    Ok(s.eigenvalues.iter().map(|e| phi.eval(e / r)).collect())
}

/// Kernel Σ_j φ(E_j/√ħ) ψ_j(x) ψ_j(y) on the grid from retained eigenvectors.
pub fn assemble_kernel(s: &SpectrumResult, phi: &Profile) -> Result<DMatrix<f64>> {
    let vectors = s
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::param("spectrum was computed without eigenvectors"))?;
    let mult = apply_p_phi(s, phi)?;
    let m = vectors.first().map_or(0, Vec::len);
    let mut k = DMatrix::<f64>::zeros(m, m);
    for (v, w) in vectors.iter().zip(&mult) {
        if *w == 0.0 {
            continue;
        }
        let col = nalgebra::DVector::from_column_slice(v);
        k.ger(*w, &col, &col, 1.0);
    }
    Ok(k)
}

/// ∫ φ, i.e. √(2π) times the unitary Fourier transform at 0.
pub fn profile_integral(phi: &Profile) -> Result<f64> {
    let (a, b) = phi
        .support()
        .ok_or_else(|| Error::param("test function must decay"))?;
    if a == b {
        return Ok(0.0);
    }
    let panels = (((b - a) / phi.resolution_scale()).ceil() as usize).clamp(8, 1 << 16);
    let (x, w) = composite_gauss_legendre(a, b, panels, 16);
    let signed: f64 = x.iter().zip(&w).map(|(x, w)| phi.eval(*x) * w).sum();
    let total: f64 = x.iter().zip(&w).map(|(x, w)| phi.eval(*x).abs() * w).sum();
    // cancellation to rounding level means the integral vanishes
    Ok(if signed.abs() <= 1e-13 * total { 0.0 } else { signed })
}

fn require_window(s: &SpectrumResult, lo: f64, hi: f64) -> Result<()> {
    if s.covers(lo, hi) {
        Ok(())
    } else {
        Err(Error::WindowInsufficient(format!(
            "spectrum is complete on [{:.4e}, {:.4e}] but [{lo:.4e}, {hi:.4e}] is needed",
            s.complete.0, s.complete.1
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceComparison {
    pub hbar: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// lhs/rhs; NaN when the leading term vanishes.
    pub ratio: f64,
    /// |ratio − 1|.
    pub deviation: f64,
}

/// Σ_j φ(E_j/√ħ) against (2π)^{-n} ħ^{-n+½} |Θ| ∫φ.
pub fn scaled_trace_check(s: &SpectrumResult, phi: &Profile, theta: &LevelSetMeasure) -> Result<TraceComparison> {
    let (a, b) = phi
        .support()
        .ok_or_else(|| Error::param("test function must decay"))?;
    let r = s.hbar.sqrt();
    require_window(s, a.min(0.0) * r, b.max(0.0) * r)?;
    let lhs: f64 = apply_p_phi(s, phi)?.iter().sum();
    let n = s.dim as i32;
    let rhs = (2.0 * PI).powi(-n) * s.hbar.powf(-(n as f64) + 0.5) * theta.value * profile_integral(phi)?;
    let ratio = if rhs != 0.0 { lhs / rhs } else { f64::NAN };
    Ok(TraceComparison {
        hbar: s.hbar,
        lhs,
        rhs,
        ratio,
        deviation: (ratio - 1.0).abs(),
    })
}

/// Trace comparisons over a schedule with the fitted ħ-exponent of the
/// deviation; when the leading term vanishes, the exponent of |lhs| instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    pub records: Vec<TraceComparison>,
    pub correction: Option<LogLogFit>,
    pub lhs_decay: Option<LogLogFit>,
}

pub fn trace_series(records: Vec<TraceComparison>) -> TraceSeries {
    let h: Vec<f64> = records.iter().map(|r| r.hbar).collect();
    let leading_vanishes = records.iter().all(|r| r.rhs == 0.0);
    let correction = if leading_vanishes {
        None
    } else {
        let d: Vec<f64> = records.iter().map(|r| r.deviation).collect();
        loglog_fit(&h, &d).ok()
    };
    let lhs_decay = if leading_vanishes {
        let l: Vec<f64> = records.iter().map(|r| r.lhs.abs()).collect();
        loglog_fit(&h, &l).ok()
    } else {
        None
    };
    TraceSeries {
        records,
        correction,
        lhs_decay,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountComparison {
    pub hbar: f64,
    pub c: f64,
    pub alpha: f64,
    pub count: usize,
    pub prediction: f64,
    pub ratio: f64,
}

/// #{j : |E_j| ≤ cħ^α} against 2c(2π)^{-n} ħ^{-n+α} |Θ|.
pub fn weyl_count_check(s: &SpectrumResult, c: f64, alpha: f64, theta: &LevelSetMeasure) -> Result<CountComparison> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("exponent must lie in (0, 1)"));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::param("window constant must be nonnegative"));
    }
    let half = c * s.hbar.powf(alpha);
    require_window(s, -2.0 * half, 2.0 * half)?;
    let count = s.eigenvalues.iter().filter(|e| e.abs() <= half).count();
    let n = s.dim as i32;
    let prediction = 2.0 * c * (2.0 * PI).powi(-n) * s.hbar.powf(-(n as f64) + alpha) * theta.value;
    let ratio = if prediction > 0.0 {
        count as f64 / prediction
    } else {
        f64::NAN
    };
    Ok(CountComparison {
        hbar: s.hbar,
        c,
        alpha,
        count,
        prediction,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::eigen::{diagonalize_with, harmonic_surrogate, DiagonalizeOptions};
    use crate::spectra::potential::Potential;
    use crate::spectra::problem::{Domain, SchrodingerProblem};

    fn disc() -> LevelSetMeasure {
        LevelSetMeasure::exact(2.0 * PI, 0.0)
    }

    #[test]
    fn zero_and_center_values() {
        let s = harmonic_surrogate(0.1, 1.0).unwrap();
        let zero = apply_p_phi(&s, &Profile::Constant { value: 0.0 }).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
        let mut t = s.clone();
        t.eigenvalues = vec![0.0];
        assert_eq!(apply_p_phi(&t, &Profile::standard_gaussian()).unwrap(), vec![1.0]);
    }

    #[test]
    fn kernel_trace_identity() {
        let p = SchrodingerProblem::new(1, Potential::cosine(1.0, -0.3), 0.05, 256, Domain::Torus, 1.0).unwrap();
        let s = diagonalize_with(&p, DiagonalizeOptions { retain_vectors: true }).unwrap();
        let phi = Profile::gaussian(2.0);
        let k = assemble_kernel(&s, &phi).unwrap();
        let sum: f64 = apply_p_phi(&s, &phi).unwrap().iter().sum();
        assert!((k.trace() - sum).abs() < 1e-10, "{} {sum}", k.trace());
    }

    #[test]
    fn surrogate_trace() {
        let s = harmonic_surrogate(1e-3, 0.5).unwrap();
        let r = scaled_trace_check(&s, &Profile::standard_gaussian(), &disc()).unwrap();
        assert!(r.deviation < 1e-6, "{r:?}");
    }

    #[test]
    fn odd_test_function_has_no_leading_term() {
        let phi = Profile::PolynomialTimesGaussian {
            coefficients: vec![0.0, 1.0],
            width: 1.0,
        };
        let recs: Vec<_> = [1e-3, 1e-4]
            .iter()
            .map(|h| scaled_trace_check(&harmonic_surrogate(*h, 0.5).unwrap(), &phi, &disc()).unwrap())
            .collect();
        assert!(recs.iter().all(|r| r.rhs.abs() < 1e-12 && r.ratio.is_nan()));
        let series = trace_series(recs);
        assert!(series.correction.is_none());
    }

    #[test]
    fn narrow_window_is_refused() {
        let s = harmonic_surrogate(1e-2, 0.05).unwrap();
        let err = scaled_trace_check(&s, &Profile::standard_gaussian(), &disc()).unwrap_err();
        assert_eq!(err.guard_name(), Some("spectral-window"));
        let err = weyl_count_check(&s, 1.0, 0.5, &disc()).unwrap_err();
        assert_eq!(err.guard_name(), Some("spectral-window"));
    }

    #[test]
    fn surrogate_count_is_an_arithmetic_progression() {
        let h = 1e-3;
        let s = harmonic_surrogate(h, 0.2).unwrap();
        let r = weyl_count_check(&s, 1.0, 0.5, &disc()).unwrap();
        let exact = s.eigenvalues.iter().filter(|e| e.abs() <= h.sqrt()).count();
        assert_eq!(r.count, exact);
        assert!((r.prediction - 2.0 / h.sqrt()).abs() < 1e-9);
        let zero = weyl_count_check(&s, 0.0, 0.5, &disc()).unwrap();
        assert_eq!(zero.count, 0);
    }

    #[test]
    fn closed_endpoints() {
        let mut s = harmonic_surrogate(1e-2, 1.0).unwrap();
        s.eigenvalues = vec![-0.1, 0.1];
        let r = weyl_count_check(&s, 1.0, 0.5, &disc()).unwrap();
        assert_eq!(r.count, 2);
    }
}
