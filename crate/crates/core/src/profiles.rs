//! One-dimensional profile catalog shared by states and amplitudes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative level below which a profile is treated as zero.
pub const TRUNCATION: f64 = 1e-16;

/// sqrt(2 ln 1e16): Gaussian half-width, in units of its width, at which
/// e^{-v²/2w²} drops below [`TRUNCATION`].
pub const GAUSSIAN_CUTOFF: f64 = 8.583_864_105_157_389;

/// Named one-dimensional profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    /// e^{-(v-center)²/(2 width²)}
    Gaussian {
        #[serde(default)]
        center: f64,
        #[serde(default = "one")]
        width: f64,
    },
    /// Smooth bump equal to 1 on |v-center| ≤ plateau, 0 beyond plateau+taper.
    Bump {
        #[serde(default)]
        center: f64,
        #[serde(default = "one")]
        plateau: f64,
        #[serde(default = "one")]
        taper: f64,
    },
    /// (Σ c_i v^i)·e^{-v²/(2 width²)}
    PolynomialTimesGaussian {
        coefficients: Vec<f64>,
        #[serde(default = "one")]
        width: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// C∞ step: 0 for y ≤ 0, 1 for y ≥ 1.
pub fn smooth_step(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / y).exp();
    let b = (-1.0 / (1.0 - y)).exp();
    a / (a + b)
}

impl Profile {
    pub fn gaussian(width: f64) -> Self {
        Profile::Gaussian { center: 0.0, width }
    }

    pub fn standard_gaussian() -> Self {
        Self::gaussian(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Profile::Constant { value } => value.is_finite(),
            Profile::Gaussian { center, width } => center.is_finite() && width.is_finite() && *width > 0.0,
            Profile::Bump {
                center,
                plateau,
                taper,
            } => center.is_finite() && *plateau >= 0.0 && taper.is_finite() && *taper > 0.0,
            Profile::PolynomialTimesGaussian {
                coefficients,
                width,
            } => {
                !coefficients.is_empty()
                    && coefficients.iter().all(|c| c.is_finite())
                    && width.is_finite()
                    && *width > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid profile parameters: {self:?}")))
        }
    }

    pub fn eval(&self, v: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Gaussian { center, width } => {
                let y = (v - center) / width;
                (-0.5 * y * y).exp()
            }
            Profile::Bump {
                center,
                plateau,
                taper,
            } => {
                let d = (v - center).abs();
                1.0 - smooth_step((d - plateau) / taper)
            }
            Profile::PolynomialTimesGaussian {
                coefficients,
                width,
            } => {
                let p = coefficients.iter().rev().fold(0.0, |acc, c| acc * v + c);
                let y = v / width;
                p * (-0.5 * y * y).exp()
            }
        }
    }

    /// Interval outside which |profile| < [`TRUNCATION`]·sup|profile|;
    /// `None` when the profile does not decay.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Profile::Constant { value } => {
                if *value == 0.0 {
                    Some((0.0, 0.0))
                } else {
                    None
                }
            }
            Profile::Gaussian { center, width } => {
                let r = GAUSSIAN_CUTOFF * width;
                Some((center - r, center + r))
            }
            Profile::Bump {
                center,
                plateau,
                taper,
            } => {
                let r = plateau + taper;
                Some((center - r, center + r))
            }
            Profile::PolynomialTimesGaussian { width, .. } => {
                // scan outward in steps of width/8 until the tail is negligible
                let peak = self.sup_estimate();
                if peak == 0.0 {
                    return Some((0.0, 0.0));
                }
                let step = width / 8.0;
                let mut r = GAUSSIAN_CUTOFF * width;
                while (self.eval(r).abs().max(self.eval(-r).abs()) >= TRUNCATION * peak
                    || self.eval(r + step).abs().max(self.eval(-r - step).abs()) >= TRUNCATION * peak)
                    && r < 1e3 * width
                {
                    r += step;
                }
                Some((-r, r))
            }
        }
    }

    fn sup_estimate(&self) -> f64 {
        match self.support_hint() {
            Some((a, b)) => {
                let n = 2000;
                (0..=n)
                    .map(|i| self.eval(a + (b - a) * i as f64 / n as f64).abs())
                    .fold(0.0, f64::max)
            }
            None => self.eval(0.0).abs(),
        }
    }

    fn support_hint(&self) -> Option<(f64, f64)> {
        match self {
            Profile::PolynomialTimesGaussian {
                coefficients,
                width,
            } => {
                let r = width * (GAUSSIAN_CUTOFF + (coefficients.len() as f64).sqrt() * 2.0);
                Some((-r, r))
            }
            _ => self.support(),
        }
    }

    /// Length over which the profile varies appreciably; quadrature steps are
    /// taken as a fraction of it.
    pub fn resolution_scale(&self) -> f64 {
        match self {
            Profile::Constant { .. } => f64::INFINITY,
            Profile::Gaussian { width, .. } => *width,
            Profile::Bump { taper, .. } => taper / 4.0,
            Profile::PolynomialTimesGaussian {
                coefficients,
                width,
            } => width / (1.0 + (coefficients.len() as f64).sqrt()),
        }
    }

    /// Whether the profile decays faster than any polynomial, checked as a
    /// bound on |p(v)|(1+|v|)^10 near the ends of `[-range, range]`.
    pub fn is_rapidly_decreasing(&self, range: f64) -> bool {
        let weighted = |v: f64| self.eval(v).abs() * (1.0 + v.abs()).powi(10);
        let n = 4000;
        let samples: Vec<f64> = (0..=n)
            .map(|i| weighted(-range + 2.0 * range * i as f64 / n as f64))
            .collect();
        let sup = samples.iter().cloned().fold(0.0, f64::max);
        if sup == 0.0 {
            return true;
        }
        let tail = samples[..n / 20]
            .iter()
            .chain(&samples[n - n / 20..])
            .cloned()
            .fold(0.0, f64::max);
        tail <= 1e-6 * sup
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_step_is_monotone_and_saturates() {
        assert_eq!(smooth_step(-0.1), 0.0);
        assert_eq!(smooth_step(1.5), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 1..100 {
            let s = smooth_step(i as f64 / 100.0);
            assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn gaussian_cutoff_matches_truncation() {
        let g = Profile::standard_gaussian();
        assert!((g.eval(GAUSSIAN_CUTOFF) - TRUNCATION).abs() < 1e-20);
    }

    #[test]
    fn bump_plateau_and_support() {
        let b = Profile::Bump {
            center: 0.0,
            plateau: 1.0,
            taper: 0.5,
        };
        assert_eq!(b.eval(0.9), 1.0);
        assert_eq!(b.eval(1.6), 0.0);
        assert_eq!(b.support(), Some((-1.5, 1.5)));
    }

    #[test]
    fn polynomial_support_covers_tail() {
        let p = Profile::PolynomialTimesGaussian {
            coefficients: vec![0.0, 0.0, 0.0, 1.0],
            width: 1.0,
        };
        let (_, r) = p.support().unwrap();
        assert!(r > GAUSSIAN_CUTOFF);
        assert!(p.eval(r).abs() < 1e-16 * 3.0);
    }

    #[test]
    fn decay_check() {
        assert!(Profile::standard_gaussian().is_rapidly_decreasing(40.0));
        assert!(!Profile::Constant { value: 1.0 }.is_rapidly_decreasing(40.0));
    }

    #[test]
    fn json_catalog_names() {
        let p: Profile = serde_json::from_str(r#"{"name":"gaussian","width":2.0}"#).unwrap();
        assert_eq!(p, Profile::gaussian(2.0));
        let q: Profile =
            serde_json::from_str(r#"{"name":"polynomial-times-gaussian","coefficients":[1,2]}"#).unwrap();
        assert!(matches!(q, Profile::PolynomialTimesGaussian { .. }));
        assert!(serde_json::from_str::<Profile>(r#"{"name":"gausian"}"#).is_err());
    }
}
