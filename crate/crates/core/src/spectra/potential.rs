use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrigKind {
    Cos,
    Sin,
}

/// coefficient · cos(k·x) or coefficient · sin(k·x) with integer k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub kind: TrigKind,
    pub frequencies: Vec<i64>,
    #[serde(default = "one")]
    pub coefficient: f64,
}

fn one() -> f64 {
    1.0
}

/// Potential catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Potential {
    /// Constant V ≡ value (free particle with an energy shift).
    Free {
        #[serde(default)]
        value: f64,
    },
    /// Trigonometric polynomial constant + Σ terms on the torus.
    Trig {
        #[serde(default)]
        constant: f64,
        terms: Vec<TrigTerm>,
    },
    /// ½ω²|x|² + shift, for boxed domains.
    Harmonic {
        #[serde(default = "one")]
        omega: f64,
        #[serde(default)]
        shift: f64,
    },
}

impl Potential {
    /// amplitude·cos x + constant in one dimension.
    pub fn cosine(amplitude: f64, constant: f64) -> Self {
        Potential::Trig {
            constant,
            terms: vec![TrigTerm {
                kind: TrigKind::Cos,
                frequencies: vec![1],
                coefficient: amplitude,
            }],
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Potential::Free { value } if !value.is_finite() => Err(Error::NumericInput("potential value".into())),
            Potential::Trig { constant, terms } => {
                if !constant.is_finite() {
                    return Err(Error::NumericInput("potential constant".into()));
                }
                for t in terms {
                    if t.frequencies.len() != dim {
                        return Err(Error::param(format!(
                            "trig term has {} frequencies for a {dim}-dimensional torus",
                            t.frequencies.len()
                        )));
                    }
                    if !t.coefficient.is_finite() {
                        return Err(Error::NumericInput("trig coefficient".into()));
                    }
                }
                Ok(())
            }
            Potential::Harmonic { omega, shift } if !(omega.is_finite() && *omega > 0.0 && shift.is_finite()) => {
                Err(Error::param("harmonic potential needs ω > 0 and a finite shift"))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Potential::Free { value } => *value,
            Potential::Trig { constant, terms } => {
                constant
                    + terms
                        .iter()
                        .map(|t| {
                            let arg: f64 = t.frequencies.iter().zip(x).map(|(k, x)| *k as f64 * x).sum();
                            t.coefficient
                                * match t.kind {
                                    TrigKind::Cos => arg.cos(),
                                    TrigKind::Sin => arg.sin(),
                                }
                        })
                        .sum::<f64>()
            }
            Potential::Harmonic { omega, shift } => 0.5 * omega * omega * x.iter().map(|v| v * v).sum::<f64>() + shift,
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Potential::Free { .. } => vec![0.0; x.len()],
            Potential::Trig { terms, .. } => {
                let mut g = vec![0.0; x.len()];
                for t in terms {
                    let arg: f64 = t.frequencies.iter().zip(x).map(|(k, x)| *k as f64 * x).sum();
                    let d = t.coefficient
                        * match t.kind {
                            TrigKind::Cos => -arg.sin(),
                            TrigKind::Sin => arg.cos(),
                        };
                    for (gi, k) in g.iter_mut().zip(&t.frequencies) {
                        *gi += d * *k as f64;
                    }
                }
                g
            }
            Potential::Harmonic { omega, .. } => x.iter().map(|v| omega * omega * v).collect(),
        }
    }

    pub fn is_periodic(&self) -> bool {
        !matches!(self, Potential::Harmonic { .. })
    }

    /// Largest |k_d| over terms, per axis: the band half-width of the
    /// potential in the Fourier basis.
    pub fn bandwidth(&self, dim: usize) -> Vec<usize> {
        let mut out = vec![0; dim];
        if let Potential::Trig { terms, .. } = self {
            for t in terms {
                for (o, k) in out.iter_mut().zip(&t.frequencies) {
                    *o = (*o).max(k.unsigned_abs() as usize);
                }
            }
        }
        out
    }

    /// Fourier coefficient V̂_k with V = Σ_k V̂_k e^{ik·x}, for a one-dimensional
    /// periodic potential.
    pub fn fourier_coefficient_1d(&self, k: i64) -> Complex64 {
        match self {
            Potential::Free { value } => {
                if k == 0 {
                    Complex64::new(*value, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Potential::Trig { constant, terms } => {
                let mut c = if k == 0 {
                    Complex64::new(*constant, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                for t in terms {
                    let f = t.frequencies[0];
                    if f == 0 {
                        if k == 0 && t.kind == TrigKind::Cos {
                            c += t.coefficient;
                        }
                        continue;
                    }
                    // cos = (e^{ifx} + e^{-ifx})/2, sin = (e^{ifx} − e^{-ifx})/2i
                    if k == f {
                        c += match t.kind {
                            TrigKind::Cos => Complex64::new(0.5 * t.coefficient, 0.0),
                            TrigKind::Sin => Complex64::new(0.0, -0.5 * t.coefficient),
                        };
                    }
                    if k == -f {
                        c += match t.kind {
                            TrigKind::Cos => Complex64::new(0.5 * t.coefficient, 0.0),
                            TrigKind::Sin => Complex64::new(0.0, 0.5 * t.coefficient),
                        };
                    }
                }
                c
            }
            Potential::Harmonic { .. } => Complex64::new(f64::NAN, 0.0),
        }
    }

    /// Splits V(x) = Σ_d V_d(x_d) when every trig term depends on one axis.
    pub fn separate(&self, dim: usize) -> Option<Vec<Potential>> {
        match self {
            Potential::Free { value } => {
                let mut out = vec![Potential::Free { value: 0.0 }; dim];
                out[0] = Potential::Free { value: *value };
                Some(out)
            }
            Potential::Trig { constant, terms } => {
                let mut per: Vec<Vec<TrigTerm>> = vec![vec![]; dim];
                for t in terms {
                    let nonzero: Vec<usize> = (0..dim).filter(|&d| t.frequencies[d] != 0).collect();
                    match nonzero.as_slice() {
                        [] => {
                            // constant cos(0) term
                            per[0].push(TrigTerm {
                                kind: t.kind,
                                frequencies: vec![0],
                                coefficient: t.coefficient,
                            });
                        }
                        [d] => per[*d].push(TrigTerm {
                            kind: t.kind,
                            frequencies: vec![t.frequencies[*d]],
                            coefficient: t.coefficient,
                        }),
                        _ => return None,
                    }
                }
                Some(
                    per.into_iter()
                        .enumerate()
                        .map(|(d, terms)| Potential::Trig {
                            constant: if d == 0 { *constant } else { 0.0 },
                            terms,
                        })
                        .collect(),
                )
            }
            Potential::Harmonic { omega, shift } => {
                let mut out = vec![
                    Potential::Harmonic {
                        omega: *omega,
                        shift: 0.0
                    };
                    dim
                ];
                out[0] = Potential::Harmonic {
                    omega: *omega,
                    shift: *shift,
                };
                Some(out)
            }
        }
    }

    /// (min, max) of V over a sampled box, refined for trig potentials by
    /// the sample spacing bound.
    pub fn range_on(&self, lower: &[f64], upper: &[f64]) -> (f64, f64) {
        let dim = lower.len();
        let per: usize = match dim {
            1 => 4096,
            2 => 256,
            _ => 32,
        };
        let total = per.pow(dim as u32);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut x = vec![0.0; dim];
        for flat in 0..total {
            let mut rem = flat;
            for d in (0..dim).rev() {
                let i = rem % per;
                rem /= per;
                x[d] = lower[d] + (upper[d] - lower[d]) * i as f64 / (per - 1) as f64;
            }
            let v = self.eval(&x);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        // Lipschitz slack from the sampling step
        let step = lower
            .iter()
            .zip(upper)
            .map(|(a, b)| (b - a) / (per - 1) as f64)
            .fold(0.0, f64::max);
        let lip = match self {
            Potential::Trig { terms, .. } => terms
                .iter()
                .map(|t| t.coefficient.abs() * t.frequencies.iter().map(|k| k.abs() as f64).sum::<f64>())
                .sum::<f64>(),
            Potential::Free { .. } => 0.0,
            Potential::Harmonic { omega, .. } => {
                omega * omega * lower.iter().zip(upper).map(|(a, b)| a.abs().max(b.abs())).fold(0.0, f64::max)
            }
        };
        // the minimum of a smooth function is found to second order in the step
        let slack = lip * step * step;
        (lo - slack, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourier_coefficients_reconstruct() {
        let v = Potential::Trig {
            constant: -0.3,
            terms: vec![
                TrigTerm {
                    kind: TrigKind::Cos,
                    frequencies: vec![1],
                    coefficient: 1.0,
                },
                TrigTerm {
                    kind: TrigKind::Sin,
                    frequencies: vec![2],
                    coefficient: 0.4,
                },
            ],
        };
        for x in [0.0, 0.7, 2.5, -1.2] {
            let s: Complex64 = (-3..=3)
                .map(|k| v.fourier_coefficient_1d(k) * Complex64::from_polar(1.0, k as f64 * x))
                .sum();
            assert!((s.re - v.eval(&[x])).abs() < 1e-14 && s.im.abs() < 1e-14);
        }
        assert_eq!(v.bandwidth(1), vec![2]);
    }

    #[test]
    fn separation() {
        let v: Potential = serde_json::from_str(
            r#"{"name":"trig","constant":-0.5,"terms":[
                {"kind":"cos","frequencies":[1,0]},{"kind":"cos","frequencies":[0,1],"coefficient":0.5}]}"#,
        )
        .unwrap();
        let parts = v.separate(2).unwrap();
        for p in [[0.3, 1.1], [2.0, -0.4]] {
            let s = parts[0].eval(&p[..1]) + parts[1].eval(&p[1..]);
            assert!((s - v.eval(&p)).abs() < 1e-15);
        }
        let mixed = Potential::Trig {
            constant: 0.0,
            terms: vec![TrigTerm {
                kind: TrigKind::Cos,
                frequencies: vec![1, 1],
                coefficient: 1.0,
            }],
        };
        assert!(mixed.separate(2).is_none());
    }

    #[test]
    fn gradient_matches_difference() {
        let v = Potential::cosine(1.0, -0.3);
        let h = 1e-6;
        for x in [0.2, 1.9] {
            let fd = (v.eval(&[x + h]) - v.eval(&[x - h])) / (2.0 * h);
            assert!((fd - v.gradient(&[x])[0]).abs() < 1e-9);
        }
        let (lo, hi) = v.range_on(&[0.0], &[2.0 * std::f64::consts::PI]);
        assert!((lo + 1.3).abs() < 1e-5 && lo <= -1.3 && (hi - 0.7).abs() < 1e-9);
    }
}
