use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real phase f(x) of a state, from a small built-in catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StatePhase {
    #[default]
    Zero,
    /// c·x + constant
    Linear {
        coefficients: Vec<f64>,
        #[serde(default)]
        constant: f64,
    },
    /// ½ xᵀAx + b·x + constant, A symmetric (rows).
    Quadratic {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        linear: Vec<f64>,
        #[serde(default)]
        constant: f64,
    },
}

impl StatePhase {
    /// Linear phase ξ0·(x − x0), the phase of a coherent state centred at (x0, ξ0).
    pub fn plane_wave(position: &[f64], momentum: &[f64]) -> Self {
        let constant = -position.iter().zip(momentum).map(|(x, p)| x * p).sum::<f64>();
        StatePhase::Linear {
            coefficients: momentum.to_vec(),
            constant,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            StatePhase::Zero => Ok(()),
            StatePhase::Linear {
                coefficients,
                constant,
            } => {
                if coefficients.len() != n {
                    return Err(Error::param(format!(
                        "linear phase has {} coefficients for dimension {n}",
                        coefficients.len()
                    )));
                }
                if !coefficients.iter().chain([constant]).all(|c| c.is_finite()) {
                    return Err(Error::NumericInput("linear phase coefficients".into()));
                }
                Ok(())
            }
            StatePhase::Quadratic {
                matrix,
                linear,
                constant,
            } => {
                if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
                    return Err(Error::param(format!("quadratic phase matrix must be {n}x{n}")));
                }
                if !linear.is_empty() && linear.len() != n {
                    return Err(Error::param(format!("quadratic phase linear part must have {n} entries")));
                }
                for i in 0..n {
                    for j in 0..n {
                        if (matrix[i][j] - matrix[j][i]).abs() > 1e-12 * (1.0 + matrix[i][j].abs()) {
                            return Err(Error::param("quadratic phase matrix must be symmetric"));
                        }
                    }
                }
                if !matrix.iter().flatten().chain(linear).chain([constant]).all(|c| c.is_finite()) {
                    return Err(Error::NumericInput("quadratic phase coefficients".into()));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            StatePhase::Zero => 0.0,
            StatePhase::Linear {
                coefficients,
                constant,
            } => constant + coefficients.iter().zip(x).map(|(c, x)| c * x).sum::<f64>(),
            StatePhase::Quadratic {
                matrix,
                linear,
                constant,
            } => {
                let mut v = *constant;
                for (i, row) in matrix.iter().enumerate() {
                    let ax: f64 = row.iter().zip(x).map(|(a, x)| a * x).sum();
                    v += 0.5 * x[i] * ax;
                }
                v + linear.iter().zip(x).map(|(b, x)| b * x).sum::<f64>()
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            StatePhase::Zero => vec![0.0; x.len()],
            StatePhase::Linear { coefficients, .. } => coefficients.clone(),
            StatePhase::Quadratic { matrix, linear, .. } => matrix
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() + linear.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        }
    }
}
