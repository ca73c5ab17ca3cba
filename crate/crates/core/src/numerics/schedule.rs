use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly decreasing list of ħ values in (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct HbarSchedule(Vec<f64>);

impl HbarSchedule {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("hbar schedule is empty"));
        }
        if let Some(h) = values.iter().find(|h| !(**h > 0.0 && **h < 1.0)) {
            return Err(Error::param(format!("hbar values must lie in (0,1), got {h}")));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::param("hbar schedule must be strictly decreasing"));
        }
        Ok(HbarSchedule(values))
    }

    /// {1e-2, 3e-3, 1e-3, 3e-4, 1e-4}
    pub fn default_one_dim() -> Self {
        HbarSchedule(vec![1e-2, 3e-3, 1e-3, 3e-4, 1e-4])
    }

    /// Two-dimensional problems stop at 1e-3.
    pub fn default_two_dim() -> Self {
        HbarSchedule(vec![1e-2, 3e-3, 1e-3])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn smallest(&self) -> f64 {
        *self.0.last().expect("schedule is nonempty")
    }
}

impl TryFrom<Vec<f64>> for HbarSchedule {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        HbarSchedule::new(v)
    }
}

impl From<HbarSchedule> for Vec<f64> {
    fn from(s: HbarSchedule) -> Self {
        s.0
    }
}
