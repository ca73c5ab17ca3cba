use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions entering the clean-intersection count for a canonical relation
/// Γ ⊂ T*X × T*Y and an isotropic Σ ⊂ T*Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanIntersectionDims {
    /// dim Γ ∩ (T*X × Σ)
    pub intersection: usize,
    pub dim_x: usize,
    pub dim_y: usize,
    pub dim_sigma: usize,
    pub dim_gamma: usize,
}

impl CleanIntersectionDims {
    pub fn validate(&self) -> Result<()> {
        if self.dim_gamma != self.dim_x + self.dim_y {
            return Err(Error::param(format!(
                "a canonical relation has dimension dim X + dim Y = {}, got {}",
                self.dim_x + self.dim_y,
                self.dim_gamma
            )));
        }
        if self.dim_sigma > self.dim_y {
            return Err(Error::param("an isotropic submanifold of T*Y has dimension at most dim Y"));
        }
        Ok(())
    }

    /// Intersection dimension of a transverse intersection.
    pub fn transverse_intersection(&self) -> i64 {
        self.dim_gamma as i64 + self.dim_sigma as i64 - 2 * self.dim_y as i64
    }
}

/// e = dim[Γ ∩ (T*X × Σ)] + 2 dim X + 2 dim Y − (dim Γ + 2 dim X + dim Σ).
pub fn excess(d: &CleanIntersectionDims) -> Result<i64> {
    d.validate()?;
    let e = d.intersection as i64 + 2 * d.dim_x as i64 + 2 * d.dim_y as i64
        - (d.dim_gamma as i64 + 2 * d.dim_x as i64 + d.dim_sigma as i64);
    if e < 0 {
        return Err(Error::Inconsistency(format!(
            "excess {e} is negative: these dimensions cannot come from a clean intersection"
        )));
    }
    Ok(e)
}

/// Dimensions of the intersection when Γ is parametrized by a phase with N
/// fiber variables, Σ = {y″ = 0, η = 0} has codimension l in Y, and m further
/// independent differentials cut out the intersection. Returns the dimensions
/// together with the closed-form excess N + dim Y − (l + m).
pub fn dims_from_phase_counts(
    dim_x: usize,
    dim_y: usize,
    fiber: usize,
    l: usize,
    m: usize,
) -> Result<(CleanIntersectionDims, i64)> {
    if l > dim_y || m > dim_y - l + fiber {
        return Err(Error::param("inadmissible dimension tuple"));
    }
    let intersection = (dim_x + dim_y + fiber) as i64 - (2 * l + m) as i64;
    if intersection < 0 {
        return Err(Error::param("inadmissible dimension tuple"));
    }
    let d = CleanIntersectionDims {
        intersection: intersection as usize,
        dim_x,
        dim_y,
        dim_sigma: dim_y - l,
        dim_gamma: dim_x + dim_y,
    };
    Ok((d, fiber as i64 + dim_y as i64 - (l + m) as i64))
}
