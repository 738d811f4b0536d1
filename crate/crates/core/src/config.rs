//! Branch configurations and numerical tolerances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::Error;

/// Eight strictly increasing real branch points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BranchConfig {
    x: [f64; 8],
}

impl BranchConfig {
    pub fn new(x: [f64; 8]) -> Result<Self, Error> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Usage("branch points must be finite".into()));
        }
        if x.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Usage(format!("branch points must be strictly increasing: {x:?}")));
        }
        Ok(Self { x })
    }

    pub fn from_slice(x: &[f64]) -> Result<Self, Error> {
        let arr: [f64; 8] = x
            .try_into()
            .map_err(|_| Error::Usage(format!("expected 8 branch points, got {}", x.len())))?;
        Self::new(arr)
    }

    /// `x = (1, 2, …, 8)`.
    pub fn standard() -> Self {
        Self { x: [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0] }
    }

    pub fn points(&self) -> &[f64; 8] {
        &self.x
    }

    /// `x ↦ a·x + b` with `a > 0`.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self, Error> {
        Self::new(self.x.map(|v| a * v + b))
    }

    /// Seeded random configuration: `x₁ = 0`, consecutive gaps uniform in `[0.25, 2]`.
    pub fn random(rng: &mut impl Rng) -> Self {
        let mut x = [0.0; 8];
        for j in 1..8 {
            x[j] = x[j - 1] + rng.gen_range(0.25..2.0);
        }
        Self { x }
    }

    /// `n` configurations from a ChaCha stream seeded by `seed`.
    pub fn random_batch(seed: u64, n: usize) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| Self::random(&mut rng)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    /// Compensated lattice summation with tolerances tightened by 10³.
    Extended,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Bound on the theta truncation tail.
    pub theta: f64,
    /// Target absolute quadrature error.
    pub quad: f64,
    /// Gauss–Jacobi nodes per interval before refinement.
    pub nodes: usize,
    pub precision: Precision,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { theta: 1e-12, quad: 1e-12, nodes: 64, precision: Precision::Double }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.theta > 0.0 && self.quad > 0.0) {
            return Err(Error::Usage("tolerances must be positive".into()));
        }
        if self.nodes < 4 {
            return Err(Error::Usage("at least 4 quadrature nodes are needed".into()));
        }
        Ok(())
    }

    /// Tolerance actually handed to the theta kernel.
    pub fn effective_theta(&self) -> f64 {
        match self.precision {
            Precision::Double => self.theta,
            Precision::Extended => self.theta * 1e-3,
        }
    }

    pub fn compensated(&self) -> bool {
        self.precision == Precision::Extended
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_configs() {
        assert!(BranchConfig::new([1.0, 2.0, 3.0, 3.0, 5.0, 6.0, 7.0, 8.0]).is_err());
        assert!(BranchConfig::from_slice(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).is_err());
        assert!(BranchConfig::new([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, f64::NAN]).is_err());
    }

    #[test]
    fn random_batch_is_reproducible_and_valid() {
        let a = BranchConfig::random_batch(7, 20);
        let b = BranchConfig::random_batch(7, 20);
        assert_eq!(a, b);
        for c in &a {
            assert!(BranchConfig::new(*c.points()).is_ok());
        }
    }
}
