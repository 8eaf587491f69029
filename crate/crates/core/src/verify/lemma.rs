use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrology::bures_distance_sq;
use crate::states::{random_density_with, rng_from_seed, DensityMatrix};

/// Both sides of the joint-convexity inequality for one quadruple.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LemmaCheck {
    /// `d^2(a r1 + (1-a) r2, a s1 + (1-a) s2)`.
    pub lhs: f64,
    /// `a d^2(r1, s1) + (1-a) d^2(r2, s2)`.
    pub rhs: f64,
    /// `rhs - lhs`; negative beyond round-off would refute convexity.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaTrialResult {
    pub trial: usize,
    pub seed: u64,
    pub dim: usize,
    /// Ranks of `rho1, rho2, sigma1, sigma2`.
    pub ranks: [usize; 4],
    pub a: f64,
    #[serde(flatten)]
    pub check: LemmaCheck,
}

pub fn check_lemma_once(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    sigma1: &DensityMatrix,
    sigma2: &DensityMatrix,
    a: f64,
) -> Result<LemmaCheck> {
    let dim = rho1.dim();
    for d in [rho2, sigma1, sigma2] {
        if d.dim() != dim {
            return Err(Error::DimensionMismatch(dim, d.dim()));
        }
    }
    let rho = rho1.convex_combination(rho2, a)?;
    let sigma = sigma1.convex_combination(sigma2, a)?;
    let lhs = bures_distance_sq(&rho, &sigma)?;
    let rhs = a * bures_distance_sq(rho1, sigma1)? + (1.0 - a) * bures_distance_sq(rho2, sigma2)?;
    Ok(LemmaCheck {
        lhs,
        rhs,
        margin: rhs - lhs,
    })
}

/// One fuzzer trial: dimension drawn from `dims`, four Ginibre states of
/// independent uniform rank, and `a` uniform in `[0, 1]`.
pub fn lemma_trial(trial: usize, seed: u64, dims: &[usize]) -> Result<LemmaTrialResult> {
    let mut rng = rng_from_seed(seed);
    let dim = dims[rng.random_range(0..dims.len())];
    let mut ranks = [0usize; 4];
    let mut states = Vec::with_capacity(4);
    for r in ranks.iter_mut() {
        *r = rng.random_range(1..=dim);
        states.push(random_density_with(dim, *r, &mut rng)?);
    }
    let a: f64 = rng.random_range(0.0..=1.0);
    let check = check_lemma_once(&states[0], &states[1], &states[2], &states[3], a)?;
    Ok(LemmaTrialResult {
        trial,
        seed,
        dim,
        ranks,
        a,
        check,
    })
}
