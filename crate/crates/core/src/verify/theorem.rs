use std::f64::consts::TAU;

use rand::Rng;
use serde::Serialize;

use super::{METRIC_TOL, QFI_TOL};
use crate::channels::{apply, depolarizing_compose, unitary_channel, GeneratorSpec, ParamChannel};
use crate::error::{Error, Result};
use crate::linalg::{pauli_z, ComplexMatrix};
use crate::metrology::{bures_distance_sq, delta_x_min, finite_or_null, FD_STEP_RANGE};
use crate::states::{
    density_from_pure, mix, random_decomposition_with, random_density_with, rng_from_seed, Decomposition,
    DensityMatrix,
};

/// Mixed-state QFI against the QFIs of the propagated decomposition
/// members, with the intermediate convexity step of the argument.
#[derive(Clone, Debug, Serialize)]
pub struct TheoremCheck {
    pub qfi_mixed: f64,
    /// One entry per decomposition member.
    pub qfi_pure: Vec<f64>,
    pub qfi_best_pure: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub delta_x_mixed: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub delta_x_best_pure: f64,
    /// `qfi_mixed <= max(qfi_pure) + QFI_TOL`.
    pub holds: bool,
    /// Squared Bures step of the propagated mixture.
    pub chain_lhs: f64,
    /// Weight-averaged squared Bures steps of the propagated members.
    pub chain_rhs: f64,
    pub chain_margin: f64,
    /// `chain_margin >= -METRIC_TOL`.
    pub chain_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremTrialResult {
    pub trial: usize,
    pub seed: u64,
    pub dim: usize,
    pub rank: usize,
    pub terms: usize,
    pub gamma: f64,
    pub x: f64,
    #[serde(flatten)]
    pub check: TheoremCheck,
}

fn bures_step(ch: &ParamChannel, rho0: &DensityMatrix, x: f64, dx: f64) -> Result<f64> {
    bures_distance_sq(&apply(ch, rho0, x)?, &apply(ch, rho0, x + dx)?)
}

/// Compares the finite-difference QFI of `L_x[mix(d)]` with that of every
/// `L_x[|psi_i><psi_i|]`. The QFIs are `4 d_B^2 / dx^2` of the same Bures
/// steps that enter the convexity chain, so both checks share one set of
/// channel evaluations.
pub fn check_theorem_once(d: &Decomposition, ch: &ParamChannel, x: f64, n: u64, dx: f64) -> Result<TheoremCheck> {
    if ch.dim() != d.dim() {
        return Err(Error::DimensionMismatch(ch.dim(), d.dim()));
    }
    if !(FD_STEP_RANGE.0..=FD_STEP_RANGE.1).contains(&dx) {
        return Err(Error::StepOutOfRange(dx));
    }
    let to_qfi = 4.0 / (dx * dx);

    let chain_lhs = bures_step(ch, &mix(d)?, x, dx)?;
    let member_steps = d
        .states()
        .iter()
        .map(|psi| bures_step(ch, &density_from_pure(psi)?, x, dx))
        .collect::<Result<Vec<f64>>>()?;
    let chain_rhs: f64 = d.weights().iter().zip(&member_steps).map(|(p, s)| p * s).sum();

    let qfi_mixed = to_qfi * chain_lhs;
    let qfi_pure: Vec<f64> = member_steps.iter().map(|s| to_qfi * s).collect();
    let qfi_best_pure = qfi_pure.iter().copied().fold(0.0, f64::max);
    let chain_margin = chain_rhs - chain_lhs;
    Ok(TheoremCheck {
        delta_x_mixed: delta_x_min(qfi_mixed, n).delta_x_min,
        delta_x_best_pure: delta_x_min(qfi_best_pure, n).delta_x_min,
        holds: qfi_mixed <= qfi_best_pure + QFI_TOL,
        qfi_mixed,
        qfi_pure,
        qfi_best_pure,
        chain_lhs,
        chain_rhs,
        chain_margin,
        chain_holds: chain_margin >= -METRIC_TOL,
    })
}

/// Phase family on dimension `dim`: `sigma_z / 2` on each of `log2(dim)`
/// qubits when `dim` is a power of two, otherwise a single site with
/// generator `diag(0, 1, .., dim - 1) / 2`. Depolarizing noise `gamma` is
/// composed after the rotation when positive.
pub fn phase_channel(dim: usize, gamma: f64) -> Result<ParamChannel> {
    let spec = if dim.is_power_of_two() && dim > 1 {
        GeneratorSpec::new(pauli_z().scale_real(0.5), dim.trailing_zeros() as usize)?
    } else {
        let diag: Vec<f64> = (0..dim).map(|k| 0.5 * k as f64).collect();
        GeneratorSpec::new(ComplexMatrix::from_real_diag(&diag), 1)?
    };
    let unitary = unitary_channel(&spec)?;
    if gamma > 0.0 {
        depolarizing_compose(&unitary, gamma)
    } else {
        Ok(unitary)
    }
}

/// One fuzzer trial: a Ginibre state of rank 2..=4 (capped by the
/// dimension), re-mixed into `rank + 0..=3` pure members through a
/// Haar-random unitary, propagated by the phase family with a drawn noise
/// level at a uniform `x` in `[0, 2 pi)`.
pub fn theorem_trial(
    trial: usize,
    seed: u64,
    dims: &[usize],
    gammas: &[f64],
    n: u64,
    dx: f64,
) -> Result<TheoremTrialResult> {
    let mut rng = rng_from_seed(seed);
    let dim = dims[rng.random_range(0..dims.len())];
    let rank = rng.random_range(2.min(dim)..=4.min(dim));
    let rho0 = random_density_with(dim, rank, &mut rng)?;
    let terms = rank + rng.random_range(0..=3);
    let d = random_decomposition_with(&rho0, terms, &mut rng)?;
    let gamma = gammas[rng.random_range(0..gammas.len())];
    let x = rng.random_range(0.0..TAU);
    let ch = phase_channel(dim, gamma)?;
    let check = check_theorem_once(&d, &ch, x, n, dx)?;
    Ok(TheoremTrialResult {
        trial,
        seed,
        dim,
        rank,
        terms: d.len(),
        gamma,
        x,
        check,
    })
}
