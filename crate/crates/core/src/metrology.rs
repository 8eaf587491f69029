//! Fidelity, Bures distance, quantum Fisher information and the
//! Cramér-Rao minimum uncertainty.
//!
//! The QFI has two independent routes: the symmetric-logarithmic-derivative
//! quadratic form [`qfi_sld`] in the eigenbasis of `rho`, and the
//! finite-difference Bures curvature [`qfi_fd`], `ds^2 = 4 d_B^2`.

use serde::{Serialize, Serializer};

use crate::channels::{apply, GeneratorSpec, ParamChannel};
use crate::error::{Error, Result};
use crate::linalg::{polar_unitary, sqrt_from_eigen, trace_norm, ComplexMatrix};
use crate::states::{DensityMatrix, SUPPORT_CUTOFF};

/// Tolerance on Hermiticity and trace of a state derivative.
pub const DERIVATIVE_TOL: f64 = 1e-8;
/// Smallest and largest step accepted by [`qfi_fd`].
pub const FD_STEP_RANGE: (f64, f64) = (1e-6, 1e-2);
/// Generator gaps below this are treated as degenerate.
pub const GAP_TOL: f64 = 1e-12;

/// Root fidelity `sqrt F = ||rho^{1/2} sigma^{1/2}||_1`, clamped to `[0, 1]`.
pub fn root_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let a = sqrt_from_eigen(rho.spectrum())?;
    let b = sqrt_from_eigen(sigma.spectrum())?;
    Ok(trace_norm(&(&a * &b))?.clamp(0.0, 1.0))
}

/// Fidelity `F(rho, sigma) = ||rho^{1/2} sigma^{1/2}||_1^2` in `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(root_fidelity(rho, sigma)?.powi(2))
}

/// Squared Bures distance `2 (1 - sqrt F)` in `[0, 2]`.
///
/// Evaluated as `||rho^{1/2} - sigma^{1/2} U||_F^2`, with `U` the unitary
/// polar factor of `(rho^{1/2} sigma^{1/2})^dag`. This equals `tr rho + tr sigma - 2 sqrt F`
/// but sums squares of small differences instead of cancelling two numbers
/// near 1, so nearby states keep their relative precision.
pub fn bures_distance_sq(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let a = sqrt_from_eigen(rho.spectrum())?;
    let b = sqrt_from_eigen(sigma.spectrum())?;
    let w = polar_unitary(&(&a * &b))?.adjoint();
    let d = &a - &(&b * &w);
    Ok(d.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().min(2.0))
}

/// QFI from the symmetric logarithmic derivative:
/// `sum_{j,k} 2 |<j|drho|k>|^2 / (l_j + l_k)` over eigenpairs of `rho` with
/// `l_j + l_k` above the support cutoff.
pub fn qfi_sld(rho: &DensityMatrix, drho: &ComplexMatrix) -> Result<f64> {
    let n = rho.dim();
    if drho.dim() != n {
        return Err(Error::DimensionMismatch(n, drho.dim()));
    }
    let dev = drho.hermitian_deviation();
    if dev > DERIVATIVE_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let tr = drho.trace().norm();
    if tr > DERIVATIVE_TOL {
        return Err(Error::NotTraceless(tr));
    }
    let es = rho.spectrum();
    let v = &es.eigenvectors;
    let rotated = &(&v.adjoint() * drho) * v;
    let lambda: Vec<f64> = es
        .eigenvalues
        .iter()
        .map(|&l| if l < SUPPORT_CUTOFF { 0.0 } else { l })
        .collect();
    let mut qfi = 0.0;
    for j in 0..n {
        for k in 0..n {
            let denom = lambda[j] + lambda[k];
            if denom > SUPPORT_CUTOFF {
                qfi += 2.0 * rotated[(j, k)].norm_sqr() / denom;
            }
        }
    }
    Ok(qfi)
}

/// QFI as the finite-difference Bures curvature
/// `8 (1 - sqrt F(rho(x), rho(x + dx))) / dx^2` with `rho(x) = L_x[rho0]`.
pub fn qfi_fd(ch: &ParamChannel, rho0: &DensityMatrix, x: f64, dx: f64) -> Result<f64> {
    if !(FD_STEP_RANGE.0..=FD_STEP_RANGE.1).contains(&dx) {
        return Err(Error::StepOutOfRange(dx));
    }
    let here = apply(ch, rho0, x)?;
    let there = apply(ch, rho0, x + dx)?;
    Ok(4.0 * bures_distance_sq(&here, &there)? / (dx * dx))
}

/// Minimum uncertainty after `N` repetitions: `1 / (sqrt(N) sqrt(qfi))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub qfi: f64,
    pub n_repetitions: u64,
    /// `+inf` (serialized as `null`) when the QFI vanishes.
    #[serde(serialize_with = "finite_or_null")]
    pub delta_x_min: f64,
}

pub(crate) fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

/// Cramér-Rao minimum uncertainty for a given QFI and repetition count.
pub fn delta_x_min(qfi: f64, n: u64) -> SensitivityReport {
    assert!(qfi >= 0.0 && n >= 1, "qfi must be nonnegative and N positive");
    let delta = if qfi > 0.0 {
        1.0 / ((n as f64).sqrt() * qfi.sqrt())
    } else {
        f64::INFINITY
    };
    SensitivityReport {
        qfi,
        n_repetitions: n,
        delta_x_min: delta,
    }
}

fn checked_gap(g: &GeneratorSpec) -> Result<f64> {
    let gap = g.spectral_gap();
    if gap < GAP_TOL {
        return Err(Error::DegenerateSpectrum(gap));
    }
    Ok(gap)
}

/// Best uncertainty with a product probe over `K` sites:
/// `1 / (sqrt(N K) (Lambda - lambda))`.
pub fn bound_product(g: &GeneratorSpec, n: u64) -> Result<f64> {
    let gap = checked_gap(g)?;
    Ok(1.0 / (((n * g.sites() as u64) as f64).sqrt() * gap))
}

/// Best uncertainty with a probe entangled over all `K` sites:
/// `1 / (sqrt(N) K (Lambda - lambda))`.
pub fn bound_entangled(g: &GeneratorSpec, n: u64) -> Result<f64> {
    let gap = checked_gap(g)?;
    Ok(1.0 / ((n as f64).sqrt() * g.sites() as f64 * gap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{channel_derivative, depolarizing_compose, unitary_channel};
    use crate::linalg::{pauli_z, C64};
    use crate::states::{density_from_pure, random_density, random_pure, random_unitary, PureState};

    fn half_z() -> ComplexMatrix {
        pauli_z().scale_real(0.5)
    }

    fn phase_qubit() -> ParamChannel {
        unitary_channel(&GeneratorSpec::new(half_z(), 1).unwrap()).unwrap()
    }

    #[test]
    fn fidelity_examples() {
        let rho = random_density(4, 3, 1).unwrap();
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);

        let z0 = density_from_pure(&PureState::basis(2, 0)).unwrap();
        let z1 = density_from_pure(&PureState::basis(2, 1)).unwrap();
        assert!(fidelity(&z0, &z1).unwrap().abs() < 1e-15);

        // Pure-vs-mixed closed form: F = <psi|sigma|psi>.
        let half = DensityMatrix::maximally_mixed(2);
        assert!((fidelity(&z0, &half).unwrap() - 0.5).abs() < 1e-14);
        let psi = random_pure(5, 3);
        let sigma = random_density(5, 2, 4).unwrap();
        let want = psi.expectation(sigma.matrix()).re;
        let got = fidelity(&density_from_pure(&psi).unwrap(), &sigma).unwrap();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric_and_unitarily_invariant() {
        for seed in 0..10 {
            let rho = random_density(6, 1 + seed as usize % 6, seed).unwrap();
            let sigma = random_density(6, 6 - seed as usize % 6, seed + 50).unwrap();
            let f = fidelity(&rho, &sigma).unwrap();
            assert!((f - fidelity(&sigma, &rho).unwrap()).abs() < 1e-10);
            let u = random_unitary(6, seed + 7);
            let fu = fidelity(&rho.conjugate(&u).unwrap(), &sigma.conjugate(&u).unwrap()).unwrap();
            assert!((f - fu).abs() < 1e-9);
            assert!((0.0..=1.0).contains(&f));
        }
    }

    #[test]
    fn fidelity_rejects_dimension_mismatch() {
        let a = DensityMatrix::maximally_mixed(2);
        let b = DensityMatrix::maximally_mixed(3);
        assert!(matches!(fidelity(&a, &b), Err(Error::DimensionMismatch(2, 3))));
    }

    #[test]
    fn bures_examples() {
        let rho = random_density(3, 2, 5).unwrap();
        assert!(bures_distance_sq(&rho, &rho).unwrap().abs() < 1e-12);
        let z0 = density_from_pure(&PureState::basis(2, 0)).unwrap();
        let z1 = density_from_pure(&PureState::basis(2, 1)).unwrap();
        assert!((bures_distance_sq(&z0, &z1).unwrap() - 2.0).abs() < 1e-15);
        let half = DensityMatrix::maximally_mixed(2);
        let want = 2.0 * (1.0 - std::f64::consts::FRAC_1_SQRT_2);
        assert!((bures_distance_sq(&z0, &half).unwrap() - want).abs() < 1e-14);
        assert!((want - 0.585786).abs() < 1e-6);
    }

    #[test]
    fn qfi_sld_examples() {
        let plus = density_from_pure(&PureState::plus()).unwrap();
        assert_eq!(qfi_sld(&plus, &ComplexMatrix::zeros(2)).unwrap(), 0.0);

        let drho = half_z().commutator(plus.matrix()).scale(C64::new(0.0, -1.0));
        assert!((qfi_sld(&plus, &drho).unwrap() - 1.0).abs() < 1e-14);

        let half = DensityMatrix::maximally_mixed(2);
        let drho = half_z().commutator(half.matrix()).scale(C64::new(0.0, -1.0));
        assert_eq!(qfi_sld(&half, &drho).unwrap(), 0.0);
    }

    #[test]
    fn qfi_sld_input_errors() {
        let rho = DensityMatrix::maximally_mixed(2);
        let not_herm = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(qfi_sld(&rho, &not_herm), Err(Error::NotHermitian(_))));
        let traced = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        assert!(matches!(qfi_sld(&rho, &traced), Err(Error::NotTraceless(_))));
    }

    #[test]
    fn qfi_fd_examples() {
        let plus = density_from_pure(&PureState::plus()).unwrap();
        let still = ParamChannel::identity(2);
        assert!(qfi_fd(&still, &plus, 0.3, 1e-4).unwrap().abs() < 1e-6);

        let q = qfi_fd(&phase_qubit(), &plus, 0.3, 1e-4).unwrap();
        assert!((q - 1.0).abs() < 1e-6, "{q}");

        // Bloch oracle: radius 0.5 rotating at unit rate in the equator.
        let dep = depolarizing_compose(&phase_qubit(), 0.5).unwrap();
        let q = qfi_fd(&dep, &plus, 0.3, 1e-4).unwrap();
        assert!((q - 0.25).abs() < 1e-3, "{q}");

        assert!(matches!(qfi_fd(&still, &plus, 0.0, 1e-1), Err(Error::StepOutOfRange(_))));
        assert!(matches!(qfi_fd(&still, &plus, 0.0, 1e-7), Err(Error::StepOutOfRange(_))));
    }

    #[test]
    fn qfi_routes_agree_on_full_rank_state() {
        let g = GeneratorSpec::new(half_z(), 2).unwrap();
        let ch = unitary_channel(&g).unwrap();
        let rho0 = random_density(4, 4, 8).unwrap();
        let x = 0.6;
        let sld = qfi_sld(
            &apply(&ch, &rho0, x).unwrap(),
            &channel_derivative(&ch, &rho0, x, 1e-4).unwrap(),
        )
        .unwrap();
        let fd = qfi_fd(&ch, &rho0, x, 1e-4).unwrap();
        assert!(((sld - fd) / sld).abs() < 1e-3, "sld {sld} fd {fd}");
    }

    #[test]
    fn delta_x_min_examples() {
        assert_eq!(delta_x_min(4.0, 4).delta_x_min, 0.25);
        assert_eq!(delta_x_min(1.0, 1).delta_x_min, 1.0);
        let zero = delta_x_min(0.0, 3);
        assert!(zero.delta_x_min.is_infinite());
        assert_eq!(
            serde_json::to_string(&zero).unwrap(),
            r#"{"qfi":0.0,"n_repetitions":3,"delta_x_min":null}"#
        );
    }

    #[test]
    fn closed_form_bounds() {
        let g4 = GeneratorSpec::new(half_z(), 4).unwrap();
        assert!((bound_product(&g4, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((bound_product(&g4, 100).unwrap() - 0.05).abs() < 1e-15);
        assert!((bound_entangled(&g4, 1).unwrap() - 0.25).abs() < 1e-15);

        let g1 = GeneratorSpec::new(half_z(), 1).unwrap();
        assert!((bound_product(&g1, 1).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(bound_product(&g1, 7).unwrap(), bound_entangled(&g1, 7).unwrap());

        for k in 1..=9 {
            let g = GeneratorSpec::new(half_z(), k).unwrap();
            for n in [1, 3, 50] {
                let ratio = bound_entangled(&g, n).unwrap() / bound_product(&g, n).unwrap();
                assert!((ratio - 1.0 / (k as f64).sqrt()).abs() < 1e-14);
            }
        }

        let flat = GeneratorSpec::new(ComplexMatrix::identity(2), 3).unwrap();
        assert!(matches!(bound_product(&flat, 1), Err(Error::DegenerateSpectrum(_))));
        assert!(matches!(bound_entangled(&flat, 1), Err(Error::DegenerateSpectrum(_))));
    }

    #[test]
    fn bures_forms_agree() {
        for (i, (d, r)) in [(2, 2), (3, 1), (4, 4), (6, 3)].into_iter().enumerate() {
            let rho = random_density(d, r, 40 + i as u64).unwrap();
            let sigma = random_density(d, d, 80 + i as u64).unwrap();
            let via_fidelity = 2.0 * (1.0 - root_fidelity(&rho, &sigma).unwrap());
            assert!((bures_distance_sq(&rho, &sigma).unwrap() - via_fidelity).abs() < 1e-12);
        }
    }

    #[test]
    fn bures_keeps_relative_precision_for_nearby_states() {
        let ch = unitary_channel(&GeneratorSpec::new(half_z(), 1).unwrap()).unwrap();
        let plus = density_from_pure(&PureState::plus()).unwrap();
        // d^2 = 2 (1 - cos(dx / 2)) for |+> rotated by dx about z.
        for dx in [1e-3, 1e-5, 1e-7] {
            let there = apply(&ch, &plus, dx).unwrap();
            let want = 4.0 * (dx / 4.0).sin().powi(2);
            let got = bures_distance_sq(&plus, &there).unwrap();
            assert!((got / want - 1.0).abs() < 1e-6, "dx={dx}: {got} vs {want}");
        }
    }
}
