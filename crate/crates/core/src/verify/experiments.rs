use serde::Serialize;

use super::SCALING_REL_TOL;
use crate::channels::{apply, channel_derivative, unitary_channel, GeneratorSpec};
use crate::error::{Error, Result};
use crate::linalg::{pauli_z, ComplexMatrix, C64};
use crate::metrology::{bound_entangled, bound_product, delta_x_min, finite_or_null, qfi_fd, qfi_sld};
use crate::states::{
    density_from_pure, extremal_entangled_state, extremal_superposition, product_state, DensityMatrix,
};

/// Working point for the experiments; the unitary families are covariant in
/// `x`, so the choice does not matter beyond round-off.
const X0: f64 = 0.0;

#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow {
    pub k: usize,
    pub qfi_product: f64,
    pub qfi_entangled: f64,
    pub delta_product: f64,
    pub delta_entangled: f64,
    pub bound_product: f64,
    pub bound_entangled: f64,
    /// `delta_product / bound_product - 1`.
    pub rel_dev_product: f64,
    /// `delta_entangled / bound_entangled - 1`.
    pub rel_dev_entangled: f64,
    /// `delta_entangled / delta_product`.
    pub ratio: f64,
    /// `1 / sqrt(K)`.
    pub ratio_expected: f64,
    pub within_tolerance: bool,
}

/// Measured minimum uncertainty for the optimal product probe and the
/// GHZ-type probe under `exp(-i x sum_i h_i)`, for `K = 1..=k_max`, next to
/// the closed-form bounds.
pub fn scaling_experiment(h: &ComplexMatrix, k_max: usize, n: u64, dx: f64) -> Result<Vec<ScalingRow>> {
    if k_max == 0 {
        return Err(Error::ParameterOutOfRange("k_max must be positive".into()));
    }
    let site = extremal_superposition(h)?;
    let mut rows = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let g = GeneratorSpec::new(h.clone(), k)?;
        g.total_dim()?;
        let ch = unitary_channel(&g)?;
        let product = density_from_pure(&product_state(&site, k)?)?;
        let entangled = density_from_pure(&extremal_entangled_state(h, k)?)?;

        let qfi_product = qfi_fd(&ch, &product, X0, dx)?;
        let qfi_entangled = qfi_fd(&ch, &entangled, X0, dx)?;
        let delta_product = delta_x_min(qfi_product, n).delta_x_min;
        let delta_entangled = delta_x_min(qfi_entangled, n).delta_x_min;
        let bp = bound_product(&g, n)?;
        let be = bound_entangled(&g, n)?;
        let rel_dev_product = delta_product / bp - 1.0;
        let rel_dev_entangled = delta_entangled / be - 1.0;
        let ratio = delta_entangled / delta_product;
        let ratio_expected = 1.0 / (k as f64).sqrt();
        rows.push(ScalingRow {
            k,
            qfi_product,
            qfi_entangled,
            delta_product,
            delta_entangled,
            bound_product: bp,
            bound_entangled: be,
            rel_dev_product,
            rel_dev_entangled,
            ratio,
            ratio_expected,
            within_tolerance: rel_dev_product.abs() <= SCALING_REL_TOL
                && rel_dev_entangled.abs() <= SCALING_REL_TOL
                && (ratio - ratio_expected).abs() <= SCALING_REL_TOL,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct WernerRow {
    pub q: f64,
    pub qfi_fd: f64,
    pub qfi_sld: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub delta_x_min: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WernerTable {
    pub k: usize,
    pub n: u64,
    pub bound_entangled: f64,
    pub rows: Vec<WernerRow>,
    /// Recorded only: whether the QFI never increases as `q` decreases.
    pub qfi_nonincreasing_as_q_decreases: bool,
}

/// `q |GHZ><GHZ| + (1 - q) I / 2^K` under the qubit phase family
/// `sigma_z / 2` on each of `K` sites.
pub fn werner_experiment(k: usize, q_grid: &[f64], n: u64, dx: f64) -> Result<WernerTable> {
    let g = GeneratorSpec::new(pauli_z().scale_real(0.5), k)?;
    let dim = g.total_dim()?;
    let ch = unitary_channel(&g)?;
    let ghz = extremal_entangled_state(g.h(), k)?.projector();
    let noise = DensityMatrix::maximally_mixed(dim);

    let mut rows = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::ParameterOutOfRange(format!("admixture q = {q} not in [0, 1]")));
        }
        let mut m = ghz.scale_real(q);
        m.add_scaled(noise.matrix(), C64::new(1.0 - q, 0.0));
        let rho0 = DensityMatrix::new(m)?;
        let fd = qfi_fd(&ch, &rho0, X0, dx)?;
        let sld = qfi_sld(&apply(&ch, &rho0, X0)?, &channel_derivative(&ch, &rho0, X0, dx)?)?;
        rows.push(WernerRow {
            q,
            qfi_fd: fd,
            qfi_sld: sld,
            delta_x_min: delta_x_min(fd.max(0.0), n).delta_x_min,
        });
    }

    let mut by_q: Vec<&WernerRow> = rows.iter().collect();
    by_q.sort_by(|a, b| a.q.total_cmp(&b.q));
    let monotone = by_q.windows(2).all(|w| w[0].qfi_fd <= w[1].qfi_fd + 1e-9);
    Ok(WernerTable {
        k,
        n,
        bound_entangled: bound_entangled(&g, n)?,
        rows,
        qfi_nonincreasing_as_q_decreases: monotone,
    })
}
