//! Pure states, density matrices and pure-state decompositions.
//!
//! Random constructors are deterministic functions of an explicit `u64`
//! seed, drawn from a ChaCha8 stream; each also has a `*_with` form that
//! takes the generator directly so one trial can draw many objects from a
//! single stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, eigh, inner, kron_vec, norm_sqr, ComplexMatrix, EigenSystem, C64, DEFAULT_DIM_CAP,
    HERMITIAN_TOL, PSD_TOL, ZERO,
};

pub const NORM_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const WEIGHT_TOL: f64 = 1e-10;
/// Decomposition terms with weight below this are dropped.
pub const ZERO_WEIGHT: f64 = 1e-14;
/// Eigenvalues at or below this count as outside the support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// Negative eigenvalues above this are zeroed in the cached spectrum only;
/// rebuilding the matrix would perturb it more than the clamp itself.
const CLAMP_REBUILD: f64 = 1e-14;

/// The generator every randomized routine draws from.
pub type StateRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> StateRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Unit-norm state vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VectorJson", into = "VectorJson")]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Wraps already-normalized amplitudes.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Malformed("state vector must be nonempty".into()));
        }
        let n2 = norm_sqr(&amplitudes);
        if !n2.is_finite() || (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let n2 = norm_sqr(&amplitudes);
        if amplitudes.is_empty() || !n2.is_finite() || n2 == 0.0 {
            return Err(Error::NotNormalized(n2));
        }
        let inv = 1.0 / n2.sqrt();
        amplitudes.iter_mut().for_each(|z| *z *= inv);
        Ok(Self { amplitudes })
    }

    /// Computational basis state `|k>` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index out of range");
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[k] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    /// `(|0> + |1>) / sqrt 2`.
    pub fn plus() -> Self {
        let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { amplitudes: vec![a, a] }
    }

    /// `(|0> - |1>) / sqrt 2`.
    pub fn minus() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            amplitudes: vec![C64::new(a, 0.0), C64::new(-a, 0.0)],
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &PureState) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// `<psi|A|psi>`.
    pub fn expectation(&self, a: &ComplexMatrix) -> C64 {
        inner(&self.amplitudes, &a.mul_vec(&self.amplitudes))
    }

    /// `|psi><psi|` without validation.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    /// Reduced density matrix of the leading factor of dimension `left_dim`.
    pub fn reduced_left(&self, left_dim: usize) -> Result<ComplexMatrix> {
        let n = self.dim();
        if left_dim == 0 || !n.is_multiple_of(left_dim) {
            return Err(Error::DimensionMismatch(n, left_dim));
        }
        let right = n / left_dim;
        let a = &self.amplitudes;
        Ok(ComplexMatrix::from_fn(left_dim, |i, j| {
            (0..right).map(|k| a[i * right + k] * a[j * right + k].conj()).sum()
        }))
    }
}

#[derive(Serialize, Deserialize)]
struct VectorJson {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<VectorJson> for PureState {
    type Error = Error;

    fn try_from(json: VectorJson) -> Result<Self> {
        if json.re.len() != json.im.len() {
            return Err(Error::Malformed("re and im lengths differ".into()));
        }
        PureState::new(json.re.iter().zip(&json.im).map(|(&r, &i)| C64::new(r, i)).collect())
    }
}

impl From<PureState> for VectorJson {
    fn from(s: PureState) -> Self {
        VectorJson {
            re: s.amplitudes.iter().map(|z| z.re).collect(),
            im: s.amplitudes.iter().map(|z| z.im).collect(),
        }
    }
}

/// Hermitian, positive semi-definite, unit-trace operator.
///
/// The eigendecomposition computed during validation is kept, with
/// round-off negative eigenvalues clamped to zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    spectrum: EigenSystem,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dev = matrix.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let mut matrix = matrix.hermitian_part();
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let mut spectrum = eigh(&matrix)?;
        let min = spectrum.min();
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        if min < 0.0 {
            spectrum.eigenvalues.iter_mut().for_each(|l| *l = l.max(0.0));
            if min < -CLAMP_REBUILD {
                matrix = spectrum.reconstruct();
            }
        }
        Ok(Self { matrix, spectrum })
    }

    /// Maximally mixed state `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
            .expect("I/d is a density matrix")
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Eigensystem with clamped eigenvalues, ascending.
    pub fn spectrum(&self) -> &EigenSystem {
        &self.spectrum
    }

    pub fn purity(&self) -> f64 {
        self.spectrum.eigenvalues.iter().map(|l| l * l).sum()
    }

    /// Number of eigenvalues above [`SUPPORT_CUTOFF`].
    pub fn rank(&self) -> usize {
        self.spectrum
            .eigenvalues
            .iter()
            .filter(|&&l| l > SUPPORT_CUTOFF)
            .count()
    }

    /// `V rho V^dag`, revalidated.
    pub fn conjugate(&self, v: &ComplexMatrix) -> Result<Self> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch(v.dim(), self.dim()));
        }
        Self::new(&(v * &self.matrix) * &v.adjoint())
    }

    /// `a * self + (1 - a) * other`.
    pub fn convex_combination(&self, other: &Self, a: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::ParameterOutOfRange(format!("mixing weight {a} not in [0, 1]")));
        }
        let mut m = self.matrix.scale_real(a);
        m.add_scaled(&other.matrix, C64::new(1.0 - a, 0.0));
        Self::new(m)
    }
}

impl TryFrom<ComplexMatrix> for DensityMatrix {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<DensityMatrix> for ComplexMatrix {
    fn from(d: DensityMatrix) -> Self {
        d.matrix
    }
}

/// Ensemble `{p_i, |psi_i>}` with `rho = sum_i p_i |psi_i><psi_i|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DecompositionJson", into = "DecompositionJson")]
pub struct Decomposition {
    weights: Vec<f64>,
    states: Vec<PureState>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionJson {
    weights: Vec<f64>,
    states: Vec<PureState>,
}

impl TryFrom<DecompositionJson> for Decomposition {
    type Error = Error;

    fn try_from(json: DecompositionJson) -> Result<Self> {
        Decomposition::new(json.weights, json.states)
    }
}

impl From<Decomposition> for DecompositionJson {
    fn from(d: Decomposition) -> Self {
        DecompositionJson {
            weights: d.weights,
            states: d.states,
        }
    }
}

impl Decomposition {
    pub fn new(weights: Vec<f64>, states: Vec<PureState>) -> Result<Self> {
        if weights.is_empty() || weights.len() != states.len() {
            return Err(Error::Malformed(format!(
                "{} weights for {} states",
                weights.len(),
                states.len()
            )));
        }
        let dim = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch(dim, s.dim()));
        }
        if let Some(&p) = weights.iter().find(|&&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidWeight(p));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::WeightMismatch(total));
        }
        Ok(Self { weights, states })
    }

    /// Single-term decomposition of a pure state.
    pub fn pure(state: PureState) -> Self {
        Self {
            weights: vec![1.0],
            states: vec![state],
        }
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &PureState)> {
        self.weights.iter().copied().zip(&self.states)
    }
}

/// `|psi><psi|`.
pub fn density_from_pure(psi: &PureState) -> Result<DensityMatrix> {
    let n2 = norm_sqr(psi.amplitudes());
    if (n2 - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n2));
    }
    DensityMatrix::new(psi.projector())
}

/// `sum_i p_i |psi_i><psi_i|`.
pub fn mix(d: &Decomposition) -> Result<DensityMatrix> {
    let total: f64 = d.weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::WeightMismatch(total));
    }
    let n = d.dim();
    let mut m = ComplexMatrix::zeros(n);
    for (p, psi) in d.iter() {
        let a = psi.amplitudes();
        for i in 0..n {
            let ai = a[i] * p;
            for j in 0..n {
                m[(i, j)] += ai * a[j].conj();
            }
        }
    }
    DensityMatrix::new(m)
}

/// `phi^{⊗K}` under the default dimension cap.
pub fn product_state(phi: &PureState, k: usize) -> Result<PureState> {
    product_state_with_cap(phi, k, DEFAULT_DIM_CAP)
}

pub fn product_state_with_cap(phi: &PureState, k: usize, cap: usize) -> Result<PureState> {
    if k == 0 {
        return Err(Error::ParameterOutOfRange("subsystem count must be positive".into()));
    }
    linalg::checked_power(phi.dim(), k, cap)?;
    let mut amps = phi.amplitudes().to_vec();
    for _ in 1..k {
        amps = kron_vec(&amps, phi.amplitudes());
    }
    PureState::normalized(amps)
}

/// Eigenvector with a canonical global phase: the first entry of maximal
/// modulus is made real and positive.
fn canonical_phase(mut v: Vec<C64>) -> Vec<C64> {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(lead) = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-12)).copied() {
        let phase = lead.conj() / lead.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
    v
}

/// An eigenvalue with its eigenvector.
pub(crate) type EigenPair = (f64, Vec<C64>);

/// Extreme eigenvalues `(Lambda, lambda)` of `h` with their eigenvectors.
pub(crate) fn extreme_eigenpairs(h: &ComplexMatrix) -> Result<(EigenPair, EigenPair)> {
    let es = eigh(h)?;
    let top = es.eigenvalues.len() - 1;
    Ok((
        (es.max(), canonical_phase(es.eigenvector(top))),
        (es.min(), canonical_phase(es.eigenvector(0))),
    ))
}

/// GHZ-type state `(|e_max>^{⊗K} + |e_min>^{⊗K}) / sqrt 2` built from the
/// eigenvectors of `h` for its largest and smallest eigenvalues.
pub fn extremal_entangled_state(h: &ComplexMatrix, k: usize) -> Result<PureState> {
    extremal_entangled_state_with_cap(h, k, DEFAULT_DIM_CAP)
}

pub fn extremal_entangled_state_with_cap(h: &ComplexMatrix, k: usize, cap: usize) -> Result<PureState> {
    if k == 0 {
        return Err(Error::ParameterOutOfRange("subsystem count must be positive".into()));
    }
    linalg::checked_power(h.dim(), k, cap)?;
    let ((hi, e_hi), (lo, e_lo)) = extreme_eigenpairs(h)?;
    if hi - lo < 1e-12 {
        return Err(Error::DegenerateSpectrum(hi - lo));
    }
    let power = |e: &[C64]| {
        let mut v = e.to_vec();
        for _ in 1..k {
            v = kron_vec(&v, e);
        }
        v
    };
    let a = power(&e_hi);
    let b = power(&e_lo);
    PureState::normalized(a.iter().zip(&b).map(|(x, y)| x + y).collect())
}

/// Equal superposition of the two extreme eigenvectors of `h` (the optimal
/// single-site probe).
pub fn extremal_superposition(h: &ComplexMatrix) -> Result<PureState> {
    extremal_entangled_state(h, 1)
}

pub fn random_pure(dim: usize, seed: u64) -> PureState {
    random_pure_with(dim, &mut rng_from_seed(seed))
}

/// Haar-random pure state: a normalized complex-normal vector.
pub fn random_pure_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    assert!(dim >= 1, "dimension must be at least 1");
    loop {
        let v: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
        if let Ok(s) = PureState::normalized(v) {
            return s;
        }
    }
}

pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(dim, rank, &mut rng_from_seed(seed))
}

/// Ginibre-ensemble density matrix `G G^dag / tr(G G^dag)` with `G` of
/// shape `dim x rank`.
pub fn random_density_with<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::ParameterOutOfRange(format!(
            "rank {rank} must be in 1..={dim}"
        )));
    }
    let g: Vec<C64> = (0..dim * rank).map(|_| complex_normal(rng)).collect();
    let mut m = ComplexMatrix::from_fn(dim, |i, j| {
        (0..rank).map(|k| g[i * rank + k] * g[j * rank + k].conj()).sum()
    });
    let tr = m.trace().re;
    m = m.scale_real(1.0 / tr);
    DensityMatrix::new(m)
}

pub fn random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    random_unitary_with(dim, &mut rng_from_seed(seed))
}

/// Haar-random unitary from modified Gram-Schmidt on a complex-normal matrix.
pub fn random_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    assert!(dim >= 1, "dimension must be at least 1");
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut c: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
        // Two passes keep the columns orthonormal to ~eps.
        for _ in 0..2 {
            for prev in &cols {
                let proj = inner(prev, &c);
                c.iter_mut().zip(prev).for_each(|(x, &p)| *x -= proj * p);
            }
        }
        let nrm = norm_sqr(&c).sqrt();
        if nrm > 1e-8 {
            cols.push(c.into_iter().map(|x| x / nrm).collect());
        }
    }
    ComplexMatrix::from_fn(dim, |i, j| cols[j][i])
}

/// Spectral decomposition: eigenvalues above [`SUPPORT_CUTOFF`] and their
/// eigenvectors. Degenerate eigenspaces come back in an arbitrary
/// orthonormal basis.
pub fn eigen_decomposition(rho: &DensityMatrix) -> Decomposition {
    let es = rho.spectrum();
    let mut weights = Vec::new();
    let mut states = Vec::new();
    for (k, &l) in es.eigenvalues.iter().enumerate().rev() {
        if l > SUPPORT_CUTOFF {
            weights.push(l);
            states.push(PureState {
                amplitudes: es.eigenvector(k),
            });
        }
    }
    // Renormalize against clamping and the dropped tail.
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|p| *p /= total);
    Decomposition { weights, states }
}

/// Re-mixes a decomposition through the columns of `v`:
/// `sqrt(q_j) |phi_j> = sum_i v[j][i] sqrt(p_i) |psi_i>`.
///
/// `v` is `m x m` with `m >= d.len()`; only its first `d.len()` columns are
/// used and they must be orthonormal. Terms with `q_j` below [`ZERO_WEIGHT`]
/// are dropped.
pub fn unitary_mixed_decomposition(d: &Decomposition, v: &ComplexMatrix) -> Result<Decomposition> {
    let r = d.len();
    let m = v.dim();
    if m < r {
        return Err(Error::DimensionMismatch(m, r));
    }
    let mut dev = 0.0f64;
    for a in 0..r {
        for b in a..r {
            let g: C64 = (0..m).map(|j| v[(j, a)].conj() * v[(j, b)]).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            dev = dev.max((g - want).norm());
        }
    }
    if dev > 1e-10 {
        return Err(Error::NotIsometry(dev));
    }

    let n = d.dim();
    let sqrt_p: Vec<f64> = d.weights.iter().map(|p| p.sqrt()).collect();
    let mut weights = Vec::with_capacity(m);
    let mut states = Vec::with_capacity(m);
    for j in 0..m {
        let mut amp = vec![ZERO; n];
        for (i, psi) in d.states.iter().enumerate() {
            let c = v[(j, i)] * sqrt_p[i];
            amp.iter_mut().zip(psi.amplitudes()).for_each(|(x, &y)| *x += c * y);
        }
        let q = norm_sqr(&amp);
        if q < ZERO_WEIGHT {
            continue;
        }
        weights.push(q);
        states.push(PureState::normalized(amp)?);
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|q| *q /= total);
    Decomposition::new(weights, states)
}

/// Random ensemble for `rho` with `terms` members: the spectral
/// decomposition re-mixed through a Haar-random `terms x terms` unitary.
pub fn random_decomposition_with<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    terms: usize,
    rng: &mut R,
) -> Result<Decomposition> {
    let base = eigen_decomposition(rho);
    if terms < base.len() {
        return Err(Error::ParameterOutOfRange(format!(
            "{terms} terms cannot realize a rank-{} state",
            base.len()
        )));
    }
    let v = random_unitary_with(terms, rng);
    unitary_mixed_decomposition(&base, &v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z};

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.max_abs_diff(b) < tol
    }

    #[test]
    fn density_from_pure_examples() {
        let r0 = density_from_pure(&PureState::basis(2, 0)).unwrap();
        assert_eq!(r0.matrix(), &ComplexMatrix::from_real_diag(&[1.0, 0.0]));
        let rp = density_from_pure(&PureState::plus()).unwrap();
        let half = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!(close(rp.matrix(), &half, 1e-15));
        let psi = random_pure(5, 9);
        let r = density_from_pure(&psi).unwrap();
        assert!(close(&(r.matrix() * r.matrix()), r.matrix(), 1e-10));
        assert_eq!(r.rank(), 1);
    }

    #[test]
    fn pure_state_rejects_unnormalized() {
        let v = vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        assert!(matches!(PureState::new(v), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn density_validation_errors() {
        let bad_trace = ComplexMatrix::from_real_diag(&[0.5, 0.6]);
        assert!(matches!(DensityMatrix::new(bad_trace), Err(Error::InvalidTrace(_))));
        let neg = ComplexMatrix::from_real_diag(&[1.1, -0.1]);
        assert!(matches!(DensityMatrix::new(neg), Err(Error::NotPsd(_))));
        let nh = ComplexMatrix::from_real_rows(&[&[0.5, 0.1], &[0.0, 0.5]]).unwrap();
        assert!(matches!(DensityMatrix::new(nh), Err(Error::NotHermitian(_))));
        let dust = ComplexMatrix::from_real_diag(&[1.0 + 5e-11, -5e-11]);
        let d = DensityMatrix::new(dust).unwrap();
        assert!(d.spectrum().eigenvalues.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn mix_examples() {
        let z0 = PureState::basis(2, 0);
        let z1 = PureState::basis(2, 1);
        let half_id = ComplexMatrix::identity(2).scale_real(0.5);

        let single = mix(&Decomposition::pure(z0.clone())).unwrap();
        assert_eq!(single.matrix(), &ComplexMatrix::from_real_diag(&[1.0, 0.0]));

        let d = Decomposition::new(vec![0.5, 0.5], vec![z0, z1]).unwrap();
        assert!(close(mix(&d).unwrap().matrix(), &half_id, 1e-15));

        let d = Decomposition::new(vec![0.5, 0.5], vec![PureState::plus(), PureState::minus()]).unwrap();
        assert!(close(mix(&d).unwrap().matrix(), &half_id, 1e-15));
    }

    #[test]
    fn decomposition_weight_errors() {
        let s = vec![PureState::basis(2, 0), PureState::basis(2, 1)];
        assert!(matches!(
            Decomposition::new(vec![0.5, 0.6], s.clone()),
            Err(Error::WeightMismatch(_))
        ));
        assert!(matches!(
            Decomposition::new(vec![1.5, -0.5], s),
            Err(Error::InvalidWeight(_))
        ));
    }

    #[test]
    fn product_state_examples() {
        let s = product_state(&PureState::basis(2, 0), 3).unwrap();
        assert_eq!(s, PureState::basis(8, 0));
        let s = product_state(&PureState::plus(), 2).unwrap();
        assert!(s.amplitudes().iter().all(|z| (z - C64::new(0.5, 0.0)).norm() < 1e-15));
        let phi = random_pure(3, 1);
        assert_eq!(product_state(&phi, 1).unwrap(), phi);
        assert!(matches!(
            product_state(&PureState::plus(), 13),
            Err(Error::DimensionOverflow { .. })
        ));
    }

    #[test]
    fn product_state_has_pure_marginals() {
        let phi = random_pure(2, 4);
        for k in 2..=4 {
            let psi = product_state(&phi, k).unwrap();
            for cut in 1..k {
                let red = psi.reduced_left(1 << cut).unwrap();
                let purity = (&red * &red).trace().re;
                assert!((purity - 1.0).abs() < 1e-9, "k={k} cut={cut}: {purity}");
            }
        }
    }

    #[test]
    fn extremal_state_examples() {
        let hz = pauli_z().scale_real(0.5);
        let s = 0.5f64.sqrt();
        let ghz = extremal_entangled_state(&hz, 2).unwrap();
        let want = [s, 0.0, 0.0, s];
        for (z, w) in ghz.amplitudes().iter().zip(want) {
            assert!((z - C64::new(w, 0.0)).norm() < 1e-15);
        }
        let k1 = extremal_entangled_state(&hz, 1).unwrap();
        assert!((k1.overlap(&PureState::plus()).norm() - 1.0).abs() < 1e-15);

        // sigma_x / 2: eigenvectors |+>, |->; expect (|++> + |-->) / sqrt 2.
        let hx = pauli_x().scale_real(0.5);
        let got = extremal_entangled_state(&hx, 2).unwrap();
        let pp = kron_vec(PureState::plus().amplitudes(), PureState::plus().amplitudes());
        let mm = kron_vec(PureState::minus().amplitudes(), PureState::minus().amplitudes());
        let want = PureState::normalized(pp.iter().zip(&mm).map(|(a, b)| a + b).collect()).unwrap();
        assert!((got.overlap(&want).norm() - 1.0).abs() < 1e-12);
        // Same as the GHZ state in the rotated basis: (|00> + |11>) / sqrt 2.
        let want_amps = [s, 0.0, 0.0, s];
        for (z, w) in got.amplitudes().iter().zip(want_amps) {
            assert!((z - C64::new(w, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn extremal_state_rejects_degenerate_generator() {
        let h = ComplexMatrix::identity(2);
        assert!(matches!(
            extremal_entangled_state(&h, 2),
            Err(Error::DegenerateSpectrum(_))
        ));
    }

    #[test]
    fn extremal_state_single_site_marginal_is_maximally_mixed() {
        let hz = pauli_z().scale_real(0.5);
        for k in 2..=5 {
            let ghz = extremal_entangled_state(&hz, k).unwrap();
            let red = ghz.reduced_left(2).unwrap();
            let es = eigh(&red).unwrap();
            assert!((es.eigenvalues[0] - 0.5).abs() < 1e-10);
            assert!((es.eigenvalues[1] - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn random_pure_is_deterministic_and_haar_like() {
        assert_eq!(random_pure(6, 77), random_pure(6, 77));
        assert_ne!(random_pure(6, 77), random_pure(6, 78));
        let one = random_pure(1, 3);
        assert!((one.amplitudes()[0].norm() - 1.0).abs() < 1e-15);

        let mut rng = rng_from_seed(2024);
        let draws = 10_000;
        let mean: f64 = (0..draws)
            .map(|_| random_pure_with(4, &mut rng).amplitudes()[0].norm_sqr())
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 0.25).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn random_density_examples() {
        let one = random_density(1, 1, 5).unwrap();
        assert!((one.matrix()[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);

        let pure = random_density(5, 1, 6).unwrap();
        assert!(close(&(pure.matrix() * pure.matrix()), pure.matrix(), 1e-10));

        let mut rng = rng_from_seed(7);
        let mut total = 0.0;
        for _ in 0..1000 {
            let r = random_density_with(4, 4, &mut rng).unwrap();
            total += r.spectrum().eigenvalues.iter().sum::<f64>();
        }
        assert!((total / 4000.0 - 0.25).abs() < 1e-12);

        for rank in 1..=6 {
            assert_eq!(random_density(6, rank, rank as u64).unwrap().rank(), rank);
        }
        assert!(random_density(3, 4, 0).is_err());
    }

    #[test]
    fn eigen_decomposition_round_trips() {
        let half = DensityMatrix::maximally_mixed(2);
        let d = eigen_decomposition(&half);
        assert_eq!(d.len(), 2);
        assert!(d.weights().iter().all(|&p| (p - 0.5).abs() < 1e-15));

        let proj = density_from_pure(&random_pure(4, 1)).unwrap();
        let d = eigen_decomposition(&proj);
        assert_eq!(d.len(), 1);
        assert!((d.weights()[0] - 1.0).abs() < 1e-15);

        for (dim, seed) in [(2, 1), (5, 2), (16, 3), (32, 4)] {
            let rho = random_density(dim, dim, seed).unwrap();
            let back = mix(&eigen_decomposition(&rho)).unwrap();
            assert!(close(back.matrix(), rho.matrix(), 1e-9));
        }
    }

    #[test]
    fn unitary_mixing_examples() {
        let z = Decomposition::new(vec![0.5, 0.5], vec![PureState::basis(2, 0), PureState::basis(2, 1)]).unwrap();
        let same = unitary_mixed_decomposition(&z, &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(same.weights(), z.weights());
        for (a, b) in same.states().iter().zip(z.states()) {
            assert!(close(&a.projector(), &b.projector(), 1e-15));
        }

        let s = 0.5f64.sqrt();
        let hadamard = ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]]).unwrap();
        let had = unitary_mixed_decomposition(&z, &hadamard).unwrap();
        assert!(had.weights().iter().all(|&p| (p - 0.5).abs() < 1e-15));
        assert!((had.states()[0].overlap(&PureState::plus()).norm() - 1.0).abs() < 1e-15);
        assert!((had.states()[1].overlap(&PureState::minus()).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unitary_mixing_preserves_state_and_pads() {
        let mut rng = rng_from_seed(99);
        for (dim, rank, extra) in [(4, 2, 0), (4, 3, 2), (8, 4, 3), (8, 1, 3)] {
            let rho = random_density_with(dim, rank, &mut rng).unwrap();
            let d = random_decomposition_with(&rho, rank + extra, &mut rng).unwrap();
            assert!(d.len() <= rank + extra);
            assert!(close(mix(&d).unwrap().matrix(), rho.matrix(), 1e-9));
        }
    }

    #[test]
    fn unitary_mixing_rejects_non_isometry() {
        let z = Decomposition::new(vec![0.5, 0.5], vec![PureState::basis(2, 0), PureState::basis(2, 1)]).unwrap();
        let bad = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(
            unitary_mixed_decomposition(&z, &bad),
            Err(Error::NotIsometry(_))
        ));
    }

    #[test]
    fn random_unitary_is_unitary() {
        let u = random_unitary(7, 3);
        assert!(close(&(&u.adjoint() * &u), &ComplexMatrix::identity(7), 1e-12));
    }

    #[test]
    fn decomposition_json_round_trip() {
        let d = random_decomposition_with(&random_density(3, 2, 8).unwrap(), 3, &mut rng_from_seed(1)).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.starts_with(r#"{"weights":["#));
        let back: Decomposition = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }
}
