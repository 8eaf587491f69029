//! Dense complex linear algebra.
//!
//! Everything here works on small dense square matrices (dimension up to a
//! few thousand) stored row-major. The Hermitian eigensolver is a cyclic
//! complex Jacobi method and singular values come from one-sided (Hestenes)
//! Jacobi; both keep absolute errors near machine precision, which the
//! finite-difference fidelity curvature in [`crate::metrology`] depends on.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Max-abs deviation from Hermiticity tolerated (and then symmetrized away).
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Negative eigenvalues down to `-PSD_TOL` are treated as round-off and clamped.
pub const PSD_TOL: f64 = 1e-10;
/// Default cap on the dimension of dense operators (12 qubits).
pub const DEFAULT_DIM_CAP: usize = 4096;

const MAX_SWEEPS: usize = 100;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries; rejects empty, ragged or
    /// non-finite input.
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Malformed("matrix dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::Malformed(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Malformed("matrix has non-finite entries".into()));
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_real_diag(&vec![1.0; dim])
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from real row-major rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::Malformed("ragged rows".into()));
            }
            data.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self::new(dim, data)
    }

    /// The projector-like outer product `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        assert_eq!(u.len(), v.len(), "outer product of unequal lengths");
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &Self, s: C64) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-abs entry of `M - M^dag`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `(M + M^dag) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// `A B - B A`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Sum of `self` acting on each of `sites` tensor factors (identity
    /// elsewhere), i.e. `sum_i 1 ⊗ .. ⊗ h_i ⊗ .. ⊗ 1`.
    pub fn site_sum(&self, sites: usize, cap: usize) -> Result<Self> {
        let total = checked_power(self.dim, sites, cap)?;
        let d = self.dim;
        let mut out = Self::zeros(total);
        let mut stride = total;
        for _ in 0..sites {
            stride /= d;
            // Site with local index stride `stride`; h acts on digit (i / stride) % d.
            for i in 0..total {
                let di = (i / stride) % d;
                let base = i - di * stride;
                for dj in 0..d {
                    let h = self[(di, dj)];
                    if h != ZERO {
                        out[(i, base + dj * stride)] += h;
                    }
                }
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(&rhs.data[k * n..(k + 1) * n]) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// JSON interchange form: `{"dim": n, "re": [[..]], "im": [[..]]}`.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        let n = json.dim;
        if json.re.len() != n || json.im.len() != n {
            return Err(Error::Malformed(format!("expected {n} rows in re and im")));
        }
        let mut data = Vec::with_capacity(n * n);
        for (re_row, im_row) in json.re.iter().zip(&json.im) {
            if re_row.len() != n || im_row.len() != n {
                return Err(Error::Malformed(format!("expected rows of length {n}")));
            }
            data.extend(re_row.iter().zip(im_row).map(|(&r, &i)| C64::new(r, i)));
        }
        ComplexMatrix::new(n, data)
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        let n = m.dim;
        let re = (0..n).map(|i| m.row(i).iter().map(|z| z.re).collect()).collect();
        let im = (0..n).map(|i| m.row(i).iter().map(|z| z.im).collect()).collect();
        MatrixJson { dim: n, re, im }
    }
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| if i != j { ONE } else { ZERO })
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::new(2, vec![ZERO, -I, I, ZERO]).expect("finite")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&[1.0, -1.0])
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenSystem {
    /// `V f(diag(lambda)) V^dag`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.eigenvectors.dim();
        let v = &self.eigenvectors;
        let fl: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .filter(|&k| fl[k] != ZERO)
                .map(|k| v[(i, k)] * fl[k] * v[(j, k)].conj())
                .sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| C64::new(l, 0.0))
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }
}

/// Unitary 2x2 rotation `G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]` that
/// diagonalizes the Hermitian block `[[alpha, beta], [conj(beta), gamma]]`
/// by `G^dag B G`.
#[derive(Clone, Copy)]
struct Rotation {
    pp: C64,
    pq: C64,
    qp: C64,
    qq: C64,
}

impl Rotation {
    fn diagonalizing(alpha: f64, beta: C64, gamma: f64) -> Self {
        let mag = beta.norm();
        let phase = (beta / mag).conj();
        let tau = (gamma - alpha) / (2.0 * mag);
        let t = if tau >= 0.0 {
            1.0 / (tau + (1.0 + tau * tau).sqrt())
        } else {
            -1.0 / (-tau + (1.0 + tau * tau).sqrt())
        };
        let c = 1.0 / (1.0 + t * t).sqrt();
        let s = t * c;
        Rotation {
            pp: C64::new(c, 0.0),
            pq: C64::new(s, 0.0),
            qp: phase * -s,
            qq: phase * c,
        }
    }

    /// Columns `p, q` of `a` (row-major, `n x n`) right-multiplied by `G`.
    fn apply_right(&self, a: &mut [C64], n: usize, p: usize, q: usize) {
        for k in 0..n {
            let akp = a[k * n + p];
            let akq = a[k * n + q];
            a[k * n + p] = akp * self.pp + akq * self.qp;
            a[k * n + q] = akp * self.pq + akq * self.qq;
        }
    }

    /// Rows `p, q` of `a` left-multiplied by `G^dag`.
    fn apply_left_adjoint(&self, a: &mut [C64], n: usize, p: usize, q: usize) {
        let (pp, pq, qp, qq) = (self.pp.conj(), self.pq.conj(), self.qp.conj(), self.qq.conj());
        for k in 0..n {
            let apk = a[p * n + k];
            let aqk = a[q * n + k];
            a[p * n + k] = pp * apk + qp * aqk;
            a[q * n + k] = pq * apk + qq * aqk;
        }
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Inputs within [`HERMITIAN_TOL`] of Hermitian are symmetrized first; larger
/// deviations are rejected. The result satisfies `V^dag V = 1` and
/// `V diag(lambda) V^dag = M` to roughly `n * eps * ||M||`.
pub fn eigh(m: &ComplexMatrix) -> Result<EigenSystem> {
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let n = m.dim();
    let mut a = m.hermitian_part().data;
    let mut v = ComplexMatrix::identity(n).data;
    let frob = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let abs_floor = 1e-2 * f64::EPSILON * frob;

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = a[p * n + q];
                let mag = beta.norm();
                let alpha = a[p * n + p].re;
                let gamma = a[q * n + q].re;
                if mag <= abs_floor || mag <= f64::EPSILON * (alpha * gamma).abs().sqrt() {
                    continue;
                }
                let g = Rotation::diagonalizing(alpha, beta, gamma);
                g.apply_right(&mut a, n, p, q);
                g.apply_left_adjoint(&mut a, n, p, q);
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                g.apply_right(&mut v, n, p, q);
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps (dim {n})"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let eigenvalues = order.iter().map(|&k| a[k * n + k].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, j| v[i * n + order[j]]);
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Principal square root of a positive semi-definite matrix; eigenvalues in
/// `[-PSD_TOL, 0)` are clamped to zero.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let es = eigh(m)?;
    sqrt_from_eigen(&es)
}

pub(crate) fn sqrt_from_eigen(es: &EigenSystem) -> Result<ComplexMatrix> {
    if es.min() < -PSD_TOL {
        return Err(Error::NotPsd(es.min()));
    }
    // Round-off eigenvalues of either sign would otherwise contribute
    // sqrt(eps)-sized terms.
    let n = es.eigenvalues.len() as f64;
    let dust = 4.0 * n * f64::EPSILON * es.max().abs().max(es.min().abs());
    Ok(es.map_spectrum(|l| {
        if l <= dust {
            C64::new(0.0, 0.0)
        } else {
            C64::new(l.sqrt(), 0.0)
        }
    }))
}

/// One-sided Jacobi on the columns of `m`: returns `m V` (row-major, with
/// mutually orthogonal columns) and, if requested, the accumulated unitary `V`.
fn one_sided_jacobi(m: &ComplexMatrix, accumulate: bool) -> Result<(Vec<C64>, Option<Vec<C64>>)> {
    let n = m.dim();
    let mut u = m.data.clone();
    let mut v = accumulate.then(|| ComplexMatrix::identity(n).data);
    let frob_sq: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    let abs_floor = 1e-2 * f64::EPSILON * f64::EPSILON * frob_sq;
    let col_gram = |u: &[C64], p: usize, q: usize| -> (f64, C64, f64) {
        let mut alpha = 0.0;
        let mut gamma = 0.0;
        let mut beta = ZERO;
        for k in 0..n {
            let up = u[k * n + p];
            let uq = u[k * n + q];
            alpha += up.norm_sqr();
            gamma += uq.norm_sqr();
            beta += up.conj() * uq;
        }
        (alpha, beta, gamma)
    };

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = col_gram(&u, p, q);
                let mag = beta.norm();
                if mag <= abs_floor || mag <= f64::EPSILON * (alpha * gamma).sqrt() {
                    continue;
                }
                let g = Rotation::diagonalizing(alpha, beta, gamma);
                g.apply_right(&mut u, n, p, q);
                if let Some(v) = v.as_mut() {
                    g.apply_right(v, n, p, q);
                }
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "one-sided Jacobi SVD did not converge in {MAX_SWEEPS} sweeps (dim {n})"
        )));
    }
    Ok((u, v))
}

fn column_norms(u: &[C64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| (0..n).map(|k| u[k * n + j].norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

/// Singular values (unordered) via one-sided Jacobi on the columns of `m`.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let (u, _) = one_sided_jacobi(m, false)?;
    Ok(column_norms(&u, m.dim()))
}

/// Unitary factor `U` of the polar decomposition `M = U P` with `P = (M^dag M)^{1/2}`,
/// so that `tr(U^dag M) = ||M||_1`. On the null space of `M` the factor is
/// completed with an arbitrary orthonormal set.
pub fn polar_unitary(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.dim();
    let (mv, v) = one_sided_jacobi(m, true)?;
    let v = ComplexMatrix {
        dim: n,
        data: v.expect("rotation accumulated"),
    };
    let sv = column_norms(&mv, n);
    let cutoff = n as f64 * f64::EPSILON * sv.iter().copied().fold(0.0, f64::max);

    // Left singular vectors, column by column.
    let mut cols: Vec<Option<Vec<C64>>> = (0..n)
        .map(|j| (sv[j] > cutoff).then(|| (0..n).map(|k| mv[k * n + j] / sv[j]).collect()))
        .collect();
    for j in 0..n {
        if cols[j].is_some() {
            continue;
        }
        let basis: Vec<Vec<C64>> = cols.iter().flatten().cloned().collect();
        let orthogonalize = |mut w: Vec<C64>| {
            for _ in 0..2 {
                for b in &basis {
                    let c = inner(b, &w);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            w
        };
        let best = (0..n)
            .map(|k| orthogonalize((0..n).map(|i| if i == k { ONE } else { ZERO }).collect()))
            .max_by(|a, b| norm_sqr(a).total_cmp(&norm_sqr(b)))
            .expect("dimension is positive");
        let scale = norm_sqr(&best).sqrt();
        cols[j] = Some(best.into_iter().map(|x| x / scale).collect());
    }
    let u = ComplexMatrix::from_fn(n, |i, j| cols[j].as_ref().expect("completed")[i]);
    Ok(&u * &v.adjoint())
}

/// Trace norm `tr sqrt(A A^dag)`, the sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    let mut sv = singular_values(m)?;
    // Sum small to large.
    sv.sort_by(f64::total_cmp);
    Ok(sv.iter().sum())
}

/// `exp(-i t H)` for Hermitian `H`, via its eigendecomposition.
pub fn expm_i_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let es = eigh(h)?;
    Ok(es.map_spectrum(|l| C64::from_polar(1.0, -t * l)))
}

/// Kronecker product under the default dimension cap.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    tensor_with_cap(a, b, DEFAULT_DIM_CAP)
}

pub fn tensor_with_cap(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let (da, db) = (a.dim(), b.dim());
    let dim = da
        .checked_mul(db)
        .filter(|&d| d <= cap)
        .ok_or(Error::DimensionOverflow {
            dim: da.saturating_mul(db),
            cap,
        })?;
    Ok(ComplexMatrix::from_fn(dim, |i, j| {
        a[(i / db, j / db)] * b[(i % db, j % db)]
    }))
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// `<a|b>`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `base^exp`, rejected if it exceeds `cap`.
pub fn checked_power(base: usize, exp: usize, cap: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..exp {
        dim = dim
            .checked_mul(base)
            .filter(|&d| d <= cap)
            .ok_or(Error::DimensionOverflow {
                dim: usize::MAX,
                cap,
            })?;
    }
    if dim > cap {
        return Err(Error::DimensionOverflow { dim, cap });
    }
    Ok(dim)
}
