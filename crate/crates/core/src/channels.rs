//! Smooth parameter-dependent channels `x -> L_x`, given extensionally by
//! their Kraus operators at each `x`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{checked_power, eigh, ComplexMatrix, EigenSystem, C64, DEFAULT_DIM_CAP};
use crate::states::{DensityMatrix, TRACE_TOL};

/// Default central-difference step for x-derivatives.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Max-abs deviation of `sum_j K_j^dag K_j` from identity accepted as CPTP.
pub const CPTP_TOL: f64 = 1e-9;
/// Output trace deviation above which `apply` reports a CPTP violation.
const APPLY_TRACE_TOL: f64 = 1e-8;

type KrausFn = dyn Fn(f64) -> Result<Vec<ComplexMatrix>> + Send + Sync;

/// Parametrized linear map `rho -> sum_j K_j(x) rho K_j(x)^dag`.
///
/// The Kraus generator must be a pure function of `x`; channels are cheap to
/// clone and safe to evaluate concurrently.
#[derive(Clone)]
pub struct ParamChannel {
    dim: usize,
    kraus: Arc<KrausFn>,
    step: f64,
    label: String,
}

impl ParamChannel {
    pub fn new<F>(dim: usize, label: impl Into<String>, kraus: F) -> Self
    where
        F: Fn(f64) -> Result<Vec<ComplexMatrix>> + Send + Sync + 'static,
    {
        Self {
            dim,
            kraus: Arc::new(kraus),
            step: DEFAULT_STEP,
            label: label.into(),
        }
    }

    /// The x-independent identity channel.
    pub fn identity(dim: usize) -> Self {
        let id = ComplexMatrix::identity(dim);
        Self::new(dim, "identity", move |_| Ok(vec![id.clone()]))
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Default finite-difference step for this family.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kraus_at(&self, x: f64) -> Result<Vec<ComplexMatrix>> {
        let ks = (self.kraus)(x)?;
        if let Some(k) = ks.iter().find(|k| k.dim() != self.dim) {
            return Err(Error::DimensionMismatch(self.dim, k.dim()));
        }
        Ok(ks)
    }

    /// Raw linear action on an arbitrary operator, no validation.
    pub fn apply_operator(&self, m: &ComplexMatrix, x: f64) -> Result<ComplexMatrix> {
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, m.dim()));
        }
        let mut out = ComplexMatrix::zeros(self.dim);
        for k in self.kraus_at(x)? {
            let km = &k * m;
            out.add_scaled(&(&km * &k.adjoint()), C64::new(1.0, 0.0));
        }
        Ok(out)
    }
}

impl fmt::Debug for ParamChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamChannel")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("step", &self.step)
            .finish()
    }
}

/// Single-site generator `h` repeated over `sites` subsystems, with its
/// extreme eigenvalues.
#[derive(Clone, Debug)]
pub struct GeneratorSpec {
    h: ComplexMatrix,
    sites: usize,
    max_eigenvalue: f64,
    min_eigenvalue: f64,
}

impl GeneratorSpec {
    pub fn new(h: ComplexMatrix, sites: usize) -> Result<Self> {
        if sites == 0 {
            return Err(Error::ParameterOutOfRange("subsystem count must be positive".into()));
        }
        let es = eigh(&h)?;
        Ok(Self {
            h: h.hermitian_part(),
            sites,
            max_eigenvalue: es.max(),
            min_eigenvalue: es.min(),
        })
    }

    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.max_eigenvalue
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// `Lambda - lambda`.
    pub fn spectral_gap(&self) -> f64 {
        self.max_eigenvalue - self.min_eigenvalue
    }

    pub fn total_dim(&self) -> Result<usize> {
        checked_power(self.h.dim(), self.sites, DEFAULT_DIM_CAP)
    }

    /// `G = sum_i h_i` as a dense matrix.
    pub fn total_generator(&self) -> Result<ComplexMatrix> {
        self.h.site_sum(self.sites, DEFAULT_DIM_CAP)
    }
}

/// Unitary family `U(x) = exp(-i x sum_i h_i)`.
pub fn unitary_channel(g: &GeneratorSpec) -> Result<ParamChannel> {
    let total = g.total_generator()?;
    let es: Arc<EigenSystem> = Arc::new(eigh(&total)?);
    let dim = total.dim();
    Ok(ParamChannel::new(dim, format!("unitary(K={})", g.sites()), move |x| {
        Ok(vec![es.map_spectrum(|l| C64::from_polar(1.0, -x * l))])
    }))
}

/// `x -> (1 - gamma) L_x[rho] + gamma I / d`, realized with the Kraus set
/// `sqrt(1-gamma) K_j(x)` together with `sqrt(gamma / d) |a><b|`.
pub fn depolarizing_compose(ch: &ParamChannel, gamma: f64) -> Result<ParamChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::ParameterOutOfRange(format!("gamma {gamma} not in [0, 1]")));
    }
    let inner = ch.clone();
    let dim = ch.dim();
    let keep = (1.0 - gamma).sqrt();
    let flat = (gamma / dim as f64).sqrt();
    let label = format!("{}+depolarizing({gamma})", ch.label());
    let step = ch.step();
    Ok(ParamChannel::new(dim, label, move |x| {
        let mut ks = Vec::new();
        if keep > 0.0 {
            ks.extend(inner.kraus_at(x)?.into_iter().map(|k| k.scale_real(keep)));
        }
        if flat > 0.0 {
            for a in 0..dim {
                for b in 0..dim {
                    let mut e = ComplexMatrix::zeros(dim);
                    e[(a, b)] = C64::new(flat, 0.0);
                    ks.push(e);
                }
            }
        }
        Ok(ks)
    })
    .with_step(step))
}

/// `L_x[rho]`, validated as a density matrix.
pub fn apply(ch: &ParamChannel, rho: &DensityMatrix, x: f64) -> Result<DensityMatrix> {
    let mut out = ch.apply_operator(rho.matrix(), x)?;
    let tr = out.trace().re;
    if (tr - 1.0).abs() > APPLY_TRACE_TOL {
        return Err(Error::CptpViolation(tr - 1.0));
    }
    if (tr - 1.0).abs() > TRACE_TOL {
        out = out.scale_real(1.0 / tr);
    }
    DensityMatrix::new(out)
}

/// Central difference `(L_{x+dx}[rho] - L_{x-dx}[rho]) / (2 dx)`.
pub fn channel_derivative(ch: &ParamChannel, rho: &DensityMatrix, x: f64, dx: f64) -> Result<ComplexMatrix> {
    if dx.is_nan() || dx < 1e-12 {
        return Err(Error::StepTooSmall(dx));
    }
    let fwd = ch.apply_operator(rho.matrix(), x + dx)?;
    let bwd = ch.apply_operator(rho.matrix(), x - dx)?;
    Ok((&fwd - &bwd).scale_real(0.5 / dx).hermitian_part())
}

#[derive(Clone, Debug, Serialize)]
pub struct CptpReport {
    /// `(x, max-abs deviation of sum_j K_j^dag K_j from identity)`.
    pub deviations: Vec<(f64, f64)>,
    pub max_deviation: f64,
    pub passes: bool,
}

/// Probes trace preservation `sum_j K_j^dag K_j = I` at each `x`.
pub fn cptp_check(ch: &ParamChannel, probes: &[f64]) -> Result<CptpReport> {
    let id = ComplexMatrix::identity(ch.dim());
    let mut deviations = Vec::with_capacity(probes.len());
    for &x in probes {
        let mut sum = ComplexMatrix::zeros(ch.dim());
        for k in ch.kraus_at(x)? {
            sum.add_scaled(&(&k.adjoint() * &k), C64::new(1.0, 0.0));
        }
        deviations.push((x, sum.max_abs_diff(&id)));
    }
    let max_deviation = deviations.iter().map(|d| d.1).fold(0.0, f64::max);
    Ok(CptpReport {
        passes: max_deviation < CPTP_TOL,
        deviations,
        max_deviation,
    })
}

/// Max-abs defect of `L[a r1 + (1-a) r2] - (a L[r1] + (1-a) L[r2])`.
pub fn linearity_defect(ch: &ParamChannel, r1: &DensityMatrix, r2: &DensityMatrix, a: f64, x: f64) -> Result<f64> {
    let mixed = r1.convex_combination(r2, a)?;
    let lhs = ch.apply_operator(mixed.matrix(), x)?;
    let mut rhs = ch.apply_operator(r1.matrix(), x)?.scale_real(a);
    rhs.add_scaled(&ch.apply_operator(r2.matrix(), x)?, C64::new(1.0 - a, 0.0));
    Ok(lhs.max_abs_diff(&rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelKind {
    #[serde(rename = "unitary")]
    Unitary,
    #[serde(rename = "unitary+depolarizing")]
    UnitaryDepolarizing,
}

/// Channel description used by the CLI:
/// `{"kind": "unitary" | "unitary+depolarizing", "h": {matrix}, "K": n, "gamma": g}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub h: ComplexMatrix,
    #[serde(rename = "K")]
    pub sites: usize,
    #[serde(default)]
    pub gamma: f64,
}

impl ChannelSpec {
    pub fn generator(&self) -> Result<GeneratorSpec> {
        GeneratorSpec::new(self.h.clone(), self.sites)
    }

    pub fn build(&self) -> Result<ParamChannel> {
        let unitary = unitary_channel(&self.generator()?)?;
        match self.kind {
            ChannelKind::Unitary => Ok(unitary),
            ChannelKind::UnitaryDepolarizing => depolarizing_compose(&unitary, self.gamma),
        }
    }
}
