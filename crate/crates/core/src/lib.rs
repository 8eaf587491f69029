//! # mixbound
//!
//! Sensitivity bounds for quantum parameter estimation with pure and mixed
//! probe states.
//!
//! - [`linalg`]: dense complex matrices, Hermitian eigendecomposition, PSD
//!   square root, trace norm, `exp(-itH)` and Kronecker products.
//! - [`states`]: pure states, density matrices, decompositions into pure
//!   states and their unitary re-mixing, seeded random ensembles.
//! - [`channels`]: parametrized Kraus families `x -> L_x`, unitary phase
//!   families generated by `x * sum_i h_i`, depolarizing composition and
//!   numerical x-derivatives.
//! - [`metrology`]: fidelity, squared Bures distance, quantum Fisher
//!   information (symmetric-logarithmic-derivative and finite-difference
//!   Bures routes) and the Cramér-Rao minimum uncertainty.
//! - [`verify`]: seeded fuzzers for joint convexity of the squared Bures
//!   distance and for the mixed-state bound, scaling and admixture
//!   experiments, and JSON/CSV reporting.
//!
//! Trial loops run on rayon when the `parallel` feature is enabled (the
//! default) and fall back to plain iterators otherwise; see [`exec`].

#![forbid(unsafe_code)]

pub mod channels;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod metrology;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenSystem, C64};
pub use states::{Decomposition, DensityMatrix, PureState};
