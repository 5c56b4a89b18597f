//! Separable operations acting on bipartite pure states.
//!
//! The crate answers three questions about a source state `|psi>`:
//! which ensembles `{p_k, |phi_k>}` a separable operation can produce from
//! it (the majorization condition on Schmidt weights), whether a
//! deterministic conversion to a target is possible, and the best success
//! probability when it is not. Alongside the decision procedures it carries
//! randomized verifiers for the underlying operator inequalities.
//!
//! Module map:
//! - [`numerics`]: dense complex kernels (SVD, Hermitian spectra, Kronecker
//!   products, partial traces, complement projectors).
//! - [`states`]: pure states, Schmidt decomposition, `E_n` monotones and
//!   the state/map correspondence.
//! - [`sepops`]: product Kraus sets, their closure, application to states
//!   and random generators (LOCC compositions, unconstrained collections).
//! - [`majorization`]: feasibility checks, `p_max`, monotonicity and the
//!   operator-inequality verifiers.
//! - [`harness`]: seeded, order-independent verification campaigns.
//! - [`formats`]: JSON file schemas shared with the command-line tool.

pub mod error;
pub mod formats;
pub mod harness;
pub mod majorization;
pub mod numerics;
pub mod rng;
pub mod sepops;
pub mod states;
pub mod tolerance;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, HermitianSpectrum, Side, Svd};
pub use tolerance::Tolerances;

/// Complex scalar used throughout the crate.
pub type C64 = nalgebra::Complex<f64>;
