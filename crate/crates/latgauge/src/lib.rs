//! Truncated gauge-theory phase spaces over structured graphs.
//!
//! The crate builds the finite-graph pieces of a projective system of
//! cotangent bundles `T*G^E`: holonomy-flux phase spaces, their Poisson-map
//! projections, the kernel algebras acting on `L^2(G^E)`, Weyl quantization at
//! a harmonic cutoff and vertex gauge actions. Every law is checkable through
//! the [`verify`] module, exactly on finite groups and numerically on U(1) and
//! SU(2).

pub mod gauge;
pub mod group_backend;
pub mod limits_states;
pub mod phase_space;
pub mod quantization;
pub mod quantum_algebra;
pub mod scalar;
pub mod structured_graph;
pub mod verify;

pub use group_backend::{AlgElem, CoAlgElem, Group, GroupElem, Irrep};
pub use scalar::{Exact, Scalar, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("backend mismatch: {0}")]
    BackendMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown irrep label {0}")]
    UnknownIrrep(String),
    #[error("invalid group element: {0}")]
    InvalidElement(String),
    #[error("graph error: {0}")]
    Graph(String),
    #[error("invalid witness: {}", .0.join("; "))]
    InvalidWitness(Vec<String>),
    #[error("cutoff overflow: {0}")]
    CutoffOverflow(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("scenario errors: {}", .0.join("; "))]
    Scenario(Vec<String>),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
