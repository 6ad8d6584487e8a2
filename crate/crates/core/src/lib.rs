//! Exact and numerical verification engine for coupled Painlevé-type
//! Hamiltonian systems with affine Weyl group symmetry.

pub mod catalog;
pub mod error;
pub mod exec;
pub mod flows;
pub mod holomorphy;
pub mod numerics;
pub mod symkernel;
pub mod weyl;

pub use catalog::{build_system, HamiltonianSystem, ParameterValues, SystemId};
pub use error::{Error, Result};
pub use exec::Exec;
