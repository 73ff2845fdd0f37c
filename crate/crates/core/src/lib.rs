//! Exact verification engine for the coupled Painleve systems with affine
//! Weyl group symmetry of types D3(2) (four dimensions) and D5(2) (eight
//! dimensions): Hamiltonians, Backlund groups, invariant divisors, holomorphy
//! charts, characterization by holomorphy, and numerical cross-checks.

pub mod algebra;
pub mod backlund;
pub mod characterize;
pub mod charts;
pub mod divisors;
pub mod error;
pub mod numerics;
pub mod report;
pub mod sampling;
pub mod systems;

pub use error::{Error, Result};
pub use report::{Status, VerificationReport};
pub use systems::{build_system, HamiltonianSystem, SystemKind};
