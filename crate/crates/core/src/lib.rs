//! Tight quantum bounds on the Mermin and Svetlichny operators for three-qubit
//! states measured with biased, non-projective dichotomic observables.
//!
//! The crate is `no_std` (it needs `alloc`). Numerical kernels, the closed-form
//! bounds, the see-saw oracle and the benchmark state factory live here; the
//! `tribell` crate adds the command-line front end and file formats.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod mermin_bounds;
pub mod observables;
pub mod oracle;
pub mod report;
pub mod smallmat;
pub mod states;
pub mod strengths;
pub mod svetlichny_bounds;
pub mod tensor_core;

pub use observables::{GeneralObservable, MeasurementSetting, OperatorKind};
pub use report::{BoundReport, Criterion, CriterionValue};
pub use smallmat::{Mat3, Mat3x9, SingularTriple};
pub use strengths::{Angles, StrengthSextuple};
pub use tensor_core::{CorrelationDecomposition, ThreeQubitState};

/// Classical (local hidden variable) limit of the Mermin operator.
pub const MERMIN_CLASSICAL: f64 = 2.0;
/// Hybrid-local limit of the Svetlichny operator.
pub const SVETLICHNY_CLASSICAL: f64 = 4.0;
