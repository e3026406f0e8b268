//! Labor-market compartment models for unemployment: simulation, equilibrium
//! and stability analysis, Fourier fitting of vacancy data, and constrained
//! optimal control of internship and incentive policies.
//!
//! The crate is `no_std` and needs only `alloc`. Enable the `std` feature to
//! get `std::error::Error` on the error type.
#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops over several parallel arrays read better than zipped iterators.
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod analysis;
pub mod datafit;
pub mod error;
pub mod integrator;
pub mod model;
pub mod ocp;
pub mod special;
pub mod vacancy;

pub use error::{Error, Result};
pub use model::{BaselineParams, BaselineState, LaborState, ModelParams, Vacancy};
pub use vacancy::VacancyFunction;
