//! Counterparty exposure engine for linear interest-rate products.
//!
//! * [`saccr`]: baseline SA-CCR add-ons, aggregation and EAD.
//! * [`rsaccr`]: cashflow-level add-ons obtained by decomposing trades into
//!   elementary cashflows under a three-factor Gaussian market model.
//! * [`gmm`]: the Hull-White / Gaussian market model analytics and a Monte
//!   Carlo oracle for theoretical add-ons.
//! * [`report`]: builtin comparison scenarios and report rendering.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curves;
pub mod error;
pub mod gmm;
pub mod report;
pub mod rsaccr;
pub mod saccr;
pub mod trades;

pub use error::{Error, Result};
