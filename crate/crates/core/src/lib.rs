//! Modelling toolkit for multi-mode Purcell filters in superconducting
//! qubit readout chains.
//!
//! * [`tline`]: lossless line primitives and ABCD algebra
//! * [`network`]: exact nodal analysis, S-parameters, Touchstone I/O
//! * [`filter`]: the filter topology, transfer impedance, notches and `T_p`
//! * [`spectrum`]: the input–output S21 model and its fitter
//! * [`reset`]: damped reset dynamics, cascade and leakage-reduction schedules
//! * [`readout`]: single-shot IQ discrimination and error budgets
//! * [`synth`]: seeded synthetic data generators

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod filter;
pub mod linalg;
pub mod lm;
pub mod network;
pub mod readout;
pub mod reset;
pub mod spectrum;
pub mod synth;
pub mod tline;

pub use error::{Error, Result};
