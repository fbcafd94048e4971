// `!(a > b)` is used on purpose so that NaN fails the comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cerf;
pub mod cli;
pub mod config;
pub mod error;
pub mod estimators;
pub mod kernel;
pub mod pulse;
pub mod scan;
pub mod tomography;
pub mod units;
pub mod validation;
pub mod wavepacket;
