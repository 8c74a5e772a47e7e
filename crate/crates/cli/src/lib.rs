//! Library half of the command-line runner: config parsing and resolution,
//! output rendering, the validation oracle suite, and the subcommand
//! implementations. The `xmem` binary is a thin argument-parsing shell over
//! this crate.

// Validation guards use `!(x > 0.0)` instead of `x <= 0.0` so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod validate;
