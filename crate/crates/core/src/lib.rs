// validation is written as `!(x > 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod envelope;
pub mod error;
pub mod geometry;
pub mod heat;
pub mod jacobi;
pub mod nets;
pub mod operators;
pub mod quadrature;
pub mod report;
pub mod sampling;
