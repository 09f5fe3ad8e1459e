//! Numerical verification of R-separability for diagonal metrics.

pub mod expr;
pub mod jets;
pub mod metric;
pub mod sampling;
pub mod tolerance;
pub mod catalog;
pub mod curvature;
pub mod document;
pub mod identities;
pub mod report;
pub mod separation;
pub mod cli;
