//! Analysis and integration of time-dependent linearly singular
//! differential equations `A(t,x)·ẋ + c(t,x) = 0`.
//!
//! The pipeline: load a system ([`system`]), make it autonomous
//! ([`autonomize`], [`mechanics`]), run the constraint algorithm
//! ([`engine`]) and integrate the resulting field ([`integrate`]).

pub mod ad;
pub mod autonomize;
pub mod cli;
pub mod engine;
pub mod expr;
pub mod integrate;
pub mod linalg;
pub mod mechanics;
pub mod report;
pub mod system;
