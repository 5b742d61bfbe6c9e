//! Incentive-aware false discovery rate analysis for approval tests.
//!
//! An agent with a private prior pays a cost to have a claim tested at
//! significance τ and collects a reward if approved. This crate computes who
//! opts in, the resulting false discovery rate, worst-case bounds on it, and
//! maximin-optimal thresholds for the principal running the test.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod bounds;
pub mod error;
pub mod harness;
pub mod mathkit;
pub mod maximin;
pub mod mixture;
pub mod model;

pub use error::{Error, Result};
