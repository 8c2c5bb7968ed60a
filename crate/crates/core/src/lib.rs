//! Placement of virtual network functions in data-center fabrics, with
//! migration and replication as competing re-optimization methods.
//!
//! The pipeline: build a [`topology`], enumerate routes with [`paths`],
//! generate a [`workload`], pick [`costs`], build ILP instances in
//! [`model`], solve them with [`solve`], and summarize with [`metrics`].
//! [`cli`] runs the whole pipeline from a TOML config.

pub mod cli;
pub mod costs;
pub mod error;
pub mod metrics;
pub mod model;
pub mod paths;
pub mod solve;
pub mod topology;
pub mod workload;

pub use error::{Error, Result};
