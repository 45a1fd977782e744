//! Simulation and feasibility planning for quantum-secured links over
//! deployed fiber routes.
//!
//! The crate is layered bottom-up: [`linalg`] provides density operators,
//! [`channel`] builds operator-sum channels on them, [`fiber`] turns physical
//! span parameters into channel stacks, [`repeater`] simulates entanglement
//! distribution chains, [`qkd`] and [`feasibility`] turn results into key
//! rates and deploy/no-deploy verdicts, and [`planner`] ties everything to
//! route configuration files and reports.

pub mod error;
pub mod channel;
pub mod linalg;
pub mod random;
pub mod fiber;
pub mod repeater;
pub mod qkd;
pub mod feasibility;
pub mod planner;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix};
