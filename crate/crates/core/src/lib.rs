//! Coordination of several planar arms on a shared assembly: task
//! assignment, sequential motion planning, temporal plan graphs, and
//! execution under timing disturbances.

pub mod cli;
pub mod error;
pub mod exec;
pub mod geom;
pub mod motion;
pub mod scenario;
pub mod syncbase;
pub mod taskplan;
pub mod tpg;
pub mod world;

pub use error::{Error, Result};
