//! Heterogeneous traffic-graph extraction from lanelet-based driving
//! scenarios.
//!
//! A [`scenario::Scenario`] (lanelet map plus recorded trajectories) is
//! replayed by an [`extractor::Simulation`]; a [`extractor::TrafficExtractor`]
//! turns each timestep into a [`graph::TrafficGraph`] with vehicle and lanelet
//! nodes and L2L, V2V, V2L and L2V edges, and a
//! [`extractor::TemporalExtractor`] merges a window of those graphs and adds
//! forward-in-time VTV edges. [`dataset`] writes whole scenario collections to
//! disk as `.crg` sample files plus a manifest.

pub mod builders;
pub mod dataset;
pub mod drawers;
pub mod error;
pub mod extractor;
pub mod features;
pub mod geometry;
pub mod graph;
pub mod pipeline;
pub mod scenario;

pub use error::{Error, Result};
