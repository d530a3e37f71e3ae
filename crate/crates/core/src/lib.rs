//! Block/connection graphs for dashboards: ingest of workbook and canonical
//! JSON documents, spatial adjacency and interaction graphs, structural
//! analysis, feature extraction, HDBSCAN clustering, corpus reports and
//! linting.

pub mod analysis;
pub mod cluster;
pub mod error;
pub mod features;
pub mod geometry;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
