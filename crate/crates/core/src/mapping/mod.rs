//! Thematic clusters and map layout.
//!
//! Clustering maximizes weighted modularity with a deterministic
//! local-moving and aggregation scheme, one connected component at a time.
//! Layout minimizes Kamada-Kawai stress per component and packs the
//! component drawings into the unit square (y grows downwards).

mod cluster;
mod distance;
mod layout;
mod pack;

use thiserror::Error;

pub use cluster::{
    cluster_summary, detect_clusters, modularity, ClusterOptions, ClusterPartition, ClusterSummary,
    ClusterWeighting, WeightedGraph,
};
pub use distance::{graph_distances, ComponentDistances, EdgeLength};
pub use layout::{
    kamada_kawai, kamada_kawai_component, ComponentLayout, LayoutMap, LayoutParams, StressModel,
};
pub use pack::{normalize_unit, pack_components};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MappingError {
    #[error(
        "similarity weighting needs vertex occurrence weights; use raw weighting for this network"
    )]
    MissingOccurrences,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}
