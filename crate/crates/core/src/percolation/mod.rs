//! Deaths and bridges on space-time boxes and the clusters they form.

mod config;
mod explore;
mod labelling;

pub use config::{sample_percolation, sample_with_rates, Configuration, Rates};
pub(crate) use config::{box_header, parse_body};
pub use explore::{estimate_connectivity, ConnectivityEstimate, Explorer, Reach, SiteRates, UniformRates};
pub use labelling::{
    build_clusters, cluster_counts, connected, BoundaryRule, ClusterCounts, ClusterLabelling, ExternalBoundary,
    IntervalSpan, SpinLabels,
};
