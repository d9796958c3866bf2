//! Distances between temporal graphs.
//!
//! A temporal graph is summarized by the time-respecting random-walk operator
//! `P`, embedded into unit vectors by minimizing a cross entropy against `P`,
//! and compared to other graphs through the embeddings: with the matched
//! distance when the node sets are aligned, or with the spectral unmatched
//! distance when they are not.
//!
//! ```
//! use tgdist::{embed, matched_distance, unmatched_distance, EDRepConfig, TemporalEdge, TemporalGraph};
//!
//! let g = TemporalGraph::from_edges(4, 3, [
//!     TemporalEdge::new(0, 0, 1, 1.0),
//!     TemporalEdge::new(1, 1, 2, 1.0),
//!     TemporalEdge::new(2, 2, 3, 1.0),
//! ])?;
//! let h = g.permute_nodes(&[3, 2, 1, 0])?;
//!
//! let cfg = EDRepConfig { d: 3, ..Default::default() };
//! let (x, y) = (embed(&g, &cfg)?, embed(&h, &cfg)?);
//! assert!(unmatched_distance(&x, &y)? >= 0.0);
//! assert!(matched_distance(&x, &x)? == 0.0);
//! # Ok::<(), tgdist::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x >= 0.0)` also rejects NaN

pub mod distances;
pub mod edrep;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod randomize;
pub mod seed;
pub mod synth;
pub mod transition;

pub use distances::{
    lambda_vector, matched_distance, pairwise_distances, unmatched_distance, DistanceKind, DistanceMatrix,
    LambdaVector,
};
pub use edrep::{embed, embed_with_trace, EDRepConfig, Embedding, ZMode};
pub use error::{Error, Result};
pub use eval::{cluster_distances, nmi, Labeling};
pub use graph::{ContactEvent, Snapshot, TemporalEdge, TemporalGraph};
pub use randomize::{randomize, RandomizationKind};
pub use seed::derive_seed;
pub use synth::{preset, temporalize, Model, StaticGraph};
pub use transition::{GlobalTransitionOperator, OperatorMode};
