//! Infinite-mixture translation embeddings for knowledge graphs.
//!
//! Each relation owns an adaptive mixture of translation vectors. A triple
//! `(h, r, t)` scores `sum_m pi_{r,m} * exp(-|u_h + u_{r,m} - u_t|^2 / vs)`,
//! new components are spawned by a Chinese-restaurant-process rule during
//! training, and the whole model is fit by SGD on a likelihood-ratio
//! objective against corrupted triples.
//!
//! Modules:
//! - [`store`]: dataset loading, indexes and negative sampling.
//! - [`model`]: parameters, mixture score, primary component, spawning.
//! - [`checkpoint`]: binary checkpoint and text manifest.
//! - [`trainer`]: objective, gradients, update gate and the training loop.
//! - [`eval`]: link prediction and triple classification protocols.
//! - [`analyze`]: component census, cluster assignments, PCA exports.
//! - [`config`]: layered run configuration with presets.

pub mod analyze;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod eval;
pub mod model;
pub mod pca;
pub mod store;
pub mod trainer;

pub use error::{CheckpointError, DataError, ModelError, TrainError};
pub use model::{ModelParams, RelationMixture};
pub use store::{ColumnOrder, LabeledTriple, RelationCategory, Sampling, Triple, TripleStore, Vocab};
pub use trainer::{TrainConfig, TrainReport};
