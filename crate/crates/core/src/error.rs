use std::path::PathBuf;

use thiserror::Error;

use crate::store::Triple;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("no {expected} in {dir}")]
    MissingFile { dir: PathBuf, expected: String },
    #[error("train split is empty")]
    EmptyTrain,
    #[error("duplicate vocabulary entry `{0}`")]
    DuplicateName(String),
    #[error("triple {0:?} references an id outside the vocabulary")]
    IdOutOfRange(Triple),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{relation}` has {count} train triples; projection needs at least 2")]
    TooFewTriples { relation: String, count: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("entity id {id} out of range (model has {len} entities)")]
    EntityOutOfRange { id: usize, len: usize },
    #[error("relation id {id} out of range (model has {len} relations)")]
    RelationOutOfRange { id: usize, len: usize },
    #[error("model has {model_entities} entities / {model_relations} relations but the dataset has {store_entities} / {store_relations}")]
    VocabMismatch {
        model_entities: usize,
        model_relations: usize,
        store_entities: usize,
        store_relations: usize,
    },
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("checkpoint truncated")]
    Truncated,
    #[error("checkpoint has {0} unexpected trailing bytes")]
    TrailingBytes(usize),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("checkpoint dims {found} disagree with manifest {expected}")]
    DimMismatch { expected: String, found: String },
    #[error("vocabulary in {path} does not match the dataset")]
    VocabMismatch { path: PathBuf },
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("non-finite loss at epoch {epoch} on triple {triple:?}")]
    Diverged { epoch: usize, triple: Triple },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}
