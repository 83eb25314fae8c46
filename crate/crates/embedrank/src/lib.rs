//! Compact embedding codes for sketch-based image retrieval.
//!
//! High-precision retrieval models emit large float embeddings (2048 dims in
//! the setups this crate targets). This library compresses such embeddings
//! into small codes — 4 to 1024 float dims, or packed bits — and measures
//! what the compression does to retrieval quality.
//!
//! Six reduction strategies are provided:
//!
//! - **PCA** — global-structure baseline ([`pca`])
//! - **UMAP** — local-topology preserving reduction ([`umap`])
//! - **RL** — learned linear reduction head ([`hashheads`])
//! - **BSL** — sigmoid head thresholded into bits ([`hashheads`] + [`quantize`])
//! - **DSH / DTSH** — supervised hashing heads trained with triplet losses
//!   ([`hashheads`])
//!
//! plus the evaluation protocol used to compare them: exact ranking
//! ([`retrieval`]), mAP / MRR / recall-precision metrics with stratified
//! cross-validation ([`eval`]), and search-time benchmarks.

pub mod distance;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod hashheads;
pub mod io;
pub mod pca;
pub mod quantize;
pub mod retrieval;
pub mod synthetic;
pub mod umap;

pub use embedding::{EmbeddingSet, QuerySet, Seed};
pub use error::{Error, Result};

/// A fitted transformation mapping embedding sets into a lower-dimensional
/// space. Implemented by PCA / UMAP models and trained reduction heads.
pub trait Reducer: Send + Sync {
    fn transform(&self, x: &EmbeddingSet) -> Result<EmbeddingSet>;
}

/// The do-nothing reducer: evaluation in the original space.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityReducer;

impl Reducer for IdentityReducer {
    fn transform(&self, x: &EmbeddingSet) -> Result<EmbeddingSet> {
        Ok(x.clone())
    }
}
