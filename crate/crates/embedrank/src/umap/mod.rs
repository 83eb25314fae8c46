//! umap (placeholder)
