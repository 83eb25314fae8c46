//! Exact k-nearest-neighbor graph by brute force.
//!
//! Catalog sizes here stay in the low tens of thousands, so the O(N²·dim)
//! scan is affordable and avoids an approximate-graph code path entirely.

use ndarray::Array2;
use rayon::prelude::*;

use crate::distance::l2_squared_unchecked;
use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};

/// Per-point neighbor lists: row i holds the k nearest other points of i in
/// ascending (distance, index) order. Distances are euclidean.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph {
    pub k: usize,
    pub indices: Array2<u32>,
    pub distances: Array2<f64>,
}

/// Exact k-NN under euclidean distance, self excluded, ties broken by lower
/// index.
pub fn knn_graph(train: &EmbeddingSet, k: usize) -> Result<KnnGraph> {
    let n = train.len();
    if k == 0 {
        return Err(Error::shape("k must be positive"));
    }
    if k >= n {
        return Err(Error::shape(format!(
            "k={k} must be smaller than the number of points {n}"
        )));
    }
    let rows: Vec<Vec<(f64, u32)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut pairs: Vec<(f64, u32)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (l2_squared_unchecked(train.row(i), train.row(j)), j as u32))
                .collect();
            // Partial selection, then an exact sort of the k survivors.
            pairs.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            pairs.truncate(k);
            pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            pairs
        })
        .collect();

    let mut indices = Array2::zeros((n, k));
    let mut distances = Array2::zeros((n, k));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, (d2, idx)) in row.into_iter().enumerate() {
            indices[(i, j)] = idx;
            distances[(i, j)] = d2.sqrt();
        }
    }
    Ok(KnnGraph {
        k,
        indices,
        distances,
    })
}

/// Neighbors of one external query among the training points; same ordering
/// rules as [`knn_graph`].
pub fn knn_of_query(
    train: &EmbeddingSet,
    query: ndarray::ArrayView1<'_, f32>,
    k: usize,
) -> Result<(Vec<u32>, Vec<f64>)> {
    let n = train.len();
    if k > n {
        return Err(Error::shape(format!(
            "k={k} exceeds the number of training points {n}"
        )));
    }
    let mut pairs: Vec<(f64, u32)> = (0..n)
        .map(|j| (l2_squared_unchecked(query, train.row(j)), j as u32))
        .collect();
    pairs.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    pairs.truncate(k);
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let indices = pairs.iter().map(|p| p.1).collect();
    let distances = pairs.iter().map(|p| p.0.sqrt()).collect();
    Ok((indices, distances))
}
