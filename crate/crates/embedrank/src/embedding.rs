//! Labeled embedding sets: the universal currency of the toolkit.
//!
//! An [`EmbeddingSet`] holds N float vectors of a fixed dimension together
//! with one class label per vector and optional opaque string ids. Catalogs
//! (photo embeddings) and query sets (sketch embeddings) share the same
//! representation; [`QuerySet`] is an alias kept for readability at call
//! sites.

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// Seed for every stochastic operation run in deterministic mode.
///
/// Identical seed + identical inputs yield bit-identical outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}

/// N labeled vectors of fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    vectors: Array2<f32>,
    labels: Vec<u32>,
    ids: Option<Vec<String>>,
}

/// Sketch queries evaluated against a catalog.
///
/// Same shape as [`EmbeddingSet`]; the pairing with a catalog of equal
/// dimension is checked at evaluation time.
pub type QuerySet = EmbeddingSet;

impl EmbeddingSet {
    /// Builds a set from a row-major matrix, validating all invariants:
    /// at least one row, matching label (and id) counts, finite components.
    pub fn new(vectors: Array2<f32>, labels: Vec<u32>, ids: Option<Vec<String>>) -> Result<Self> {
        let n = vectors.nrows();
        if n == 0 {
            return Err(Error::data("embedding set must contain at least one vector"));
        }
        if vectors.ncols() == 0 {
            return Err(Error::data("embedding dimension must be positive"));
        }
        if labels.len() != n {
            return Err(Error::data(format!(
                "label count {} does not match vector count {n}",
                labels.len()
            )));
        }
        if let Some(ids) = &ids {
            if ids.len() != n {
                return Err(Error::data(format!(
                    "id count {} does not match vector count {n}",
                    ids.len()
                )));
            }
        }
        if let Some(bad) = vectors.iter().position(|v| !v.is_finite()) {
            let (row, col) = (bad / vectors.ncols(), bad % vectors.ncols());
            return Err(Error::data(format!(
                "non-finite component at row {row}, column {col}"
            )));
        }
        Ok(EmbeddingSet { vectors, labels, ids })
    }

    /// Number of vectors.
    pub fn len(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.nrows() == 0
    }

    /// Vector dimension.
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vectors(&self) -> &Array2<f32> {
        &self.vectors
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f32> {
        self.vectors.row(i)
    }

    /// New set with the same labels/ids but different vectors (e.g. after a
    /// reduction). Row count must be preserved.
    pub fn with_vectors(&self, vectors: Array2<f32>) -> Result<Self> {
        if vectors.nrows() != self.len() {
            return Err(Error::shape(format!(
                "replacement matrix has {} rows, expected {}",
                vectors.nrows(),
                self.len()
            )));
        }
        EmbeddingSet::new(vectors, self.labels.clone(), self.ids.clone())
    }

    /// Subset by row indices, carrying labels and ids through.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::data("cannot select an empty subset"));
        }
        let mut vectors = Array2::zeros((indices.len(), self.dim()));
        let mut labels = Vec::with_capacity(indices.len());
        for (out, &i) in indices.iter().enumerate() {
            if i >= self.len() {
                return Err(Error::shape(format!(
                    "index {i} out of bounds for set of {}",
                    self.len()
                )));
            }
            vectors.row_mut(out).assign(&self.vectors.row(i));
            labels.push(self.labels[i]);
        }
        let ids = self
            .ids
            .as_ref()
            .map(|ids| indices.iter().map(|&i| ids[i].clone()).collect());
        EmbeddingSet::new(vectors, labels, ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_empty_set() {
        let err = EmbeddingSet::new(Array2::zeros((0, 3)), vec![], None).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn rejects_label_count_mismatch() {
        let err = EmbeddingSet::new(array![[1.0_f32, 2.0]], vec![0, 1], None).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn rejects_non_finite_components() {
        let err =
            EmbeddingSet::new(array![[1.0_f32, f32::NAN]], vec![0], None).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
        let err =
            EmbeddingSet::new(array![[f32::INFINITY, 0.0]], vec![0], None).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn rejects_id_count_mismatch() {
        let err = EmbeddingSet::new(
            array![[1.0_f32, 2.0], [3.0, 4.0]],
            vec![0, 1],
            Some(vec!["a".into()]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn select_carries_labels_and_ids() {
        let set = EmbeddingSet::new(
            array![[1.0_f32, 0.0], [0.0, 1.0], [2.0, 2.0]],
            vec![0, 1, 2],
            Some(vec!["a".into(), "b".into(), "c".into()]),
        )
        .unwrap();
        let sub = set.select(&[2, 0]).unwrap();
        assert_eq!(sub.labels(), &[2, 0]);
        assert_eq!(sub.ids().unwrap(), &["c".to_string(), "a".to_string()]);
        assert_eq!(sub.row(0).to_vec(), vec![2.0, 2.0]);
    }
}
