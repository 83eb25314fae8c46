//! Seeded synthetic fixtures: isotropic Gaussian class clusters standing in
//! for real photo/sketch embedding sets.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::embedding::{EmbeddingSet, QuerySet, Seed};
use crate::error::{Error, Result};

/// Shape of a synthetic dataset: class clusters drawn around Gaussian
/// centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n_classes: usize,
    pub per_class: usize,
    pub dim: usize,
    /// Within-class per-coordinate standard deviation. Zero collapses every
    /// class onto its center.
    pub cluster_spread: f64,
    /// Standard deviation of the class-center distribution.
    pub center_scale: f64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::data("synthetic spec needs at least 2 classes"));
        }
        if self.per_class < 2 {
            return Err(Error::data("synthetic spec needs at least 2 items per class"));
        }
        if self.dim == 0 {
            return Err(Error::data("synthetic spec needs a positive dimension"));
        }
        if !(self.cluster_spread >= 0.0 && self.cluster_spread.is_finite()) {
            return Err(Error::data("cluster_spread must be finite and non-negative"));
        }
        if !(self.center_scale > 0.0 && self.center_scale.is_finite()) {
            return Err(Error::data("center_scale must be finite and positive"));
        }
        Ok(())
    }
}

/// Generates a catalog plus one fresh query per class, deterministically
/// under `seed`.
pub fn make_synthetic(spec: &SyntheticSpec, seed: Seed) -> Result<(EmbeddingSet, QuerySet)> {
    make_synthetic_with_queries(spec, seed, 1)
}

/// Like [`make_synthetic`] but drawing `queries_per_class` fresh queries per
/// class; head training fixtures need more than one sketch per class.
pub fn make_synthetic_with_queries(
    spec: &SyntheticSpec,
    seed: Seed,
    queries_per_class: usize,
) -> Result<(EmbeddingSet, QuerySet)> {
    spec.validate()?;
    if queries_per_class == 0 {
        return Err(Error::data("queries_per_class must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    let normal = StandardNormal;

    let mut centers = Array2::<f64>::zeros((spec.n_classes, spec.dim));
    for v in centers.iter_mut() {
        let z: f64 = normal.sample(&mut rng);
        *v = spec.center_scale * z;
    }

    let mut draw_cluster = |rng: &mut ChaCha8Rng, rows_per_class: usize| {
        let n = spec.n_classes * rows_per_class;
        let mut vectors = Array2::<f32>::zeros((n, spec.dim));
        let mut labels = Vec::with_capacity(n);
        for class in 0..spec.n_classes {
            for item in 0..rows_per_class {
                let row = class * rows_per_class + item;
                for (d, slot) in vectors.row_mut(row).iter_mut().enumerate() {
                    let z: f64 = normal.sample(rng);
                    *slot = (centers[(class, d)] + spec.cluster_spread * z) as f32;
                }
                labels.push(class as u32);
            }
        }
        (vectors, labels)
    };

    let (cat_vectors, cat_labels) = draw_cluster(&mut rng, spec.per_class);
    let (q_vectors, q_labels) = draw_cluster(&mut rng, queries_per_class);

    let catalog = EmbeddingSet::new(cat_vectors, cat_labels, None)?;
    let queries = EmbeddingSet::new(q_vectors, q_labels, None)?;
    Ok((catalog, queries))
}
