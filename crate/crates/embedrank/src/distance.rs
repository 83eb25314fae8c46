//! Distance kernels for float vectors and packed binary codes.
//!
//! All kernels are pure and reentrant. Accumulation is done in f64 even for
//! f32 inputs.

use ndarray::ArrayView1;

use crate::error::{Error, Result};
use crate::quantize::BinaryCode;

/// Retrieval metric. Euclidean and cosine apply to float vectors, hamming to
/// packed binary codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    Cosine,
    Hamming,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
            Metric::Hamming => "hamming",
        }
    }

    pub fn parse(s: &str) -> Result<Metric> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            "hamming" => Ok(Metric::Hamming),
            other => Err(Error::data(format!("unknown metric {other:?}"))),
        }
    }
}

fn check_dims(a: ArrayView1<'_, f32>, b: ArrayView1<'_, f32>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::shape(format!(
            "vector dims differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Squared euclidean distance.
pub fn dist_l2_squared(a: ArrayView1<'_, f32>, b: ArrayView1<'_, f32>) -> Result<f64> {
    check_dims(a, b)?;
    Ok(l2_squared_unchecked(a, b))
}

#[inline]
pub(crate) fn l2_squared_unchecked(a: ArrayView1<'_, f32>, b: ArrayView1<'_, f32>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum()
}

/// Euclidean distance.
pub fn dist_l2(a: ArrayView1<'_, f32>, b: ArrayView1<'_, f32>) -> Result<f64> {
    Ok(dist_l2_squared(a, b)?.sqrt())
}

/// Cosine distance `1 - a.b / (|a||b|)`, in [0, 2].
pub fn dist_cosine(a: ArrayView1<'_, f32>, b: ArrayView1<'_, f32>) -> Result<f64> {
    check_dims(a, b)?;
    let mut dot = 0.0_f64;
    let mut na = 0.0_f64;
    let mut nb = 0.0_f64;
    for (&x, &y) in a.iter().zip(b.iter()) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::data("cosine distance undefined for zero-norm vector"));
    }
    Ok(1.0 - dot / (na.sqrt() * nb.sqrt()))
}

/// Hamming distance between packed codes of equal logical bit length.
///
/// Pad bits beyond the logical length are kept zero by construction, so the
/// word-wise popcount never sees spurious differences.
pub fn dist_hamming(a: BinaryCode<'_>, b: BinaryCode<'_>) -> Result<u32> {
    if a.bits() != b.bits() {
        return Err(Error::shape(format!(
            "code lengths differ: {} vs {} bits",
            a.bits(),
            b.bits()
        )));
    }
    Ok(hamming_unchecked(a.words(), b.words()))
}

#[inline]
pub(crate) fn hamming_unchecked(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b.iter()).map(|(&x, &y)| (x ^ y).count_ones()).sum()
}
