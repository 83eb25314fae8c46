//! Principal component analysis: the global-structure baseline reducer.
//!
//! The fit goes through the spectral decomposition of the centered data's
//! Gram matrix — the smaller of X·Xᵀ and Xᵀ·X — which yields the singular
//! vectors of the centered data matrix without ever forming the full
//! covariance when `dim` is large (2048-dim inputs, N often smaller).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::DMatrix;
use ndarray::{Array1, Array2, Axis};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::io::{expect_magic, read_f32_vec, truncated, write_f32_slice};
use crate::Reducer;

const PCA_MAGIC: &[u8; 4] = b"PCA1";

/// Relative eigenvalue threshold below which a direction counts as
/// zero-variance (rank-deficient data).
const RANK_TOL: f64 = 1e-10;

/// A fitted PCA transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Array1<f32>,
    /// d×dim, rows orthonormal, ordered by descending explained variance.
    components: Array2<f32>,
    explained_variance: Array1<f32>,
    /// Set when the requested d exceeded the data rank and the trailing
    /// components are an arbitrary orthonormal completion with zero variance.
    rank_padded: bool,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.components.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.components.nrows()
    }

    pub fn mean(&self) -> &Array1<f32> {
        &self.mean
    }

    pub fn components(&self) -> &Array2<f32> {
        &self.components
    }

    /// Per-component sample variances, non-increasing.
    pub fn explained_variance(&self) -> &Array1<f32> {
        &self.explained_variance
    }

    pub fn rank_padded(&self) -> bool {
        self.rank_padded
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path.as_ref())?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = BufReader::new(File::open(path.as_ref())?);
        Self::read(&mut r)
    }

    pub(crate) fn write(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(PCA_MAGIC)?;
        w.write_u32::<LittleEndian>(self.input_dim() as u32)?;
        w.write_u32::<LittleEndian>(self.output_dim() as u32)?;
        write_f32_slice(w, self.mean.as_slice().expect("contiguous"))?;
        write_f32_slice(w, self.components.as_slice().expect("row-major"))?;
        write_f32_slice(w, self.explained_variance.as_slice().expect("contiguous"))?;
        Ok(())
    }

    pub(crate) fn read(r: &mut impl Read) -> Result<Self> {
        expect_magic(r, PCA_MAGIC)?;
        let in_dim = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        let d = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        if in_dim == 0 || d == 0 || d > in_dim {
            return Err(Error::format(format!(
                "invalid PCA1 header: in_dim={in_dim}, d={d}"
            )));
        }
        let mean = Array1::from_vec(read_f32_vec(r, in_dim)?);
        let components =
            Array2::from_shape_vec((d, in_dim), read_f32_vec(r, d * in_dim)?).expect("shape");
        let explained_variance = Array1::from_vec(read_f32_vec(r, d)?);
        if mean.iter().any(|v| !v.is_finite())
            || components.iter().any(|v| !v.is_finite())
            || explained_variance.iter().any(|v| !v.is_finite())
        {
            return Err(Error::data("PCA1 model contains non-finite values"));
        }
        let rank_padded = explained_variance.iter().any(|&v| v <= 0.0);
        Ok(PcaModel {
            mean,
            components,
            explained_variance,
            rank_padded,
        })
    }
}

impl Reducer for PcaModel {
    fn transform(&self, x: &EmbeddingSet) -> Result<EmbeddingSet> {
        pca_transform(self, x)
    }
}

/// Fits a `d`-component PCA on the sample covariance (N−1 normalization) of
/// `train`. Deterministic: component signs follow the convention that each
/// row's largest-magnitude coordinate is positive.
pub fn pca_fit(train: &EmbeddingSet, d: usize) -> Result<PcaModel> {
    let n = train.len();
    let dim = train.dim();
    let max_d = dim.min(n.saturating_sub(1));
    if d == 0 || d > max_d {
        return Err(Error::shape(format!(
            "d={d} out of range: must be in 1..={max_d} for {n} samples of dim {dim}"
        )));
    }

    let x = train.vectors().mapv(f64::from);
    let mean = x.mean_axis(Axis(0)).expect("n >= 1");
    let centered = &x - &mean.view().insert_axis(Axis(0));

    // Eigendecompose the smaller Gram matrix; both routes give the singular
    // vectors of the centered data matrix.
    let (eigvals, components_full) = if dim <= n {
        let gram = centered.t().dot(&centered); // dim×dim
        symmetric_eigen_desc(&gram)
    } else {
        let gram = centered.dot(&centered.t()); // n×n
        let (vals, vecs) = symmetric_eigen_desc(&gram);
        // Map the top-d left vectors u into input space: v = Xᵀ u / σ.
        let mut dirs = Array2::<f64>::zeros((dim, d));
        for j in 0..d {
            let lambda = vals[j];
            if lambda <= 0.0 {
                continue;
            }
            let u = vecs.column(j);
            let v = centered.t().dot(&u);
            let sigma = lambda.sqrt();
            dirs.column_mut(j).assign(&(&v / sigma));
        }
        (vals, dirs)
    };

    let lambda_max = eigvals.first().copied().unwrap_or(0.0).max(0.0);
    let tol = lambda_max * RANK_TOL;
    let rank = eigvals.iter().take_while(|&&l| l > tol).count();
    let kept = d.min(rank);

    let mut components = Array2::<f64>::zeros((d, dim));
    let mut variances = vec![0.0_f64; d];
    for j in 0..kept {
        components.row_mut(j).assign(&components_full.column(j));
        variances[j] = eigvals[j].max(0.0) / (n - 1) as f64;
    }
    let rank_padded = kept < d;
    if rank_padded {
        pad_orthonormal(&mut components, kept)?;
    }
    fix_signs(&mut components);

    Ok(PcaModel {
        mean: mean.mapv(|v| v as f32),
        components: components.mapv(|v| v as f32),
        explained_variance: Array1::from_vec(variances).mapv(|v| v as f32),
        rank_padded,
    })
}

/// Projects `x` onto the fitted components: rows become `C·(x − mean)`.
/// Labels and ids carry through unchanged.
pub fn pca_transform(model: &PcaModel, x: &EmbeddingSet) -> Result<EmbeddingSet> {
    if x.dim() != model.input_dim() {
        return Err(Error::shape(format!(
            "input dim {} does not match model dim {}",
            x.dim(),
            model.input_dim()
        )));
    }
    let d = model.output_dim();
    let mut out = Array2::<f32>::zeros((x.len(), d));
    for (i, row) in x.vectors().rows().into_iter().enumerate() {
        for j in 0..d {
            let mut acc = 0.0_f64;
            for (k, &v) in row.iter().enumerate() {
                acc += f64::from(model.components[(j, k)])
                    * (f64::from(v) - f64::from(model.mean[k]));
            }
            out[(i, j)] = acc as f32;
        }
    }
    x.with_vectors(out)
}

/// Eigendecomposition of a symmetric matrix, eigenpairs sorted by descending
/// eigenvalue. Returns (values, matrix whose columns are eigenvectors).
fn symmetric_eigen_desc(m: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = m.nrows();
    let dm = DMatrix::from_row_slice(n, n, m.as_slice().expect("row-major"));
    let eigen = dm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .total_cmp(&eigen.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let vals: Vec<f64> = order.iter().map(|&i| eigen.eigenvalues[i]).collect();
    let mut vecs = Array2::<f64>::zeros((n, n));
    for (out_col, &src_col) in order.iter().enumerate() {
        for row in 0..n {
            vecs[(row, out_col)] = eigen.eigenvectors[(row, src_col)];
        }
    }
    (vals, vecs)
}

/// Completes rows `kept..` of `components` with a deterministic orthonormal
/// basis of the remaining space (Gram–Schmidt over standard basis vectors).
fn pad_orthonormal(components: &mut Array2<f64>, kept: usize) -> Result<()> {
    let (d, dim) = components.dim();
    let mut filled = kept;
    for axis in 0..dim {
        if filled == d {
            break;
        }
        let mut candidate = Array1::<f64>::zeros(dim);
        candidate[axis] = 1.0;
        for j in 0..filled {
            let proj = components.row(j).dot(&candidate);
            candidate = candidate - proj * &components.row(j).to_owned();
        }
        let norm = candidate.dot(&candidate).sqrt();
        if norm > 1e-6 {
            components.row_mut(filled).assign(&(&candidate / norm));
            filled += 1;
        }
    }
    if filled < d {
        return Err(Error::numerical(
            "failed to complete an orthonormal basis for rank padding",
        ));
    }
    Ok(())
}

/// Makes each component's largest-magnitude coordinate positive (first such
/// coordinate on ties), so fits are reproducible across runs and platforms.
fn fix_signs(components: &mut Array2<f64>) {
    for mut row in components.rows_mut() {
        let mut pivot = 0;
        let mut best = f64::NEG_INFINITY;
        for (i, &v) in row.iter().enumerate() {
            if v.abs() > best {
                best = v.abs();
                pivot = i;
            }
        }
        if row[pivot] < 0.0 {
            row.mapv_inplace(|v| -v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::dist_l2;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::io::Cursor;

    fn set_of(rows: Array2<f32>) -> EmbeddingSet {
        let labels = vec![0; rows.nrows()];
        EmbeddingSet::new(rows, labels, None).unwrap()
    }

    fn random_set(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> EmbeddingSet {
        let mut rows = Array2::zeros((n, dim));
        for v in rows.iter_mut() {
            *v = rng.random_range(-1.0_f32..1.0);
        }
        set_of(rows)
    }

    #[test]
    fn collinear_points_hand_eigendecomposition() {
        // Points on the diagonal: mean (1,1), lone direction (1,1)/√2,
        // projections −√2, 0, √2.
        let train = set_of(array![[0.0_f32, 0.0], [1.0, 1.0], [2.0, 2.0]]);
        let model = pca_fit(&train, 1).unwrap();
        let s = std::f32::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(model.mean()[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(model.mean()[1], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(model.components()[(0, 0)], s, epsilon = 1e-6);
        assert_abs_diff_eq!(model.components()[(0, 1)], s, epsilon = 1e-6);
        let reduced = pca_transform(&model, &train).unwrap();
        let sqrt2 = std::f32::consts::SQRT_2;
        assert_abs_diff_eq!(reduced.vectors()[(0, 0)], -sqrt2, epsilon = 1e-5);
        assert_abs_diff_eq!(reduced.vectors()[(1, 0)], 0.0, epsilon = 1e-5);
        assert_abs_diff_eq!(reduced.vectors()[(2, 0)], sqrt2, epsilon = 1e-5);
    }

    #[test]
    fn isotropic_data_has_flat_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let train = random_set(&mut rng, 4000, 5);
        let model = pca_fit(&train, 5).unwrap();
        let vars = model.explained_variance();
        let mean_var = vars.iter().map(|&v| f64::from(v)).sum::<f64>() / 5.0;
        for &v in vars {
            assert!(
                (f64::from(v) - mean_var).abs() / mean_var < 0.15,
                "spectrum not flat: {vars:?}"
            );
        }
    }

    fn reconstruction_error(frame: &Array2<f64>, centered: &Array2<f64>) -> f64 {
        // ‖Xc − Xc Fᵀ F‖²_F for a frame with orthonormal rows.
        let projected = centered.dot(&frame.t()).dot(frame);
        let resid = centered - &projected;
        resid.iter().map(|v| v * v).sum()
    }

    fn random_orthonormal_frame(rng: &mut ChaCha8Rng, d: usize, dim: usize) -> Array2<f64> {
        // Gram–Schmidt on Gaussian rows.
        let mut frame = Array2::<f64>::zeros((d, dim));
        let mut filled = 0;
        while filled < d {
            let mut v = Array1::from_iter((0..dim).map(|_| rng.random_range(-1.0..1.0)));
            for j in 0..filled {
                let proj = frame.row(j).dot(&v);
                v = v - proj * &frame.row(j).to_owned();
            }
            let norm = v.dot(&v).sqrt();
            if norm > 1e-8 {
                frame.row_mut(filled).assign(&(&v / norm));
                filled += 1;
            }
        }
        frame
    }

    #[test]
    fn top_d_projection_beats_random_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let train = random_set(&mut rng, 50, 10);
        let x = train.vectors().mapv(f64::from);
        let mean = x.mean_axis(Axis(0)).unwrap();
        let centered = &x - &mean.insert_axis(Axis(0));
        for d in [1, 2, 5] {
            let model = pca_fit(&train, d).unwrap();
            let pca_frame = model.components().mapv(f64::from);
            let pca_err = reconstruction_error(&pca_frame, &centered);
            for _ in 0..100 {
                let frame = random_orthonormal_frame(&mut rng, d, 10);
                let err = reconstruction_error(&frame, &centered);
                assert!(
                    pca_err <= err + 1e-9,
                    "random frame beat PCA at d={d}: {pca_err} vs {err}"
                );
            }
        }
    }

    #[test]
    fn components_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let train = random_set(&mut rng, 60, 12);
        let model = pca_fit(&train, 8).unwrap();
        let c = model.components().mapv(f64::from);
        let gram = c.dot(&c.t());
        for i in 0..8 {
            for j in 0..8 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (gram[(i, j)] - expected).abs() < 1e-5,
                    "gram[{i},{j}] = {}",
                    gram[(i, j)]
                );
            }
        }
    }

    #[test]
    fn explained_variance_matches_projected_sample_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // Anisotropic data so the spectrum is interesting.
        let mut rows = Array2::zeros((80, 6));
        for (i, mut row) in rows.rows_mut().into_iter().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                let scale = (k + 1) as f32;
                *v = scale * rng.random_range(-1.0_f32..1.0) + (i % 3) as f32;
            }
        }
        let train = set_of(rows);
        let model = pca_fit(&train, 6).unwrap();
        let reduced = pca_transform(&model, &train).unwrap();
        for k in 0..6 {
            let col: Vec<f64> = reduced
                .vectors()
                .column(k)
                .iter()
                .map(|&v| f64::from(v))
                .collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var =
                col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64;
            let expected = f64::from(model.explained_variance()[k]);
            assert!(
                (var - expected).abs() <= 1e-5 * expected.max(1e-12),
                "component {k}: sample var {var} vs stored {expected}"
            );
        }
        for w in model.explained_variance().to_vec().windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn transform_of_training_mean_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let train = random_set(&mut rng, 30, 5);
        let model = pca_fit(&train, 3).unwrap();
        let mean_set = set_of(model.mean().clone().insert_axis(Axis(0)).to_owned());
        let out = pca_transform(&model, &mean_set).unwrap();
        for &v in out.vectors().iter() {
            assert!(v.abs() < 1e-5);
        }
    }

    #[test]
    fn full_dim_transform_is_an_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let train = random_set(&mut rng, 60, 8);
        let model = pca_fit(&train, 8).unwrap();
        let reduced = pca_transform(&model, &train).unwrap();
        for _ in 0..50 {
            let i = rng.random_range(0..60);
            let j = rng.random_range(0..60);
            let before = dist_l2(train.row(i), train.row(j)).unwrap();
            let after = dist_l2(reduced.row(i), reduced.row(j)).unwrap();
            assert!(
                (before - after).abs() <= 1e-4 * before.max(1e-9),
                "distance {before} became {after}"
            );
        }
    }

    #[test]
    fn centering_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let train = random_set(&mut rng, 40, 5);
        let centered = pca_transform(&pca_fit(&train, 5).unwrap(), &train).unwrap();
        let refit = pca_fit(&centered, 3).unwrap();
        for &v in refit.mean().iter() {
            assert!(v.abs() < 1e-5, "mean after centering: {v}");
        }
    }

    #[test]
    fn d_too_large_is_shape_error() {
        let train = set_of(array![[0.0_f32, 0.0], [1.0, 1.0], [2.0, 2.0]]);
        // max d = min(N-1, dim) = 2.
        assert!(pca_fit(&train, 3).is_err());
        assert!(pca_fit(&train, 0).is_err());
        assert!(pca_fit(&train, 2).is_ok());
    }

    #[test]
    fn rank_deficient_fit_pads_with_zero_variance() {
        // Three distinct collinear points have rank 1; d=2 needs padding.
        let train = set_of(array![
            [0.0_f32, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [2.0, 2.0, 0.0]
        ]);
        let model = pca_fit(&train, 2).unwrap();
        assert!(model.rank_padded());
        assert!(model.explained_variance()[0] > 0.0);
        assert_eq!(model.explained_variance()[1], 0.0);
        // Padded row is still orthonormal to the first.
        let c = model.components().mapv(f64::from);
        assert!(c.row(0).dot(&c.row(1)).abs() < 1e-6);
        assert!((c.row(1).dot(&c.row(1)) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn dim_mismatch_on_transform_is_shape_error() {
        let train = set_of(array![[0.0_f32, 0.0], [1.0, 1.0], [2.0, 0.5]]);
        let model = pca_fit(&train, 1).unwrap();
        let other = set_of(array![[0.0_f32, 0.0, 0.0]]);
        assert!(matches!(
            pca_transform(&model, &other),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn pca1_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let train = random_set(&mut rng, 20, 7);
        let model = pca_fit(&train, 4).unwrap();
        let mut buf = Vec::new();
        model.write(&mut buf).unwrap();
        let back = PcaModel::read(&mut Cursor::new(&buf)).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn fit_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let train = random_set(&mut rng, 25, 6);
        let a = pca_fit(&train, 4).unwrap();
        let b = pca_fit(&train, 4).unwrap();
        assert_eq!(a, b);
    }
}
