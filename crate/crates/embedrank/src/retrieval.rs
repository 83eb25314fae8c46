//! Exact ranking of a catalog against each query, with a timing harness for
//! the search-cost benchmarks.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use ndarray::s;
use rayon::prelude::*;

use crate::distance::{dist_cosine, l2_squared_unchecked, Metric};
use crate::embedding::{EmbeddingSet, QuerySet};
use crate::error::{Error, Result};
use crate::quantize::BinaryCodeSet;
use crate::Reducer;

/// Full ordering of a catalog for one query: a permutation of catalog
/// indices sorted by ascending distance, ties broken by lower index.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub query_index: usize,
    pub order: Vec<u32>,
    pub distances: Vec<f64>,
}

fn sort_ranking(query_index: usize, dists: Vec<f64>) -> Ranking {
    let mut order: Vec<u32> = (0..dists.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        dists[a as usize]
            .total_cmp(&dists[b as usize])
            .then(a.cmp(&b))
    });
    let distances = order.iter().map(|&i| dists[i as usize]).collect();
    Ranking {
        query_index,
        order,
        distances,
    }
}

fn rank_one(query_index: usize, queries: &QuerySet, catalog: &EmbeddingSet, metric: Metric) -> Result<Ranking> {
    let q = queries.row(query_index);
    let dists: Vec<f64> = match metric {
        Metric::Euclidean => catalog
            .vectors()
            .rows()
            .into_iter()
            .map(|row| l2_squared_unchecked(q, row).sqrt())
            .collect(),
        Metric::Cosine => {
            let mut dists = Vec::with_capacity(catalog.len());
            for row in catalog.vectors().rows() {
                dists.push(dist_cosine(q, row)?);
            }
            dists
        }
        Metric::Hamming => {
            return Err(Error::shape(
                "hamming ranking requires binary codes; use rank_all_codes",
            ))
        }
    };
    Ok(sort_ranking(query_index, dists))
}

/// Ranks every catalog item for every query under a float-vector metric.
/// Exact distances, full sort, deterministic tie handling.
pub fn rank_all(queries: &QuerySet, catalog: &EmbeddingSet, metric: Metric) -> Result<Vec<Ranking>> {
    if queries.dim() != catalog.dim() {
        return Err(Error::shape(format!(
            "query dim {} does not match catalog dim {}",
            queries.dim(),
            catalog.dim()
        )));
    }
    (0..queries.len())
        .into_par_iter()
        .map(|qi| rank_one(qi, queries, catalog, metric))
        .collect()
}

/// Hamming ranking over packed codes.
pub fn rank_all_codes(queries: &BinaryCodeSet, catalog: &BinaryCodeSet) -> Result<Vec<Ranking>> {
    if queries.bits() != catalog.bits() {
        return Err(Error::shape(format!(
            "query code length {} does not match catalog code length {}",
            queries.bits(),
            catalog.bits()
        )));
    }
    Ok((0..queries.len())
        .into_par_iter()
        .map(|qi| {
            let q = queries.code(qi);
            let dists: Vec<f64> = (0..catalog.len())
                .map(|ci| {
                    f64::from(crate::distance::hamming_unchecked(
                        q.words(),
                        catalog.code(ci).words(),
                    ))
                })
                .collect();
            sort_ranking(qi, dists)
        })
        .collect())
}

/// Rankings plus mean wall-clock seconds per query.
///
/// The measurement runs single-threaded on a monotonic clock, repeats
/// `reps` times after one excluded warm-up pass, and — when `transform` is
/// given — applies the reducer to the raw queries inside the timed region,
/// so query reduction cost is part of the figure.
pub fn timed_rank_all(
    queries: &QuerySet,
    catalog: &EmbeddingSet,
    metric: Metric,
    transform: Option<&dyn Reducer>,
    reps: usize,
) -> Result<(Vec<Ranking>, f64)> {
    let reps = reps.max(1);
    let run = || -> Result<Vec<Ranking>> {
        let reduced;
        let effective = match transform {
            Some(reducer) => {
                reduced = reducer.transform(queries)?;
                &reduced
            }
            None => queries,
        };
        // Sequential on purpose: per-query timing must not depend on the
        // thread pool.
        (0..effective.len())
            .map(|qi| rank_one(qi, effective, catalog, metric))
            .collect()
    };

    let rankings = run()?; // warm-up, also the returned result
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(run()?);
    }
    let per_query = start.elapsed().as_secs_f64() / (reps as f64 * queries.len() as f64);
    Ok((rankings, per_query))
}

/// One row of the search-time benchmark.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub dim: usize,
    pub method: String,
    pub query_time_s: f64,
}

/// Sweeps target dimensions and reports the median per-query search time of
/// `runs` timed repetitions at each dimension.
///
/// `reduce` maps a target dimension to the (catalog, queries) pair actually
/// searched, plus an optional query-side reducer when transform cost should
/// be inside the timing.
pub fn bench_sweep(
    dims: &[usize],
    method: &str,
    runs: usize,
    mut reduce: impl FnMut(usize) -> Result<(EmbeddingSet, QuerySet, Option<Box<dyn Reducer>>)>,
) -> Result<Vec<BenchRow>> {
    let runs = runs.max(1);
    let mut rows = Vec::with_capacity(dims.len());
    for &dim in dims {
        let (cat_d, q_d, reducer) = reduce(dim)?;
        let mut times = Vec::with_capacity(runs);
        for _ in 0..runs {
            let (_, t) = timed_rank_all(&q_d, &cat_d, Metric::Euclidean, reducer.as_deref(), 1)?;
            times.push(t);
        }
        times.sort_by(f64::total_cmp);
        rows.push(BenchRow {
            dim,
            method: method.to_string(),
            query_time_s: times[times.len() / 2],
        });
    }
    Ok(rows)
}

/// Truncates every vector to its first `dim` coordinates; the raw-scan
/// baseline for the benchmark sweep.
pub fn truncate_dims(set: &EmbeddingSet, dim: usize) -> Result<EmbeddingSet> {
    if dim == 0 || dim > set.dim() {
        return Err(Error::shape(format!(
            "cannot truncate dim {} set to {dim}",
            set.dim()
        )));
    }
    set.with_vectors(set.vectors().slice(s![.., ..dim]).to_owned())
}

/// Writes rankings as `query_id,rank,catalog_id,distance` CSV.
pub fn write_rankings_csv(
    rankings: &[Ranking],
    queries: &QuerySet,
    catalog: &EmbeddingSet,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    writeln!(w, "query_id,rank,catalog_id,distance")?;
    let name = |set: &EmbeddingSet, i: usize| match set.ids() {
        Some(ids) => ids[i].clone(),
        None => i.to_string(),
    };
    for ranking in rankings {
        for (rank, (&ci, &d)) in ranking.order.iter().zip(&ranking.distances).enumerate() {
            writeln!(
                w,
                "{},{},{},{}",
                name(queries, ranking.query_index),
                rank + 1,
                name(catalog, ci as usize),
                d
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes benchmark rows as `dim,method,query_time_s` CSV.
pub fn write_bench_csv(rows: &[BenchRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    writeln!(w, "dim,method,query_time_s")?;
    for row in rows {
        writeln!(w, "{},{},{:.9}", row.dim, row.method, row.query_time_s)?;
    }
    w.flush()?;
    Ok(())
}
