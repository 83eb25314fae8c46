//! Evaluation protocol: stratified cross-validation over the catalog,
//! retrieval metrics, and report assembly.
//!
//! Reducers are fitted on catalog (photo) vectors only; queries are always
//! transformed through the fitted model and ranked against the held-out
//! catalog part.

mod metrics;
mod report;

pub use metrics::{
    average_precision, first_relevant_rank, mean_average_precision,
    mean_reciprocal_rank, per_query_average_precision, precision_recall_curve,
    query_precision_recall, RECALL_LEVELS,
};
pub use report::{write_reports_csv, EvalReport, ReportConfig};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distance::Metric;
use crate::embedding::{EmbeddingSet, QuerySet, Seed};
use crate::error::{Error, Result};
use crate::quantize::{binarize_sigmoid, binarize_sign};
use crate::retrieval::{rank_all, rank_all_codes, Ranking};
use crate::Reducer;

/// How reduced vectors are turned into codes before Hamming ranking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuantizeMode {
    Sign,
    SigmoidThreshold(f32),
}

/// Geometry used for ranking: float metric, or binarize-then-Hamming.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankingMode {
    Float(Metric),
    Binary(QuantizeMode),
}

impl RankingMode {
    pub fn metric_name(&self) -> &'static str {
        match self {
            RankingMode::Float(m) => m.name(),
            RankingMode::Binary(_) => "hamming",
        }
    }

    fn rank(&self, queries: &QuerySet, catalog: &EmbeddingSet) -> Result<Vec<Ranking>> {
        match self {
            RankingMode::Float(metric) => rank_all(queries, catalog, *metric),
            RankingMode::Binary(mode) => {
                let q = quantize_with(*mode, queries);
                let c = quantize_with(*mode, catalog);
                rank_all_codes(&q, &c)
            }
        }
    }
}

fn quantize_with(mode: QuantizeMode, set: &EmbeddingSet) -> crate::quantize::BinaryCodeSet {
    match mode {
        QuantizeMode::Sign => binarize_sign(set),
        QuantizeMode::SigmoidThreshold(t) => binarize_sigmoid(set, t),
    }
}

/// Stratified fold assignment: per class, items are dealt round-robin into
/// folds after a seeded shuffle, so per-class fold sizes differ by at most
/// one.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub n_folds: usize,
    pub assignments: Vec<u32>,
    pub seed: Seed,
}

impl FoldPlan {
    pub fn stratified(labels: &[u32], n_folds: usize, seed: Seed) -> Result<FoldPlan> {
        if n_folds < 2 {
            return Err(Error::data("cross-validation needs at least 2 folds"));
        }
        if labels.len() < n_folds {
            return Err(Error::data(format!(
                "cannot split {} items into {n_folds} folds",
                labels.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
        let mut classes: Vec<u32> = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();

        let mut assignments = vec![0_u32; labels.len()];
        for (ci, &class) in classes.iter().enumerate() {
            let mut members: Vec<usize> = labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == class)
                .map(|(i, _)| i)
                .collect();
            members.shuffle(&mut rng);
            // Rotate the starting fold per class so total fold sizes stay
            // balanced when classes don't divide evenly.
            for (k, &item) in members.iter().enumerate() {
                assignments[item] = ((ci + k) % n_folds) as u32;
            }
        }
        Ok(FoldPlan {
            n_folds,
            assignments,
            seed,
        })
    }

    pub fn fold_indices(&self, fold: u32) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn rest_indices(&self, fold: u32) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Factory fitting a reducer on a training set; the closure may capture
/// whatever side inputs it needs (e.g. sketches for head training).
pub type ReducerFactory<'a> = dyn Fn(&EmbeddingSet) -> Result<Box<dyn Reducer>> + 'a;

struct MetricAccumulator {
    per_query_ap: Vec<f64>,
    reciprocal_ranks: Vec<f64>,
    pr_sums: [f64; RECALL_LEVELS],
    pr_count: usize,
}

impl MetricAccumulator {
    fn new() -> Self {
        MetricAccumulator {
            per_query_ap: Vec::new(),
            reciprocal_ranks: Vec::new(),
            pr_sums: [0.0; RECALL_LEVELS],
            pr_count: 0,
        }
    }

    fn add_rankings(
        &mut self,
        rankings: &[Ranking],
        query_labels: &[u32],
        catalog_labels: &[u32],
    ) -> Result<()> {
        for ranking in rankings {
            let label = query_labels[ranking.query_index];
            if !catalog_labels.contains(&label) {
                log::warn!(
                    "query {} skipped for this fold: class {label} absent from held-out part",
                    ranking.query_index
                );
                continue;
            }
            self.per_query_ap
                .push(average_precision(ranking, label, catalog_labels)?);
            let rank = first_relevant_rank(ranking, label, catalog_labels)?;
            self.reciprocal_ranks.push(1.0 / rank as f64);
            let curve = query_precision_recall(ranking, label, catalog_labels)?;
            for (s, c) in self.pr_sums.iter_mut().zip(curve) {
                *s += c;
            }
            self.pr_count += 1;
        }
        Ok(())
    }

    fn finish(self, config: ReportConfig, timing_s: Option<f64>) -> Result<EvalReport> {
        if self.per_query_ap.is_empty() {
            return Err(Error::data("evaluation produced no valid query"));
        }
        let map = self.per_query_ap.iter().sum::<f64>() / self.per_query_ap.len() as f64;
        let mrr =
            self.reciprocal_ranks.iter().sum::<f64>() / self.reciprocal_ranks.len() as f64;
        let pr_curve = self
            .pr_sums
            .iter()
            .enumerate()
            .map(|(k, &s)| (k as f64 / 10.0, s / self.pr_count as f64))
            .collect();
        Ok(EvalReport {
            config,
            map,
            mrr,
            pr_curve,
            per_query_ap: self.per_query_ap,
            timing_s,
        })
    }
}

/// Cross-validated evaluation: per fold, fit on the other folds' catalog
/// vectors only, transform the held-out fold and all queries, rank, and
/// aggregate metrics across folds.
pub fn cross_validate(
    catalog: &EmbeddingSet,
    queries: &QuerySet,
    reducer_factory: &ReducerFactory<'_>,
    plan: &FoldPlan,
    ranking_mode: RankingMode,
    config: ReportConfig,
) -> Result<EvalReport> {
    if plan.assignments.len() != catalog.len() {
        return Err(Error::shape(format!(
            "fold plan covers {} items but catalog has {}",
            plan.assignments.len(),
            catalog.len()
        )));
    }
    if queries.dim() != catalog.dim() {
        return Err(Error::shape(format!(
            "query dim {} does not match catalog dim {}",
            queries.dim(),
            catalog.dim()
        )));
    }
    let mut acc = MetricAccumulator::new();
    for fold in 0..plan.n_folds as u32 {
        let train = catalog.select(&plan.rest_indices(fold))?;
        let held = catalog.select(&plan.fold_indices(fold))?;
        let reducer = reducer_factory(&train)?;
        let reduced_held = reducer.transform(&held)?;
        let reduced_queries = reducer.transform(queries)?;
        let rankings = ranking_mode.rank(&reduced_queries, &reduced_held)?;
        acc.add_rankings(&rankings, queries.labels(), held.labels())?;
    }
    acc.finish(config, None)
}

/// Single-shot evaluation: fit on the whole catalog, transform catalog and
/// queries, rank queries against the full transformed catalog.
pub fn evaluate_direct(
    catalog: &EmbeddingSet,
    queries: &QuerySet,
    reducer: &dyn Reducer,
    ranking_mode: RankingMode,
    config: ReportConfig,
) -> Result<EvalReport> {
    let reduced_catalog = reducer.transform(catalog)?;
    let reduced_queries = reducer.transform(queries)?;
    let rankings = ranking_mode.rank(&reduced_queries, &reduced_catalog)?;
    let mut acc = MetricAccumulator::new();
    acc.add_rankings(&rankings, queries.labels(), catalog.labels())?;
    acc.finish(config, None)
}
