//! Retrieval metrics over full rankings: average precision, reciprocal rank,
//! and the 11-point interpolated recall-precision curve.

use crate::error::{Error, Result};
use crate::retrieval::Ranking;

/// The 11 standard recall levels 0.0, 0.1, …, 1.0.
pub const RECALL_LEVELS: usize = 11;

/// Average precision of one query over a full ranking: the mean, over
/// relevant items in rank order, of (relevant seen so far) / rank, ranks
/// 1-based.
pub fn average_precision(
    ranking: &Ranking,
    query_label: u32,
    catalog_labels: &[u32],
) -> Result<f64> {
    let relevant_total = catalog_labels.iter().filter(|&&l| l == query_label).count();
    if relevant_total == 0 {
        return Err(Error::data(format!(
            "no catalog item carries query label {query_label}"
        )));
    }
    let mut hits = 0_usize;
    let mut sum = 0.0_f64;
    for (pos, &ci) in ranking.order.iter().enumerate() {
        if catalog_labels[ci as usize] == query_label {
            hits += 1;
            sum += hits as f64 / (pos + 1) as f64;
        }
    }
    Ok(sum / relevant_total as f64)
}

/// Rank (1-based) of the first relevant item.
pub fn first_relevant_rank(
    ranking: &Ranking,
    query_label: u32,
    catalog_labels: &[u32],
) -> Result<usize> {
    ranking
        .order
        .iter()
        .position(|&ci| catalog_labels[ci as usize] == query_label)
        .map(|pos| pos + 1)
        .ok_or_else(|| {
            Error::data(format!(
                "no catalog item carries query label {query_label}"
            ))
        })
}

/// Mean AP over queries; queries with no relevant item are skipped with a
/// warning.
pub fn mean_average_precision(
    rankings: &[Ranking],
    query_labels: &[u32],
    catalog_labels: &[u32],
) -> Result<f64> {
    let aps = per_query_average_precision(rankings, query_labels, catalog_labels)?;
    Ok(aps.iter().sum::<f64>() / aps.len() as f64)
}

/// Per-query APs in query order, skipping zero-relevant queries with a
/// warning.
pub fn per_query_average_precision(
    rankings: &[Ranking],
    query_labels: &[u32],
    catalog_labels: &[u32],
) -> Result<Vec<f64>> {
    let mut aps = Vec::with_capacity(rankings.len());
    for ranking in rankings {
        let label = query_labels[ranking.query_index];
        match average_precision(ranking, label, catalog_labels) {
            Ok(ap) => aps.push(ap),
            Err(Error::Data(_)) => {
                log::warn!(
                    "query {} skipped: no relevant catalog item for label {label}",
                    ranking.query_index
                );
            }
            Err(e) => return Err(e),
        }
    }
    if aps.is_empty() {
        return Err(Error::data("no query had a relevant catalog item"));
    }
    Ok(aps)
}

/// Mean over queries of 1 / (rank of first relevant item).
pub fn mean_reciprocal_rank(
    rankings: &[Ranking],
    query_labels: &[u32],
    catalog_labels: &[u32],
) -> Result<f64> {
    let mut sum = 0.0_f64;
    let mut count = 0_usize;
    for ranking in rankings {
        let label = query_labels[ranking.query_index];
        match first_relevant_rank(ranking, label, catalog_labels) {
            Ok(rank) => {
                sum += 1.0 / rank as f64;
                count += 1;
            }
            Err(Error::Data(_)) => {
                log::warn!(
                    "query {} skipped: no relevant catalog item for label {label}",
                    ranking.query_index
                );
            }
            Err(e) => return Err(e),
        }
    }
    if count == 0 {
        return Err(Error::data("no query had a relevant catalog item"));
    }
    Ok(sum / count as f64)
}

/// Interpolated precision of one query at the 11 standard recall levels:
/// max precision over all cut-offs whose recall reaches the level.
pub fn query_precision_recall(
    ranking: &Ranking,
    query_label: u32,
    catalog_labels: &[u32],
) -> Result<[f64; RECALL_LEVELS]> {
    let relevant_total = catalog_labels.iter().filter(|&&l| l == query_label).count();
    if relevant_total == 0 {
        return Err(Error::data(format!(
            "no catalog item carries query label {query_label}"
        )));
    }
    // Precision/recall after each cut-off position.
    let mut hits = 0_usize;
    let mut points = Vec::with_capacity(ranking.order.len());
    for (pos, &ci) in ranking.order.iter().enumerate() {
        if catalog_labels[ci as usize] == query_label {
            hits += 1;
        }
        let precision = hits as f64 / (pos + 1) as f64;
        let recall = hits as f64 / relevant_total as f64;
        points.push((recall, precision));
    }
    let mut curve = [0.0_f64; RECALL_LEVELS];
    for (k, slot) in curve.iter_mut().enumerate() {
        let level = k as f64 / 10.0;
        *slot = points
            .iter()
            .filter(|(r, _)| *r >= level - 1e-12)
            .map(|(_, p)| *p)
            .fold(0.0, f64::max);
    }
    Ok(curve)
}

/// 11-point interpolated recall-precision curve averaged over queries.
pub fn precision_recall_curve(
    rankings: &[Ranking],
    query_labels: &[u32],
    catalog_labels: &[u32],
) -> Result<Vec<(f64, f64)>> {
    let mut sums = [0.0_f64; RECALL_LEVELS];
    let mut count = 0_usize;
    for ranking in rankings {
        let label = query_labels[ranking.query_index];
        match query_precision_recall(ranking, label, catalog_labels) {
            Ok(curve) => {
                for (s, c) in sums.iter_mut().zip(curve) {
                    *s += c;
                }
                count += 1;
            }
            Err(Error::Data(_)) => {
                log::warn!(
                    "query {} skipped: no relevant catalog item for label {label}",
                    ranking.query_index
                );
            }
            Err(e) => return Err(e),
        }
    }
    if count == 0 {
        return Err(Error::data("no query had a relevant catalog item"));
    }
    Ok(sums
        .iter()
        .enumerate()
        .map(|(k, &s)| (k as f64 / 10.0, s / count as f64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Builds a ranking whose relevance pattern (true = relevant) is given;
    /// catalog labels are 1 for relevant slots, 0 otherwise, query label 1.
    fn ranking_of(pattern: &[bool]) -> (Ranking, Vec<u32>) {
        let order: Vec<u32> = (0..pattern.len() as u32).collect();
        let distances = (0..pattern.len()).map(|i| i as f64).collect();
        let labels = pattern.iter().map(|&r| u32::from(r)).collect();
        (
            Ranking {
                query_index: 0,
                order,
                distances,
            },
            labels,
        )
    }

    #[test]
    fn perfect_ranking_has_ap_one() {
        let (ranking, labels) = ranking_of(&[true, true, true, false, false]);
        assert_eq!(average_precision(&ranking, 1, &labels).unwrap(), 1.0);
    }

    #[test]
    fn interleaved_pattern_hand_computed() {
        // Pattern 1,0,1,0 with two relevant: (1/1 + 2/3) / 2 = 5/6.
        let (ranking, labels) = ranking_of(&[true, false, true, false]);
        let ap = average_precision(&ranking, 1, &labels).unwrap();
        assert!((ap - 5.0 / 6.0).abs() < 1e-15, "ap = {ap}");
    }

    #[test]
    fn zero_relevant_is_data_error() {
        let (ranking, labels) = ranking_of(&[false, false]);
        assert!(matches!(
            average_precision(&ranking, 1, &labels),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn map_of_two_queries_is_plain_mean() {
        let (r1, labels) = ranking_of(&[true, true, false, false]);
        let (mut r2, _) = ranking_of(&[false, true, false, true]);
        r2.query_index = 1;
        // AP(r2) for labels [1,1,0,0]? Build shared catalog: relevant = {0,1}.
        // r2 ranks them at positions 2 and 4: (1/2 + 2/4)/2 = 0.5.
        r2.order = vec![2, 0, 3, 1];
        let rankings = vec![r1, r2];
        let map = mean_average_precision(&rankings, &[1, 1], &labels).unwrap();
        assert!((map - 0.75).abs() < 1e-15, "map = {map}");
    }

    #[test]
    fn single_query_map_equals_its_ap() {
        let (ranking, labels) = ranking_of(&[false, true, true]);
        let ap = average_precision(&ranking, 1, &labels).unwrap();
        let map = mean_average_precision(std::slice::from_ref(&ranking), &[1], &labels).unwrap();
        assert_eq!(ap, map);
    }

    #[test]
    fn mrr_hand_computed() {
        // First relevant at ranks 1, 2, 4 -> (1 + 1/2 + 1/4) / 3.
        let (r1, labels) = ranking_of(&[true, false, false, false]);
        let (mut r2, _) = ranking_of(&[false, true, false, false]);
        let (mut r3, _) = ranking_of(&[false, false, false, true]);
        r2.query_index = 1;
        r2.order = vec![1, 0, 2, 3];
        r3.query_index = 2;
        r3.order = vec![1, 2, 3, 0];
        let mrr = mean_reciprocal_rank(&[r1, r2, r3], &[1, 1, 1], &labels).unwrap();
        assert!((mrr - (1.0 + 0.5 + 0.25) / 3.0).abs() < 1e-15, "mrr = {mrr}");
    }

    #[test]
    fn all_first_ranked_gives_mrr_one() {
        let (ranking, labels) = ranking_of(&[true, false]);
        let mrr = mean_reciprocal_rank(std::slice::from_ref(&ranking), &[1], &labels).unwrap();
        assert_eq!(mrr, 1.0);
    }

    #[test]
    fn perfect_ranking_pr_curve_is_flat_one() {
        let (ranking, labels) = ranking_of(&[true, true, false, false]);
        let curve = precision_recall_curve(std::slice::from_ref(&ranking), &[1], &labels).unwrap();
        assert_eq!(curve.len(), 11);
        for (r, p) in curve {
            assert_eq!(p, 1.0, "precision at recall {r}");
        }
    }

    #[test]
    fn interpolated_curve_is_non_increasing() {
        let (ranking, labels) = ranking_of(&[false, true, false, true, true, false]);
        let curve = precision_recall_curve(std::slice::from_ref(&ranking), &[1], &labels).unwrap();
        for w in curve.windows(2) {
            assert!(w[0].1 >= w[1].1, "curve increased: {curve:?}");
        }
    }

    #[test]
    fn single_relevant_item_ap_equals_reciprocal_rank() {
        for pos in 0..5 {
            let mut pattern = [false; 5];
            pattern[pos] = true;
            let (ranking, labels) = ranking_of(&pattern);
            let ap = average_precision(&ranking, 1, &labels).unwrap();
            let rank = first_relevant_rank(&ranking, 1, &labels).unwrap();
            assert_eq!(ap, 1.0 / rank as f64);
        }
    }
}
