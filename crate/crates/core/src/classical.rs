//! Classical item analysis: difficulty, item-criterion correlation,
//! upper/lower-group discrimination, KR-20 reliability.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::pearson;
use crate::response::{OmitPolicy, ResponseMatrix};

/// Conventional upper/lower group fraction.
pub const DEFAULT_GROUP_FRACTION: f64 = 0.27;

/// What an item is correlated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CriterionSource {
    /// The matrix's external criterion column.
    External,
    /// Number-right total over all other items.
    #[default]
    CorrectedItemTotal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemStats {
    pub item_id: String,
    /// `None` when the item was never administered.
    pub difficulty: Option<f64>,
    /// `None` when either variable has zero variance.
    pub criterion_r: Option<f64>,
    pub criterion_source: CriterionSource,
    pub discrimination_index: Option<f64>,
    pub administered_n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityEstimate {
    /// Reliability in [0, 1].
    pub coefficient: f64,
    /// KR-20 before clamping; can be negative.
    pub raw_coefficient: f64,
    /// SEM in raw-score units.
    pub sem_raw: f64,
    /// SEM in standard-deviation units, `sqrt(1 - coefficient)`.
    pub sem_standardized: f64,
    pub total_sd: f64,
    /// Set when a negative KR-20 was clamped to zero.
    pub clamped: bool,
}

impl ReliabilityEstimate {
    pub fn from_coefficient(raw_coefficient: f64, total_sd: f64) -> Self {
        let clamped = raw_coefficient < 0.0;
        let coefficient = raw_coefficient.clamp(0.0, 1.0);
        let sem_standardized = libm::sqrt(1.0 - coefficient);
        Self {
            coefficient,
            raw_coefficient,
            sem_raw: total_sd * sem_standardized,
            sem_standardized,
            total_sd,
            clamped,
        }
    }
}

fn item_scores(matrix: &ResponseMatrix, item: usize, policy: OmitPolicy) -> impl Iterator<Item = (usize, f64)> + '_ {
    matrix
        .column(item)
        .enumerate()
        .filter_map(move |(i, c)| c.score(policy).map(|s| (i, s)))
}

pub fn item_difficulty(matrix: &ResponseMatrix, item: &str, policy: OmitPolicy) -> Result<f64> {
    let j = matrix.item_index(item)?;
    difficulty_at(matrix, j, policy)
}

fn difficulty_at(matrix: &ResponseMatrix, j: usize, policy: OmitPolicy) -> Result<f64> {
    let (n, sum) = item_scores(matrix, j, policy).fold((0usize, 0.0), |(n, s), (_, x)| (n + 1, s + x));
    if n == 0 {
        return Err(Error::Undefined("item has no scored responses"));
    }
    Ok(sum / n as f64)
}

/// Point-biserial correlation of the 0/1 item score with a criterion.
pub fn item_criterion_correlation(
    matrix: &ResponseMatrix,
    item: &str,
    source: CriterionSource,
    policy: OmitPolicy,
) -> Result<f64> {
    let j = matrix.item_index(item)?;
    criterion_correlation_at(matrix, j, source, policy)
}

fn criterion_correlation_at(
    matrix: &ResponseMatrix,
    j: usize,
    source: CriterionSource,
    policy: OmitPolicy,
) -> Result<f64> {
    let criterion: Vec<f64> = match source {
        CriterionSource::External => matrix
            .criterion()
            .ok_or(Error::Undefined("matrix has no external criterion"))?
            .to_vec(),
        CriterionSource::CorrectedItemTotal => {
            let totals = matrix.total_scores();
            totals
                .iter()
                .enumerate()
                .map(|(i, t)| t - if matrix.cell(i, j) == crate::ResponseCell::Correct { 1.0 } else { 0.0 })
                .collect()
        }
    };
    let (xs, ys): (Vec<f64>, Vec<f64>) = item_scores(matrix, j, policy).map(|(i, s)| (s, criterion[i])).unzip();
    if xs.len() < 2 {
        return Err(Error::Undefined("fewer than two scored responses"));
    }
    pearson(&xs, &ys).ok_or(Error::Undefined("zero variance in item or criterion"))
}

/// Upper-minus-lower proportion correct, groups of `ceil(fraction * N)`
/// examinees ranked by number-right total. Ties keep input row order.
pub fn discrimination_index(matrix: &ResponseMatrix, item: &str, group_fraction: f64) -> Result<f64> {
    let j = matrix.item_index(item)?;
    let totals = matrix.total_scores();
    let rows: Vec<usize> = (0..matrix.examinee_count()).collect();
    discrimination_on(matrix, j, group_fraction, &rows, &totals)
}

/// Discrimination index restricted to the examinee rows in `rows` (repeats allowed).
pub(crate) fn discrimination_on(
    matrix: &ResponseMatrix,
    j: usize,
    group_fraction: f64,
    rows: &[usize],
    totals: &[f64],
) -> Result<f64> {
    if !(group_fraction > 0.0 && group_fraction <= 0.5) {
        return Err(Error::Domain("group fraction must lie in (0, 0.5]"));
    }
    if rows.len() < 2 {
        return Err(Error::Undefined("need at least two examinees"));
    }
    let size = libm::ceil(group_fraction * rows.len() as f64 - 1e-9) as usize;
    let size = size.clamp(1, rows.len() / 2);

    let mut ascending = rows.to_vec();
    ascending.sort_by(|a, b| totals[*a].total_cmp(&totals[*b]));
    let mut descending = rows.to_vec();
    descending.sort_by(|a, b| totals[*b].total_cmp(&totals[*a]));

    let proportion = |group: &[usize]| -> Result<f64> {
        let scored: Vec<f64> = group
            .iter()
            .filter_map(|&i| matrix.cell(i, j).score(OmitPolicy::OmitAsWrong))
            .collect();
        if scored.is_empty() {
            return Err(Error::Undefined("group has no responses to the item"));
        }
        Ok(scored.iter().sum::<f64>() / scored.len() as f64)
    };
    Ok(proportion(&descending[..size])? - proportion(&ascending[..size])?)
}

/// KR-20 (coefficient alpha for dichotomous items).
pub fn reliability_kr20(matrix: &ResponseMatrix, policy: OmitPolicy) -> Result<ReliabilityEstimate> {
    let (n, k) = (matrix.examinee_count(), matrix.item_count());
    if k < 2 || n < 2 {
        return Err(Error::Undefined("KR-20 needs at least two items and two examinees"));
    }
    let mut item_variance = 0.0;
    for j in 0..k {
        if let Ok(p) = difficulty_at(matrix, j, policy) {
            item_variance += p * (1.0 - p);
        }
    }
    let totals: Vec<f64> = (0..n)
        .map(|i| matrix.row(i).iter().filter_map(|c| c.score(policy)).sum())
        .collect();
    let m = crate::math::mean(&totals);
    let total_variance = totals.iter().map(|t| (t - m) * (t - m)).sum::<f64>() / n as f64;
    if total_variance <= 0.0 {
        return Err(Error::Undefined("total score has zero variance"));
    }
    let k = k as f64;
    let alpha = k / (k - 1.0) * (1.0 - item_variance / total_variance);
    Ok(ReliabilityEstimate::from_coefficient(alpha, libm::sqrt(total_variance)))
}

/// Difficulty, correlation, and discrimination for every item.
pub fn item_statistics(
    matrix: &ResponseMatrix,
    source: CriterionSource,
    policy: OmitPolicy,
    group_fraction: f64,
) -> Vec<ItemStats> {
    let totals = matrix.total_scores();
    let rows: Vec<usize> = (0..matrix.examinee_count()).collect();
    matrix
        .item_ids()
        .iter()
        .enumerate()
        .map(|(j, id)| ItemStats {
            item_id: id.clone(),
            difficulty: difficulty_at(matrix, j, policy).ok(),
            criterion_r: criterion_correlation_at(matrix, j, source, policy).ok(),
            criterion_source: source,
            discrimination_index: discrimination_on(matrix, j, group_fraction, &rows, &totals).ok(),
            administered_n: matrix.column(j).filter(|c| c.is_administered()).count(),
        })
        .collect()
}
