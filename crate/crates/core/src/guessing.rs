//! Guessing: formula-score correction and blind-guess probabilities by item format.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::response::{FormatFamily, FormatMap, ItemFormat, ResponseCell, ResponseMatrix};

/// Blind-guess success probability.
///
/// Multi-select assumes the guesser marks a uniformly random non-empty
/// subset and the item is scored all-or-nothing; see
/// [`multi_select_known_count_probability`] for the variant where the
/// number of keyed options is known.
pub fn guess_probability(format: ItemFormat) -> Result<f64> {
    format.validate()?;
    Ok(match format {
        ItemFormat::SingleChoice { m } => 1.0 / m as f64,
        ItemFormat::MultiSelect { m } => 1.0 / (libm::exp2(m as f64) - 1.0),
        ItemFormat::Matching { n, m } => 1.0 / falling_factorial(m, n),
        ItemFormat::Ordering { n } => 1.0 / falling_factorial(n, n),
    })
}

/// Multi-select when the guesser knows exactly `k` options are keyed: `1 / C(m, k)`.
pub fn multi_select_known_count_probability(m: u32, k: u32) -> Result<f64> {
    if m < 2 || k < 1 || k > m {
        return Err(Error::InvalidFormat("known-count multi-select needs m >= 2 and 1 <= k <= m"));
    }
    let k = k.min(m - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (m - i) as f64 / (i + 1) as f64;
    }
    Ok(1.0 / libm::round(c))
}

fn falling_factorial(m: u32, n: u32) -> f64 {
    (0..n).map(|i| (m - i) as f64).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuessProfile {
    pub format: ItemFormat,
    pub guess_probability: f64,
    pub meets_one_percent: bool,
}

pub fn guess_profile(format: ItemFormat) -> Result<GuessProfile> {
    let p = guess_probability(format)?;
    Ok(GuessProfile { format, guess_probability: p, meets_one_percent: p < 0.01 })
}

/// Smallest format of `family` whose guess probability is strictly below `p_max`.
/// Matching is searched over square instances.
pub fn min_format_size(family: FormatFamily, p_max: f64) -> Result<ItemFormat> {
    if !(p_max > 0.0 && p_max < 1.0) {
        return Err(Error::Domain("p_max must lie in (0, 1)"));
    }
    let build = |s: u32| match family {
        FormatFamily::SingleChoice => ItemFormat::SingleChoice { m: s },
        FormatFamily::MultiSelect => ItemFormat::MultiSelect { m: s },
        FormatFamily::Matching => ItemFormat::Matching { n: s, m: s },
        FormatFamily::Ordering => ItemFormat::Ordering { n: s },
    };
    // Single choice grows linearly; start next to the answer instead of walking.
    let mut size = match family {
        FormatFamily::SingleChoice => (libm::floor(1.0 / p_max) as u32).saturating_sub(1).max(2),
        FormatFamily::Matching => 1,
        _ => 2,
    };
    loop {
        let format = build(size);
        if guess_probability(format)? < p_max {
            return Ok(format);
        }
        size = size.checked_add(1).ok_or(Error::Domain("p_max is too small"))?;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectedScore {
    pub raw_right: u32,
    pub wrong: u32,
    pub omitted: u32,
    pub corrected: f64,
}

/// `R - W / (m - 1)`. Omitted items contribute nothing.
pub fn corrected_score(raw_right: u32, wrong: u32, option_count: u32) -> Result<f64> {
    if option_count < 2 {
        return Err(Error::Domain("option count must be at least 2"));
    }
    Ok(raw_right as f64 - wrong as f64 / (option_count - 1) as f64)
}

/// Per-examinee corrected scores. Single-choice items are corrected with
/// their own option count; other formats add their uncorrected 0/1 score.
pub fn corrected_scores(matrix: &ResponseMatrix, formats: &FormatMap) -> Result<Vec<CorrectedScore>> {
    let penalties: Vec<f64> = matrix
        .item_ids()
        .iter()
        .map(|id| {
            let format = formats.get(id).ok_or_else(|| Error::MissingFormat(id.clone()))?;
            format.validate()?;
            Ok(match *format {
                ItemFormat::SingleChoice { m } => 1.0 / (m - 1) as f64,
                _ => 0.0,
            })
        })
        .collect::<Result<_>>()?;

    Ok((0..matrix.examinee_count())
        .map(|i| {
            let mut score = CorrectedScore { raw_right: 0, wrong: 0, omitted: 0, corrected: 0.0 };
            for (cell, penalty) in matrix.row(i).iter().zip(&penalties) {
                match cell {
                    ResponseCell::Correct => {
                        score.raw_right += 1;
                        score.corrected += 1.0;
                    }
                    ResponseCell::Incorrect => {
                        score.wrong += 1;
                        score.corrected -= penalty;
                    }
                    ResponseCell::Omitted => score.omitted += 1,
                    ResponseCell::NotAdministered => {}
                }
            }
            score
        })
        .collect())
}
