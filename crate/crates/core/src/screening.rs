//! Fisher z machinery and confidence-interval item screening.
//!
//! A point estimate of the item-criterion correlation at or above a
//! threshold does not make the true correlation acceptable when the
//! normative sample is small. Items are therefore accepted only when the
//! whole interval clears the threshold.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classical::discrimination_on;
use crate::error::{Error, Result};
use crate::math::two_sided_quantile;
use crate::response::ResponseMatrix;
use crate::simulation::rng::stream;

pub const DEFAULT_CONFIDENCE: f64 = 0.95;
pub const DEFAULT_THRESHOLD_R: f64 = 0.30;
pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 2000;

/// `atanh(r)`.
pub fn fisher_transform(r: f64) -> Result<f64> {
    if !(r.abs() < 1.0) {
        return Err(Error::Domain("Fisher transform needs |r| < 1"));
    }
    Ok(libm::atanh(r))
}

/// `tanh(z)`.
pub fn fisher_inverse(z: f64) -> f64 {
    libm::tanh(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCI {
    pub r_observed: f64,
    pub n: usize,
    pub confidence: f64,
    pub z_observed: f64,
    pub half_width_z: f64,
    pub lower_r: f64,
    pub upper_r: f64,
}

impl CorrelationCI {
    pub fn covers(&self, r: f64) -> bool {
        self.lower_r <= r && r <= self.upper_r
    }
}

fn check_confidence(confidence: f64) -> Result<()> {
    if confidence > 0.0 && confidence < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain("confidence must lie in (0, 1)"))
    }
}

/// Fisher-z interval: `atanh(r) ± q / sqrt(n - 3)` mapped back through `tanh`.
pub fn correlation_confidence_interval(r: f64, n: usize, confidence: f64) -> Result<CorrelationCI> {
    if n < 4 {
        return Err(Error::SampleSize(n));
    }
    check_confidence(confidence)?;
    let z = fisher_transform(r)?;
    let half_width_z = two_sided_quantile(confidence) / libm::sqrt((n - 3) as f64);
    Ok(CorrelationCI {
        r_observed: r,
        n,
        confidence,
        z_observed: z,
        half_width_z,
        lower_r: fisher_inverse(z - half_width_z),
        upper_r: fisher_inverse(z + half_width_z),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// The whole interval clears the threshold.
    AcceptConfident,
    /// The interval straddles the threshold; a larger sample is needed.
    Indeterminate,
    /// The whole interval lies below the threshold.
    Reject,
}

impl Verdict {
    pub fn from_bounds(lower: f64, upper: f64, threshold: f64) -> Self {
        if lower >= threshold {
            Verdict::AcceptConfident
        } else if upper < threshold {
            Verdict::Reject
        } else {
            Verdict::Indeterminate
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeningDecision {
    pub verdict: Verdict,
    pub threshold_r: f64,
    pub ci: CorrelationCI,
}

pub fn screen_item(r: f64, n: usize, threshold_r: f64, confidence: f64) -> Result<ScreeningDecision> {
    let ci = correlation_confidence_interval(r, n, confidence)?;
    Ok(ScreeningDecision { verdict: Verdict::from_bounds(ci.lower_r, ci.upper_r, threshold_r), threshold_r, ci })
}

/// Smallest n whose z half-width does not exceed `half_width_z`.
pub fn required_normative_sample(half_width_z: f64, confidence: f64) -> Result<usize> {
    if !(half_width_z > 0.0) || !half_width_z.is_finite() {
        return Err(Error::Domain("half-width must be positive"));
    }
    check_confidence(confidence)?;
    let q = two_sided_quantile(confidence);
    let ratio = q / half_width_z;
    let mut n = libm::ceil(ratio * ratio + 3.0) as usize;
    // Guard the ceiling against rounding in either direction.
    while n > 4 && q / libm::sqrt((n - 4) as f64) <= half_width_z {
        n -= 1;
    }
    while q / libm::sqrt((n - 3) as f64) > half_width_z {
        n += 1;
    }
    Ok(n.max(4))
}

/// Bootstrap percentile interval for the discrimination index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationCI {
    pub d_observed: f64,
    pub confidence: f64,
    pub resamples: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationScreening {
    pub verdict: Verdict,
    pub threshold_d: f64,
    pub ci: DiscriminationCI,
}

/// Resamples examinees with replacement; resample `b` draws from stream `seed ^ b`.
/// Resamples whose groups are empty for the item are skipped.
pub fn discrimination_bootstrap_ci(
    matrix: &ResponseMatrix,
    item: &str,
    group_fraction: f64,
    confidence: f64,
    resamples: usize,
    seed: u64,
) -> Result<DiscriminationCI> {
    check_confidence(confidence)?;
    let j = matrix.item_index(item)?;
    let n = matrix.examinee_count();
    let totals = matrix.total_scores();
    let all: Vec<usize> = (0..n).collect();
    let d_observed = discrimination_on(matrix, j, group_fraction, &all, &totals)?;

    let mut draws = Vec::with_capacity(resamples);
    let mut rows = alloc::vec![0usize; n];
    for b in 0..resamples {
        let mut rng = stream(seed, b as u64);
        for r in rows.iter_mut() {
            *r = rng.random_range(0..n);
        }
        if let Ok(d) = discrimination_on(matrix, j, group_fraction, &rows, &totals) {
            draws.push(d);
        }
    }
    if draws.is_empty() {
        return Err(Error::Undefined("no bootstrap resample produced a discrimination index"));
    }
    draws.sort_by(f64::total_cmp);
    let alpha = (1.0 - confidence) / 2.0;
    Ok(DiscriminationCI {
        d_observed,
        confidence,
        resamples: draws.len(),
        lower: percentile(&draws, alpha),
        upper: percentile(&draws, 1.0 - alpha),
    })
}

pub fn screen_discrimination(
    matrix: &ResponseMatrix,
    item: &str,
    threshold_d: f64,
    confidence: f64,
    seed: u64,
) -> Result<DiscriminationScreening> {
    let ci = discrimination_bootstrap_ci(
        matrix,
        item,
        crate::classical::DEFAULT_GROUP_FRACTION,
        confidence,
        DEFAULT_BOOTSTRAP_RESAMPLES,
        seed,
    )?;
    Ok(DiscriminationScreening { verdict: Verdict::from_bounds(ci.lower, ci.upper, threshold_d), threshold_d, ci })
}

/// Linear-interpolated percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
