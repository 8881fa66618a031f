//! Measurement resolution in entropy quanta.
//!
//! The entropy error is `k * s_e`, where `k` depends on the error
//! distribution. One distinguishable interval ("quantum") is twice the
//! entropy error wide, so a test whose scores span `range` standard
//! deviations resolves `range / (2 k s_e)` quanta.

use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Score range adopted when the sample size is not given, in sigma units.
pub const DEFAULT_SCORE_RANGE: f64 = 7.0;

const RANGE_ANCHOR_N: f64 = 700.0;
const RANGE_AT_ANCHOR: f64 = 6.0;
const RANGE_PER_DOUBLING: f64 = 0.4;
const RANGE_FLOOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ErrorDistribution {
    Uniform,
    #[default]
    Normal,
}

/// How the entropy coefficient enters the quanta count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CoefficientPrecision {
    #[default]
    Exact,
    /// Coefficient rounded to two decimals (2.07 for normal errors, width 4.14 s_e),
    /// the convention behind the published reliability/quanta table.
    TwoDecimals,
}

pub fn entropy_coefficient(distribution: ErrorDistribution) -> f64 {
    match distribution {
        ErrorDistribution::Uniform => libm::sqrt(3.0),
        ErrorDistribution::Normal => libm::sqrt(core::f64::consts::PI * core::f64::consts::E / 2.0),
    }
}

fn coefficient_with(distribution: ErrorDistribution, precision: CoefficientPrecision) -> f64 {
    let k = entropy_coefficient(distribution);
    match precision {
        CoefficientPrecision::Exact => k,
        CoefficientPrecision::TwoDecimals => libm::round(k * 100.0) / 100.0,
    }
}

/// Expected range of standard-normal scores, in sigma units.
///
/// Without a sample size this is the adopted average of 7. With one it is
/// 6 at N = 700, moving 0.4 per doubling, floored at 2.
pub fn expected_score_range(sample_size: Option<u64>) -> f64 {
    match sample_size {
        None => DEFAULT_SCORE_RANGE,
        Some(n) => {
            let doublings = libm::log2(n as f64) - libm::log2(RANGE_ANCHOR_N);
            (RANGE_AT_ANCHOR + RANGE_PER_DOUBLING * doublings).max(RANGE_FLOOR)
        }
    }
}

pub fn quanta_count(reliability: f64, range: f64, distribution: ErrorDistribution) -> Result<f64> {
    quanta_count_with(reliability, range, distribution, CoefficientPrecision::Exact)
}

pub fn quanta_count_with(
    reliability: f64,
    range: f64,
    distribution: ErrorDistribution,
    precision: CoefficientPrecision,
) -> Result<f64> {
    if reliability >= 1.0 {
        return Err(Error::Domain("reliability 1 gives unbounded resolution"));
    }
    if !(reliability >= 0.0) {
        return Err(Error::Domain("reliability must lie in [0, 1)"));
    }
    if !(range > 0.0) {
        return Err(Error::Domain("score range must be positive"));
    }
    let k = coefficient_with(distribution, precision);
    Ok(range / (2.0 * k * libm::sqrt(1.0 - reliability)))
}

/// Verbal reliability characterization.
pub fn reliability_label(reliability: f64) -> &'static str {
    if reliability >= 0.99 {
        "practically never encountered"
    } else if reliability >= 0.90 {
        "excellent"
    } else if reliability >= 0.80 {
        "good"
    } else if reliability >= 0.70 {
        "satisfactory"
    } else {
        "unsatisfactory"
    }
}

/// The quanta count rounded half-up onto the 2..=5 school grade scale.
pub fn mnemonic_grade(quanta: f64) -> u8 {
    libm::floor(quanta + 0.5).clamp(2.0, 5.0) as u8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantaReport {
    pub reliability: f64,
    pub sem_standardized: f64,
    pub error_distribution: ErrorDistribution,
    pub precision: CoefficientPrecision,
    pub entropy_coefficient: f64,
    /// Entropy error in sigma units.
    pub entropy_error: f64,
    pub score_range: f64,
    pub sample_size: Option<u64>,
    pub quanta: f64,
    /// `quanta` to one decimal.
    pub quanta_display: String,
    pub reliability_label: String,
    pub mnemonic_grade: u8,
}

pub fn quanta_report(reliability: f64, sample_size: Option<u64>, distribution: ErrorDistribution) -> Result<QuantaReport> {
    quanta_report_with(reliability, sample_size, distribution, CoefficientPrecision::Exact)
}

pub fn quanta_report_with(
    reliability: f64,
    sample_size: Option<u64>,
    distribution: ErrorDistribution,
    precision: CoefficientPrecision,
) -> Result<QuantaReport> {
    let score_range = expected_score_range(sample_size);
    let quanta = quanta_count_with(reliability, score_range, distribution, precision)?;
    let k = coefficient_with(distribution, precision);
    let sem = libm::sqrt(1.0 - reliability);
    Ok(QuantaReport {
        reliability,
        sem_standardized: sem,
        error_distribution: distribution,
        precision,
        entropy_coefficient: k,
        entropy_error: k * sem,
        score_range,
        sample_size,
        quanta,
        quanta_display: alloc::format!("{quanta:.1}"),
        reliability_label: String::from(reliability_label(reliability)),
        mnemonic_grade: mnemonic_grade(quanta),
    })
}
