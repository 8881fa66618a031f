use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::jml::Calibration;
use super::ItemParams;
use crate::math::logistic;
use crate::response::ResponseMatrix;

pub const WEIGHT_FLOOR: f64 = 0.01;
const WEIGHT_CUTOFF: f64 = -2.0;
const WEIGHT_SHARPNESS: f64 = 2.0;

/// Label carried in every calibration output that uses weights.
pub const WEIGHTING_SCHEME: &str =
    "stand-in lz weighting: w = max(0.01, 1 / (1 + exp(-2 (lz + 2))))";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonFit {
    pub examinee_id: String,
    /// `None` when the statistic degenerates (fewer than two responses or zero variance).
    pub lz: Option<f64>,
    pub weight: f64,
}

/// Examinee weight from person fit: near 1 for conforming patterns, floored at 0.01.
pub fn misfit_weights(lz: f64) -> f64 {
    logistic(WEIGHT_SHARPNESS * (lz - WEIGHT_CUTOFF)).max(WEIGHT_FLOOR)
}

/// Standardized log-likelihood of one response pattern at a fixed ability.
pub fn person_lz(responses: &[Option<bool>], items: &[ItemParams], theta: f64) -> Option<f64> {
    let (mut ll, mut expected, mut variance, mut count) = (0.0, 0.0, 0.0, 0usize);
    for (x, item) in responses.iter().zip(items) {
        let Some(x) = *x else { continue };
        let p = item.probability(theta).clamp(1e-12, 1.0 - 1e-12);
        let q = 1.0 - p;
        let (lp, lq) = (libm::log(p), libm::log(q));
        ll += if x { lp } else { lq };
        expected += p * lp + q * lq;
        variance += p * q * (lp - lq) * (lp - lq);
        count += 1;
    }
    if count < 2 || variance < 1e-12 {
        return None;
    }
    Some((ll - expected) / libm::sqrt(variance))
}

pub fn person_fit_lz(matrix: &ResponseMatrix, calibration: &Calibration) -> Vec<PersonFit> {
    (0..matrix.examinee_count())
        .map(|i| {
            let responses = calibration.omit.scored_row(matrix.row(i));
            let lz = person_lz(&responses, &calibration.items, calibration.theta[i]);
            PersonFit {
                examinee_id: matrix.examinee_ids()[i].clone(),
                lz,
                weight: lz.map_or(1.0, misfit_weights),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_examples() {
        assert!((misfit_weights(0.0) - 1.0 / (1.0 + libm::exp(-4.0))).abs() < 1e-15);
        assert!((misfit_weights(0.0) - 0.982).abs() < 5e-4);
        assert_eq!(misfit_weights(-2.0), 0.5);
        // 1 / (1 + e^8) = 0.000335 sits below the floor.
        assert_eq!(misfit_weights(-6.0), WEIGHT_FLOOR);
    }

    #[test]
    fn weight_is_monotone() {
        let mut last = 0.0;
        for i in -100..100 {
            let w = misfit_weights(i as f64 * 0.1);
            assert!(w >= last && (WEIGHT_FLOOR..=1.0).contains(&w));
            last = w;
        }
    }

    #[test]
    fn single_item_is_undefined() {
        assert_eq!(person_lz(&[Some(true)], &[ItemParams::rasch(0.3)], 0.0), None);
    }

    #[test]
    fn guttman_beats_reversed_guttman() {
        let items: Vec<ItemParams> = (0..10).map(|j| ItemParams::rasch(j as f64 * 0.6 - 2.7)).collect();
        let guttman: Vec<Option<bool>> = (0..10).map(|j| Some(j < 5)).collect();
        let reversed: Vec<Option<bool>> = (0..10).map(|j| Some(j >= 5)).collect();
        let good = person_lz(&guttman, &items, 0.0).unwrap();
        let bad = person_lz(&reversed, &items, 0.0).unwrap();
        assert!(good > 0.0 && bad < -2.0);
    }
}
