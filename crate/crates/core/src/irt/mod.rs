//! Logistic item response models and their joint calibration.

mod ability;
mod fit;
mod jml;
mod virtual_items;

pub use ability::{map_ability, mle_ability, NormalPrior};
pub use fit::{misfit_weights, person_fit_lz, person_lz, PersonFit, WEIGHT_FLOOR, WEIGHTING_SCHEME};
pub use jml::{jml_calibrate, Calibration, CalibrationOptions, ExtremePolicy, IrtOmit};
pub use virtual_items::{augment_virtual_items, AugmentedMatrix, VIRTUAL_HIGH_ID, VIRTUAL_LOW_ID};

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guessing::guess_probability;
use crate::math::logistic;
use crate::response::{FormatMap, ResponseMatrix};

pub(crate) const THETA_BOUND: f64 = 10.0;
pub(crate) const B_BOUND: f64 = 10.0;
pub(crate) const A_MIN: f64 = 0.2;
pub(crate) const A_MAX: f64 = 5.0;
pub(crate) const MAX_STEP: f64 = 1.0;

/// Slope `a`, location `b`, lower asymptote `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItemParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ItemParams {
    pub fn rasch(b: f64) -> Self {
        Self { a: 1.0, b, c: 0.0 }
    }

    pub fn two_pl(a: f64, b: f64) -> Self {
        Self { a, b, c: 0.0 }
    }

    pub fn three_pl(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    /// `c + (1 - c) / (1 + exp(-a (theta - b)))`
    #[inline]
    pub fn probability(&self, theta: f64) -> f64 {
        self.c + (1.0 - self.c) * logistic(self.a * (theta - self.b))
    }

    /// Derivative of [`probability`](Self::probability) in theta.
    pub fn slope_at(&self, theta: f64) -> f64 {
        let p = logistic(self.a * (theta - self.b));
        (1.0 - self.c) * self.a * p * (1.0 - p)
    }

    /// Score and Fisher information of one response with respect to
    /// `eta = a (theta - b)`.
    #[inline]
    pub(crate) fn eta_terms(&self, theta: f64, correct: bool) -> (f64, f64) {
        let ps = logistic(self.a * (theta - self.b));
        if self.c == 0.0 {
            let x = if correct { 1.0 } else { 0.0 };
            return (x - ps, ps * (1.0 - ps));
        }
        let p = self.c + (1.0 - self.c) * ps;
        let dp = (1.0 - self.c) * ps * (1.0 - ps);
        let pq = (p * (1.0 - p)).max(1e-300);
        let x = if correct { 1.0 } else { 0.0 };
        ((x - p) * dp / pq, dp * dp / pq)
    }

    pub fn is_valid(&self) -> bool {
        self.a > 0.0 && self.a.is_finite() && self.b.is_finite() && (0.0..1.0).contains(&self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Rasch,
    TwoPl,
    ThreePl,
}

/// Model family. Three-parameter models carry one fixed lower asymptote per item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Rasch,
    TwoPl,
    ThreePl { floors: Vec<f64> },
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Rasch => ModelKind::Rasch,
            Model::TwoPl => ModelKind::TwoPl,
            Model::ThreePl { .. } => ModelKind::ThreePl,
        }
    }

    /// Three-parameter model whose floors are the blind-guess probabilities
    /// of the items' formats.
    pub fn three_pl_from_formats(matrix: &ResponseMatrix, formats: &FormatMap) -> Result<Self> {
        let floors = matrix
            .item_ids()
            .iter()
            .map(|id| {
                let format = formats.get(id).ok_or_else(|| Error::MissingFormat(id.clone()))?;
                guess_probability(*format)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Model::ThreePl { floors })
    }
}

/// Response probability under `model`; parameters the model does not use are ignored.
pub fn icc_probability(model: ModelKind, theta: f64, params: &ItemParams) -> f64 {
    match model {
        ModelKind::Rasch => ItemParams::rasch(params.b).probability(theta),
        ModelKind::TwoPl => ItemParams::two_pl(params.a, params.b).probability(theta),
        ModelKind::ThreePl => params.probability(theta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `1 / (1 + e^{-x})` with the exponential as a power series.
    fn logistic_series(x: f64) -> f64 {
        let (mut e, mut term) = (0.0, 1.0);
        for k in 1..60 {
            e += term;
            term *= -x / k as f64;
        }
        1.0 / (1.0 + e)
    }

    #[test]
    fn icc_examples() {
        let rasch = ItemParams::rasch(0.7);
        assert_eq!(icc_probability(ModelKind::Rasch, 0.7, &rasch), 0.5);
        let guess = ItemParams::three_pl(1.3, -0.2, 0.25);
        assert!((icc_probability(ModelKind::ThreePl, -0.2, &guess) - 0.625).abs() < 1e-15);
        let two = ItemParams::two_pl(2.0, 0.0);
        let oracle = logistic_series(2.0);
        assert!((icc_probability(ModelKind::TwoPl, 1.0, &two) - oracle).abs() < 1e-14);
        assert!((oracle - 0.88080).abs() < 5e-6);
    }

    #[test]
    fn model_kind_ignores_unused_parameters() {
        let p = ItemParams::three_pl(2.0, 0.0, 0.3);
        assert_eq!(icc_probability(ModelKind::Rasch, 1.0, &p), logistic(1.0));
        assert_eq!(icc_probability(ModelKind::TwoPl, 1.0, &p), logistic(2.0));
    }

    #[test]
    fn slope_matches_finite_difference() {
        let params = [ItemParams::rasch(0.3), ItemParams::two_pl(1.7, -0.5), ItemParams::three_pl(0.8, 1.0, 0.2)];
        for p in params {
            for t in -3..=3 {
                let t = t as f64;
                let h = 1e-5;
                let fd = (p.probability(t + h) - p.probability(t - h)) / (2.0 * h);
                assert!((fd - p.slope_at(t)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn eta_terms_agree_across_branches() {
        // A floor of 1e-300 is numerically 2PL; both branches must agree.
        let exact = ItemParams::two_pl(1.2, 0.4);
        let tiny = ItemParams::three_pl(1.2, 0.4, 1e-300);
        for x in [true, false] {
            let (g0, i0) = exact.eta_terms(0.9, x);
            let (g1, i1) = tiny.eta_terms(0.9, x);
            assert!((g0 - g1).abs() < 1e-12 && (i0 - i1).abs() < 1e-12);
        }
    }
}
