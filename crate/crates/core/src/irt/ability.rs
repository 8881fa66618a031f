use serde::{Deserialize, Serialize};

use super::{ItemParams, MAX_STEP, THETA_BOUND};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalPrior {
    pub mean: f64,
    pub sd: f64,
}

impl NormalPrior {
    pub const STANDARD: NormalPrior = NormalPrior { mean: 0.0, sd: 1.0 };
}

impl Default for NormalPrior {
    fn default() -> Self {
        Self::STANDARD
    }
}

fn log_likelihood(responses: &[Option<bool>], items: &[ItemParams], theta: f64) -> f64 {
    responses
        .iter()
        .zip(items)
        .filter_map(|(x, it)| x.map(|x| (x, it)))
        .map(|(x, it)| {
            let p = it.probability(theta);
            libm::log(if x { p } else { 1.0 - p }.max(1e-300))
        })
        .sum()
}

/// Score and information in theta summed over scored responses.
pub(crate) fn theta_terms<'a>(responses: impl Iterator<Item = (bool, &'a ItemParams)>, theta: f64) -> (f64, f64) {
    responses.fold((0.0, 0.0), |(g, info), (x, it)| {
        let (ge, ie) = it.eta_terms(theta, x);
        (g + it.a * ge, info + it.a * it.a * ie)
    })
}

/// Fisher scoring with step clamp and step halving on the log posterior.
fn maximize(responses: &[Option<bool>], items: &[ItemParams], prior: Option<NormalPrior>, start: f64) -> f64 {
    let objective = |t: f64| {
        let lp = prior.map_or(0.0, |p| -0.5 * ((t - p.mean) / p.sd) * ((t - p.mean) / p.sd));
        log_likelihood(responses, items, t) + lp
    };
    let mut theta = start.clamp(-THETA_BOUND, THETA_BOUND);
    let mut current = objective(theta);
    for _ in 0..200 {
        let scored = responses.iter().zip(items).filter_map(|(x, it)| x.map(|x| (x, it)));
        let (mut g, mut info) = theta_terms(scored, theta);
        if let Some(p) = prior {
            g -= (theta - p.mean) / (p.sd * p.sd);
            info += 1.0 / (p.sd * p.sd);
        }
        if info <= 0.0 {
            break;
        }
        let mut step = (g / info).clamp(-MAX_STEP, MAX_STEP);
        let mut accepted = false;
        for _ in 0..40 {
            let next = (theta + step).clamp(-THETA_BOUND, THETA_BOUND);
            let value = objective(next);
            if value >= current {
                step = next - theta;
                theta = next;
                current = value;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || step.abs() < 1e-12 {
            break;
        }
    }
    theta
}

/// Posterior mode of ability given fixed items and a normal prior.
/// Finite for every response pattern, extreme ones included.
pub fn map_ability(responses: &[Option<bool>], items: &[ItemParams], prior: NormalPrior) -> Result<f64> {
    if responses.len() != items.len() {
        return Err(Error::Domain("responses and items differ in length"));
    }
    if !(prior.sd > 0.0) || !prior.mean.is_finite() {
        return Err(Error::Domain("prior sd must be positive"));
    }
    Ok(maximize(responses, items, Some(prior), prior.mean))
}

/// Maximum-likelihood ability given fixed items. Extreme patterns have no
/// finite maximum and are rejected.
pub fn mle_ability(responses: &[Option<bool>], items: &[ItemParams]) -> Result<f64> {
    if responses.len() != items.len() {
        return Err(Error::Domain("responses and items differ in length"));
    }
    let scored: alloc::vec::Vec<bool> = responses.iter().flatten().copied().collect();
    if scored.is_empty() {
        return Err(Error::Undefined("no scored responses"));
    }
    if scored.iter().all(|x| *x) || scored.iter().all(|x| !*x) {
        return Err(Error::Undefined("extreme score has no finite maximum-likelihood ability"));
    }
    Ok(maximize(responses, items, None, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::logistic;
    use alloc::vec;
    use alloc::vec::Vec;

    /// Root of `n (1 - logistic(t)) = t` by bisection.
    fn perfect_score_oracle(n: f64) -> f64 {
        let f = |t: f64| n * (1.0 - logistic(t)) - t;
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn map_perfect_and_zero_scores() {
        let items = vec![ItemParams::rasch(0.0); 20];
        let oracle = perfect_score_oracle(20.0);
        let top = map_ability(&[Some(true); 20], &items, NormalPrior::STANDARD).unwrap();
        assert!((top - oracle).abs() < 1e-8);
        // The oracle itself sits at 2.128.
        assert!((oracle - 2.128).abs() < 1e-3);
        let bottom = map_ability(&[Some(false); 20], &items, NormalPrior::STANDARD).unwrap();
        assert!((bottom + top).abs() < 1e-8);
    }

    #[test]
    fn map_shrinks_toward_prior_mean() {
        let items: Vec<ItemParams> = (0..10).map(|j| ItemParams::rasch(j as f64 * 0.2 - 2.0)).collect();
        let responses: Vec<Option<bool>> = (0..10).map(|j| Some(j % 2 == 0)).collect();
        let mle = mle_ability(&responses, &items).unwrap();
        let map = map_ability(&responses, &items, NormalPrior { mean: 0.0, sd: 0.5 }).unwrap();
        assert!(map.abs() < mle.abs());
        assert!(map * mle > 0.0);
    }

    #[test]
    fn mle_solves_score_equation() {
        let items: Vec<ItemParams> = (0..8).map(|j| ItemParams::two_pl(0.5 + 0.2 * j as f64, j as f64 * 0.4 - 1.5)).collect();
        let responses: Vec<Option<bool>> = vec![Some(true), Some(true), None, Some(false), Some(true), Some(false), Some(false), Some(true)];
        let theta = mle_ability(&responses, &items).unwrap();
        let scored = responses.iter().zip(&items).filter_map(|(x, it)| x.map(|x| (x, it)));
        let (g, _) = theta_terms(scored, theta);
        assert!(g.abs() < 1e-8);
    }

    #[test]
    fn mle_rejects_extremes() {
        let items = vec![ItemParams::rasch(0.0); 3];
        assert!(mle_ability(&[Some(true); 3], &items).is_err());
        assert!(mle_ability(&[None; 3], &items).is_err());
        assert!(map_ability(&[Some(true); 3], &items, NormalPrior { mean: 0.0, sd: 0.0 }).is_err());
    }
}
