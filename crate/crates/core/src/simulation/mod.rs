//! Seeded Monte Carlo generation of response data and the verification experiments.
//!
//! Every replicate `r` of an experiment draws from its own generator seeded
//! with `seed ^ r`, so results are reproducible one replicate at a time and
//! independent of evaluation order.

pub mod rng;

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guessing::guess_probability;
use crate::irt::{icc_probability, ItemParams, ModelKind, NormalPrior};
use crate::math::{mean, pearson};
use crate::response::{ItemFormat, ResponseCell, ResponseMatrix};
use crate::screening::correlation_confidence_interval;
use rng::{stream, SimRng};

/// Knowledge-or-guess response process: an examinee knows item `j` when
/// `theta - b_j >= knowledge_threshold` and otherwise guesses blindly with
/// the success probability of the item's format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessingOverlay {
    pub formats: Vec<ItemFormat>,
    pub knowledge_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub examinee_count: usize,
    pub ability: NormalPrior,
    pub items: Vec<ItemParams>,
    pub model: ModelKind,
    pub seed: u64,
    pub guessing_overlay: Option<GuessingOverlay>,
}

impl SimulationSpec {
    pub fn new(examinee_count: usize, items: Vec<ItemParams>, model: ModelKind, seed: u64) -> Self {
        Self { examinee_count, ability: NormalPrior::STANDARD, items, model, seed, guessing_overlay: None }
    }
}

/// Simulated matrix together with the generating abilities.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    pub matrix: ResponseMatrix,
    pub theta: Vec<f64>,
}

/// `count` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..count).map(|j| lo + (hi - lo) * j as f64 / (count - 1) as f64).collect(),
    }
}

pub fn normal_draw(rng: &mut SimRng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn simulate(spec: &SimulationSpec) -> Result<SimulatedData> {
    if spec.examinee_count == 0 {
        return Err(Error::Domain("examinee count must be at least 1"));
    }
    if !(spec.ability.sd >= 0.0) {
        return Err(Error::Domain("ability sd must be non-negative"));
    }
    let guess = match &spec.guessing_overlay {
        Some(overlay) => {
            if overlay.formats.len() != spec.items.len() {
                return Err(Error::Domain("overlay needs one format per item"));
            }
            Some(overlay.formats.iter().map(|f| guess_probability(*f)).collect::<Result<Vec<f64>>>()?)
        }
        None => None,
    };
    let mut rng = stream(spec.seed, 0);
    let k = spec.items.len();
    let mut theta = Vec::with_capacity(spec.examinee_count);
    let mut cells = Vec::with_capacity(spec.examinee_count * k);
    for _ in 0..spec.examinee_count {
        let t = spec.ability.mean + spec.ability.sd * normal_draw(&mut rng);
        theta.push(t);
        for (j, item) in spec.items.iter().enumerate() {
            let p = match (&guess, &spec.guessing_overlay) {
                (Some(g), Some(overlay)) => {
                    if t - item.b >= overlay.knowledge_threshold {
                        1.0
                    } else {
                        g[j]
                    }
                }
                _ => icc_probability(spec.model, t, item),
            };
            let u: f64 = rng.random();
            cells.push(if u < p { ResponseCell::Correct } else { ResponseCell::Incorrect });
        }
    }
    let examinees = (1..=spec.examinee_count).map(|i| alloc::format!("e{i}")).collect();
    let item_ids = (1..=k).map(|j| alloc::format!("i{j}")).collect();
    Ok(SimulatedData { matrix: ResponseMatrix::new(examinees, item_ids, cells, None)?, theta })
}

pub fn simulate_matrix(spec: &SimulationSpec) -> Result<ResponseMatrix> {
    simulate(spec).map(|d| d.matrix)
}

/// Summary of an experiment plus its per-replicate values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: String,
    pub replicates: usize,
    pub seed: u64,
    /// Headline estimate (coverage, pass rate, mean range, ...).
    pub estimate: f64,
    /// Named secondary outputs.
    pub extras: Vec<(String, f64)>,
    pub per_replicate: Vec<f64>,
}

fn check_replicates(replicates: usize, minimum: usize) -> Result<()> {
    if replicates < minimum {
        return Err(Error::Domain("too few replicates for this experiment"));
    }
    Ok(())
}

/// Pearson correlation of one bivariate-normal sample, built as
/// `y = rho x + sqrt(1 - rho^2) e`.
pub fn sample_correlation(rng: &mut SimRng, rho: f64, n: usize) -> f64 {
    let scale = libm::sqrt(1.0 - rho * rho);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x = normal_draw(rng);
        let e = normal_draw(rng);
        xs.push(x);
        ys.push(rho * x + scale * e);
    }
    pearson(&xs, &ys).unwrap_or(0.0)
}

fn check_correlation(r: f64) -> Result<()> {
    if r.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain("correlation must satisfy |r| < 1"))
    }
}

/// Fraction of Fisher intervals that cover the true correlation.
pub fn experiment_ci_coverage(true_r: f64, n: usize, confidence: f64, replicates: usize, seed: u64) -> Result<ExperimentResult> {
    check_replicates(replicates, 1000)?;
    check_correlation(true_r)?;
    let mut hits = Vec::with_capacity(replicates);
    for r in 0..replicates {
        let mut rng = stream(seed, r as u64);
        let observed = sample_correlation(&mut rng, true_r, n).clamp(-1.0 + 1e-15, 1.0 - 1e-15);
        let ci = correlation_confidence_interval(observed, n, confidence)?;
        hits.push(if ci.covers(true_r) { 1.0 } else { 0.0 });
    }
    Ok(ExperimentResult {
        name: String::from("coverage"),
        replicates,
        seed,
        estimate: mean(&hits),
        extras: alloc::vec![(String::from("true_r"), true_r), (String::from("n"), n as f64), (String::from("confidence"), confidence)],
        per_replicate: hits,
    })
}

/// Fraction of samples whose observed correlation reaches the threshold,
/// i.e. how often point-estimate acceptance passes the item.
pub fn experiment_screening_risk(true_r: f64, n: usize, threshold_r: f64, replicates: usize, seed: u64) -> Result<ExperimentResult> {
    check_replicates(replicates, 1000)?;
    check_correlation(true_r)?;
    if n < 2 {
        return Err(Error::SampleSize(n));
    }
    let passes: Vec<f64> = (0..replicates)
        .map(|r| {
            let mut rng = stream(seed, r as u64);
            if sample_correlation(&mut rng, true_r, n) >= threshold_r {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(ExperimentResult {
        name: String::from("screening-risk"),
        replicates,
        seed,
        estimate: mean(&passes),
        extras: alloc::vec![(String::from("true_r"), true_r), (String::from("n"), n as f64), (String::from("threshold_r"), threshold_r)],
        per_replicate: passes,
    })
}

/// Mean range (max - min) of `sample_size` standard-normal draws.
pub fn experiment_score_range(sample_size: usize, replicates: usize, seed: u64) -> Result<ExperimentResult> {
    check_replicates(replicates, 200)?;
    if sample_size < 2 {
        return Err(Error::SampleSize(sample_size));
    }
    let ranges: Vec<f64> = (0..replicates)
        .map(|r| {
            let mut rng = stream(seed, r as u64);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for _ in 0..sample_size {
                let x = normal_draw(&mut rng);
                lo = lo.min(x);
                hi = hi.max(x);
            }
            hi - lo
        })
        .collect();
    Ok(ExperimentResult {
        name: String::from("range"),
        replicates,
        seed,
        estimate: mean(&ranges),
        extras: alloc::vec![(String::from("sample_size"), sample_size as f64)],
        per_replicate: ranges,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuesserBias {
    pub mean_raw: f64,
    pub mean_corrected: f64,
}

/// An examinee who knows `known` of `total` single-choice items and guesses
/// the rest uniformly among `option_count` options. `per_replicate` holds
/// the corrected scores.
pub fn experiment_guesser_bias(
    known: u32,
    total: u32,
    option_count: u32,
    replicates: usize,
    seed: u64,
) -> Result<(GuesserBias, ExperimentResult)> {
    if known > total {
        return Err(Error::Domain("known items cannot exceed total items"));
    }
    if option_count < 2 {
        return Err(Error::Domain("option count must be at least 2"));
    }
    check_replicates(replicates, 1)?;
    let mut raw = Vec::with_capacity(replicates);
    let mut corrected = Vec::with_capacity(replicates);
    for r in 0..replicates {
        let mut rng = stream(seed, r as u64);
        let lucky = (0..total - known).filter(|_| rng.random_range(0..option_count) == 0).count() as u32;
        let right = known + lucky;
        let wrong = total - right;
        raw.push(right as f64);
        corrected.push(crate::guessing::corrected_score(right, wrong, option_count)?);
    }
    let bias = GuesserBias { mean_raw: mean(&raw), mean_corrected: mean(&corrected) };
    let result = ExperimentResult {
        name: String::from("guesser-bias"),
        replicates,
        seed,
        estimate: bias.mean_corrected,
        extras: alloc::vec![
            (String::from("mean_raw"), bias.mean_raw),
            (String::from("known"), known as f64),
            (String::from("total"), total as f64),
            (String::from("option_count"), option_count as f64),
        ],
        per_replicate: corrected,
    };
    Ok((bias, result))
}
