//! Joint maximum likelihood: abilities are estimated from items and items
//! from abilities, alternating Newton steps over one response matrix.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ability::theta_terms;
use super::fit::{misfit_weights, person_lz, WEIGHTING_SCHEME};
use super::virtual_items::{anchors_for_span, augment_virtual_items};
use super::{ItemParams, Model, ModelKind, NormalPrior, A_MAX, A_MIN, B_BOUND, MAX_STEP, THETA_BOUND};
use crate::error::{Error, Result};
use crate::response::{ResponseCell, ResponseMatrix};

/// How omitted cells enter the likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum IrtOmit {
    /// Omissions carry no information about the examinee.
    #[default]
    Excluded,
    AsIncorrect,
}

impl IrtOmit {
    pub fn score(self, cell: ResponseCell) -> Option<bool> {
        match cell {
            ResponseCell::Correct => Some(true),
            ResponseCell::Incorrect => Some(false),
            ResponseCell::Omitted => match self {
                IrtOmit::Excluded => None,
                IrtOmit::AsIncorrect => Some(false),
            },
            ResponseCell::NotAdministered => None,
        }
    }

    pub fn scored_row(self, row: &[ResponseCell]) -> Vec<Option<bool>> {
        row.iter().map(|c| self.score(*c)).collect()
    }
}

/// Treatment of all-correct, all-incorrect and empty response patterns.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum ExtremePolicy {
    #[default]
    Error,
    /// Append an always-correct and a never-correct anchor item.
    VirtualItems,
    /// Estimate extreme examinees by posterior mode.
    MapPrior(NormalPrior),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub extreme_policy: ExtremePolicy,
    pub weighted: bool,
    pub omit: IrtOmit,
    /// Rasch only: shrink difficulties by `(k - 1) / k` to remove the
    /// outward bias of joint maximum likelihood, then re-estimate abilities.
    pub bias_correction: bool,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_iterations: 200,
            extreme_policy: ExtremePolicy::Error,
            weighted: false,
            omit: IrtOmit::Excluded,
            bias_correction: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub model: Model,
    pub examinee_ids: Vec<String>,
    pub item_ids: Vec<String>,
    pub theta: Vec<f64>,
    pub items: Vec<ItemParams>,
    /// Examinee weights used in the final item estimation pass.
    pub weights: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Largest absolute parameter change on the last iteration.
    pub max_change: f64,
    pub extreme_policy: ExtremePolicy,
    pub extreme_examinees: Vec<String>,
    pub virtual_anchors: Option<[ItemParams; 2]>,
    pub weighted: bool,
    pub weighting_scheme: Option<String>,
    pub omit: IrtOmit,
    /// Whether the Rasch JML bias correction was applied.
    pub bias_corrected: bool,
}

struct State {
    kind: ModelKind,
    n: usize,
    /// Estimated items; anchors, when present, follow at `k..k + 2`.
    k: usize,
    stride: usize,
    responses: Vec<Option<bool>>,
    theta: Vec<f64>,
    items: Vec<ItemParams>,
    weights: Vec<f64>,
    priors: Vec<Option<NormalPrior>>,
    anchored: bool,
}

impl State {
    fn response(&self, i: usize, j: usize) -> Option<bool> {
        self.responses[i * self.stride + j]
    }

    fn update_theta(&mut self) {
        for i in 0..self.n {
            let theta = self.theta[i];
            let row = &self.responses[i * self.stride..(i + 1) * self.stride];
            let scored = row.iter().zip(&self.items).filter_map(|(x, it)| x.map(|x| (x, it)));
            let (mut g, mut info) = theta_terms(scored, theta);
            if let Some(p) = self.priors[i] {
                g -= (theta - p.mean) / (p.sd * p.sd);
                info += 1.0 / (p.sd * p.sd);
            }
            if info > 0.0 {
                let step = (g / info).clamp(-MAX_STEP, MAX_STEP);
                self.theta[i] = (theta + step).clamp(-THETA_BOUND, THETA_BOUND);
            }
        }
    }

    fn update_items(&mut self) {
        for j in 0..self.k {
            let item = self.items[j];
            let (mut g_a, mut g_b, mut i_aa, mut i_ab, mut i_bb) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..self.n {
                let Some(x) = self.response(i, j) else { continue };
                let w = self.weights[i];
                let d = self.theta[i] - item.b;
                let (ge, ie) = item.eta_terms(self.theta[i], x);
                g_a += w * ge * d;
                g_b -= w * ge * item.a;
                i_aa += w * ie * d * d;
                i_ab -= w * ie * d * item.a;
                i_bb += w * ie * item.a * item.a;
            }
            let mut next = item;
            match self.kind {
                ModelKind::Rasch => {
                    if i_bb > 0.0 {
                        next.b += (g_b / i_bb).clamp(-MAX_STEP, MAX_STEP);
                    }
                }
                ModelKind::TwoPl | ModelKind::ThreePl => {
                    let det = i_aa * i_bb - i_ab * i_ab;
                    let (da, db) = if det > 1e-12 * (i_aa * i_bb).max(1e-300) {
                        ((i_bb * g_a - i_ab * g_b) / det, (i_aa * g_b - i_ab * g_a) / det)
                    } else {
                        (
                            if i_aa > 0.0 { g_a / i_aa } else { 0.0 },
                            if i_bb > 0.0 { g_b / i_bb } else { 0.0 },
                        )
                    };
                    next.a = (next.a + da.clamp(-MAX_STEP, MAX_STEP)).clamp(A_MIN, A_MAX);
                    next.b += db.clamp(-MAX_STEP, MAX_STEP);
                }
            }
            next.b = next.b.clamp(-B_BOUND, B_BOUND);
            self.items[j] = next;
        }
    }

    /// Mean difficulty zero; for slope models also unit geometric-mean slope.
    fn identify(&mut self) {
        let k = self.k as f64;
        if self.kind != ModelKind::Rasch {
            let scale = libm::exp(self.items[..self.k].iter().map(|it| libm::log(it.a)).sum::<f64>() / k);
            for it in &mut self.items[..self.k] {
                it.a /= scale;
                it.b *= scale;
            }
            for t in &mut self.theta {
                *t *= scale;
            }
        }
        let shift = self.items[..self.k].iter().map(|it| it.b).sum::<f64>() / k;
        for it in &mut self.items[..self.k] {
            it.b -= shift;
        }
        for t in &mut self.theta {
            *t = (*t - shift).clamp(-THETA_BOUND, THETA_BOUND);
        }
        if self.anchored {
            self.refresh_anchors();
        }
    }

    fn refresh_anchors(&mut self) {
        let (lo, hi) = difficulty_span(&self.items[..self.k]);
        let anchors = anchors_for_span(lo, hi);
        self.items[self.k] = anchors[0];
        self.items[self.k + 1] = anchors[1];
    }

    /// One alternating sweep; returns the largest absolute parameter change.
    fn sweep(&mut self) -> f64 {
        let old_theta = self.theta.clone();
        let old_items: Vec<ItemParams> = self.items[..self.k].to_vec();
        self.update_theta();
        self.update_items();
        self.identify();
        let dt = self.theta.iter().zip(&old_theta).map(|(a, b)| (a - b).abs());
        let di = self.items[..self.k]
            .iter()
            .zip(&old_items)
            .map(|(a, b)| (a.a - b.a).abs().max((a.b - b.b).abs()));
        dt.chain(di).fold(0.0, f64::max)
    }

    /// Abilities only, with the items held fixed.
    fn refit_theta(&mut self, tolerance: f64, max_iterations: usize) -> bool {
        for _ in 0..max_iterations {
            let old = self.theta.clone();
            self.update_theta();
            if self.theta.iter().zip(&old).all(|(a, b)| (a - b).abs() < tolerance) {
                return true;
            }
        }
        false
    }

    fn run(&mut self, tolerance: f64, max_iterations: usize) -> (bool, usize, f64) {
        let mut change = f64::INFINITY;
        for iteration in 1..=max_iterations {
            change = self.sweep();
            if change < tolerance {
                return (true, iteration, change);
            }
        }
        (false, max_iterations, change)
    }
}

fn difficulty_span(items: &[ItemParams]) -> (f64, f64) {
    items
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), it| (lo.min(it.b), hi.max(it.b)))
}

fn logit(p: f64) -> f64 {
    libm::log(p / (1.0 - p))
}

/// Joint maximum-likelihood calibration.
///
/// Returns `Ok` with `converged == false` when the iteration limit is hit.
pub fn jml_calibrate(matrix: &ResponseMatrix, model: &Model, options: &CalibrationOptions) -> Result<Calibration> {
    let (n, k) = (matrix.examinee_count(), matrix.item_count());
    if n < 2 || k < 2 {
        return Err(Error::Undefined("calibration needs at least two examinees and two items"));
    }
    if !(options.tolerance > 0.0) {
        return Err(Error::Domain("tolerance must be positive"));
    }
    let kind = model.kind();
    let floors: Vec<f64> = match model {
        Model::ThreePl { floors } => {
            if floors.len() != k {
                return Err(Error::Domain("one lower asymptote per item is required"));
            }
            if floors.iter().any(|c| !(0.0..1.0).contains(c)) {
                return Err(Error::Domain("lower asymptotes must lie in [0, 1)"));
            }
            floors.clone()
        }
        _ => alloc::vec![0.0; k],
    };
    if let ExtremePolicy::MapPrior(p) = options.extreme_policy {
        if !(p.sd > 0.0) || !p.mean.is_finite() {
            return Err(Error::Domain("prior sd must be positive"));
        }
    }

    let scored: Vec<Vec<Option<bool>>> = (0..n).map(|i| options.omit.scored_row(matrix.row(i))).collect();

    let extreme: Vec<usize> = (0..n)
        .filter(|&i| {
            let row = &scored[i];
            let right = row.iter().filter(|x| **x == Some(true)).count();
            let answered = row.iter().filter(|x| x.is_some()).count();
            right == 0 || right == answered
        })
        .collect();
    let extreme_ids: Vec<String> = extreme.iter().map(|&i| matrix.examinee_ids()[i].clone()).collect();
    if options.extreme_policy == ExtremePolicy::Error && !extreme.is_empty() {
        return Err(Error::ExtremeScores(extreme_ids));
    }

    let mut b0 = Vec::with_capacity(k);
    let mut extreme_items = Vec::new();
    for j in 0..k {
        let right = scored.iter().filter(|r| r[j] == Some(true)).count();
        let answered = scored.iter().filter(|r| r[j].is_some()).count();
        if right == 0 || right == answered {
            extreme_items.push(matrix.item_ids()[j].clone());
        }
        b0.push(-logit((right as f64 + 0.5) / (answered as f64 + 1.0)));
    }
    if !extreme_items.is_empty() {
        return Err(Error::ExtremeItems(extreme_items));
    }
    let centre = b0.iter().sum::<f64>() / k as f64;
    let mut items: Vec<ItemParams> = b0
        .iter()
        .zip(&floors)
        .map(|(b, c)| ItemParams { a: 1.0, b: b - centre, c: *c })
        .collect();

    let (anchored, responses, stride) = if options.extreme_policy == ExtremePolicy::VirtualItems {
        let (lo, hi) = difficulty_span(&items);
        let aug = augment_virtual_items(matrix, (lo, hi))?;
        items.extend(aug.anchors);
        let grid: Vec<Option<bool>> = (0..n).flat_map(|i| options.omit.scored_row(aug.matrix.row(i))).collect();
        (true, grid, k + 2)
    } else {
        (false, scored.iter().flatten().copied().collect(), k)
    };

    let mut priors = alloc::vec![None; n];
    if let ExtremePolicy::MapPrior(p) = options.extreme_policy {
        for &i in &extreme {
            priors[i] = Some(p);
        }
    }
    let theta: Vec<f64> = (0..n)
        .map(|i| {
            let row = &responses[i * stride..(i + 1) * stride];
            let right = row.iter().filter(|x| **x == Some(true)).count() as f64;
            let answered = row.iter().filter(|x| x.is_some()).count() as f64;
            match priors[i] {
                Some(p) if answered == 0.0 => p.mean,
                _ if answered == 0.0 => 0.0,
                _ => logit((right + 0.5) / (answered + 1.0)),
            }
        })
        .collect();

    let mut state = State {
        kind,
        n,
        k,
        stride,
        responses,
        theta,
        items,
        weights: alloc::vec![1.0; n],
        priors,
        anchored,
    };
    let (mut converged, mut iterations, mut max_change) = state.run(options.tolerance, options.max_iterations);

    if options.weighted {
        for (i, row) in scored.iter().enumerate() {
            let lz = person_lz(row, &state.items[..k], state.theta[i]);
            state.weights[i] = lz.map_or(1.0, misfit_weights);
        }
        let (c, it, change) = state.run(options.tolerance, options.max_iterations);
        converged &= c;
        iterations += it;
        max_change = change;
    }

    let bias_corrected = options.bias_correction && kind == ModelKind::Rasch;
    if bias_corrected {
        let factor = (k as f64 - 1.0) / k as f64;
        for it in &mut state.items[..k] {
            it.b *= factor;
        }
        if anchored {
            state.refresh_anchors();
        }
        converged &= state.refit_theta(options.tolerance, options.max_iterations);
    }

    let virtual_anchors = anchored.then(|| [state.items[k], state.items[k + 1]]);
    state.items.truncate(k);
    Ok(Calibration {
        model: model.clone(),
        examinee_ids: matrix.examinee_ids().to_vec(),
        item_ids: matrix.item_ids().to_vec(),
        theta: state.theta,
        items: state.items,
        weights: state.weights,
        converged,
        iterations,
        max_change,
        extreme_policy: options.extreme_policy,
        extreme_examinees: extreme_ids,
        virtual_anchors,
        weighted: options.weighted,
        weighting_scheme: options.weighted.then(|| String::from(WEIGHTING_SCHEME)),
        omit: options.omit,
        bias_corrected,
    })
}
