//! Analysis reports and their JSON / Markdown renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use testgauge_core::classical::{ItemStats, ReliabilityEstimate};
use testgauge_core::guessing::{CorrectedScore, GuessProfile};
use testgauge_core::irt::{Calibration, PersonFit};
use testgauge_core::quanta::QuantaReport;
use testgauge_core::screening::{DiscriminationScreening, ScreeningDecision, Verdict};
use testgauge_core::simulation::ExperimentResult;
use testgauge_core::ValidationReport;

use crate::error::Result;

pub const TOOL_VERSION: &str = concat!("testgauge ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Json,
    Markdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSummary {
    pub examinees: usize,
    pub items: usize,
    pub has_criterion: bool,
    pub validation: ValidationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemReport {
    pub stats: ItemStats,
    /// Fisher-interval screening of the criterion correlation.
    pub screening: Option<ScreeningDecision>,
    /// Bootstrap screening of the discrimination index.
    pub discrimination_screening: Option<DiscriminationScreening>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectedScoreRow {
    pub examinee_id: String,
    pub score: CorrectedScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub calibration: Calibration,
    pub person_fit: Vec<PersonFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenReport {
    pub decision: ScreeningDecision,
    /// Normative sample needed for the requested z half-width.
    pub required_sample: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessReport {
    pub profile: GuessProfile,
    /// Set for design queries.
    pub p_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool_version: String,
    /// SHA-256 of every input file, keyed by its role.
    pub input_digests: BTreeMap<String, String>,
    pub matrix_summary: Option<MatrixSummary>,
    pub items: Option<Vec<ItemReport>>,
    pub reliability: Option<ReliabilityEstimate>,
    pub quanta: Option<Vec<QuantaReport>>,
    pub corrected_scores: Option<Vec<CorrectedScoreRow>>,
    pub calibration: Option<CalibrationSummary>,
    pub screening: Option<ScreenReport>,
    pub guess: Option<GuessReport>,
    pub experiment: Option<ExperimentResult>,
}

impl Default for AnalysisReport {
    fn default() -> Self {
        Self {
            tool_version: TOOL_VERSION.to_owned(),
            input_digests: BTreeMap::new(),
            matrix_summary: None,
            items: None,
            reliability: None,
            quanta: None,
            corrected_scores: None,
            calibration: None,
            screening: None,
            guess: None,
            experiment: None,
        }
    }
}

impl AnalysisReport {
    pub fn record_input(&mut self, role: &str, bytes: &[u8]) {
        self.input_digests.insert(role.to_owned(), sha256_hex(bytes));
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn render_report(report: &AnalysisReport, format: RenderFormat) -> Result<String> {
    match format {
        RenderFormat::Json => render_json(report),
        RenderFormat::Markdown => Ok(render_markdown(report)),
    }
}

/// Pretty JSON with keys sorted at every level. Floats are written in
/// shortest round-trip form, so the values are exactly the module outputs.
fn render_json(report: &AnalysisReport) -> Result<String> {
    // serde_json's Value map is a BTreeMap, which sorts the keys.
    let value = serde_json::to_value(report)?;
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

pub fn parse_report(text: &str) -> Result<AnalysisReport> {
    Ok(serde_json::from_str(text)?)
}

fn num(x: f64) -> String {
    format!("{x:.3}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_owned(), num)
}

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::AcceptConfident => "accept",
        Verdict::Indeterminate => "indeterminate",
        Verdict::Reject => "reject",
    }
}

fn render_markdown(report: &AnalysisReport) -> String {
    let mut md = String::new();
    let _ = writeln!(md, "# Test analysis report\n");
    let _ = writeln!(md, "Generated by {}.\n", report.tool_version);
    if !report.input_digests.is_empty() {
        let _ = writeln!(md, "| Input | SHA-256 |\n|---|---|");
        for (role, digest) in &report.input_digests {
            let _ = writeln!(md, "| {role} | `{digest}` |");
        }
        md.push('\n');
    }

    if let Some(s) = &report.matrix_summary {
        let v = &s.validation;
        let _ = writeln!(md, "## Matrix\n");
        let _ = writeln!(md, "- Examinees: {}", s.examinees);
        let _ = writeln!(md, "- Items: {}", s.items);
        let _ = writeln!(md, "- External criterion: {}", if s.has_criterion { "yes" } else { "no" });
        let _ = writeln!(md, "- Zero-variance items: {}", list(&v.zero_variance_items));
        let _ = writeln!(md, "- Unadministered items: {}", list(&v.unadministered_items));
        let _ = writeln!(md, "- Examinees with no administered items: {}\n", list(&v.empty_examinees));
    }

    if let Some(items) = &report.items {
        let _ = writeln!(md, "## Items\n");
        let _ = writeln!(md, "| Item | n | Difficulty | r | 95% CI | Verdict | D | D verdict |");
        let _ = writeln!(md, "|---|---|---|---|---|---|---|---|");
        for item in items {
            let s = &item.stats;
            let (ci, verdict_r) = match &item.screening {
                Some(d) => (format!("[{}, {}]", num(d.ci.lower_r), num(d.ci.upper_r)), verdict(d.verdict)),
                None => ("n/a".to_owned(), "n/a"),
            };
            let verdict_d = item.discrimination_screening.map_or("n/a", |d| verdict(d.verdict));
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} | {} | {} | {} |",
                s.item_id,
                s.administered_n,
                opt(s.difficulty),
                opt(s.criterion_r),
                ci,
                verdict_r,
                opt(s.discrimination_index),
                verdict_d
            );
        }
        md.push('\n');
    }

    if let Some(r) = &report.reliability {
        let _ = writeln!(md, "## Reliability\n");
        let _ = writeln!(md, "- KR-20: {}{}", num(r.coefficient), if r.clamped { " (clamped from a negative value)" } else { "" });
        let _ = writeln!(md, "- SEM (raw score): {}", num(r.sem_raw));
        let _ = writeln!(md, "- SEM (standardized): {}\n", num(r.sem_standardized));
    }

    if let Some(rows) = &report.quanta {
        let _ = writeln!(md, "## Entropy quanta\n");
        let _ = writeln!(md, "| Reliability | Quanta |\n|---|---|");
        for q in rows {
            let _ = writeln!(md, "| {} | {} |", q.reliability, q.quanta_display);
        }
        md.push('\n');
        for q in rows {
            let _ = writeln!(
                md,
                "- r = {}: {} reliability, grade {}, k = {}, range {}",
                q.reliability,
                q.reliability_label,
                q.mnemonic_grade,
                num(q.entropy_coefficient),
                num(q.score_range)
            );
        }
        md.push('\n');
    }

    if let Some(rows) = &report.corrected_scores {
        let _ = writeln!(md, "## Corrected scores\n");
        let _ = writeln!(md, "| Examinee | Right | Wrong | Omitted | Corrected |\n|---|---|---|---|---|");
        for row in rows {
            let s = &row.score;
            let _ = writeln!(md, "| {} | {} | {} | {} | {} |", row.examinee_id, s.raw_right, s.wrong, s.omitted, num(s.corrected));
        }
        md.push('\n');
    }

    if let Some(c) = &report.calibration {
        let cal = &c.calibration;
        let _ = writeln!(md, "## Calibration\n");
        let _ = writeln!(
            md,
            "- Model: {:?}; converged: {}; iterations: {}; weighted: {}",
            cal.model.kind(),
            cal.converged,
            cal.iterations,
            cal.weighted
        );
        if !cal.extreme_examinees.is_empty() {
            let _ = writeln!(md, "- Extreme examinees: {}", list(&cal.extreme_examinees));
        }
        let _ = writeln!(md, "\n| Item | a | b | c |\n|---|---|---|---|");
        for (id, p) in cal.item_ids.iter().zip(&cal.items) {
            let _ = writeln!(md, "| {id} | {} | {} | {} |", num(p.a), num(p.b), num(p.c));
        }
        let _ = writeln!(md, "\n| Examinee | theta | lz | weight |\n|---|---|---|---|");
        for (fit, theta) in c.person_fit.iter().zip(&cal.theta) {
            let _ = writeln!(md, "| {} | {} | {} | {} |", fit.examinee_id, num(*theta), opt(fit.lz), num(fit.weight));
        }
        md.push('\n');
    }

    if let Some(s) = &report.screening {
        let d = &s.decision;
        let _ = writeln!(md, "## Correlation screening\n");
        let _ = writeln!(md, "- r = {}, n = {}, confidence {}", d.ci.r_observed, d.ci.n, d.ci.confidence);
        let _ = writeln!(md, "- z half-width: {}", num(d.ci.half_width_z));
        let _ = writeln!(md, "- Interval: [{}, {}]", num(d.ci.lower_r), num(d.ci.upper_r));
        let _ = writeln!(md, "- Verdict against r = {}: {}", d.threshold_r, verdict(d.verdict));
        if let Some(n) = s.required_sample {
            let _ = writeln!(md, "- Required normative sample: {n}");
        }
        md.push('\n');
    }

    if let Some(g) = &report.guess {
        let _ = writeln!(md, "## Guessing\n");
        let _ = writeln!(md, "- Format: {:?}", g.profile.format);
        let _ = writeln!(md, "- Guess probability: {:.5}", g.profile.guess_probability);
        if let Some(p) = g.p_max {
            let _ = writeln!(md, "- Smallest format below p = {p}");
        }
        md.push('\n');
    }

    if let Some(e) = &report.experiment {
        let _ = writeln!(md, "## Experiment `{}`\n", e.name);
        let _ = writeln!(md, "- Replicates: {}, seed {}", e.replicates, e.seed);
        let _ = writeln!(md, "- Estimate: {:.4}", e.estimate);
        for (name, value) in &e.extras {
            let _ = writeln!(md, "- {name}: {value:.4}");
        }
        md.push('\n');
    }
    md
}

fn list(ids: &[String]) -> String {
    if ids.is_empty() {
        "none".to_owned()
    } else {
        ids.join(", ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use testgauge_core::quanta::{quanta_report, ErrorDistribution};

    #[test]
    fn empty_report_has_null_sections() {
        let text = render_report(&AnalysisReport::default(), RenderFormat::Json).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["matrix_summary", "items", "reliability", "quanta", "corrected_scores", "calibration"] {
            assert!(value[key].is_null(), "{key}");
        }
        assert_eq!(parse_report(&text).unwrap(), AnalysisReport::default());
    }

    #[test]
    fn quanta_markdown_has_two_column_table() {
        let report = AnalysisReport {
            quanta: Some(vec![quanta_report(0.8, None, ErrorDistribution::Normal).unwrap()]),
            ..AnalysisReport::default()
        };
        let md = render_report(&report, RenderFormat::Markdown).unwrap();
        assert!(md.contains("| Reliability | Quanta |\n|---|---|\n| 0.8 | 3.8 |"));
    }

    #[test]
    fn json_keys_are_sorted() {
        let text = render_report(&AnalysisReport::default(), RenderFormat::Json).unwrap();
        let keys: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("  \""))
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
