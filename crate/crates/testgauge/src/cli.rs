//! Command-line front end. Every subcommand is a thin adapter over one
//! library operation and emits an [`AnalysisReport`].

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use testgauge_core::classical::{self, CriterionSource, DEFAULT_GROUP_FRACTION};
use testgauge_core::guessing::{self, GuessProfile};
use testgauge_core::irt::{self, CalibrationOptions, ExtremePolicy, ItemParams, Model, ModelKind, NormalPrior};
use testgauge_core::quanta::{self, CoefficientPrecision, ErrorDistribution};
use testgauge_core::screening::{self, DEFAULT_CONFIDENCE, DEFAULT_THRESHOLD_R};
use testgauge_core::simulation::{self, ExperimentResult, SimulationSpec};
use testgauge_core::{validate_matrix, FormatFamily, FormatMap, ItemFormat, OmitPolicy, ResponseMatrix};

use crate::csv_io::{parse_response_matrix, write_response_matrix, ParseOptions, DEFAULT_CRITERION_COLUMN};
use crate::error::{Error, Result};
use crate::formats::parse_format_sidecar;
use crate::report::{
    render_report, AnalysisReport, CalibrationSummary, CorrectedScoreRow, GuessReport, ItemReport, MatrixSummary,
    RenderFormat, ScreenReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

const DEFAULT_SEED: u64 = 1;
const TABLE_RELIABILITIES: [f64; 5] = [0.99, 0.90, 0.80, 0.70, 0.50];

#[derive(Debug, Parser)]
#[command(name = "testgauge", version, about = "Item analysis, reliability and IRT calibration for dichotomous tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full pipeline on a response matrix.
    Analyze(AnalyzeArgs),
    /// Confidence-interval screening of one correlation.
    Screen(ScreenArgs),
    /// Measurement resolution in entropy quanta.
    Quanta(QuantaArgs),
    /// Guess probabilities of item formats.
    #[command(subcommand)]
    Guess(GuessCommand),
    /// Formula scores corrected for guessing.
    Correct(CorrectArgs),
    /// Joint maximum-likelihood IRT calibration.
    Calibrate(CalibrateArgs),
    /// Write a simulated response matrix as CSV.
    Simulate(SimulateArgs),
    /// Seeded Monte Carlo experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print a Markdown report on standard output.
    #[arg(long)]
    md: bool,
}

#[derive(Debug, Args)]
struct MatrixArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Column diverted into the external criterion.
    #[arg(long, default_value = DEFAULT_CRITERION_COLUMN)]
    criterion: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Rasch,
    #[value(name = "2pl")]
    TwoPl,
    #[value(name = "3pl")]
    ThreePl,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExtremeArg {
    Error,
    Virtual,
    Map,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DistributionArg {
    Normal,
    Uniform,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    #[value(alias = "single-choice")]
    Single,
    #[value(alias = "multi-select")]
    Multi,
    #[value(alias = "matching")]
    Match,
    #[value(alias = "ordering")]
    Order,
}

#[derive(Debug, Args)]
struct CalibrationArgs {
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Second pass with person-fit weights.
    #[arg(long)]
    weighted: bool,
    #[arg(long, value_enum, default_value = "error")]
    extreme: ExtremeArg,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
    /// Keep raw Rasch JML difficulties instead of shrinking them by (k - 1) / k.
    #[arg(long)]
    no_bias_correction: bool,
}

#[derive(Debug, Args)]
struct QuantaOptions {
    /// Sample size for the expected score range (default range 7).
    #[arg(long)]
    sample_size: Option<u64>,
    #[arg(long, value_enum, default_value = "normal")]
    distribution: DistributionArg,
    /// Use the entropy coefficient rounded to two decimals.
    #[arg(long)]
    rounded_k: bool,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: MatrixArgs,
    #[arg(long)]
    formats: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_R)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
    confidence: f64,
    #[command(flatten)]
    quanta: QuantaOptions,
    #[command(flatten)]
    calibration: CalibrationArgs,
    /// Seed for the discrimination bootstrap.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ScreenArgs {
    #[arg(long)]
    r: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_R)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
    confidence: f64,
    /// Also report the sample needed for this z half-width.
    #[arg(long)]
    half_width: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct QuantaArgs {
    /// Reliability coefficient; repeatable. Defaults to the reference table rows.
    #[arg(long)]
    reliability: Vec<f64>,
    #[command(flatten)]
    quanta: QuantaOptions,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Subcommand)]
enum GuessCommand {
    /// Guess probability of one format.
    Prob(GuessProbArgs),
    /// Smallest format whose guess probability is below a bound.
    Design(GuessDesignArgs),
}

#[derive(Debug, Args)]
struct GuessProbArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    /// Multi-select only: the number of correct options is announced.
    #[arg(long)]
    known: Option<u32>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct GuessDesignArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, default_value_t = 0.01)]
    pmax: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CorrectArgs {
    #[command(flatten)]
    input: MatrixArgs,
    #[arg(long)]
    formats: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[command(flatten)]
    input: MatrixArgs,
    /// Item formats; 3PL takes its guessing floors from them.
    #[arg(long)]
    formats: Option<PathBuf>,
    #[command(flatten)]
    calibration: CalibrationArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1000)]
    examinees: usize,
    #[arg(long, default_value_t = 30)]
    items: usize,
    #[arg(long, value_enum, default_value = "rasch")]
    model: ModelArg,
    /// Item difficulties are spaced evenly over [b-min, b-max].
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    b_min: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    b_max: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentOutput {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Per-replicate values as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Subcommand)]
enum ExperimentCommand {
    /// Coverage of the Fisher interval.
    Coverage {
        #[arg(long, default_value_t = 0.30)]
        r: f64,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
        confidence: f64,
        #[arg(long, default_value_t = 10_000)]
        replicates: usize,
        #[command(flatten)]
        common: ExperimentOutput,
    },
    /// How often a low true correlation passes a point-estimate threshold.
    ScreeningRisk {
        #[arg(long, default_value_t = 0.11)]
        r: f64,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD_R)]
        threshold: f64,
        #[arg(long, default_value_t = 10_000)]
        replicates: usize,
        #[command(flatten)]
        common: ExperimentOutput,
    },
    /// Observed score range of normal samples.
    Range {
        #[arg(long, default_value_t = 700)]
        sample_size: usize,
        #[arg(long, default_value_t = 500)]
        replicates: usize,
        #[command(flatten)]
        common: ExperimentOutput,
    },
    /// Raw versus corrected score of a partial guesser.
    GuesserBias {
        #[arg(long, default_value_t = 26)]
        known: u32,
        #[arg(long, default_value_t = 40)]
        total: u32,
        #[arg(long, default_value_t = 4)]
        m: u32,
        #[arg(long, default_value_t = 10_000)]
        replicates: usize,
        #[command(flatten)]
        common: ExperimentOutput,
    },
}

enum Outcome {
    Report { report: Box<AnalysisReport>, output: OutputArgs, exit: i32 },
    Csv { text: String, out: Option<PathBuf> },
}

/// Runs one invocation; `args` includes the program name.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_INPUT
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(cli.command).and_then(|outcome| emit(outcome, stdout)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn emit(outcome: Outcome, stdout: &mut dyn Write) -> Result<i32> {
    let stdout_err = |source| Error::Io { path: PathBuf::from("<stdout>"), source };
    match outcome {
        Outcome::Report { report, output, exit } => {
            let json = render_report(&report, RenderFormat::Json)?;
            match &output.out {
                Some(path) => write_file(path, &json)?,
                None if !output.md => stdout.write_all(json.as_bytes()).map_err(stdout_err)?,
                None => {}
            }
            if output.md {
                let md = render_report(&report, RenderFormat::Markdown)?;
                stdout.write_all(md.as_bytes()).map_err(stdout_err)?;
            }
            Ok(exit)
        }
        Outcome::Csv { text, out } => {
            match &out {
                Some(path) => write_file(path, &text)?,
                None => stdout.write_all(text.as_bytes()).map_err(stdout_err)?,
            }
            Ok(EXIT_OK)
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_owned(), source })
}

fn read_input(path: &Path, role: &str, report: &mut AnalysisReport) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    report.record_input(role, &bytes);
    String::from_utf8(bytes).map_err(|_| Error::Usage(format!("{}: not UTF-8 text", path.display())))
}

fn load_matrix(args: &MatrixArgs, report: &mut AnalysisReport) -> Result<ResponseMatrix> {
    let text = read_input(&args.matrix, "matrix", report)?;
    parse_response_matrix(&text, &ParseOptions { criterion_column: args.criterion.clone() })
}

fn load_formats(path: &Path, report: &mut AnalysisReport) -> Result<FormatMap> {
    parse_format_sidecar(&read_input(path, "formats", report)?)
}

fn family(arg: FamilyArg) -> FormatFamily {
    match arg {
        FamilyArg::Single => FormatFamily::SingleChoice,
        FamilyArg::Multi => FormatFamily::MultiSelect,
        FamilyArg::Match => FormatFamily::Matching,
        FamilyArg::Order => FormatFamily::Ordering,
    }
}

fn model_kind(arg: ModelArg) -> ModelKind {
    match arg {
        ModelArg::Rasch => ModelKind::Rasch,
        ModelArg::TwoPl => ModelKind::TwoPl,
        ModelArg::ThreePl => ModelKind::ThreePl,
    }
}

fn quanta_settings(q: &QuantaOptions) -> (ErrorDistribution, CoefficientPrecision) {
    let distribution = match q.distribution {
        DistributionArg::Normal => ErrorDistribution::Normal,
        DistributionArg::Uniform => ErrorDistribution::Uniform,
    };
    let precision = if q.rounded_k { CoefficientPrecision::TwoDecimals } else { CoefficientPrecision::Exact };
    (distribution, precision)
}

fn summarize(matrix: &ResponseMatrix) -> MatrixSummary {
    MatrixSummary {
        examinees: matrix.examinee_count(),
        items: matrix.item_count(),
        has_criterion: matrix.criterion().is_some(),
        validation: validate_matrix(matrix),
    }
}

fn calibrate(
    matrix: &ResponseMatrix,
    formats: Option<&FormatMap>,
    kind: ModelKind,
    args: &CalibrationArgs,
) -> Result<CalibrationSummary> {
    let model = match kind {
        ModelKind::Rasch => Model::Rasch,
        ModelKind::TwoPl => Model::TwoPl,
        ModelKind::ThreePl => {
            let formats = formats.ok_or_else(|| Error::Usage("--model 3pl needs --formats".into()))?;
            Model::three_pl_from_formats(matrix, formats)?
        }
    };
    let options = CalibrationOptions {
        tolerance: args.tolerance,
        max_iterations: args.max_iterations,
        extreme_policy: match args.extreme {
            ExtremeArg::Error => ExtremePolicy::Error,
            ExtremeArg::Virtual => ExtremePolicy::VirtualItems,
            ExtremeArg::Map => ExtremePolicy::MapPrior(NormalPrior::STANDARD),
        },
        weighted: args.weighted,
        bias_correction: !args.no_bias_correction,
        ..CalibrationOptions::default()
    };
    let calibration = irt::jml_calibrate(matrix, &model, &options)?;
    let person_fit = irt::person_fit_lz(matrix, &calibration);
    Ok(CalibrationSummary { calibration, person_fit })
}

fn convergence_exit(summary: Option<&CalibrationSummary>) -> i32 {
    match summary {
        Some(s) if !s.calibration.converged => EXIT_NOT_CONVERGED,
        _ => EXIT_OK,
    }
}

fn corrected_rows(matrix: &ResponseMatrix, formats: &FormatMap) -> Result<Vec<CorrectedScoreRow>> {
    let scores = guessing::corrected_scores(matrix, formats)?;
    Ok(matrix
        .examinee_ids()
        .iter()
        .zip(scores)
        .map(|(id, score)| CorrectedScoreRow { examinee_id: id.clone(), score })
        .collect())
}

fn execute(command: Command) -> Result<Outcome> {
    let mut report = AnalysisReport::default();
    match command {
        Command::Analyze(args) => {
            let matrix = load_matrix(&args.input, &mut report)?;
            let formats = args.formats.as_deref().map(|p| load_formats(p, &mut report)).transpose()?;
            let source =
                if matrix.criterion().is_some() { CriterionSource::External } else { CriterionSource::CorrectedItemTotal };
            let policy = OmitPolicy::OmitAsWrong;
            let items = classical::item_statistics(&matrix, source, policy, DEFAULT_GROUP_FRACTION)
                .into_iter()
                .map(|stats| {
                    let screening = stats.criterion_r.and_then(|r| {
                        screening::screen_item(r, stats.administered_n, args.threshold, args.confidence).ok()
                    });
                    let discrimination_screening =
                        screening::screen_discrimination(&matrix, &stats.item_id, args.threshold, args.confidence, args.seed)
                            .ok();
                    ItemReport { stats, screening, discrimination_screening }
                })
                .collect();
            let reliability = classical::reliability_kr20(&matrix, policy).ok();
            let (distribution, precision) = quanta_settings(&args.quanta);
            let quanta = reliability.and_then(|r| {
                quanta::quanta_report_with(r.coefficient, args.quanta.sample_size, distribution, precision)
                    .ok()
                    .map(|q| vec![q])
            });
            let corrected = formats.as_ref().map(|f| corrected_rows(&matrix, f)).transpose()?;
            let calibration = args
                .calibration
                .model
                .map(|m| calibrate(&matrix, formats.as_ref(), model_kind(m), &args.calibration))
                .transpose()?;
            let exit = convergence_exit(calibration.as_ref());
            report.matrix_summary = Some(summarize(&matrix));
            report.items = Some(items);
            report.reliability = reliability;
            report.quanta = quanta;
            report.corrected_scores = corrected;
            report.calibration = calibration;
            Ok(Outcome::Report { report: Box::new(report), output: args.output, exit })
        }
        Command::Screen(args) => {
            let decision = screening::screen_item(args.r, args.n, args.threshold, args.confidence)?;
            let required_sample =
                args.half_width.map(|h| screening::required_normative_sample(h, args.confidence)).transpose()?;
            report.screening = Some(ScreenReport { decision, required_sample });
            Ok(Outcome::Report { report: Box::new(report), output: args.output, exit: EXIT_OK })
        }
        Command::Quanta(args) => {
            let (distribution, precision) = quanta_settings(&args.quanta);
            let rows = if args.reliability.is_empty() { TABLE_RELIABILITIES.to_vec() } else { args.reliability };
            let table = rows
                .iter()
                .map(|&r| quanta::quanta_report_with(r, args.quanta.sample_size, distribution, precision))
                .collect::<testgauge_core::Result<Vec<_>>>()?;
            report.quanta = Some(table);
            Ok(Outcome::Report { report: Box::new(report), output: args.output, exit: EXIT_OK })
        }
        Command::Guess(GuessCommand::Prob(args)) => {
            let need = |v: Option<u32>, flag: &str| v.ok_or_else(|| Error::Usage(format!("this family needs --{flag}")));
            let format = match family(args.family) {
                FormatFamily::SingleChoice => ItemFormat::SingleChoice { m: need(args.m, "m")? },
                FormatFamily::MultiSelect => ItemFormat::MultiSelect { m: need(args.m, "m")? },
                FormatFamily::Matching => ItemFormat::Matching { n: need(args.n, "n")?, m: need(args.m, "m")? },
                FormatFamily::Ordering => ItemFormat::Ordering { n: need(args.n, "n")? },
            };
            let profile = match (format, args.known) {
                (ItemFormat::MultiSelect { m }, Some(k)) => {
                    let p = guessing::multi_select_known_count_probability(m, k)?;
                    GuessProfile { format, guess_probability: p, meets_one_percent: p < 0.01 }
                }
                (_, Some(_)) => return Err(Error::Usage("--known applies to the multi family only".into())),
                _ => guessing::guess_profile(format)?,
            };
            report.guess = Some(GuessReport { profile, p_max: None });
            Ok(Outcome::Report { report: Box::new(report), output: args.output, exit: EXIT_OK })
        }
        Command::Guess(GuessCommand::Design(args)) => {
            let format = guessing::min_format_size(family(args.family), args.pmax)?;
            report.guess = Some(GuessReport { profile: guessing::guess_profile(format)?, p_max: Some(args.pmax) });
            Ok(Outcome::Report { report: Box::new(report), output: args.output, exit: EXIT_OK })
        }
        Command::Correct(args) => {
            let matrix = load_matrix(&args.input, &mut report)?;
            let formats = load_formats(&args.formats, &mut report)?;
            report.corrected_scores = Some(corrected_rows(&matrix, &formats)?);
            report.matrix_summary = Some(summarize(&matrix));
            Ok(Outcome::Report { report: Box::new(report), output: args.output, exit: EXIT_OK })
        }
        Command::Calibrate(args) => {
            let matrix = load_matrix(&args.input, &mut report)?;
            let formats = args.formats.as_deref().map(|p| load_formats(p, &mut report)).transpose()?;
            let kind = model_kind(args.calibration.model.unwrap_or(ModelArg::Rasch));
            let summary = calibrate(&matrix, formats.as_ref(), kind, &args.calibration)?;
            let exit = convergence_exit(Some(&summary));
            report.matrix_summary = Some(summarize(&matrix));
            report.calibration = Some(summary);
            Ok(Outcome::Report { report: Box::new(report), output: args.output, exit })
        }
        Command::Simulate(args) => {
            let items: Vec<ItemParams> =
                simulation::linspace(args.b_min, args.b_max, args.items).into_iter().map(ItemParams::rasch).collect();
            let spec = SimulationSpec::new(args.examinees, items, model_kind(args.model), args.seed);
            let matrix = simulation::simulate_matrix(&spec)?;
            Ok(Outcome::Csv { text: write_response_matrix(&matrix)?, out: args.out })
        }
        Command::Experiment(command) => {
            let (result, common) = match command {
                ExperimentCommand::Coverage { r, n, confidence, replicates, common } => {
                    (simulation::experiment_ci_coverage(r, n, confidence, replicates, common.seed)?, common)
                }
                ExperimentCommand::ScreeningRisk { r, n, threshold, replicates, common } => {
                    (simulation::experiment_screening_risk(r, n, threshold, replicates, common.seed)?, common)
                }
                ExperimentCommand::Range { sample_size, replicates, common } => {
                    (simulation::experiment_score_range(sample_size, replicates, common.seed)?, common)
                }
                ExperimentCommand::GuesserBias { known, total, m, replicates, common } => {
                    (simulation::experiment_guesser_bias(known, total, m, replicates, common.seed)?.1, common)
                }
            };
            if let Some(path) = &common.csv {
                write_file(path, &per_replicate_csv(&result)?)?;
            }
            report.experiment = Some(result);
            Ok(Outcome::Report { report: Box::new(report), output: common.output, exit: EXIT_OK })
        }
    }
}

fn per_replicate_csv(result: &ExperimentResult) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["replicate", "value"])?;
    for (i, v) in result.per_replicate.iter().enumerate() {
        writer.write_record([i.to_string(), v.to_string()])?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
