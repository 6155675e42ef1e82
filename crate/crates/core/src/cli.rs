//! Command-line orchestration. Each `run_*` function reads its inputs,
//! writes its output files into the configured directory and returns the
//! lines meant for the terminal.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::export;
use crate::ingest::{
    load_baselines, load_disciplines, load_groups_table, load_papers, summarize_cohort,
    BaselineTable, Delimiter, Disciplines, GroupsTable, IngestError, PaperRecord,
};
use crate::metrics::{score_cohort, Attribution, GroupScores, MetricsError, QualityScale, ScoreOptions};
use crate::model::WeightingScheme;
use crate::stats::{correlation_suite, Pairing, SignificanceMethod, StatsError, SuiteOptions, ALPHA};
use crate::synth::{inflation_experiment, InflationSummary, SynthConfig, SynthError, DISTORTION_THRESHOLD};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{command} requires {flag}")]
    MissingInput {
        command: &'static str,
        flag: &'static str,
    },
    #[error("{path}: {source}")]
    Ingest {
        path: String,
        #[source]
        source: IngestError,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    SynthConfig {
        path: String,
        #[source]
        source: SynthError,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl CliError {
    /// Row-level detail lines for ingest failures.
    pub fn details(&self) -> Vec<String> {
        match self {
            CliError::Ingest { path, source } => source
                .row_errors()
                .iter()
                .map(|e| format!("{path}: {e}"))
                .collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Score,
    Correlate,
    Rank,
    Synth,
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Score => "score",
            Command::Correlate => "correlate",
            Command::Rank => "rank",
            Command::Synth => "synth",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum MethodArg {
    /// Two-sided t approximation.
    #[default]
    T,
    /// Label permutation, seeded by --seed.
    Permutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum AttributionArg {
    #[default]
    Unweighted,
    Share,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum ScaleArg {
    #[default]
    Weighted,
    Normalized,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Groups table: discipline_id, institution, group_id, N, p4, p3, p2, p1, pU[, nci]
    #[arg(long)]
    pub groups: Option<PathBuf>,
    /// Papers table: paper_id, group_id, field_id, pub_year, citations, author_share
    #[arg(long)]
    pub papers: Option<PathBuf>,
    /// Baselines table: field_id, pub_year, mean_citations
    #[arg(long)]
    pub baselines: Option<PathBuf>,
    /// Disciplines table: discipline_id, name, Nk, Nc
    #[arg(long)]
    pub disciplines: Option<PathBuf>,
    #[arg(long, default_value_t = ALPHA)]
    pub alpha: f64,
    /// Band weights w4,w3,w2,w1,wU
    #[arg(long, default_value = "7,3,1,0,0")]
    pub scheme: String,
    #[arg(long, value_enum, default_value_t)]
    pub attribution: AttributionArg,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Synthetic cohort config (key = value lines)
    #[arg(long = "synth-config")]
    pub synth_config: Option<PathBuf>,
    /// Number of seeds for the synthetic experiment
    #[arg(long, default_value_t = 200)]
    pub runs: usize,
    #[arg(long, value_enum, default_value_t)]
    pub method: MethodArg,
    /// Scale of the s1 and S1 columns in score exports
    #[arg(long = "quality-scale", value_enum, default_value_t)]
    pub quality_scale: ScaleArg,
    /// Restrict report output to one discipline
    #[arg(long)]
    pub discipline: Option<String>,
    /// Also correlate medium and small groups separately
    #[arg(long)]
    pub detailed_subgroups: bool,
}

#[derive(Debug, Parser)]
#[command(name = "groupscore", version, about = "Peer-review and citation measures for research groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Check input files and summarise the cohort
    Validate(Options),
    /// Compute s1, S1, i and I per group
    Score(Options),
    /// Specific and absolute correlation tables
    Correlate(Options),
    /// Rank groups by each measure
    Rank(Options),
    /// Run the synthetic specific-vs-absolute experiment
    Synth(Options),
    /// Scatter data for (s1, i) and (S1, I)
    Report(Options),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub groups: Option<PathBuf>,
    pub papers: Option<PathBuf>,
    pub baselines: Option<PathBuf>,
    pub disciplines: Option<PathBuf>,
    pub synth_config: Option<PathBuf>,
    pub alpha: f64,
    pub scheme: WeightingScheme,
    pub attribution: Attribution,
    pub quality_scale: QualityScale,
    pub method: MethodArg,
    pub detailed_subgroups: bool,
    pub discipline: Option<String>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub runs: usize,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            groups: None,
            papers: None,
            baselines: None,
            disciplines: None,
            synth_config: None,
            alpha: ALPHA,
            scheme: WeightingScheme::default(),
            attribution: Attribution::Unweighted,
            quality_scale: QualityScale::Weighted,
            method: MethodArg::T,
            detailed_subgroups: false,
            discipline: None,
            out: PathBuf::from("out"),
            seed: None,
            runs: 200,
        }
    }

    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let (command, o) = match cli.command {
            CliCommand::Validate(o) => (Command::Validate, o),
            CliCommand::Score(o) => (Command::Score, o),
            CliCommand::Correlate(o) => (Command::Correlate, o),
            CliCommand::Rank(o) => (Command::Rank, o),
            CliCommand::Synth(o) => (Command::Synth, o),
            CliCommand::Report(o) => (Command::Report, o),
        };
        if !(o.alpha > 0.0 && o.alpha < 1.0) {
            return Err(CliError::InvalidArgument(format!(
                "--alpha must lie in (0, 1), got {}",
                o.alpha
            )));
        }
        let scheme = o
            .scheme
            .parse()
            .map_err(|e| CliError::InvalidArgument(format!("--scheme: {e}")))?;
        Ok(RunConfig {
            command,
            groups: o.groups,
            papers: o.papers,
            baselines: o.baselines,
            disciplines: o.disciplines,
            synth_config: o.synth_config,
            alpha: o.alpha,
            scheme,
            attribution: match o.attribution {
                AttributionArg::Unweighted => Attribution::Unweighted,
                AttributionArg::Share => Attribution::ShareWeighted,
            },
            quality_scale: match o.quality_scale {
                ScaleArg::Weighted => QualityScale::Weighted,
                ScaleArg::Normalized => QualityScale::Normalized,
            },
            method: o.method,
            detailed_subgroups: o.detailed_subgroups,
            discipline: o.discipline,
            out: o.out,
            seed: o.seed,
            runs: o.runs,
        })
    }

    fn require<'a>(&self, path: &'a Option<PathBuf>, flag: &'static str) -> Result<&'a Path, CliError> {
        path.as_deref().ok_or(CliError::MissingInput {
            command: self.command.name(),
            flag,
        })
    }

    fn suite_options(&self) -> SuiteOptions {
        SuiteOptions {
            alpha: self.alpha,
            method: match self.method {
                MethodArg::T => SignificanceMethod::TApprox,
                MethodArg::Permutation => SignificanceMethod::Permutation {
                    seed: self.seed.unwrap_or(0),
                },
            },
            detailed_subgroups: self.detailed_subgroups,
        }
    }
}

/// What a command printed and wrote.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    pub errors: usize,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.errors == 0 {
            0
        } else {
            1
        }
    }

    fn write(&mut self, dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        })?;
        self.files.push(path);
        Ok(())
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.display().to_string(),
        source,
    })
}

fn ingest_err(path: &Path) -> impl FnOnce(IngestError) -> CliError + '_ {
    move |source| CliError::Ingest {
        path: path.display().to_string(),
        source,
    }
}

struct Inputs {
    groups: GroupsTable,
    papers: Option<Vec<PaperRecord>>,
    baselines: Option<BaselineTable>,
}

fn disciplines(config: &RunConfig) -> Result<Disciplines, CliError> {
    match &config.disciplines {
        Some(path) => Ok(load_disciplines(path)
            .map_err(ingest_err(path))?
            .with_scheme(config.scheme)),
        None => Ok(Disciplines::open()),
    }
}

fn load_inputs(config: &RunConfig) -> Result<Inputs, CliError> {
    let groups_path = config.require(&config.groups, "--groups")?;
    let disciplines = disciplines(config)?;
    let groups = load_groups_table(groups_path, &disciplines).map_err(ingest_err(groups_path))?;
    let papers = match &config.papers {
        Some(p) => Some(load_papers(p).map_err(ingest_err(p))?),
        None => None,
    };
    let baselines = match &config.baselines {
        Some(p) => Some(load_baselines(p).map_err(ingest_err(p))?),
        None => None,
    };
    Ok(Inputs {
        groups,
        papers,
        baselines,
    })
}

fn score(config: &RunConfig, inputs: &Inputs) -> Result<(Vec<GroupScores>, Vec<String>), CliError> {
    let options = ScoreOptions {
        scheme: config.scheme,
        attribution: config.attribution,
    };
    let scored = score_cohort(
        &inputs.groups,
        inputs.papers.as_deref(),
        inputs.baselines.as_ref(),
        &options,
    )?;
    Ok((scored.scores, scored.warnings))
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    match config.command {
        Command::Validate => run_validate(config),
        Command::Score => run_score(config),
        Command::Correlate => run_correlate(config),
        Command::Rank => run_rank(config),
        Command::Synth => run_synth(config),
        Command::Report => run_report(config),
    }
}

/// Parses every supplied file, reporting each problem with its location.
/// Unlike the other commands, input errors are counted rather than returned.
pub fn run_validate(config: &RunConfig) -> Result<Outcome, CliError> {
    let groups_path = config.require(&config.groups, "--groups")?;
    let mut outcome = Outcome::default();
    let report = |path: &Path, err: IngestError, outcome: &mut Outcome| {
        let rows = err.row_errors();
        if rows.is_empty() {
            outcome.lines.push(format!("error: {}: {err}", path.display()));
            outcome.errors += 1;
        } else {
            for row in rows {
                outcome.lines.push(format!("error: {}: {row}", path.display()));
            }
            outcome.errors += rows.len();
        }
    };

    let disciplines = match &config.disciplines {
        Some(path) => match load_disciplines(path) {
            Ok(d) => Some(d.with_scheme(config.scheme)),
            Err(e) => {
                report(path, e, &mut outcome);
                None
            }
        },
        None => Some(Disciplines::open()),
    };
    let groups = match disciplines {
        Some(d) => match load_groups_table(groups_path, &d) {
            Ok(g) => Some(g),
            Err(e) => {
                report(groups_path, e, &mut outcome);
                None
            }
        },
        None => None,
    };
    let papers = match &config.papers {
        Some(path) => match load_papers(path) {
            Ok(p) => Some(p),
            Err(e) => {
                report(path, e, &mut outcome);
                None
            }
        },
        None => None,
    };
    if let Some(path) = &config.baselines {
        if let Err(e) = load_baselines(path) {
            report(path, e, &mut outcome);
        }
    }

    if let Some(groups) = groups {
        let summary = summarize_cohort(&groups, papers.as_deref());
        if summary.disciplines.is_empty() {
            outcome.lines.push("0 groups".into());
        }
        for d in &summary.disciplines {
            let mut line = format!("{}: {}", d.discipline_id, d);
            if let Some(ratio) = d.outputs_per_fte {
                line.push_str(&format!("; {ratio:.2} outputs per FTE"));
            }
            outcome.lines.push(line);
        }
        for w in summary.warnings {
            outcome.lines.push(format!("warning: {w}"));
        }
    }
    outcome.lines.push(if outcome.errors == 0 {
        "ok".into()
    } else {
        format!("{} error(s)", outcome.errors)
    });
    Ok(outcome)
}

pub fn run_score(config: &RunConfig) -> Result<Outcome, CliError> {
    let inputs = load_inputs(config)?;
    let (scores, warnings) = score(config, &inputs)?;
    let mut outcome = Outcome::default();
    ensure_dir(&config.out)?;
    let text = export::write_scores(
        &scores,
        &config.scheme,
        config.quality_scale,
        inputs.groups.source.delimiter,
    );
    outcome.write(&config.out, "scores.csv", &text)?;
    outcome.lines.extend(warnings.into_iter().map(|w| format!("warning: {w}")));
    outcome.lines.push(format!("scored {} groups", scores.len()));
    Ok(outcome)
}

pub fn run_correlate(config: &RunConfig) -> Result<Outcome, CliError> {
    let inputs = load_inputs(config)?;
    let (scores, warnings) = score(config, &inputs)?;
    let options = config.suite_options();
    let specific = correlation_suite(&scores, Pairing::Specific, &options)?;
    let absolute = correlation_suite(&scores, Pairing::Absolute, &options)?;
    let delimiter = inputs.groups.source.delimiter;

    let mut outcome = Outcome::default();
    ensure_dir(&config.out)?;
    let table1 = export::render_table(&specific, true);
    let table2 = export::render_table(&absolute, false);
    outcome.write(&config.out, "table1_specific.txt", &table1)?;
    outcome.write(&config.out, "table2_absolute.txt", &table2)?;
    outcome.write(
        &config.out,
        "correlations_specific.csv",
        &export::write_report(&specific, delimiter),
    )?;
    outcome.write(
        &config.out,
        "correlations_absolute.csv",
        &export::write_report(&absolute, delimiter),
    )?;
    outcome.lines.extend(warnings.into_iter().map(|w| format!("warning: {w}")));
    outcome.lines.extend(table1.lines().map(str::to_owned));
    outcome.lines.push(String::new());
    outcome.lines.extend(table2.lines().map(str::to_owned));
    Ok(outcome)
}

pub fn run_rank(config: &RunConfig) -> Result<Outcome, CliError> {
    let inputs = load_inputs(config)?;
    let (scores, warnings) = score(config, &inputs)?;
    let entries = export::rankings(&scores)?;
    let mut outcome = Outcome::default();
    ensure_dir(&config.out)?;
    outcome.write(
        &config.out,
        "rankings.csv",
        &export::write_rankings(&entries, inputs.groups.source.delimiter),
    )?;
    outcome.write(&config.out, "rankings.txt", &export::render_rankings(&entries))?;
    outcome.lines.extend(warnings.into_iter().map(|w| format!("warning: {w}")));
    outcome.lines.push(export::RANKING_CAVEAT.to_owned());
    Ok(outcome)
}

pub fn run_synth(config: &RunConfig) -> Result<Outcome, CliError> {
    let path = config.require(&config.synth_config, "--synth-config")?;
    let text = crate::ingest::read_file(path).map_err(ingest_err(path))?;
    let mut synth = SynthConfig::parse(&text).map_err(|source| CliError::SynthConfig {
        path: path.display().to_string(),
        source,
    })?;
    if let Some(seed) = config.seed {
        synth.seed = seed;
    }
    let results = inflation_experiment(&synth, config.runs)?;
    let summary = InflationSummary::from_results(&results).expect("at least one run");
    let aggregate = export::render_synth_summary(&summary);

    let mut outcome = Outcome::default();
    ensure_dir(&config.out)?;
    outcome.write(
        &config.out,
        "synth_runs.csv",
        &export::write_synth_runs(&results, Delimiter::Comma),
    )?;
    outcome.write(
        &config.out,
        "synth_summary.txt",
        &format!("{synth}\n{aggregate}\n"),
    )?;
    let distorted = results
        .iter()
        .filter(|r| r.clamp_fraction > DISTORTION_THRESHOLD)
        .count();
    if distorted > 0 {
        outcome.lines.push(format!(
            "warning: {distorted} run(s) clamp more than {}% of draws",
            DISTORTION_THRESHOLD * 100.0
        ));
    }
    outcome.lines.push(aggregate);
    Ok(outcome)
}

pub fn run_report(config: &RunConfig) -> Result<Outcome, CliError> {
    let inputs = load_inputs(config)?;
    let (scores, warnings) = score(config, &inputs)?;
    let delimiter = inputs.groups.source.delimiter;
    let ids: Vec<String> = match &config.discipline {
        Some(id) => vec![id.clone()],
        None => inputs.groups.source.discipline_ids.clone(),
    };
    let mut outcome = Outcome::default();
    ensure_dir(&config.out)?;
    for id in &ids {
        let members: Vec<GroupScores> = scores
            .iter()
            .filter(|s| &s.discipline_id == id)
            .cloned()
            .collect();
        for pairing in [Pairing::Specific, Pairing::Absolute] {
            let points = export::scatter(&members, pairing);
            let name = format!("scatter_{}_{}.csv", pairing, file_stem(id));
            outcome.write(&config.out, &name, &export::write_scatter(&points, delimiter))?;
        }
        outcome.lines.push(format!("{id}: {} groups", members.len()));
    }
    outcome.lines.extend(warnings.into_iter().map(|w| format!("warning: {w}")));
    Ok(outcome)
}
