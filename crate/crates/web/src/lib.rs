//! Browser bindings for the `groupscore` demo page. Every export takes and
//! returns plain strings (CSV in, JSON out) so the page needs no glue beyond
//! the generated module.

use groupscore::export::{self, RankedEntry};
use groupscore::ingest::{parse_disciplines_table, parse_groups_table, Disciplines};
use groupscore::metrics::{score_cohort, GroupScores, ScoreOptions};
use groupscore::stats::{correlation_suite, Cell, Pairing, SuiteOptions};
use groupscore::synth::{generate_cohort, inflation_experiment, InflationSummary, SynthConfig};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::wasm_bindgen;

const MAX_GROUPS: usize = 2_000;
const MAX_RUNS: usize = 1_000;

/// Knobs exposed by the inflation panel. Anything omitted keeps the
/// moderate reference value.
#[derive(Debug, Deserialize)]
#[serde(default)]
pub struct InflationParams {
    pub seed: u64,
    pub n_groups: usize,
    pub size_sigma: f64,
    pub coupling: f64,
    pub noise_quality: f64,
    pub noise_impact: f64,
    pub runs: usize,
}

impl Default for InflationParams {
    fn default() -> Self {
        let m = SynthConfig::moderate();
        InflationParams {
            seed: m.seed,
            n_groups: m.n_groups,
            size_sigma: m.size_sigma,
            coupling: m.coupling,
            noise_quality: m.noise_quality,
            noise_impact: m.noise_impact,
            runs: 50,
        }
    }
}

#[derive(Debug, Serialize)]
struct Point {
    group_id: String,
    size_class: &'static str,
    size: f64,
    s1: f64,
    i: f64,
    strength: f64,
    impact: f64,
}

impl From<&GroupScores> for Point {
    fn from(s: &GroupScores) -> Self {
        Point {
            group_id: s.group_id.clone(),
            size_class: s.size_class.as_str(),
            size: s.size,
            s1: s.s1,
            i: s.nci,
            strength: s.strength,
            impact: s.impact,
        }
    }
}

#[derive(Debug, Serialize)]
struct InflationView {
    points: Vec<Point>,
    r_specific: f64,
    r_absolute: f64,
    clamp_fraction: f64,
    gaps: Vec<f64>,
    median_gap: f64,
    positive_fraction: f64,
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Generates one synthetic cohort for plotting, then repeats the
/// experiment over `runs` seeds.
#[wasm_bindgen]
pub fn inflation_demo(params: &str) -> Result<String, String> {
    let p: InflationParams = if params.trim().is_empty() {
        InflationParams::default()
    } else {
        serde_json::from_str(params).map_err(|e| format!("bad parameters: {e}"))?
    };
    if p.n_groups > MAX_GROUPS || p.runs == 0 || p.runs > MAX_RUNS {
        return Err(format!(
            "n_groups must be at most {MAX_GROUPS} and runs between 1 and {MAX_RUNS}"
        ));
    }
    let config = SynthConfig {
        seed: p.seed,
        n_groups: p.n_groups,
        size_sigma: p.size_sigma,
        coupling: p.coupling,
        noise_quality: p.noise_quality,
        noise_impact: p.noise_impact,
        ..SynthConfig::moderate()
    };
    let cohort = generate_cohort(&config).map_err(|e| e.to_string())?;
    let results = inflation_experiment(&config, p.runs).map_err(|e| e.to_string())?;
    let summary = InflationSummary::from_results(&results).ok_or("no runs")?;
    let first = &results[0];
    to_json(&InflationView {
        points: cohort.scores.iter().map(Point::from).collect(),
        r_specific: first.r_specific,
        r_absolute: first.r_absolute,
        clamp_fraction: cohort.clamp_fraction(),
        gaps: results.iter().map(|r| r.gap()).collect(),
        median_gap: summary.median_gap,
        positive_fraction: summary.positive_fraction,
    })
}

fn load_scores(groups_csv: &str, disciplines_csv: &str) -> Result<(Vec<GroupScores>, Vec<String>), String> {
    let disciplines = if disciplines_csv.trim().is_empty() {
        Disciplines::open()
    } else {
        parse_disciplines_table(disciplines_csv).map_err(|e| describe("disciplines", &e))?
    };
    let groups = parse_groups_table(groups_csv, &disciplines).map_err(|e| describe("groups", &e))?;
    let scored = score_cohort(&groups, None, None, &ScoreOptions::default()).map_err(|e| e.to_string())?;
    Ok((scored.scores, scored.warnings))
}

fn describe(what: &str, e: &groupscore::ingest::IngestError) -> String {
    let rows = e.row_errors();
    if rows.is_empty() {
        format!("{what}: {e}")
    } else {
        rows.iter()
            .map(|r| format!("{what}: {r}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Serialize)]
struct DisciplinePoints {
    discipline_id: String,
    r_specific: Option<f64>,
    r_absolute: Option<f64>,
    points: Vec<Point>,
}

#[derive(Debug, Serialize)]
struct CorrelationView {
    table_specific: String,
    table_absolute: String,
    disciplines: Vec<DisciplinePoints>,
    warnings: Vec<String>,
}

/// Correlation tables for a pasted groups table (which must carry `nci`)
/// and an optional disciplines table.
#[wasm_bindgen]
pub fn correlate_csv(groups_csv: &str, disciplines_csv: &str, alpha: f64) -> Result<String, String> {
    let (scores, warnings) = load_scores(groups_csv, disciplines_csv)?;
    let options = SuiteOptions {
        alpha,
        ..SuiteOptions::default()
    };
    let specific = correlation_suite(&scores, Pairing::Specific, &options).map_err(|e| e.to_string())?;
    let absolute = correlation_suite(&scores, Pairing::Absolute, &options).map_err(|e| e.to_string())?;
    let r_all = |report: &groupscore::stats::CorrelationReport, id: &str| {
        report
            .discipline(id)
            .and_then(|d| d.cells.first())
            .and_then(|c| match c.cell {
                Cell::Computed(result) => Some(result.r),
                _ => None,
            })
    };
    let disciplines = specific
        .disciplines
        .iter()
        .map(|d| DisciplinePoints {
            discipline_id: d.discipline_id.clone(),
            r_specific: r_all(&specific, &d.discipline_id),
            r_absolute: r_all(&absolute, &d.discipline_id),
            points: scores
                .iter()
                .filter(|s| s.discipline_id == d.discipline_id)
                .map(Point::from)
                .collect(),
        })
        .collect();
    to_json(&CorrelationView {
        table_specific: export::render_table(&specific, true),
        table_absolute: export::render_table(&absolute, false),
        disciplines,
        warnings,
    })
}

#[derive(Debug, Serialize)]
struct RankRow {
    discipline_id: String,
    measure: &'static str,
    rank: f64,
    group_id: String,
    value: f64,
}

impl From<&RankedEntry> for RankRow {
    fn from(e: &RankedEntry) -> Self {
        RankRow {
            discipline_id: e.discipline_id.clone(),
            measure: e.measure.column(),
            rank: e.rank,
            group_id: e.group_id.clone(),
            value: e.value,
        }
    }
}

#[derive(Debug, Serialize)]
struct RankView {
    caveat: &'static str,
    text: String,
    entries: Vec<RankRow>,
}

/// Per-discipline rankings by s1, i, S1 and I.
#[wasm_bindgen]
pub fn rank_csv(groups_csv: &str, disciplines_csv: &str) -> Result<String, String> {
    let (scores, _) = load_scores(groups_csv, disciplines_csv)?;
    let entries = export::rankings(&scores).map_err(|e| e.to_string())?;
    to_json(&RankView {
        caveat: export::RANKING_CAVEAT,
        text: export::render_rankings(&entries),
        entries: entries.iter().map(RankRow::from).collect(),
    })
}
