//! Machine-readable outputs (scores, correlation rows, rankings, scatter
//! data, synthetic runs) and their parsers, plus the fixed-width text tables.

use std::fmt::Write as _;

use crate::ingest::{parse_real, write_rows, Delimiter, IngestError, RowError, RowErrorKind, Table};
use crate::metrics::{GroupScores, Measure, QualityScale};
use crate::model::{SizeClass, Subgroup, WeightingScheme};
use crate::stats::{average_ranks, Cell, CorrelationReport, CorrelationResult, Pairing, StatsError};
use crate::synth::{InflationResult, InflationSummary};

pub const SCORE_COLUMNS: [&str; 8] = ["discipline_id", "group_id", "N", "size_class", "s1", "S1", "i", "I"];
pub const REPORT_COLUMNS: [&str; 10] = [
    "discipline_id",
    "pairing",
    "subgroup",
    "n",
    "r",
    "p_r",
    "sig_r",
    "rho",
    "p_rho",
    "sig_rho",
];
pub const RANKING_COLUMNS: [&str; 5] = ["discipline_id", "measure", "rank", "group_id", "value"];
pub const SCATTER_COLUMNS: [&str; 4] = ["group_id", "size_class", "x", "y"];
pub const SYNTH_COLUMNS: [&str; 7] = [
    "seed",
    "r_specific",
    "r_absolute",
    "rho_specific",
    "rho_absolute",
    "gap",
    "clamp_fraction",
];

pub const RANKING_CAVEAT: &str = "CAVEAT: rankings by the specific measures s1 and i are shown for \
reference only. Citation impact correlates poorly with peer-review quality per head, so neither \
specific ranking should stand in for the other.";

fn malformed(line: u64, column: &str, msg: impl Into<String>) -> RowError {
    RowError {
        line,
        column: Some(column.to_owned()),
        kind: RowErrorKind::Malformed(msg.into()),
    }
}

fn finish<T>(errors: Vec<RowError>, value: T) -> Result<T, IngestError> {
    if errors.is_empty() {
        Ok(value)
    } else {
        Err(IngestError::Rows(errors))
    }
}

fn parse_with<T>(
    input: &str,
    columns: &[&str],
    mut row: impl FnMut(&Table, u64, &csv::StringRecord) -> Result<T, RowError>,
) -> Result<Vec<T>, IngestError> {
    let table = Table::parse(input, columns)?;
    let mut errors = table.errors.clone();
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, record) in &table.rows {
        match row(&table, *line, record) {
            Ok(v) => out.push(v),
            Err(e) => errors.push(e),
        }
    }
    finish(errors, out)
}

fn enum_field<T: std::str::FromStr<Err = String>>(
    table: &Table,
    line: u64,
    record: &csv::StringRecord,
    name: &str,
) -> Result<T, RowError> {
    table
        .field(record, name)
        .parse()
        .map_err(|e: String| malformed(line, name, e))
}

pub fn write_scores(
    scores: &[GroupScores],
    scheme: &WeightingScheme,
    scale: QualityScale,
    delimiter: Delimiter,
) -> String {
    write_rows(
        delimiter,
        &SCORE_COLUMNS,
        scores.iter().map(|g| {
            let (s1, strength) = g.quality_on(scale, scheme);
            [
                g.discipline_id.clone(),
                g.group_id.clone(),
                g.size.to_string(),
                g.size_class.to_string(),
                s1.to_string(),
                strength.to_string(),
                g.nci.to_string(),
                g.impact.to_string(),
            ]
        }),
    )
}

/// Reads a scores export back. Values are taken as written; `S1` and `I`
/// are not recomputed.
pub fn parse_scores(input: &str) -> Result<Vec<GroupScores>, IngestError> {
    parse_with(input, &SCORE_COLUMNS, |t, line, rec| {
        Ok(GroupScores {
            discipline_id: t.text(line, rec, "discipline_id")?,
            group_id: t.text(line, rec, "group_id")?,
            size: t.real(line, rec, "N")?,
            size_class: enum_field(t, line, rec, "size_class")?,
            s1: t.real(line, rec, "s1")?,
            strength: t.real(line, rec, "S1")?,
            nci: t.real(line, rec, "i")?,
            impact: t.real(line, rec, "I")?,
        })
    })
}

/// One machine row of a correlation report. Cells without a computed
/// result carry `None` everywhere but `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub discipline_id: String,
    pub pairing: Pairing,
    pub subgroup: Subgroup,
    pub n: usize,
    pub result: Option<CorrelationResult>,
}

pub fn report_rows(report: &CorrelationReport) -> Vec<ReportRow> {
    report
        .disciplines
        .iter()
        .flat_map(|d| {
            d.cells.iter().map(|c| ReportRow {
                discipline_id: d.discipline_id.clone(),
                pairing: report.pairing,
                subgroup: c.subgroup,
                n: c.n,
                result: c.result().copied(),
            })
        })
        .collect()
}

pub fn write_report(report: &CorrelationReport, delimiter: Delimiter) -> String {
    write_rows(
        delimiter,
        &REPORT_COLUMNS,
        report_rows(report).into_iter().map(|row| {
            let mut fields = vec![
                row.discipline_id,
                row.pairing.to_string(),
                row.subgroup.to_string(),
                row.n.to_string(),
            ];
            match row.result {
                Some(r) => fields.extend([
                    r.r.to_string(),
                    r.p_r.to_string(),
                    r.significant_r.to_string(),
                    r.rho.to_string(),
                    r.p_rho.to_string(),
                    r.significant_rho.to_string(),
                ]),
                None => fields.extend(std::iter::repeat_n(String::new(), 6)),
            }
            fields
        }),
    )
}

pub fn parse_report(input: &str) -> Result<Vec<ReportRow>, IngestError> {
    parse_with(input, &REPORT_COLUMNS, |t, line, rec| {
        let n = t.integer(line, rec, "n")?;
        let n = usize::try_from(n).map_err(|_| malformed(line, "n", "negative count"))?;
        let flag = |name: &str| -> Result<bool, RowError> {
            t.field(rec, name)
                .parse()
                .map_err(|_| malformed(line, name, "expected true or false"))
        };
        let result = if t.field(rec, "r").is_empty() {
            None
        } else {
            Some(CorrelationResult {
                n,
                r: t.real(line, rec, "r")?,
                p_r: t.real(line, rec, "p_r")?,
                significant_r: flag("sig_r")?,
                rho: t.real(line, rec, "rho")?,
                p_rho: t.real(line, rec, "p_rho")?,
                significant_rho: flag("sig_rho")?,
            })
        };
        Ok(ReportRow {
            discipline_id: t.text(line, rec, "discipline_id")?,
            pairing: enum_field(t, line, rec, "pairing")?,
            subgroup: enum_field(t, line, rec, "subgroup")?,
            n,
            result,
        })
    })
}

/// A coefficient with a `*` when significant.
fn marked(value: f64, significant: bool) -> String {
    format!("{:.2}{}", value, if significant { "*" } else { "" })
}

fn cell_text(report: &CorrelationReport, d: usize, subgroup: Subgroup, rho: bool) -> String {
    let disc = &report.disciplines[d];
    match disc.cell(subgroup).map(|c| c.cell) {
        Some(Cell::Computed(r)) if rho => marked(r.rho, r.significant_rho),
        Some(Cell::Computed(r)) => marked(r.r, r.significant_r),
        Some(Cell::Unavailable) | None => "--".into(),
        Some(Cell::InsufficientN) => "n<3".into(),
        Some(Cell::Degenerate) => "n/a".into(),
    }
}

fn describe(report: &CorrelationReport, d: usize) -> String {
    let disc = &report.disciplines[d];
    let [small, medium, large, _] = disc.class_counts;
    if disc.sizes_known() {
        format!(
            "{} ({} groups: {} large, {} medium, {} small)",
            disc.discipline_id,
            disc.total(),
            large,
            medium,
            small
        )
    } else {
        format!("{} ({} groups)", disc.discipline_id, disc.total())
    }
}

/// Fixed-width table of r for all/large/medium-small, plus rho over all
/// groups when `with_rho` is set. `*` marks significance at the report's alpha.
pub fn render_table(report: &CorrelationReport, with_rho: bool) -> String {
    let title = match report.pairing {
        Pairing::Specific => "Correlation between specific measures s1 and i",
        Pairing::Absolute => "Correlation between absolute measures S1 and I",
    };
    let labels: Vec<String> = (0..report.disciplines.len())
        .map(|d| describe(report, d))
        .collect();
    let width = labels.iter().map(String::len).max().unwrap_or(0).max(12);
    let mut out = String::new();
    writeln!(out, "{title}").unwrap();
    writeln!(out, "(* significant at alpha = {})", report.alpha).unwrap();
    let mut header = format!("{:<width$}  {:>8}  {:>8}  {:>12}", "data set", "r all", "r large", "r med/small");
    if with_rho {
        header.push_str(&format!("  {:>8}", "rho all"));
    }
    writeln!(out, "{header}").unwrap();
    writeln!(out, "{}", "-".repeat(header.len())).unwrap();
    for (d, label) in labels.iter().enumerate() {
        let mut line = format!(
            "{:<width$}  {:>8}  {:>8}  {:>12}",
            label,
            cell_text(report, d, Subgroup::All, false),
            cell_text(report, d, Subgroup::Large, false),
            cell_text(report, d, Subgroup::MediumSmall, false),
        );
        if with_rho {
            line.push_str(&format!("  {:>8}", cell_text(report, d, Subgroup::All, true)));
        }
        writeln!(out, "{}", line.trim_end()).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub discipline_id: String,
    pub measure: Measure,
    pub rank: f64,
    pub group_id: String,
    pub value: f64,
}

/// Per discipline, groups ranked by each of s1, i, S1 and I. Ranks ascend
/// with the score; ties share their average rank. Each listing is sorted by
/// rank, ties in input order.
pub fn rankings(scores: &[GroupScores]) -> Result<Vec<RankedEntry>, StatsError> {
    let mut order: Vec<&str> = Vec::new();
    for s in scores {
        if !order.contains(&s.discipline_id.as_str()) {
            order.push(&s.discipline_id);
        }
    }
    let mut out = Vec::new();
    for id in order {
        let members: Vec<&GroupScores> = scores.iter().filter(|s| s.discipline_id == id).collect();
        for measure in Measure::ALL {
            let values: Vec<f64> = members.iter().map(|m| measure.of(m)).collect();
            let ranks = average_ranks(&values)?;
            let mut idx: Vec<usize> = (0..members.len()).collect();
            idx.sort_by(|&a, &b| ranks[a].total_cmp(&ranks[b]));
            out.extend(idx.into_iter().map(|k| RankedEntry {
                discipline_id: id.to_owned(),
                measure,
                rank: ranks[k],
                group_id: members[k].group_id.clone(),
                value: values[k],
            }));
        }
    }
    Ok(out)
}

pub fn write_rankings(entries: &[RankedEntry], delimiter: Delimiter) -> String {
    write_rows(
        delimiter,
        &RANKING_COLUMNS,
        entries.iter().map(|e| {
            [
                e.discipline_id.clone(),
                e.measure.column().to_owned(),
                e.rank.to_string(),
                e.group_id.clone(),
                e.value.to_string(),
            ]
        }),
    )
}

pub fn parse_rankings(input: &str) -> Result<Vec<RankedEntry>, IngestError> {
    parse_with(input, &RANKING_COLUMNS, |t, line, rec| {
        let raw = t.field(rec, "measure");
        let measure = Measure::ALL
            .into_iter()
            .find(|m| m.column() == raw)
            .ok_or_else(|| malformed(line, "measure", format!("unknown measure {raw:?}")))?;
        Ok(RankedEntry {
            discipline_id: t.text(line, rec, "discipline_id")?,
            measure,
            rank: t.real(line, rec, "rank")?,
            group_id: t.text(line, rec, "group_id")?,
            value: t.real(line, rec, "value")?,
        })
    })
}

pub fn render_rankings(entries: &[RankedEntry]) -> String {
    let mut out = String::new();
    writeln!(out, "{RANKING_CAVEAT}").unwrap();
    let mut current: Option<(&str, Measure)> = None;
    for e in entries {
        if current != Some((&e.discipline_id, e.measure)) {
            current = Some((&e.discipline_id, e.measure));
            let kind = if e.measure.is_specific() { "specific" } else { "absolute" };
            writeln!(out, "\n{} by {} ({kind})", e.discipline_id, e.measure).unwrap();
        }
        writeln!(out, "{:>7}  {:<20} {:>12.3}", e.rank, e.group_id, e.value).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub group_id: String,
    pub size_class: SizeClass,
    pub x: f64,
    pub y: f64,
}

pub fn scatter(scores: &[GroupScores], pairing: Pairing) -> Vec<ScatterPoint> {
    scores
        .iter()
        .map(|g| {
            let (x, y) = pairing.values(g);
            ScatterPoint {
                group_id: g.group_id.clone(),
                size_class: g.size_class,
                x,
                y,
            }
        })
        .collect()
}

pub fn write_scatter(points: &[ScatterPoint], delimiter: Delimiter) -> String {
    write_rows(
        delimiter,
        &SCATTER_COLUMNS,
        points.iter().map(|p| {
            [
                p.group_id.clone(),
                p.size_class.to_string(),
                p.x.to_string(),
                p.y.to_string(),
            ]
        }),
    )
}

pub fn parse_scatter(input: &str) -> Result<Vec<ScatterPoint>, IngestError> {
    parse_with(input, &SCATTER_COLUMNS, |t, line, rec| {
        Ok(ScatterPoint {
            group_id: t.text(line, rec, "group_id")?,
            size_class: enum_field(t, line, rec, "size_class")?,
            x: t.real(line, rec, "x")?,
            y: t.real(line, rec, "y")?,
        })
    })
}

pub fn write_synth_runs(results: &[InflationResult], delimiter: Delimiter) -> String {
    write_rows(
        delimiter,
        &SYNTH_COLUMNS,
        results.iter().map(|r| {
            [
                r.seed.to_string(),
                r.r_specific.to_string(),
                r.r_absolute.to_string(),
                r.rho_specific.to_string(),
                r.rho_absolute.to_string(),
                r.gap().to_string(),
                r.clamp_fraction.to_string(),
            ]
        }),
    )
}

pub fn parse_synth_runs(input: &str) -> Result<Vec<InflationResult>, IngestError> {
    parse_with(input, &SYNTH_COLUMNS, |t, line, rec| {
        let seed = t
            .field(rec, "seed")
            .parse()
            .map_err(|_| malformed(line, "seed", "expected an unsigned integer"))?;
        let result = InflationResult {
            seed,
            r_specific: t.real(line, rec, "r_specific")?,
            r_absolute: t.real(line, rec, "r_absolute")?,
            rho_specific: t.real(line, rec, "rho_specific")?,
            rho_absolute: t.real(line, rec, "rho_absolute")?,
            clamp_fraction: t.real(line, rec, "clamp_fraction")?,
        };
        let gap = parse_real(t.field(rec, "gap")).map_err(|m| malformed(line, "gap", m))?;
        if gap != result.gap() {
            return Err(malformed(line, "gap", "gap does not equal r_absolute - r_specific"));
        }
        Ok(result)
    })
}

pub fn render_synth_summary(summary: &InflationSummary) -> String {
    format!(
        "runs={} median_gap={:.6} positive_gap_fraction={:.4}",
        summary.runs, summary.median_gap, summary.positive_fraction
    )
}
