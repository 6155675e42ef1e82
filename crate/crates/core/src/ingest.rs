//! Delimited-text ingestion for groups, papers, citation baselines and
//! discipline configuration, plus cohort composition summaries.
//!
//! Every parser accepts comma- or tab-separated text with a mandatory header
//! row. The delimiter is taken from the header line: a tab anywhere in it
//! selects tab, otherwise comma. Columns are matched by name, so their order
//! is free. Rejected rows are collected rather than short-circuited; each
//! appears once in [`IngestError::Rows`] with its 1-based line number.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::model::{
    validate_profile, Band, CriticalMasses, DisciplineConfig, ModelError, ResearchGroup,
    SizeClass, WeightingScheme,
};

pub const GROUP_COLUMNS: [&str; 9] = [
    "discipline_id",
    "institution",
    "group_id",
    "N",
    "p4",
    "p3",
    "p2",
    "p1",
    "pU",
];
pub const PAPER_COLUMNS: [&str; 6] = [
    "paper_id",
    "group_id",
    "field_id",
    "pub_year",
    "citations",
    "author_share",
];
pub const BASELINE_COLUMNS: [&str; 3] = ["field_id", "pub_year", "mean_citations"];
pub const DISCIPLINE_COLUMNS: [&str; 4] = ["discipline_id", "name", "Nk", "Nc"];

/// Nominal number of submitted outputs per FTE.
pub const OUTPUTS_PER_HEAD: f64 = 4.0;
/// Relative deviation from [`OUTPUTS_PER_HEAD`] that triggers a warning.
pub const OUTPUTS_PER_HEAD_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    #[default]
    Comma,
    Tab,
}

impl Delimiter {
    pub fn detect(header_line: &str) -> Self {
        if header_line.contains('\t') {
            Delimiter::Tab
        } else {
            Delimiter::Comma
        }
    }

    pub fn byte(self) -> u8 {
        match self {
            Delimiter::Comma => b',',
            Delimiter::Tab => b'\t',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowErrorKind {
    Malformed(String),
    UnknownDiscipline(String),
    DuplicateGroupId(String),
    DuplicateDiscipline(String),
    Model(ModelError),
    NegativeCitations(i64),
    AuthorShareOutOfRange(f64),
    PubYearOutsideWindow(i32),
    DuplicateKey { field_id: String, pub_year: i32 },
    NonPositiveBaseline(f64),
}

impl fmt::Display for RowErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowErrorKind::Malformed(msg) => write!(f, "malformed row: {msg}"),
            RowErrorKind::UnknownDiscipline(id) => write!(f, "unknown discipline {id:?}"),
            RowErrorKind::DuplicateGroupId(id) => write!(f, "duplicate group id {id:?}"),
            RowErrorKind::DuplicateDiscipline(id) => write!(f, "duplicate discipline {id:?}"),
            RowErrorKind::Model(e) => write!(f, "{e}"),
            RowErrorKind::NegativeCitations(c) => write!(f, "negative citation count {c}"),
            RowErrorKind::AuthorShareOutOfRange(s) => {
                write!(f, "author share {s} outside (0, 1]")
            }
            RowErrorKind::PubYearOutsideWindow(y) => {
                write!(f, "publication year {y} outside the assessment window")
            }
            RowErrorKind::DuplicateKey { field_id, pub_year } => {
                write!(f, "duplicate baseline key ({field_id}, {pub_year})")
            }
            RowErrorKind::NonPositiveBaseline(v) => {
                write!(f, "baseline mean must be positive, got {v}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    /// 1-based line number in the input.
    pub line: u64,
    pub column: Option<String>,
    pub kind: RowErrorKind,
}

impl RowError {
    fn new(line: u64, column: Option<&str>, kind: RowErrorKind) -> Self {
        RowError {
            line,
            column: column.map(str::to_owned),
            kind,
        }
    }
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.column {
            Some(col) => write!(f, "line {}, column {}: {}", self.line, col, self.kind),
            None => write!(f, "line {}: {}", self.line, self.kind),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("input has no header row")]
    MissingHeader,
    #[error("header is missing required column {0:?}")]
    MissingColumn(String),
    #[error("{} row(s) rejected", .0.len())]
    Rows(Vec<RowError>),
}

impl IngestError {
    pub fn row_errors(&self) -> &[RowError] {
        match self {
            IngestError::Rows(rows) => rows,
            _ => &[],
        }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A header-indexed view over delimited text.
pub(crate) struct Table {
    pub delimiter: Delimiter,
    columns: HashMap<String, usize>,
    pub rows: Vec<(u64, csv::StringRecord)>,
    pub errors: Vec<RowError>,
}

impl Table {
    pub fn parse(input: &str, required: &[&str]) -> Result<Table, IngestError> {
        let input = input.strip_prefix('\u{feff}').unwrap_or(input);
        let header_line = input
            .lines()
            .find(|l| !l.trim().is_empty())
            .ok_or(IngestError::MissingHeader)?;
        let delimiter = Delimiter::detect(header_line);
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delimiter.byte())
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(input.as_bytes());
        let headers = reader
            .headers()
            .map_err(|_| IngestError::MissingHeader)?
            .clone();
        let columns: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_owned(), i))
            .collect();
        for name in required {
            if !columns.contains_key(*name) {
                return Err(IngestError::MissingColumn((*name).to_owned()));
            }
        }
        let width = headers.len();
        let mut rows = Vec::new();
        let mut errors = Vec::new();
        for result in reader.records() {
            match result {
                Ok(record) => {
                    let line = record.position().map_or(0, |p| p.line());
                    if record.len() != width {
                        errors.push(RowError::new(
                            line,
                            None,
                            RowErrorKind::Malformed(format!(
                                "expected {width} fields, found {}",
                                record.len()
                            )),
                        ));
                    } else {
                        rows.push((line, record));
                    }
                }
                Err(e) => {
                    let line = e.position().map_or(0, |p| p.line());
                    errors.push(RowError::new(line, None, RowErrorKind::Malformed(e.to_string())));
                }
            }
        }
        Ok(Table {
            delimiter,
            columns,
            rows,
            errors,
        })
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.contains_key(name)
    }

    pub fn field<'r>(&self, record: &'r csv::StringRecord, name: &str) -> &'r str {
        self.columns
            .get(name)
            .and_then(|&i| record.get(i))
            .unwrap_or("")
    }

    pub fn text(
        &self,
        line: u64,
        record: &csv::StringRecord,
        name: &str,
    ) -> Result<String, RowError> {
        let value = self.field(record, name);
        if value.is_empty() {
            return Err(RowError::new(
                line,
                Some(name),
                RowErrorKind::Malformed("empty value".into()),
            ));
        }
        Ok(value.to_owned())
    }

    pub fn real(&self, line: u64, record: &csv::StringRecord, name: &str) -> Result<f64, RowError> {
        parse_real(self.field(record, name)).map_err(|msg| {
            RowError::new(line, Some(name), RowErrorKind::Malformed(msg))
        })
    }

    pub fn opt_real(
        &self,
        line: u64,
        record: &csv::StringRecord,
        name: &str,
    ) -> Result<Option<f64>, RowError> {
        if !self.has_column(name) || self.field(record, name).is_empty() {
            return Ok(None);
        }
        self.real(line, record, name).map(Some)
    }

    pub fn integer(
        &self,
        line: u64,
        record: &csv::StringRecord,
        name: &str,
    ) -> Result<i64, RowError> {
        let raw = self.field(record, name);
        raw.parse::<i64>().map_err(|_| {
            RowError::new(
                line,
                Some(name),
                RowErrorKind::Malformed(format!("expected an integer, found {raw:?}")),
            )
        })
    }
}

pub(crate) fn parse_real(raw: &str) -> Result<f64, String> {
    let value: f64 = raw
        .parse()
        .map_err(|_| format!("expected a number, found {raw:?}"))?;
    if !value.is_finite() {
        return Err(format!("expected a finite number, found {raw:?}"));
    }
    Ok(value)
}

fn decimals(raw: &str) -> Option<usize> {
    if raw.contains(['e', 'E']) {
        return None;
    }
    Some(raw.split_once('.').map_or(0, |(_, frac)| frac.len()))
}

pub(crate) fn write_rows<I, R>(delimiter: Delimiter, header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut writer = csv::WriterBuilder::new()
        .delimiter(delimiter.byte())
        .from_writer(Vec::new());
    writer.write_record(header).expect("writing to memory");
    for row in rows {
        let fields: Vec<String> = row.into_iter().collect();
        writer.write_record(&fields).expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("flushing to memory")).expect("utf-8 fields")
}

/// Known disciplines, keyed by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Disciplines {
    configs: BTreeMap<String, DisciplineConfig>,
    allow_unlisted: bool,
}

impl Disciplines {
    pub fn new(configs: impl IntoIterator<Item = DisciplineConfig>) -> Self {
        Disciplines {
            configs: configs
                .into_iter()
                .map(|c| (c.discipline_id.clone(), c))
                .collect(),
            allow_unlisted: false,
        }
    }

    /// Accepts any discipline id; unlisted ones get no critical masses.
    pub fn open() -> Self {
        Disciplines {
            configs: BTreeMap::new(),
            allow_unlisted: true,
        }
    }

    pub fn get(&self, id: &str) -> Option<&DisciplineConfig> {
        self.configs.get(id)
    }

    pub fn resolve(&self, id: &str) -> Option<DisciplineConfig> {
        match self.configs.get(id) {
            Some(c) => Some(c.clone()),
            None if self.allow_unlisted => Some(DisciplineConfig::without_thresholds(id)),
            None => None,
        }
    }

    /// Applies one weighting scheme to every listed discipline.
    pub fn with_scheme(mut self, scheme: WeightingScheme) -> Self {
        for config in self.configs.values_mut() {
            config.scheme = scheme;
        }
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = &DisciplineConfig> {
        self.configs.values()
    }
}

pub fn parse_disciplines_table(input: &str) -> Result<Disciplines, IngestError> {
    let table = Table::parse(input, &DISCIPLINE_COLUMNS)?;
    let mut errors = table.errors.clone();
    let mut configs = Vec::new();
    let mut seen = HashSet::new();
    for (line, record) in &table.rows {
        let line = *line;
        let row = (|| {
            let id = table.text(line, record, "discipline_id")?;
            let name = table.field(record, "name").to_owned();
            let nk = table.opt_real(line, record, "Nk")?;
            let nc = table.opt_real(line, record, "Nc")?;
            let masses = match (nk, nc) {
                (None, None) => None,
                (Some(nk), Some(nc)) => Some(
                    CriticalMasses::new(nk, nc)
                        .map_err(|e| RowError::new(line, Some("Nk"), RowErrorKind::Model(e)))?,
                ),
                _ => {
                    return Err(RowError::new(
                        line,
                        None,
                        RowErrorKind::Malformed("Nk and Nc must both be given or both empty".into()),
                    ))
                }
            };
            if !seen.insert(id.clone()) {
                return Err(RowError::new(
                    line,
                    Some("discipline_id"),
                    RowErrorKind::DuplicateDiscipline(id),
                ));
            }
            let name = if name.is_empty() { id.clone() } else { name };
            Ok(DisciplineConfig::new(id, name, masses))
        })();
        match row {
            Ok(config) => configs.push(config),
            Err(e) => errors.push(e),
        }
    }
    finish(errors, Disciplines::new(configs))
}

fn finish<T>(mut errors: Vec<RowError>, value: T) -> Result<T, IngestError> {
    if errors.is_empty() {
        Ok(value)
    } else {
        errors.sort_by_key(|e| e.line);
        Err(IngestError::Rows(errors))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceMeta {
    pub path: Option<String>,
    pub delimiter: Delimiter,
    pub row_count: usize,
    /// Discipline ids in order of first appearance.
    pub discipline_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroupsTable {
    pub rows: Vec<ResearchGroup>,
    pub source: SourceMeta,
}

impl GroupsTable {
    pub fn from_rows(rows: Vec<ResearchGroup>) -> Self {
        let mut discipline_ids: Vec<String> = Vec::new();
        for g in &rows {
            if !discipline_ids.contains(&g.discipline_id) {
                discipline_ids.push(g.discipline_id.clone());
            }
        }
        GroupsTable {
            source: SourceMeta {
                path: None,
                delimiter: Delimiter::Comma,
                row_count: rows.len(),
                discipline_ids,
            },
            rows,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn discipline(&self, id: &str) -> impl Iterator<Item = &ResearchGroup> {
        let id = id.to_owned();
        self.rows.iter().filter(move |g| g.discipline_id == id)
    }
}

fn band_column(band: Band) -> &'static str {
    match band {
        Band::Four => "p4",
        Band::Three => "p3",
        Band::Two => "p2",
        Band::One => "p1",
        Band::Unclassified => "pU",
    }
}

fn model_column(e: &ModelError) -> Option<&'static str> {
    match e {
        ModelError::NonFiniteBand { band, .. }
        | ModelError::NegativeBand { band, .. }
        | ModelError::BandOver100 { band, .. } => Some(band_column(*band)),
        ModelError::NonPositiveSize(_) => Some("N"),
        ModelError::NegativeNci(_) => Some("nci"),
        _ => None,
    }
}

pub fn parse_groups_table(
    input: &str,
    disciplines: &Disciplines,
) -> Result<GroupsTable, IngestError> {
    let table = Table::parse(input, &GROUP_COLUMNS)?;
    let mut errors = table.errors.clone();
    let mut rows = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for (line, record) in &table.rows {
        let line = *line;
        let row = (|| {
            let discipline_id = table.text(line, record, "discipline_id")?;
            let config = disciplines.resolve(&discipline_id).ok_or_else(|| {
                RowError::new(
                    line,
                    Some("discipline_id"),
                    RowErrorKind::UnknownDiscipline(discipline_id.clone()),
                )
            })?;
            let institution = table.field(record, "institution").to_owned();
            let group_id = table.text(line, record, "group_id")?;
            let size = table.real(line, record, "N")?;
            if decimals(table.field(record, "N")).is_none_or(|d| d > 2) {
                return Err(RowError::new(
                    line,
                    Some("N"),
                    RowErrorKind::Malformed("N accepts at most two decimals".into()),
                ));
            }
            let mut bands = [0.0; 5];
            for (slot, band) in bands.iter_mut().zip(Band::ALL) {
                *slot = table.real(line, record, band_column(band))?;
            }
            let nci = table.opt_real(line, record, "nci")?;
            let model_err = |e: ModelError| {
                let col = model_column(&e);
                RowError::new(line, col, RowErrorKind::Model(e))
            };
            let profile = validate_profile(bands).map_err(model_err)?;
            let group = ResearchGroup::new(group_id, institution, &config, size, profile, nci)
                .map_err(model_err)?;
            if !seen.insert((group.discipline_id.clone(), group.group_id.clone())) {
                return Err(RowError::new(
                    line,
                    Some("group_id"),
                    RowErrorKind::DuplicateGroupId(group.group_id),
                ));
            }
            Ok(group)
        })();
        match row {
            Ok(g) => rows.push(g),
            Err(e) => errors.push(e),
        }
    }
    let mut groups = GroupsTable::from_rows(rows);
    groups.source.delimiter = table.delimiter;
    finish(errors, groups)
}

pub fn load_groups_table(path: &Path, disciplines: &Disciplines) -> Result<GroupsTable, IngestError> {
    let mut table = parse_groups_table(&read_file(path)?, disciplines)?;
    table.source.path = Some(path.display().to_string());
    Ok(table)
}

pub fn load_disciplines(path: &Path) -> Result<Disciplines, IngestError> {
    parse_disciplines_table(&read_file(path)?)
}

pub fn write_groups_table(table: &GroupsTable, delimiter: Delimiter) -> String {
    let with_nci = table.rows.iter().any(|g| g.nci.is_some());
    let mut header: Vec<&str> = GROUP_COLUMNS.to_vec();
    if with_nci {
        header.push("nci");
    }
    let rows = table.rows.iter().map(|g| {
        let mut fields = vec![
            g.discipline_id.clone(),
            g.institution.clone(),
            g.group_id.clone(),
            g.size.to_string(),
        ];
        fields.extend(g.profile.bands().iter().map(f64::to_string));
        if with_nci {
            fields.push(g.nci.map(|i| i.to_string()).unwrap_or_default());
        }
        fields
    });
    write_rows(delimiter, &header, rows)
}

/// Inclusive range of publication years accepted for submitted outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssessmentWindow {
    pub first_year: i32,
    pub last_year: i32,
}

impl AssessmentWindow {
    /// 1 January 2001 to 31 July 2007.
    pub const RAE_2008: AssessmentWindow = AssessmentWindow {
        first_year: 2001,
        last_year: 2007,
    };

    pub fn contains(&self, year: i32) -> bool {
        (self.first_year..=self.last_year).contains(&year)
    }
}

impl Default for AssessmentWindow {
    fn default() -> Self {
        AssessmentWindow::RAE_2008
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaperRecord {
    pub paper_id: String,
    pub group_id: String,
    pub field_id: String,
    pub pub_year: i32,
    pub citations: u64,
    /// The group's fractional claim on a co-authored output, in (0, 1].
    pub author_share: f64,
}

pub fn parse_papers_table(input: &str) -> Result<Vec<PaperRecord>, IngestError> {
    parse_papers_table_in(input, AssessmentWindow::default())
}

pub fn parse_papers_table_in(
    input: &str,
    window: AssessmentWindow,
) -> Result<Vec<PaperRecord>, IngestError> {
    let table = Table::parse(input, &PAPER_COLUMNS)?;
    let mut errors = table.errors.clone();
    let mut records = Vec::with_capacity(table.rows.len());
    for (line, record) in &table.rows {
        let line = *line;
        let row = (|| {
            let paper_id = table.text(line, record, "paper_id")?;
            let group_id = table.text(line, record, "group_id")?;
            let field_id = table.text(line, record, "field_id")?;
            let year = table.integer(line, record, "pub_year")?;
            let pub_year = i32::try_from(year).map_err(|_| {
                RowError::new(
                    line,
                    Some("pub_year"),
                    RowErrorKind::Malformed(format!("year {year} out of range")),
                )
            })?;
            if !window.contains(pub_year) {
                return Err(RowError::new(
                    line,
                    Some("pub_year"),
                    RowErrorKind::PubYearOutsideWindow(pub_year),
                ));
            }
            let citations = table.integer(line, record, "citations")?;
            if citations < 0 {
                return Err(RowError::new(
                    line,
                    Some("citations"),
                    RowErrorKind::NegativeCitations(citations),
                ));
            }
            let author_share = table.real(line, record, "author_share")?;
            if !(author_share > 0.0 && author_share <= 1.0) {
                return Err(RowError::new(
                    line,
                    Some("author_share"),
                    RowErrorKind::AuthorShareOutOfRange(author_share),
                ));
            }
            Ok(PaperRecord {
                paper_id,
                group_id,
                field_id,
                pub_year,
                citations: citations as u64,
                author_share,
            })
        })();
        match row {
            Ok(r) => records.push(r),
            Err(e) => errors.push(e),
        }
    }
    finish(errors, records)
}

pub fn load_papers(path: &Path) -> Result<Vec<PaperRecord>, IngestError> {
    parse_papers_table(&read_file(path)?)
}

pub fn write_papers_table(records: &[PaperRecord], delimiter: Delimiter) -> String {
    write_rows(
        delimiter,
        &PAPER_COLUMNS,
        records.iter().map(|r| {
            [
                r.paper_id.clone(),
                r.group_id.clone(),
                r.field_id.clone(),
                r.pub_year.to_string(),
                r.citations.to_string(),
                r.author_share.to_string(),
            ]
        }),
    )
}

/// Output counts per group id.
pub fn outputs_per_group(records: &[PaperRecord]) -> BTreeMap<&str, usize> {
    let mut counts = BTreeMap::new();
    for r in records {
        *counts.entry(r.group_id.as_str()).or_insert(0) += 1;
    }
    counts
}

/// Mean citations per paper for each (field, publication year).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BaselineTable {
    means: BTreeMap<(String, i32), f64>,
}

impl BaselineTable {
    pub fn new() -> Self {
        BaselineTable::default()
    }

    pub fn insert(
        &mut self,
        field_id: impl Into<String>,
        pub_year: i32,
        mean: f64,
    ) -> Result<(), RowErrorKind> {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(RowErrorKind::NonPositiveBaseline(mean));
        }
        let field_id = field_id.into();
        let key = (field_id.clone(), pub_year);
        if self.means.contains_key(&key) {
            return Err(RowErrorKind::DuplicateKey { field_id, pub_year });
        }
        self.means.insert(key, mean);
        Ok(())
    }

    pub fn get(&self, field_id: &str, pub_year: i32) -> Option<f64> {
        self.means.get(&(field_id.to_owned(), pub_year)).copied()
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i32, f64)> {
        self.means.iter().map(|((f, y), m)| (f.as_str(), *y, *m))
    }
}

pub fn parse_baselines_table(input: &str) -> Result<BaselineTable, IngestError> {
    let table = Table::parse(input, &BASELINE_COLUMNS)?;
    let mut errors = table.errors.clone();
    let mut baselines = BaselineTable::new();
    for (line, record) in &table.rows {
        let line = *line;
        let row = (|| {
            let field_id = table.text(line, record, "field_id")?;
            let year = table.integer(line, record, "pub_year")?;
            let year = i32::try_from(year).map_err(|_| {
                RowError::new(
                    line,
                    Some("pub_year"),
                    RowErrorKind::Malformed(format!("year {year} out of range")),
                )
            })?;
            let mean = table.real(line, record, "mean_citations")?;
            baselines.insert(field_id, year, mean).map_err(|kind| {
                let col = match kind {
                    RowErrorKind::NonPositiveBaseline(_) => Some("mean_citations"),
                    _ => None,
                };
                RowError::new(line, col, kind)
            })
        })();
        if let Err(e) = row {
            errors.push(e);
        }
    }
    finish(errors, baselines)
}

pub fn load_baselines(path: &Path) -> Result<BaselineTable, IngestError> {
    parse_baselines_table(&read_file(path)?)
}

pub fn write_baselines_table(baselines: &BaselineTable, delimiter: Delimiter) -> String {
    write_rows(
        delimiter,
        &BASELINE_COLUMNS,
        baselines
            .iter()
            .map(|(f, y, m)| [f.to_owned(), y.to_string(), m.to_string()]),
    )
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DisciplineSummary {
    pub discipline_id: String,
    pub total: usize,
    pub small: usize,
    pub medium: usize,
    pub large: usize,
    pub unknown: usize,
    pub total_fte: f64,
    /// Present when papers were supplied.
    pub outputs: Option<usize>,
    pub outputs_per_fte: Option<f64>,
}

impl DisciplineSummary {
    pub fn mean_size(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.total_fte / self.total as f64
        }
    }

    pub fn count(&self, class: SizeClass) -> usize {
        match class {
            SizeClass::Small => self.small,
            SizeClass::Medium => self.medium,
            SizeClass::Large => self.large,
            SizeClass::Unknown => self.unknown,
        }
    }
}

impl fmt::Display for DisciplineSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} groups", self.total)?;
        if self.unknown == self.total {
            if self.total > 0 {
                f.write_str(" (sizes unclassified)")?;
            }
        } else {
            write!(
                f,
                ": {} large, {} medium, {} small",
                self.large, self.medium, self.small
            )?;
            if self.unknown > 0 {
                write!(f, ", {} unclassified", self.unknown)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CohortSummary {
    pub disciplines: Vec<DisciplineSummary>,
    pub warnings: Vec<String>,
}

impl CohortSummary {
    pub fn total_groups(&self) -> usize {
        self.disciplines.iter().map(|d| d.total).sum()
    }

    pub fn get(&self, discipline_id: &str) -> Option<&DisciplineSummary> {
        self.disciplines
            .iter()
            .find(|d| d.discipline_id == discipline_id)
    }
}

pub fn summarize_cohort(groups: &GroupsTable, papers: Option<&[PaperRecord]>) -> CohortSummary {
    let mut disciplines: Vec<DisciplineSummary> = groups
        .source
        .discipline_ids
        .iter()
        .map(|id| DisciplineSummary {
            discipline_id: id.clone(),
            ..Default::default()
        })
        .collect();
    let index: HashMap<String, usize> = disciplines
        .iter()
        .enumerate()
        .map(|(i, d)| (d.discipline_id.clone(), i))
        .collect();
    let mut owners: HashMap<&str, Vec<usize>> = HashMap::new();
    for g in &groups.rows {
        let slot = index[&g.discipline_id];
        let d = &mut disciplines[slot];
        d.total += 1;
        d.total_fte += g.size;
        match g.size_class {
            SizeClass::Small => d.small += 1,
            SizeClass::Medium => d.medium += 1,
            SizeClass::Large => d.large += 1,
            SizeClass::Unknown => d.unknown += 1,
        }
        owners.entry(g.group_id.as_str()).or_default().push(slot);
    }

    let mut warnings = Vec::new();
    if let Some(papers) = papers {
        let mut outputs = vec![0usize; disciplines.len()];
        let mut orphans = 0usize;
        let mut ambiguous = 0usize;
        for p in papers {
            match owners.get(p.group_id.as_str()).map(Vec::as_slice) {
                Some([slot]) => outputs[*slot] += 1,
                Some(_) => ambiguous += 1,
                None => orphans += 1,
            }
        }
        if orphans > 0 {
            warnings.push(format!("{orphans} paper(s) reference no known group"));
        }
        if ambiguous > 0 {
            warnings.push(format!(
                "{ambiguous} paper(s) reference a group id shared by several disciplines"
            ));
        }
        for (d, count) in disciplines.iter_mut().zip(outputs) {
            d.outputs = Some(count);
            if d.total_fte > 0.0 {
                let ratio = count as f64 / d.total_fte;
                d.outputs_per_fte = Some(ratio);
                let deviation = (ratio - OUTPUTS_PER_HEAD).abs() / OUTPUTS_PER_HEAD;
                if deviation > OUTPUTS_PER_HEAD_TOLERANCE {
                    warnings.push(format!(
                        "{}: {:.3} outputs per FTE deviates from {} by more than {}%",
                        d.discipline_id,
                        ratio,
                        OUTPUTS_PER_HEAD,
                        OUTPUTS_PER_HEAD_TOLERANCE * 100.0
                    ));
                }
            }
        }
    }
    CohortSummary {
        disciplines,
        warnings,
    }
}
