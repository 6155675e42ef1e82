//! Specific and absolute group measures: weighted peer-review quality `s1`,
//! strength `S1 = s1 * N`, normalised citation impact `i` and absolute
//! impact `I = i * N`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ingest::{BaselineTable, GroupsTable, PaperRecord};
use crate::model::{check_size, Band, ModelError, QualityProfile, SizeClass, WeightingScheme};

/// Supplied and computed NCI values differing by more than this raise a warning.
pub const NCI_DISCREPANCY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no citation baseline for field {field_id:?}, year {pub_year}")]
    MissingBaseline { field_id: String, pub_year: i32 },
    #[error("cannot average an empty set of papers")]
    EmptyRecordSet,
    #[error("group {0:?} has neither an nci value nor papers with baselines")]
    MissingNciSource(String),
}

/// How co-authored outputs count towards a group's NCI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Attribution {
    /// Plain mean over the group's papers.
    #[default]
    Unweighted,
    /// Mean weighted by each paper's author share.
    ShareWeighted,
}

impl FromStr for Attribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unweighted" => Ok(Attribution::Unweighted),
            "share" => Ok(Attribution::ShareWeighted),
            other => Err(format!("unknown attribution policy {other:?}")),
        }
    }
}

/// Scale on which quality columns are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QualityScale {
    /// Percentage points times weight, 0..=700 under the funding scheme.
    #[default]
    Weighted,
    /// Divided by the scheme's largest weight, 0..=100.
    Normalized,
}

impl FromStr for QualityScale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "weighted" => Ok(QualityScale::Weighted),
            "normalized" => Ok(QualityScale::Normalized),
            other => Err(format!("unknown quality scale {other:?}")),
        }
    }
}

pub fn weighted_quality(profile: &QualityProfile, scheme: &WeightingScheme) -> f64 {
    Band::ALL
        .iter()
        .map(|&band| scheme.weight(band) * profile.get(band))
        .sum()
}

pub fn strength(quality: f64, size: f64) -> Result<f64, MetricsError> {
    Ok(quality * check_size(size)?)
}

pub fn impact(nci: f64, size: f64) -> Result<f64, MetricsError> {
    let size = check_size(size)?;
    if !(nci.is_finite() && nci >= 0.0) {
        return Err(ModelError::NegativeNci(nci).into());
    }
    Ok(nci * size)
}

/// Citations divided by the field-year mean.
pub fn rebase_citation(record: &PaperRecord, baselines: &BaselineTable) -> Result<f64, MetricsError> {
    let mean = baselines
        .get(&record.field_id, record.pub_year)
        .ok_or_else(|| MetricsError::MissingBaseline {
            field_id: record.field_id.clone(),
            pub_year: record.pub_year,
        })?;
    Ok(record.citations as f64 / mean)
}

pub fn group_nci<'a, I>(
    records: I,
    baselines: &BaselineTable,
    attribution: Attribution,
) -> Result<f64, MetricsError>
where
    I: IntoIterator<Item = &'a PaperRecord>,
{
    let mut weighted = 0.0;
    let mut total_weight = 0.0;
    let mut count = 0usize;
    for record in records {
        let rebased = rebase_citation(record, baselines)?;
        let weight = match attribution {
            Attribution::Unweighted => 1.0,
            Attribution::ShareWeighted => record.author_share,
        };
        weighted += weight * rebased;
        total_weight += weight;
        count += 1;
    }
    if count == 0 {
        return Err(MetricsError::EmptyRecordSet);
    }
    Ok(weighted / total_weight)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupScores {
    pub discipline_id: String,
    pub group_id: String,
    pub size: f64,
    pub size_class: SizeClass,
    /// Weighted peer-review quality.
    pub s1: f64,
    /// Strength, `s1 * size`.
    pub strength: f64,
    /// Normalised citation impact.
    pub nci: f64,
    /// Absolute impact, `nci * size`.
    pub impact: f64,
}

impl GroupScores {
    pub fn new(
        discipline_id: impl Into<String>,
        group_id: impl Into<String>,
        size: f64,
        size_class: SizeClass,
        s1: f64,
        nci: f64,
    ) -> Result<Self, MetricsError> {
        Ok(GroupScores {
            discipline_id: discipline_id.into(),
            group_id: group_id.into(),
            size,
            size_class,
            s1,
            strength: strength(s1, size)?,
            nci,
            impact: impact(nci, size)?,
        })
    }

    /// Quality and strength rescaled to `scale`.
    pub fn quality_on(&self, scale: QualityScale, scheme: &WeightingScheme) -> (f64, f64) {
        match scale {
            QualityScale::Weighted => (self.s1, self.strength),
            QualityScale::Normalized => {
                let w = scheme.max_weight();
                (self.s1 / w, self.strength / w)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Quality,
    Nci,
    Strength,
    Impact,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::Quality, Measure::Nci, Measure::Strength, Measure::Impact];

    pub fn of(self, scores: &GroupScores) -> f64 {
        match self {
            Measure::Quality => scores.s1,
            Measure::Nci => scores.nci,
            Measure::Strength => scores.strength,
            Measure::Impact => scores.impact,
        }
    }

    pub fn column(self) -> &'static str {
        match self {
            Measure::Quality => "s1",
            Measure::Nci => "i",
            Measure::Strength => "S1",
            Measure::Impact => "I",
        }
    }

    pub fn is_specific(self) -> bool {
        matches!(self, Measure::Quality | Measure::Nci)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ScoreOptions {
    pub scheme: WeightingScheme,
    pub attribution: Attribution,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoredCohort {
    pub scores: Vec<GroupScores>,
    pub warnings: Vec<String>,
}

/// Scores every group in input order.
///
/// A group's NCI comes from its `nci` column when present, otherwise from its
/// papers rebased against `baselines`. When both exist the supplied value is
/// kept and a discrepancy above [`NCI_DISCREPANCY_TOLERANCE`] is reported.
pub fn score_cohort(
    groups: &GroupsTable,
    papers: Option<&[PaperRecord]>,
    baselines: Option<&BaselineTable>,
    options: &ScoreOptions,
) -> Result<ScoredCohort, MetricsError> {
    let mut by_group: HashMap<&str, Vec<&PaperRecord>> = HashMap::new();
    for p in papers.unwrap_or_default() {
        by_group.entry(p.group_id.as_str()).or_default().push(p);
    }

    let mut scores = Vec::with_capacity(groups.len());
    let mut warnings = Vec::new();
    for g in &groups.rows {
        let computed = match (by_group.get(g.group_id.as_str()), baselines) {
            (Some(records), Some(baselines)) => Some(group_nci(
                records.iter().copied(),
                baselines,
                options.attribution,
            )?),
            _ => None,
        };
        let nci = match (g.nci, computed) {
            (Some(supplied), Some(computed)) => {
                if (supplied - computed).abs() > NCI_DISCREPANCY_TOLERANCE {
                    warnings.push(format!(
                        "{}/{}: supplied nci {} differs from computed {}",
                        g.discipline_id, g.group_id, supplied, computed
                    ));
                }
                supplied
            }
            (Some(supplied), None) => supplied,
            (None, Some(computed)) => computed,
            (None, None) => return Err(MetricsError::MissingNciSource(g.group_id.clone())),
        };
        let s1 = weighted_quality(&g.profile, &options.scheme);
        scores.push(GroupScores::new(
            g.discipline_id.clone(),
            g.group_id.clone(),
            g.size,
            g.size_class,
            s1,
            nci,
        )?);
    }
    Ok(ScoredCohort { scores, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_groups_table, Disciplines};
    use crate::model::validate_profile;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    /// Independent weighted-sum oracle: expand each band into unit steps.
    fn quality_by_enumeration(bands: [f64; 5], weights: [f64; 5]) -> f64 {
        let mut total = 0.0;
        for (p, w) in bands.iter().zip(weights) {
            let whole = p.trunc() as usize;
            for _ in 0..whole {
                total += w;
            }
            total += w * p.fract();
        }
        total
    }

    fn paper(citations: u64, share: f64, year: i32) -> PaperRecord {
        PaperRecord {
            paper_id: format!("p{citations}-{year}"),
            group_id: "g".into(),
            field_id: "phys".into(),
            pub_year: year,
            citations,
            author_share: share,
        }
    }

    #[test]
    fn weighted_quality_examples() {
        let scheme = WeightingScheme::default();
        let p = validate_profile([25.0, 20.0, 35.0, 15.0, 5.0]).unwrap();
        assert_eq!(weighted_quality(&p, &scheme), 270.0);
        assert_eq!(
            quality_by_enumeration(p.bands(), scheme.weights()),
            270.0
        );
        let bottom = validate_profile([0.0, 0.0, 0.0, 0.0, 100.0]).unwrap();
        assert_eq!(weighted_quality(&bottom, &scheme), 0.0);
        let top = validate_profile([100.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(weighted_quality(&top, &scheme), 700.0);
    }

    #[test]
    fn strength_and_impact_examples() {
        assert!(close(strength(34.0, 20.6).unwrap(), 700.4, 1e-12));
        assert_eq!(strength(34.0, 6.0).unwrap(), 204.0);
        assert_eq!(strength(0.0, 13.0).unwrap(), 0.0);
        assert_eq!(
            strength(1.0, 0.0),
            Err(MetricsError::Model(ModelError::NonPositiveSize(0.0)))
        );
        assert_eq!(impact(1.0, 12.0).unwrap(), 12.0);
        assert_eq!(impact(0.0, 40.0).unwrap(), 0.0);
        assert!(close(impact(1.37, 20.6).unwrap(), 28.222, 1e-12));
        assert!(impact(-1.0, 3.0).is_err());
    }

    #[test]
    fn rebasing() {
        let mut b = BaselineTable::new();
        b.insert("phys", 2003, 5.0).unwrap();
        assert_eq!(rebase_citation(&paper(10, 1.0, 2003), &b).unwrap(), 2.0);
        assert_eq!(rebase_citation(&paper(0, 1.0, 2003), &b).unwrap(), 0.0);
        assert_eq!(
            rebase_citation(&paper(7, 1.0, 2004), &b),
            Err(MetricsError::MissingBaseline {
                field_id: "phys".into(),
                pub_year: 2004
            })
        );
    }

    #[test]
    fn nci_averaging() {
        let mut b = BaselineTable::new();
        b.insert("phys", 2003, 1.0).unwrap();
        b.insert("phys", 2004, 2.0).unwrap();
        let recs = [
            paper(2, 1.0, 2003),
            paper(0, 1.0, 2003),
            paper(2, 1.0, 2004),
            paper(1, 1.0, 2003),
        ];
        assert_eq!(group_nci(&recs, &b, Attribution::Unweighted).unwrap(), 1.0);

        let mut single = BaselineTable::new();
        single.insert("phys", 2005, 2.0).unwrap();
        let one = [paper(7, 0.25, 2005)];
        for policy in [Attribution::Unweighted, Attribution::ShareWeighted] {
            assert_eq!(group_nci(&one, &single, policy).unwrap(), 3.5);
        }

        let shared = [paper(2, 1.0, 2003), paper(0, 0.5, 2003)];
        let got = group_nci(&shared, &b, Attribution::ShareWeighted).unwrap();
        // brute force: sum(w*x)/sum(w)
        let oracle = [(2.0, 1.0), (0.0, 0.5)]
            .iter()
            .fold((0.0, 0.0), |(n, d), (x, w)| (n + x * w, d + w));
        assert_eq!(got, oracle.0 / oracle.1);
        assert!(close(got, 4.0 / 3.0, 1e-15));

        let none: [PaperRecord; 0] = [];
        assert_eq!(
            group_nci(&none, &b, Attribution::Unweighted),
            Err(MetricsError::EmptyRecordSet)
        );
    }

    fn table(rows: &str) -> GroupsTable {
        let input = format!("discipline_id,institution,group_id,N,p4,p3,p2,p1,pU,nci\n{rows}");
        parse_groups_table(&input, &Disciplines::open()).unwrap()
    }

    #[test]
    fn score_single_group() {
        let t = table("chem,U,g1,10,25,20,35,15,5,1.2\n");
        let out = score_cohort(&t, None, None, &ScoreOptions::default()).unwrap();
        let s = &out.scores[0];
        assert_eq!((s.s1, s.strength), (270.0, 2700.0));
        assert_eq!(s.nci, 1.2);
        assert!(close(s.impact, 12.0, 1e-12));
        let (q, st) = s.quality_on(QualityScale::Normalized, &WeightingScheme::default());
        assert!(close(q, 270.0 / 7.0, 1e-15));
        assert!(close(st, 2700.0 / 7.0, 1e-15));
    }

    #[test]
    fn missing_nci_source() {
        let t = table("chem,U,g1,10,25,20,35,15,5,\n");
        assert_eq!(
            score_cohort(&t, None, None, &ScoreOptions::default()),
            Err(MetricsError::MissingNciSource("g1".into()))
        );
    }

    #[test]
    fn nci_from_papers_and_discrepancy_warning() {
        let mut b = BaselineTable::new();
        b.insert("phys", 2003, 4.0).unwrap();
        let papers = vec![paper(8, 1.0, 2003), paper(4, 1.0, 2003)];
        let computed = table("phys,U,g,3,25,20,35,15,5,\n");
        let out = score_cohort(&computed, Some(&papers), Some(&b), &ScoreOptions::default()).unwrap();
        assert_eq!(out.scores[0].nci, 1.5);
        assert!(out.warnings.is_empty());

        let supplied = table("phys,U,g,3,25,20,35,15,5,1.7\n");
        let out = score_cohort(&supplied, Some(&papers), Some(&b), &ScoreOptions::default()).unwrap();
        assert_eq!(out.scores[0].nci, 1.7);
        assert_eq!(out.warnings.len(), 1);

        let agreeing = table("phys,U,g,3,25,20,35,15,5,1.5\n");
        let out = score_cohort(&agreeing, Some(&papers), Some(&b), &ScoreOptions::default()).unwrap();
        assert!(out.warnings.is_empty());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn profile() -> impl Strategy<Value = [f64; 5]> {
            proptest::array::uniform5(0.0f64..1.0).prop_map(|raw| {
                let total: f64 = raw.iter().sum::<f64>().max(1e-9);
                raw.map(|x| 100.0 * x / total)
            })
        }

        proptest! {
            #[test]
            fn homogeneity(s in 0.0f64..700.0, i in 0.0f64..5.0, n in 0.1f64..200.0, k in 0.0f64..10.0) {
                let lhs = strength(k * s, n).unwrap();
                let rhs = k * strength(s, n).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(f64::MIN_POSITIVE) || lhs == rhs);
                let lhs = impact(k * i, n).unwrap();
                let rhs = k * impact(i, n).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(f64::MIN_POSITIVE) || lhs == rhs);
            }

            #[test]
            fn quality_bounded(bands in profile()) {
                let p = validate_profile(bands).unwrap();
                let q = weighted_quality(&p, &WeightingScheme::default());
                prop_assert!((0.0..=700.0 + 1e-9).contains(&q));
            }

            #[test]
            fn upgrading_mass_never_lowers_quality(bands in profile(), from in 1usize..5, frac in 0.0f64..1.0) {
                let scheme = WeightingScheme::default();
                let before = validate_profile(bands).unwrap();
                let mut moved = bands;
                let amount = moved[from] * frac;
                moved[from] -= amount;
                moved[from - 1] += amount;
                let after = validate_profile(moved).unwrap();
                prop_assert!(weighted_quality(&after, &scheme) >= weighted_quality(&before, &scheme) - 1e-9);
            }

            #[test]
            fn quality_monotone_in_weighted_band(bands in profile(), band in 0usize..3, bump in 0.0f64..10.0) {
                let scheme = WeightingScheme::default();
                let mut raw = bands;
                raw[band] += bump;
                let base = weighted_quality(&validate_profile(bands).unwrap(), &scheme);
                // sum may leave the tolerance; compare the raw weighted sums
                let grown: f64 = raw.iter().zip(scheme.weights()).map(|(p, w)| p * w).sum();
                prop_assert!(grown >= base);
            }

            #[test]
            fn unit_shares_match_unweighted(cites in proptest::collection::vec(0u64..500, 1..20)) {
                let mut b = BaselineTable::new();
                b.insert("phys", 2003, 3.7).unwrap();
                let recs: Vec<_> = cites.iter().map(|&c| paper(c, 1.0, 2003)).collect();
                prop_assert_eq!(
                    group_nci(&recs, &b, Attribution::ShareWeighted).unwrap(),
                    group_nci(&recs, &b, Attribution::Unweighted).unwrap()
                );
            }
        }
    }
}
