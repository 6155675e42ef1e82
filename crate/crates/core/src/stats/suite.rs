use std::fmt;
use std::str::FromStr;

use super::{correlate, CorrelationResult, SignificanceMethod, StatsError, ALPHA};
use crate::metrics::GroupScores;
use crate::model::{SizeClass, Subgroup};

/// Which pair of measures is correlated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pairing {
    /// Quality `s1` against NCI `i`.
    Specific,
    /// Strength `S1` against impact `I`.
    Absolute,
}

impl Pairing {
    pub fn values(self, scores: &GroupScores) -> (f64, f64) {
        match self {
            Pairing::Specific => (scores.s1, scores.nci),
            Pairing::Absolute => (scores.strength, scores.impact),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pairing::Specific => "specific",
            Pairing::Absolute => "absolute",
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pairing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "specific" => Ok(Pairing::Specific),
            "absolute" => Ok(Pairing::Absolute),
            other => Err(format!("unknown pairing {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub alpha: f64,
    pub method: SignificanceMethod,
    /// Adds separate medium and small cells after the merged one.
    pub detailed_subgroups: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            alpha: ALPHA,
            method: SignificanceMethod::TApprox,
            detailed_subgroups: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Computed(CorrelationResult),
    /// Fewer than three members.
    InsufficientN,
    /// The discipline carries no size information.
    Unavailable,
    /// One of the measures is constant over the subgroup.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubgroupCell {
    pub subgroup: Subgroup,
    pub n: usize,
    pub cell: Cell,
}

impl SubgroupCell {
    pub fn result(&self) -> Option<&CorrelationResult> {
        match &self.cell {
            Cell::Computed(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisciplineCorrelation {
    pub discipline_id: String,
    /// Group counts by class: small, medium, large, unknown.
    pub class_counts: [usize; 4],
    pub cells: Vec<SubgroupCell>,
}

impl DisciplineCorrelation {
    pub fn cell(&self, subgroup: Subgroup) -> Option<&SubgroupCell> {
        self.cells.iter().find(|c| c.subgroup == subgroup)
    }

    pub fn total(&self) -> usize {
        self.class_counts.iter().sum()
    }

    pub fn sizes_known(&self) -> bool {
        self.class_counts[3] < self.total()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub pairing: Pairing,
    pub alpha: f64,
    pub disciplines: Vec<DisciplineCorrelation>,
}

impl CorrelationReport {
    pub fn discipline(&self, id: &str) -> Option<&DisciplineCorrelation> {
        self.disciplines.iter().find(|d| d.discipline_id == id)
    }
}

fn cell_seed(seed: u64, discipline: usize, subgroup: usize) -> u64 {
    seed ^ (discipline as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((subgroup as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Correlates one pairing per discipline over all, large and medium/small
/// groups. Groups of unknown size class enter the `All` cell only.
pub fn correlation_suite(
    scores: &[GroupScores],
    pairing: Pairing,
    options: &SuiteOptions,
) -> Result<CorrelationReport, StatsError> {
    let mut order: Vec<&str> = Vec::new();
    for s in scores {
        if !order.contains(&s.discipline_id.as_str()) {
            order.push(&s.discipline_id);
        }
    }
    let subgroups: &[Subgroup] = if options.detailed_subgroups {
        &Subgroup::DETAILED
    } else {
        &Subgroup::STANDARD
    };

    let mut disciplines = Vec::with_capacity(order.len());
    for (d_index, id) in order.iter().enumerate() {
        let members: Vec<&GroupScores> = scores.iter().filter(|s| s.discipline_id == *id).collect();
        let mut class_counts = [0usize; 4];
        for m in &members {
            let slot = match m.size_class {
                SizeClass::Small => 0,
                SizeClass::Medium => 1,
                SizeClass::Large => 2,
                SizeClass::Unknown => 3,
            };
            class_counts[slot] += 1;
        }
        let sizes_known = class_counts[3] < members.len();
        if members.len() < 3 {
            return Err(StatsError::TooFewPoints {
                n: members.len(),
                min: 3,
            });
        }

        let mut cells = Vec::with_capacity(subgroups.len());
        for (g_index, &subgroup) in subgroups.iter().enumerate() {
            let (x, y): (Vec<f64>, Vec<f64>) = members
                .iter()
                .filter(|m| subgroup.contains(m.size_class))
                .map(|m| pairing.values(m))
                .unzip();
            let n = x.len();
            let cell = if subgroup != Subgroup::All && !sizes_known {
                Cell::Unavailable
            } else if n < 3 {
                Cell::InsufficientN
            } else {
                let method = match options.method {
                    SignificanceMethod::Permutation { seed } => SignificanceMethod::Permutation {
                        seed: cell_seed(seed, d_index, g_index),
                    },
                    m => m,
                };
                match correlate(&x, &y, options.alpha, method) {
                    Ok(result) => Cell::Computed(result),
                    Err(StatsError::DegenerateVariance) => Cell::Degenerate,
                    Err(e) => return Err(e),
                }
            };
            cells.push(SubgroupCell { subgroup, n, cell });
        }
        disciplines.push(DisciplineCorrelation {
            discipline_id: (*id).to_owned(),
            class_counts,
            cells,
        });
    }
    Ok(CorrelationReport {
        pairing,
        alpha: options.alpha,
        disciplines,
    })
}
