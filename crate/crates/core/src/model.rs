//! Domain types shared by the pipeline: quality profiles, weighting
//! schemes, research groups, discipline configuration and size classes.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Published profiles are rounded, so the band sum may miss 100 by this much.
pub const PROFILE_SUM_TOLERANCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("band {band} is not a finite number ({value})")]
    NonFiniteBand { band: Band, value: f64 },
    #[error("band {band} is negative ({value})")]
    NegativeBand { band: Band, value: f64 },
    #[error("band {band} exceeds 100 ({value})")]
    BandOver100 { band: Band, value: f64 },
    #[error("profile bands sum to {sum}, deviating from 100 by {deviation}")]
    SumOutOfTolerance { sum: f64, deviation: f64 },
    #[error("group size must be positive, got {0}")]
    NonPositiveSize(f64),
    #[error("NCI must be finite and non-negative, got {0}")]
    NegativeNci(f64),
    #[error("invalid weighting scheme: {0}")]
    InvalidScheme(String),
    #[error("invalid critical masses Nk={nk}, Nc={nc}: need 0 < Nk <= Nc")]
    InvalidThresholds { nk: f64, nc: f64 },
}

/// Peer-review quality band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    Four,
    Three,
    Two,
    One,
    Unclassified,
}

impl Band {
    pub const ALL: [Band; 5] = [
        Band::Four,
        Band::Three,
        Band::Two,
        Band::One,
        Band::Unclassified,
    ];
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Band::Four => "4*",
            Band::Three => "3*",
            Band::Two => "2*",
            Band::One => "1*",
            Band::Unclassified => "U",
        })
    }
}

/// Percentages of a group's submitted outputs rated in each band,
/// ordered 4*, 3*, 2*, 1*, unclassified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityProfile {
    bands: [f64; 5],
}

impl QualityProfile {
    pub fn new(p4: f64, p3: f64, p2: f64, p1: f64, pu: f64) -> Result<Self, ModelError> {
        validate_profile([p4, p3, p2, p1, pu])
    }

    pub fn bands(&self) -> [f64; 5] {
        self.bands
    }

    pub fn get(&self, band: Band) -> f64 {
        self.bands[band as usize]
    }

    pub fn sum(&self) -> f64 {
        self.bands.iter().sum()
    }

    /// Signed deviation of the band sum from 100.
    pub fn sum_deviation(&self) -> f64 {
        self.sum() - 100.0
    }
}

/// Checks five band percentages and builds a [`QualityProfile`].
///
/// Each band must lie in `[0, 100]` and the total must be within
/// [`PROFILE_SUM_TOLERANCE`] of 100.
pub fn validate_profile(raw: [f64; 5]) -> Result<QualityProfile, ModelError> {
    for (band, &value) in Band::ALL.iter().zip(raw.iter()) {
        if !value.is_finite() {
            return Err(ModelError::NonFiniteBand { band: *band, value });
        }
        if value < 0.0 {
            return Err(ModelError::NegativeBand { band: *band, value });
        }
        if value > 100.0 {
            return Err(ModelError::BandOver100 { band: *band, value });
        }
    }
    let sum: f64 = raw.iter().sum();
    let deviation = sum - 100.0;
    if deviation.abs() > PROFILE_SUM_TOLERANCE {
        return Err(ModelError::SumOutOfTolerance { sum, deviation });
    }
    Ok(QualityProfile { bands: raw })
}

/// Per-band funding weights applied to a quality profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightingScheme {
    weights: [f64; 5],
}

impl WeightingScheme {
    /// 4* and 3* worth seven and three times 2*; 1* and unclassified unrewarded.
    pub const FUNDING: WeightingScheme = WeightingScheme {
        weights: [7.0, 3.0, 1.0, 0.0, 0.0],
    };

    pub fn new(weights: [f64; 5]) -> Result<Self, ModelError> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(ModelError::InvalidScheme(format!(
                "weights must be finite and non-negative: {weights:?}"
            )));
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return Err(ModelError::InvalidScheme(
                "at least one weight must be positive".into(),
            ));
        }
        Ok(WeightingScheme { weights })
    }

    pub fn weights(&self) -> [f64; 5] {
        self.weights
    }

    pub fn weight(&self, band: Band) -> f64 {
        self.weights[band as usize]
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }
}

impl Default for WeightingScheme {
    fn default() -> Self {
        WeightingScheme::FUNDING
    }
}

impl FromStr for WeightingScheme {
    type Err = ModelError;

    /// Parses `w4,w3,w2,w1,wU`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(ModelError::InvalidScheme(format!(
                "expected five comma-separated weights, got {:?}",
                s
            )));
        }
        let mut weights = [0.0; 5];
        for (slot, part) in weights.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| ModelError::InvalidScheme(format!("not a number: {part:?}")))?;
        }
        WeightingScheme::new(weights)
    }
}

impl fmt::Display for WeightingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.weights;
        write!(f, "{},{},{},{},{}", w[0], w[1], w[2], w[3], w[4])
    }
}

/// Size class of a group relative to its discipline's critical masses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SizeClass {
    Small,
    Medium,
    Large,
    Unknown,
}

impl SizeClass {
    /// Position in the Small < Medium < Large order; `None` for Unknown.
    pub fn order(self) -> Option<u8> {
        match self {
            SizeClass::Small => Some(0),
            SizeClass::Medium => Some(1),
            SizeClass::Large => Some(2),
            SizeClass::Unknown => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SizeClass::Small => "small",
            SizeClass::Medium => "medium",
            SizeClass::Large => "large",
            SizeClass::Unknown => "unknown",
        }
    }
}

impl fmt::Display for SizeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SizeClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "small" => Ok(SizeClass::Small),
            "medium" => Ok(SizeClass::Medium),
            "large" => Ok(SizeClass::Large),
            "unknown" => Ok(SizeClass::Unknown),
            other => Err(format!("unknown size class {other:?}")),
        }
    }
}

/// Subset of a discipline's groups that enters one correlation cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subgroup {
    All,
    Large,
    /// Small and medium groups share the same quality-size regime.
    MediumSmall,
    Medium,
    Small,
}

impl Subgroup {
    pub const STANDARD: [Subgroup; 3] = [Subgroup::All, Subgroup::Large, Subgroup::MediumSmall];
    pub const DETAILED: [Subgroup; 5] = [
        Subgroup::All,
        Subgroup::Large,
        Subgroup::MediumSmall,
        Subgroup::Medium,
        Subgroup::Small,
    ];

    pub fn contains(self, class: SizeClass) -> bool {
        match self {
            Subgroup::All => true,
            Subgroup::Large => class == SizeClass::Large,
            Subgroup::MediumSmall => matches!(class, SizeClass::Medium | SizeClass::Small),
            Subgroup::Medium => class == SizeClass::Medium,
            Subgroup::Small => class == SizeClass::Small,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Subgroup::All => "all",
            Subgroup::Large => "large",
            Subgroup::MediumSmall => "medium-small",
            Subgroup::Medium => "medium",
            Subgroup::Small => "small",
        }
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subgroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subgroup::DETAILED
            .iter()
            .copied()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| format!("unknown subgroup {s:?}"))
    }
}

/// Lower (`nk`) and upper (`nc`) critical masses in FTE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalMasses {
    nk: f64,
    nc: f64,
}

impl CriticalMasses {
    pub fn new(nk: f64, nc: f64) -> Result<Self, ModelError> {
        if !(nk.is_finite() && nc.is_finite() && nk > 0.0 && nk <= nc) {
            return Err(ModelError::InvalidThresholds { nk, nc });
        }
        Ok(CriticalMasses { nk, nc })
    }

    pub fn nk(&self) -> f64 {
        self.nk
    }

    pub fn nc(&self) -> f64 {
        self.nc
    }

    /// Small is `N <= Nk`, medium `Nk < N <= Nc`, large `N > Nc`.
    pub fn classify(&self, size: f64) -> SizeClass {
        if size <= self.nk {
            SizeClass::Small
        } else if size <= self.nc {
            SizeClass::Medium
        } else {
            SizeClass::Large
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisciplineConfig {
    pub discipline_id: String,
    pub name: String,
    pub critical_masses: Option<CriticalMasses>,
    pub scheme: WeightingScheme,
}

impl DisciplineConfig {
    pub fn new(
        discipline_id: impl Into<String>,
        name: impl Into<String>,
        critical_masses: Option<CriticalMasses>,
    ) -> Self {
        DisciplineConfig {
            discipline_id: discipline_id.into(),
            name: name.into(),
            critical_masses,
            scheme: WeightingScheme::default(),
        }
    }

    /// A discipline with no size information: every group is `Unknown`.
    pub fn without_thresholds(discipline_id: impl Into<String>) -> Self {
        let id = discipline_id.into();
        DisciplineConfig::new(id.clone(), id, None)
    }

    pub fn with_scheme(mut self, scheme: WeightingScheme) -> Self {
        self.scheme = scheme;
        self
    }
}

pub fn check_size(size: f64) -> Result<f64, ModelError> {
    if size.is_finite() && size > 0.0 {
        Ok(size)
    } else {
        Err(ModelError::NonPositiveSize(size))
    }
}

pub fn classify_size(size: f64, config: &DisciplineConfig) -> Result<SizeClass, ModelError> {
    let size = check_size(size)?;
    Ok(config
        .critical_masses
        .map_or(SizeClass::Unknown, |cm| cm.classify(size)))
}

/// One unit-of-assessment submission.
#[derive(Debug, Clone, PartialEq)]
pub struct ResearchGroup {
    pub group_id: String,
    pub institution: String,
    pub discipline_id: String,
    /// Staff count in full-time equivalents.
    pub size: f64,
    /// The "outputs" sub-profile.
    pub profile: QualityProfile,
    pub nci: Option<f64>,
    pub size_class: SizeClass,
}

impl ResearchGroup {
    pub fn new(
        group_id: impl Into<String>,
        institution: impl Into<String>,
        config: &DisciplineConfig,
        size: f64,
        profile: QualityProfile,
        nci: Option<f64>,
    ) -> Result<Self, ModelError> {
        let size_class = classify_size(size, config)?;
        if let Some(i) = nci {
            if !(i.is_finite() && i >= 0.0) {
                return Err(ModelError::NegativeNci(i));
            }
        }
        Ok(ResearchGroup {
            group_id: group_id.into(),
            institution: institution.into(),
            discipline_id: config.discipline_id.clone(),
            size,
            profile,
            nci,
            size_class,
        })
    }
}
