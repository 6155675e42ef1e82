//! Synthetic research cohorts under a two-regime critical-mass quality model,
//! and the experiment comparing specific against size-scaled correlations.
//!
//! Group sizes are log-normal. The noiseless quality of a group of size `N`
//! is `a + b * min(N, Nc) + b2 * max(N - Nc, 0)`: the same linear rise for
//! small and medium groups, and a (possibly) reduced slope past the upper
//! critical mass. The impact channel is a Gaussian variable whose correlation
//! with the standardised noiseless quality is `coupling`; it is mapped back to
//! quality units and then to NCI units by `impact_offset + impact_scale * x`.
//! Additive Gaussian noise is applied to both channels, followed by clamping
//! of quality to `[0, 700]` and of NCI to `>= 0`.
//!
//! Each group draws from its own ChaCha stream (`stream = group index`), so
//! adding groups never changes the draws of earlier ones.

use std::fmt;

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::metrics::{GroupScores, MetricsError};
use crate::model::CriticalMasses;
use crate::stats::{pearson, spearman, StatsError};

pub const QUALITY_MAX: f64 = 700.0;
/// Clamped share of draws above which a cohort is flagged as distorted.
pub const DISTORTION_THRESHOLD: f64 = 0.05;
/// Gaps at or below this are treated as zero.
pub const GAP_EPSILON: f64 = 1e-12;
pub const SYNTH_DISCIPLINE: &str = "synthetic";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
    #[error("synth config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_groups: usize,
    pub nk: f64,
    pub nc: f64,
    /// Log-normal location of group size.
    pub size_mu: f64,
    /// Log-normal scale; zero gives every group `exp(size_mu)` staff.
    pub size_sigma: f64,
    pub quality_intercept: f64,
    /// Quality gained per FTE up to `nc`.
    pub quality_slope: f64,
    /// Quality gained per FTE beyond `nc`.
    pub quality_slope_above: f64,
    pub noise_quality: f64,
    /// Impact noise, in quality units before the NCI mapping.
    pub noise_impact: f64,
    pub coupling: f64,
    pub impact_offset: f64,
    pub impact_scale: f64,
}

impl SynthConfig {
    /// Biology-like critical masses, moderate size spread and noisy,
    /// partially coupled channels.
    pub fn moderate() -> Self {
        SynthConfig {
            seed: 20_080_101,
            n_groups: 40,
            nk: 10.4,
            nc: 20.8,
            size_mu: 15f64.ln(),
            size_sigma: 0.5,
            quality_intercept: 150.0,
            quality_slope: 5.0,
            quality_slope_above: 1.0,
            noise_quality: 30.0,
            noise_impact: 30.0,
            coupling: 0.6,
            impact_offset: 0.0,
            impact_scale: 0.005,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: &str| Err(SynthError::InvalidConfig(msg.to_owned()));
        if self.n_groups < 3 {
            return fail("n_groups must be at least 3");
        }
        if CriticalMasses::new(self.nk, self.nc).is_err() {
            return fail("need 0 < nk <= nc");
        }
        let finite = [
            self.size_mu,
            self.size_sigma,
            self.quality_intercept,
            self.quality_slope,
            self.quality_slope_above,
            self.noise_quality,
            self.noise_impact,
            self.coupling,
            self.impact_offset,
            self.impact_scale,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return fail("parameters must be finite");
        }
        if self.size_sigma < 0.0 {
            return fail("size_sigma must be non-negative");
        }
        if self.quality_slope_above < 0.0 {
            return fail("quality_slope_above must be non-negative");
        }
        if self.noise_quality < 0.0 || self.noise_impact < 0.0 {
            return fail("noise terms must be non-negative");
        }
        if !(self.coupling > 0.0 && self.coupling <= 1.0) {
            return fail("coupling must lie in (0, 1]");
        }
        if self.impact_scale <= 0.0 {
            return fail("impact_scale must be positive");
        }
        Ok(())
    }

    /// Noiseless quality of a group with `size` FTE.
    pub fn mean_quality(&self, size: f64) -> f64 {
        self.quality_intercept
            + self.quality_slope * size.min(self.nc)
            + self.quality_slope_above * (size - self.nc).max(0.0)
    }

    /// Parses `key = value` lines; `#` starts a comment. Keys not given keep
    /// the values of [`SynthConfig::moderate`].
    pub fn parse(text: &str) -> Result<Self, SynthError> {
        let mut config = SynthConfig::moderate();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| SynthError::Parse {
                line,
                message: format!("expected `key = value`, found {content:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| SynthError::Parse {
                line,
                message: format!("{key}: expected {what}, found {value:?}"),
            };
            let real = || value.parse::<f64>().map_err(|_| bad("a number"));
            match key {
                "seed" => config.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
                "n_groups" => {
                    config.n_groups = value.parse().map_err(|_| bad("an unsigned integer"))?
                }
                "nk" => config.nk = real()?,
                "nc" => config.nc = real()?,
                "size_mu" => config.size_mu = real()?,
                "size_sigma" => config.size_sigma = real()?,
                "quality_intercept" => config.quality_intercept = real()?,
                "quality_slope" => config.quality_slope = real()?,
                "quality_slope_above" => config.quality_slope_above = real()?,
                "noise_quality" => config.noise_quality = real()?,
                "noise_impact" => config.noise_impact = real()?,
                "coupling" => config.coupling = real()?,
                "impact_offset" => config.impact_offset = real()?,
                "impact_scale" => config.impact_scale = real()?,
                other => {
                    return Err(SynthError::Parse {
                        line,
                        message: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        config.validate()?;
        Ok(config)
    }
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig::moderate()
    }
}

impl fmt::Display for SynthConfig {
    /// Writes the `key = value` form accepted by [`SynthConfig::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "n_groups = {}", self.n_groups)?;
        writeln!(f, "nk = {}", self.nk)?;
        writeln!(f, "nc = {}", self.nc)?;
        writeln!(f, "size_mu = {}", self.size_mu)?;
        writeln!(f, "size_sigma = {}", self.size_sigma)?;
        writeln!(f, "quality_intercept = {}", self.quality_intercept)?;
        writeln!(f, "quality_slope = {}", self.quality_slope)?;
        writeln!(f, "quality_slope_above = {}", self.quality_slope_above)?;
        writeln!(f, "noise_quality = {}", self.noise_quality)?;
        writeln!(f, "noise_impact = {}", self.noise_impact)?;
        writeln!(f, "coupling = {}", self.coupling)?;
        writeln!(f, "impact_offset = {}", self.impact_offset)?;
        writeln!(f, "impact_scale = {}", self.impact_scale)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedCohort {
    pub scores: Vec<GroupScores>,
    pub quality_clamps: usize,
    pub impact_clamps: usize,
}

impl GeneratedCohort {
    pub fn draws(&self) -> usize {
        2 * self.scores.len()
    }

    pub fn clamp_fraction(&self) -> f64 {
        (self.quality_clamps + self.impact_clamps) as f64 / self.draws() as f64
    }

    pub fn is_distorting(&self) -> bool {
        self.clamp_fraction() > DISTORTION_THRESHOLD
    }
}

struct GroupDraws {
    size: f64,
    decorrelation: f64,
    quality_noise: f64,
    impact_noise: f64,
}

fn draw_group(config: &SynthConfig, seed: u64, index: usize) -> GroupDraws {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let size_z = normal();
    let size = if config.size_sigma == 0.0 {
        config.size_mu.exp()
    } else {
        (config.size_mu + config.size_sigma * size_z).exp()
    };
    GroupDraws {
        size,
        decorrelation: normal(),
        quality_noise: normal(),
        impact_noise: normal(),
    }
}

pub fn generate_cohort(config: &SynthConfig) -> Result<GeneratedCohort, SynthError> {
    generate_with_seed(config, config.seed)
}

fn generate_with_seed(config: &SynthConfig, seed: u64) -> Result<GeneratedCohort, SynthError> {
    config.validate()?;
    let masses = CriticalMasses::new(config.nk, config.nc).expect("validated");
    let draws: Vec<GroupDraws> = (0..config.n_groups)
        .map(|g| draw_group(config, seed, g))
        .collect();
    let means: Vec<f64> = draws.iter().map(|d| config.mean_quality(d.size)).collect();
    let n = means.len() as f64;
    let centre = means.iter().sum::<f64>() / n;
    let spread = (means.iter().map(|m| (m - centre).powi(2)).sum::<f64>() / n).sqrt();
    let constant = means.iter().all(|m| *m == means[0]);
    let residual = (1.0 - config.coupling * config.coupling).max(0.0).sqrt();

    let mut scores = Vec::with_capacity(draws.len());
    let mut quality_clamps = 0;
    let mut impact_clamps = 0;
    for (index, (d, &mean)) in draws.iter().zip(&means).enumerate() {
        let z = if constant { 0.0 } else { (mean - centre) / spread };
        let latent = config.coupling * z + residual * d.decorrelation;
        let channel = if constant { mean } else { centre + spread * latent };

        let mut s1 = mean + config.noise_quality * d.quality_noise;
        if !(0.0..=QUALITY_MAX).contains(&s1) {
            s1 = s1.clamp(0.0, QUALITY_MAX);
            quality_clamps += 1;
        }
        let mut nci = config.impact_offset
            + config.impact_scale * (channel + config.noise_impact * d.impact_noise);
        if nci < 0.0 {
            nci = 0.0;
            impact_clamps += 1;
        }
        scores.push(GroupScores::new(
            SYNTH_DISCIPLINE,
            format!("S{:04}", index + 1),
            d.size,
            masses.classify(d.size),
            s1,
            nci,
        )?);
    }
    Ok(GeneratedCohort {
        scores,
        quality_clamps,
        impact_clamps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InflationResult {
    pub seed: u64,
    pub r_specific: f64,
    pub r_absolute: f64,
    pub rho_specific: f64,
    pub rho_absolute: f64,
    pub clamp_fraction: f64,
}

impl InflationResult {
    pub fn gap(&self) -> f64 {
        self.r_absolute - self.r_specific
    }
}

/// Generates one cohort per seed (`config.seed + k`) and compares the
/// correlation of (s1, i) with that of (S1, I).
pub fn inflation_experiment(
    config: &SynthConfig,
    n_seeds: usize,
) -> Result<Vec<InflationResult>, SynthError> {
    if n_seeds == 0 {
        return Err(SynthError::InvalidConfig("n_seeds must be at least 1".into()));
    }
    (0..n_seeds as u64)
        .map(|k| {
            let seed = config.seed.wrapping_add(k);
            let cohort = generate_with_seed(config, seed)?;
            let column = |f: fn(&GroupScores) -> f64| -> Vec<f64> {
                cohort.scores.iter().map(f).collect()
            };
            let (s1, nci) = (column(|g| g.s1), column(|g| g.nci));
            let (strength, impact) = (column(|g| g.strength), column(|g| g.impact));
            Ok(InflationResult {
                seed,
                r_specific: pearson(&s1, &nci)?,
                r_absolute: pearson(&strength, &impact)?,
                rho_specific: spearman(&s1, &nci)?,
                rho_absolute: spearman(&strength, &impact)?,
                clamp_fraction: cohort.clamp_fraction(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InflationSummary {
    pub runs: usize,
    pub median_gap: f64,
    /// Share of runs whose gap exceeds [`GAP_EPSILON`].
    pub positive_fraction: f64,
}

impl InflationSummary {
    pub fn from_results(results: &[InflationResult]) -> Option<Self> {
        if results.is_empty() {
            return None;
        }
        let mut gaps: Vec<f64> = results.iter().map(InflationResult::gap).collect();
        gaps.sort_by(f64::total_cmp);
        let mid = gaps.len() / 2;
        let median_gap = if gaps.len().is_multiple_of(2) {
            (gaps[mid - 1] + gaps[mid]) / 2.0
        } else {
            gaps[mid]
        };
        let positive = gaps.iter().filter(|g| **g > GAP_EPSILON).count();
        Some(InflationSummary {
            runs: gaps.len(),
            median_gap,
            positive_fraction: positive as f64 / gaps.len() as f64,
        })
    }
}
