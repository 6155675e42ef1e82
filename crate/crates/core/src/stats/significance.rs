use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::correlation::{centered, check_pair, from_centered, pearson, spearman};
use super::rank::average_ranks;
use super::{CorrelationResult, StatsError};

/// Samples drawn when exhaustive enumeration is too large.
pub const PERMUTATION_SAMPLES: usize = 10_000;
/// Largest n whose permutations are enumerated exhaustively.
pub const EXHAUSTIVE_MAX_N: usize = 8;

/// Relative slack when comparing a permuted coefficient with the observed one.
const TIE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignificanceMethod {
    /// Two-sided Student t approximation with n - 2 degrees of freedom.
    #[default]
    TApprox,
    /// Label permutation; exhaustive up to [`EXHAUSTIVE_MAX_N`], sampled above.
    Permutation { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Significance {
    pub p_value: f64,
    pub significant: bool,
}

impl Significance {
    fn at(p_value: f64, alpha: f64) -> Self {
        Significance {
            p_value,
            significant: p_value < alpha,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<(), StatsError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(StatsError::InvalidAlpha(alpha))
    }
}

/// `c * sqrt((n - 2) / (1 - c^2))`; infinite for `|c| = 1`.
pub fn t_statistic(coefficient: f64, n: usize) -> f64 {
    let dof = n as f64 - 2.0;
    let denom = 1.0 - coefficient * coefficient;
    if denom <= 0.0 {
        return f64::INFINITY.copysign(coefficient);
    }
    coefficient * (dof / denom).sqrt()
}

pub fn t_test(coefficient: f64, n: usize, alpha: f64) -> Result<Significance, StatsError> {
    check_alpha(alpha)?;
    if !(-1.0..=1.0).contains(&coefficient) {
        return Err(StatsError::CoefficientOutOfRange(coefficient));
    }
    if n < 4 {
        return Err(StatsError::TooFewPoints { n, min: 4 });
    }
    let t = t_statistic(coefficient, n).abs();
    let p_value = if t.is_infinite() {
        0.0
    } else {
        let dist = StudentsT::new(0.0, 1.0, n as f64 - 2.0).expect("positive degrees of freedom");
        (2.0 * dist.sf(t)).min(1.0)
    };
    Ok(Significance::at(p_value, alpha))
}

/// Visits every permutation of `0..n` (Heap's algorithm).
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    visit(&perm);
    let mut i = 0;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            visit(&perm);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
}

/// Two-sided permutation p-value: the share of relabelings of `y` whose
/// coefficient is at least as extreme as the observed one.
pub fn permutation_test(
    x: &[f64],
    y: &[f64],
    statistic: Statistic,
    alpha: f64,
    seed: u64,
) -> Result<Significance, StatsError> {
    check_alpha(alpha)?;
    check_pair(x, y)?;
    let (x, y) = match statistic {
        Statistic::Pearson => (x.to_vec(), y.to_vec()),
        Statistic::Spearman => (
            average_ranks(x)?.into_inner(),
            average_ranks(y)?.into_inner(),
        ),
    };
    let observed = pearson(&x, &y)?.abs();
    let threshold = observed - TIE_SLACK * observed.max(1.0);
    let (dx, sxx) = centered(&x);
    let (dy, syy) = centered(&y);
    let n = x.len();
    let mut permuted = vec![0.0; n];
    let mut extreme = 0usize;
    let mut total = 0usize;
    let mut tally = |perm: &[usize], permuted: &mut Vec<f64>| {
        for (slot, &j) in permuted.iter_mut().zip(perm) {
            *slot = dy[j];
        }
        if from_centered(&dx, sxx, permuted, syy).abs() >= threshold {
            extreme += 1;
        }
        total += 1;
    };
    if n <= EXHAUSTIVE_MAX_N {
        for_each_permutation(n, |perm| tally(perm, &mut permuted));
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..n).collect();
        for _ in 0..PERMUTATION_SAMPLES {
            perm.shuffle(&mut rng);
            tally(&perm, &mut permuted);
        }
    }
    Ok(Significance::at(extreme as f64 / total as f64, alpha))
}

/// Pearson and Spearman coefficients with their significance.
///
/// Below four points the t approximation is undefined, so `TApprox` falls
/// back to exhaustive permutation there.
pub fn correlate(
    x: &[f64],
    y: &[f64],
    alpha: f64,
    method: SignificanceMethod,
) -> Result<CorrelationResult, StatsError> {
    check_alpha(alpha)?;
    let r = pearson(x, y)?;
    let rho = spearman(x, y)?;
    let n = x.len();
    let (sig_r, sig_rho) = match method {
        SignificanceMethod::TApprox if n >= 4 => (t_test(r, n, alpha)?, t_test(rho, n, alpha)?),
        SignificanceMethod::TApprox => (
            permutation_test(x, y, Statistic::Pearson, alpha, 0)?,
            permutation_test(x, y, Statistic::Spearman, alpha, 0)?,
        ),
        SignificanceMethod::Permutation { seed } => (
            permutation_test(x, y, Statistic::Pearson, alpha, seed)?,
            permutation_test(x, y, Statistic::Spearman, alpha, seed)?,
        ),
    };
    Ok(CorrelationResult {
        n,
        r,
        rho,
        p_r: sig_r.p_value,
        p_rho: sig_rho.p_value,
        significant_r: sig_r.significant,
        significant_rho: sig_rho.significant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent two-sided t p-value: composite Simpson integration of the
    /// t density from 0 to |t|, normalised by the Beta function via lgamma-free
    /// integration of the same density over a wide range.
    fn t_pvalue_by_quadrature(t: f64, dof: f64) -> f64 {
        let density = |x: f64| (1.0 + x * x / dof).powf(-(dof + 1.0) / 2.0);
        let simpson = |a: f64, b: f64, steps: usize| {
            let h = (b - a) / steps as f64;
            let mut acc = density(a) + density(b);
            for k in 1..steps {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * density(a + k as f64 * h);
            }
            acc * h / 3.0
        };
        // substitute x = tan(u) for the half-line normaliser
        let half_total = {
            let steps = 200_000;
            let hi = std::f64::consts::FRAC_PI_2;
            let h = hi / steps as f64;
            let g = |u: f64| {
                if u >= hi {
                    0.0
                } else {
                    let c = u.cos();
                    density(u.tan()) / (c * c)
                }
            };
            let mut acc = g(0.0) + g(hi);
            for k in 1..steps {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * g(k as f64 * h);
            }
            acc * h / 3.0
        };
        let inner = simpson(0.0, t.abs(), 200_000);
        1.0 - inner / half_total
    }

    #[test]
    fn quadrature_oracle_agrees_with_t_test() {
        for (c, n) in [(0.60, 29usize), (0.18, 30), (0.34, 79), (0.05, 10), (0.9, 5)] {
            let t = t_statistic(c, n);
            let oracle = t_pvalue_by_quadrature(t, n as f64 - 2.0);
            let got = t_test(c, n, 0.05).unwrap().p_value;
            assert!((got - oracle).abs() < 1e-7, "c={c} n={n}: {got} vs {oracle}");
        }
    }

    #[test]
    fn boldface_examples() {
        // t values: 3.8971, 0.9683, 3.1725
        assert!((t_statistic(0.60, 29) - 3.897114317029974).abs() < 1e-12);
        assert!((t_statistic(0.18, 30) - 0.9682858624230418).abs() < 1e-12);
        assert!((t_statistic(0.34, 79) - 3.172487449449631).abs() < 1e-12);
        assert!(t_test(0.60, 29, 0.05).unwrap().significant);
        assert!(!t_test(0.18, 30, 0.05).unwrap().significant);
        assert!(t_test(0.34, 79, 0.05).unwrap().significant);
    }

    #[test]
    fn t_test_errors_and_limits() {
        assert_eq!(
            t_test(0.5, 3, 0.05),
            Err(StatsError::TooFewPoints { n: 3, min: 4 })
        );
        assert_eq!(
            t_test(1.2, 10, 0.05),
            Err(StatsError::CoefficientOutOfRange(1.2))
        );
        assert_eq!(t_test(0.5, 10, 0.0), Err(StatsError::InvalidAlpha(0.0)));
        assert_eq!(t_test(1.0, 10, 0.05).unwrap().p_value, 0.0);
        assert_eq!(t_test(0.0, 10, 0.05).unwrap().p_value, 1.0);
    }

    #[test]
    fn heap_enumerates_all_permutations() {
        let mut seen = std::collections::HashSet::new();
        for_each_permutation(5, |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 120);
    }

    #[test]
    fn exhaustive_small_case() {
        // n = 3, perfect reversal: permutations with |r| = 1 are the identity
        // and the reversal, 2 of 6
        let sig = permutation_test(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0], Statistic::Pearson, 0.05, 0)
            .unwrap();
        assert!((sig.p_value - 2.0 / 6.0).abs() < 1e-15);
        assert!(!sig.significant);
    }

    #[test]
    fn sampled_is_seed_deterministic() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * 1.7).sin() + v / 10.0).collect();
        let a = permutation_test(&x, &y, Statistic::Spearman, 0.05, 11).unwrap();
        let b = permutation_test(&x, &y, Statistic::Spearman, 0.05, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn correlate_falls_back_below_four_points() {
        let res = correlate(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0], 0.05, SignificanceMethod::TApprox)
            .unwrap();
        assert_eq!(res.n, 3);
        assert!(res.p_r > 0.0 && res.p_r <= 1.0);
    }
}
