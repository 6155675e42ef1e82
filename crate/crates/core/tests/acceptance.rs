//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use groupscore::cli::{run_correlate, run_rank, run_report, run_synth, Command, RunConfig};
use groupscore::export;
use groupscore::ingest::{
    load_baselines, load_disciplines, load_groups_table, load_papers, summarize_cohort, BaselineTable,
    PaperRecord,
};
use groupscore::metrics::{
    rebase_citation, score_cohort, strength, weighted_quality, GroupScores, ScoreOptions,
};
use groupscore::model::{CriticalMasses, QualityProfile, SizeClass, Subgroup, WeightingScheme};
use groupscore::stats::{
    average_ranks, correlation_suite, pearson, spearman, t_test, Pairing, SuiteOptions, ALPHA,
};
use groupscore::synth::{inflation_experiment, SynthConfig, GAP_EPSILON};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Positive-gap fraction observed for the moderate configuration over 200
/// seeds when the experiment was first run.
const FROZEN_INFLATION_FRACTION: f64 = 1.0;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

// Independent definitional oracles.

fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    sxy / (sxx.sqrt() * syy.sqrt())
}

/// Rank by counting: 1 + (values below) + (other equal values) / 2.
fn oracle_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let below = v.iter().filter(|b| *b < a).count() as f64;
            let equal = v.iter().filter(|b| *b == a).count() as f64;
            1.0 + below + (equal - 1.0) / 2.0
        })
        .collect()
}

fn oracle_spearman(x: &[f64], y: &[f64]) -> f64 {
    oracle_pearson(&oracle_ranks(x), &oracle_ranks(y))
}

/// ln Γ(k/2) for a positive integer k, by the half-integer recurrence.
fn ln_gamma_half(k: u32) -> f64 {
    let (mut acc, mut a) = if k.is_multiple_of(2) {
        (0.0, 1.0)
    } else {
        (0.5 * std::f64::consts::PI.ln(), 0.5)
    };
    while a + 1e-9 < k as f64 / 2.0 {
        acc += a.ln();
        a += 1.0;
    }
    acc
}

/// Two-sided p-value of Student's t by Simpson quadrature of the density.
fn oracle_t_p(t: f64, df: u32) -> f64 {
    let v = df as f64;
    let c = (ln_gamma_half(df + 1) - ln_gamma_half(df)).exp() / (v * std::f64::consts::PI).sqrt();
    let f = |s: f64| c * (1.0 + s * s / v).powf(-(v + 1.0) / 2.0);
    let steps = 20_000;
    let h = t.abs() / steps as f64;
    let mut sum = f(0.0) + f(t.abs());
    for i in 1..steps {
        sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * sum * h / 3.0
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() * 200.0 - 100.0).collect()
}

type Check = Result<String, String>;
type Runner = fn(&RunConfig) -> Result<groupscore::cli::Outcome, groupscore::cli::CliError>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn correlation_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let n = rng.random_range(3..=200usize);
        let x = random_vec(&mut rng, n);
        let y: Vec<f64> = x
            .iter()
            .map(|v| v * rng.random::<f64>() + rng.random::<f64>() * 50.0)
            .collect();
        let dr = (pearson(&x, &y).map_err(|e| e.to_string())? - oracle_pearson(&x, &y)).abs();
        let ds = (spearman(&x, &y).map_err(|e| e.to_string())? - oracle_spearman(&x, &y)).abs();
        ensure(dr <= 1e-12 && ds <= 1e-12, || {
            format!("case {case} (n={n}): |dr|={dr:e} |drho|={ds:e}")
        })?;
        worst = worst.max(dr).max(ds);
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("1000 datasets, max |delta| = {worst:e}, {:?}", start.elapsed()))
}

fn tie_rank_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..1000 {
        let n = rng.random_range(3..=120usize);
        let levels = rng.random_range(2..=6u32);
        let mut draw = || (0..n).map(|_| rng.random_range(0..levels) as f64).collect::<Vec<_>>();
        let x = draw();
        let y = draw();
        let rx = average_ranks(&x).map_err(|e| e.to_string())?;
        let ry = average_ranks(&y).map_err(|e| e.to_string())?;
        let expected_sum = (n * (n + 1)) as f64 / 2.0;
        ensure(rx.sum() == expected_sum && ry.sum() == expected_sum, || {
            format!("case {case}: rank sums {} / {} != {expected_sum}", rx.sum(), ry.sum())
        })?;
        let direct = spearman(&x, &y);
        let via = pearson(rx.as_slice(), ry.as_slice());
        match (direct, via) {
            (Ok(a), Ok(b)) => ensure(a.to_bits() == b.to_bits(), || {
                format!("case {case}: spearman {a:e} != pearson of ranks {b:e}")
            })?,
            (Err(a), Err(b)) => ensure(a == b, || format!("case {case}: {a} vs {b}"))?,
            (a, b) => return Err(format!("case {case}: {a:?} vs {b:?}")),
        }
    }
    Ok("1000 tied datasets, bit-identical, rank sums exact".into())
}

fn significance_spot_checks() -> Check {
    let cases = [(0.60, 29, true), (0.18, 30, false), (0.34, 79, true)];
    let mut parts = Vec::new();
    for (c, n, bold) in cases {
        let sig = t_test(c, n, ALPHA).map_err(|e| e.to_string())?;
        let t = c * ((n as f64 - 2.0) / (1.0 - c * c)).sqrt();
        let p_oracle = oracle_t_p(t, n as u32 - 2);
        ensure(sig.significant == bold && (p_oracle < ALPHA) == bold, || {
            format!("({c}, {n}): significant={} oracle p={p_oracle:.5}", sig.significant)
        })?;
        ensure((sig.p_value - p_oracle).abs() < 1e-6, || {
            format!("({c}, {n}): p={} oracle {p_oracle}", sig.p_value)
        })?;
        parts.push(format!("({c},{n}) p={:.5}", sig.p_value));
    }
    Ok(parts.join(" "))
}

fn equal_n_collapse() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let options = SuiteOptions::default();
    for case in 0..100 {
        let n = rng.random_range(6..=60usize);
        let size = (rng.random_range(100..4000u32) as f64) / 100.0;
        let masses = CriticalMasses::new(size * 0.5, size * rng.random_range(0.5..2.0)).unwrap();
        let class = masses.classify(size);
        let scores: Vec<GroupScores> = (0..n)
            .map(|j| {
                let discipline = if j % 2 == 0 { "a" } else { "b" };
                GroupScores::new(
                    discipline,
                    format!("g{j}"),
                    size,
                    class,
                    rng.random::<f64>() * 700.0,
                    rng.random::<f64>() * 3.0,
                )
                .unwrap()
            })
            .collect();
        let spec = correlation_suite(&scores, Pairing::Specific, &options).map_err(|e| e.to_string())?;
        let abs = correlation_suite(&scores, Pairing::Absolute, &options).map_err(|e| e.to_string())?;
        for (ds, da) in spec.disciplines.iter().zip(&abs.disciplines) {
            for (cs, ca) in ds.cells.iter().zip(&da.cells) {
                match (cs.result(), ca.result()) {
                    (Some(a), Some(b)) => ensure(
                        (a.r - b.r).abs() <= 1e-12 && (a.rho - b.rho).abs() <= 1e-12,
                        || format!("case {case}: {:?} r {} vs {}", cs.subgroup, a.r, b.r),
                    )?,
                    (None, None) => ensure(cs.cell == ca.cell, || format!("case {case}: cell kinds differ"))?,
                    _ => return Err(format!("case {case}: one table missing a cell")),
                }
            }
        }
    }
    Ok("100 constant-N cohorts, tables agree to 1e-12".into())
}

fn invariance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut drift = 0.0f64;
    for case in 0..500 {
        let n = rng.random_range(3..=100usize);
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v + rng.random::<f64>() * 4.0).collect();
        let (a, b) = (rng.random_range(0.01..100.0), rng.random_range(-50.0..50.0));
        let (c, d) = (rng.random_range(0.01..100.0), rng.random_range(-50.0..50.0));
        let xa: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let ya: Vec<f64> = y.iter().map(|v| c * v + d).collect();
        let r = pearson(&x, &y).map_err(|e| e.to_string())?;
        let ra = pearson(&xa, &ya).map_err(|e| e.to_string())?;
        drift = drift.max((r - ra).abs());
        ensure((r - ra).abs() <= 1e-10, || format!("affine case {case}: drift {:e}", (r - ra).abs()))?;
    }
    for case in 0..500 {
        let n = rng.random_range(3..=100usize);
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v + rng.random::<f64>() * 2.0).collect();
        let rho = spearman(&x, &y).map_err(|e| e.to_string())?;
        let xm: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let ym: Vec<f64> = y.iter().map(|v| v * v * v + v).collect();
        let rho_m = spearman(&xm, &ym).map_err(|e| e.to_string())?;
        ensure(rho.to_bits() == rho_m.to_bits(), || {
            format!("monotone case {case}: {rho} vs {rho_m}")
        })?;
    }
    Ok(format!("500 affine (max drift {drift:e}) + 500 monotone cases"))
}

fn inflation() -> Check {
    let start = Instant::now();
    let text = fs::read_to_string(fixture("synth_moderate.conf")).map_err(|e| e.to_string())?;
    let config = SynthConfig::parse(&text).map_err(|e| e.to_string())?;
    ensure(config == SynthConfig::moderate(), || "fixture differs from the moderate config".into())?;
    let results = inflation_experiment(&config, 200).map_err(|e| e.to_string())?;
    let positive = results.iter().filter(|r| r.gap() > GAP_EPSILON).count();
    let fraction = positive as f64 / results.len() as f64;
    within(start.elapsed(), Duration::from_secs(30))?;
    ensure(fraction >= 0.95, || format!("positive-gap fraction {fraction}"))?;
    ensure(fraction == FROZEN_INFLATION_FRACTION, || {
        format!("fraction {fraction} differs from frozen {FROZEN_INFLATION_FRACTION}")
    })?;
    Ok(format!("{positive}/200 seeds with r_absolute > r_specific, {:?}", start.elapsed()))
}

fn metrics_spot_checks() -> Check {
    let profile = QualityProfile::new(25.0, 20.0, 35.0, 15.0, 5.0).map_err(|e| e.to_string())?;
    let s1 = weighted_quality(&profile, &WeightingScheme::default());
    let s = strength(34.0, 20.6).map_err(|e| e.to_string())?;
    let mut baselines = BaselineTable::new();
    baselines.insert("f", 2004, 5.0).map_err(|e| e.to_string())?;
    let paper = PaperRecord {
        paper_id: "p".into(),
        group_id: "g".into(),
        field_id: "f".into(),
        pub_year: 2004,
        citations: 10,
        author_share: 1.0,
    };
    let rebased = rebase_citation(&paper, &baselines).map_err(|e| e.to_string())?;
    ensure((s1 - 270.0).abs() <= 1e-12, || format!("s1 = {s1}"))?;
    ensure((s - 700.4).abs() <= 1e-12, || format!("S1 = {s}"))?;
    ensure((rebased - 2.0).abs() <= 1e-12, || format!("rebased = {rebased}"))?;
    Ok(format!("s1={s1} S1={s} rebased={rebased}"))
}

fn config(command: Command, out: &Path) -> RunConfig {
    let mut c = RunConfig::new(command);
    c.out = out.to_path_buf();
    match command {
        Command::Synth => {
            c.synth_config = Some(fixture("synth_moderate.conf"));
            c.runs = 50;
        }
        Command::Report => {
            c.groups = Some(fixture("groups_papers.csv"));
            c.papers = Some(fixture("papers.csv"));
            c.baselines = Some(fixture("baselines.csv"));
        }
        _ => {
            c.groups = Some(fixture("groups.csv"));
            c.disciplines = Some(fixture("disciplines.csv"));
        }
    }
    c
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn determinism_and_round_trip() -> Check {
    let first = tempfile::tempdir().map_err(|e| e.to_string())?;
    let second = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runners: [(Command, Runner); 4] = [
        (Command::Correlate, run_correlate),
        (Command::Rank, run_rank),
        (Command::Synth, run_synth),
        (Command::Report, run_report),
    ];
    let mut files = 0;
    for (command, runner) in runners {
        let a = runner(&config(command, first.path())).map_err(|e| e.to_string())?;
        let b = runner(&config(command, second.path())).map_err(|e| e.to_string())?;
        ensure(a.files.len() == b.files.len() && !a.files.is_empty(), || format!("{command:?}: file sets differ"))?;
        for (fa, fb) in a.files.iter().zip(&b.files) {
            ensure(fs::read(fa).ok() == fs::read(fb).ok(), || format!("{} differs between runs", fa.display()))?;
            files += 1;
        }
    }

    // Re-parse every machine output and compare with the in-memory values.
    let disciplines = load_disciplines(&fixture("disciplines.csv")).map_err(|e| e.to_string())?;
    let groups = load_groups_table(&fixture("groups.csv"), &disciplines).map_err(|e| e.to_string())?;
    let scores = score_cohort(&groups, None, None, &ScoreOptions::default())
        .map_err(|e| e.to_string())?
        .scores;
    let dir = first.path();
    for pairing in [Pairing::Specific, Pairing::Absolute] {
        let report = correlation_suite(&scores, pairing, &SuiteOptions::default()).map_err(|e| e.to_string())?;
        let parsed = export::parse_report(&read(&dir.join(format!("correlations_{pairing}.csv")))?)
            .map_err(|e| e.to_string())?;
        ensure(parsed == export::report_rows(&report), || format!("{pairing} report does not round-trip"))?;
    }
    let ranked = export::rankings(&scores).map_err(|e| e.to_string())?;
    let parsed = export::parse_rankings(&read(&dir.join("rankings.csv"))?).map_err(|e| e.to_string())?;
    ensure(parsed == ranked, || "rankings do not round-trip".into())?;

    let synth = SynthConfig::moderate();
    let runs = inflation_experiment(&synth, 50).map_err(|e| e.to_string())?;
    let parsed = export::parse_synth_runs(&read(&dir.join("synth_runs.csv"))?).map_err(|e| e.to_string())?;
    ensure(parsed == runs, || "synth runs do not round-trip".into())?;

    let papers = load_papers(&fixture("papers.csv")).map_err(|e| e.to_string())?;
    let baselines = load_baselines(&fixture("baselines.csv")).map_err(|e| e.to_string())?;
    let small = load_groups_table(&fixture("groups_papers.csv"), &groupscore::ingest::Disciplines::open())
        .map_err(|e| e.to_string())?;
    let small_scores = score_cohort(&small, Some(&papers), Some(&baselines), &ScoreOptions::default())
        .map_err(|e| e.to_string())?
        .scores;
    for pairing in [Pairing::Specific, Pairing::Absolute] {
        let parsed = export::parse_scatter(&read(&dir.join(format!("scatter_{pairing}_biology.csv")))?)
            .map_err(|e| e.to_string())?;
        ensure(parsed == export::scatter(&small_scores, pairing), || {
            format!("{pairing} scatter does not round-trip")
        })?;
    }
    Ok(format!("{files} output files byte-identical across runs; all re-parse losslessly"))
}

fn fixture_shapes() -> Check {
    let expected: [(&str, usize, usize, usize); 4] = [
        ("chemistry", 12, 14, 3),
        ("physics", 28, 9, 4),
        ("history", 30, 24, 25),
        ("biology", 32, 7, 5),
    ];
    let disciplines = load_disciplines(&fixture("disciplines.csv")).map_err(|e| e.to_string())?;
    let groups = load_groups_table(&fixture("groups.csv"), &disciplines).map_err(|e| e.to_string())?;
    let summary = summarize_cohort(&groups, None);
    let scores = score_cohort(&groups, None, None, &ScoreOptions::default())
        .map_err(|e| e.to_string())?
        .scores;
    let tables = [
        correlation_suite(&scores, Pairing::Specific, &SuiteOptions::default()).map_err(|e| e.to_string())?,
        correlation_suite(&scores, Pairing::Absolute, &SuiteOptions::default()).map_err(|e| e.to_string())?,
    ];
    for (id, large, medium, small) in expected {
        let d = summary.get(id).ok_or_else(|| format!("{id} missing from summary"))?;
        let counts = (
            d.count(SizeClass::Large),
            d.count(SizeClass::Medium),
            d.count(SizeClass::Small),
        );
        ensure(counts == (large, medium, small) && d.total == large + medium + small, || {
            format!("{id}: summary {counts:?}")
        })?;
        for table in &tables {
            let row = table.discipline(id).ok_or_else(|| format!("{id} missing from table"))?;
            let n = |sg| row.cell(sg).map(|c| c.n);
            ensure(
                n(Subgroup::All) == Some(d.total)
                    && n(Subgroup::Large) == Some(large)
                    && n(Subgroup::MediumSmall) == Some(medium + small),
                || format!("{id}: table subgroup counts differ"),
            )?;
        }
    }
    Ok("chemistry 12/14/3, physics 28/9/4, history 30/24/25, biology 32/7/5".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("correlation oracle equivalence", correlation_oracle),
        ("tie-rank identity", tie_rank_identity),
        ("significance spot checks", significance_spot_checks),
        ("equal-N collapse", equal_n_collapse),
        ("affine/monotone invariance", invariance),
        ("inflation reproduction", inflation),
        ("metrics spot checks", metrics_spot_checks),
        ("pipeline determinism and round-trip", determinism_and_round_trip),
        ("fixture-shape conformance", fixture_shapes),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| Err(e.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
