//! Null calibration, Monte Carlo p-values, and empirical power/risk
//! estimation with deterministic parallel replication.
//!
//! Replicate `j` of any phase draws from the stream keyed by
//! `(base_seed, test, j, phase)`; replicates are mapped in parallel and
//! collected in index order, so every result is a pure function of its
//! inputs whatever the thread count. Calibration and power phases never
//! share streams.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{sample, MixtureParams};
use crate::numerics::Probability;
use crate::rng::{replicate_key, Phase, GENERATOR_ID};
use crate::statistics::{
    chi_squared_test, extremes_test, higher_criticism, log_likelihood_ratio, CalibrationKind,
    TestId, TestOutcome,
};

/// Below this many replicates the 0.05-level quantile is meaningless.
pub const MIN_CALIBRATION_REPLICATES: usize = 100;

/// A simulated null distribution for one test at one sample size.
///
/// For the likelihood ratio the table additionally fixes the alternative's
/// `(epsilon, sigma)`: the statistic itself depends on them, so each
/// alternative needs its own table.
#[derive(Debug, Clone, PartialEq)]
pub struct NullCalibration {
    test: TestId,
    n: usize,
    base_seed: u64,
    lr_params: Option<MixtureParams>,
    sorted_stats: Vec<f64>,
}

impl NullCalibration {
    pub fn test(&self) -> TestId {
        self.test
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn replicates(&self) -> usize {
        self.sorted_stats.len()
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn lr_params(&self) -> Option<&MixtureParams> {
        self.lr_params.as_ref()
    }

    /// The simulated null statistics, ascending.
    pub fn sorted_stats(&self) -> &[f64] {
        &self.sorted_stats
    }

    /// Exact size of the add-one Monte Carlo test at level `alpha` under a
    /// continuous null: `floor(alpha (B+1)) / (B+1)`.
    pub fn exact_level(&self, alpha: f64) -> f64 {
        let b1 = (self.replicates() + 1) as f64;
        (alpha * b1).floor() / b1
    }
}

/// The statistic a test contributes to calibration tables and Monte Carlo
/// p-values; oriented so larger means more extreme under every test.
pub fn test_statistic(
    test: TestId,
    values: &[f64],
    lr_params: Option<&MixtureParams>,
) -> Result<f64> {
    match test {
        TestId::Lr => {
            let params = lr_params.ok_or(Error::MissingCalibration { test: "lr" })?;
            log_likelihood_ratio(values, params)
        }
        TestId::ChiSquared => Ok(chi_squared_test(values)?.outcome.statistic()),
        TestId::Extremes => Ok(extremes_test(values)?.outcome.statistic()),
        TestId::Hc => Ok(higher_criticism(values)?.statistic()),
    }
}

/// Simulate the null distribution of a test statistic: `b` independent null
/// samples of size `n`, statistics sorted ascending.
///
/// The closed-form tests may also be calibrated this way for
/// cross-validation. `lr_params` is required for the likelihood ratio and
/// rejected for every other test.
pub fn calibrate_null(
    test: TestId,
    n: usize,
    b: usize,
    base_seed: u64,
    lr_params: Option<&MixtureParams>,
) -> Result<NullCalibration> {
    if b < MIN_CALIBRATION_REPLICATES {
        return Err(Error::TooFewReplicates { got: b, min: MIN_CALIBRATION_REPLICATES });
    }
    assert!(n >= 1, "sample size must be positive");
    match (test, lr_params) {
        (TestId::Lr, None) => {
            return Err(Error::InvalidInput(
                "likelihood ratio calibration needs the alternative's epsilon and sigma".into(),
            ))
        }
        (TestId::Lr, Some(p)) if p.epsilon() == 0.0 || p.sigma() == 1.0 => {
            return Err(Error::DegenerateLikelihoodRatio)
        }
        (TestId::Lr, Some(_)) => {}
        (_, Some(_)) => {
            return Err(Error::InvalidInput(format!(
                "{test} does not take alternative parameters"
            )))
        }
        (_, None) => {}
    }
    let null = MixtureParams::null();
    let mut stats = (0..b as u64)
        .into_par_iter()
        .map(|j| {
            let seed = replicate_key(base_seed, test.tag(), j, Phase::Calibration);
            let s = sample(&null, n, seed);
            test_statistic(test, s.values(), lr_params)
        })
        .collect::<Result<Vec<f64>>>()?;
    stats.sort_unstable_by(f64::total_cmp);
    Ok(NullCalibration {
        test,
        n,
        base_seed,
        lr_params: lr_params.copied(),
        sorted_stats: stats,
    })
}

/// Add-one Monte Carlo p-value: `(1 + #{j : stat_j >= observed}) / (B + 1)`.
///
/// Valid (super-uniform under the null) at any `B`, at the price of a floor
/// of `1/(B+1)`.
pub fn mc_p_value(cal: &NullCalibration, observed: f64) -> Probability {
    let below = cal.sorted_stats.partition_point(|&s| s < observed);
    let ge = cal.sorted_stats.len() - below;
    Probability::new((1 + ge) as f64 / (cal.sorted_stats.len() + 1) as f64)
}

/// Wrap a statistic into a calibrated outcome using a Monte Carlo table.
pub fn calibrated_outcome(cal: &NullCalibration, statistic: f64) -> TestOutcome {
    TestOutcome::monte_carlo(cal.test, statistic, mc_p_value(cal, statistic))
}

/// Empirical rejection fraction with its Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub rejections: usize,
    pub reps: usize,
    pub alpha: f64,
    pub power: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// z for the central 95% of the standard normal.
const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for a binomial proportion at 95% confidence.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // At the boundaries center - half cancels exactly in real arithmetic;
    // snap away the floating residue.
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

fn check_calibration(
    test: TestId,
    n: usize,
    params_for_lr: Option<&MixtureParams>,
    cal: Option<&NullCalibration>,
) -> Result<()> {
    match test.calibration_method() {
        CalibrationKind::MonteCarlo => {
            let cal = cal.ok_or(Error::MissingCalibration { test: test.name() })?;
            if cal.test != test {
                return Err(Error::CalibrationMismatch(format!(
                    "table is for {}, request is for {test}",
                    cal.test
                )));
            }
            if cal.n != n {
                return Err(Error::CalibrationMismatch(format!(
                    "table simulated n = {}, request has n = {n}",
                    cal.n
                )));
            }
            if test == TestId::Lr && cal.lr_params.as_ref() != params_for_lr {
                return Err(Error::CalibrationMismatch(
                    "likelihood ratio table was built for different (epsilon, sigma)".into(),
                ));
            }
            Ok(())
        }
        _ => {
            if cal.is_some() {
                return Err(Error::UnexpectedCalibration { test: test.name() });
            }
            Ok(())
        }
    }
}

/// p-value of one sample under the given test: closed form where available,
/// otherwise against the calibration table.
fn p_value_for(
    test: TestId,
    values: &[f64],
    params: &MixtureParams,
    cal: Option<&NullCalibration>,
) -> Result<f64> {
    match test {
        TestId::ChiSquared => Ok(chi_squared_test(values)?.outcome.p_value().unwrap().value()),
        TestId::Extremes => Ok(extremes_test(values)?.outcome.p_value().unwrap().value()),
        TestId::Lr => {
            let stat = log_likelihood_ratio(values, params)?;
            Ok(mc_p_value(cal.unwrap(), stat).value())
        }
        TestId::Hc => {
            let stat = higher_criticism(values)?.statistic();
            Ok(mc_p_value(cal.unwrap(), stat).value())
        }
    }
}

/// Estimate the power of a test at level `alpha` against the alternative
/// `params`: draw `reps` alternative samples on deterministic per-replicate
/// streams, count `p < alpha`.
///
/// `cal` must be present exactly for the Monte Carlo-calibrated tests
/// (likelihood ratio, higher criticism) and must match `(test, n)` and, for
/// the likelihood ratio, the alternative itself. A statistic failure in any
/// replicate fails the whole estimate; replicates are never silently
/// skipped.
pub fn empirical_power(
    test: TestId,
    params: &MixtureParams,
    n: usize,
    reps: usize,
    alpha: f64,
    base_seed: u64,
    cal: Option<&NullCalibration>,
) -> Result<PowerEstimate> {
    assert!(reps >= 1, "need at least one replicate");
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
    let lr_params = (test == TestId::Lr).then_some(params);
    check_calibration(test, n, lr_params, cal)?;
    let rejections = (0..reps as u64)
        .into_par_iter()
        .map(|j| {
            let seed = replicate_key(base_seed, test.tag(), j, Phase::Power);
            let s = sample(params, n, seed);
            Ok(p_value_for(test, s.values(), params, cal)? < alpha)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&r| r)
        .count();
    let (ci_low, ci_high) = wilson_interval(rejections, reps);
    Ok(PowerEstimate {
        rejections,
        reps,
        alpha,
        power: rejections as f64 / reps as f64,
        ci_low,
        ci_high,
    })
}

/// Estimated risk: Type I error at the test's operating threshold plus
/// Type II error against `params`.
///
/// The Type I term reuses the calibration rather than re-simulating: for the
/// closed-form tests it is `alpha` itself (an upper bound for the
/// conservative extremes test), and for the Monte Carlo tests it is the
/// exact size `floor(alpha (B+1)) / (B+1)` of the add-one rule.
pub fn estimate_risk(
    test: TestId,
    params: &MixtureParams,
    n: usize,
    reps: usize,
    alpha: f64,
    base_seed: u64,
    cal: Option<&NullCalibration>,
) -> Result<f64> {
    let power = empirical_power(test, params, n, reps, alpha, base_seed, cal)?;
    let type_i = match test.calibration_method() {
        CalibrationKind::MonteCarlo => cal.unwrap().exact_level(alpha),
        _ => alpha,
    };
    Ok(type_i + (1.0 - power.power))
}

const CACHE_HEADER: &str = "scalemix calibration v1";

impl NullCalibration {
    /// Persist the table as a versioned text cache. Statistics are written
    /// in Rust's shortest round-trip float form, so a reload is bit-exact.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str(CACHE_HEADER);
        out.push('\n');
        writeln!(out, "generator {GENERATOR_ID}").unwrap();
        writeln!(out, "test {}", self.test.name()).unwrap();
        writeln!(out, "n {}", self.n).unwrap();
        writeln!(out, "replicates {}", self.sorted_stats.len()).unwrap();
        writeln!(out, "seed {}", self.base_seed).unwrap();
        match &self.lr_params {
            Some(p) => {
                writeln!(out, "epsilon {}", p.epsilon()).unwrap();
                writeln!(out, "sigma {}", p.sigma()).unwrap();
            }
            None => {
                out.push_str("epsilon -\nsigma -\n");
            }
        }
        out.push_str("stats\n");
        for s in &self.sorted_stats {
            writeln!(out, "{s}").unwrap();
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Load a cache written by [`NullCalibration::save`], verifying the
    /// format version and pinned generator.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        let ctx = |msg: &str| Error::InvalidInput(format!("{}: {msg}", path.display()));
        if lines.next() != Some(CACHE_HEADER) {
            return Err(ctx("not a scalemix calibration cache (bad header)"));
        }
        let mut field = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| ctx("truncated header"))?;
            line.strip_prefix(name)
                .and_then(|rest| rest.strip_prefix(' '))
                .map(str::to_owned)
                .ok_or_else(|| ctx(&format!("expected `{name} ...`, found `{line}`")))
        };
        let generator = field("generator")?;
        if generator != GENERATOR_ID {
            return Err(Error::CalibrationMismatch(format!(
                "cache was produced by generator {generator}, this build uses {GENERATOR_ID}"
            )));
        }
        let test = TestId::parse(&field("test")?)
            .ok_or_else(|| ctx("unknown test id"))?;
        let n: usize = field("n")?.parse().map_err(|_| ctx("bad n"))?;
        let b: usize = field("replicates")?.parse().map_err(|_| ctx("bad replicates"))?;
        let base_seed: u64 = field("seed")?.parse().map_err(|_| ctx("bad seed"))?;
        let eps_str = field("epsilon")?;
        let sigma_str = field("sigma")?;
        let lr_params = if eps_str == "-" && sigma_str == "-" {
            None
        } else {
            let epsilon: f64 = eps_str.parse().map_err(|_| ctx("bad epsilon"))?;
            let sigma: f64 = sigma_str.parse().map_err(|_| ctx("bad sigma"))?;
            Some(MixtureParams::new(epsilon, sigma)?)
        };
        if lines.next() != Some("stats") {
            return Err(ctx("missing stats section"));
        }
        let mut sorted_stats = Vec::with_capacity(b);
        for line in lines {
            if line.is_empty() {
                continue;
            }
            sorted_stats.push(line.parse::<f64>().map_err(|_| ctx("bad statistic line"))?);
        }
        if sorted_stats.len() != b {
            return Err(ctx(&format!(
                "expected {b} statistics, found {}",
                sorted_stats.len()
            )));
        }
        if sorted_stats.windows(2).any(|w| w[0] > w[1]) {
            return Err(ctx("statistics are not sorted"));
        }
        Ok(NullCalibration { test, n, base_seed, lr_params, sorted_stats })
    }
}
