//! Command-line front end.
//!
//! Subcommands: `sample` (draw from the mixture), `test` (evaluate one
//! statistic on a sample file), `calibrate` (simulate and persist a null
//! table), `power` (estimate power against a regime alternative),
//! `scenario` (run a preset power experiment to CSV/SVG), and `boundary`
//! (print a detection boundary and verdict).
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags or flag values),
//! 2 for runtime errors (I/O, bad input data, numeric failures). Every run
//! is deterministic given its flags; seeds are always explicit and nothing
//! reads the clock.
//!
//! Sample files are plain UTF-8 text, one decimal value per line, with `#`
//! comments and blank lines allowed. The `SCALEMIX_CACHE_DIR` environment
//! variable, when set, is where bare calibration-cache file names (no
//! directory component) are read and written.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{
    run_scenario, write_csv, write_svg, Preset, ScenarioConfig,
};
use crate::model::{sample, MixtureParams, RegimeSpec, Side};
use crate::montecarlo::{calibrate_null, empirical_power, mc_p_value, NullCalibration};
use crate::statistics::{
    chi_squared_test, extremes_test, higher_criticism, log_likelihood_ratio, CalibrationKind,
    TestId, TestOutcome,
};
use crate::theory::{classify, detection_boundary, Verdict, NEAR_BOUNDARY_TOLERANCE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Cache directory override for bare calibration file names.
pub const CACHE_DIR_ENV: &str = "SCALEMIX_CACHE_DIR";

#[derive(Parser)]
#[command(
    name = "scalemix",
    version,
    about = "Sparse variance contamination: sampling, detection tests, boundaries, power experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy)]
struct WhichTest(TestId);

impl std::str::FromStr for WhichTest {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        TestId::parse(s)
            .map(WhichTest)
            .ok_or_else(|| format!("unknown test `{s}` (expected lr, chisq, extremes or hc)"))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RegimeArg {
    NearZero,
    NearOne,
    Fixed,
}

impl std::str::FromStr for RegimeArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "nearzero" | "near-zero" => Ok(RegimeArg::NearZero),
            "nearone" | "near-one" => Ok(RegimeArg::NearOne),
            "fixed" => Ok(RegimeArg::Fixed),
            _ => Err(format!(
                "unknown regime `{s}` (expected nearzero, nearone or fixed)"
            )),
        }
    }
}

#[derive(Clone, Copy)]
struct SideArg(Side);

impl std::str::FromStr for SideArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "above" => Ok(SideArg(Side::Above)),
            "below" => Ok(SideArg(Side::Below)),
            _ => Err(format!("unknown side `{s}` (expected above or below)")),
        }
    }
}

/// Flags shared by the regime-driven subcommands.
#[derive(Args)]
struct RegimeFlags {
    /// Regime: nearzero (sigma = n^-gamma), nearone (sigma = 1 -+ n^-gamma)
    /// or fixed.
    #[arg(long)]
    regime: RegimeArg,
    /// Sparsity exponent: epsilon = n^-beta, 0 < beta < 1.
    #[arg(long)]
    beta: f64,
    /// Scale exponent for the nearzero/nearone regimes.
    #[arg(long)]
    gamma: Option<f64>,
    /// Contaminated standard deviation for the fixed regime.
    #[arg(long)]
    sigma: Option<f64>,
    /// Side of 1 for the nearone regime.
    #[arg(long, default_value = "above")]
    side: SideArg,
}

impl RegimeFlags {
    fn spec(&self) -> std::result::Result<RegimeSpec, CliError> {
        let need = |flag: &str, value: Option<f64>| {
            value.ok_or_else(|| CliError::Usage(format!("--regime {} requires --{flag}", self.name())))
        };
        let reject = |flag: &str, v: Option<f64>| {
            if v.is_some() {
                Err(CliError::Usage(format!(
                    "--{flag} does not apply to --regime {}",
                    self.name()
                )))
            } else {
                Ok(())
            }
        };
        let spec = match self.regime {
            RegimeArg::NearZero => {
                reject("sigma", self.sigma)?;
                RegimeSpec::near_zero(self.beta, need("gamma", self.gamma)?)
            }
            RegimeArg::NearOne => {
                reject("sigma", self.sigma)?;
                RegimeSpec::near_one(self.beta, need("gamma", self.gamma)?, self.side.0)
            }
            RegimeArg::Fixed => {
                reject("gamma", self.gamma)?;
                RegimeSpec::fixed(self.beta, need("sigma", self.sigma)?)
            }
        };
        spec.map_err(|e| CliError::Usage(e.to_string()))
    }

    fn name(&self) -> &'static str {
        match self.regime {
            RegimeArg::NearZero => "nearzero",
            RegimeArg::NearOne => "nearone",
            RegimeArg::Fixed => "fixed",
        }
    }

    /// The coordinate the user supplied (gamma or sigma).
    fn coordinate(&self) -> Option<f64> {
        match self.regime {
            RegimeArg::Fixed => self.sigma,
            _ => self.gamma,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw a mixture sample, one value per line.
    Sample {
        /// Number of observations.
        #[arg(long)]
        n: usize,
        /// Contamination proportion in [0, 0.5).
        #[arg(long)]
        epsilon: f64,
        /// Contaminated standard deviation.
        #[arg(long)]
        sigma: f64,
        /// Stream seed.
        #[arg(long)]
        seed: u64,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate one test on a sample file; prints a single CSV line
    /// `test,n,statistic,p_value,calibration`.
    Test {
        /// Which test: lr, chisq, extremes or hc.
        #[arg(long)]
        which: WhichTest,
        /// Sample file: one value per line, `#` comments allowed.
        #[arg(long)]
        input: PathBuf,
        /// Declared alternative's contamination proportion (lr only).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Declared alternative's contaminated standard deviation (lr only).
        #[arg(long)]
        sigma: Option<f64>,
        /// Calibration cache for the Monte Carlo tests (lr, hc).
        #[arg(long)]
        cal: Option<PathBuf>,
    },
    /// Simulate a null calibration table and save it to a cache file.
    Calibrate {
        /// Which test: lr, chisq, extremes or hc.
        #[arg(long)]
        which: WhichTest,
        /// Sample size per replicate.
        #[arg(long)]
        n: usize,
        /// Number of null replicates (at least 100).
        #[arg(long = "B")]
        b: usize,
        /// Base seed for the calibration streams.
        #[arg(long)]
        seed: u64,
        /// Declared alternative's contamination proportion (lr only).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Declared alternative's contaminated standard deviation (lr only).
        #[arg(long)]
        sigma: Option<f64>,
        /// Cache file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the power of a test against a regime alternative.
    Power {
        /// Which test: lr, chisq, extremes or hc.
        #[arg(long)]
        which: WhichTest,
        #[command(flatten)]
        regime: RegimeFlags,
        /// Sample size.
        #[arg(long)]
        n: usize,
        /// Number of alternative replicates.
        #[arg(long, default_value_t = 200)]
        reps: usize,
        /// Test level.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Base seed.
        #[arg(long)]
        seed: u64,
        /// Null replicates for the Monte Carlo-calibrated tests.
        #[arg(long = "B", default_value_t = 2000)]
        b: usize,
    },
    /// Run a preset power scenario and write its CSV (and optional SVG).
    Scenario {
        /// Preset: A, B, C or D.
        #[arg(long)]
        preset: String,
        /// Optional key=value config file (n, reps, alpha, B, seed, tests).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override: sample size.
        #[arg(long)]
        n: Option<usize>,
        /// Override: repetitions per grid point.
        #[arg(long)]
        reps: Option<usize>,
        /// Override: test level.
        #[arg(long)]
        alpha: Option<f64>,
        /// Override: calibration replicates.
        #[arg(long = "B")]
        b: Option<usize>,
        /// Override: base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override: comma-separated tests (lr,chisq,extremes,hc).
        #[arg(long)]
        tests: Option<String>,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
        /// Optional SVG rendering of the power curves.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Print a test's detection boundary in a regime, and the verdict for a
    /// concrete coordinate when one is given.
    Boundary {
        /// Which test: lr, chisq, extremes or hc.
        #[arg(long)]
        which: WhichTest,
        #[command(flatten)]
        regime: RegimeFlags,
    },
}

enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

/// Entry point used by `main`; returns the process exit code.
pub fn run_from_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args(), &mut stdout.lock(), &mut stderr.lock())
}

/// Run with explicit arguments and streams (testable form).
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Runtime(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> std::result::Result<(), CliError> {
    match command {
        Command::Sample { n, epsilon, sigma, seed, out: out_path } => {
            cmd_sample(n, epsilon, sigma, seed, out_path.as_deref(), out)
        }
        Command::Test { which, input, epsilon, sigma, cal } => {
            cmd_test(which.0, &input, epsilon, sigma, cal.as_deref(), out)
        }
        Command::Calibrate { which, n, b, seed, epsilon, sigma, out: out_path } => {
            cmd_calibrate(which.0, n, b, seed, epsilon, sigma, &out_path, out)
        }
        Command::Power { which, regime, n, reps, alpha, seed, b } => {
            cmd_power(which.0, &regime, n, reps, alpha, seed, b, out)
        }
        Command::Scenario { preset, config, n, reps, alpha, b, seed, tests, out: out_path, svg } => {
            cmd_scenario(
                &preset,
                config.as_deref(),
                n,
                reps,
                alpha,
                b,
                seed,
                tests.as_deref(),
                &out_path,
                svg.as_deref(),
                out,
            )
        }
        Command::Boundary { which, regime } => cmd_boundary(which.0, &regime, out),
    }
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

/// The declared alternative for the likelihood ratio: both flags required,
/// epsilon > 0 and sigma != 1 (the statistic is identically zero otherwise).
fn lr_alternative(epsilon: Option<f64>, sigma: Option<f64>) -> std::result::Result<MixtureParams, CliError> {
    let (Some(eps), Some(sigma)) = (epsilon, sigma) else {
        return Err(CliError::Usage(
            "the likelihood ratio is not parameter-free: --epsilon and --sigma are required".into(),
        ));
    };
    let params = MixtureParams::new(eps, sigma).map_err(usage)?;
    if params.epsilon() == 0.0 || params.sigma() == 1.0 {
        return Err(CliError::Usage(
            "--epsilon 0 or --sigma 1 declares the null, not an alternative".into(),
        ));
    }
    Ok(params)
}

fn reject_lr_flags(
    test: TestId,
    epsilon: Option<f64>,
    sigma: Option<f64>,
) -> std::result::Result<(), CliError> {
    if test != TestId::Lr && (epsilon.is_some() || sigma.is_some()) {
        return Err(CliError::Usage(format!(
            "--epsilon/--sigma only apply to --which lr, not {test}"
        )));
    }
    Ok(())
}

/// Bare file names resolve under `SCALEMIX_CACHE_DIR` when it is set.
fn cache_path(path: &Path) -> PathBuf {
    let bare = path.parent().is_none_or(|p| p.as_os_str().is_empty());
    match (bare, std::env::var_os(CACHE_DIR_ENV)) {
        (true, Some(dir)) => PathBuf::from(dir).join(path),
        _ => path.to_owned(),
    }
}

/// Load a sample file: one decimal per line, `#` comments, blank lines ok.
fn load_values(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            Error::InvalidInput(format!("{}:{}: not a number: `{line}`", path.display(), i + 1))
        })?;
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!(
                "{}:{}: non-finite value",
                path.display(),
                i + 1
            )));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: no values found",
            path.display()
        )));
    }
    Ok(values)
}

fn cmd_sample(
    n: usize,
    epsilon: f64,
    sigma: f64,
    seed: u64,
    out_path: Option<&Path>,
    out: &mut dyn Write,
) -> std::result::Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let params = MixtureParams::new(epsilon, sigma).map_err(usage)?;
    let s = sample(&params, n, seed);
    let mut text = String::with_capacity(n * 20);
    for v in s.values() {
        text.push_str(&format!("{v}\n"));
    }
    match out_path {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Runtime(Error::io(path, e))),
        None => {
            out.write_all(text.as_bytes()).ok();
            Ok(())
        }
    }
}

fn outcome_csv_line(outcome: &TestOutcome, n: usize) -> String {
    let p = outcome.p_value().map(|p| p.value().to_string()).unwrap_or_default();
    format!(
        "{},{},{},{},{}",
        outcome.test(),
        n,
        outcome.statistic(),
        p,
        outcome.calibration().name()
    )
}

fn cmd_test(
    test: TestId,
    input: &Path,
    epsilon: Option<f64>,
    sigma: Option<f64>,
    cal: Option<&Path>,
    out: &mut dyn Write,
) -> std::result::Result<(), CliError> {
    reject_lr_flags(test, epsilon, sigma)?;
    if cal.is_some() && test.calibration_method() != CalibrationKind::MonteCarlo {
        return Err(CliError::Usage(format!(
            "--cal only applies to the Monte Carlo-calibrated tests (lr, hc), not {test}"
        )));
    }
    let values = load_values(input)?;
    let n = values.len();
    let table = cal.map(|p| NullCalibration::load(&cache_path(p))).transpose()?;
    if let Some(t) = &table {
        if t.test() != test {
            return Err(Error::CalibrationMismatch(format!(
                "cache is for {}, --which is {test}",
                t.test()
            ))
            .into());
        }
        if t.n() != n {
            return Err(Error::CalibrationMismatch(format!(
                "cache simulated n = {}, input has n = {n}",
                t.n()
            ))
            .into());
        }
    }
    let outcome = match test {
        TestId::ChiSquared => chi_squared_test(&values)?.outcome,
        TestId::Extremes => extremes_test(&values)?.outcome,
        TestId::Hc => {
            let stat = higher_criticism(&values)?.statistic();
            match &table {
                Some(t) => TestOutcome::monte_carlo(test, stat, mc_p_value(t, stat)),
                None => TestOutcome::uncalibrated(test, stat),
            }
        }
        TestId::Lr => {
            let params = lr_alternative(epsilon, sigma)?;
            let stat = log_likelihood_ratio(&values, &params)?;
            match &table {
                Some(t) => {
                    if t.lr_params() != Some(&params) {
                        return Err(Error::CalibrationMismatch(
                            "cache was calibrated for different --epsilon/--sigma".into(),
                        )
                        .into());
                    }
                    TestOutcome::monte_carlo(test, stat, mc_p_value(t, stat))
                }
                None => TestOutcome::uncalibrated(test, stat),
            }
        }
    };
    writeln!(out, "{}", outcome_csv_line(&outcome, n)).ok();
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_calibrate(
    test: TestId,
    n: usize,
    b: usize,
    seed: u64,
    epsilon: Option<f64>,
    sigma: Option<f64>,
    out_path: &Path,
    out: &mut dyn Write,
) -> std::result::Result<(), CliError> {
    reject_lr_flags(test, epsilon, sigma)?;
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let lr_params = match test {
        TestId::Lr => Some(lr_alternative(epsilon, sigma)?),
        _ => None,
    };
    let cal = calibrate_null(test, n, b, seed, lr_params.as_ref())?;
    let path = cache_path(out_path);
    cal.save(&path)?;
    writeln!(
        out,
        "calibrated {test} at n = {n} with {b} replicates (seed {seed}) -> {}",
        path.display()
    )
    .ok();
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_power(
    test: TestId,
    regime: &RegimeFlags,
    n: usize,
    reps: usize,
    alpha: f64,
    seed: u64,
    b: usize,
    out: &mut dyn Write,
) -> std::result::Result<(), CliError> {
    if n == 0 || reps == 0 {
        return Err(CliError::Usage("--n and --reps must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha {alpha} outside (0, 1)")));
    }
    let spec = regime.spec()?;
    let params = spec.resolve(n)?;
    if test == TestId::Lr && params.sigma() == 1.0 {
        return Err(CliError::Usage(
            "the resolved alternative has sigma = 1; the likelihood ratio needs sigma != 1".into(),
        ));
    }
    let cal = match test.calibration_method() {
        CalibrationKind::MonteCarlo => Some(calibrate_null(
            test,
            n,
            b,
            seed,
            (test == TestId::Lr).then_some(&params),
        )?),
        _ => None,
    };
    let est = empirical_power(test, &params, n, reps, alpha, seed, cal.as_ref())?;
    writeln!(
        out,
        "test {test} regime {} beta {} coordinate {} | epsilon {:.6e} sigma {:.6} | power {:.4} \
         ci [{:.4}, {:.4}] rejections {}/{} alpha {} n {n} seed {seed}",
        regime.name(),
        regime.beta,
        regime.coordinate().unwrap_or(f64::NAN),
        params.epsilon(),
        params.sigma(),
        est.power,
        est.ci_low,
        est.ci_high,
        est.rejections,
        est.reps,
        alpha
    )
    .ok();
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_scenario(
    preset: &str,
    config: Option<&Path>,
    n: Option<usize>,
    reps: Option<usize>,
    alpha: Option<f64>,
    b: Option<usize>,
    seed: Option<u64>,
    tests: Option<&str>,
    out_path: &Path,
    svg: Option<&Path>,
    out: &mut dyn Write,
) -> std::result::Result<(), CliError> {
    let preset = Preset::parse(preset)
        .ok_or_else(|| CliError::Usage(format!("unknown preset `{preset}` (expected A, B, C or D)")))?;
    let mut cfg = ScenarioConfig::preset(preset);
    if let Some(path) = config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        cfg.apply_kv_text(&text).map_err(usage)?;
    }
    // Flags win over the config file.
    if let Some(n) = n {
        cfg.n = n;
    }
    if let Some(reps) = reps {
        cfg.reps = reps;
    }
    if let Some(alpha) = alpha {
        cfg.alpha = alpha;
    }
    if let Some(b) = b {
        cfg.calibration_reps = b;
    }
    if let Some(seed) = seed {
        cfg.base_seed = seed;
    }
    if let Some(list) = tests {
        cfg.apply_kv("tests", list).map_err(usage)?;
    }
    cfg.validate().map_err(usage)?;
    let rows = run_scenario(&cfg)?;
    write_csv(&rows, out_path)?;
    if let Some(svg_path) = svg {
        write_svg(&rows, svg_path)?;
    }
    writeln!(
        out,
        "scenario {} done: {} rows -> {}{}",
        cfg.name,
        rows.len(),
        out_path.display(),
        svg.map(|p| format!(" (svg {})", p.display())).unwrap_or_default()
    )
    .ok();
    Ok(())
}

fn cmd_boundary(
    test: TestId,
    regime: &RegimeFlags,
    out: &mut dyn Write,
) -> std::result::Result<(), CliError> {
    // The boundary itself only needs beta and the regime kind; use the
    // user's coordinate when given, else a placeholder inside the domain.
    let spec_for_boundary = match regime.coordinate() {
        Some(_) => regime.spec()?,
        None => {
            let placeholder = RegimeFlags {
                regime: regime.regime,
                beta: regime.beta,
                gamma: match regime.regime {
                    RegimeArg::Fixed => None,
                    _ => Some(0.5),
                },
                sigma: matches!(regime.regime, RegimeArg::Fixed).then_some(2.0),
                side: regime.side,
            };
            placeholder.spec()?
        }
    };
    let coordinate_name = match regime.regime {
        RegimeArg::Fixed => "sigma",
        _ => "gamma",
    };
    match detection_boundary(test, &spec_for_boundary) {
        Some(b) => writeln!(out, "{coordinate_name}* = {b:.6}").ok(),
        None => writeln!(out, "{coordinate_name}* = none").ok(),
    };
    if regime.coordinate().is_some() {
        let v = classify(test, &spec_for_boundary, NEAR_BOUNDARY_TOLERANCE);
        match v.verdict {
            Verdict::NotCoveredByPaper => {
                writeln!(out, "verdict = {}", v.verdict.name()).ok();
            }
            _ => {
                writeln!(out, "verdict = {} (margin {:+.6})", v.verdict.name(), v.margin).ok();
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let full: Vec<String> =
            std::iter::once("scalemix".to_owned()).chain(args.iter().map(|s| s.to_string())).collect();
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn tmp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("scalemix-cli-{tag}"));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn boundary_prints_reference_value() {
        let (code, out, _) = run_cli(&["boundary", "--which", "lr", "--regime", "fixed", "--beta", "0.6"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out, "sigma* = 1.581139\n");
        // With a coordinate the verdict is included.
        let (code, out, _) = run_cli(&[
            "boundary", "--which", "extremes", "--regime", "fixed", "--beta", "0.6", "--sigma", "3",
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("sigma* = 1.581139"));
        assert!(out.contains("verdict = detectable"));
        // Not covered: extremes near one.
        let (code, out, _) = run_cli(&[
            "boundary", "--which", "extremes", "--regime", "nearone", "--beta", "0.4", "--gamma", "0.1",
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("gamma* = none"));
        assert!(out.contains("verdict = not-covered"));
    }

    #[test]
    fn test_subcommand_matches_chi_squared_example() {
        let dir = tmp_dir("chisq");
        let input = dir.join("one_zero.txt");
        fs::write(&input, "# a single zero\n0\n").unwrap();
        let (code, out, _) =
            run_cli(&["test", "--which", "chisq", "--input", input.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        let fields: Vec<&str> = out.trim().split(',').collect();
        assert_eq!(fields[0], "chisq");
        assert_eq!(fields[1], "1");
        assert_eq!(fields[2], "1");
        let p: f64 = fields[3].parse().unwrap();
        assert!((p - 0.157_299_207_050_285_13).abs() < 1e-12);
        assert_eq!(fields[4], "closed-form");
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn sample_is_deterministic_and_parses() {
        let (code, out1, _) =
            run_cli(&["sample", "--n", "5", "--epsilon", "0.2", "--sigma", "3", "--seed", "9"]);
        assert_eq!(code, EXIT_OK);
        let (_, out2, _) =
            run_cli(&["sample", "--n", "5", "--epsilon", "0.2", "--sigma", "3", "--seed", "9"]);
        assert_eq!(out1, out2);
        let values: Vec<f64> = out1.lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(values.len(), 5);
    }

    #[test]
    fn calibrate_then_test_attaches_p_value() {
        let dir = tmp_dir("cal");
        let cache = dir.join("hc_n40.cal");
        let (code, _, err) = run_cli(&[
            "calibrate", "--which", "hc", "--n", "40", "--B", "150", "--seed", "5", "--out",
            cache.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK, "stderr: {err}");

        let input = dir.join("null40.txt");
        let (code, sample_out, _) =
            run_cli(&["sample", "--n", "40", "--epsilon", "0", "--sigma", "1", "--seed", "77"]);
        assert_eq!(code, EXIT_OK);
        fs::write(&input, sample_out).unwrap();

        let (code, out, err) = run_cli(&[
            "test", "--which", "hc", "--input", input.to_str().unwrap(), "--cal",
            cache.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK, "stderr: {err}");
        let fields: Vec<&str> = out.trim().split(',').collect();
        assert_eq!(fields[4], "monte-carlo");
        let p: f64 = fields[3].parse().unwrap();
        assert!(p > 0.0 && p <= 1.0);

        // Without --cal the statistic is reported uncalibrated.
        let (code, out, _) =
            run_cli(&["test", "--which", "hc", "--input", input.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        assert!(out.trim().ends_with(",none"));

        // Mismatched n is a runtime error.
        let short = dir.join("short.txt");
        fs::write(&short, "0.5\n-0.25\n").unwrap();
        let (code, _, err) = run_cli(&[
            "test", "--which", "hc", "--input", short.to_str().unwrap(), "--cal",
            cache.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_RUNTIME);
        assert!(err.contains("n = 40"));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn lr_requires_declared_alternative() {
        let dir = tmp_dir("lr");
        let input = dir.join("x.txt");
        fs::write(&input, "0.1\n0.2\n").unwrap();
        let (code, _, err) =
            run_cli(&["test", "--which", "lr", "--input", input.to_str().unwrap()]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--epsilon"));
        let (code, _, err) = run_cli(&[
            "test", "--which", "lr", "--input", input.to_str().unwrap(), "--epsilon", "0.1",
            "--sigma", "1",
        ]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("sigma 1"));
        let (code, out, _) = run_cli(&[
            "test", "--which", "lr", "--input", input.to_str().unwrap(), "--epsilon", "0.1",
            "--sigma", "2",
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("lr,2,"));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn exit_codes_cover_usage_and_runtime() {
        // Unknown flag: usage.
        let (code, _, _) = run_cli(&["sample", "--n", "5", "--epsilon", "0", "--sigma", "1",
            "--seed", "1", "--frobnicate", "yes"]);
        assert_eq!(code, EXIT_USAGE);
        // Unknown subcommand: usage.
        let (code, _, _) = run_cli(&["dance"]);
        assert_eq!(code, EXIT_USAGE);
        // Bad flag value: usage.
        let (code, _, _) = run_cli(&["boundary", "--which", "nope", "--regime", "fixed", "--beta", "0.6"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _, err) =
            run_cli(&["sample", "--n", "5", "--epsilon", "0.7", "--sigma", "1", "--seed", "1"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("epsilon"));
        // Missing input file: runtime.
        let (code, _, _) = run_cli(&["test", "--which", "hc", "--input", "/no/such/file.txt"]);
        assert_eq!(code, EXIT_RUNTIME);
        // Bad data in the input file: runtime.
        let dir = tmp_dir("badfile");
        let input = dir.join("bad.txt");
        fs::write(&input, "1.0\nbanana\n").unwrap();
        let (code, _, err) = run_cli(&["test", "--which", "hc", "--input", input.to_str().unwrap()]);
        assert_eq!(code, EXIT_RUNTIME);
        assert!(err.contains("banana"));
        // Help: success.
        let (code, out, _) = run_cli(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("scenario"));
        for sub in ["sample", "test", "calibrate", "power", "scenario", "boundary"] {
            let (code, out, _) = run_cli(&[sub, "--help"]);
            assert_eq!(code, EXIT_OK, "help for {sub}");
            assert!(out.contains("Usage"));
        }
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn power_runs_quickly_at_small_scale() {
        let (code, out, err) = run_cli(&[
            "power", "--which", "chisq", "--regime", "fixed", "--beta", "0.25", "--sigma", "3",
            "--n", "200", "--reps", "50", "--seed", "3",
        ]);
        assert_eq!(code, EXIT_OK, "stderr: {err}");
        assert!(out.contains("power"), "out: {out}");
        assert!(out.contains("regime fixed"));
    }

    #[test]
    fn scenario_shrunk_run_writes_csv_and_svg() {
        let dir = tmp_dir("scenario");
        let csv = dir.join("b.csv");
        let svg = dir.join("b.svg");
        let cfg = dir.join("cfg.txt");
        fs::write(&cfg, "n = 80\nreps = 10\nB = 120\ntests = chisq,extremes\n").unwrap();
        let (code, out, err) = run_cli(&[
            "scenario", "--preset", "B", "--config", cfg.to_str().unwrap(), "--reps", "12",
            "--out", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK, "stderr: {err}");
        assert!(out.contains("scenario B done"));
        let text = fs::read_to_string(&csv).unwrap();
        // 2 tests x 8 grid points, flags beat the config file on reps.
        assert_eq!(text.lines().count(), 1 + 2 * 8);
        assert!(text.contains(",12,"));
        assert!(!text.contains(",10,"));
        let rows = crate::experiments::parse_csv(&text).unwrap();
        assert_eq!(rows.len(), 16);
        assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn cache_dir_env_resolves_bare_names() {
        // Paths with a directory component are never redirected.
        assert_eq!(cache_path(Path::new("sub/dir/x.cal")), PathBuf::from("sub/dir/x.cal"));
        // Only this test touches the variable; the other tests pass paths
        // with directory components.
        std::env::set_var(CACHE_DIR_ENV, "/tmp/scalemix-caches");
        assert_eq!(cache_path(Path::new("x.cal")), PathBuf::from("/tmp/scalemix-caches/x.cal"));
        assert_eq!(cache_path(Path::new("sub/x.cal")), PathBuf::from("sub/x.cal"));
        std::env::remove_var(CACHE_DIR_ENV);
        assert_eq!(cache_path(Path::new("x.cal")), PathBuf::from("x.cal"));
    }
}
