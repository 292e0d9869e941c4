//! Detection boundaries and region verdicts for every test and regime.
//!
//! Run with: cargo run --release -p scalemix --example boundaries

use scalemix::model::{RegimeSpec, Side};
use scalemix::statistics::TestId;
use scalemix::theory::{
    classify, detection_boundary, second_moment_l, w_moments, NEAR_BOUNDARY_TOLERANCE,
};
use scalemix::MixtureParams;

fn main() {
    // Boundaries in the sparse fixed-sigma regime (beta = 0.6): the
    // likelihood ratio, higher criticism and extremes all share
    // sigma* = 1 / sqrt(1 - beta); the chi-squared test has none.
    println!("fixed-sigma boundaries at beta = 0.6:");
    let spec = RegimeSpec::fixed(0.6, 2.5).unwrap();
    for test in TestId::ALL {
        match detection_boundary(test, &spec) {
            Some(b) => println!("  {test:8} sigma* = {b:.6}"),
            None => println!("  {test:8} none"),
        }
    }

    // Verdicts across a sigma scan.
    println!("\nverdicts for extremes along sigma (beta = 0.6, boundary 1.5811):");
    for sigma in [1.2, 1.5, 1.6, 2.0, 3.0] {
        let spec = RegimeSpec::fixed(0.6, sigma).unwrap();
        let v = classify(TestId::Extremes, &spec, NEAR_BOUNDARY_TOLERANCE);
        println!("  sigma {sigma:.1}: {} (margin {:+.4})", v.verdict.name(), v.margin);
    }

    // Near-zero regime: the higher criticism boundary gamma* = 2 beta - 1
    // sits strictly below the extremes boundary gamma* = beta.
    println!("\nnear-zero boundaries at beta = 0.75:");
    let spec = RegimeSpec::near_zero(0.75, 0.4).unwrap();
    for test in [TestId::Hc, TestId::Extremes] {
        println!(
            "  {test:8} gamma* = {:.3}",
            detection_boundary(test, &spec).unwrap()
        );
    }
    let v = classify(TestId::Hc, &spec, NEAR_BOUNDARY_TOLERANCE);
    println!("  hc at gamma = 0.4: {} (margin {:+.3})", v.verdict.name(), v.margin);
    let v = classify(TestId::Extremes, &spec, NEAR_BOUNDARY_TOLERANCE);
    println!("  extremes at gamma = 0.4: {} (margin {:+.3})", v.verdict.name(), v.margin);

    // The extremes test is not covered by the analysis near sigma = 1.
    let spec = RegimeSpec::near_one(0.4, 0.1, Side::Above).unwrap();
    let v = classify(TestId::Extremes, &spec, NEAR_BOUNDARY_TOLERANCE);
    println!("\nextremes near one: {}", v.verdict.name());

    // Second-moment diagnostics for the likelihood ratio.
    println!("\nlikelihood-ratio second moment at n = 10^4:");
    for (eps, sigma) in [(0.01, 0.5), (0.01, 1.3), (0.01, 1.5)] {
        let m = second_moment_l(&MixtureParams::new(eps, sigma).unwrap(), 10_000);
        match m.per_obs() {
            Some(p) => println!(
                "  (eps {eps}, sigma {sigma}): E0[L1^2] = {p:.6}, bound on E0[L^2] = {:.4}",
                m.bound().unwrap()
            ),
            None => println!("  (eps {eps}, sigma {sigma}): diverges (sigma >= sqrt 2)"),
        }
    }

    // Chi-squared moments under an alternative.
    let (mean, var) = w_moments(&MixtureParams::new(0.01, 2.0).unwrap(), 10_000);
    println!("\nW moments at (eps 0.01, sigma 2, n 10^4): mean {mean}, variance {var} (asymptotic)");
}
