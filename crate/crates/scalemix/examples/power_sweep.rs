//! Estimate power along a separation grid and watch the detection boundary
//! appear.
//!
//! Run with: cargo run --release -p scalemix --example power_sweep

use scalemix::model::RegimeSpec;
use scalemix::montecarlo::{calibrate_null, empirical_power};
use scalemix::statistics::TestId;
use scalemix::theory::detection_boundary;

fn main() {
    // Sparse regime, fixed sigma: beta = 0.7 puts the shared boundary at
    // 1/sqrt(0.3) ~ 1.826. Modest sizes keep this example quick.
    let beta = 0.7;
    let n = 4000;
    let reps = 100;
    let seed = 11;
    let grid = [1.3, 1.8, 2.3, 2.8, 3.3];

    let boundary = detection_boundary(TestId::Extremes, &RegimeSpec::fixed(beta, 2.0).unwrap());
    println!("beta = {beta}, n = {n}: extremes/hc boundary sigma* = {:.4}\n", boundary.unwrap());

    // One HC calibration serves the whole sweep.
    let hc_cal = calibrate_null(TestId::Hc, n, 500, seed, None).unwrap();

    println!("sigma   extremes power        hc power");
    for sigma in grid {
        let params = RegimeSpec::fixed(beta, sigma).unwrap().resolve(n).unwrap();
        let ex = empirical_power(TestId::Extremes, &params, n, reps, 0.05, seed, None).unwrap();
        let hc =
            empirical_power(TestId::Hc, &params, n, reps, 0.05, seed, Some(&hc_cal)).unwrap();
        println!(
            "{sigma:.1}    {:.2} [{:.2}, {:.2}]    {:.2} [{:.2}, {:.2}]",
            ex.power, ex.ci_low, ex.ci_high, hc.power, hc.ci_low, hc.ci_high
        );
    }
    println!("\n(Wilson 95% intervals; {reps} replicates per point, seed {seed})");
}
