//! Draw from the contamination mixture and check the sample against the
//! model CDF of absolute values.
//!
//! Run with: cargo run --release -p scalemix --example sampling

use scalemix::model::{mixture_abs_cdf, resolve_regime, sample, MixtureParams, RegimeSpec, Side};

fn main() {
    // Directly parameterized: 5% of observations get standard deviation 3.
    let params = MixtureParams::new(0.05, 3.0).unwrap();
    let s = sample(&params, 100_000, 42);
    println!("drew n = {} with (epsilon, sigma) = ({}, {}), seed {}",
        s.n(), s.params().epsilon(), s.params().sigma(), s.seed());

    // The same sample again: bit-identical.
    let again = sample(&params, 100_000, 42);
    assert_eq!(s.values(), again.values());
    println!("same (params, n, seed) reproduces the sample exactly");

    // Empirical distribution of |X| vs the model CDF
    // Lambda(t) = (1 - eps) psi(t) + eps psi(t / sigma).
    let mut abs: Vec<f64> = s.values().iter().map(|v| v.abs()).collect();
    abs.sort_unstable_by(f64::total_cmp);
    println!("\n  t    empirical  model");
    let mut sup: f64 = 0.0;
    for i in 0..8 {
        let t = 0.5 + i as f64;
        let empirical = abs.partition_point(|&a| a <= t) as f64 / abs.len() as f64;
        let model = mixture_abs_cdf(t, &params).value();
        sup = sup.max((empirical - model).abs());
        println!("  {t:.1}  {empirical:.5}    {model:.5}");
    }
    println!("sup deviation over the printed grid: {sup:.5}");

    // Asymptotic regimes resolve (epsilon, sigma) from a sample size.
    println!("\nregime resolution at n = 10^4:");
    let near_zero = RegimeSpec::near_zero(0.6, 0.25).unwrap();
    let p = resolve_regime(&near_zero, 10_000).unwrap();
    println!("  near-zero (beta 0.6, gamma 0.25) -> eps {:.6}, sigma {:.3}", p.epsilon(), p.sigma());
    let near_one = RegimeSpec::near_one(0.4, 0.5, Side::Above).unwrap();
    let p = resolve_regime(&near_one, 10_000).unwrap();
    println!("  near-one/above (beta 0.4, gamma 0.5) -> eps {:.6}, sigma {:.3}", p.epsilon(), p.sigma());
    let fixed = RegimeSpec::fixed(0.5, 2.0).unwrap();
    let p = resolve_regime(&fixed, 10_000).unwrap();
    println!("  fixed (beta 0.5, sigma 2) -> eps {:.6}, sigma {:.3}", p.epsilon(), p.sigma());
}
