//! Run a preset power scenario at reduced scale and emit its CSV and SVG.
//!
//! Run with: cargo run --release -p scalemix --example scenario_csv

use scalemix::experiments::{emit_csv, parse_csv, run_scenario, write_svg, Preset, ScenarioConfig};

fn main() {
    // Preset D (sparse regime, sigma > 1) shrunk for a quick demonstration;
    // drop the overrides to reproduce the full desk-scale experiment.
    let mut cfg = ScenarioConfig::preset(Preset::D);
    cfg.n = 2000;
    cfg.reps = 60;
    cfg.calibration_reps = 400;
    println!(
        "running scenario {} (beta {}, {} grid points, n {}, {} reps)...",
        cfg.name,
        cfg.beta,
        cfg.grid.len(),
        cfg.n,
        cfg.reps
    );

    let rows = run_scenario(&cfg).unwrap();
    let csv = emit_csv(&rows);
    println!("\nfirst rows:");
    for line in csv.lines().take(8) {
        println!("  {line}");
    }

    // The CSV round-trips losslessly.
    assert_eq!(parse_csv(&csv).unwrap(), rows);

    let dir = std::env::temp_dir();
    let csv_path = dir.join("scalemix-scenario-d.csv");
    let svg_path = dir.join("scalemix-scenario-d.svg");
    std::fs::write(&csv_path, &csv).unwrap();
    write_svg(&rows, &svg_path).unwrap();
    println!("\nwrote {} ({} rows)", csv_path.display(), rows.len());
    println!("wrote {} (power curves with error bars and boundary lines)", svg_path.display());
}
