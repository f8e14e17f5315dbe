//! Runs the four figure presets and writes CSV, summary and SVG files.
//!
//! cargo run --release --example figure_presets [-- OUT_DIR]

use cr_feedback_ec::experiment::{describe, list_presets, run_experiment, Experiment};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args().nth(1).unwrap_or_else(|| "out".into());
    for name in list_presets() {
        println!("{}", describe(name)?);
        let exp = Experiment::preset(name, None)?;
        let out = run_experiment(&exp, &out_dir)?;
        println!("  -> {}", out.csv_path.display());
        if let Some(plot) = out.plot_path {
            println!("  -> {}", plot.display());
        }
    }
    Ok(())
}
