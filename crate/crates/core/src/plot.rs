//! SVG line plots of experiment rows.

use std::path::Path;

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::experiment::{Experiment, ExperimentRow, Metric};

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
    RGBColor(23, 190, 207),
];

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Plot(e.to_string())
}

pub(crate) fn render(exp: &Experiment, rows: &[ExperimentRow], path: &Path) -> Result<()> {
    let metric = |r: &ExperimentRow| match exp.plot_metric {
        Metric::EffectiveCapacity => Some(r.ec_bps),
        Metric::SuccessRate => r.success,
    };

    let mut series = Vec::new();
    for &scheme in &exp.schemes {
        for &sensing in &exp.sensing {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.scheme == scheme && r.sensing == sensing)
                .filter_map(|r| metric(r).map(|y| (r.value, y)))
                .collect();
            if !pts.is_empty() {
                series.push((format!("{scheme} ({sensing} sensing)"), pts));
            }
        }
    }

    let ys = series.iter().flat_map(|(_, p)| p.iter().map(|&(_, y)| y));
    let (y_lo, y_hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| (lo.min(y), hi.max(y)));
    let (y_lo, y_hi) = if y_lo.is_finite() {
        let pad = ((y_hi - y_lo) * 0.08).max(y_hi.abs() * 1e-6).max(1e-12);
        (y_lo - pad, y_hi + pad)
    } else {
        (0.0, 1.0)
    };
    let x_lo = exp.grid[0];
    let x_hi = exp.grid[exp.grid.len() - 1];
    let x_hi = if x_hi > x_lo { x_hi } else { x_lo + 1.0 };

    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let y_label = match exp.plot_metric {
        Metric::EffectiveCapacity => "effective capacity (bits/s)",
        Metric::SuccessRate => "PU success rate",
    };
    let mut chart = ChartBuilder::on(&root)
        .caption(&exp.description, ("sans-serif", 16))
        .margin(16)
        .x_label_area_size(40)
        .y_label_area_size(80)
        .build_cartesian_2d(x_lo..x_hi, y_lo..y_hi)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc(exp.sweep.column())
        .y_desc(y_label)
        .draw()
        .map_err(plot_err)?;

    for (k, (label, pts)) in series.into_iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(pts, color.stroke_width(2)))
            .map_err(plot_err)?
            .label(label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}
