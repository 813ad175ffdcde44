//! Static SVG figures for selection curves and dendrograms.

use mvlang::phylo::PhyloTree;
use plotters::prelude::*;

use crate::error::CliError;

fn plot_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("cannot draw plot: {e}"))
}

/// Line chart of `points`, with an optional highlighted point.
pub fn curve_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64)],
    mark: Option<(f64, f64)>,
) -> Result<String, CliError> {
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (640, 420)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let (x0, x1) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
        let (y0, y1) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
        let pad = ((y1 - y0) * 0.05).max(1e-9);
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(60)
            .build_cartesian_2d(x0..x1.max(x0 + 1.0), (y0 - pad)..(y1 + pad))
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc(x_label)
            .y_desc(y_label)
            .draw()
            .map_err(plot_err)?;
        chart
            .draw_series(LineSeries::new(points.iter().copied(), BLUE.stroke_width(2)))
            .map_err(plot_err)?;
        chart
            .draw_series(points.iter().map(|&p| Circle::new(p, 3, BLUE.filled())))
            .map_err(plot_err)?;
        if let Some(p) = mark {
            chart
                .draw_series(std::iter::once(Circle::new(p, 6, RED.filled())))
                .map_err(plot_err)?;
        }
        root.present().map_err(plot_err)?;
    }
    Ok(svg)
}

/// Rectangular dendrogram with leaves along the bottom, using monotone
/// heights so inversions do not cross.
pub fn dendrogram_svg(tree: &PhyloTree, title: &str) -> Result<String, CliError> {
    let heights = tree.monotone_heights();
    let mut x = vec![0.0; tree.len()];
    let mut next_leaf = 0.0;
    for id in tree.postorder() {
        let node = tree.node(id);
        if node.is_leaf() {
            x[id] = next_leaf;
            next_leaf += 1.0;
        } else {
            let xs: Vec<f64> = node.children.iter().map(|&c| x[c]).collect();
            x[id] = xs.iter().sum::<f64>() / xs.len() as f64;
        }
    }
    let top = heights[tree.root()].max(1e-9);
    let n = tree.n_leaves();
    let width = (40 + 28 * n).max(480) as u32;

    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (width, 480)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(50)
            .y_label_area_size(60)
            .build_cartesian_2d(-0.5..(n as f64 - 0.5), 0.0..top * 1.05)
            .map_err(plot_err)?;
        let mut names = vec![String::new(); n];
        for id in tree.leaves() {
            if let Some(l) = &tree.node(id).label {
                names[x[id] as usize] = l.clone();
            }
        }
        chart
            .configure_mesh()
            .disable_x_mesh()
            .x_labels(n)
            .x_label_formatter(&|v| {
                let i = v.round();
                if (v - i).abs() < 1e-6 && i >= 0.0 && (i as usize) < names.len() {
                    names[i as usize].clone()
                } else {
                    String::new()
                }
            })
            .y_desc("height")
            .draw()
            .map_err(plot_err)?;
        let mut segments = Vec::new();
        for id in 0..tree.len() {
            let node = tree.node(id);
            if node.is_leaf() {
                continue;
            }
            let h = heights[id];
            let xs: Vec<f64> = node.children.iter().map(|&c| x[c]).collect();
            let (lo, hi) = xs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            segments.push(vec![(lo, h), (hi, h)]);
            for &c in &node.children {
                segments.push(vec![(x[c], heights[c]), (x[c], h)]);
            }
        }
        chart
            .draw_series(segments.into_iter().map(|s| PathElement::new(s, BLACK.stroke_width(1))))
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    Ok(svg)
}
