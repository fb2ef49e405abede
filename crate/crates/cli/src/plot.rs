//! Plot emission: convert a run directory's CSV and snapshot files into
//! simple standalone SVG line plots.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN: f64 = 70.0;
const COLORS: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

fn svg_plot(title: &str, x_label: &str, series: &[Series]) -> String {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                xs.push(x);
                ys.push(y);
            }
        }
    }
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"28\" font-family=\"monospace\" font-size=\"16\" text-anchor=\"middle\">{title}</text>\n",
        WIDTH / 2.0
    ));
    // axis frame
    out.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    ));
    // range labels
    out.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">{x_label} in [{x0:.4e}, {x1:.4e}]</text>\n",
        HEIGHT - MARGIN + 30.0
    ));
    out.push_str(&format!(
        "<text x=\"12\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" transform=\"rotate(-90 12 {})\">range [{y0:.4e}, {y1:.4e}]</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    ));
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.4\"/>\n",
            pts.join(" ")
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" fill=\"{color}\">{}</text>\n",
            WIDTH - MARGIN + 6.0 - 160.0,
            MARGIN + 16.0 + 16.0 * i as f64,
            s.label
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.04 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

struct Csv {
    header: Vec<String>,
    columns: Vec<Vec<f64>>,
}

fn read_csv(path: &Path) -> Result<Csv> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut header = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if header.is_empty() {
            header = line.split(',').map(|s| s.trim().to_string()).collect();
            columns = vec![Vec::new(); header.len()];
            continue;
        }
        for (i, cell) in line.split(',').enumerate() {
            if i < columns.len() {
                columns[i].push(cell.trim().parse::<f64>().unwrap_or(f64::NAN));
            }
        }
    }
    if header.is_empty() {
        bail!("{} has no header row", path.display());
    }
    Ok(Csv { header, columns })
}

fn column<'a>(csv: &'a Csv, name: &str) -> Result<&'a [f64]> {
    let idx = csv
        .header
        .iter()
        .position(|h| h == name)
        .with_context(|| format!("missing column {name}"))?;
    Ok(&csv.columns[idx])
}

/// Emit one SVG per diagnostic group plus a snapshot overlay.
pub fn plot_run_dir(dir: &Path) -> Result<Vec<String>> {
    let csv = read_csv(&dir.join("diagnostics.csv"))?;
    let t = column(&csv, "t")?.to_vec();
    let mut written = Vec::new();

    let groups: &[(&str, &[&str])] = &[
        ("extrema", &["sup_f", "inf_f"]),
        ("norms", &["l2_sq", "l1", "wiener1", "wiener2d"]),
        ("dissipation", &["dissipation"]),
        ("balance", &["balance_relative_residual"]),
        ("slope", &["sup_slope"]),
    ];
    for (name, cols) in groups {
        let series: Vec<Series> = cols
            .iter()
            .map(|c| {
                Ok(Series {
                    label: c.to_string(),
                    points: t.iter().copied().zip(column(&csv, c)?.iter().copied()).collect(),
                })
            })
            .collect::<Result<_>>()?;
        let file = dir.join(format!("{name}.svg"));
        fs::write(&file, svg_plot(name, "t", &series))?;
        written.push(file.display().to_string());
    }

    // overlay of up to eight stored snapshots
    let snapdir = dir.join("snapshots");
    if snapdir.is_dir() {
        let mut files: Vec<_> = fs::read_dir(&snapdir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().map(|x| x == "txt").unwrap_or(false))
            .collect();
        files.sort();
        if !files.is_empty() {
            let step = (files.len() / 8).max(1);
            let mut series = Vec::new();
            for p in files.iter().step_by(step) {
                let text = fs::read_to_string(p)?;
                let mut label = p.file_stem().unwrap().to_string_lossy().to_string();
                let mut points = Vec::new();
                for line in text.lines() {
                    if let Some(rest) = line.strip_prefix("# t = ") {
                        if let Ok(tv) = rest.trim().parse::<f64>() {
                            label = format!("t = {tv:.3}");
                        }
                        continue;
                    }
                    let mut it = line.split_whitespace();
                    if let (Some(a), Some(b)) = (it.next(), it.next()) {
                        if let (Ok(x), Ok(y)) = (a.parse(), b.parse()) {
                            points.push((x, y));
                        }
                    }
                }
                series.push(Series { label, points });
            }
            let file = dir.join("snapshots.svg");
            fs::write(&file, svg_plot("interface snapshots", "x", &series))?;
            written.push(file.display().to_string());
        }
    }
    Ok(written)
}
