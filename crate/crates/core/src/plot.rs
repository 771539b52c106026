//! Static SVG charts: learning curves with a standard-error band, and final
//! G-mean against labelling budget.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{domain, Result};
use crate::eval::AggregateCurve;
use crate::experiment::SweepRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

struct Frame {
    x_max: f64,
    log_x: Option<f64>,
}

impl Frame {
    fn plot_w() -> f64 {
        WIDTH - LEFT - RIGHT
    }

    fn plot_h() -> f64 {
        HEIGHT - TOP - BOTTOM
    }

    fn x(&self, v: f64) -> f64 {
        let frac = match self.log_x {
            Some(min) => (v.max(min) / min).ln() / (self.x_max / min).ln(),
            None => v / self.x_max,
        };
        LEFT + frac * Self::plot_w()
    }

    fn y(&self, g: f64) -> f64 {
        TOP + (1.0 - g.clamp(0.0, 1.0)) * Self::plot_h()
    }
}

fn open_svg(s: &mut String, frame: &Frame, x_label: &str, x_ticks: &[(f64, String)]) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1) = (LEFT, LEFT + Frame::plot_w());
    let (y0, y1) = (TOP, TOP + Frame::plot_h());
    for i in 0..=5 {
        let g = i as f64 / 5.0;
        let y = frame.y(g);
        let _ = writeln!(
            s,
            r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#e0e0e0"/><text x="{}" y="{:.2}" text-anchor="end">{g:.1}</text>"##,
            x0 - 6.0,
            y + 4.0
        );
    }
    for (v, label) in x_ticks {
        let x = frame.x(*v);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{y1}" x2="{x:.2}" y2="{}" stroke="#333"/><text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"##,
            y1 + 5.0,
            y1 + 18.0
        );
    }
    let _ = writeln!(
        s,
        r##"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
        Frame::plot_w(),
        Frame::plot_h()
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        LEFT + Frame::plot_w() / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">G-mean</text>"#,
        TOP + Frame::plot_h() / 2.0,
        TOP + Frame::plot_h() / 2.0
    );
}

fn legend(s: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 14.0 + 20.0 * i as f64;
        let x = WIDTH - RIGHT + 14.0;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}">{name}</text>"#,
            x + 22.0,
            x + 28.0,
            y + 4.0
        );
    }
}

fn write_svg(path: &Path, mut s: String) -> Result<()> {
    s.push_str("</svg>\n");
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, s)?;
    Ok(())
}

/// Learning curves: one mean line and shaded standard-error band per
/// series, and a vertical rule at `drift_step` when given.
pub fn render_curves(
    series: &[(String, &AggregateCurve)],
    drift_step: Option<u64>,
    path: &Path,
) -> Result<()> {
    if series.is_empty() {
        return Err(domain("nothing to plot"));
    }
    let horizon = series
        .iter()
        .map(|(_, a)| a.len())
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let frame = Frame {
        x_max: horizon,
        log_x: None,
    };
    let ticks: Vec<(f64, String)> = (0..=5)
        .map(|i| {
            let v = (horizon * i as f64 / 5.0).round();
            (v, format!("{v}"))
        })
        .collect();
    let mut s = String::new();
    open_svg(&mut s, &frame, "time step", &ticks);

    // downsample long curves to at most ~1000 vertices per path
    for (i, (_, agg)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let stride = (agg.len() / 1000).max(1);
        let idx: Vec<usize> = (0..agg.len())
            .step_by(stride)
            .chain(agg.len().checked_sub(1))
            .collect();
        let mut band = String::new();
        for &t in &idx {
            let _ = write!(
                band,
                "{:.2},{:.2} ",
                frame.x(t as f64),
                frame.y(agg.mean[t] + agg.stderr[t])
            );
        }
        for &t in idx.iter().rev() {
            let _ = write!(
                band,
                "{:.2},{:.2} ",
                frame.x(t as f64),
                frame.y(agg.mean[t] - agg.stderr[t])
            );
        }
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            band.trim_end()
        );
        let line: Vec<String> = idx
            .iter()
            .map(|&t| format!("{:.2},{:.2}", frame.x(t as f64), frame.y(agg.mean[t])))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            line.join(" ")
        );
    }
    if let Some(d) = drift_step {
        let x = frame.x(d as f64);
        let _ = writeln!(
            s,
            r##"<line class="drift" x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{}" stroke="#555" stroke-dasharray="6,4"/>"##,
            TOP + Frame::plot_h()
        );
    }
    let names: Vec<&str> = series.iter().map(|(n, _)| n.as_str()).collect();
    legend(&mut s, &names);
    write_svg(path, s)
}

/// Final G-mean against budget (log axis), one line with error bars per
/// learner.
pub fn render_sweep(rows: &[SweepRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(domain("nothing to plot"));
    }
    let mut budgets: Vec<f64> = rows.iter().map(|r| r.budget).collect();
    budgets.sort_by(f64::total_cmp);
    budgets.dedup();
    let min_positive = budgets.iter().copied().find(|&b| b > 0.0).unwrap_or(0.01);
    let x_max = budgets
        .last()
        .copied()
        .unwrap_or(1.0)
        .max(min_positive * 1.0001);
    let frame = Frame {
        x_max,
        log_x: Some(min_positive),
    };
    let ticks: Vec<(f64, String)> = budgets.iter().map(|&b| (b, format!("{b}"))).collect();
    let mut s = String::new();
    open_svg(&mut s, &frame, "budget B", &ticks);

    let mut names: Vec<String> = Vec::new();
    for r in rows {
        if !names.contains(&r.learner.to_string()) {
            names.push(r.learner.to_string());
        }
    }
    for (i, name) in names.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts: Vec<&SweepRow> = rows
            .iter()
            .filter(|r| &r.learner.to_string() == name)
            .collect();
        pts.sort_by(|a, b| a.budget.total_cmp(&b.budget));
        let line: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", frame.x(r.budget), frame.y(r.mean)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            line.join(" ")
        );
        for r in pts {
            let (x, y) = (frame.x(r.budget), frame.y(r.mean));
            let _ = writeln!(
                s,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/><line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/>"#,
                frame.y(r.mean + r.stderr),
                frame.y(r.mean - r.stderr)
            );
        }
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    legend(&mut s, &refs);
    write_svg(path, s)
}
