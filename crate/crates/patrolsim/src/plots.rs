//! Static SVG charts written by hand: monthly DIR, parity gap and Gini
//! lines per cell, and neighborhood scatter plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use patrolsim_core::stats::NeighborhoodObservation;

use crate::error::Result;
use crate::reports::{write, MonthlyRow};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn num(v: f64) -> String {
    format!("{v:.2}")
}

/// What to draw at a month whose value is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gap {
    None,
    Infinite,
    Undefined,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if (hi - lo).abs() < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

fn ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

fn axes(svg: &mut String, f: &Frame, title: &str, x_label: &str, y_label: &str, x_ticks: &[f64]) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(svg, r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#, num((x0 + x1) / 2.0), escape(title));
    let _ = writeln!(svg, r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444"/>"##, num(x0), num(y0), num(x1 - x0), num(y1 - y0));
    for &t in x_ticks {
        let x = f.px(t);
        let label = if t.fract() == 0.0 { format!("{t}") } else { format!("{t:.2}") };
        let _ = writeln!(svg, r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#444"/>"##, num(x), num(y1), num(y1 + 5.0));
        let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#, num(x), num(y1 + 18.0), label);
    }
    for t in ticks(f.y.0, f.y.1, 5) {
        let y = f.py(t);
        let _ = writeln!(svg, r##"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#ddd"/>"##, num(x0), num(y), num(x1));
        let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#, num(x0 - 6.0), num(y + 4.0), format_tick(t));
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#, num((x0 + x1) / 2.0), num(HEIGHT - 16.0), escape(x_label));
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{0}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        num((y0 + y1) / 2.0),
        escape(y_label)
    );
}

fn format_tick(v: f64) -> String {
    if v.abs() >= 1000.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

fn legend(svg: &mut String, entries: &[(String, &str)], notes: &[String]) {
    let x = WIDTH - RIGHT + 12.0;
    let mut y = TOP + 8.0;
    for (name, color) in entries {
        let _ = writeln!(svg, r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{3}" stroke-width="2"/>"#, num(x), num(y), num(x + 18.0), color);
        let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="11">{}</text>"#, num(x + 24.0), num(y + 4.0), escape(name));
        y += 16.0;
    }
    for note in notes {
        y += 4.0;
        let _ = writeln!(svg, r##"<text x="{}" y="{}" font-size="10" fill="#555">{}</text>"##, num(x), num(y + 4.0), escape(note));
        y += 14.0;
    }
}

fn document(body: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{body}</svg>\n",
        w = WIDTH,
        h = HEIGHT
    )
}

struct Series {
    name: String,
    points: Vec<(f64, Option<f64>, Gap)>,
}

/// Line chart with gaps. Values above `clip` are drawn at the clip line
/// with an open circle.
fn line_chart(title: &str, y_label: &str, series: &[Series], clip: Option<f64>, baseline: Option<f64>) -> String {
    let values: Vec<f64> = series.iter().flat_map(|s| s.points.iter().filter_map(|p| p.1)).map(|v| clip.map_or(v, |c| v.min(c))).collect();
    let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if let Some(b) = baseline {
        lo = lo.min(b);
        hi = hi.max(b);
    }
    let any_gap = series.iter().any(|s| s.points.iter().any(|p| p.2 != Gap::None));
    if any_gap {
        if let Some(c) = clip {
            hi = hi.max(c);
        }
    }
    let frame = Frame { x: (1.5, 12.5), y: padded(lo, hi) };
    let mut svg = String::new();
    axes(&mut svg, &frame, title, "Month", y_label, &(2..=12).map(f64::from).collect::<Vec<_>>());
    if let Some(b) = baseline {
        let y = frame.py(b);
        let _ = writeln!(svg, r##"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#888" stroke-dasharray="4 3"/>"##, num(LEFT), num(y), num(WIDTH - RIGHT));
    }
    let mut clipped = false;
    let (mut saw_inf, mut saw_undef) = (false, false);
    let mut entries = Vec::new();
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        entries.push((s.name.clone(), color));
        let mut run: Vec<(f64, f64)> = Vec::new();
        let flush = |run: &mut Vec<(f64, f64)>, svg: &mut String| {
            if run.len() > 1 {
                let pts: Vec<String> = run.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
                let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "));
            }
            run.clear();
        };
        for &(x, v, gap) in &s.points {
            match v {
                Some(v) => {
                    let over = clip.is_some_and(|c| v > c);
                    let shown = clip.map_or(v, |c| v.min(c));
                    let (px, py) = (frame.px(x), frame.py(shown));
                    run.push((px, py));
                    let fill = if over { "white" } else { color };
                    clipped |= over;
                    let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="3" fill="{fill}" stroke="{color}"/>"#, num(px), num(py));
                }
                None => {
                    flush(&mut run, &mut svg);
                    let px = frame.px(x);
                    match gap {
                        Gap::Infinite => {
                            saw_inf = true;
                            let py = frame.py(frame.y.1) + 8.0;
                            let _ = writeln!(
                                svg,
                                r#"<path d="M{} {} l5 9 l-10 0 z" fill="{color}"/>"#,
                                num(px),
                                num(py - 4.0)
                            );
                        }
                        Gap::Undefined => {
                            saw_undef = true;
                            let py = frame.py(frame.y.0) - 8.0;
                            let _ = writeln!(
                                svg,
                                r#"<path d="M{0} {1} l8 8 M{2} {1} l-8 8" stroke="{color}" stroke-width="2"/>"#,
                                num(px - 4.0),
                                num(py - 4.0),
                                num(px + 4.0)
                            );
                        }
                        Gap::None => {}
                    }
                }
            }
        }
        flush(&mut run, &mut svg);
    }
    let mut notes = Vec::new();
    if clipped {
        notes.push(format!("open circle: value above {} (clipped)", clip.unwrap_or_default()));
    }
    if saw_inf {
        notes.push("triangle: infinite (White rate 0)".into());
    }
    if saw_undef {
        notes.push("cross: undefined (0/0)".into());
    }
    legend(&mut svg, &entries, &notes);
    document(&svg)
}

fn group_series(rows: &[MonthlyRow], value: impl Fn(&MonthlyRow) -> (Option<f64>, Gap)) -> Vec<Series> {
    let mut by: BTreeMap<String, Vec<(f64, Option<f64>, Gap)>> = BTreeMap::new();
    for r in rows {
        let (v, g) = value(r);
        by.entry(r.series()).or_default().push((f64::from(r.month), v, g));
    }
    by.into_iter()
        .map(|(name, mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { name, points }
        })
        .collect()
}

/// Write dir.svg, parity_gap.svg and gini.svg. Returns the written paths;
/// nothing is written for empty input.
pub fn emit_monthly_plots(rows: &[MonthlyRow], dir: &Path, dir_clip: f64) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        log::warn!("no monthly records; skipping plots");
        return Ok(Vec::new());
    }
    let dirs = group_series(rows, |r| {
        let gap = match r.dir_flag.as_str() {
            "infinite_positive_over_zero" => Gap::Infinite,
            "undefined_zero_over_zero" => Gap::Undefined,
            _ => Gap::None,
        };
        (r.dir, gap)
    });
    let gaps = group_series(rows, |r| (r.parity_gap, Gap::None));
    let ginis = group_series(rows, |r| (r.gini, Gap::None));
    let charts = [
        ("dir.svg", line_chart("Monthly disparate impact ratio", "DIR (Black / White detection rate)", &dirs, Some(dir_clip), Some(1.0))),
        ("parity_gap.svg", line_chart("Monthly parity gap", "Black minus White detection rate", &gaps, None, Some(0.0))),
        ("gini.svg", line_chart("Monthly Gini of group detection rates", "Gini coefficient", &ginis, None, None)),
    ];
    let mut out = Vec::new();
    for (name, svg) in charts {
        let p = dir.join(name);
        write(&p, svg.as_bytes())?;
        out.push(p);
    }
    Ok(out)
}

fn scatter(title: &str, x_label: &str, obs: &[NeighborhoodObservation], x: impl Fn(&NeighborhoodObservation) -> f64) -> String {
    let xs: Vec<f64> = obs.iter().map(&x).collect();
    let ys: Vec<f64> = obs.iter().map(|o| o.detection_rate).collect();
    let fx = padded(xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let fy = padded(ys.iter().copied().fold(f64::INFINITY, f64::min), ys.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let frame = Frame { x: fx, y: fy };
    let mut svg = String::new();
    axes(&mut svg, &frame, title, x_label, "Detection rate (detections per crime)", &ticks(fx.0, fx.1, 5));
    let mut modes: Vec<String> = obs.iter().map(|o| format!("{} {} {}", o.city, o.year, o.mode)).collect();
    modes.sort();
    modes.dedup();
    for (o, (xv, yv)) in obs.iter().zip(xs.iter().zip(&ys)) {
        let key = format!("{} {} {}", o.city, o.year, o.mode);
        let color = PALETTE[modes.iter().position(|m| *m == key).unwrap_or(0) % PALETTE.len()];
        let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="3.5" fill="{color}" fill-opacity="0.7"/>"#, num(frame.px(*xv)), num(frame.py(*yv)));
    }
    let entries: Vec<(String, &str)> = modes.iter().enumerate().map(|(i, m)| (m.clone(), PALETTE[i % PALETTE.len()])).collect();
    legend(&mut svg, &entries, &[format!("n = {}", obs.len())]);
    document(&svg)
}

/// Write scatter_pct_black.svg and scatter_pct_white.svg.
pub fn emit_scatter_plots(obs: &[NeighborhoodObservation], dir: &Path) -> Result<Vec<PathBuf>> {
    if obs.is_empty() {
        log::warn!("no neighborhood observations; skipping scatter plots");
        return Ok(Vec::new());
    }
    let charts = [
        ("scatter_pct_black.svg", scatter("Detection rate vs. Black population share", "Black population share (%)", obs, |o| 100.0 * o.pct_black)),
        ("scatter_pct_white.svg", scatter("Detection rate vs. White population share", "White population share (%)", obs, |o| 100.0 * o.pct_white)),
    ];
    let mut out = Vec::new();
    for (name, svg) in charts {
        let p = dir.join(name);
        write(&p, svg.as_bytes())?;
        out.push(p);
    }
    Ok(out)
}
