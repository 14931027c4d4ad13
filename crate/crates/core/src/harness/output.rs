//! Result files: per-algorithm regret and event CSVs, a summary table and an
//! SVG chart of the mean regret curves.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::runner::RunSummary;
use crate::error::{io_error, Result};

/// Write every output file into `dir` (created if missing) and return their
/// paths.
pub fn write_outputs(summary: &RunSummary, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut written = emit_csv(summary, dir)?;
    written.push(emit_svg(summary, dir)?);
    Ok(written)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

/// `regret_<algo>.csv`, `events_<algo>.csv` and `summary.csv`.
pub fn emit_csv(summary: &RunSummary, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for algo in &summary.algorithms {
        let name = algo.algorithm.name();

        let mut text = String::with_capacity(summary.horizon * 24);
        text.push_str("t,mean_cumulative_regret,std\n");
        for (i, (m, s)) in algo.mean.iter().zip(&algo.std).enumerate() {
            let _ = writeln!(text, "{},{},{}", i + 1, m, s);
        }
        let path = dir.join(format!("regret_{name}.csv"));
        write_file(&path, &text)?;
        written.push(path);

        let mut text = String::from("replication,t,arm,event\n");
        for e in &algo.events {
            let _ = writeln!(text, "{},{},{},{}", e.replication, e.t, e.arm + 1, e.kind.name());
        }
        let path = dir.join(format!("events_{name}.csv"));
        write_file(&path, &text)?;
        written.push(path);
    }

    let mut text = String::from("algorithm,final_mean_regret,final_std,mean_restarts,forced_fraction\n");
    for algo in &summary.algorithms {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            algo.algorithm.name(),
            algo.final_mean(),
            algo.final_std(),
            algo.mean_restarts(),
            algo.forced_fraction
        );
    }
    let path = dir.join("summary.csv");
    write_file(&path, &text)?;
    written.push(path);
    Ok(written)
}

const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#7f7f7f"];
const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 540.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 230.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 70.0;
const MAX_POINTS: usize = 400;

/// `regret.svg`: mean cumulative regret per algorithm with a ±1 std band.
pub fn emit_svg(summary: &RunSummary, dir: &Path) -> Result<PathBuf> {
    let path = dir.join("regret.svg");
    write_file(&path, &render_svg(summary))?;
    Ok(path)
}

/// Round `x` up to 1, 2 or 5 times a power of ten.
fn nice_step(span: f64, ticks: usize) -> f64 {
    let raw = (span / ticks as f64).max(f64::MIN_POSITIVE);
    let mag = 10f64.powf(raw.log10().floor());
    let frac = raw / mag;
    let nice = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn sample_indices(len: usize) -> Vec<usize> {
    if len <= MAX_POINTS {
        return (0..len).collect();
    }
    let mut idx: Vec<usize> = (0..MAX_POINTS).map(|k| k * (len - 1) / (MAX_POINTS - 1)).collect();
    idx.dedup();
    idx
}

pub fn render_svg(summary: &RunSummary) -> String {
    let horizon = summary.horizon.max(1) as f64;
    let top = summary
        .algorithms
        .iter()
        .flat_map(|a| a.mean.iter().zip(&a.std).map(|(m, s)| m + s))
        .fold(0.0f64, f64::max);
    let y_step = nice_step(if top > 0.0 { top } else { 1.0 }, 5);
    let y_max = (top / y_step).ceil().max(1.0) * y_step;
    let x_step = nice_step(horizon, 5);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |t: f64| LEFT + t / horizon * plot_w;
    let sy = |v: f64| TOP + plot_h - v.clamp(0.0, y_max) / y_max * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // grid and ticks
    let mut v = 0.0;
    while v <= y_max + 1e-9 * y_max {
        let y = sy(v);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0,
            format_tick(v)
        );
        v += y_step;
    }
    let mut t = 0.0;
    while t <= horizon + 1e-9 * horizon {
        let x = sx(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 20.0,
            format_tick(t)
        );
        t += x_step;
    }
    let _ = writeln!(
        out,
        r#"<polyline points="{LEFT},{TOP} {LEFT},{:.2} {:.2},{:.2}" fill="none" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">time step t</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">mean cumulative risk regret</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    // series
    for (k, algo) in summary.algorithms.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let idx = sample_indices(algo.mean.len());
        let mut band = String::new();
        for &i in &idx {
            let _ = write!(band, "{:.2},{:.2} ", sx((i + 1) as f64), sy(algo.mean[i] + algo.std[i]));
        }
        for &i in idx.iter().rev() {
            let _ = write!(band, "{:.2},{:.2} ", sx((i + 1) as f64), sy(algo.mean[i] - algo.std[i]));
        }
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
            band.trim_end()
        );
        let mut line = String::new();
        for &i in &idx {
            let _ = write!(line, "{:.2},{:.2} ", sx((i + 1) as f64), sy(algo.mean[i]));
        }
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.trim_end()
        );
    }

    // legend
    let lx = LEFT + plot_w + 20.0;
    for (k, algo) in summary.algorithms.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let y = TOP + 10.0 + 22.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="3"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 24.0,
            lx + 30.0,
            y + 4.0,
            algo.algorithm.name()
        );
    }
    out.push_str("</svg>\n");
    out
}

fn format_tick(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nice_steps() {
        assert_eq!(nice_step(40000.0, 5), 10000.0);
        assert_eq!(nice_step(950.0, 5), 200.0);
        assert_eq!(nice_step(0.3, 5), 0.1);
        assert_eq!(format_tick(20000.0), "20000");
        assert_eq!(format_tick(0.25), "0.25");
    }

    #[test]
    fn sampling_keeps_the_ends() {
        let idx = sample_indices(40000);
        assert_eq!(idx.first(), Some(&0));
        assert_eq!(idx.last(), Some(&39999));
        assert!(idx.len() <= MAX_POINTS);
        assert_eq!(sample_indices(3), vec![0, 1, 2]);
    }
}
