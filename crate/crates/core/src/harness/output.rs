//! CSV, SVG and manifest writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{Band, LikelihoodReport};
use crate::error::Result;

pub const CURVE_HEADER: &str = "iteration,mean_db,min_db,max_db";
pub const LIKELIHOOD_HEADER: &str = "hypothesis,true_likelihood,estimated_likelihood";

pub fn curve_csv(band: &Band) -> String {
    let mut out = String::with_capacity(48 * (band.len() + 1));
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for t in 0..band.len() {
        let _ = writeln!(out, "{t},{},{},{}", band.mean[t], band.min[t], band.max[t]);
    }
    out
}

pub fn likelihood_csv(report: &LikelihoodReport) -> String {
    let mut out = String::from(LIKELIHOOD_HEADER);
    out.push('\n');
    for ((label, t), e) in report
        .labels
        .iter()
        .zip(&report.true_likelihood)
        .zip(&report.estimated_likelihood)
    {
        let _ = writeln!(out, "{label},{t},{e}");
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

fn svg_open(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn axes(out: &mut String, x_label: &str, y_label: &str, y_lo: f64, y_hi: f64) {
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN / 2.0, MARGIN);
    let _ = write!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{y_hi:.1}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{y_lo:.1}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 16.0,
        escape(x_label),
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label),
        x0 - 4.0,
        y1 + 4.0,
        x0 - 4.0,
        y0,
    );
}

/// Shaded min–max band with the mean drawn on top.
pub fn curve_svg(band: &Band, title: &str) -> String {
    let mut out = String::new();
    svg_open(&mut out, title);
    let finite = band
        .min
        .iter()
        .chain(&band.max)
        .copied()
        .filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if band.is_empty() || !lo.is_finite() {
        axes(&mut out, "iteration", "cost (dB)", 0.0, 1.0);
        out.push_str("</svg>\n");
        return out;
    }
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        (lo - 1.0, hi + 1.0)
    };
    axes(&mut out, "iteration", "cost (dB)", lo, hi);
    let n = band.len().max(2) - 1;
    let x = |t: usize| MARGIN + (WIDTH - 1.5 * MARGIN) * t as f64 / n as f64;
    let y =
        |v: f64| (HEIGHT - MARGIN) - (HEIGHT - 2.0 * MARGIN) * (v.clamp(lo, hi) - lo) / (hi - lo);
    out.push_str("<polygon fill=\"#f4b6b6\" stroke=\"none\" points=\"");
    for t in 0..band.len() {
        let _ = write!(out, "{:.2},{:.2} ", x(t), y(band.max[t]));
    }
    for t in (0..band.len()).rev() {
        let _ = write!(out, "{:.2},{:.2} ", x(t), y(band.min[t]));
    }
    out.push_str("\"/>\n<polyline fill=\"none\" stroke=\"#c00000\" stroke-width=\"1.5\" points=\"");
    for t in 0..band.len() {
        let _ = write!(out, "{:.2},{:.2} ", x(t), y(band.mean[t]));
    }
    out.push_str("\"/>\n</svg>\n");
    out
}

/// Paired bars of true and estimated likelihoods.
pub fn likelihood_svg(report: &LikelihoodReport, title: &str) -> String {
    let mut out = String::new();
    svg_open(&mut out, title);
    axes(&mut out, "hypothesis", "likelihood", 0.0, 1.0);
    let n = report.labels.len().max(1) as f64;
    let slot = (WIDTH - 1.5 * MARGIN) / n;
    let bar = slot * 0.35;
    let h = |v: f64| (HEIGHT - 2.0 * MARGIN) * v.clamp(0.0, 1.0);
    for (idx, label) in report.labels.iter().enumerate() {
        let left = MARGIN + slot * idx as f64 + slot * 0.15;
        for (offset, value, colour) in [
            (0.0, report.true_likelihood[idx], "#4060c0"),
            (bar, report.estimated_likelihood[idx], "#c00000"),
        ] {
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{bar:.2}\" height=\"{:.2}\" fill=\"{colour}\"/>",
                left + offset,
                HEIGHT - MARGIN - h(value),
                h(value)
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            left + bar,
            HEIGHT - MARGIN + 16.0,
            escape(label)
        );
    }
    let _ = write!(
        out,
        "<rect x=\"{0}\" y=\"36\" width=\"10\" height=\"10\" fill=\"#4060c0\"/><text x=\"{1}\" y=\"45\">true</text>\n\
         <rect x=\"{2}\" y=\"36\" width=\"10\" height=\"10\" fill=\"#c00000\"/><text x=\"{3}\" y=\"45\">estimated</text>\n</svg>\n",
        WIDTH - 190.0,
        WIDTH - 176.0,
        WIDTH - 120.0,
        WIDTH - 106.0
    );
    out
}

/// Run record written next to every set of outputs.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest<C: Serialize, S: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: C,
    pub parallel_feature: bool,
    pub workers: usize,
    pub outputs: Vec<String>,
    pub summary: S,
}

impl<C: Serialize, S: Serialize> Manifest<C, S> {
    pub fn new(command: &str, seed: u64, config: C, summary: S) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            config,
            parallel_feature: cfg!(feature = "parallel"),
            workers: super::par::worker_count(),
            outputs: Vec::new(),
            summary,
        }
    }
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

pub fn write_manifest<C: Serialize, S: Serialize>(
    dir: &Path,
    manifest: &Manifest<C, S>,
) -> Result<()> {
    write_file(
        dir,
        "manifest.json",
        &serde_json::to_string_pretty(manifest)?,
    )
}
