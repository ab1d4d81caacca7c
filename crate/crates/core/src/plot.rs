//! Static SVG plots: ROC curves and Manhattan plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::power::RocCurve;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Maps data coordinates onto the plotting area.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let span = if self.x1 > self.x0 {
            self.x1 - self.x0
        } else {
            1.0
        };
        MARGIN + (x - self.x0) / span * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        let span = if self.y1 > self.y0 {
            self.y1 - self.y0
        } else {
            1.0
        };
        HEIGHT - MARGIN - (y - self.y0) / span * (HEIGHT - 2.0 * MARGIN)
    }
}

fn open(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    let _ = writeln!(
        out,
        r#"<rect class="axes" x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
}

fn ticks(out: &mut String, f: &Frame, xs: &[f64], ys: &[f64]) {
    for &x in xs {
        let _ = writeln!(
            out,
            r#"<text class="xtick" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            f.px(x),
            HEIGHT - MARGIN + 16.0,
            trim(x)
        );
    }
    for &y in ys {
        let _ = writeln!(
            out,
            r#"<text class="ytick" x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN - 6.0,
            f.py(y) + 4.0,
            trim(y)
        );
    }
}

fn trim(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_owned()
}

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi - lo) / count as f64;
    (0..=count).map(|i| lo + step * i as f64).collect()
}

/// ROC curves, one polyline per `(label, curve)`, with the chance diagonal.
pub fn roc_svg(title: &str, curves: &[(String, RocCurve)]) -> String {
    let f = Frame {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: 1.0,
    };
    let mut out = String::new();
    open(&mut out, title, "1 - specificity", "sensitivity");
    ticks(
        &mut out,
        &f,
        &nice_ticks(0.0, 1.0, 5),
        &nice_ticks(0.0, 1.0, 5),
    );
    let _ = writeln!(
        out,
        r#"<line class="chance" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="grey" stroke-dasharray="4 4"/>"#,
        f.px(0.0),
        f.py(0.0),
        f.px(1.0),
        f.py(1.0)
    );
    for (k, (label, curve)) in curves.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = curve
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="roc" data-label="{}" points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            escape(label),
            pts.join(" ")
        );
        let ly = MARGIN + 16.0 + 16.0 * k as f64;
        let lx = WIDTH - MARGIN - 150.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Manhattan plot of `(position, -log10 p)` with a red vertical line at the
/// causal position when given.
pub fn manhattan_svg(title: &str, points: &[(f64, f64)], causal_position: Option<f64>) -> String {
    let finite = points
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 1.0f64);
    for &(x, y) in finite.clone() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if let Some(c) = causal_position {
        x0 = x0.min(c);
        x1 = x1.max(c);
    }
    if !x0.is_finite() {
        x0 = 0.0;
        x1 = 1.0;
    }
    let f = Frame {
        x0,
        x1,
        y0: 0.0,
        y1: y1.ceil(),
    };
    let mut out = String::new();
    open(&mut out, title, "position", "-log10(p)");
    ticks(
        &mut out,
        &f,
        &nice_ticks(x0, x1, 4),
        &nice_ticks(0.0, y1.ceil(), 4),
    );
    for &(x, y) in finite {
        let _ = writeln!(
            out,
            r#"<circle class="snp" cx="{:.2}" cy="{:.2}" r="2" fill="{}"/>"#,
            f.px(x),
            f.py(y),
            PALETTE[0]
        );
    }
    if let Some(c) = causal_position {
        let _ = writeln!(
            out,
            r#"<line class="causal" data-position="{c}" x1="{:.2}" y1="{MARGIN}" x2="{:.2}" y2="{}" stroke="red" stroke-width="1.5"/>"#,
            f.px(c),
            f.px(c),
            HEIGHT - MARGIN
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(path: impl AsRef<Path>, svg: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
