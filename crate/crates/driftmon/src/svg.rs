//! Hand-built SVG line charts for the per-month report series.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One plotted line; `points[i]` belongs to `x_labels[i]` of the chart.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<f64>,
}

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 540.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 930.0;
const TOP: f64 = 60.0;
const BOTTOM: f64 = 470.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn coord(v: f64) -> String {
    format!("{v:.2}")
}

/// Render a 960×540 line chart: shared x labels (typically months), one
/// polyline per series, y axis from 0 (or the data minimum if negative) to
/// the data maximum. Output is deterministic for equal inputs.
pub fn line_chart(title: &str, x_labels: &[String], series: &[Series]) -> Result<String> {
    if x_labels.is_empty() || series.is_empty() {
        return Err(Error::InvalidInput("nothing to chart".into()));
    }
    for s in series {
        if s.points.len() != x_labels.len() {
            return Err(Error::LengthMismatch {
                left: x_labels.len(),
                right: s.points.len(),
            });
        }
        if s.points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "series `{}` has a non-finite point",
                s.name
            )));
        }
    }

    let values = series.iter().flat_map(|s| s.points.iter().copied());
    let max = values.clone().fold(f64::MIN, f64::max);
    let min = values.fold(f64::MAX, f64::min).min(0.0);
    let span = if max > min { max - min } else { 1.0 };

    let x_at = |i: usize| {
        if x_labels.len() == 1 {
            (LEFT + RIGHT) / 2.0
        } else {
            LEFT + (RIGHT - LEFT) * i as f64 / (x_labels.len() - 1) as f64
        }
    };
    let y_at = |v: f64| BOTTOM - (BOTTOM - TOP) * (v - min) / span;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"14\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"30\" text-anchor=\"middle\" font-size=\"18\">{}</text>",
        coord(WIDTH / 2.0),
        escape(title)
    );

    // axes
    let _ = writeln!(
        out,
        "<line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>",
        l = coord(LEFT),
        r = coord(RIGHT),
        t = coord(TOP),
        b = coord(BOTTOM)
    );

    // y ticks
    for k in 0..=4 {
        let v = min + span * k as f64 / 4.0;
        let y = y_at(v);
        let _ = writeln!(
            out,
            "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"#cccccc\"/>\n\
             <text x=\"{xt}\" y=\"{yt}\" text-anchor=\"end\">{v:.3}</text>",
            x0 = coord(LEFT),
            x1 = coord(RIGHT),
            y = coord(y),
            xt = coord(LEFT - 8.0),
            yt = coord(y + 4.0),
        );
    }

    // x ticks, thinned when there are many labels
    let step = x_labels.len().div_ceil(12);
    for (i, label) in x_labels.iter().enumerate() {
        if i % step != 0 && i != x_labels.len() - 1 {
            continue;
        }
        let x = x_at(i);
        let _ = writeln!(
            out,
            "<line x1=\"{x}\" y1=\"{b}\" x2=\"{x}\" y2=\"{b2}\" stroke=\"black\"/>\n\
             <text x=\"{x}\" y=\"{yt}\" text-anchor=\"middle\">{}</text>",
            escape(label),
            x = coord(x),
            b = coord(BOTTOM),
            b2 = coord(BOTTOM + 6.0),
            yt = coord(BOTTOM + 24.0),
        );
    }

    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let points: Vec<String> = s
            .points
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{},{}", coord(x_at(i)), coord(y_at(v))))
            .collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
            points.join(" ")
        );
        // legend entry
        let ly = TOP + 20.0 * idx as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{lx}\" y=\"{ry}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n\
             <text x=\"{tx}\" y=\"{ty}\">{}</text>",
            escape(&s.name),
            lx = coord(RIGHT - 180.0),
            ry = coord(ly - 10.0),
            tx = coord(RIGHT - 162.0),
            ty = coord(ly + 1.0),
        );
    }

    out.push_str("</svg>\n");
    Ok(out)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
