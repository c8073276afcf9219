use std::fmt::Write;

use crate::error::{Error, Result};

pub const ODD_WEEK_SHADE: &str = "#1f4e8c";
pub const EVEN_WEEK_SHADE: &str = "#8db4e2";

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scale {
    /// Values in [0, 1], axis from 0 to the largest value, labelled in percent.
    Fraction,
    /// Learner counts, axis from 0 to the cohort size.
    Count { max: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartSpec {
    pub feature: String,
    /// One value per resource in curriculum order; `None` draws a tick mark.
    pub values: Vec<Option<f64>>,
    /// Week of each resource.
    pub weeks: Vec<u32>,
    pub width: u32,
    pub height: u32,
    pub odd_shade: String,
    pub even_shade: String,
    pub scale: Scale,
}

impl ChartSpec {
    pub fn new(feature: impl Into<String>, values: Vec<Option<f64>>, weeks: Vec<u32>, scale: Scale) -> Self {
        ChartSpec {
            feature: feature.into(),
            values,
            weeks,
            width: 800,
            height: 300,
            odd_shade: ODD_WEEK_SHADE.into(),
            even_shade: EVEN_WEEK_SHADE.into(),
            scale,
        }
    }

    pub fn shade_for_week(&self, week: u32) -> &str {
        if week.is_multiple_of(2) {
            &self.even_shade
        } else {
            &self.odd_shade
        }
    }
}

/// A chart spec for one feature column; `active` is drawn on a count axis.
pub fn chart_for_column(feature: &str, values: Vec<Option<f64>>, weeks: Vec<u32>, cohort_size: usize) -> ChartSpec {
    let scale = if feature == "active" {
        Scale::Count { max: cohort_size }
    } else {
        Scale::Fraction
    };
    ChartSpec::new(feature, values, weeks, scale)
}

const LEFT: f64 = 64.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 32.0;
const BOTTOM: f64 = 40.0;
const TICKS: usize = 4;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders one bar per resource as a standalone SVG document.
pub fn render_chart(spec: &ChartSpec) -> Result<String> {
    let n = spec.values.len();
    if n == 0 {
        return Err(Error::Chart("no resources to plot".into()));
    }
    if spec.weeks.len() != n {
        return Err(Error::Chart(format!("{} values but {} weeks", n, spec.weeks.len())));
    }
    if spec.values.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Chart("values must be finite and non-negative".into()));
    }

    let top_value = match spec.scale {
        Scale::Count { max } => max.max(1) as f64,
        Scale::Fraction => {
            let max = spec.values.iter().flatten().copied().fold(0.0, f64::max);
            // A flat zero series still gets a readable axis.
            if max > 0.0 {
                max
            } else {
                0.01
            }
        }
    };
    let label = |v: f64| match spec.scale {
        Scale::Fraction => format!("{:.1}%", v * 100.0),
        Scale::Count { .. } => format!("{}", v.round() as i64),
    };

    let (w, h) = (spec.width as f64, spec.height as f64);
    let plot_w = w - LEFT - RIGHT;
    let plot_h = h - TOP - BOTTOM;
    let base = TOP + plot_h;
    let slot = plot_w / n as f64;
    let bar_w = slot * 0.8;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        spec.width, spec.height, spec.width, spec.height
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(&spec.feature)
    );

    let _ = writeln!(svg, r##"<g class="axis" stroke="#333333" stroke-width="1">"##);
    let _ = writeln!(svg, r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{base:.2}"/>"#);
    let _ = writeln!(svg, r#"<line x1="{LEFT:.2}" y1="{base:.2}" x2="{:.2}" y2="{base:.2}"/>"#, LEFT + plot_w);
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r#"<g class="ticks" font-family="sans-serif" font-size="10" text-anchor="end">"#);
    for t in 0..=TICKS {
        let v = top_value * t as f64 / TICKS as f64;
        let y = base - plot_h * t as f64 / TICKS as f64;
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="#333333"/><text x="{:.2}" y="{:.2}">{}</text>"##,
            LEFT - 4.0,
            LEFT - 6.0,
            y + 3.0,
            label(v)
        );
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="bars">"#);
    for (i, (value, week)) in spec.values.iter().zip(&spec.weeks).enumerate() {
        let x = LEFT + slot * i as f64 + (slot - bar_w) / 2.0;
        match value {
            Some(v) => {
                let bar_h = plot_h * (v / top_value).min(1.0);
                let _ = writeln!(
                    svg,
                    r#"<rect class="bar" data-week="{week}" x="{x:.2}" y="{:.2}" width="{bar_w:.2}" height="{bar_h:.2}" fill="{}"/>"#,
                    base - bar_h,
                    spec.shade_for_week(*week)
                );
            }
            None => {
                let mid = x + bar_w / 2.0;
                let _ = writeln!(
                    svg,
                    r##"<line class="null" data-week="{week}" x1="{mid:.2}" y1="{base:.2}" x2="{mid:.2}" y2="{:.2}" stroke="#999999"/>"##,
                    base + 6.0
                );
            }
        }
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="weeks" font-family="sans-serif" font-size="10" text-anchor="start">"#);
    let mut prev = None;
    for (i, week) in spec.weeks.iter().enumerate() {
        if prev != Some(*week) {
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}">week {week}</text>"#,
                LEFT + slot * i as f64,
                base + 20.0
            );
            prev = Some(*week);
        }
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    Ok(svg)
}
