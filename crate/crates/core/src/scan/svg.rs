//! Hand-written SVG region maps: one `<g>` of cell rectangles per criterion,
//! stacked with the earlier results underneath.

use std::fmt::Write;

use super::{Plane, RegionSample, Scale, ScanSpec};
use crate::error::{Error, Result};
use crate::theory::CriterionId;

/// Bottom-to-top drawing order.
const STACKING: [(CriterionId, &str); 13] = [
    (CriterionId::PriorI, "#7f7f7f"),
    (CriterionId::PriorII, "#bcbd22"),
    (CriterionId::PriorIII, "#8c564b"),
    (CriterionId::PriorVII, "#e377c2"),
    (CriterionId::PriorVIII, "#17becf"),
    (CriterionId::Neg3, "#aec7e8"),
    (CriterionId::Pos1, "#ff9896"),
    (CriterionId::DegPos, "#d62728"),
    (CriterionId::DegNeg, "#1f77b4"),
    (CriterionId::N2, "#c5b0d5"),
    (CriterionId::N1, "#9467bd"),
    (CriterionId::S2, "#c49c94"),
    (CriterionId::S1, "#6a3d9a"),
];

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    pub width: f64,
    pub height: f64,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub nx: usize,
    pub ny: usize,
    /// Dashed vertical reference lines at the given `x`.
    pub verticals: Vec<(f64, String)>,
}

impl SvgStyle {
    pub fn for_spec(spec: &ScanSpec) -> Self {
        let (x_label, y_label) = spec.plane.axis_labels();
        let title = match spec.plane {
            Plane::Symmetric => "Speed-sign regions, r = 1, k1 = k2 = k".to_string(),
            Plane::K1Ratio { k2, r } => format!(
                "Speed-sign regions, k2 = {}, r = {}",
                crate::fmt::g12(k2),
                crate::fmt::g12(r)
            ),
        };
        Self {
            width: 900.0,
            height: 600.0,
            title,
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            x_range: spec.x_range,
            y_range: spec.y_range,
            x_scale: spec.x_scale,
            y_scale: spec.y_scale,
            nx: spec.nx,
            ny: spec.ny,
            verticals: Vec::new(),
        }
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Linear map from a scaled data interval onto a pixel interval.
struct Axis {
    scale: Scale,
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn px(&self, v: f64) -> f64 {
        let t = (self.scale.forward(v) - self.scale.forward(self.lo))
            / (self.scale.forward(self.hi) - self.scale.forward(self.lo));
        self.px_lo + t * (self.px_hi - self.px_lo)
    }

    /// Pixel size of one node spacing.
    fn cell(&self, n: usize) -> f64 {
        (self.px_hi - self.px_lo).abs() / (n - 1) as f64
    }

    fn ticks(&self) -> Vec<f64> {
        match self.scale {
            Scale::Log => {
                let (a, b) = (
                    self.lo.log10().ceil() as i32,
                    self.hi.log10().floor() as i32,
                );
                let stride = ((b - a) / 8 + 1).max(1);
                (a..=b)
                    .step_by(stride as usize)
                    .map(|e| 10f64.powi(e))
                    .collect()
            }
            Scale::Linear => {
                let raw = (self.hi - self.lo) / 6.0;
                let mag = 10f64.powf(raw.log10().floor());
                let step = [1.0, 2.0, 5.0, 10.0]
                    .into_iter()
                    .map(|f| f * mag)
                    .find(|s| *s >= raw)
                    .unwrap_or(10.0 * mag);
                let first = (self.lo / step).ceil() as i64;
                let last = (self.hi / step).floor() as i64;
                (first..=last).map(|i| i as f64 * step).collect()
            }
        }
    }
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("1e{}", v.log10().round() as i32)
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

pub fn render_svg(samples: &[RegionSample], style: &SvgStyle) -> Result<String> {
    if samples.len() != style.nx * style.ny {
        return Err(Error::Scan(format!(
            "{} samples do not fill a {} x {} grid",
            samples.len(),
            style.nx,
            style.ny
        )));
    }
    let (w, h) = (style.width, style.height);
    let (left, right) = (MARGIN_LEFT, w - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, h - MARGIN_BOTTOM);
    let xa = Axis {
        scale: style.x_scale,
        lo: style.x_range.0,
        hi: style.x_range.1,
        px_lo: left,
        px_hi: right,
    };
    let ya = Axis {
        scale: style.y_scale,
        lo: style.y_range.0,
        hi: style.y_range.1,
        px_lo: bottom,
        px_hi: top,
    };
    let (cw, ch) = (xa.cell(style.nx), ya.cell(style.ny));

    let mut s = String::new();
    // writing into a String cannot fail
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">
<defs><clipPath id="plot-area"><rect x="{left}" y="{top}" width="{pw}" height="{ph}"/></clipPath></defs>
<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>
<text x="{tx}" y="24" text-anchor="middle" font-size="15">{title}</text>"#,
        pw = right - left,
        ph = bottom - top,
        tx = 0.5 * (left + right),
        title = escape(&style.title),
    );

    let _ = writeln!(s, r#"<g id="masks" clip-path="url(#plot-area)">"#);
    for (id, color) in STACKING {
        let _ = writeln!(
            s,
            r#"<g id="mask-{label}" class="criterion" data-criterion="{label}" fill="{color}" fill-opacity="0.75">"#,
            label = id.label()
        );
        for sample in samples.iter().filter(|smp| smp.fires(id)) {
            let (px, py) = (xa.px(sample.point.0), ya.px(sample.point.1));
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
                px - 0.5 * cw,
                py - 0.5 * ch,
                cw,
                ch
            );
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(
        s,
        r#"<g id="verticals" stroke="black" stroke-dasharray="6 4">"#
    );
    for (x, label) in &style.verticals {
        if !(style.x_range.0..=style.x_range.1).contains(x) {
            continue;
        }
        let px = xa.px(*x);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{top}" x2="{px:.2}" y2="{bottom}"/><text x="{tx:.2}" y="{ty}" stroke="none" font-size="10" transform="rotate(-90 {tx:.2} {ty})">{}</text>"#,
            escape(label),
            tx = px - 3.0,
            ty = top + 80.0,
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(
        s,
        r#"<g id="axes" stroke="black" fill="none">
<rect x="{left}" y="{top}" width="{pw}" height="{ph}"/>"#,
        pw = right - left,
        ph = bottom - top
    );
    for t in xa.ticks() {
        let px = xa.px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{bottom}" x2="{px:.2}" y2="{y2}"/><text x="{px:.2}" y="{ty}" fill="black" stroke="none" text-anchor="middle">{}</text>"#,
            tick_label(t),
            y2 = bottom + 5.0,
            ty = bottom + 18.0
        );
    }
    for t in ya.ticks() {
        let py = ya.px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x2}" y1="{py:.2}" x2="{left}" y2="{py:.2}"/><text x="{tx}" y="{ty:.2}" fill="black" stroke="none" text-anchor="end">{}</text>"#,
            tick_label(t),
            x2 = left - 5.0,
            tx = left - 8.0,
            ty = py + 4.0
        );
    }
    let scale_note = |scale: Scale| match scale {
        Scale::Linear => "",
        Scale::Log => " (log)",
    };
    let _ = writeln!(
        s,
        r#"<text x="{tx}" y="{ty}" fill="black" stroke="none" text-anchor="middle">{}{}</text>
<text x="18" y="{my}" fill="black" stroke="none" text-anchor="middle" transform="rotate(-90 18 {my})">{}{}</text>
</g>"#,
        escape(&style.x_label),
        scale_note(style.x_scale),
        escape(&style.y_label),
        scale_note(style.y_scale),
        tx = 0.5 * (left + right),
        ty = h - 20.0,
        my = 0.5 * (top + bottom),
    );

    let _ = writeln!(s, r#"<g id="legend">"#);
    for (row, (id, color)) in STACKING.iter().rev().enumerate() {
        let y = top + 18.0 * row as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{y}" width="12" height="12" fill="{color}" fill-opacity="0.75"/><text x="{tx}" y="{ty}">{}</text>"#,
            id.label(),
            x = right + 15.0,
            tx = right + 32.0,
            ty = y + 10.0
        );
    }
    let _ = writeln!(s, "</g>\n</svg>");
    Ok(s)
}
