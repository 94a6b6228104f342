//! Minimal self-contained SVG emitter: line charts with linear or log axes
//! and cell-based heat maps with optional overlay curves. Presentation only;
//! the CSV files are the canonical output.

use std::fmt::Write;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 600.0;
const MARGIN_L: f64 = 90.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 70.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Default)]
pub struct ChartOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_log: bool,
    pub y_log: bool,
}

pub struct HeatData {
    /// Cell centre coordinates, ascending.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Row-major values[ix * y.len() + iy].
    pub values: Vec<f64>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(lo: f64, hi: f64, log: bool) -> Self {
        let (lo, hi) = if log {
            (lo.max(1e-300), hi.max(2e-300))
        } else if (hi - lo).abs() < f64::MIN_POSITIVE {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        };
        Self { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        if self.log {
            (v.max(1e-300).ln() - self.lo.ln()) / (self.hi.ln() - self.lo.ln())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let lo_dec = self.lo.log10().ceil() as i32;
            let hi_dec = self.hi.log10().floor() as i32;
            if hi_dec >= lo_dec && (hi_dec - lo_dec) <= 16 {
                return (lo_dec..=hi_dec).map(|d| 10f64.powi(d)).collect();
            }
            return vec![self.lo, self.hi];
        }
        let span = self.hi - self.lo;
        let raw_step = span / 5.0;
        let mag = 10f64.powf(raw_step.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|s| s * mag)
            .find(|s| span / s <= 6.0)
            .unwrap_or(mag * 10.0);
        let first = (self.lo / step).ceil();
        let mut out = Vec::new();
        let mut k = first;
        while k * step <= self.hi + 1e-9 * step {
            out.push(k * step);
            k += 1.0;
        }
        out
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() { "0".into() } else { s }
    } else {
        format!("{v:.2e}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Five-stop blue-to-yellow ramp for heat cells.
fn heat_color(t: f64) -> String {
    const STOPS: [(f64, [u8; 3]); 5] = [
        (0.0, [13, 8, 135]),
        (0.25, [126, 3, 168]),
        (0.5, [204, 71, 120]),
        (0.75, [248, 149, 64]),
        (1.0, [240, 249, 33]),
    ];
    let t = t.clamp(0.0, 1.0);
    for w in STOPS.windows(2) {
        let (t0, c0) = w[0];
        let (t1, c1) = w[1];
        if t <= t1 {
            let f = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
            let mix = |a: u8, b: u8| (a as f64 + f * (b as f64 - a as f64)).round() as u8;
            return format!("#{:02x}{:02x}{:02x}", mix(c0[0], c1[0]), mix(c0[1], c1[1]), mix(c0[2], c1[2]));
        }
    }
    "#f0f921".into()
}

fn axes_and_frame(
    out: &mut String,
    opts: &ChartOptions,
    x_axis: &Axis,
    y_axis: &Axis,
) {
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let px = |fx: f64| MARGIN_L + fx * plot_w;
    let py = |fy: f64| HEIGHT - MARGIN_B - fy * plot_h;

    writeln!(
        out,
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>"
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"18\" \
         font-family=\"sans-serif\">{}</text>",
        WIDTH / 2.0,
        xml_escape(&opts.title)
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\" \
         font-family=\"sans-serif\">{}</text>",
        WIDTH / 2.0,
        HEIGHT - 18.0,
        xml_escape(&opts.x_label)
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"22\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\" \
         font-family=\"sans-serif\" transform=\"rotate(-90 22 {})\">{}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        xml_escape(&opts.y_label)
    )
    .unwrap();

    for t in x_axis.ticks() {
        let x = px(x_axis.frac(t));
        if !(MARGIN_L - 0.5..=WIDTH - MARGIN_R + 0.5).contains(&x) {
            continue;
        }
        writeln!(
            out,
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"#333\"/>",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 6.0
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" \
             font-family=\"sans-serif\">{}</text>",
            HEIGHT - MARGIN_B + 22.0,
            tick_label(t)
        )
        .unwrap();
    }
    for t in y_axis.ticks() {
        let y = py(y_axis.frac(t));
        if !(MARGIN_T - 0.5..=HEIGHT - MARGIN_B + 0.5).contains(&y) {
            continue;
        }
        writeln!(
            out,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#333\"/>",
            MARGIN_L - 6.0,
            MARGIN_L
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"12\" \
             font-family=\"sans-serif\">{}</text>",
            MARGIN_L - 10.0,
            y + 4.0,
            tick_label(t)
        )
        .unwrap();
    }
}

/// Renders series as polylines; data outside the range is clipped by the
/// viewport. Returns a complete SVG document.
pub fn line_chart(opts: &ChartOptions, series: &[Series]) -> String {
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
    let (x_lo, x_hi) = bounds(&xs);
    let (y_lo, y_hi) = bounds(&ys);
    let pad = if opts.y_log { 1.0 } else { 0.05 * (y_hi - y_lo).max(f64::MIN_POSITIVE) };
    let x_axis = Axis::new(x_lo, x_hi, opts.x_log);
    let y_axis = Axis::new(y_lo - pad, y_hi + pad, opts.y_log);
    render(opts, &x_axis, &y_axis, None, series)
}

/// Heat map (cell rectangles) with optional overlays on the same axes.
pub fn heat_chart(opts: &ChartOptions, heat: &HeatData, overlays: &[Series]) -> String {
    let x_axis = Axis::new(
        *heat.x.first().unwrap(),
        *heat.x.last().unwrap(),
        opts.x_log,
    );
    let y_axis = Axis::new(
        *heat.y.first().unwrap(),
        *heat.y.last().unwrap(),
        opts.y_log,
    );
    render(opts, &x_axis, &y_axis, Some(heat), overlays)
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() && hi.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

fn render(
    opts: &ChartOptions,
    x_axis: &Axis,
    y_axis: &Axis,
    heat: Option<&HeatData>,
    series: &[Series],
) -> String {
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let px = |v: f64| MARGIN_L + x_axis.frac(v).clamp(0.0, 1.0) * plot_w;
    let py = |v: f64| HEIGHT - MARGIN_B - y_axis.frac(v).clamp(0.0, 1.0) * plot_h;

    let mut out = String::with_capacity(16 * 1024);
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    )
    .unwrap();
    writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>").unwrap();

    if let Some(h) = heat {
        let (v_lo, v_hi) = bounds(&h.values);
        let span = (v_hi - v_lo).max(f64::MIN_POSITIVE);
        for ix in 0..h.x.len() {
            for iy in 0..h.y.len() {
                let v = h.values[ix * h.y.len() + iy];
                // cell edges midway to the neighbours
                let x0 = if ix == 0 { h.x[0] } else { edge(&h.x, ix, x_axis.log) };
                let x1 = if ix + 1 == h.x.len() {
                    h.x[ix]
                } else {
                    edge(&h.x, ix + 1, x_axis.log)
                };
                let y0 = if iy == 0 { h.y[0] } else { edge(&h.y, iy, y_axis.log) };
                let y1 = if iy + 1 == h.y.len() {
                    h.y[iy]
                } else {
                    edge(&h.y, iy + 1, y_axis.log)
                };
                let (sx0, sx1) = (px(x0), px(x1));
                let (sy0, sy1) = (py(y1), py(y0));
                writeln!(
                    out,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                    sx0,
                    sy0,
                    (sx1 - sx0).max(0.5),
                    (sy1 - sy0).max(0.5),
                    heat_color((v - v_lo) / span)
                )
                .unwrap();
            }
        }
    }

    axes_and_frame(&mut out, opts, x_axis, y_axis);

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        for &(x, y) in &s.points {
            if !x.is_finite() || !y.is_finite() {
                continue;
            }
            if path.is_empty() {
                write!(path, "M{:.2},{:.2}", px(x), py(y)).unwrap();
            } else {
                write!(path, " L{:.2},{:.2}", px(x), py(y)).unwrap();
            }
        }
        writeln!(
            out,
            "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>"
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" font-family=\"sans-serif\" \
             fill=\"{color}\">{}</text>",
            WIDTH - MARGIN_R - 170.0,
            MARGIN_T + 18.0 + 16.0 * i as f64,
            xml_escape(&s.name)
        )
        .unwrap();
    }

    writeln!(out, "</svg>").unwrap();
    out
}

fn edge(centres: &[f64], i: usize, log: bool) -> f64 {
    if log {
        (centres[i - 1].ln() * 0.5 + centres[i].ln() * 0.5).exp()
    } else {
        0.5 * (centres[i - 1] + centres[i])
    }
}
