//! Standalone SVG emitters for line plots, heatmaps, and trace plots.
//! Output is a pure function of the data (no timestamps or random ids).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 58.0;
const MARGIN_R: f64 = 18.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 44.0;

#[derive(Debug, Clone)]
pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub dashed: bool,
}

fn finite_min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn svg_header(title: &str) -> String {
    let mut s = String::new();
    write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" \
         text-anchor=\"middle\">{title}</text>\n",
        WIDTH / 2.0
    )
    .unwrap();
    s
}

/// Line plot with shared x axis; an optional shaded band drawn between the
/// first two series when `band` is set.
pub fn line_plot(path: &Path, title: &str, series: &[Series], band: Option<(usize, usize)>) -> Result<()> {
    let (xmin, xmax) = finite_min_max(series.iter().flat_map(|s| s.x.iter().copied()));
    let (ymin, ymax) = finite_min_max(series.iter().flat_map(|s| s.y.iter().copied()));
    let ymin = ymin.min(0.0);
    let sx = |x: f64| MARGIN_L + (x - xmin) / (xmax - xmin) * (WIDTH - MARGIN_L - MARGIN_R);
    let sy = |y: f64| HEIGHT - MARGIN_B - (y - ymin) / (ymax - ymin) * (HEIGHT - MARGIN_T - MARGIN_B);
    let mut s = svg_header(title);
    // axes
    write!(
        s,
        "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>\n",
        l = MARGIN_L,
        r = WIDTH - MARGIN_R,
        t = MARGIN_T,
        b = HEIGHT - MARGIN_B
    )
    .unwrap();
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let xv = xmin + frac * (xmax - xmin);
        let yv = ymin + frac * (ymax - ymin);
        writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{:.3}</text>",
            sx(xv),
            HEIGHT - MARGIN_B + 16.0,
            xv
        )
        .unwrap();
        writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{:.3}</text>",
            MARGIN_L - 6.0,
            sy(yv) + 3.0,
            yv
        )
        .unwrap();
    }
    if let Some((lo_idx, hi_idx)) = band {
        let lo = &series[lo_idx];
        let hi = &series[hi_idx];
        let mut d = String::new();
        for (x, y) in lo.x.iter().zip(lo.y) {
            write!(d, "{:.2},{:.2} ", sx(*x), sy(*y)).unwrap();
        }
        for (x, y) in hi.x.iter().zip(hi.y).rev() {
            write!(d, "{:.2},{:.2} ", sx(*x), sy(*y)).unwrap();
        }
        writeln!(
            s,
            "<polygon points=\"{}\" fill=\"#9ecae1\" fill-opacity=\"0.45\" stroke=\"none\"/>",
            d.trim_end()
        )
        .unwrap();
    }
    for sr in series {
        let mut d = String::new();
        for (x, y) in sr.x.iter().zip(sr.y) {
            if y.is_finite() {
                write!(d, "{:.2},{:.2} ", sx(*x), sy(*y)).unwrap();
            }
        }
        writeln!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{}/>",
            d.trim_end(),
            sr.color,
            if sr.dashed { " stroke-dasharray=\"6,4\"" } else { "" }
        )
        .unwrap();
    }
    // legend
    let mut ly = MARGIN_T + 8.0;
    for sr in series {
        writeln!(
            s,
            "<line x1=\"{x}\" y1=\"{ly}\" x2=\"{x2}\" y2=\"{ly}\" stroke=\"{c}\" stroke-width=\"2\"{dash}/>\
             <text x=\"{tx}\" y=\"{ty}\" font-family=\"sans-serif\" font-size=\"11\">{label}</text>",
            x = WIDTH - MARGIN_R - 150.0,
            x2 = WIDTH - MARGIN_R - 126.0,
            c = sr.color,
            dash = if sr.dashed { " stroke-dasharray=\"6,4\"" } else { "" },
            tx = WIDTH - MARGIN_R - 120.0,
            ty = ly + 4.0,
            label = sr.label
        )
        .unwrap();
        ly += 16.0;
    }
    s.push_str("</svg>\n");
    std::fs::create_dir_all(path.parent().unwrap_or(Path::new(".")))
        .map_err(crate::error::CliError::io(path.display().to_string()))?;
    std::fs::write(path, s).map_err(crate::error::CliError::io(path.display().to_string()))
}

/// Linear two-stop color scale from deep blue to yellow.
fn heat_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| a + t * (b - a);
    format!(
        "rgb({},{},{})",
        lerp(33.0, 253.0) as u8,
        lerp(52.0, 231.0) as u8,
        lerp(104.0, 37.0) as u8
    )
}

/// Heatmap of row-major values (ny rows of nx values, first axis = x).
/// The color scale range is printed alongside the map.
pub fn heatmap(path: &Path, title: &str, values: &[f64], nx: usize, ny: usize) -> Result<()> {
    assert_eq!(values.len(), nx * ny);
    let (lo, hi) = finite_min_max(values.iter().copied());
    let cell_w = (WIDTH - MARGIN_L - MARGIN_R - 60.0) / nx as f64;
    let cell_h = (HEIGHT - MARGIN_T - MARGIN_B) / ny as f64;
    let mut s = svg_header(title);
    for ix in 0..nx {
        for iy in 0..ny {
            // value grid is row-major with the second axis fastest
            let v = values[ix * ny + iy];
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
            writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                MARGIN_L + ix as f64 * cell_w,
                HEIGHT - MARGIN_B - (iy + 1) as f64 * cell_h,
                cell_w + 0.5,
                cell_h + 0.5,
                heat_color(t)
            )
            .unwrap();
        }
    }
    // color scale with stated range
    let bar_x = WIDTH - MARGIN_R - 40.0;
    for k in 0..64 {
        let t = k as f64 / 63.0;
        writeln!(
            s,
            "<rect x=\"{bar_x:.2}\" y=\"{:.2}\" width=\"16\" height=\"{:.2}\" fill=\"{}\"/>",
            HEIGHT - MARGIN_B - (k + 1) as f64 * (HEIGHT - MARGIN_T - MARGIN_B) / 64.0,
            (HEIGHT - MARGIN_T - MARGIN_B) / 64.0 + 0.5,
            heat_color(t)
        )
        .unwrap();
    }
    write!(
        s,
        "<text x=\"{tx}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\">{hi:.3}</text>\n\
         <text x=\"{tx}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\">{lo:.3}</text>\n",
        MARGIN_T + 8.0,
        HEIGHT - MARGIN_B + 10.0,
        tx = bar_x - 4.0 - 34.0,
    )
    .unwrap();
    s.push_str("</svg>\n");
    std::fs::create_dir_all(path.parent().unwrap_or(Path::new(".")))
        .map_err(crate::error::CliError::io(path.display().to_string()))?;
    std::fs::write(path, s).map_err(crate::error::CliError::io(path.display().to_string()))
}
