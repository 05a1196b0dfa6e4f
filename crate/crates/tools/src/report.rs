//! CSV tables and SVG polygon figures.
//!
//! Figures use a fixed scale of 60 px per unit on both axes, a 40 px
//! margin, and put `y` upward. The Hodge polygon, when present, is black;
//! other polygons take one color per class.

use std::fmt::Write as _;

use kisin_core::polygon::Polygon;
use kisin_core::rational::Q;

/// `p/q`, or `p` when integral.
pub fn fmt_q(x: &Q) -> String {
    if *x.denom() == 1 {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// `(x0,y0) (x1,y1) …`
pub fn fmt_polygon(p: &Polygon) -> String {
    p.breakpoints().iter().map(|(x, y)| format!("({},{})", fmt_q(x), fmt_q(y))).collect::<Vec<_>>().join(" ")
}

pub fn fmt_slopes(p: &Polygon) -> String {
    let s: Vec<String> = p.segments().iter().map(|(l, s)| format!("{}x{}", fmt_q(l), fmt_q(s))).collect();
    format!("[{}]", s.join(", "))
}

pub fn fmt_set(j: &[usize]) -> String {
    format!("{{{}}}", j.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","))
}

/// Writes rows to CSV text.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> std::io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

const SCALE: f64 = 60.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

/// A polygon with its color class and legend label.
pub struct Layer<'a> {
    pub polygon: &'a Polygon,
    pub class: usize,
    pub label: String,
}

fn to_f(x: &Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// SVG with every layer drawn over optional axes and Hodge polygon.
pub fn svg(title: &str, hodge: Option<&Polygon>, layers: &[Layer]) -> String {
    let all: Vec<&Polygon> = hodge.into_iter().chain(layers.iter().map(|l| l.polygon)).collect();
    let pts = all.iter().flat_map(|p| p.breakpoints().iter().map(|(x, y)| (to_f(x), to_f(y))));
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 1.0f64, 0.0f64, 1.0f64);
    for (x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let legend_h = 16.0 * layers.len() as f64 + 20.0;
    let (w, h) = ((x1 - x0) * SCALE + 2.0 * MARGIN + 180.0, (y1 - y0) * SCALE + 2.0 * MARGIN);
    let h = h.max(legend_h + MARGIN);
    let px = |x: f64| MARGIN + (x - x0) * SCALE;
    let py = |y: f64| h - MARGIN - (y - y0) * SCALE;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.0} {h:.0}" width="{w:.0}" height="{h:.0}">"#);
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    // axes and unit grid
    let mut gx = x0.floor();
    while gx <= x1 {
        let _ = writeln!(s, r##"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="#dddddd"/>"##, px(gx), py(y0), py(y1));
        gx += 1.0;
    }
    let mut gy = y0.floor();
    while gy <= y1 {
        let _ = writeln!(s, r##"<line x1="{0:.1}" y1="{2:.1}" x2="{1:.1}" y2="{2:.1}" stroke="#dddddd"/>"##, px(x0), px(x1), py(gy));
        gy += 1.0;
    }
    let _ = writeln!(s, r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#888888"/>"##, px(x0), py(0.0), px(x1), py(0.0));
    for (i, layer) in layers.iter().enumerate() {
        let color = PALETTE[layer.class % PALETTE.len()];
        let pts: Vec<String> = layer.polygon.breakpoints().iter().map(|(x, y)| format!("{:.1},{:.1}", px(to_f(x)), py(to_f(y)))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2" stroke-opacity="0.8"/>"#, pts.join(" "));
        let ly = MARGIN + 16.0 * i as f64;
        let lx = px(x1) + 20.0;
        let _ = writeln!(s, r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#, lx + 16.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="11" font-family="monospace">{}</text>"#, lx + 20.0, ly + 4.0, escape(&layer.label));
    }
    if let Some(hp) = hodge {
        let pts: Vec<String> = hp.breakpoints().iter().map(|(x, y)| format!("{:.1},{:.1}", px(to_f(x)), py(to_f(y)))).collect();
        let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#000000" stroke-width="2.5"/>"##, pts.join(" "));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
