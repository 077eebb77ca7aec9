//! CSV and SVG emission for sweeps.

use std::fmt::Write;

use crate::kpi::KpiVector;
use crate::model::Configuration;
use crate::pipeline::{BranchMinimum, DistanceResult};

/// Nine significant digits, `.` separator, no locale. Plain notation for
/// exponents in `[-5, 9)`, scientific otherwise; trailing zeros trimmed.
pub fn fmt_sig(v: f64) -> String {
    if v.is_nan() {
        return String::new();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.8e}", v);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if (-5..9).contains(&exp) {
        if exp < 0 {
            out.push_str("0.");
            out.push_str(&"0".repeat((-exp - 1) as usize));
            out.push_str(&digits);
        } else {
            let e = exp as usize + 1;
            out.push_str(&digits[..e]);
            out.push('.');
            out.push_str(&digits[e..]);
        }
        let trimmed = out.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        let m = format!("{}.{}", &digits[..1], &digits[1..]);
        let m = m.trim_end_matches('0').trim_end_matches('.');
        format!("{out}{m}e{exp}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), fmt_sig)
}

fn branch_label(b: &BranchMinimum) -> String {
    match b.variant {
        0 => b.branch.label(),
        v => format!("{}{:+}", b.branch.label(), v),
    }
}

fn minimizer_cells(k: Option<&Configuration<f64>>, arity: usize) -> Vec<String> {
    match k {
        Some(k) => k.flat().into_iter().map(fmt_sig).collect(),
        None => vec![String::new(); 2 * arity],
    }
}

/// One row per branch minimum plus one `overall` row per pose and
/// interpretation. Columns: `phi, interpretation, branch, distance, sign`,
/// the minimizer coordinates, `n_real, n_tracked, n_failed`.
pub fn distances_csv(results: &[DistanceResult]) -> String {
    let arity = results
        .iter()
        .flat_map(|r| r.branches.iter())
        .filter_map(|b| b.minimizer.as_ref().map(Configuration::arity))
        .max()
        .unwrap_or(6);
    let mut out = String::from("phi,interpretation,branch,distance,sign");
    for i in 1..=arity {
        write!(out, ",c{i},d{i}").unwrap();
    }
    out.push_str(",n_real,n_tracked,n_failed\n");
    let sign = |s: Option<i8>| s.map_or(String::new(), |v| v.to_string());
    for r in results {
        for b in &r.branches {
            let mut cells = vec![fmt_sig(r.phi), r.label.clone(), branch_label(b), opt(b.distance), sign(r.sign)];
            cells.extend(minimizer_cells(b.minimizer.as_ref(), arity));
            cells.extend([b.n_real.to_string(), b.n_tracked.to_string(), b.n_failed.to_string()]);
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        let best = r
            .branches
            .iter()
            .filter(|b| b.distance.is_some() && b.distance == r.overall)
            .min_by(|a, b| a.distance.unwrap().total_cmp(&b.distance.unwrap()));
        let mut cells = vec![fmt_sig(r.phi), r.label.clone(), "overall".into(), opt(r.overall), sign(r.sign)];
        cells.extend(minimizer_cells(best.and_then(|b| b.minimizer.as_ref()), arity));
        let sum = |f: fn(&BranchMinimum) -> usize| r.branches.iter().map(f).sum::<usize>().to_string();
        cells.extend([sum(|b| b.n_real), sum(|b| b.n_tracked), sum(|b| b.n_failed)]);
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn kpi_csv(rows: &[(f64, KpiVector)]) -> String {
    let mut out = String::from("phi");
    for f in KpiVector::FIELDS {
        write!(out, ",{f}").unwrap();
    }
    out.push('\n');
    for (phi, v) in rows {
        out.push_str(&fmt_sig(*phi));
        for x in v.values() {
            out.push(',');
            out.push_str(&fmt_sig(x));
        }
        out.push('\n');
    }
    out
}

/// A labeled curve; missing samples are skipped.
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, Option<f64>)>,
}

const PALETTE: [&str; 12] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#000000",
    "#7f7f7f", "#393b79",
];

const WIDTH: f64 = 1400.0;
const HEIGHT: f64 = 600.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= target as f64).unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() as i64;
    let end = (hi / step).floor() as i64;
    (start..=end).map(|k| k as f64 * step).collect()
}

/// Line chart of distance against `φ`: one polyline per curve, axes labeled
/// `φ (rad)` and `Distance`, legend on the right.
pub fn svg_plot(title: &str, curves: &[Curve]) -> String {
    let (ml, mr, mt, mb) = (80.0, 220.0, 50.0, 60.0);
    let (pw, ph) = (WIDTH - ml - mr, HEIGHT - mt - mb);
    let pts = curves.iter().flat_map(|c| c.points.iter().filter_map(|(x, y)| y.map(|y| (*x, y))));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    y0 = y0.min(0.0);
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| mt + (y1 - y) / (y1 - y0) * ph;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="14">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="28" text-anchor="middle" font-size="18">{}</text>"#, ml + pw / 2.0, escape(title)).unwrap();
    writeln!(s, r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
    for t in nice_ticks(x0, x1, 10) {
        let x = sx(t);
        writeln!(s, r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#ccc"/>"##, mt, mt + ph).unwrap();
        writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, mt + ph + 20.0, fmt_sig(t)).unwrap();
    }
    for t in nice_ticks(y0, y1, 8) {
        let y = sy(t);
        writeln!(s, r##"<line x1="{ml}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ccc"/>"##, ml + pw).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, ml - 8.0, y + 5.0, fmt_sig(t)).unwrap();
    }
    if y0 < 0.0 {
        writeln!(s, r#"<line x1="{ml}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="black"/>"#, sy(0.0), ml + pw, sy(0.0)).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">φ (rad)</text>"#, ml + pw / 2.0, HEIGHT - 15.0).unwrap();
    writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">Distance</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0
    )
    .unwrap();
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = c
            .points
            .iter()
            .filter_map(|(x, y)| y.map(|y| format!("{:.2},{:.2}", sx(*x), sy(y))))
            .collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"><title>{}</title></polyline>"#,
            coords.join(" "),
            escape(&c.label)
        )
        .unwrap();
        let ly = mt + 20.0 + 24.0 * i as f64;
        let lx = ml + pw + 20.0;
        writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/>"#, lx + 30.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 38.0, ly + 5.0, escape(&c.label)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Drawing of a 3-RPR configuration `k` (green) and its closest singular
/// configuration `kp` (red): base and platform triangles plus the legs.
pub fn svg_configurations(title: &str, k: &Configuration<f64>, kp: &Configuration<f64>) -> String {
    let all: Vec<[f64; 2]> = k.points().iter().chain(kp.points()).copied().collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &all {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let pad = 0.08 * (x1 - x0).max(y1 - y0).max(1e-9);
    let (x0, y0) = (x0 - pad, y0 - pad);
    let span = ((x1 + pad) - x0).max((y1 + pad) - y0);
    let size = HEIGHT - 60.0;
    let sx = |x: f64| 30.0 + (x - x0) / span * size;
    let sy = |y: f64| 40.0 + size - (y - y0) / span * size;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="14">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="30" y="25" font-size="18">{}</text>"#, escape(title)).unwrap();
    for (cfg, color) in [(k, "green"), (kp, "red")] {
        let p = cfg.points();
        for tri in [[0, 1, 2], [3, 4, 5]] {
            let pts: Vec<String> = tri.iter().map(|&i| format!("{:.2},{:.2}", sx(p[i][0]), sy(p[i][1]))).collect();
            writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="2"/>"#, pts.join(" ")).unwrap();
        }
        for i in 0..3 {
            writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2" stroke-dasharray="6 3"/>"#,
                sx(p[i][0]),
                sy(p[i][1]),
                sx(p[i + 3][0]),
                sy(p[i + 3][1])
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}
