//! Standalone SVG output: lattice heatmaps, curves from table columns and
//! `Λ_p` against `1/p` traces with the fitted line.

use std::fmt::Write as _;

use super::config::PlotKind;
use crate::eigensolver::{fit_inverse_p, fit_window};
use crate::error::{Error, Result};
use crate::io::{LatticeDump, Table};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const PAD: f64 = 60.0;

/// Renders `input` (the text of a field dump for heatmaps, a CSV table
/// otherwise). Radial plots use `columns` or the first two table columns;
/// traces read `p` and `lambda`.
pub fn emit_plot(kind: PlotKind, input: &str, columns: Option<(&str, &str)>) -> Result<String> {
    match kind {
        PlotKind::Heatmap => heatmap(&LatticeDump::parse(input)?),
        PlotKind::Radial => {
            let t = Table::parse_csv(input)?;
            let (x, y) = match columns {
                Some(c) => c,
                None if t.header.len() >= 2 => (t.header[0].as_str(), t.header[1].as_str()),
                None => return Err(Error::format("plot", "radial plot needs two columns")),
            };
            let pts: Vec<(f64, f64)> = t.numbers(x)?.into_iter().zip(t.numbers(y)?).collect();
            curve(&pts, x, y, None)
        }
        PlotKind::Trace => {
            let t = Table::parse_csv(input)?;
            let pts: Vec<(f64, f64)> = t
                .numbers("p")?
                .into_iter()
                .zip(t.numbers("lambda")?)
                .collect();
            if pts.is_empty() || pts.iter().any(|&(p, _)| p <= 0.0) {
                return Err(Error::format("plot", "trace needs positive exponents"));
            }
            let (a, b) = fit_inverse_p(&pts[pts.len() - fit_window(pts.len())..]);
            let inv: Vec<(f64, f64)> = pts.iter().map(|&(p, l)| (1.0 / p, l)).collect();
            curve(&inv, "1/p", "lambda_p", Some((a, b)))
        }
    }
}

fn f(v: f64) -> String {
    format!("{v:.2}")
}

fn label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Piecewise-linear blue-green-yellow ramp on `[0, 1]`.
fn color(t: f64) -> String {
    const STOPS: [[f64; 3]; 5] = [
        [68.0, 1.0, 84.0],
        [59.0, 82.0, 139.0],
        [33.0, 145.0, 140.0],
        [94.0, 201.0, 98.0],
        [253.0, 231.0, 37.0],
    ];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let s = t - i as f64;
    let c: Vec<u8> = (0..3)
        .map(|k| (STOPS[i][k] + s * (STOPS[i + 1][k] - STOPS[i][k])).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
}

/// Lattice cells as rectangles, with a colorbar. Cells holding exactly zero
/// lie outside the domain in a dump and are left blank.
fn heatmap(d: &LatticeDump) -> Result<String> {
    let live: Vec<f64> = d.values.iter().copied().filter(|&v| v != 0.0).collect();
    if live.is_empty() {
        return Err(Error::format("plot", "field is identically zero"));
    }
    let lo = live.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = live.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (nx, ny) = (d.nx, d.ny);
    let plot_w = WIDTH - 2.0 * PAD - 60.0;
    let plot_h = HEIGHT - 2.0 * PAD;
    let cell = (plot_w / nx as f64).min(plot_h / ny as f64);
    let (w, h) = (cell * nx as f64, cell * ny as f64);
    let mut out = String::new();
    header(&mut out);
    for j in 0..ny {
        for i in 0..nx {
            let v = d.values[j * nx + i];
            if v == 0.0 {
                continue;
            }
            // rows grow upwards
            let y = PAD + h - (j + 1) as f64 * cell;
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
                f(PAD + i as f64 * cell),
                f(y),
                f(cell + 0.05),
                f(cell + 0.05),
                color((v - lo) / span)
            );
        }
    }
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        f(PAD),
        f(PAD),
        f(w),
        f(h)
    );
    let bx = PAD + w + 20.0;
    let steps = 32;
    for k in 0..steps {
        let y = PAD + plot_h * (1.0 - (k + 1) as f64 / steps as f64);
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"16\" height=\"{}\" fill=\"{}\"/>",
            f(bx),
            f(y),
            f(plot_h / steps as f64 + 0.05),
            color((k as f64 + 0.5) / steps as f64)
        );
    }
    for (t, v) in [(0.0, lo), (0.5, 0.5 * (lo + hi)), (1.0, hi)] {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" font-family=\"sans-serif\">{}</text>",
            f(bx + 20.0),
            f(PAD + plot_h * (1.0 - t) + 4.0),
            label(v)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" font-family=\"sans-serif\">h = {}</text>",
        f(PAD),
        f(PAD - 12.0),
        label(d.h)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

fn range(vals: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let lo = vals.clone().fold(f64::INFINITY, f64::min);
    let hi = vals.fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        let m = 0.05 * (hi - lo);
        (lo - m, hi + m)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Polyline with axes and five ticks per axis. With `fit = (a, b)` the line
/// `a + b x` is overlaid from `x = 0`.
fn curve(pts: &[(f64, f64)], xname: &str, yname: &str, fit: Option<(f64, f64)>) -> Result<String> {
    if pts.is_empty() || pts.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::format("plot", "curve needs finite points"));
    }
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    if let Some((a, _)) = fit {
        xs.push(0.0);
        ys.push(a);
    }
    let (x0, x1) = range(xs.iter().copied());
    let (y0, y1) = range(ys.iter().copied());
    let (pw, ph) = (WIDTH - 2.0 * PAD, HEIGHT - 2.0 * PAD);
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| PAD + ph - (y - y0) / (y1 - y0) * ph;
    let mut out = String::new();
    header(&mut out);
    let _ = writeln!(
        out,
        "<path d=\"M{} {} V{} H{}\" fill=\"none\" stroke=\"black\"/>",
        f(PAD),
        f(PAD),
        f(PAD + ph),
        f(PAD + pw)
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let _ = writeln!(
            out,
            "<path d=\"M{} {} v5 M{} {} h-5\" stroke=\"black\"/>",
            f(sx(xv)),
            f(PAD + ph),
            f(PAD),
            f(sy(yv))
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"middle\">{}</text>",
            f(sx(xv)),
            f(PAD + ph + 18.0),
            label(xv)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"end\">{}</text>",
            f(PAD - 8.0),
            f(sy(yv) + 4.0),
            label(yv)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"middle\">{xname}</text>",
        f(PAD + pw / 2.0),
        f(HEIGHT - 15.0)
    );
    let _ = writeln!(
        out,
        "<text x=\"15\" y=\"{}\" font-size=\"12\" font-family=\"sans-serif\" transform=\"rotate(-90 15 {})\" text-anchor=\"middle\">{yname}</text>",
        f(PAD + ph / 2.0),
        f(PAD + ph / 2.0)
    );
    let mut sorted = pts.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let line: Vec<String> = sorted.iter().map(|&(x, y)| format!("{},{}", f(sx(x)), f(sy(y)))).collect();
    let _ = writeln!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\"/>",
        line.join(" ")
    );
    if fit.is_some() {
        for &(x, y) in &sorted {
            let _ = writeln!(
                out,
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"#1f4e9c\"/>",
                f(sx(x)),
                f(sy(y))
            );
        }
    }
    if let Some((a, b)) = fit {
        let xe = sorted.last().map_or(0.0, |p| p.0);
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#c0392b\" stroke-dasharray=\"6 4\"/>",
            f(sx(0.0)),
            f(sy(a)),
            f(sx(xe)),
            f(sy(a + b * xe))
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" font-family=\"sans-serif\" fill=\"#c0392b\">fit at 1/p = 0: {}</text>",
            f(sx(0.0) + 8.0),
            f(sy(a) - 8.0),
            label(a)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_plot_shows_fit() {
        let csv = "p,lambda,el_residual,iterations\n2,5.7,1e-9,3\n4,4.9,1e-9,3\n8,4.5,1e-9,3\n16,4.25,1e-9,3\n";
        let svg = emit_plot(PlotKind::Trace, csv, None).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("<polyline") && svg.contains("stroke-dasharray"));
        // fit over p = 8, 16 passes through both points: a = 4
        assert!(svg.contains("fit at 1/p = 0: 4<"), "{svg}");
        assert_eq!(svg, emit_plot(PlotKind::Trace, csv, None).unwrap());
    }

    #[test]
    fn heatmap_of_constant_field() {
        let dump = "2 3 2 5e-1\n0 -4 0\n-4 -4 0\n";
        let svg = emit_plot(PlotKind::Heatmap, dump, None).unwrap();
        assert_eq!(svg.matches(&format!("fill=\"{}\"", color(0.0))).count(), 3);
        assert!(emit_plot(PlotKind::Heatmap, "2 1 1 1\n0\n", None).is_err());
        assert!(emit_plot(PlotKind::Heatmap, "garbage", None).is_err());
    }

    #[test]
    fn radial_columns() {
        let csv = "r,w,load\n0,0.17,1\n0.5,0.1,1\n1,0,-1\n";
        let a = emit_plot(PlotKind::Radial, csv, None).unwrap();
        let b = emit_plot(PlotKind::Radial, csv, Some(("r", "w"))).unwrap();
        assert_eq!(a, b);
        assert!(emit_plot(PlotKind::Radial, csv, Some(("r", "nope"))).is_err());
    }

    #[test]
    fn ramp_ends() {
        assert_eq!(color(0.0), "#440154");
        assert_eq!(color(1.0), "#fde725");
        assert_eq!(color(2.0), "#fde725");
    }
}
