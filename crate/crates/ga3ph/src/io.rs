//! Trace CSV and SVG line plots.

use std::fmt::Write as _;

use ga3ph_core::sim::{SimTrace, CSV_HEADER};

use crate::text::ParseError;

/// Header row plus one LF-terminated row per sample, shortest round-trip floats.
pub fn trace_to_csv(tr: &SimTrace) -> String {
    let cols = tr.columns();
    let mut s = String::with_capacity(tr.len() * 200);
    s.push_str(CSV_HEADER);
    s.push('\n');
    for i in 0..tr.len() {
        for (j, c) in cols.iter().enumerate() {
            if j > 0 {
                s.push(',');
            }
            write!(s, "{}", c[i]).expect("writing to a String");
        }
        s.push('\n');
    }
    s
}

/// Inverse of [`trace_to_csv`]. `diverged_at` is not stored and comes back `None`.
pub fn trace_from_csv(text: &str) -> Result<SimTrace, ParseError> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(ParseError::new(format!("expected header '{CSV_HEADER}'")));
    }
    let mut tr = SimTrace::default();
    for (i, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split(',')
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| ParseError::new(format!("row {}: {e}", i + 1)))?;
        if vals.len() != 10 {
            return Err(ParseError::new(format!(
                "row {}: expected 10 fields, got {}",
                i + 1,
                vals.len()
            )));
        }
        let cols = [
            &mut tr.t,
            &mut tr.ref_alpha,
            &mut tr.ref_beta,
            &mut tr.y_alpha,
            &mut tr.y_beta,
            &mut tr.u_alpha,
            &mut tr.u_beta,
            &mut tr.va,
            &mut tr.vb,
            &mut tr.vc,
        ];
        for (c, v) in cols.into_iter().zip(vals) {
            c.push(v);
        }
    }
    Ok(tr)
}

const W: f64 = 800.0;
const H: f64 = 600.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const PANEL_H: f64 = 240.0;
const TOPS: [f64; 2] = [40.0, 320.0];

fn extent(series: &[&[f64]]) -> (f64, f64) {
    let (lo, hi) = series
        .iter()
        .flat_map(|s| s.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 * hi.abs().max(1.0) {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn polyline(
    s: &mut String,
    t: &[f64],
    y: &[f64],
    t_range: (f64, f64),
    y_range: (f64, f64),
    top: f64,
    style: &str,
) {
    let width = W - LEFT - RIGHT;
    let sx = |x: f64| LEFT + (x - t_range.0) / (t_range.1 - t_range.0) * width;
    let sy = |v: f64| top + PANEL_H - (v - y_range.0) / (y_range.1 - y_range.0) * PANEL_H;
    s.push_str("<polyline fill=\"none\" ");
    s.push_str(style);
    s.push_str(" points=\"");
    for (i, (&x, &v)) in t.iter().zip(y).enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{:.2},{:.2}", sx(x), sy(v)).expect("writing to a String");
    }
    s.push_str("\"/>\n");
}

/// Two stacked panels (α over β), reference dashed and output solid, with a
/// legend. Byte-identical for identical traces.
pub fn trace_to_svg(tr: &SimTrace) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    )
    .expect("writing to a String");
    writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>"
    )
    .expect("writing to a String");
    let t_range = match (tr.t.first(), tr.t.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        (Some(&a), _) => (a, a + 1.0),
        _ => (0.0, 1.0),
    };
    let panels: [(&str, &[f64], &[f64]); 2] = [
        ("alpha", &tr.ref_alpha, &tr.y_alpha),
        ("beta", &tr.ref_beta, &tr.y_beta),
    ];
    for ((name, r, y), top) in panels.into_iter().zip(TOPS) {
        let yr = extent(&[r, y]);
        writeln!(
            s,
            "<rect x=\"{LEFT}\" y=\"{top}\" width=\"{}\" height=\"{PANEL_H}\" fill=\"none\" stroke=\"black\"/>",
            W - LEFT - RIGHT
        )
        .expect("writing to a String");
        if yr.0 < 0.0 && yr.1 > 0.0 {
            let z = top + PANEL_H - (0.0 - yr.0) / (yr.1 - yr.0) * PANEL_H;
            writeln!(
                s,
                "<line x1=\"{LEFT}\" y1=\"{z:.2}\" x2=\"{}\" y2=\"{z:.2}\" stroke=\"#bbbbbb\"/>",
                W - RIGHT
            )
            .expect("writing to a String");
        }
        let label = |s: &mut String, y: f64, v: f64| {
            writeln!(
                s,
                "<text x=\"{}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{v:.4}</text>",
                LEFT - 5.0
            )
            .expect("writing to a String");
        };
        label(&mut s, top + 10.0, yr.1);
        label(&mut s, top + PANEL_H, yr.0);
        writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\">{name}</text>",
            LEFT + 5.0,
            top - 6.0
        )
        .expect("writing to a String");
        polyline(
            &mut s,
            &tr.t,
            r,
            t_range,
            yr,
            top,
            "stroke=\"#888888\" stroke-dasharray=\"4 3\"",
        );
        polyline(&mut s, &tr.t, y, t_range, yr, top, "stroke=\"#1f4e9c\"");
    }
    let lx = W - RIGHT - 150.0;
    writeln!(
        s,
        "<line x1=\"{lx}\" y1=\"20\" x2=\"{}\" y2=\"20\" stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"11\">reference</text>",
        lx + 25.0,
        lx + 30.0
    )
    .expect("writing to a String");
    writeln!(
        s,
        "<line x1=\"{}\" y1=\"20\" x2=\"{}\" y2=\"20\" stroke=\"#1f4e9c\"/>\n<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"11\">output</text>",
        lx + 85.0,
        lx + 110.0,
        lx + 115.0
    )
    .expect("writing to a String");
    writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{:.4} s</text>\n<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.4} s</text>",
        LEFT,
        H - 15.0,
        t_range.0,
        W - RIGHT,
        H - 15.0,
        t_range.1
    )
    .expect("writing to a String");
    s.push_str("</svg>\n");
    s
}
