//! Minimal SVG line plot of exponent-versus-psi curves.

use std::fmt::Write;

use cellscale::theory::Scheme;

use crate::commands::Curve;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

/// A measured exponent drawn as a marker over the curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlay {
    pub scheme: Scheme,
    pub psi: f64,
    pub exponent: f64,
}

fn color(s: Scheme) -> &'static str {
    match s {
        Scheme::Ub => "#1b1b1b",
        Scheme::Capacity => "#7f7f7f",
        Scheme::Ish => "#d62728",
        Scheme::Imh => "#1f77b4",
        Scheme::Irh => "#2ca02c",
    }
}

fn dash(s: Scheme) -> &'static str {
    match s {
        Scheme::Ub => "8 4",
        _ => "none",
    }
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 { 0.0 } else { t });
        t += step;
    }
    out
}

pub fn render(curves: &[Curve], overlay: &[Overlay], title: &str) -> String {
    let xs = curves.iter().flat_map(|c| c.points.iter().map(|p| p.0));
    let x_max = xs.fold(0.0f64, f64::max).max(1e-9);
    let ys: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.1))
        .chain(overlay.iter().map(|o| o.exponent))
        .collect();
    let mut y_lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let mut y_hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !y_lo.is_finite() {
        (y_lo, y_hi) = (-1.0, 1.0);
    }
    let pad = ((y_hi - y_lo) * 0.08).max(0.05);
    y_lo -= pad;
    y_hi += pad;

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + x / x_max * pw;
    let sy = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );

    // grid and ticks
    for t in ticks(0.0, x_max) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e5e5e5"/>"##,
            TOP + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            fmt_tick(t)
        );
    }
    for t in ticks(y_lo, y_hi) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e5e5e5"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">bandwidth exponent psi</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">per-node rate exponent</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (i, c) in curves.iter().enumerate() {
        let pts: Vec<String> = c
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" stroke-dasharray="{}" points="{}"/>"#,
            color(c.scheme),
            dash(c.scheme),
            pts.join(" ")
        );
        for &b in c.breakpoints.iter().filter(|b| **b <= x_max) {
            if let Some(&(_, y)) = c.points.iter().find(|p| (p.0 - b).abs() < 1e-12) {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
                    sx(b),
                    sy(y),
                    color(c.scheme)
                );
            }
        }
        let ly = TOP + 14.0 + 20.0 * i as f64;
        let lx = LEFT + pw + 16.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2" stroke-dasharray="{}"/>"#,
            lx + 26.0,
            color(c.scheme),
            dash(c.scheme)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}-{}</text>"#,
            lx + 32.0,
            ly + 4.0,
            c.scheme.as_str().to_uppercase(),
            c.direction.as_str().to_uppercase()
        );
    }

    for o in overlay {
        let (x, y) = (sx(o.psi.min(x_max)), sy(o.exponent));
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="8" height="8" fill="none" stroke="{}" stroke-width="2"/>"#,
            x - 4.0,
            y - 4.0,
            color(o.scheme)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(t: f64) -> String {
    let r = format!("{t:.3}");
    r.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use cellscale::Direction;

    #[test]
    fn tick_spacing_is_round() {
        assert_eq!(ticks(0.0, 3.0), vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]);
        assert_eq!(fmt_tick(2.5), "2.5");
        assert_eq!(fmt_tick(-1.0), "-1");
    }

    #[test]
    fn one_polyline_per_curve() {
        let c = Curve {
            scheme: Scheme::Ish,
            direction: Direction::Dl,
            breakpoints: vec![1.0],
            points: vec![(0.0, -0.25), (1.0, 0.75), (2.0, 0.75)],
        };
        let svg = render(&[c.clone(), Curve { scheme: Scheme::Imh, ..c }], &[], "a < b");
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt; b"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
