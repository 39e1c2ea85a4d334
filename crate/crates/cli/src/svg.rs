//! Minimal SVG line plot: one polyline plus dotted vertical markers.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 40.0;

pub fn density_plot(points: &[(f64, f64)], markers: &[f64], title: &str) -> String {
    let (x0, x1) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let y1 = points.iter().map(|p| p.1).fold(0.0, f64::max).max(1e-12) * 1.05;
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - y / y1 * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<title>{title}</title>"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    // axes
    let _ = writeln!(
        s,
        r#"<path d="M{:.2} {:.2} H{:.2} M{:.2} {:.2} V{:.2}" stroke="black" fill="none"/>"#,
        PAD,
        H - PAD,
        W - PAD,
        sx(0.0f64.clamp(x0, x1)),
        H - PAD,
        PAD
    );
    for k in (x0.ceil() as i64)..=(x1.floor() as i64) {
        let x = sx(k as f64);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{k}</text>"#,
            H - PAD + 15.0
        );
    }
    let pts: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" stroke="black" stroke-width="1.5" fill="none"/>"#, pts.join(" "));
    for &m in markers {
        if m >= x0 && m <= x1 {
            let _ = writeln!(
                s,
                r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black" stroke-dasharray="2,3"/>"#,
                sx(m),
                H - PAD,
                PAD
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn has_curve_and_marker() {
        let s = density_plot(&[(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)], &[0.5, 9.0], "t");
        assert!(s.contains("<polyline"));
        assert_eq!(s.matches("stroke-dasharray").count(), 1);
        assert!(s.ends_with("</svg>\n"));
    }
}
