//! Minimal SVG line plots of tail tables. Cosmetic only; CSV is normative.

use std::fmt::Write;

use super::EstimateRow;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;
/// Probabilities below this are drawn on the floor of the log axis.
const FLOOR: f64 = 1e-6;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

struct Axes {
    x0: f64,
    x1: f64,
}

impl Axes {
    fn x(&self, r: f64) -> f64 {
        let t = if self.x1 > self.x0 {
            (r.ln() - self.x0) / (self.x1 - self.x0)
        } else {
            0.5
        };
        PAD + t * (W - 2.0 * PAD)
    }

    fn y(&self, p: f64) -> f64 {
        let t = (p.max(FLOOR).log10() - FLOOR.log10()) / -FLOOR.log10();
        H - PAD - t * (H - 2.0 * PAD)
    }
}

fn polyline(out: &mut String, pts: &[(f64, f64)], color: &str, dash: &str) {
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}" points="{}"/>"#,
        coords.join(" ")
    );
}

/// Log-log plot of `p_upper` (solid), `p_lower` (dashed) and the theory
/// envelope (dotted) against `r`, one color per (λ, law) cell.
pub fn tail_plot(rows: &[EstimateRow]) -> String {
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
            (a.min(r.r), b.max(r.r))
        });
    let axes = Axes {
        x0: lo.ln(),
        x1: hi.ln(),
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    for e in 0..=6 {
        let p = 10f64.powi(-e);
        let y = axes.y(p);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.1}" text-anchor="end">1e-{e}</text>"#,
            PAD - 4.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">r (log scale)</text>"#,
        W / 2.0,
        H - 16.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{PAD}" y="{}" >{lo:.3} .. {hi:.3}</text>"#,
        H - PAD + 16.0
    );
    let mut cells: Vec<(f64, &str)> = Vec::new();
    for r in rows {
        if !cells.iter().any(|c| c.0 == r.lambda && c.1 == r.law) {
            cells.push((r.lambda, &r.law));
        }
    }
    for (i, (lambda, law)) in cells.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let sel: Vec<&EstimateRow> = rows
            .iter()
            .filter(|r| r.lambda == *lambda && r.law == *law)
            .collect();
        let line = |f: &dyn Fn(&EstimateRow) -> f64| {
            sel.iter()
                .map(|r| (axes.x(r.r), axes.y(f(r))))
                .collect::<Vec<_>>()
        };
        polyline(&mut out, &line(&|r| r.p_upper), color, "none");
        polyline(&mut out, &line(&|r| r.p_lower), color, "6 3");
        polyline(&mut out, &line(&|r| r.cluster_tail_envelope), color, "1 3");
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">λ={lambda} {law}</text>"#,
            PAD + 6.0,
            PAD + 14.0 * (i as f64 + 1.0)
        );
    }
    out.push_str("</svg>\n");
    out
}
