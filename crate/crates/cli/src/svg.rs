//! Self-contained log-log SVG plots with the data points embedded.

use liouville_core::asymptotics::{ErrorProfile, RateFit};
use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Positive `(x, y)` pairs; others are not drawn.
    pub points: Vec<(f64, f64)>,
    pub fit: Option<RateFit>,
}

impl Plot {
    pub fn from_profile(prof: &ErrorProfile, fit: Option<&RateFit>, title: &str, x_label: &str, y_label: &str) -> Self {
        Plot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            points: prof.samples.iter().map(|s| (s.x, s.error.abs())).collect(),
            fit: fit.copied(),
        }
    }

    pub fn render(&self) -> String {
        let pts: Vec<(f64, f64)> = self.points.iter().copied().filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()).collect();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &pts {
            x0 = x0.min(x.log10());
            x1 = x1.max(x.log10());
            y0 = y0.min(y.log10());
            y1 = y1.max(y.log10());
        }
        if pts.is_empty() {
            (x0, x1, y0, y1) = (-1.0, 0.0, -1.0, 0.0);
        }
        let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
        let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |lx: f64| MARGIN_LEFT + (lx - x0) / (x1 - x0) * pw;
        let sy = |ly: f64| MARGIN_TOP + (y1 - ly) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let _ = writeln!(s, r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for k in x0 as i32..=x1 as i32 {
            let x = sx(k as f64);
            let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, MARGIN_TOP + ph, MARGIN_TOP + ph - 5.0);
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{k}</text>"#, MARGIN_TOP + ph + 16.0);
        }
        for k in y0 as i32..=y1 as i32 {
            let y = sy(k as f64);
            let _ = writeln!(s, r#"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/>"#, MARGIN_LEFT + 5.0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{k}</text>"#, MARGIN_LEFT - 6.0, y + 4.0);
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, MARGIN_LEFT + pw / 2.0, HEIGHT - 12.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            MARGIN_TOP + ph / 2.0,
            MARGIN_TOP + ph / 2.0,
            escape(&self.y_label)
        );
        let _ = writeln!(s, r#"<g fill="steelblue">"#);
        for &(x, y) in &pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" data-x="{x}" data-y="{y}"/>"#, sx(x.log10()), sy(y.log10()));
        }
        let _ = writeln!(s, "</g>");
        if let Some(f) = &self.fit {
            let (a, b) = (f.window.0.log10(), f.window.1.log10());
            let line = |lx: f64| f.intercept / std::f64::consts::LN_10 + f.slope * lx;
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-width="1.5"/>"#,
                sx(a),
                sy(line(a)),
                sx(b),
                sy(line(b))
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" fill="firebrick">slope = {:.3}, C = {:.3e}, n = {}</text>"#,
                MARGIN_LEFT + 10.0,
                MARGIN_TOP + 18.0,
                f.slope,
                f.constant,
                f.n
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
