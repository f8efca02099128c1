//! Minimal deterministic SVG line plots: linear axes, one polyline per series,
//! optional horizontal reference lines and a legend.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;
const TICKS: usize = 5;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Dashed horizontal lines at `(y, label)`.
    pub hlines: Vec<(f64, String)>,
    pub log_x: bool,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Plot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
            hlines: Vec::new(),
            log_x: false,
        }
    }

    pub fn series(mut self, name: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series { name: name.into(), points });
        self
    }

    pub fn hline(mut self, y: f64, label: &str) -> Self {
        self.hlines.push((y, label.into()));
        self
    }

    pub fn log_x(mut self) -> Self {
        self.log_x = true;
        self
    }

    pub fn render(&self) -> String {
        let fx = |x: f64| if self.log_x { x.log2() } else { x };
        let xs: Vec<f64> = self.series.iter().flat_map(|s| s.points.iter().map(|p| fx(p.0))).collect();
        let ys: Vec<f64> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .chain(self.hlines.iter().map(|h| h.0))
            .collect();
        let (x0, x1) = padded_range(&xs);
        let (y0, y1) = padded_range(&ys);
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        let sx = |x: f64| LEFT + (fx(x) - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>"#
        );
        for k in 0..=TICKS {
            let t = k as f64 / TICKS as f64;
            let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
            let (px, py) = (LEFT + t * pw, TOP + (1.0 - t) * ph);
            let xl = if self.log_x { format_tick(xv.exp2()) } else { format_tick(xv) };
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#,
                TOP + ph,
                TOP + ph + 4.0
            );
            let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{xl}</text>"#, TOP + ph + 18.0);
            let _ =
                writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/>"#, LEFT - 4.0);
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 7.0,
                py + 4.0,
                format_tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (y, label) in &self.hlines {
            let py = sy(*y);
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#888" stroke-dasharray="5,4"/>"##,
                LEFT + pw
            );
            let _ = writeln!(
                s,
                r##"<text x="{:.2}" y="{:.2}" text-anchor="end" fill="#555">{}</text>"##,
                LEFT + pw - 4.0,
                py - 4.0,
                escape(label)
            );
        }
        for (k, series) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let pts: Vec<String> = series.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                pts.join(" ")
            );
            for &(x, y) in &series.points {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
            }
            let ly = TOP + 16.0 + 16.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
                LEFT + 12.0,
                LEFT + 32.0
            );
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, LEFT + 38.0, ly + 4.0, escape(&series.name));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn padded_range(values: &[f64]) -> (f64, f64) {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return (0.0, 1.0);
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

fn format_tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        return format!("{v:.2e}");
    }
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_deterministically() {
        let plot = Plot::new("ratio", "r", "m/w").series("linear", vec![(0.1, 1.0), (0.2, 0.9)]).hline(1.0, "one");
        let a = plot.render();
        assert_eq!(a, plot.render());
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<polyline").count(), 1);
        assert!(a.contains("stroke-dasharray"));
    }

    #[test]
    fn ticks_trim_zeros() {
        assert_eq!(format_tick(0.5), "0.5");
        assert_eq!(format_tick(2.0), "2");
        assert_eq!(format_tick(0.0), "0");
    }
}
