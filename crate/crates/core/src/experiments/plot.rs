//! Minimal standalone SVG line charts.

use std::fmt::Write;

use super::{GrowthReport, SmoothingReport};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

impl LineChart {
    fn transform(&self, (x, y): (f64, f64)) -> Option<(f64, f64)> {
        let x = if self.log_x { x.log10() } else { x };
        let y = if self.log_y { y.log10() } else { y };
        (x.is_finite() && y.is_finite()).then_some((x, y))
    }

    /// Renders the chart; points that are non-finite after the axis
    /// transform are dropped.
    pub fn to_svg(&self) -> String {
        let series: Vec<(&Series, Vec<(f64, f64)>)> = self
            .series
            .iter()
            .map(|s| (s, s.points.iter().filter_map(|&p| self.transform(p)).collect()))
            .collect();
        let all = series.iter().flat_map(|(_, p)| p.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 == x0 {
            x1 = x0 + 1.0;
        }
        if y1 == y0 {
            y1 = y0 + 1.0;
        }
        let plot_w = WIDTH - 2.0 * MARGIN;
        let plot_h = HEIGHT - 2.0 * MARGIN;
        let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
        let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
        );
        let tick = |v: f64, log: bool| {
            if log {
                format!("1e{v:.2}")
            } else {
                format!("{v:.3}")
            }
        };
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = x0 + f * (x1 - x0);
            let yv = y0 + f * (y1 - y0);
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#,
                px(xv),
                HEIGHT - MARGIN + 16.0,
                tick(xv, self.log_x)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"#,
                MARGIN - 6.0,
                py(yv) + 4.0,
                tick(yv, self.log_y)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (i, (s, pts)) in series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            if !pts.is_empty() {
                let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
                let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
                    path.join(" ")
                );
            }
            let ly = MARGIN + 14.0 + 16.0 * i as f64;
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{ly:.2}" font-size="11" fill="{color}">{}</text>"#,
                MARGIN + 8.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// ‖w̃(t)‖_{H^{s+γ}} against t for each γ, with the tail slopes of u and w̃.
pub fn render_smoothing_plot(report: &SmoothingReport) -> String {
    let mut series: Vec<Series> = report
        .gammas
        .iter()
        .enumerate()
        .map(|(j, g)| Series {
            label: format!("|w(t)| in H^{}", report.s + g),
            points: report.rows.iter().map(|r| (r.t, r.norms[j])).collect(),
            dashed: false,
        })
        .collect();
    series.push(Series {
        label: "-slope u (log10 scale)".into(),
        points: report.rows.iter().map(|r| (r.t, -r.slope_u)).collect(),
        dashed: true,
    });
    series.push(Series {
        label: "-slope w (log10 scale)".into(),
        points: report.rows.iter().map(|r| (r.t, -r.slope_w)).collect(),
        dashed: true,
    });
    LineChart {
        title: format!("smoothing, P = {}, N = {}, gamma_fit = {:.3}", report.meta.p, report.meta.cutoff, report.gamma_fit),
        x_label: "t".into(),
        y_label: "norm".into(),
        log_x: false,
        log_y: true,
        series,
    }
    .to_svg()
}

/// log-log ‖u(t)‖_{H^s} against ⟨t⟩ with the fitted power law over the
/// final half.
pub fn render_growth_plot(report: &GrowthReport) -> String {
    let japanese = |t: f64| (1.0 + t * t).sqrt();
    let norm = Series {
        label: format!("|u(t)| in H^{}", report.s),
        points: report.rows.iter().map(|r| (japanese(r.t), r.hs_norm)).collect(),
        dashed: false,
    };
    let high = Series {
        label: "high window part".into(),
        points: report.rows.iter().map(|r| (japanese(r.t), r.high_norm)).collect(),
        dashed: false,
    };
    let mut series = vec![norm, high];
    if let (Some(last), true) = (report.rows.last(), report.alpha.is_finite()) {
        let start = report.rows.iter().find(|r| r.t >= 0.5 * report.meta.horizon).unwrap_or(last);
        let (t0, t1) = (japanese(start.t), japanese(last.t));
        series.push(Series {
            label: format!("fit alpha = {:.4}", report.alpha),
            points: vec![(t0, start.hs_norm), (t1, start.hs_norm * (t1 / t0).powf(report.alpha))],
            dashed: true,
        });
    }
    LineChart {
        title: format!("growth, P = {}, N = {}", report.meta.p, report.meta.cutoff),
        x_label: "<t>".into(),
        y_label: format!("H^{} norm", report.s),
        log_x: true,
        log_y: true,
        series,
    }
    .to_svg()
}
