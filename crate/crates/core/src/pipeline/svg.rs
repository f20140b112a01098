//! Minimal self-contained SVG charts: grouped bars and line series.
//! Coordinates are printed with two decimals so output is stable.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

/// A "nice" axis maximum at or above `v`.
fn nice_max(v: f64) -> f64 {
    if v.is_nan() || v <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    for m in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if m * mag >= v {
            return m * mag;
        }
    }
    10.0 * mag
}

fn y_axis(out: &mut String, min: f64, max: f64, label: &str) {
    let plot_h = HEIGHT - TOP - BOTTOM;
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{:.2}" stroke="black"/>"#,
        HEIGHT - BOTTOM
    );
    for i in 0..=5 {
        let v = min + (max - min) * f64::from(i) / 5.0;
        let y = HEIGHT - BOTTOM - plot_h * f64::from(i) / 5.0;
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT,
            WIDTH - RIGHT,
            LEFT - 6.0,
            y + 4.0,
            format_tick(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(label)
    );
}

fn format_tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.trunc() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let x = LEFT + 10.0 + 150.0 * i as f64;
        let y = HEIGHT - 18.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{}"/><text x="{:.2}" y="{y:.2}">{}</text>"#,
            y - 10.0,
            PALETTE[i % PALETTE.len()],
            x + 16.0,
            escape(name)
        );
    }
}

/// Grouped bar chart: one group per category, one bar per series.
pub fn grouped_bars(title: &str, categories: &[String], series: &[(&str, Vec<f64>)], y_label: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let max = nice_max(series.iter().flat_map(|(_, v)| v.iter().copied()).fold(0.0, f64::max));
    y_axis(&mut out, 0.0, max, y_label);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let group_w = plot_w / categories.len().max(1) as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    for (c, cat) in categories.iter().enumerate() {
        let gx = LEFT + group_w * c as f64 + group_w * 0.1;
        for (s, (_, values)) in series.iter().enumerate() {
            let v = values.get(c).copied().unwrap_or(0.0);
            let h = plot_h * v / max;
            let x = gx + bar_w * s as f64;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="{}"><title>{}</title></rect>"#,
                HEIGHT - BOTTOM - h,
                bar_w,
                PALETTE[s % PALETTE.len()],
                format_tick(v)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            gx + group_w * 0.4,
            HEIGHT - BOTTOM + 16.0,
            escape(cat)
        );
    }
    let names: Vec<&str> = series.iter().map(|(n, _)| *n).collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

/// Line chart of series sharing the x axis `1..=len`.
pub fn line_chart(title: &str, series: &[(&str, Vec<f64>)], x_label: &str, y_label: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let finite = series.iter().flat_map(|(_, v)| v.iter().copied()).filter(|v| v.is_finite());
    let max = nice_max(finite.fold(0.0, f64::max));
    y_axis(&mut out, 0.0, max, y_label);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let n = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        HEIGHT - BOTTOM,
        WIDTH - RIGHT,
        HEIGHT - BOTTOM
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text><text x="{LEFT:.2}" y="{:.2}" text-anchor="middle">1</text><text x="{:.2}" y="{:.2}" text-anchor="middle">{n}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - BOTTOM + 30.0,
        escape(x_label),
        HEIGHT - BOTTOM + 16.0,
        WIDTH - RIGHT,
        HEIGHT - BOTTOM + 16.0
    );
    let step = if n > 1 { plot_w / (n - 1) as f64 } else { 0.0 };
    for (s, (_, values)) in series.iter().enumerate() {
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, v)| format!("{:.2},{:.2}", LEFT + step * i as f64, HEIGHT - BOTTOM - plot_h * (v / max).min(1.0)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            PALETTE[s % PALETTE.len()],
            points.join(" ")
        );
    }
    let names: Vec<&str> = series.iter().map(|(n, _)| *n).collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nice_axis() {
        assert_eq!(nice_max(6040.0), 10000.0);
        assert_eq!(nice_max(1.7), 2.0);
        assert_eq!(nice_max(0.0), 1.0);
        assert_eq!(nice_max(240.0), 250.0);
    }

    #[test]
    fn bars_are_well_formed() {
        let cats = vec!["A & B".to_string(), "C".to_string()];
        let svg = grouped_bars("t", &cats, &[("before", vec![3.0, 1.0]), ("after", vec![3.0, 3.0])], "count");
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<rect x=").count(), 4 + 2);
        assert!(svg.contains("A &amp; B"));
        assert_eq!(svg, grouped_bars("t", &cats, &[("before", vec![3.0, 1.0]), ("after", vec![3.0, 3.0])], "count"));
    }

    #[test]
    fn lines_have_one_point_per_value() {
        let svg = line_chart("loss", &[("train", vec![1.0, 0.5, 0.25])], "round", "log loss");
        let poly = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(poly.matches(',').count(), 3);
    }
}
