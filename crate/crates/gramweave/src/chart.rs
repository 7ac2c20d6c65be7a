//! SVG bar chart of a report: per corpus, train and test accuracy for each
//! embedding source, taken from the `n = all` rows.

use std::fmt::Write as _;

use crate::report::Report;

const SERIES: [(&str, bool, &str); 4] = [
    ("RE", true, "#9ecae1"),
    ("RE", false, "#3182bd"),
    ("CE", true, "#fdae6b"),
    ("CE", false, "#e6550d"),
];
const BAR: f64 = 28.0;
const GAP: f64 = 40.0;
const PLOT_H: f64 = 260.0;
const LEFT: f64 = 60.0;
const TOP: f64 = 40.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_svg(report: &Report) -> String {
    let mut report = report.clone();
    if report.rows.iter().all(|r| r.n.is_some()) {
        report.add_aggregates();
    }
    let mut corpora: Vec<&str> = Vec::new();
    for r in &report.rows {
        if !corpora.contains(&r.corpus.as_str()) {
            corpora.push(&r.corpus);
        }
    }
    let group_w = BAR * SERIES.len() as f64 + GAP;
    let width = LEFT + group_w * corpora.len().max(1) as f64 + 20.0;
    let height = TOP + PLOT_H + 90.0;
    let y = |acc: f64| TOP + PLOT_H * (1.0 - acc.clamp(0.0, 1.0));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<text x="{LEFT}" y="20" font-size="14">Next-word accuracy (%)</text>"#);
    for tick in 0..=5 {
        let v = tick as f64 / 5.0;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" x2="{}" y1="{y}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{}</text>"##,
            width - 20.0,
            LEFT - 6.0,
            y(v) + 4.0,
            tick * 20,
            y = y(v)
        );
    }
    for (g, corpus) in corpora.iter().enumerate() {
        let x0 = LEFT + GAP / 2.0 + g as f64 * group_w;
        for (k, (source, is_train, color)) in SERIES.iter().enumerate() {
            let row = report.rows.iter().find(|r| r.n.is_none() && r.corpus == *corpus && r.source == *source);
            let Some(row) = row else { continue };
            let acc = if *is_train { row.train_acc } else { row.test_acc };
            let x = x0 + k as f64 * BAR;
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{}" width="{}" height="{}" fill="{color}"/><text x="{}" y="{}" text-anchor="middle">{:.1}</text>"#,
                y(acc),
                BAR - 4.0,
                TOP + PLOT_H - y(acc),
                x + (BAR - 4.0) / 2.0,
                y(acc) - 4.0,
                100.0 * acc
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            x0 + BAR * 2.0,
            TOP + PLOT_H + 18.0,
            escape(corpus)
        );
    }
    for (k, (source, is_train, color)) in SERIES.iter().enumerate() {
        let x = LEFT + k as f64 * 90.0;
        let ly = TOP + PLOT_H + 50.0;
        let split = if *is_train { "Train" } else { "Test" };
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{ly}">{source}-{split}</text>"#,
            ly - 10.0,
            x + 16.0
        );
    }
    s.push_str("</svg>\n");
    s
}
