use std::fmt::Write;

use teegrade::metrics::VideoStat;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 50.0;

/// Scatter of per-video mean prediction against truth, with the identity line.
pub fn scatter(videos: &[VideoStat], max: f64, title: &str) -> String {
    let span = SIZE - 2.0 * MARGIN;
    let x = |v: f64| MARGIN + span * (v / max).clamp(0.0, 1.0);
    let y = |v: f64| SIZE - MARGIN - span * (v / max).clamp(0.0, 1.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{span}" height="{span}" fill="none" stroke="#444"/>"##
    );
    let _ = writeln!(
        s,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#999" stroke-dasharray="4 3"/>"##,
        x(0.0),
        y(0.0),
        x(max),
        y(max)
    );
    for tick in 0..=4 {
        let v = max * f64::from(tick) / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{v}</text>"#, x(v), SIZE - MARGIN + 18.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{v}</text>"#, MARGIN - 6.0, y(v) + 4.0);
    }
    for v in videos {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f77b4" fill-opacity="0.7"><title>video {}: truth {:.2}, predicted {:.2} (σ {:.2})</title></circle>"##,
            x(v.truth),
            y(v.mean_pred),
            v.video_id,
            v.truth,
            v.mean_pred,
            v.sigma
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="14">{title}</text>"#, SIZE / 2.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">true score</text>"#, SIZE / 2.0, SIZE - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">predicted score</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    s.push_str("</svg>\n");
    s
}
