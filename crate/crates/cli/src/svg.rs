//! Deterministic SVG emission for segments, polygons, point clouds, and arc
//! polylines. The vertical axis is flipped so the imaginary unit renders
//! upward; stroke widths scale with the feature size.

use csst_core::{HullPolygon, Point, Segment};

const VIEW: &str = "-1.15 -1.15 2.4 2.4";

fn fmt(v: f64) -> String {
    format!("{v:.8}")
}

fn xy(p: &Point) -> (String, String) {
    let (x, y) = p.to_f64();
    (fmt(x), fmt(-y))
}

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{VIEW}\" width=\"800\" height=\"800\">\n"
    )
}

pub fn stroke_width(n: usize) -> f64 {
    (2f64.powi(1 - n as i32) / 4.0).max(0.0015)
}

pub fn segments_svg(segments: &[Segment], n: usize) -> String {
    let w = fmt(stroke_width(n));
    let mut out = header();
    out.push_str(&format!(
        "<g stroke=\"#1a1a66\" stroke-width=\"{w}\" stroke-linecap=\"round\">\n"
    ));
    for s in segments {
        let (x1, y1) = xy(&s.a);
        let (x2, y2) = xy(&s.b);
        out.push_str(&format!(
            "<line x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\"/>\n"
        ));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

pub fn polygons_svg(polys: &[HullPolygon], n: usize) -> String {
    let w = fmt(stroke_width(n) / 2.0);
    let mut out = header();
    out.push_str(&format!(
        "<g fill=\"#7788cc\" fill-opacity=\"0.25\" stroke=\"#223\" stroke-width=\"{w}\">\n"
    ));
    for p in polys {
        let pts: Vec<String> = p
            .vertices
            .iter()
            .map(|v| {
                let (x, y) = xy(v);
                format!("{x},{y}")
            })
            .collect();
        out.push_str(&format!("<polygon points=\"{}\"/>\n", pts.join(" ")));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

pub fn cloud_svg(points: &[Point], n: usize) -> String {
    let r = fmt(stroke_width(n) / 2.0);
    let mut out = header();
    out.push_str("<g fill=\"#1a1a66\">\n");
    for p in points {
        let (cx, cy) = xy(p);
        out.push_str(&format!("<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{r}\"/>\n"));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

pub fn polyline_svg(points: &[Point]) -> String {
    let mut out = header();
    let pts: Vec<String> = points
        .iter()
        .map(|v| {
            let (x, y) = xy(v);
            format!("{x},{y}")
        })
        .collect();
    out.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"#aa2222\" stroke-width=\"0.006\" points=\"{}\"/>\n",
        pts.join(" ")
    ));
    out.push_str("</svg>\n");
    out
}
