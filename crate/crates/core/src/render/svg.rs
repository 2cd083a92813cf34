use std::fmt::Write;

use super::STROKE_WIDTH;
use crate::geometry::{Geometry, Point2, Shape};
use crate::scene::SceneDescription;

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn points_attr(points: &[Point2]) -> String {
    points
        .iter()
        .map(|p| format!("{},{}", num(p.x), num(p.y)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn element(shape: &Shape) -> String {
    let deg = num(shape.rotation.to_degrees());
    match &shape.geometry {
        Geometry::Line { p0, p1 } => format!(
            r#"<line id="s{}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            shape.id,
            num(p0.x),
            num(p0.y),
            num(p1.x),
            num(p1.y)
        ),
        Geometry::Circle { center, radius } => format!(
            r#"<circle id="s{}" cx="{}" cy="{}" r="{}"/>"#,
            shape.id,
            num(center.x),
            num(center.y),
            num(*radius)
        ),
        Geometry::Ellipse {
            center,
            semi_major,
            semi_minor,
        } => format!(
            r#"<ellipse id="s{}" cx="{}" cy="{}" rx="{}" ry="{}" transform="rotate({deg} {} {})"/>"#,
            shape.id,
            num(center.x),
            num(center.y),
            num(*semi_major),
            num(*semi_minor),
            num(center.x),
            num(center.y)
        ),
        Geometry::Polygon { vertices } => {
            format!(r#"<polygon id="s{}" points="{}"/>"#, shape.id, points_attr(vertices))
        }
        Geometry::Rect { center, width, height } => format!(
            r#"<rect id="s{}" x="{}" y="{}" width="{}" height="{}" transform="rotate({deg} {} {})"/>"#,
            shape.id,
            num(center.x - width / 2.0),
            num(center.y - height / 2.0),
            num(*width),
            num(*height),
            num(center.x),
            num(center.y)
        ),
        Geometry::Spiral { .. } => {
            format!(
                r#"<polyline id="s{}" points="{}"/>"#,
                shape.id,
                points_attr(&shape.outline().points)
            )
        }
    }
}

/// SVG document on a unit viewBox, y axis flipped so canvas coordinates are
/// used verbatim. One element per shape in id order.
pub fn render_svg(desc: &SceneDescription) -> String {
    let mut shapes: Vec<&Shape> = desc.shapes.iter().collect();
    shapes.sort_by_key(|s| s.id);
    let mut out = String::new();
    out.push_str(r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    out.push('\n');
    out.push_str(
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="640" height="640" viewBox="0 0 1 1">"#,
    );
    out.push('\n');
    out.push_str(r#"<rect x="0" y="0" width="1" height="1" fill="white"/>"#);
    out.push('\n');
    let _ = writeln!(
        out,
        r#"<g transform="matrix(1 0 0 -1 0 1)" fill="none" stroke="black" stroke-width="{}">"#,
        num(STROKE_WIDTH)
    );
    for s in shapes {
        out.push_str(&element(s));
        out.push('\n');
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::tests::scene_of;

    #[test]
    fn empty_scene_has_background_only() {
        let svg = render_svg(&scene_of(vec![]));
        assert_eq!(svg.matches("<rect").count(), 1);
        assert!(!svg.contains("<circle"));
    }

    #[test]
    fn single_circle_element() {
        let svg = render_svg(&scene_of(vec![Shape::circle(0, Point2::new(0.3, 0.7), 0.1)]));
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains(r#"cx="0.300000" cy="0.700000" r="0.100000""#));
    }

    #[test]
    fn deterministic_bytes_and_id_order() {
        let d = scene_of(vec![
            Shape::square(2, Point2::new(0.3, 0.3), 0.2, 0.3),
            Shape::line(1, Point2::new(0.1, 0.1), Point2::new(0.4, 0.2)),
        ]);
        let a = render_svg(&d);
        assert_eq!(a, render_svg(&d));
        assert!(a.find("id=\"s1\"").unwrap() < a.find("id=\"s2\"").unwrap());
    }
}
