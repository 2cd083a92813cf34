use serde::{Deserialize, Serialize};

use super::{Geometry, Point2, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl BBox {
    pub fn from_points(points: impl IntoIterator<Item = Point2>) -> BBox {
        let mut b = BBox {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for p in points {
            b.x_min = b.x_min.min(p.x);
            b.x_max = b.x_max.max(p.x);
            b.y_min = b.y_min.min(p.y);
            b.y_max = b.y_max.max(p.y);
        }
        b
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, p: Point2) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }

    pub fn union(&self, o: &BBox) -> BBox {
        BBox {
            x_min: self.x_min.min(o.x_min),
            x_max: self.x_max.max(o.x_max),
            y_min: self.y_min.min(o.y_min),
            y_max: self.y_max.max(o.y_max),
        }
    }

    pub fn intersects(&self, o: &BBox) -> bool {
        self.x_min <= o.x_max && o.x_min <= self.x_max && self.y_min <= o.y_max && o.y_min <= self.y_max
    }

    pub fn expanded(&self, margin: f64) -> BBox {
        BBox {
            x_min: self.x_min - margin,
            x_max: self.x_max + margin,
            y_min: self.y_min - margin,
            y_max: self.y_max + margin,
        }
    }
}

/// Tightest axis-aligned box around the drawn locus. Analytic for every kind
/// except the spiral, which uses its 0.01 rad parameter samples.
pub fn bounding_box(shape: &Shape) -> BBox {
    match &shape.geometry {
        Geometry::Circle { center, radius } => BBox {
            x_min: center.x - radius,
            x_max: center.x + radius,
            y_min: center.y - radius,
            y_max: center.y + radius,
        },
        Geometry::Ellipse {
            center,
            semi_major,
            semi_minor,
        } => {
            let (s, c) = shape.rotation.sin_cos();
            let hx = ((semi_major * c).powi(2) + (semi_minor * s).powi(2)).sqrt();
            let hy = ((semi_major * s).powi(2) + (semi_minor * c).powi(2)).sqrt();
            BBox {
                x_min: center.x - hx,
                x_max: center.x + hx,
                y_min: center.y - hy,
                y_max: center.y + hy,
            }
        }
        Geometry::Rect { center, width, height } => {
            let (s, c) = shape.rotation.sin_cos();
            let hx = width / 2.0 * c.abs() + height / 2.0 * s.abs();
            let hy = width / 2.0 * s.abs() + height / 2.0 * c.abs();
            BBox {
                x_min: center.x - hx,
                x_max: center.x + hx,
                y_min: center.y - hy,
                y_max: center.y + hy,
            }
        }
        _ => BBox::from_points(shape.outline().points),
    }
}

/// Area centroid for closed kinds, midpoint for a line, center for a spiral.
pub fn centroid(shape: &Shape) -> Point2 {
    match &shape.geometry {
        Geometry::Line { p0, p1 } => p0.lerp(*p1, 0.5),
        Geometry::Circle { center, .. }
        | Geometry::Ellipse { center, .. }
        | Geometry::Rect { center, .. }
        | Geometry::Spiral { center, .. } => *center,
        Geometry::Polygon { vertices } => polygon_centroid(vertices),
    }
}

/// Canvas-area fraction; zero for open curves.
pub fn area(shape: &Shape) -> f64 {
    match &shape.geometry {
        Geometry::Circle { radius, .. } => std::f64::consts::PI * radius * radius,
        Geometry::Ellipse {
            semi_major, semi_minor, ..
        } => std::f64::consts::PI * semi_major * semi_minor,
        Geometry::Rect { width, height, .. } => width * height,
        Geometry::Polygon { vertices } => polygon_area(vertices).abs(),
        Geometry::Line { .. } | Geometry::Spiral { .. } => 0.0,
    }
}

/// (horizontal, vertical) extent of the bounding box.
pub fn spans(shape: &Shape) -> (f64, f64) {
    let b = bounding_box(shape);
    (b.width(), b.height())
}

/// Signed shoelace area, positive for counterclockwise order.
pub(crate) fn polygon_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    let origin = vertices[0];
    let mut twice = 0.0;
    for i in 0..n {
        let a = vertices[i] - origin;
        let b = vertices[(i + 1) % n] - origin;
        twice += a.cross(b);
    }
    twice / 2.0
}

fn polygon_centroid(vertices: &[Point2]) -> Point2 {
    let n = vertices.len();
    // shift to the first vertex to keep the cross products well conditioned
    let origin = vertices[0];
    let (mut cx, mut cy, mut twice_area) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let a = vertices[i] - origin;
        let b = vertices[(i + 1) % n] - origin;
        let cr = a.cross(b);
        twice_area += cr;
        cx += (a.x + b.x) * cr;
        cy += (a.y + b.y) * cr;
    }
    let k = 1.0 / (3.0 * twice_area);
    origin + Point2::new(cx * k, cy * k)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    use super::*;
    use crate::geometry::ShapeKind;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn circle_bbox_is_center_plus_minus_radius() {
        let b = bounding_box(&Shape::circle(0, Point2::new(0.5, 0.5), 0.2));
        assert!(close(b.x_min, 0.3, 1e-12) && close(b.x_max, 0.7, 1e-12));
        assert!(close(b.y_min, 0.3, 1e-12) && close(b.y_max, 0.7, 1e-12));
    }

    #[test]
    fn rotated_square_bbox_matches_vertex_enumeration() {
        let sq = Shape::square(0, Point2::new(0.5, 0.5), 0.2, FRAC_PI_4);
        let b = bounding_box(&sq);
        let half = 0.1 * 2f64.sqrt();
        assert!(close(b.x_min, 0.5 - half, 1e-12) && close(b.x_max, 0.5 + half, 1e-12));
        assert!(close(b.x_min, 0.3586, 1e-4) && close(b.y_max, 0.6414, 1e-4));
        let by_vertices = BBox::from_points(sq.vertices());
        assert!(close(b.x_min, by_vertices.x_min, 1e-12));
        assert!(close(b.y_max, by_vertices.y_max, 1e-12));
    }

    #[test]
    fn line_bbox_is_endpoint_extremes() {
        let b = bounding_box(&Shape::line(0, Point2::new(0.1, 0.2), Point2::new(0.7, 0.4)));
        assert_eq!((b.x_min, b.x_max, b.y_min, b.y_max), (0.1, 0.7, 0.2, 0.4));
    }

    #[test]
    fn rotated_ellipse_bbox_matches_dense_samples() {
        let e = Shape::ellipse(0, Point2::new(0.5, 0.5), 0.3, 0.1, 0.7);
        let b = bounding_box(&e);
        let sampled = BBox::from_points((0..100_000).map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 100_000.0;
            Point2::new(0.5, 0.5) + Point2::new(0.3 * t.cos(), 0.1 * t.sin()).rotate(0.7)
        }));
        assert!(close(b.x_min, sampled.x_min, 1e-8));
        assert!(close(b.y_max, sampled.y_max, 1e-8));
    }

    #[test]
    fn centroids() {
        assert_eq!(
            centroid(&Shape::circle(0, Point2::new(0.3, 0.7), 0.1)),
            Point2::new(0.3, 0.7)
        );
        let tri = Shape::polygon(
            0,
            ShapeKind::Triangle,
            vec![Point2::new(0.1, 0.1), Point2::new(0.4, 0.1), Point2::new(0.1, 0.4)],
            0.0,
        );
        let c = centroid(&tri);
        assert!(close(c.x, 0.2, 1e-12) && close(c.y, 0.2, 1e-12));
    }

    #[test]
    fn quadrilateral_centroid_matches_triangle_decomposition() {
        let v = [
            Point2::new(0.1, 0.1),
            Point2::new(0.5, 0.1),
            Point2::new(0.5, 0.2),
            Point2::new(0.1, 0.4),
        ];
        // split along the diagonal v0-v2 and weight the two triangle centroids
        let tri = |a: Point2, b: Point2, c: Point2| {
            let area = (b - a).cross(c - a) / 2.0;
            let cen = Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
            (area, cen)
        };
        let (a1, c1) = tri(v[0], v[1], v[2]);
        let (a2, c2) = tri(v[0], v[2], v[3]);
        let expect = (c1 * a1 + c2 * a2) * (1.0 / (a1 + a2));
        let quad = Shape::polygon(0, ShapeKind::Quadrilateral, v.to_vec(), 0.0);
        let c = centroid(&quad);
        assert!(close(c.x, expect.x, 1e-12) && close(c.y, expect.y, 1e-12));
        // frozen from the decomposition: areas 0.02 and 0.06
        assert!(close(c.x, 0.266_666_666_7, 1e-9) && close(c.y, 0.208_333_333_3, 1e-9));
    }

    #[test]
    fn areas() {
        assert!(close(
            area(&Shape::square(0, Point2::new(0.5, 0.5), 0.3, 0.0)),
            0.09,
            1e-12
        ));
        assert!(close(
            area(&Shape::circle(0, Point2::new(0.5, 0.5), 0.2)),
            0.125_664,
            1e-6
        ));
        assert_eq!(area(&Shape::line(0, Point2::new(0.1, 0.1), Point2::new(0.2, 0.2))), 0.0);
    }

    #[test]
    fn regular_polygon_area_formula() {
        for kind in [
            ShapeKind::Triangle,
            ShapeKind::Quadrilateral,
            ShapeKind::Pentagon,
            ShapeKind::Hexagon,
        ] {
            let n = kind.polygon_sides().unwrap() as f64;
            let r = 0.23;
            let p = Shape::regular_polygon(0, kind, Point2::new(0.5, 0.5), r, 0.3);
            let expect = n / 2.0 * r * r * (2.0 * PI / n).sin();
            assert!(close(area(&p), expect, 1e-9));
        }
    }

    #[test]
    fn spans_follow_rotation() {
        assert!({
            let (h, v) = spans(&Shape::circle(0, Point2::new(0.5, 0.5), 0.15));
            close(h, 0.30, 1e-12) && close(v, 0.30, 1e-12)
        });
        let (h, v) = spans(&Shape::rect(0, Point2::new(0.5, 0.5), 0.4, 0.2, 0.0));
        assert!(close(h, 0.4, 1e-12) && close(v, 0.2, 1e-12));
        let (h, v) = spans(&Shape::rect(0, Point2::new(0.5, 0.5), 0.4, 0.2, FRAC_PI_2));
        assert!(close(h, 0.2, 1e-12) && close(v, 0.4, 1e-12));
    }
}
