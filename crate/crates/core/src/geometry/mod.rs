//! Shape primitives, measurements, occupancy overlap and relation predicates.
//!
//! All coordinates are canvas fractions with the origin at the bottom-left
//! corner and `y` increasing upward.

mod measure;
mod occupancy;
mod point;
mod relation;

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use measure::{area, bounding_box, centroid, spans, BBox};
pub use occupancy::{overlap_area, Occupancy, GRID_RESOLUTION, OVERLAP_STROKE_WIDTH};
pub use point::Point2;
pub use relation::{compatible, holding_relations, verify_relation, RelationKind};

/// Inner limit of the drawable canvas; every shape's bounding box must fit in
/// `[CANVAS_MARGIN, 1 - CANVAS_MARGIN]` on both axes.
pub const CANVAS_MARGIN: f64 = 0.02;

/// Samples per full turn when flattening circles and ellipses.
pub const CURVE_SEGMENTS: usize = 256;

/// Parameter step (radians) used when sampling spirals.
pub const SPIRAL_STEP: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("relation {relation} is undefined for {a} and {b}")]
    IncompatibleKinds {
        relation: RelationKind,
        a: ShapeKind,
        b: ShapeKind,
    },
    #[error("invalid shape {id}: {reason}")]
    InvalidShape { id: u32, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Line,
    Ellipse,
    Circle,
    Triangle,
    Quadrilateral,
    Pentagon,
    Hexagon,
    Rectangle,
    Square,
    Spiral,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 10] = [
        ShapeKind::Line,
        ShapeKind::Ellipse,
        ShapeKind::Circle,
        ShapeKind::Triangle,
        ShapeKind::Quadrilateral,
        ShapeKind::Pentagon,
        ShapeKind::Hexagon,
        ShapeKind::Rectangle,
        ShapeKind::Square,
        ShapeKind::Spiral,
    ];

    pub fn is_closed(self) -> bool {
        !matches!(self, ShapeKind::Line | ShapeKind::Spiral)
    }

    /// Number of polygon vertices for the `Polygon` geometry kinds.
    pub fn polygon_sides(self) -> Option<usize> {
        match self {
            ShapeKind::Triangle => Some(3),
            ShapeKind::Quadrilateral => Some(4),
            ShapeKind::Pentagon => Some(5),
            ShapeKind::Hexagon => Some(6),
            _ => None,
        }
    }

    /// Kinds with straight edges and corners (polygons and rectangles).
    pub fn is_polygonal(self) -> bool {
        self.polygon_sides().is_some() || matches!(self, ShapeKind::Rectangle | ShapeKind::Square)
    }

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Line => "line",
            ShapeKind::Ellipse => "ellipse",
            ShapeKind::Circle => "circle",
            ShapeKind::Triangle => "triangle",
            ShapeKind::Quadrilateral => "quadrilateral",
            ShapeKind::Pentagon => "pentagon",
            ShapeKind::Hexagon => "hexagon",
            ShapeKind::Rectangle => "rectangle",
            ShapeKind::Square => "square",
            ShapeKind::Spiral => "spiral",
        }
    }

    pub fn plural(self) -> &'static str {
        match self {
            ShapeKind::Line => "lines",
            ShapeKind::Ellipse => "ellipses",
            ShapeKind::Circle => "circles",
            ShapeKind::Triangle => "triangles",
            ShapeKind::Quadrilateral => "quadrilaterals",
            ShapeKind::Pentagon => "pentagons",
            ShapeKind::Hexagon => "hexagons",
            ShapeKind::Rectangle => "rectangles",
            ShapeKind::Square => "squares",
            ShapeKind::Spiral => "spirals",
        }
    }

    pub fn from_name(name: &str) -> Option<ShapeKind> {
        ShapeKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Concrete geometry of a shape. Polygon vertices are absolute positions in
/// counterclockwise order; the other variants apply `Shape::rotation`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Geometry {
    Line {
        p0: Point2,
        p1: Point2,
    },
    Circle {
        center: Point2,
        radius: f64,
    },
    Ellipse {
        center: Point2,
        semi_major: f64,
        semi_minor: f64,
    },
    Polygon {
        vertices: Vec<Point2>,
    },
    Rect {
        center: Point2,
        width: f64,
        height: f64,
    },
    /// Archimedean spiral `r(t) = start_radius + growth_per_radian * t` for
    /// `t` in `[0, 2π·turns]`, with the polar angle offset by the rotation.
    Spiral {
        center: Point2,
        start_radius: f64,
        growth_per_radian: f64,
        turns: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub id: u32,
    pub kind: ShapeKind,
    /// Orientation in radians, normalized to `[0, 2π)`.
    pub rotation: f64,
    pub geometry: Geometry,
}

/// A flattened outline: a polyline, closed when the last point connects back
/// to the first.
#[derive(Clone, Debug, PartialEq)]
pub struct Outline {
    pub points: Vec<Point2>,
    pub closed: bool,
}

impl Outline {
    pub fn segments(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.points.len();
        let count = if self.closed { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn distance_to(&self, p: Point2) -> f64 {
        self.segments()
            .map(|(a, b)| p.distance_to_segment(a, b))
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl Shape {
    pub fn line(id: u32, p0: Point2, p1: Point2) -> Shape {
        let d = p1 - p0;
        Shape {
            id,
            kind: ShapeKind::Line,
            rotation: normalize_angle(d.y.atan2(d.x)),
            geometry: Geometry::Line { p0, p1 },
        }
    }

    pub fn circle(id: u32, center: Point2, radius: f64) -> Shape {
        Shape {
            id,
            kind: ShapeKind::Circle,
            rotation: 0.0,
            geometry: Geometry::Circle { center, radius },
        }
    }

    pub fn ellipse(id: u32, center: Point2, semi_major: f64, semi_minor: f64, rotation: f64) -> Shape {
        Shape {
            id,
            kind: ShapeKind::Ellipse,
            rotation: normalize_angle(rotation),
            geometry: Geometry::Ellipse {
                center,
                semi_major,
                semi_minor,
            },
        }
    }

    pub fn polygon(id: u32, kind: ShapeKind, vertices: Vec<Point2>, rotation: f64) -> Shape {
        debug_assert!(kind.polygon_sides().is_some());
        Shape {
            id,
            kind,
            rotation: normalize_angle(rotation),
            geometry: Geometry::Polygon { vertices },
        }
    }

    /// Regular polygon with vertex `k` at angle `rotation + 2πk/n`.
    pub fn regular_polygon(id: u32, kind: ShapeKind, center: Point2, circumradius: f64, rotation: f64) -> Shape {
        let n = kind.polygon_sides().expect("polygon kind");
        let vertices = (0..n)
            .map(|k| center + Point2::from_angle(rotation + TAU * k as f64 / n as f64) * circumradius)
            .collect();
        Shape::polygon(id, kind, vertices, rotation)
    }

    pub fn rect(id: u32, center: Point2, width: f64, height: f64, rotation: f64) -> Shape {
        Shape {
            id,
            kind: ShapeKind::Rectangle,
            rotation: normalize_angle(rotation),
            geometry: Geometry::Rect { center, width, height },
        }
    }

    pub fn square(id: u32, center: Point2, side: f64, rotation: f64) -> Shape {
        Shape {
            id,
            kind: ShapeKind::Square,
            rotation: normalize_angle(rotation),
            geometry: Geometry::Rect {
                center,
                width: side,
                height: side,
            },
        }
    }

    pub fn spiral(
        id: u32,
        center: Point2,
        start_radius: f64,
        growth_per_radian: f64,
        turns: f64,
        rotation: f64,
    ) -> Shape {
        Shape {
            id,
            kind: ShapeKind::Spiral,
            rotation: normalize_angle(rotation),
            geometry: Geometry::Spiral {
                center,
                start_radius,
                growth_per_radian,
                turns,
            },
        }
    }

    pub fn with_id(mut self, id: u32) -> Shape {
        self.id = id;
        self
    }

    /// Corners of a rectangle in counterclockwise order.
    fn rect_corners(center: Point2, width: f64, height: f64, rotation: f64) -> Vec<Point2> {
        let (hw, hh) = (width / 2.0, height / 2.0);
        [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)]
            .into_iter()
            .map(|(x, y)| center + Point2::new(x, y).rotate(rotation))
            .collect()
    }

    /// Corner points: polygon vertices, rectangle corners or line endpoints.
    /// Empty for curved kinds.
    pub fn vertices(&self) -> Vec<Point2> {
        match &self.geometry {
            Geometry::Line { p0, p1 } => vec![*p0, *p1],
            Geometry::Polygon { vertices } => vertices.clone(),
            Geometry::Rect { center, width, height } => Shape::rect_corners(*center, *width, *height, self.rotation),
            _ => Vec::new(),
        }
    }

    /// Unit direction of a line, or of the rectangle's two edge families.
    pub fn edge_directions(&self) -> Vec<Point2> {
        match &self.geometry {
            Geometry::Line { p0, p1 } => vec![(*p1 - *p0).normalized()],
            Geometry::Rect { .. } => {
                let u = Point2::from_angle(self.rotation);
                vec![u, u.perp()]
            }
            _ => Vec::new(),
        }
    }

    pub fn spiral_point(center: Point2, start_radius: f64, growth: f64, rotation: f64, t: f64) -> Point2 {
        center + Point2::from_angle(t + rotation) * (start_radius + growth * t)
    }

    /// Flattened outline; exact for polygons, rectangles and lines.
    pub fn outline(&self) -> Outline {
        match &self.geometry {
            Geometry::Line { p0, p1 } => Outline {
                points: vec![*p0, *p1],
                closed: false,
            },
            Geometry::Circle { center, radius } => Outline {
                points: (0..CURVE_SEGMENTS)
                    .map(|k| *center + Point2::from_angle(TAU * k as f64 / CURVE_SEGMENTS as f64) * *radius)
                    .collect(),
                closed: true,
            },
            Geometry::Ellipse {
                center,
                semi_major,
                semi_minor,
            } => Outline {
                points: (0..CURVE_SEGMENTS)
                    .map(|k| {
                        let t = TAU * k as f64 / CURVE_SEGMENTS as f64;
                        *center + Point2::new(semi_major * t.cos(), semi_minor * t.sin()).rotate(self.rotation)
                    })
                    .collect(),
                closed: true,
            },
            Geometry::Polygon { vertices } => Outline {
                points: vertices.clone(),
                closed: true,
            },
            Geometry::Rect { center, width, height } => Outline {
                points: Shape::rect_corners(*center, *width, *height, self.rotation),
                closed: true,
            },
            Geometry::Spiral {
                center,
                start_radius,
                growth_per_radian,
                turns,
            } => {
                let t_max = TAU * turns;
                let steps = (t_max / SPIRAL_STEP).ceil() as usize;
                let points = (0..=steps)
                    .map(|k| {
                        let t = (k as f64 * SPIRAL_STEP).min(t_max);
                        Shape::spiral_point(*center, *start_radius, *growth_per_radian, self.rotation, t)
                    })
                    .collect();
                Outline { points, closed: false }
            }
        }
    }

    /// Dense samples of the drawn locus, including every corner.
    pub fn boundary_samples(&self) -> Vec<Point2> {
        let outline = self.outline();
        match &self.geometry {
            Geometry::Line { .. } | Geometry::Polygon { .. } | Geometry::Rect { .. } => {
                let per_edge = if outline.closed { 32 } else { 64 };
                let mut out = Vec::new();
                for (a, b) in outline.segments() {
                    for k in 0..per_edge {
                        out.push(a.lerp(b, k as f64 / per_edge as f64));
                    }
                }
                if !outline.closed {
                    out.push(*outline.points.last().unwrap());
                }
                out
            }
            _ => outline.points,
        }
    }

    /// Whether `p` lies in the closed region of the shape (boundary included).
    /// Always false for open kinds.
    pub fn contains_point(&self, p: Point2) -> bool {
        match &self.geometry {
            Geometry::Circle { center, radius } => (p - *center).norm_sq() <= radius * radius,
            Geometry::Ellipse {
                center,
                semi_major,
                semi_minor,
            } => {
                let q = (p - *center).rotate(-self.rotation);
                (q.x / semi_major).powi(2) + (q.y / semi_minor).powi(2) <= 1.0
            }
            Geometry::Polygon { vertices } => convex_contains(vertices, p),
            Geometry::Rect { center, width, height } => {
                let q = (p - *center).rotate(-self.rotation);
                q.x.abs() <= width / 2.0 && q.y.abs() <= height / 2.0
            }
            Geometry::Line { .. } | Geometry::Spiral { .. } => false,
        }
    }

    /// Unsigned distance from `p` to the drawn locus.
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        match &self.geometry {
            Geometry::Circle { center, radius } => ((p - *center).norm() - radius).abs(),
            _ => self.outline().distance_to(p),
        }
    }

    /// Largest `dot(q, u)` over points `q` of the shape.
    pub fn support(&self, u: Point2) -> f64 {
        match &self.geometry {
            Geometry::Circle { center, radius } => center.dot(u) + radius * u.norm(),
            Geometry::Ellipse {
                center,
                semi_major,
                semi_minor,
            } => {
                let e1 = Point2::from_angle(self.rotation);
                let e2 = e1.perp();
                center.dot(u) + ((semi_major * u.dot(e1)).powi(2) + (semi_minor * u.dot(e2)).powi(2)).sqrt()
            }
            _ => self
                .outline()
                .points
                .iter()
                .map(|q| q.dot(u))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Largest distance from `p` to any point of the shape.
    pub fn max_distance_from(&self, p: Point2) -> f64 {
        match &self.geometry {
            Geometry::Circle { center, radius } => (p - *center).norm() + radius,
            _ => self
                .outline()
                .points
                .iter()
                .map(|q| (*q - p).norm())
                .fold(0.0, f64::max),
        }
    }

    /// Radius of the largest disc centered at the centroid that fits inside a
    /// closed shape; zero for open kinds.
    pub fn inradius(&self) -> f64 {
        match &self.geometry {
            Geometry::Circle { radius, .. } => *radius,
            Geometry::Ellipse { semi_minor, .. } => *semi_minor,
            Geometry::Rect { width, height, .. } => width.min(*height) / 2.0,
            Geometry::Polygon { vertices } => {
                let c = centroid(self);
                let n = vertices.len();
                (0..n)
                    .map(|i| c.distance_to_line(vertices[i], vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
            Geometry::Line { .. } | Geometry::Spiral { .. } => 0.0,
        }
    }

    pub fn translated(&self, d: Point2) -> Shape {
        let geometry = match &self.geometry {
            Geometry::Line { p0, p1 } => Geometry::Line {
                p0: *p0 + d,
                p1: *p1 + d,
            },
            Geometry::Circle { center, radius } => Geometry::Circle {
                center: *center + d,
                radius: *radius,
            },
            Geometry::Ellipse {
                center,
                semi_major,
                semi_minor,
            } => Geometry::Ellipse {
                center: *center + d,
                semi_major: *semi_major,
                semi_minor: *semi_minor,
            },
            Geometry::Polygon { vertices } => Geometry::Polygon {
                vertices: vertices.iter().map(|v| *v + d).collect(),
            },
            Geometry::Rect { center, width, height } => Geometry::Rect {
                center: *center + d,
                width: *width,
                height: *height,
            },
            Geometry::Spiral {
                center,
                start_radius,
                growth_per_radian,
                turns,
            } => Geometry::Spiral {
                center: *center + d,
                start_radius: *start_radius,
                growth_per_radian: *growth_per_radian,
                turns: *turns,
            },
        };
        Shape {
            geometry,
            ..self.clone()
        }
    }

    /// Uniform scaling about `pivot`.
    pub fn scaled_about(&self, pivot: Point2, factor: f64) -> Shape {
        let map = |p: Point2| pivot + (p - pivot) * factor;
        let geometry = match &self.geometry {
            Geometry::Line { p0, p1 } => Geometry::Line {
                p0: map(*p0),
                p1: map(*p1),
            },
            Geometry::Circle { center, radius } => Geometry::Circle {
                center: map(*center),
                radius: radius * factor,
            },
            Geometry::Ellipse {
                center,
                semi_major,
                semi_minor,
            } => Geometry::Ellipse {
                center: map(*center),
                semi_major: semi_major * factor,
                semi_minor: semi_minor * factor,
            },
            Geometry::Polygon { vertices } => Geometry::Polygon {
                vertices: vertices.iter().map(|v| map(*v)).collect(),
            },
            Geometry::Rect { center, width, height } => Geometry::Rect {
                center: map(*center),
                width: width * factor,
                height: height * factor,
            },
            Geometry::Spiral {
                center,
                start_radius,
                growth_per_radian,
                turns,
            } => Geometry::Spiral {
                center: map(*center),
                start_radius: start_radius * factor,
                growth_per_radian: growth_per_radian * factor,
                turns: *turns,
            },
        };
        Shape {
            geometry,
            ..self.clone()
        }
    }

    /// Rigid rotation about `pivot`.
    pub fn rotated_about(&self, pivot: Point2, angle: f64) -> Shape {
        let map = |p: Point2| pivot + (p - pivot).rotate(angle);
        let geometry = match &self.geometry {
            Geometry::Line { p0, p1 } => Geometry::Line {
                p0: map(*p0),
                p1: map(*p1),
            },
            Geometry::Circle { center, radius } => Geometry::Circle {
                center: map(*center),
                radius: *radius,
            },
            Geometry::Ellipse {
                center,
                semi_major,
                semi_minor,
            } => Geometry::Ellipse {
                center: map(*center),
                semi_major: *semi_major,
                semi_minor: *semi_minor,
            },
            Geometry::Polygon { vertices } => Geometry::Polygon {
                vertices: vertices.iter().map(|v| map(*v)).collect(),
            },
            Geometry::Rect { center, width, height } => Geometry::Rect {
                center: map(*center),
                width: *width,
                height: *height,
            },
            Geometry::Spiral {
                center,
                start_radius,
                growth_per_radian,
                turns,
            } => Geometry::Spiral {
                center: map(*center),
                start_radius: *start_radius,
                growth_per_radian: *growth_per_radian,
                turns: *turns,
            },
        };
        Shape {
            geometry,
            rotation: normalize_angle(self.rotation + angle),
            ..self.clone()
        }
    }

    /// Checks the type invariants, including the canvas margin.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let fail = |reason: String| Err(GeometryError::InvalidShape { id: self.id, reason });
        if !(0.0..TAU).contains(&self.rotation) {
            return fail(format!("rotation {} outside [0, 2π)", self.rotation));
        }
        match (&self.geometry, self.kind) {
            (Geometry::Line { p0, p1 }, ShapeKind::Line) => {
                if (*p1 - *p0).norm() <= 0.0 {
                    return fail("zero-length line".into());
                }
            }
            (Geometry::Circle { radius, .. }, ShapeKind::Circle) => {
                if *radius <= 0.0 {
                    return fail("non-positive radius".into());
                }
            }
            (
                Geometry::Ellipse {
                    semi_major, semi_minor, ..
                },
                ShapeKind::Ellipse,
            ) => {
                if *semi_minor <= 0.0 || semi_major < semi_minor {
                    return fail("ellipse axes must satisfy semi_major >= semi_minor > 0".into());
                }
            }
            (Geometry::Polygon { vertices }, kind) if kind.polygon_sides().is_some() => {
                if Some(vertices.len()) != kind.polygon_sides() {
                    return fail(format!("{kind} needs {} vertices", kind.polygon_sides().unwrap()));
                }
                if !strictly_convex_ccw(vertices) {
                    return fail("polygon must be strictly convex and counterclockwise".into());
                }
            }
            (Geometry::Rect { width, height, .. }, ShapeKind::Rectangle) => {
                if *width <= 0.0 || *height <= 0.0 {
                    return fail("non-positive rectangle side".into());
                }
            }
            (Geometry::Rect { width, height, .. }, ShapeKind::Square) => {
                if *width <= 0.0 || width != height {
                    return fail("square needs equal positive sides".into());
                }
            }
            (
                Geometry::Spiral {
                    start_radius,
                    growth_per_radian,
                    turns,
                    ..
                },
                ShapeKind::Spiral,
            ) => {
                if *start_radius <= 0.0 || *growth_per_radian <= 0.0 || *turns < 1.0 {
                    return fail("spiral needs positive radii and at least one turn".into());
                }
            }
            (_, kind) => return fail(format!("geometry does not match kind {kind}")),
        }
        if !within_canvas(&bounding_box(self)) {
            return fail("bounding box leaves the canvas margin".into());
        }
        Ok(())
    }
}

pub fn within_canvas(b: &BBox) -> bool {
    b.x_min >= CANVAS_MARGIN
        && b.y_min >= CANVAS_MARGIN
        && b.x_max <= 1.0 - CANVAS_MARGIN
        && b.y_max <= 1.0 - CANVAS_MARGIN
}

fn convex_contains(vertices: &[Point2], p: Point2) -> bool {
    let n = vertices.len();
    (0..n).all(|i| {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        (b - a).cross(p - a) >= 0.0
    })
}

/// True when every turn is a strict left turn.
pub fn strictly_convex_ccw(vertices: &[Point2]) -> bool {
    let n = vertices.len();
    n >= 3
        && (0..n).all(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            (b - a).cross(c - b) > 0.0
        })
}

/// Interior angles of a convex polygon, in radians.
pub fn interior_angles(vertices: &[Point2]) -> Vec<f64> {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let prev = vertices[(i + n - 1) % n];
            let cur = vertices[i];
            let next = vertices[(i + 1) % n];
            let u = (prev - cur).normalized();
            let v = (next - cur).normalized();
            u.dot(v).clamp(-1.0, 1.0).acos()
        })
        .collect()
}
