use std::f64::consts::TAU;

use rand::Rng;

use super::SceneError;
use crate::geometry::{
    bounding_box, centroid, interior_angles, spans, strictly_convex_ccw, Point2, Shape, ShapeKind, CANVAS_MARGIN,
};

/// Range of the larger of the two spans for freely placed shapes.
pub const SPAN_RANGE: (f64, f64) = (0.10, 0.45);

const MIN_INTERIOR_ANGLE_DEG: f64 = 15.0;
const MAX_ATTEMPTS: usize = 1000;

/// Convex polygon from sorted angles on a random ellipse, centered on its
/// centroid. `None` when degenerate.
fn random_convex<R: Rng + ?Sized>(n: usize, rotation: f64, rng: &mut R) -> Option<Vec<Point2>> {
    let minor = rng.random_range(0.5..1.0);
    let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
    angles.sort_by(f64::total_cmp);
    let vertices: Vec<Point2> = angles
        .iter()
        .map(|t| Point2::new(t.cos(), minor * t.sin()).rotate(rotation))
        .collect();
    if !strictly_convex_ccw(&vertices) {
        return None;
    }
    let min_angle = interior_angles(&vertices).into_iter().fold(f64::INFINITY, f64::min);
    if min_angle < MIN_INTERIOR_ANGLE_DEG.to_radians() {
        return None;
    }
    let probe = Shape::polygon(0, ShapeKind::Triangle, vertices.clone(), 0.0);
    let c = centroid(&probe);
    Some(vertices.into_iter().map(|v| v - c).collect())
}

/// A shape of `kind` centered on the origin (centroid at the origin), whose
/// farthest point lies at distance 1, with a random orientation.
pub(crate) fn unit_shape<R: Rng + ?Sized>(kind: ShapeKind, rng: &mut R) -> Result<Shape, SceneError> {
    let rot = rng.random_range(0.0..TAU);
    let o = Point2::new(0.0, 0.0);
    let shape = match kind {
        ShapeKind::Line => {
            let u = Point2::from_angle(rot);
            Shape::line(0, -u, u)
        }
        ShapeKind::Circle => Shape::circle(0, o, 1.0),
        ShapeKind::Ellipse => Shape::ellipse(0, o, 1.0, rng.random_range(0.35..0.8), rot),
        ShapeKind::Triangle | ShapeKind::Quadrilateral => {
            let n = kind.polygon_sides().unwrap();
            let vertices = (0..MAX_ATTEMPTS)
                .find_map(|_| random_convex(n, rot, rng))
                .ok_or_else(|| SceneError::GenerationExhausted(format!("no well-shaped {kind}")))?;
            let reach = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
            Shape::polygon(0, kind, vertices.into_iter().map(|v| v * (1.0 / reach)).collect(), rot)
        }
        ShapeKind::Pentagon | ShapeKind::Hexagon => Shape::regular_polygon(0, kind, o, 1.0, rot),
        ShapeKind::Rectangle => {
            let aspect: f64 = rng.random_range(0.35..0.8);
            let width = 2.0 / (1.0 + aspect * aspect).sqrt();
            Shape::rect(0, o, width, aspect * width, rot)
        }
        ShapeKind::Square => Shape::square(0, o, 2f64.sqrt(), rot),
        ShapeKind::Spiral => {
            let turns = rng.random_range(1.5..3.0);
            let start = rng.random_range(0.08..0.2);
            Shape::spiral(0, o, start, (1.0 - start) / (TAU * turns), turns, rot)
        }
    };
    Ok(shape)
}

/// A shape of `kind` whose farthest point from `center` is at `radius`.
pub(crate) fn shape_in_disc<R: Rng + ?Sized>(
    kind: ShapeKind,
    center: Point2,
    radius: f64,
    rng: &mut R,
) -> Result<Shape, SceneError> {
    let unit = unit_shape(kind, rng)?;
    Ok(unit.scaled_about(Point2::new(0.0, 0.0), radius).translated(center))
}

/// Random size, position and orientation for a free shape: the larger span
/// is uniform in `SPAN_RANGE` and the bounding box lies inside the canvas
/// margins.
pub fn randomize_attributes<R: Rng + ?Sized>(kind: ShapeKind, id: u32, rng: &mut R) -> Result<Shape, SceneError> {
    for _ in 0..MAX_ATTEMPTS {
        let unit = unit_shape(kind, rng)?;
        let target = rng.random_range(SPAN_RANGE.0..SPAN_RANGE.1);
        let (h, v) = spans(&unit);
        let sized = unit.scaled_about(Point2::new(0.0, 0.0), target / h.max(v));
        let b = bounding_box(&sized);
        // keep a hair of slack so re-derived boxes never round past the margin
        let eps = 1e-9;
        let (x_lo, x_hi) = (CANVAS_MARGIN - b.x_min + eps, 1.0 - CANVAS_MARGIN - b.x_max - eps);
        let (y_lo, y_hi) = (CANVAS_MARGIN - b.y_min + eps, 1.0 - CANVAS_MARGIN - b.y_max - eps);
        if x_lo >= x_hi || y_lo >= y_hi {
            continue;
        }
        let shift = Point2::new(rng.random_range(x_lo..x_hi), rng.random_range(y_lo..y_hi));
        let shape = sized.translated(shift).with_id(id);
        if shape.validate().is_ok() {
            return Ok(shape);
        }
    }
    Err(SceneError::GenerationExhausted(format!("could not place a {kind}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;
    use crate::seed::rng_from;

    #[test]
    fn free_shapes_respect_span_and_margin() {
        let mut rng = rng_from(3);
        for kind in ShapeKind::ALL {
            for _ in 0..200 {
                let s = randomize_attributes(kind, 0, &mut rng).unwrap();
                s.validate().unwrap();
                let (h, v) = spans(&s);
                let m = h.max(v);
                assert!((SPAN_RANGE.0 - 1e-9..=SPAN_RANGE.1 + 1e-9).contains(&m), "{kind}: {m}");
            }
        }
    }

    #[test]
    fn squares_have_equal_sides() {
        let mut rng = rng_from(11);
        for _ in 0..50 {
            let s = randomize_attributes(ShapeKind::Square, 0, &mut rng).unwrap();
            match s.geometry {
                Geometry::Rect { width, height, .. } => assert_eq!(width, height),
                _ => panic!("square must use rect geometry"),
            }
        }
    }

    #[test]
    fn triangles_and_quads_are_well_shaped() {
        let mut rng = rng_from(5);
        for kind in [ShapeKind::Triangle, ShapeKind::Quadrilateral] {
            for _ in 0..200 {
                let s = randomize_attributes(kind, 0, &mut rng).unwrap();
                let v = s.vertices();
                let min = interior_angles(&v).into_iter().fold(f64::INFINITY, f64::min);
                assert!(min >= 15f64.to_radians());
            }
        }
    }

    #[test]
    fn hexagon_golden_vertices() {
        let mut rng = rng_from(7);
        let s = randomize_attributes(ShapeKind::Hexagon, 0, &mut rng).unwrap();
        let got: Vec<(f64, f64)> = s.vertices().iter().map(|p| (p.x, p.y)).collect();
        let mut again = rng_from(7);
        let t = randomize_attributes(ShapeKind::Hexagon, 0, &mut again).unwrap();
        assert_eq!(s, t);
        assert_eq!(got, GOLDEN_HEXAGON.to_vec());
    }

    // captured once from seed 7
    const GOLDEN_HEXAGON: [(f64, f64); 6] = [
        (0.7072022496930923, 0.752031246179535),
        (0.6278041112079746, 0.7564611237944494),
        (0.5842686554152439, 0.6899152576605998),
        (0.6201313381076308, 0.6189395139118358),
        (0.6995294765927484, 0.6145096362969213),
        (0.7430649323854792, 0.681055502430771),
    ];
}
