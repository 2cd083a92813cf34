//! Relationship sampling and constructive companion generation.

use std::f64::consts::{PI, TAU};

use rand::seq::IndexedRandom;
use rand::Rng;

use super::attributes::shape_in_disc;
use super::{Relation, SceneError};
use crate::geometry::{centroid, verify_relation, Geometry, GeometryError, Point2, RelationKind, Shape, ShapeKind};

/// Tolerance every generated relation must satisfy.
pub const RELATION_TOL: f64 = 1e-6;

const MAX_ATTEMPTS: usize = 1000;
const MIN_CHILD_RADIUS: f64 = 0.012;

/// Relations that can be grown from an anchor of the given kind.
pub fn anchor_relations(kind: ShapeKind) -> &'static [RelationKind] {
    use RelationKind::*;
    match kind {
        ShapeKind::Line => &[Tangent, Parallel, Perpendicular, Intersecting, Contains, SharedVertex],
        ShapeKind::Circle => &[Tangent, Inscribed, Circumscribed, Concentric, Intersecting, Contains],
        ShapeKind::Ellipse => &[Concentric, Intersecting, Contains],
        ShapeKind::Triangle => &[Tangent, Inscribed, Circumscribed, Intersecting, Contains, SharedVertex],
        ShapeKind::Quadrilateral => &[Tangent, Intersecting, Contains, SharedVertex],
        ShapeKind::Pentagon | ShapeKind::Hexagon => &[
            Tangent,
            Inscribed,
            Circumscribed,
            Concentric,
            Intersecting,
            Contains,
            SharedVertex,
        ],
        ShapeKind::Rectangle => &[
            Tangent,
            Parallel,
            Perpendicular,
            Circumscribed,
            Concentric,
            Intersecting,
            Contains,
            SharedVertex,
        ],
        ShapeKind::Square => &[
            Tangent,
            Parallel,
            Perpendicular,
            Inscribed,
            Circumscribed,
            Concentric,
            Intersecting,
            Contains,
            SharedVertex,
        ],
        ShapeKind::Spiral => &[Concentric, Contains],
    }
}

/// Uniform draw from the relations in `pool` that `s1` can anchor.
pub fn sample_relationship<R: Rng + ?Sized>(
    pool: &[RelationKind],
    s1: &Shape,
    rng: &mut R,
) -> Result<RelationKind, SceneError> {
    if pool.is_empty() {
        return Err(SceneError::EmptyPool);
    }
    let row = anchor_relations(s1.kind);
    let candidates: Vec<RelationKind> = RelationKind::ALL
        .into_iter()
        .filter(|k| row.contains(k) && pool.contains(k))
        .collect();
    candidates
        .choose(rng)
        .copied()
        .ok_or(SceneError::NoCompatibleRelation(s1.kind))
}

/// Builds a companion for `s1` satisfying `kind` by construction. The
/// returned relation is oriented so that `verify_relation(subject, object)`
/// holds; the companion carries `id`.
pub fn generate_related_shape<R: Rng + ?Sized>(
    kind: RelationKind,
    s1: &Shape,
    id: u32,
    rng: &mut R,
) -> Result<(Shape, Relation), SceneError> {
    if !anchor_relations(s1.kind).contains(&kind) {
        return Err(GeometryError::IncompatibleKinds {
            relation: kind,
            a: s1.kind,
            b: s1.kind,
        }
        .into());
    }
    for _ in 0..MAX_ATTEMPTS {
        let Some((s2, companion_is_subject)) = construct(kind, s1, rng)? else {
            continue;
        };
        let s2 = s2.with_id(id);
        if s2.validate().is_err() {
            continue;
        }
        let (subject, object) = if companion_is_subject { (&s2, s1) } else { (s1, &s2) };
        if verify_relation(subject, object, kind, RELATION_TOL)? {
            let relation = Relation {
                subject_id: subject.id,
                object_id: object.id,
                kind,
            };
            return Ok((s2, relation));
        }
    }
    Err(SceneError::GenerationExhausted(format!(
        "no {kind} companion for a {}",
        s1.kind
    )))
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Point2 {
    Point2::from_angle(rng.random_range(0.0..TAU))
}

fn sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

/// Random edge `(a, b)` of a polygonal shape with its outward unit normal.
fn random_edge<R: Rng + ?Sized>(s: &Shape, rng: &mut R) -> (Point2, Point2, Point2) {
    let v = s.vertices();
    let i = rng.random_range(0..v.len());
    let (a, b) = (v[i], v[(i + 1) % v.len()]);
    let d = (b - a).normalized();
    (a, b, Point2::new(d.y, -d.x))
}

fn line_parts(s: &Shape) -> (Point2, Point2) {
    match s.geometry {
        Geometry::Line { p0, p1 } => (p0, p1),
        _ => unreachable!("line geometry expected"),
    }
}

fn circle_parts(s: &Shape) -> (Point2, f64) {
    match s.geometry {
        Geometry::Circle { center, radius } => (center, radius),
        _ => unreachable!("circle geometry expected"),
    }
}

fn centered_line(mid: Point2, dir: Point2, length: f64) -> Shape {
    Shape::line(0, mid - dir * (length / 2.0), mid + dir * (length / 2.0))
}

/// Regular polygon (or square) of the given kind with circumradius `r`.
fn regular(kind: ShapeKind, center: Point2, r: f64, rot: f64) -> Shape {
    match kind {
        ShapeKind::Square => Shape::square(0, center, r * 2f64.sqrt(), rot),
        _ => Shape::regular_polygon(0, kind, center, r, rot),
    }
}

fn regular_sides(kind: ShapeKind) -> f64 {
    match kind {
        ShapeKind::Square => 4.0,
        _ => kind.polygon_sides().unwrap() as f64,
    }
}

/// Point where the ray from the centroid of a closed shape leaves it.
fn boundary_along(s: &Shape, dir: Point2) -> Point2 {
    let c = centroid(s);
    let (mut lo, mut hi) = (0.0, s.max_distance_from(c) + 1e-3);
    for _ in 0..60 {
        let mid = (lo + hi) / 2.0;
        if s.contains_point(c + dir * mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    c + dir * lo
}

const CLOSED_KINDS: [ShapeKind; 8] = [
    ShapeKind::Ellipse,
    ShapeKind::Circle,
    ShapeKind::Triangle,
    ShapeKind::Quadrilateral,
    ShapeKind::Pentagon,
    ShapeKind::Hexagon,
    ShapeKind::Rectangle,
    ShapeKind::Square,
];

const POLYGONAL_KINDS: [ShapeKind; 6] = [
    ShapeKind::Triangle,
    ShapeKind::Quadrilateral,
    ShapeKind::Pentagon,
    ShapeKind::Hexagon,
    ShapeKind::Rectangle,
    ShapeKind::Square,
];

const REGULAR_KINDS: [ShapeKind; 4] = [
    ShapeKind::Triangle,
    ShapeKind::Square,
    ShapeKind::Pentagon,
    ShapeKind::Hexagon,
];

/// One construction attempt. Returns the companion and whether it is the
/// relation's subject, or `None` when the draw did not produce a usable shape.
fn construct<R: Rng + ?Sized>(
    kind: RelationKind,
    s1: &Shape,
    rng: &mut R,
) -> Result<Option<(Shape, bool)>, SceneError> {
    let c1 = centroid(s1);
    let out = match kind {
        RelationKind::Tangent => Some((tangent(s1, rng), false)),
        RelationKind::Parallel | RelationKind::Perpendicular => {
            let (base, dir, normal, len) = if s1.kind == ShapeKind::Line {
                let (p0, p1) = line_parts(s1);
                let u = (p1 - p0).normalized();
                let t = rng.random_range(0.2..0.8);
                (p0.lerp(p1, t), u, u.perp() * sign(rng), (p1 - p0).norm())
            } else {
                let (a, b, n) = random_edge(s1, rng);
                (
                    a.lerp(b, rng.random_range(0.3..0.7)),
                    (b - a).normalized(),
                    n,
                    (b - a).norm(),
                )
            };
            if kind == RelationKind::Parallel {
                let gap = if s1.kind == ShapeKind::Line {
                    rng.random_range(0.05..0.3)
                } else {
                    rng.random_range(0.03..0.15)
                };
                let mid = base + normal * gap + dir * rng.random_range(-0.1..0.1);
                Some((centered_line(mid, dir, len * rng.random_range(0.6..1.2)), false))
            } else {
                let start = base + normal * rng.random_range(0.02..0.08);
                let end = start + normal * rng.random_range(0.1..0.3);
                Some((Shape::line(0, start, end), false))
            }
        }
        RelationKind::Inscribed => {
            // companion drawn inside the anchor
            let inner = match s1.kind {
                ShapeKind::Circle => {
                    let (c, r) = circle_parts(s1);
                    let k = *REGULAR_KINDS.choose(rng).unwrap();
                    regular(k, c, r, rng.random_range(0.0..TAU))
                }
                ShapeKind::Triangle => {
                    let v = s1.vertices();
                    let (a, b, c) = ((v[1] - v[2]).norm(), (v[2] - v[0]).norm(), (v[0] - v[1]).norm());
                    let p = a + b + c;
                    let center = (v[0] * a + v[1] * b + v[2] * c) * (1.0 / p);
                    let twice_area = (v[1] - v[0]).cross(v[2] - v[0]);
                    Shape::circle(0, center, twice_area / p)
                }
                ShapeKind::Square => match s1.geometry {
                    Geometry::Rect { center, width, .. } => Shape::circle(0, center, width / 2.0),
                    _ => unreachable!(),
                },
                _ => Shape::circle(0, c1, s1.inradius()),
            };
            Some((inner, true))
        }
        RelationKind::Circumscribed => {
            // companion drawn around the anchor
            let outer = match s1.kind {
                ShapeKind::Circle => {
                    let (c, r) = circle_parts(s1);
                    let k = *REGULAR_KINDS.choose(rng).unwrap();
                    let circumradius = r / (PI / regular_sides(k)).cos();
                    regular(k, c, circumradius, rng.random_range(0.0..TAU))
                }
                ShapeKind::Triangle => {
                    let v = s1.vertices();
                    let (b, c) = (v[1] - v[0], v[2] - v[0]);
                    let d = 2.0 * b.cross(c);
                    let ux = (c.y * b.norm_sq() - b.y * c.norm_sq()) / d;
                    let uy = (b.x * c.norm_sq() - c.x * b.norm_sq()) / d;
                    let center = v[0] + Point2::new(ux, uy);
                    Shape::circle(0, center, center.distance(v[0]))
                }
                _ => Shape::circle(0, c1, s1.max_distance_from(c1)),
            };
            Some((outer, true))
        }
        RelationKind::Concentric => {
            let k = *[
                ShapeKind::Circle,
                ShapeKind::Ellipse,
                ShapeKind::Rectangle,
                ShapeKind::Square,
                ShapeKind::Pentagon,
                ShapeKind::Hexagon,
            ]
            .choose(rng)
            .unwrap();
            let reach = s1.max_distance_from(c1);
            let factor = if rng.random_bool(0.5) {
                rng.random_range(0.4..0.8)
            } else {
                rng.random_range(1.25..2.5)
            };
            Some((shape_in_disc(k, c1, reach * factor, rng)?, false))
        }
        RelationKind::Intersecting => intersecting(s1, rng)?,
        RelationKind::Contains => {
            if s1.kind.is_closed() {
                let room = s1.inradius();
                if room * 0.6 < MIN_CHILD_RADIUS {
                    return Err(SceneError::GenerationExhausted(format!(
                        "{} too small to contain a shape",
                        s1.kind
                    )));
                }
                let child_r = room * rng.random_range(0.3..0.6);
                let slack = (room * 0.9 - child_r).max(0.0) * 0.5;
                let offset = random_unit(rng) * rng.random_range(0.0..=slack);
                let k = *ShapeKind::ALL.choose(rng).unwrap();
                Some((shape_in_disc(k, c1 + offset, child_r, rng)?, false))
            } else {
                let k = *[
                    ShapeKind::Circle,
                    ShapeKind::Square,
                    ShapeKind::Pentagon,
                    ShapeKind::Hexagon,
                ]
                .choose(rng)
                .unwrap();
                let inr = s1.max_distance_from(c1) * rng.random_range(1.15..1.5);
                let host = match k {
                    ShapeKind::Circle => Shape::circle(0, c1, inr),
                    _ => regular(k, c1, inr / (PI / regular_sides(k)).cos(), rng.random_range(0.0..TAU)),
                };
                Some((host, true))
            }
        }
        RelationKind::SharedVertex => shared_vertex(s1, rng)?,
    };
    Ok(out)
}

fn tangent<R: Rng + ?Sized>(s1: &Shape, rng: &mut R) -> Shape {
    match s1.kind {
        ShapeKind::Circle => {
            let (c, r) = circle_parts(s1);
            let u = random_unit(rng);
            if rng.random_bool(0.5) {
                let r2 = r * rng.random_range(0.5..1.5);
                Shape::circle(0, c + u * (r + r2), r2)
            } else {
                let len = rng.random_range(0.15..0.4);
                let mid = c + u * r + u.perp() * (len * rng.random_range(-0.3..0.3));
                centered_line(mid, u.perp(), len)
            }
        }
        ShapeKind::Line => {
            let (p0, p1) = line_parts(s1);
            let r2 = rng.random_range(0.03..0.12);
            let foot = p0.lerp(p1, rng.random_range(0.2..0.8));
            let n = (p1 - p0).normalized().perp() * sign(rng);
            Shape::circle(0, foot + n * r2, r2)
        }
        _ => {
            let (a, b, n) = random_edge(s1, rng);
            let r2 = rng.random_range(0.03..0.12);
            let foot = a.lerp(b, rng.random_range(0.25..0.75));
            Shape::circle(0, foot + n * r2, r2)
        }
    }
}

fn intersecting<R: Rng + ?Sized>(s1: &Shape, rng: &mut R) -> Result<Option<(Shape, bool)>, SceneError> {
    let c1 = centroid(s1);
    if s1.kind == ShapeKind::Line {
        // poke one end of the line a little way into a closed companion
        let (p0, p1) = line_parts(s1);
        let (end, out) = if rng.random_bool(0.5) {
            (p1, (p1 - p0).normalized())
        } else {
            (p0, (p0 - p1).normalized())
        };
        let k = *CLOSED_KINDS.choose(rng).unwrap();
        let body = shape_in_disc(k, Point2::new(0.0, 0.0), rng.random_range(0.05..0.15), rng)?;
        let depth = rng.random_range(0.004..0.01);
        let reach = body.support(-out);
        return Ok(Some((body.translated(end + out * (reach - depth)), false)));
    }
    if rng.random_bool(0.2) {
        // a line entering the anchor just past its boundary
        let u = random_unit(rng);
        let entry = boundary_along(s1, u);
        let start = entry - u * rng.random_range(0.003..0.008);
        let dir = u.rotate(rng.random_range(-0.6..0.6));
        return Ok(Some((
            Shape::line(0, start, start + dir * rng.random_range(0.15..0.35)),
            false,
        )));
    }
    let k = *CLOSED_KINDS.choose(rng).unwrap();
    let reach1 = s1.max_distance_from(c1);
    let body = shape_in_disc(k, Point2::new(0.0, 0.0), reach1 * rng.random_range(0.5..1.2), rng)?;
    let u = random_unit(rng);
    let h1 = s1.support(u) - c1.dot(u);
    let h2 = body.support(-u);
    let depth = rng.random_range(0.04..0.15) * s1.inradius().min(body.inradius());
    Ok(Some((body.translated(c1 + u * (h1 + h2 - depth)), false)))
}

fn shared_vertex<R: Rng + ?Sized>(s1: &Shape, rng: &mut R) -> Result<Option<(Shape, bool)>, SceneError> {
    let (corner, outward) = if s1.kind == ShapeKind::Line {
        let (p0, p1) = line_parts(s1);
        if rng.random_bool(0.5) {
            (p1, (p1 - p0).normalized())
        } else {
            (p0, (p0 - p1).normalized())
        }
    } else {
        let v = *s1.vertices().choose(rng).unwrap();
        (v, (v - centroid(s1)).normalized())
    };
    if s1.kind != ShapeKind::Line && rng.random_bool(0.2) {
        let dir = outward.rotate(rng.random_range(-0.5..0.5));
        return Ok(Some((
            Shape::line(0, corner, corner + dir * rng.random_range(0.1..0.3)),
            false,
        )));
    }
    let k = *POLYGONAL_KINDS.choose(rng).unwrap();
    let origin = Point2::new(0.0, 0.0);
    let body = shape_in_disc(k, origin, rng.random_range(0.05..0.15), rng)?;
    let idx = rng.random_range(0..body.vertices().len());
    let v2 = body.vertices()[idx];
    // turn the body so it extends away from the anchor through the shared corner
    let turned = body.rotated_about(origin, outward.angle() - (-v2).angle());
    let v2 = turned.vertices()[idx];
    Ok(Some((turned.translated(corner - v2), false)))
}
