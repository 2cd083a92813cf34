//! Relation predicates and the kind-compatibility matrix.
//!
//! `verify_relation(a, b, kind)` reads as "a is <kind> b":
//! `Inscribed` means `a` lies inside `b` touching its boundary,
//! `Circumscribed` means `b` lies inside `a` touching `a`'s boundary, and
//! `Contains` means `b` lies strictly inside `a`. Every other relation is
//! symmetric.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{bounding_box, centroid, Geometry, GeometryError, Point2, Shape, ShapeKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Tangent,
    Parallel,
    Perpendicular,
    Inscribed,
    Circumscribed,
    Concentric,
    Intersecting,
    Contains,
    SharedVertex,
}

impl RelationKind {
    pub const ALL: [RelationKind; 9] = [
        RelationKind::Tangent,
        RelationKind::Parallel,
        RelationKind::Perpendicular,
        RelationKind::Inscribed,
        RelationKind::Circumscribed,
        RelationKind::Concentric,
        RelationKind::Intersecting,
        RelationKind::Contains,
        RelationKind::SharedVertex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::Tangent => "tangent",
            RelationKind::Parallel => "parallel",
            RelationKind::Perpendicular => "perpendicular",
            RelationKind::Inscribed => "inscribed",
            RelationKind::Circumscribed => "circumscribed",
            RelationKind::Concentric => "concentric",
            RelationKind::Intersecting => "intersecting",
            RelationKind::Contains => "containing",
            RelationKind::SharedVertex => "sharing a vertex",
        }
    }

    pub fn from_name(name: &str) -> Option<RelationKind> {
        RelationKind::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Relations whose construction necessarily overlaps the reference shape.
    pub fn is_overlap_exempt(self) -> bool {
        matches!(
            self,
            RelationKind::Inscribed | RelationKind::Circumscribed | RelationKind::Concentric | RelationKind::Contains
        )
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Line,
    Circle,
    Ellipse,
    Polygon,
    Rect,
    Spiral,
}

fn class(kind: ShapeKind) -> Class {
    match kind {
        ShapeKind::Line => Class::Line,
        ShapeKind::Circle => Class::Circle,
        ShapeKind::Ellipse => Class::Ellipse,
        ShapeKind::Rectangle | ShapeKind::Square => Class::Rect,
        ShapeKind::Spiral => Class::Spiral,
        _ => Class::Polygon,
    }
}

fn either(a: ShapeKind, b: ShapeKind, f: impl Fn(ShapeKind, ShapeKind) -> bool) -> bool {
    f(a, b) || f(b, a)
}

fn concentric_kind(k: ShapeKind) -> bool {
    matches!(
        k,
        ShapeKind::Circle
            | ShapeKind::Ellipse
            | ShapeKind::Rectangle
            | ShapeKind::Square
            | ShapeKind::Pentagon
            | ShapeKind::Hexagon
            | ShapeKind::Spiral
    )
}

/// Whether the predicate is defined for the ordered pair of kinds.
pub fn compatible(kind: RelationKind, a: ShapeKind, b: ShapeKind) -> bool {
    use Class as C;
    match kind {
        RelationKind::Tangent => either(a, b, |x, y| {
            class(x) == C::Circle && matches!(class(y), C::Circle | C::Line | C::Polygon | C::Rect)
        }),
        RelationKind::Parallel | RelationKind::Perpendicular => either(a, b, |x, y| {
            class(x) == C::Line && matches!(class(y), C::Line | C::Rect)
        }),
        RelationKind::Inscribed => {
            (class(a) == C::Circle && b.is_polygonal()) || (a.is_polygonal() && class(b) == C::Circle)
        }
        RelationKind::Circumscribed => compatible(RelationKind::Inscribed, b, a),
        RelationKind::Concentric => concentric_kind(a) && concentric_kind(b),
        RelationKind::Intersecting => {
            (a.is_closed() && b.is_closed()) || either(a, b, |x, y| class(x) == C::Line && y.is_closed())
        }
        RelationKind::Contains => a.is_closed(),
        RelationKind::SharedVertex => {
            (a.is_polygonal() && b.is_polygonal()) || either(a, b, |x, y| class(x) == C::Line && y.is_polygonal())
        }
    }
}

/// Evaluates the relation predicate within `tol` (canvas units for
/// distances, unit-vector products for angles).
pub fn verify_relation(a: &Shape, b: &Shape, kind: RelationKind, tol: f64) -> Result<bool, GeometryError> {
    if !compatible(kind, a.kind, b.kind) {
        return Err(GeometryError::IncompatibleKinds {
            relation: kind,
            a: a.kind,
            b: b.kind,
        });
    }
    Ok(match kind {
        RelationKind::Tangent => tangent(a, b, tol),
        RelationKind::Parallel => directional(a, b, |u, v| u.cross(v).abs() < tol),
        RelationKind::Perpendicular => directional(a, b, |u, v| u.dot(v).abs() < tol),
        RelationKind::Inscribed => inscribed(a, b, tol),
        RelationKind::Circumscribed => inscribed(b, a, tol),
        RelationKind::Concentric => centroid(a).distance(centroid(b)) <= tol,
        RelationKind::Intersecting => intersecting(a, b, tol),
        RelationKind::Contains => contains(a, b, tol),
        RelationKind::SharedVertex => {
            let vb = b.vertices();
            a.vertices().iter().any(|p| vb.iter().any(|q| p.distance(*q) <= tol))
        }
    })
}

/// Every relation kind that is defined and holds for the ordered pair.
pub fn holding_relations(a: &Shape, b: &Shape, tol: f64) -> Vec<RelationKind> {
    RelationKind::ALL
        .into_iter()
        .filter(|k| verify_relation(a, b, *k, tol).unwrap_or(false))
        .collect()
}

fn circle_parts(s: &Shape) -> Option<(Point2, f64)> {
    match s.geometry {
        Geometry::Circle { center, radius } => Some((center, radius)),
        _ => None,
    }
}

fn tangent(a: &Shape, b: &Shape, tol: f64) -> bool {
    let (circle, other) = if a.kind == ShapeKind::Circle { (a, b) } else { (b, a) };
    let (c, r) = circle_parts(circle).expect("tangent needs a circle");
    match &other.geometry {
        Geometry::Circle { center, radius } => (c.distance(*center) - (r + radius)).abs() <= tol,
        Geometry::Line { p0, p1 } => (c.distance_to_segment(*p0, *p1) - r).abs() <= tol,
        _ => !other.contains_point(c) && (other.boundary_distance(c) - r).abs() <= tol,
    }
}

fn directional(a: &Shape, b: &Shape, test: impl Fn(Point2, Point2) -> bool) -> bool {
    let da = a.edge_directions();
    let db = b.edge_directions();
    da.iter().any(|u| db.iter().any(|v| test(*u, *v)))
}

/// `inner` lies inside `outer` and touches it as tightly as the kinds allow:
/// a circle touches every edge of its polygon, a polygon has every vertex on
/// its circle.
fn inscribed(inner: &Shape, outer: &Shape, tol: f64) -> bool {
    if let Some((c, r)) = circle_parts(inner) {
        if !outer.contains_point(c) {
            return false;
        }
        let v = outer.vertices();
        let n = v.len();
        (0..n).all(|i| (c.distance_to_line(v[i], v[(i + 1) % n]) - r).abs() <= tol)
    } else if let Some((c, r)) = circle_parts(outer) {
        inner.vertices().iter().all(|v| (v.distance(c) - r).abs() <= tol)
    } else {
        false
    }
}

fn strictly_inside(host: &Shape, p: Point2, tol: f64) -> bool {
    host.contains_point(p) && host.boundary_distance(p) > tol
}

fn strictly_outside(host: &Shape, p: Point2, tol: f64) -> bool {
    !host.contains_point(p) && host.boundary_distance(p) > tol
}

/// Boundaries cross: some part of one shape's locus is strictly inside the
/// other closed shape and some part strictly outside.
fn intersecting(a: &Shape, b: &Shape, tol: f64) -> bool {
    if let (Some((c1, r1)), Some((c2, r2))) = (circle_parts(a), circle_parts(b)) {
        let d = c1.distance(c2);
        return d < r1 + r2 - tol && d > (r1 - r2).abs() + tol;
    }
    if !bounding_box(a).intersects(&bounding_box(b)) {
        return false;
    }
    let crosses = |walker: &Shape, host: &Shape| {
        if !host.kind.is_closed() {
            return false;
        }
        let samples = walker.boundary_samples();
        samples.iter().any(|p| strictly_inside(host, *p, tol))
            && samples.iter().any(|p| strictly_outside(host, *p, tol))
    };
    crosses(a, b) || crosses(b, a)
}

/// `inner` lies strictly inside the closed `host` with clearance above `tol`.
fn contains(host: &Shape, inner: &Shape, tol: f64) -> bool {
    if let Some((c, r)) = circle_parts(inner) {
        return host.contains_point(c) && host.boundary_distance(c) > r + tol;
    }
    if !bounding_box(host).intersects(&bounding_box(inner)) {
        return false;
    }
    inner
        .boundary_samples()
        .iter()
        .chain(inner.vertices().iter())
        .all(|p| strictly_inside(host, *p, tol))
}
