use rand::seq::{IndexedRandom, IteratorRandom};
use rand::Rng;

use super::{
    assemble, referable, AspectKind, QaConfig, QaError, QuadrantLabel, Question, QuestionMeta, NONE_OF_THE_ABOVE,
};
use crate::geometry::{area, centroid, holding_relations, spans, verify_relation, RelationKind, Shape, ShapeKind};
use crate::scene::{SceneDescription, RELATION_TOL};

fn meta(ids: Vec<u32>, truth: impl Into<String>, template: &str) -> QuestionMeta {
    QuestionMeta {
        target_shape_ids: ids,
        ground_truth_value: truth.into(),
        template_id: template.to_string(),
    }
}

fn present_and_absent(desc: &SceneDescription) -> (Vec<ShapeKind>, Vec<ShapeKind>) {
    ShapeKind::ALL.into_iter().partition(|k| desc.count_of(*k) > 0)
}

fn ids_of(desc: &SceneDescription, kind: ShapeKind) -> Vec<u32> {
    desc.shapes.iter().filter(|s| s.kind == kind).map(|s| s.id).collect()
}

fn names(kinds: impl IntoIterator<Item = ShapeKind>) -> Vec<String> {
    kinds.into_iter().map(|k| k.name().to_string()).collect()
}

/// One present kind against three absent ones.
pub fn gen_existence<R: Rng + ?Sized>(
    desc: &SceneDescription,
    _cfg: &QaConfig,
    rng: &mut R,
) -> Result<Question, QaError> {
    let (present, absent) = present_and_absent(desc);
    if present.is_empty() {
        return Err(QaError::EmptyScene);
    }
    if absent.len() < 3 {
        return Err(QaError::InsufficientAbsentKinds);
    }
    let kind = *present.choose(rng).unwrap();
    let distractors = names(absent.choose_multiple(rng, 3).copied());
    assemble(
        desc,
        AspectKind::Existence,
        "Which of the following shapes appears in the figure?".into(),
        kind.name().into(),
        distractors,
        meta(ids_of(desc, kind), kind.name(), "existence"),
        rng,
    )
}

/// Exact count of one kind, occasionally an absent one.
pub fn gen_counting<R: Rng + ?Sized>(
    desc: &SceneDescription,
    cfg: &QaConfig,
    rng: &mut R,
) -> Result<Question, QaError> {
    let (present, absent) = present_and_absent(desc);
    if present.is_empty() {
        return Err(QaError::EmptyScene);
    }
    let ask_absent = !absent.is_empty() && rng.random_bool(cfg.absent_count_probability);
    let (kind, template) = if ask_absent {
        (*absent.choose(rng).unwrap(), "counting/absent")
    } else {
        (*present.choose(rng).unwrap(), "counting/present")
    };
    let truth = desc.count_of(kind) as i64;
    let w = cfg.counting_window.max(3) as i64;
    let window: Vec<i64> = ((truth - w).max(0)..=truth + w).filter(|&v| v != truth).collect();
    let distractors = window.choose_multiple(rng, 3).map(|v| v.to_string()).collect();
    assemble(
        desc,
        AspectKind::Counting,
        format!("How many {} are in the figure?", kind.plural()),
        truth.to_string(),
        distractors,
        meta(ids_of(desc, kind), truth.to_string(), template),
        rng,
    )
}

fn other_quadrants(answer: QuadrantLabel) -> Vec<String> {
    QuadrantLabel::ALL
        .into_iter()
        .filter(|q| *q != answer)
        .map(|q| q.label().to_string())
        .collect()
}

/// Absolute quadrant of one shape, or direction of one shape from another.
pub fn gen_location<R: Rng + ?Sized>(
    desc: &SceneDescription,
    cfg: &QaConfig,
    rng: &mut R,
) -> Result<Question, QaError> {
    let m = cfg.location_margin;
    let refs = referable(desc, cfg);
    let absolute: Vec<_> = refs
        .iter()
        .filter(|(s, _)| {
            let c = centroid(s);
            (c.x - 0.5).abs() >= m && (c.y - 0.5).abs() >= m
        })
        .collect();
    let mut relative = Vec::new();
    for a in &refs {
        for b in &refs {
            if a.0.id == b.0.id {
                continue;
            }
            let d = centroid(a.0) - centroid(b.0);
            if d.x.abs() >= m && d.y.abs() >= m {
                relative.push((a, b));
            }
        }
    }
    let use_relative = match (absolute.is_empty(), relative.is_empty()) {
        (true, true) => return Err(QaError::NoEligibleTarget),
        (true, false) => true,
        (false, true) => false,
        (false, false) => rng.random_bool(0.5),
    };
    if use_relative {
        let ((a, pa), (b, pb)) = *relative.choose(rng).unwrap();
        let q = QuadrantLabel::of_offset(centroid(a) - centroid(b));
        assemble(
            desc,
            AspectKind::Location,
            format!("Where is {pa} in relation to {pb}?"),
            q.label().into(),
            other_quadrants(q),
            meta(vec![a.id, b.id], q.label(), "location/relative"),
            rng,
        )
    } else {
        let (s, phrase) = *absolute.choose(rng).unwrap();
        let q = QuadrantLabel::of_point(centroid(s));
        assemble(
            desc,
            AspectKind::Location,
            format!("In which quadrant of the figure is {phrase} located?"),
            q.label().into(),
            other_quadrants(q),
            meta(vec![s.id], q.label(), "location/absolute"),
            rng,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SizeMeasure {
    HorizontalSpan,
    VerticalSpan,
    Area,
}

impl SizeMeasure {
    pub const ALL: [SizeMeasure; 3] = [
        SizeMeasure::HorizontalSpan,
        SizeMeasure::VerticalSpan,
        SizeMeasure::Area,
    ];

    pub fn id(self) -> &'static str {
        match self {
            SizeMeasure::HorizontalSpan => "horizontal_span",
            SizeMeasure::VerticalSpan => "vertical_span",
            SizeMeasure::Area => "area",
        }
    }

    pub fn phrase(self) -> &'static str {
        match self {
            SizeMeasure::HorizontalSpan => "horizontal span",
            SizeMeasure::VerticalSpan => "vertical span",
            SizeMeasure::Area => "area",
        }
    }

    pub fn of(self, s: &Shape) -> f64 {
        match self {
            SizeMeasure::HorizontalSpan => spans(s).0,
            SizeMeasure::VerticalSpan => spans(s).1,
            SizeMeasure::Area => area(s),
        }
    }
}

/// Value in hundredths, rounded half away from zero.
pub(crate) fn hundredths(v: f64) -> i64 {
    (v * 100.0).round() as i64
}

pub(crate) fn format_hundredths(c: i64) -> String {
    format!("{}.{:02}", c / 100, c % 100)
}

/// Every 3-subset of factor multiples that keeps all four values in range
/// and pairwise separated.
fn feasible_size_sets(truth: i64, cfg: &QaConfig) -> Vec<[i64; 3]> {
    let gap = hundredths(cfg.size_min_gap);
    let max = hundredths(cfg.size_max_value);
    let mut values: Vec<i64> = cfg
        .size_factors
        .iter()
        .map(|f| hundredths(truth as f64 / 100.0 * f))
        .filter(|&v| v > 0 && v <= max)
        .collect();
    values.sort_unstable();
    values.dedup();
    let mut out = Vec::new();
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            for k in j + 1..values.len() {
                let set = [truth, values[i], values[j], values[k]];
                let separated = (0..4).all(|a| (a + 1..4).all(|b| (set[a] - set[b]).abs() >= gap));
                if separated {
                    out.push([values[i], values[j], values[k]]);
                }
            }
        }
    }
    out
}

/// Span or area of one shape with multiplicative distractors.
pub fn gen_size<R: Rng + ?Sized>(desc: &SceneDescription, cfg: &QaConfig, rng: &mut R) -> Result<Question, QaError> {
    let min_truth = hundredths(cfg.size_min_truth);
    let mut candidates = Vec::new();
    for (s, phrase) in referable(desc, cfg) {
        if s.kind == ShapeKind::Spiral {
            continue;
        }
        for measure in SizeMeasure::ALL {
            if measure == SizeMeasure::Area && !s.kind.is_closed() {
                continue;
            }
            let truth = hundredths(measure.of(s));
            if truth < min_truth {
                continue;
            }
            let sets = feasible_size_sets(truth, cfg);
            if !sets.is_empty() {
                candidates.push((s, phrase.clone(), measure, truth, sets));
            }
        }
    }
    let (s, phrase, measure, truth, sets) = candidates.choose(rng).ok_or(QaError::NoEligibleTarget)?;
    let set = sets.choose(rng).unwrap();
    assemble(
        desc,
        AspectKind::Size,
        format!(
            "What is the {} of {phrase}, with the image size normalized to 1?",
            measure.phrase()
        ),
        format_hundredths(*truth),
        set.iter().map(|&v| format_hundredths(v)).collect(),
        meta(vec![s.id], format_hundredths(*truth), &format!("size/{}", measure.id())),
        rng,
    )
}

fn holds(a: &Shape, b: &Shape, kind: RelationKind) -> bool {
    verify_relation(a, b, kind, RELATION_TOL).unwrap_or(false)
}

fn related_draft<R: Rng + ?Sized>(desc: &SceneDescription, refs: &[(&Shape, String)], rng: &mut R) -> Option<Draft> {
    let phrase_of = |id: u32| refs.iter().find(|(s, _)| s.id == id).map(|(s, p)| (*s, p.clone()));
    let related: Vec<_> = desc
        .relations
        .iter()
        .filter_map(|r| Some((r.kind, phrase_of(r.subject_id)?, phrase_of(r.object_id)?)))
        .collect();
    let (kind, (a, pa), (b, pb)) = related.choose(rng).cloned()?;
    let free: Vec<RelationKind> = RelationKind::ALL
        .into_iter()
        .filter(|k| *k != kind && !holds(a, b, *k))
        .collect();
    if free.len() < 2 {
        return None;
    }
    let mut distractors = names_of_relations(free.choose_multiple(rng, 2).copied());
    distractors.push(NONE_OF_THE_ABOVE.to_string());
    Some(Draft {
        text: format!("What is the relationship of {pa} to {pb}?"),
        answer: kind.name().into(),
        distractors,
        meta: meta(vec![a.id, b.id], kind.name(), "relationship/related"),
    })
}

fn unrelated_draft<R: Rng + ?Sized>(refs: &[(&Shape, String)], rng: &mut R) -> Option<Draft> {
    let mut unrelated = Vec::new();
    for (i, (a, pa)) in refs.iter().enumerate() {
        for (b, pb) in &refs[i + 1..] {
            if holding_relations(a, b, RELATION_TOL).is_empty() && holding_relations(b, a, RELATION_TOL).is_empty() {
                unrelated.push(((*a, pa), (*b, pb)));
            }
        }
    }
    let &(first, second) = unrelated.choose(rng)?;
    let ((a, pa), (b, pb)) = if rng.random_bool(0.5) {
        (first, second)
    } else {
        (second, first)
    };
    Some(Draft {
        text: format!("What is the relationship of {pa} to {pb}?"),
        answer: NONE_OF_THE_ABOVE.into(),
        distractors: names_of_relations(RelationKind::ALL.choose_multiple(rng, 3).copied()),
        meta: meta(vec![a.id, b.id], NONE_OF_THE_ABOVE, "relationship/unrelated"),
    })
}

fn names_of_relations(kinds: impl IntoIterator<Item = RelationKind>) -> Vec<String> {
    kinds.into_iter().map(|k| k.name().to_string()).collect()
}

/// A recorded relation, or a pair with none of the nine; falls back to the
/// other form when the drawn one has no eligible pair.
pub fn gen_relationship<R: Rng + ?Sized>(
    desc: &SceneDescription,
    cfg: &QaConfig,
    rng: &mut R,
) -> Result<Question, QaError> {
    let refs = referable(desc, cfg);
    let draft = if rng.random_bool(cfg.true_relation_probability) {
        related_draft(desc, &refs, rng).or_else(|| unrelated_draft(&refs, rng))
    } else {
        unrelated_draft(&refs, rng).or_else(|| related_draft(desc, &refs, rng))
    };
    let d = draft.ok_or(QaError::NoEligiblePair)?;
    assemble(
        desc,
        AspectKind::Relationship,
        d.text,
        d.answer,
        d.distractors,
        d.meta,
        rng,
    )
}

/// Size ratio the answer must reach over the anchor in the size template.
pub const REFERENCE_LARGER: f64 = 1.25;
/// Size ratio every distractor must stay under in the size template.
pub const REFERENCE_SMALLER: f64 = 0.8;

struct Draft {
    text: String,
    answer: String,
    distractors: Vec<String>,
    meta: QuestionMeta,
}

fn reference_size<R: Rng + ?Sized>(desc: &SceneDescription, cfg: &QaConfig, rng: &mut R) -> Option<Draft> {
    let unique: Vec<&Shape> = desc.shapes.iter().filter(|s| desc.count_of(s.kind) == 1).collect();
    let mut options = Vec::new();
    for anchor in unique.iter().filter(|s| s.kind.is_closed()) {
        let a = area(anchor);
        let larger: Vec<&Shape> = unique
            .iter()
            .filter(|s| s.id != anchor.id && area(s) >= REFERENCE_LARGER * a)
            .copied()
            .collect();
        let smaller: Vec<&Shape> = unique
            .iter()
            .filter(|s| s.id != anchor.id && area(s) <= REFERENCE_SMALLER * a)
            .copied()
            .collect();
        if !larger.is_empty() && smaller.len() >= 3 {
            options.push((*anchor, larger, smaller));
        }
    }
    let (anchor, larger, smaller) = options.choose(rng)?;
    let answer = *larger.choose(rng).unwrap();
    let phrase = super::shape_reference_phrase(desc, anchor.id, cfg.reference_margin).ok()?;
    Some(Draft {
        text: format!("Which shape is larger than {phrase}?"),
        answer: answer.kind.name().into(),
        distractors: smaller
            .choose_multiple(rng, 3)
            .map(|s| s.kind.name().to_string())
            .collect(),
        meta: meta(vec![anchor.id, answer.id], answer.kind.name(), "reference/size"),
    })
}

fn reference_location<R: Rng + ?Sized>(desc: &SceneDescription, cfg: &QaConfig, rng: &mut R) -> Option<Draft> {
    let m = cfg.location_margin;
    let clear = |s: &Shape| {
        let c = centroid(s);
        (c.x - 0.5).abs() >= m && (c.y - 0.5).abs() >= m
    };
    let targets: Vec<&Shape> = desc
        .shapes
        .iter()
        .filter(|s| desc.count_of(s.kind) == 1 && clear(s))
        .collect();
    let target = *targets.choose(rng)?;
    let quadrant = QuadrantLabel::of_point(centroid(target));
    let (_, absent) = present_and_absent(desc);
    let mut pool: Vec<ShapeKind> = absent;
    pool.extend(
        desc.shapes
            .iter()
            .filter(|s| desc.count_of(s.kind) == 1 && clear(s) && QuadrantLabel::of_point(centroid(s)) != quadrant)
            .map(|s| s.kind),
    );
    pool.sort();
    if pool.len() < 3 {
        return None;
    }
    Some(Draft {
        text: format!("Which shape is located in the {} part of the figure?", quadrant.label()),
        answer: target.kind.name().into(),
        distractors: names(pool.choose_multiple(rng, 3).copied()),
        meta: meta(vec![target.id], target.kind.name(), "reference/location"),
    })
}

fn reference_count<R: Rng + ?Sized>(desc: &SceneDescription, rng: &mut R) -> Option<Draft> {
    if desc.shapes.len() < 2 {
        return None;
    }
    let (present, _) = present_and_absent(desc);
    let kind = *present.choose(rng)?;
    let n = desc.count_of(kind);
    let others: Vec<ShapeKind> = ShapeKind::ALL.into_iter().filter(|k| desc.count_of(*k) != n).collect();
    if others.len() < 3 {
        return None;
    }
    Some(Draft {
        text: format!(
            "Which shape appears exactly {n} {}?",
            if n == 1 { "time" } else { "times" }
        ),
        answer: kind.name().into(),
        distractors: names(others.choose_multiple(rng, 3).copied()),
        meta: meta(ids_of(desc, kind), kind.name(), "reference/count"),
    })
}

/// Identify a shape from a size, location or count attribute.
pub fn gen_reference<R: Rng + ?Sized>(
    desc: &SceneDescription,
    cfg: &QaConfig,
    rng: &mut R,
) -> Result<Question, QaError> {
    let drafts: Vec<Draft> = [
        reference_size(desc, cfg, rng),
        reference_location(desc, cfg, rng),
        reference_count(desc, rng),
    ]
    .into_iter()
    .flatten()
    .collect();
    let pick = (0..drafts.len()).choose(rng).ok_or(QaError::NoEligibleTemplate)?;
    let d = drafts.into_iter().nth(pick).unwrap();
    assemble(
        desc,
        AspectKind::Reference,
        d.text,
        d.answer,
        d.distractors,
        d.meta,
        rng,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::qa::tests::scene;
    use crate::scene::Relation;
    use crate::seed::rng_from;

    fn cfg() -> QaConfig {
        QaConfig::default()
    }

    #[test]
    fn existence_answers_present_kind() {
        let d = scene(vec![
            Shape::circle(0, Point2::new(0.3, 0.3), 0.1),
            Shape::regular_polygon(1, ShapeKind::Triangle, Point2::new(0.7, 0.7), 0.1, 0.0),
        ]);
        for seed in 0..50 {
            let q = gen_existence(&d, &cfg(), &mut rng_from(seed)).unwrap();
            assert!(["circle", "triangle"].contains(&q.answer_text()));
            for (i, c) in q.choices.iter().enumerate() {
                if i != q.answer_index {
                    assert!(!["circle", "triangle"].contains(&c.as_str()));
                }
            }
        }
        let spiral = scene(vec![Shape::spiral(0, Point2::new(0.5, 0.5), 0.02, 0.01, 2.0, 0.0)]);
        assert_eq!(
            gen_existence(&spiral, &cfg(), &mut rng_from(1)).unwrap().answer_text(),
            "spiral"
        );
    }

    #[test]
    fn existence_needs_absent_kinds() {
        let shapes: Vec<Shape> = ShapeKind::ALL
            .iter()
            .enumerate()
            .map(|(i, _)| Shape::circle(i as u32, Point2::new(0.1, 0.1), 0.01))
            .collect();
        let mut d = scene(shapes);
        for (s, k) in d.shapes.iter_mut().zip(ShapeKind::ALL) {
            s.kind = k;
        }
        assert_eq!(
            gen_existence(&d, &cfg(), &mut rng_from(0)),
            Err(QaError::InsufficientAbsentKinds)
        );
    }

    #[test]
    fn counting_three_circles() {
        let d = scene(
            (0..3)
                .map(|i| Shape::circle(i, Point2::new(0.2 + 0.3 * i as f64, 0.5), 0.05))
                .collect(),
        );
        let mut saw_zero = false;
        for seed in 0..200 {
            let q = gen_counting(&d, &cfg(), &mut rng_from(seed)).unwrap();
            let truth: i64 = q.answer_text().parse().unwrap();
            if q.meta.template_id == "counting/present" {
                assert_eq!(truth, 3);
            } else {
                assert_eq!(truth, 0);
                saw_zero = true;
            }
            let vals: Vec<i64> = q.choices.iter().map(|c| c.parse().unwrap()).collect();
            assert!(vals.iter().all(|v| *v >= 0 && (v - truth).abs() <= 3));
        }
        assert!(saw_zero);
    }

    #[test]
    fn location_no_target_near_center_lines() {
        let d = scene(vec![Shape::circle(0, Point2::new(0.5, 0.5), 0.1)]);
        assert_eq!(
            gen_location(&d, &cfg(), &mut rng_from(0)),
            Err(QaError::NoEligibleTarget)
        );
        let d = scene(vec![Shape::circle(0, Point2::new(0.2, 0.8), 0.1)]);
        assert_eq!(
            gen_location(&d, &cfg(), &mut rng_from(0)).unwrap().answer_text(),
            "upper-left"
        );
    }

    #[test]
    fn size_circle_span() {
        let d = scene(vec![Shape::circle(0, Point2::new(0.5, 0.5), 0.15)]);
        for seed in 0..40 {
            let q = gen_size(&d, &cfg(), &mut rng_from(seed)).unwrap();
            if q.meta.template_id == "size/horizontal_span" {
                assert_eq!(q.answer_text(), "0.30");
            }
            let v: Vec<i64> = q.choices.iter().map(|c| hundredths(c.parse().unwrap())).collect();
            for i in 0..4 {
                for j in i + 1..4 {
                    assert!((v[i] - v[j]).abs() >= 5);
                }
            }
        }
    }

    #[test]
    fn size_square_area() {
        let d = scene(vec![Shape::square(0, Point2::new(0.5, 0.5), 0.3, 0.0)]);
        let sets = feasible_size_sets(9, &cfg());
        assert!(!sets.is_empty());
        for seed in 0..40 {
            let q = gen_size(&d, &cfg(), &mut rng_from(seed)).unwrap();
            if q.meta.template_id == "size/area" {
                assert_eq!(q.answer_text(), "0.09");
            }
        }
    }

    #[test]
    fn relationship_inscribed() {
        let sq = Shape::square(0, Point2::new(0.5, 0.5), 0.4, 0.0);
        let c = Shape::circle(1, Point2::new(0.5, 0.5), 0.2);
        let mut d = scene(vec![sq, c]);
        d.relations.push(Relation {
            subject_id: 1,
            object_id: 0,
            kind: RelationKind::Inscribed,
        });
        let cfg = QaConfig {
            true_relation_probability: 1.0,
            ..cfg()
        };
        let q = gen_relationship(&d, &cfg, &mut rng_from(3)).unwrap();
        assert_eq!(q.answer_text(), "inscribed");
        assert!(q.text.contains("the circle to the square"));
        // concentric also holds, so it must not be offered as a distractor
        assert!(!q.choices.iter().any(|c| c == "concentric"));
    }

    #[test]
    fn relationship_unrelated_pair() {
        let d = scene(vec![
            Shape::circle(0, Point2::new(0.2, 0.2), 0.1),
            Shape::square(1, Point2::new(0.7, 0.7), 0.2, 0.3),
        ]);
        let q = gen_relationship(&d, &cfg(), &mut rng_from(0)).unwrap();
        assert_eq!(q.answer_text(), NONE_OF_THE_ABOVE);
        assert_eq!(q.choices.len(), 4);
    }

    #[test]
    fn reference_size_template() {
        let d = scene(vec![
            Shape::square(0, Point2::new(0.5, 0.5), 0.2, 0.0),
            Shape::circle(1, Point2::new(0.2, 0.8), 0.1784),
            Shape::regular_polygon(2, ShapeKind::Triangle, Point2::new(0.8, 0.2), 0.12, 0.0),
            Shape::regular_polygon(3, ShapeKind::Pentagon, Point2::new(0.8, 0.8), 0.11, 0.0),
            Shape::line(4, Point2::new(0.1, 0.1), Point2::new(0.3, 0.2)),
        ]);
        let draft = reference_size(&d, &cfg(), &mut rng_from(0)).unwrap();
        assert_eq!(draft.answer, "circle");
        assert_eq!(draft.text, "Which shape is larger than the square?");
    }

    #[test]
    fn reference_count_template() {
        let d = scene(vec![
            Shape::circle(0, Point2::new(0.2, 0.2), 0.05),
            Shape::circle(1, Point2::new(0.8, 0.2), 0.05),
            Shape::regular_polygon(2, ShapeKind::Triangle, Point2::new(0.5, 0.8), 0.1, 0.0),
        ]);
        for seed in 0..20 {
            let draft = reference_count(&d, &mut rng_from(seed)).unwrap();
            if draft.text.contains("exactly 2 times") {
                assert_eq!(draft.answer, "circle");
            }
        }
    }
}
