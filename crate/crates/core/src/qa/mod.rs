//! Six-aspect multiple-choice question synthesis.

mod aspects;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use aspects::{gen_counting, gen_existence, gen_location, gen_reference, gen_relationship, gen_size};

use crate::geometry::{centroid, Point2, Shape};
use crate::scene::{SceneDescription, Split};
use crate::seed::{derive, rng_from};

/// Choice text for a pair with no relationship.
pub const NONE_OF_THE_ABOVE: &str = "none of the above";

const ORDINALS: [&str; 10] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
];

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum QaError {
    #[error("fewer than three shape kinds are absent")]
    InsufficientAbsentKinds,
    #[error("no eligible target shape")]
    NoEligibleTarget,
    #[error("no eligible shape pair")]
    NoEligiblePair,
    #[error("no reference template applies")]
    NoEligibleTemplate,
    #[error("shape {0} cannot be referred to unambiguously")]
    AmbiguousReference(u32),
    #[error("scene has no shape with id {0}")]
    UnknownShape(u32),
    #[error("scene is neither easy nor hard ({shapes} shapes, noisy = {noisy})")]
    UnsplitScene { shapes: usize, noisy: bool },
    #[error("scene has no shapes")]
    EmptyScene,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AspectKind {
    Existence,
    Counting,
    Location,
    Size,
    Reference,
    Relationship,
}

impl AspectKind {
    pub const ALL: [AspectKind; 6] = [
        AspectKind::Existence,
        AspectKind::Counting,
        AspectKind::Location,
        AspectKind::Size,
        AspectKind::Reference,
        AspectKind::Relationship,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AspectKind::Existence => "existence",
            AspectKind::Counting => "counting",
            AspectKind::Location => "location",
            AspectKind::Size => "size",
            AspectKind::Reference => "reference",
            AspectKind::Relationship => "relationship",
        }
    }

    /// Three-letter column header.
    pub fn short(self) -> &'static str {
        match self {
            AspectKind::Existence => "Ext",
            AspectKind::Counting => "Cnt",
            AspectKind::Location => "Loc",
            AspectKind::Size => "Siz",
            AspectKind::Reference => "Ref",
            AspectKind::Relationship => "Rel",
        }
    }

    pub fn from_name(name: &str) -> Option<AspectKind> {
        AspectKind::ALL.into_iter().find(|a| a.name() == name)
    }
}

impl std::fmt::Display for AspectKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuadrantLabel {
    UpperLeft,
    UpperRight,
    LowerLeft,
    LowerRight,
}

impl QuadrantLabel {
    pub const ALL: [QuadrantLabel; 4] = [
        QuadrantLabel::UpperLeft,
        QuadrantLabel::UpperRight,
        QuadrantLabel::LowerLeft,
        QuadrantLabel::LowerRight,
    ];

    pub fn label(self) -> &'static str {
        match self {
            QuadrantLabel::UpperLeft => "upper-left",
            QuadrantLabel::UpperRight => "upper-right",
            QuadrantLabel::LowerLeft => "lower-left",
            QuadrantLabel::LowerRight => "lower-right",
        }
    }

    pub fn from_label(label: &str) -> Option<QuadrantLabel> {
        QuadrantLabel::ALL.into_iter().find(|q| q.label() == label)
    }

    /// Quadrant of an offset; zero components count as right / upper.
    pub fn of_offset(d: Point2) -> QuadrantLabel {
        match (d.x < 0.0, d.y < 0.0) {
            (true, false) => QuadrantLabel::UpperLeft,
            (false, false) => QuadrantLabel::UpperRight,
            (true, true) => QuadrantLabel::LowerLeft,
            (false, true) => QuadrantLabel::LowerRight,
        }
    }

    /// Quadrant of a canvas point relative to the canvas center.
    pub fn of_point(p: Point2) -> QuadrantLabel {
        QuadrantLabel::of_offset(p - Point2::new(0.5, 0.5))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionMeta {
    pub target_shape_ids: Vec<u32>,
    pub ground_truth_value: String,
    pub template_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub question_id: String,
    pub figure_id: String,
    pub aspect: AspectKind,
    pub difficulty: Split,
    pub text: String,
    pub choices: Vec<String>,
    pub answer_index: usize,
    pub meta: QuestionMeta,
}

impl Question {
    pub fn answer_letter(&self) -> char {
        (b'A' + self.answer_index as u8) as char
    }

    pub fn answer_text(&self) -> &str {
        &self.choices[self.answer_index]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaConfig {
    /// Counting distractors lie within truth ± this window.
    pub counting_window: u32,
    /// Probability of asking to count a kind that is absent.
    pub absent_count_probability: f64,
    pub size_factors: Vec<f64>,
    /// Minimum pairwise gap between size choices.
    pub size_min_gap: f64,
    pub size_max_value: f64,
    /// Size targets whose rounded truth falls below this are skipped.
    pub size_min_truth: f64,
    pub true_relation_probability: f64,
    /// Centroids closer than this to a dividing line are not used for location.
    pub location_margin: f64,
    /// Same-kind shapes whose centroid x differ by less than this are ambiguous.
    pub reference_margin: f64,
}

impl Default for QaConfig {
    fn default() -> Self {
        QaConfig {
            counting_window: 3,
            absent_count_probability: 0.2,
            size_factors: vec![0.4, 0.6, 1.5, 2.0, 2.5],
            size_min_gap: 0.05,
            size_max_value: 1.5,
            size_min_truth: 0.03,
            true_relation_probability: 0.75,
            location_margin: 0.02,
            reference_margin: 0.02,
        }
    }
}

/// Easy iff at most four shapes and clean; Hard iff more than four and noisy.
pub fn label_difficulty(desc: &SceneDescription) -> Result<Split, QaError> {
    let n = desc.shapes.len();
    match (n <= 4, desc.noisy) {
        (true, false) => Ok(Split::Easy),
        (false, true) => Ok(Split::Hard),
        _ => Err(QaError::UnsplitScene {
            shapes: n,
            noisy: desc.noisy,
        }),
    }
}

/// Unambiguous noun phrase for a shape: "the circle" when its kind is unique,
/// otherwise an ordinal by centroid x ("the second triangle from the left").
pub fn shape_reference_phrase(desc: &SceneDescription, shape_id: u32, margin: f64) -> Result<String, QaError> {
    let shape = desc.shape(shape_id).ok_or(QaError::UnknownShape(shape_id))?;
    let mut same: Vec<(Point2, u32)> = desc
        .shapes
        .iter()
        .filter(|s| s.kind == shape.kind)
        .map(|s| (centroid(s), s.id))
        .collect();
    if same.len() == 1 {
        return Ok(format!("the {}", shape.kind));
    }
    same.sort_by(|a, b| a.0.x.total_cmp(&b.0.x).then(a.0.y.total_cmp(&b.0.y)));
    let rank = same.iter().position(|(_, id)| *id == shape_id).unwrap();
    let crowded = |i: usize, j: usize| (same[i].0.x - same[j].0.x).abs() < margin;
    if (rank > 0 && crowded(rank - 1, rank)) || (rank + 1 < same.len() && crowded(rank, rank + 1)) {
        return Err(QaError::AmbiguousReference(shape_id));
    }
    let ordinal = ORDINALS
        .get(rank)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("{}th", rank + 1));
    Ok(format!("the {ordinal} {} from the left", shape.kind))
}

pub(crate) fn referable<'a>(desc: &'a SceneDescription, cfg: &QaConfig) -> Vec<(&'a Shape, String)> {
    desc.shapes
        .iter()
        .filter_map(|s| {
            shape_reference_phrase(desc, s.id, cfg.reference_margin)
                .ok()
                .map(|p| (s, p))
        })
        .collect()
}

/// Places the answer at a uniform position among the shuffled distractors.
pub(crate) fn assemble<R: Rng + ?Sized>(
    desc: &SceneDescription,
    aspect: AspectKind,
    text: String,
    answer: String,
    mut distractors: Vec<String>,
    meta: QuestionMeta,
    rng: &mut R,
) -> Result<Question, QaError> {
    let difficulty = label_difficulty(desc)?;
    debug_assert_eq!(distractors.len(), 3);
    distractors.shuffle(rng);
    let answer_index = rng.random_range(0..4);
    distractors.insert(answer_index, answer);
    debug_assert!({
        let mut c = distractors.clone();
        c.sort();
        c.dedup();
        c.len() == 4
    });
    Ok(Question {
        question_id: format!("{}-{}", desc.figure_id, aspect),
        figure_id: desc.figure_id.clone(),
        aspect,
        difficulty,
        text,
        choices: distractors,
        answer_index,
        meta,
    })
}

/// One question for `aspect`.
pub fn gen_aspect<R: Rng + ?Sized>(
    aspect: AspectKind,
    desc: &SceneDescription,
    cfg: &QaConfig,
    rng: &mut R,
) -> Result<Question, QaError> {
    match aspect {
        AspectKind::Existence => gen_existence(desc, cfg, rng),
        AspectKind::Counting => gen_counting(desc, cfg, rng),
        AspectKind::Location => gen_location(desc, cfg, rng),
        AspectKind::Size => gen_size(desc, cfg, rng),
        AspectKind::Reference => gen_reference(desc, cfg, rng),
        AspectKind::Relationship => gen_relationship(desc, cfg, rng),
    }
}

/// One question per aspect, each drawn from its own stream of `seed`.
pub fn generate_questions(desc: &SceneDescription, cfg: &QaConfig, seed: u64) -> Result<Vec<Question>, QaError> {
    AspectKind::ALL
        .iter()
        .enumerate()
        .map(|(i, &aspect)| gen_aspect(aspect, desc, cfg, &mut rng_from(derive(seed, 0xA5_9EC7, i as u64))))
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry::{Point2, Shape};
    use crate::scene::GenConfig;

    pub(crate) fn scene(shapes: Vec<Shape>) -> SceneDescription {
        let noisy = shapes.len() > 4;
        SceneDescription {
            figure_id: "fig".into(),
            shapes,
            relations: vec![],
            noisy,
            seed: 0,
            config: GenConfig::default(),
        }
    }

    fn tri(id: u32, x: f64) -> Shape {
        Shape::polygon(
            id,
            crate::geometry::ShapeKind::Triangle,
            vec![
                Point2::new(x - 0.05, 0.4),
                Point2::new(x + 0.05, 0.4),
                Point2::new(x, 0.5),
            ],
            0.0,
        )
    }

    #[test]
    fn difficulty_rule() {
        let c = |i| Shape::circle(i, Point2::new(0.1 + 0.1 * i as f64, 0.5), 0.03);
        let mut d = scene((0..3).map(c).collect());
        assert_eq!(label_difficulty(&d), Ok(Split::Easy));
        d.shapes = (0..6).map(c).collect();
        d.noisy = true;
        assert_eq!(label_difficulty(&d), Ok(Split::Hard));
        d.noisy = false;
        assert!(matches!(
            label_difficulty(&d),
            Err(QaError::UnsplitScene {
                shapes: 6,
                noisy: false
            })
        ));
    }

    #[test]
    fn reference_phrases() {
        let d = scene(vec![
            Shape::circle(0, Point2::new(0.5, 0.8), 0.05),
            tri(1, 0.7),
            tri(2, 0.2),
        ]);
        assert_eq!(shape_reference_phrase(&d, 0, 0.02).unwrap(), "the circle");
        assert_eq!(
            shape_reference_phrase(&d, 2, 0.02).unwrap(),
            "the first triangle from the left"
        );
        assert_eq!(
            shape_reference_phrase(&d, 1, 0.02).unwrap(),
            "the second triangle from the left"
        );
        let close = scene(vec![tri(0, 0.3), tri(1, 0.31)]);
        assert_eq!(
            shape_reference_phrase(&close, 0, 0.02),
            Err(QaError::AmbiguousReference(0))
        );
    }

    #[test]
    fn quadrants() {
        assert_eq!(QuadrantLabel::of_point(Point2::new(0.2, 0.8)), QuadrantLabel::UpperLeft);
        let d = Point2::new(0.7, 0.3) - Point2::new(0.3, 0.7);
        assert_eq!(QuadrantLabel::of_offset(d), QuadrantLabel::LowerRight);
    }
}
