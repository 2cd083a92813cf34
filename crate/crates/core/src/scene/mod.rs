//! Scene synthesis: free shapes first, then relation-constrained companions.

mod attributes;
mod relations;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use attributes::{randomize_attributes, SPAN_RANGE};
pub use relations::{anchor_relations, generate_related_shape, sample_relationship, RELATION_TOL};

use crate::geometry::{overlap_area, GeometryError, RelationKind, Shape, ShapeKind};
use crate::seed::{derive, rng_from};

/// Upper bound on whole-scene regenerations.
pub const MAX_REGENERATIONS: u64 = 100;

const REGEN_STREAM: u64 = 0x5CE7E;

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("sampling pool is empty")]
    EmptyPool,
    #[error("no relation in the pool is compatible with a {0}")]
    NoCompatibleRelation(ShapeKind),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("generation exhausted: {0}")]
    GenerationExhausted(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

/// Difficulty split a scene is generated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Easy,
    Hard,
}

impl Split {
    pub const ALL: [Split; 2] = [Split::Easy, Split::Hard];

    pub fn name(self) -> &'static str {
        match self {
            Split::Easy => "easy",
            Split::Hard => "hard",
        }
    }

    pub fn from_name(name: &str) -> Option<Split> {
        Split::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Whether a scene with `n` shapes falls in this split's band for `max_shapes`.
    pub fn admits(self, n: usize, max_shapes: usize) -> bool {
        match self {
            Split::Easy => (1..=4).contains(&n),
            Split::Hard => n > 4 && n <= max_shapes,
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub max_shapes: usize,
    pub overlap_thres: f64,
    pub shape_pool: Vec<ShapeKind>,
    pub relation_pool: Vec<RelationKind>,
    pub target_split: Split,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_shapes: 8,
            overlap_thres: 0.05,
            shape_pool: ShapeKind::ALL.to_vec(),
            relation_pool: RelationKind::ALL.to_vec(),
            target_split: Split::Easy,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.max_shapes < 1 {
            return Err(SceneError::InvalidConfig("max_shapes must be at least 1".into()));
        }
        if !(self.overlap_thres > 0.0 && self.overlap_thres <= 1.0) {
            return Err(SceneError::InvalidConfig("overlap_thres must lie in (0, 1]".into()));
        }
        if self.shape_pool.is_empty() || self.relation_pool.is_empty() {
            return Err(SceneError::EmptyPool);
        }
        Ok(())
    }
}

/// Relationship triple: "subject is `kind` object".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub subject_id: u32,
    pub object_id: u32,
    pub kind: RelationKind,
}

/// Structured description of a scene: shapes plus relation triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDescription {
    pub figure_id: String,
    pub shapes: Vec<Shape>,
    pub relations: Vec<Relation>,
    pub noisy: bool,
    pub seed: u64,
    pub config: GenConfig,
}

impl SceneDescription {
    pub fn shape(&self, id: u32) -> Option<&Shape> {
        self.shapes.iter().find(|s| s.id == id)
    }

    /// Whether the unordered pair was built by an overlap-exempt relation.
    pub fn is_exempt_pair(&self, a: u32, b: u32) -> bool {
        self.relations.iter().any(|r| {
            r.kind.is_overlap_exempt()
                && ((r.subject_id == a && r.object_id == b) || (r.subject_id == b && r.object_id == a))
        })
    }

    pub fn count_of(&self, kind: ShapeKind) -> usize {
        self.shapes.iter().filter(|s| s.kind == kind).count()
    }
}

/// Uniform draw from `pool`.
pub fn sample_shape<R: Rng + ?Sized>(pool: &[ShapeKind], rng: &mut R) -> Result<ShapeKind, SceneError> {
    if pool.is_empty() {
        return Err(SceneError::EmptyPool);
    }
    Ok(pool[rng.random_range(0..pool.len())])
}

/// Runs the two-loop synthesis, regenerating with derived seeds until the
/// shape count lands in the target split's band.
pub fn synthesize_description(config: &GenConfig, figure_id: &str) -> Result<SceneDescription, SceneError> {
    config.validate()?;
    for regen in 0..MAX_REGENERATIONS {
        let mut rng = rng_from(derive(config.seed, REGEN_STREAM, regen));
        let (shapes, relations) = synthesize_once(config, &mut rng)?;
        if config.target_split.admits(shapes.len(), config.max_shapes) {
            return Ok(SceneDescription {
                figure_id: figure_id.to_string(),
                shapes,
                relations,
                noisy: false,
                seed: config.seed,
                config: config.clone(),
            });
        }
    }
    Err(SceneError::GenerationExhausted(format!(
        "no {} scene within {MAX_REGENERATIONS} regenerations",
        config.target_split
    )))
}

fn effective_max(config: &GenConfig) -> usize {
    match config.target_split {
        Split::Easy => config.max_shapes.min(4),
        Split::Hard => config.max_shapes,
    }
}

fn synthesize_once<R: Rng + ?Sized>(
    config: &GenConfig,
    rng: &mut R,
) -> Result<(Vec<Shape>, Vec<Relation>), SceneError> {
    let m = effective_max(config);
    let mut shapes: Vec<Shape> = Vec::with_capacity(m);
    let mut relations = Vec::new();
    let mut next_id = 0u32;

    for _ in 0..m / 2 {
        let kind = sample_shape(&config.shape_pool, rng)?;
        let s1 = randomize_attributes(kind, next_id, rng)?;
        if overlap_area(&s1, &shapes) < config.overlap_thres {
            shapes.push(s1);
            next_id += 1;
        }
    }

    let anchors = shapes.clone();
    for s1 in &anchors {
        if shapes.len() >= m {
            break;
        }
        let kind = match sample_relationship(&config.relation_pool, s1, rng) {
            Ok(k) => k,
            Err(SceneError::NoCompatibleRelation(_)) => continue,
            Err(e) => return Err(e),
        };
        let (s2, relation) = match generate_related_shape(kind, s1, next_id, rng) {
            Ok(pair) => pair,
            Err(SceneError::GenerationExhausted(_)) => continue,
            Err(e) => return Err(e),
        };
        let others: Vec<Shape> = if kind.is_overlap_exempt() {
            shapes.iter().filter(|s| s.id != s1.id).cloned().collect()
        } else {
            shapes.clone()
        };
        if overlap_area(&s2, &others) < config.overlap_thres {
            shapes.push(s2);
            relations.push(relation);
            next_id += 1;
        }
    }
    Ok((shapes, relations))
}
