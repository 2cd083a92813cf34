//! End-to-end dataset generation: scenes, images, questions, manifest.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::{image_path, write_jsonl, write_manifest, BenchError, ManifestRecord, MANIFEST_FILE, SCENES_FILE};
use crate::qa::{generate_questions, QaConfig, QaError, Question};
use crate::render::{apply_noise, rasterize_with, NoiseConfig, RasterImage, RenderError, RenderOptions};
use crate::scene::{synthesize_description, GenConfig, SceneDescription, SceneError, Split};
use crate::seed::{derive, rng_from};

/// Attempts per figure before giving up on finding a scene every aspect accepts.
pub const MAX_FIGURE_ATTEMPTS: u64 = 50;

const STREAM_EASY: u64 = 0xEA5E;
const STREAM_HARD: u64 = 0x4A2D;
const STREAM_MIXED: u64 = 0x313D;
const STREAM_COIN: u64 = 0xC011;
const STREAM_RETRY: u64 = 0x2E72;
const STREAM_QA: u64 = 0x0A0A;
const STREAM_NOISE: u64 = 0x0015E;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Qa(#[from] QaError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("figure {figure_id}: no scene produced all questions in {MAX_FIGURE_ATTEMPTS} attempts")]
    FigureExhausted { figure_id: String },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

/// How noise is assigned to figures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NoiseMode {
    /// Easy figures clean, hard figures noisy.
    BySplit,
    /// Each figure is noisy with probability `p`; noisy figures are generated
    /// as hard scenes and clean ones as easy scenes.
    Bernoulli { p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub easy: usize,
    pub hard: usize,
    pub noise_mode: NoiseMode,
    /// Scene template; `seed` and `target_split` are set per figure.
    pub generation: GenConfig,
    pub qa: QaConfig,
    /// Noise magnitudes; `seed` is set per figure.
    pub noise: NoiseConfig,
    pub render: RenderOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            easy: 10,
            hard: 10,
            noise_mode: NoiseMode::BySplit,
            generation: GenConfig::default(),
            qa: QaConfig::default(),
            noise: NoiseConfig::default(),
            render: RenderOptions::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.generation
            .validate()
            .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        self.noise.validate().map_err(PipelineError::InvalidConfig)?;
        if let NoiseMode::Bernoulli { p } = self.noise_mode {
            if !(0.0..=1.0).contains(&p) {
                return Err(PipelineError::InvalidConfig(
                    "noise probability must lie in [0, 1]".into(),
                ));
            }
        }
        if self.hard > 0 && self.generation.max_shapes < 5 && self.noise_mode == NoiseMode::BySplit {
            return Err(PipelineError::InvalidConfig(
                "hard figures need max_shapes of at least 5".into(),
            ));
        }
        if self.render.size < crate::render::MIN_SIZE {
            return Err(PipelineError::InvalidConfig(format!(
                "render size {} is too small",
                self.render.size
            )));
        }
        Ok(())
    }
}

/// Identity and split of one figure before generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FigurePlan {
    pub figure_id: String,
    pub split: Split,
    pub seed: u64,
}

/// Figure ids, splits and sub-seeds. Each figure's seed depends only on the
/// master seed and its own index.
pub fn plan_figures(cfg: &PipelineConfig) -> Vec<FigurePlan> {
    match cfg.noise_mode {
        NoiseMode::BySplit => {
            let easy = (0..cfg.easy).map(|i| FigurePlan {
                figure_id: format!("easy-{i:05}"),
                split: Split::Easy,
                seed: derive(cfg.seed, STREAM_EASY, i as u64),
            });
            let hard = (0..cfg.hard).map(|i| FigurePlan {
                figure_id: format!("hard-{i:05}"),
                split: Split::Hard,
                seed: derive(cfg.seed, STREAM_HARD, i as u64),
            });
            easy.chain(hard).collect()
        }
        NoiseMode::Bernoulli { p } => (0..cfg.easy + cfg.hard)
            .map(|i| {
                let noisy = rng_from(derive(cfg.seed, STREAM_COIN, i as u64)).random_bool(p);
                FigurePlan {
                    figure_id: format!("fig-{i:05}"),
                    split: if noisy { Split::Hard } else { Split::Easy },
                    seed: derive(cfg.seed, STREAM_MIXED, i as u64),
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub desc: SceneDescription,
    pub questions: Vec<Question>,
}

impl Figure {
    pub fn split(&self) -> Split {
        self.questions[0].difficulty
    }
}

/// Synthesizes a scene for the plan and one question per aspect, retrying
/// with derived seeds until every aspect is answerable.
pub fn build_figure(cfg: &PipelineConfig, plan: &FigurePlan) -> Result<Figure, PipelineError> {
    for attempt in 0..MAX_FIGURE_ATTEMPTS {
        let seed = derive(plan.seed, STREAM_RETRY, attempt);
        let gen = GenConfig {
            target_split: plan.split,
            seed,
            ..cfg.generation.clone()
        };
        let mut desc = match synthesize_description(&gen, &plan.figure_id) {
            Ok(d) => d,
            Err(SceneError::GenerationExhausted(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        desc.noisy = plan.split == Split::Hard;
        match generate_questions(&desc, &cfg.qa, derive(seed, STREAM_QA, 0)) {
            Ok(questions) => return Ok(Figure { desc, questions }),
            Err(QaError::UnsplitScene { .. }) => unreachable!("split bands match the difficulty rule"),
            Err(_) => continue,
        }
    }
    Err(PipelineError::FigureExhausted {
        figure_id: plan.figure_id.clone(),
    })
}

/// Noise settings for a figure, seeded from its scene.
pub fn figure_noise(cfg: &NoiseConfig, desc: &SceneDescription) -> NoiseConfig {
    cfg.with_seed(derive(desc.seed, STREAM_NOISE, 0))
}

/// Raster image of a figure, with noise when the scene is noisy or
/// `force_noise` is set. Force-noise does not change the stored labels.
pub fn render_figure(
    desc: &SceneDescription,
    opts: &RenderOptions,
    noise: &NoiseConfig,
    force_noise: bool,
) -> Result<RasterImage, PipelineError> {
    let clean = rasterize_with(desc, opts)?;
    if desc.noisy || force_noise {
        Ok(apply_noise(desc, &clean, &figure_noise(noise, desc)))
    } else {
        Ok(clean)
    }
}

/// Builds every planned figure in parallel, in plan order.
pub fn build_all(cfg: &PipelineConfig) -> Result<Vec<Figure>, PipelineError> {
    cfg.validate()?;
    plan_figures(cfg).par_iter().map(|p| build_figure(cfg, p)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub figures: usize,
    pub questions: usize,
}

/// Writes images, `scenes.jsonl`, `manifest.jsonl`, `config.json` and
/// `run.json` under `out`. Output bytes depend only on the config.
pub fn generate_dataset(cfg: &PipelineConfig, out: &Path) -> Result<RunRecord, PipelineError> {
    let figures = build_all(cfg)?;
    for split in Split::ALL {
        std::fs::create_dir_all(out.join(crate::bench::IMAGES_DIR).join(split.name()))?;
    }
    figures.par_iter().try_for_each(|f| -> Result<(), PipelineError> {
        let img = render_figure(&f.desc, &cfg.render, &cfg.noise, false)?;
        img.write_png(&out.join(image_path(f.split(), &f.desc.figure_id)))?;
        Ok(())
    })?;
    let records: Vec<ManifestRecord> = figures
        .iter()
        .flat_map(|f| f.questions.iter().map(|q| ManifestRecord::from_question(q, &f.desc)))
        .collect();
    let scenes: Vec<&SceneDescription> = figures.iter().map(|f| &f.desc).collect();
    write_manifest(&records, &out.join(MANIFEST_FILE))?;
    write_jsonl(&scenes, &out.join(SCENES_FILE))?;
    std::fs::write(
        out.join("config.json"),
        serde_json::to_string_pretty(cfg).map_err(std::io::Error::from)?,
    )?;
    let run = RunRecord {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        figures: figures.len(),
        questions: records.len(),
    };
    std::fs::write(
        out.join("run.json"),
        serde_json::to_string_pretty(&run).map_err(std::io::Error::from)?,
    )?;
    Ok(run)
}
