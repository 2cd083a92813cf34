//! Synthetic geometric-perception benchmark engine.
//!
//! Scenes of 2D shapes with enforced relationships are synthesized from a
//! seed, rendered to images (optionally degraded with noise), and turned into
//! four-choice questions whose answers are derived from the geometry.

pub mod bench;
pub mod geometry;
pub mod pipeline;
pub mod qa;
pub mod render;
pub mod scene;
pub mod seed;
