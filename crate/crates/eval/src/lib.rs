//! Evaluation harness: prompts, an OpenAI-compatible chat client, answer
//! extraction and per-split, per-aspect scoring.

pub mod client;
pub mod corpus;
pub mod mock;
pub mod parse;
pub mod prompt;
pub mod score;

pub use client::{evaluate_manifest, query_model, Client, EndpointConfig, EvalError, Evaluation, RetryPolicy};
pub use parse::parse_answer;
pub use prompt::{build_prompt, record_prompt};
pub use score::{random_baseline, score, CellScore, ResponseRecord, ScoreReport};
