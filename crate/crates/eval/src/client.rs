use std::path::Path;
use std::time::{Duration, Instant};

use base64::Engine;
use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use shapebench::bench::ManifestRecord;
use shapebench::render::{RasterImage, DEFAULT_SIZE};
use tokio::sync::Semaphore;

use crate::parse::parse_answer;
use crate::prompt::record_prompt;
use crate::score::ResponseRecord;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("environment variable {0} is not set")]
    AuthMissing(String),
    #[error("endpoint failed after {attempts} attempt(s): {message}")]
    EndpointError { attempts: u32, message: String },
    #[error("response for unknown question id {0}")]
    UnknownQuestionId(String),
    #[error("more than one response for question id {0}")]
    DuplicateResponse(String),
    #[error("invalid endpoint config: {0}")]
    InvalidConfig(String),
    #[error("image {path}: {message}")]
    Image { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    /// Delay before the second attempt; doubles for each further attempt.
    pub backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            backoff_ms: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Base URL up to, not including, `/chat/completions`.
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the bearer token; `None` sends no auth.
    pub api_key_env: Option<String>,
    pub timeout_secs: f64,
    pub max_parallel_requests: usize,
    pub retry: RetryPolicy,
    /// Images are resampled to this square size before sending.
    pub image_size: u32,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: "http://127.0.0.1:8000/v1".into(),
            model: "model".into(),
            api_key_env: Some("SHAPEBENCH_API_KEY".into()),
            timeout_secs: 60.0,
            max_parallel_requests: 8,
            retry: RetryPolicy::default(),
            image_size: DEFAULT_SIZE,
        }
    }
}

impl EndpointConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.max_parallel_requests < 1 {
            return Err(EvalError::InvalidConfig(
                "max_parallel_requests must be at least 1".into(),
            ));
        }
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err(EvalError::InvalidConfig("timeout must be positive".into()));
        }
        if self.retry.max_attempts < 1 {
            return Err(EvalError::InvalidConfig("max_attempts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Chat-completions client bound to one endpoint config.
#[derive(Debug, Clone)]
pub struct Client {
    http: reqwest::Client,
    cfg: EndpointConfig,
    token: Option<String>,
}

enum Failure {
    Transient(String),
    Fatal(String),
}

/// PNG data URL of the image resampled to `size`×`size`.
pub fn image_data_url(image: &RasterImage, size: u32) -> Result<String, EvalError> {
    let png = image.resized(size).to_png_bytes().map_err(|e| EvalError::Image {
        path: "<memory>".into(),
        message: e.to_string(),
    })?;
    Ok(format!(
        "data:image/png;base64,{}",
        base64::engine::general_purpose::STANDARD.encode(png)
    ))
}

/// Request body: one user turn with the prompt and the image, temperature 0.
pub fn request_body(model: &str, prompt: &str, image_url: &str) -> Value {
    json!({
        "model": model,
        "temperature": 0,
        "messages": [{
            "role": "user",
            "content": [
                {"type": "text", "text": prompt},
                {"type": "image_url", "image_url": {"url": image_url}},
            ],
        }],
    })
}

fn reply_text(v: &Value) -> Option<String> {
    let content = v.get("choices")?.get(0)?.get("message")?.get("content")?;
    match content {
        Value::String(s) => Some(s.clone()),
        Value::Array(parts) => Some(
            parts
                .iter()
                .filter_map(|p| p.get("text").and_then(Value::as_str))
                .collect::<Vec<_>>()
                .join(""),
        ),
        _ => None,
    }
}

impl Client {
    /// Resolves the auth token and builds the HTTP client.
    pub fn new(cfg: &EndpointConfig) -> Result<Client, EvalError> {
        cfg.validate()?;
        let token = match &cfg.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| EvalError::AuthMissing(var.clone()))?),
            None => None,
        };
        let http = reqwest::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_secs))
            .build()
            .map_err(|e| EvalError::InvalidConfig(e.to_string()))?;
        Ok(Client {
            http,
            cfg: cfg.clone(),
            token,
        })
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'))
    }

    async fn attempt(&self, body: &Value) -> Result<String, Failure> {
        let mut req = self.http.post(self.url()).json(body);
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        let resp = req.send().await.map_err(|e| Failure::Transient(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(Failure::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(Failure::Fatal(format!("HTTP {status}")));
        }
        let v: Value = resp.json().await.map_err(|e| Failure::Transient(e.to_string()))?;
        reply_text(&v).ok_or_else(|| Failure::Fatal("response has no message content".into()))
    }

    /// Sends one prompt with its image, retrying transient failures.
    pub async fn query(
        &self,
        question_id: &str,
        prompt: &str,
        image: &RasterImage,
    ) -> Result<ResponseRecord, EvalError> {
        self.query_url(question_id, prompt, &image_data_url(image, self.cfg.image_size)?)
            .await
    }

    /// As [`Client::query`] with an already encoded image URL.
    pub async fn query_url(
        &self,
        question_id: &str,
        prompt: &str,
        image_url: &str,
    ) -> Result<ResponseRecord, EvalError> {
        let body = request_body(&self.cfg.model, prompt, image_url);
        let start = Instant::now();
        let mut last = String::new();
        for attempt in 0..self.cfg.retry.max_attempts {
            if attempt > 0 {
                let delay = self.cfg.retry.backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                tokio::time::sleep(Duration::from_millis(delay)).await;
            }
            match self.attempt(&body).await {
                Ok(raw_text) => {
                    return Ok(ResponseRecord {
                        question_id: question_id.to_string(),
                        parsed: parse_answer(&raw_text),
                        raw_text,
                        latency_ms: start.elapsed().as_millis() as u64,
                    })
                }
                Err(Failure::Transient(m)) => last = m,
                Err(Failure::Fatal(m)) => {
                    return Err(EvalError::EndpointError {
                        attempts: attempt + 1,
                        message: m,
                    })
                }
            }
        }
        Err(EvalError::EndpointError {
            attempts: self.cfg.retry.max_attempts,
            message: last,
        })
    }
}

/// One-shot query with a fresh client.
pub async fn query_model(
    cfg: &EndpointConfig,
    question_id: &str,
    prompt: &str,
    image: &RasterImage,
) -> Result<ResponseRecord, EvalError> {
    Client::new(cfg)?.query(question_id, prompt, image).await
}

/// Responses in manifest order, plus the questions whose requests failed.
#[derive(Debug, Clone, Default)]
pub struct Evaluation {
    pub responses: Vec<ResponseRecord>,
    pub failures: Vec<(String, String)>,
}

type Answered = (usize, Result<ResponseRecord, EvalError>);

fn load_data_url(path: &Path, size: u32) -> Result<String, EvalError> {
    let image_err = |message: String| EvalError::Image {
        path: path.display().to_string(),
        message,
    };
    let img = RasterImage::read_png(path).map_err(|e| image_err(e.to_string()))?;
    image_data_url(&img, size).map_err(|e| image_err(e.to_string()))
}

/// Queries every record with at most `max_parallel_requests` in flight.
/// Images are read relative to `root` and encoded once per figure. Failed
/// questions are left out of `responses` and so score as unanswered.
pub async fn evaluate_manifest(
    cfg: &EndpointConfig,
    records: &[ManifestRecord],
    root: &Path,
) -> Result<Evaluation, EvalError> {
    let client = Client::new(cfg)?;
    let permits = Semaphore::new(cfg.max_parallel_requests);
    let mut groups: Vec<(&str, Vec<usize>)> = Vec::new();
    for (i, r) in records.iter().enumerate() {
        match groups.last_mut() {
            Some((path, idx)) if *path == r.image_path => idx.push(i),
            _ => groups.push((&r.image_path, vec![i])),
        }
    }
    let per_group: Vec<Result<Vec<Answered>, EvalError>> = stream::iter(groups)
        .map(|(path, idx)| {
            let (client, permits) = (&client, &permits);
            async move {
                let full = root.join(path);
                let size = cfg.image_size;
                let url = tokio::task::spawn_blocking(move || load_data_url(&full, size))
                    .await
                    .expect("image encoding does not panic")?;
                let url = &url;
                let answers = futures::future::join_all(idx.into_iter().map(|i| async move {
                    let _permit = permits.acquire().await.expect("semaphore is never closed");
                    let r = &records[i];
                    (i, client.query_url(&r.question_id, &record_prompt(r), url).await)
                }))
                .await;
                Ok(answers)
            }
        })
        .buffer_unordered(cfg.max_parallel_requests)
        .collect()
        .await;
    let mut ordered: Vec<Option<Result<ResponseRecord, EvalError>>> = (0..records.len()).map(|_| None).collect();
    for group in per_group {
        for (i, r) in group? {
            ordered[i] = Some(r);
        }
    }
    let mut eval = Evaluation::default();
    for (rec, r) in records.iter().zip(ordered) {
        match r.expect("every record yields a result") {
            Ok(resp) => eval.responses.push(resp),
            Err(e) => eval.failures.push((rec.question_id.clone(), e.to_string())),
        }
    }
    Ok(eval)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn body_has_zero_temperature_and_data_url() {
        let img = RasterImage::white(64, 64);
        let url = image_data_url(&img, 640).unwrap();
        assert!(url.starts_with("data:image/png;base64,"));
        let b = request_body("m", "p", &url);
        assert_eq!(b["temperature"], 0);
        assert_eq!(b["messages"][0]["content"][0]["text"], "p");
    }

    #[test]
    fn reply_text_forms() {
        let v = json!({"choices": [{"message": {"content": "B"}}]});
        assert_eq!(reply_text(&v).as_deref(), Some("B"));
        let v = json!({"choices": [{"message": {"content": [{"type": "text", "text": "C"}]}}]});
        assert_eq!(reply_text(&v).as_deref(), Some("C"));
        assert_eq!(reply_text(&json!({})), None);
    }

    #[test]
    fn missing_env_var_is_auth_error() {
        let cfg = EndpointConfig {
            api_key_env: Some("SHAPEBENCH_TEST_UNSET_VARIABLE".into()),
            ..EndpointConfig::default()
        };
        assert!(matches!(Client::new(&cfg), Err(EvalError::AuthMissing(_))));
    }

    #[test]
    fn invalid_parallelism() {
        let cfg = EndpointConfig {
            max_parallel_requests: 0,
            api_key_env: None,
            ..EndpointConfig::default()
        };
        assert!(matches!(Client::new(&cfg), Err(EvalError::InvalidConfig(_))));
    }
}
