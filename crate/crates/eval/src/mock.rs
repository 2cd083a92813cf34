//! Scripted chat-completions server for tests and dry runs.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

/// What the mock sends back for one request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MockReply {
    Text(String),
    Status(u16),
}

pub type Responder = Arc<dyn Fn(&Value) -> MockReply + Send + Sync>;

#[derive(Clone)]
struct AppState {
    responder: Responder,
    requests: Arc<Mutex<Vec<Value>>>,
}

async fn chat(State(state): State<AppState>, Json(body): Json<Value>) -> Response {
    let reply = (state.responder)(&body);
    state.requests.lock().unwrap().push(body);
    match reply {
        MockReply::Text(text) => Json(json!({
            "object": "chat.completion",
            "choices": [{"index": 0, "message": {"role": "assistant", "content": text}, "finish_reason": "stop"}],
        }))
        .into_response(),
        MockReply::Status(code) => StatusCode::from_u16(code)
            .unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
            .into_response(),
    }
}

/// Prompt text and image URL of a chat-completions request.
pub fn request_parts(body: &Value) -> Option<(String, String)> {
    let content = body.get("messages")?.get(0)?.get("content")?.as_array()?;
    let mut text = None;
    let mut url = None;
    for part in content {
        match part.get("type").and_then(Value::as_str) {
            Some("text") => text = part.get("text").and_then(Value::as_str).map(String::from),
            Some("image_url") => {
                url = part
                    .get("image_url")
                    .and_then(|u| u.get("url"))
                    .and_then(Value::as_str)
                    .map(String::from)
            }
            _ => {}
        }
    }
    Some((text?, url?))
}

/// A running mock bound to an ephemeral localhost port.
pub struct MockServer {
    pub addr: SocketAddr,
    requests: Arc<Mutex<Vec<Value>>>,
    shutdown: Option<oneshot::Sender<()>>,
    handle: JoinHandle<()>,
}

impl MockServer {
    pub async fn start(responder: Responder) -> std::io::Result<MockServer> {
        let requests = Arc::new(Mutex::new(Vec::new()));
        let state = AppState {
            responder,
            requests: requests.clone(),
        };
        let app = Router::new()
            .route("/chat/completions", post(chat))
            .route("/v1/chat/completions", post(chat))
            .layer(axum::extract::DefaultBodyLimit::max(64 * 1024 * 1024))
            .with_state(state);
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
        let addr = listener.local_addr()?;
        let (tx, rx) = oneshot::channel::<()>();
        let handle = tokio::spawn(async move {
            let _ = axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await;
        });
        Ok(MockServer {
            addr,
            requests,
            shutdown: Some(tx),
            handle,
        })
    }

    /// Replies with the same text to every request.
    pub async fn constant(text: &str) -> std::io::Result<MockServer> {
        let text = text.to_string();
        MockServer::start(Arc::new(move |_| MockReply::Text(text.clone()))).await
    }

    pub fn base_url(&self) -> String {
        format!("http://{}/v1", self.addr)
    }

    /// Bodies of every request received so far.
    pub fn requests(&self) -> Vec<Value> {
        self.requests.lock().unwrap().clone()
    }

    pub async fn stop(mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        let _ = (&mut self.handle).await;
    }
}
