use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use shapebench::bench::{read_manifest, MANIFEST_FILE};
use shapebench::pipeline::{generate_dataset, PipelineConfig};
use shapebench::render::RasterImage;
use shapebench_eval::mock::{request_parts, MockReply, MockServer};
use shapebench_eval::{evaluate_manifest, query_model, score, EndpointConfig, EvalError, RetryPolicy};

fn endpoint(base_url: String) -> EndpointConfig {
    EndpointConfig {
        base_url,
        api_key_env: None,
        retry: RetryPolicy {
            max_attempts: 3,
            backoff_ms: 1,
        },
        ..EndpointConfig::default()
    }
}

#[tokio::test]
async fn echo_b() {
    let mock = MockServer::constant("B").await.unwrap();
    let img = RasterImage::white(100, 100);
    let r = query_model(&endpoint(mock.base_url()), "q1", "prompt", &img)
        .await
        .unwrap();
    assert_eq!(r.raw_text, "B");
    assert_eq!(r.parsed, Some('B'));
    assert_eq!(r.question_id, "q1");
    mock.stop().await;
}

#[tokio::test]
async fn payload_has_zero_temperature_and_resized_image() {
    let mock = MockServer::constant("A").await.unwrap();
    let img = RasterImage::white(100, 100);
    query_model(&endpoint(mock.base_url()), "q", "hello", &img)
        .await
        .unwrap();
    let reqs = mock.requests();
    assert_eq!(reqs.len(), 1);
    assert_eq!(reqs[0]["temperature"], 0);
    let (prompt, url) = request_parts(&reqs[0]).unwrap();
    assert_eq!(prompt, "hello");
    use base64::Engine;
    let png = base64::engine::general_purpose::STANDARD
        .decode(url.trim_start_matches("data:image/png;base64,"))
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.png");
    std::fs::write(&p, png).unwrap();
    let back = RasterImage::read_png(&p).unwrap();
    assert_eq!((back.width, back.height), (640, 640));
    mock.stop().await;
}

#[tokio::test]
async fn server_errors_exhaust_retries() {
    let hits = Arc::new(AtomicUsize::new(0));
    let h = hits.clone();
    let mock = MockServer::start(Arc::new(move |_| {
        h.fetch_add(1, Ordering::SeqCst);
        MockReply::Status(500)
    }))
    .await
    .unwrap();
    let err = query_model(&endpoint(mock.base_url()), "q", "p", &RasterImage::white(64, 64))
        .await
        .unwrap_err();
    assert!(matches!(err, EvalError::EndpointError { attempts: 3, .. }));
    assert_eq!(hits.load(Ordering::SeqCst), 3);
    mock.stop().await;
}

#[tokio::test]
async fn transient_failure_recovers() {
    let hits = Arc::new(AtomicUsize::new(0));
    let h = hits.clone();
    let mock = MockServer::start(Arc::new(move |_| {
        if h.fetch_add(1, Ordering::SeqCst) < 2 {
            MockReply::Status(429)
        } else {
            MockReply::Text("(D)".into())
        }
    }))
    .await
    .unwrap();
    let r = query_model(&endpoint(mock.base_url()), "q", "p", &RasterImage::white(64, 64))
        .await
        .unwrap();
    assert_eq!(r.parsed, Some('D'));
    mock.stop().await;
}

#[tokio::test]
async fn client_error_is_not_retried() {
    let hits = Arc::new(AtomicUsize::new(0));
    let h = hits.clone();
    let mock = MockServer::start(Arc::new(move |_| {
        h.fetch_add(1, Ordering::SeqCst);
        MockReply::Status(400)
    }))
    .await
    .unwrap();
    let err = query_model(&endpoint(mock.base_url()), "q", "p", &RasterImage::white(64, 64))
        .await
        .unwrap_err();
    assert!(matches!(err, EvalError::EndpointError { attempts: 1, .. }));
    assert_eq!(hits.load(Ordering::SeqCst), 1);
    mock.stop().await;
}

#[tokio::test]
async fn unset_auth_variable() {
    let cfg = EndpointConfig {
        api_key_env: Some("SHAPEBENCH_EVAL_TEST_NO_SUCH_KEY".into()),
        ..endpoint("http://127.0.0.1:9".into())
    };
    let err = query_model(&cfg, "q", "p", &RasterImage::white(64, 64))
        .await
        .unwrap_err();
    assert!(matches!(err, EvalError::AuthMissing(v) if v == "SHAPEBENCH_EVAL_TEST_NO_SUCH_KEY"));
}

#[tokio::test]
async fn always_a_matches_hand_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        seed: 3,
        easy: 4,
        hard: 4,
        ..PipelineConfig::default()
    };
    generate_dataset(&cfg, dir.path()).unwrap();
    let manifest = read_manifest(&dir.path().join(MANIFEST_FILE)).unwrap();
    let mock = MockServer::constant("A").await.unwrap();
    let ep = EndpointConfig {
        max_parallel_requests: 4,
        ..endpoint(mock.base_url())
    };
    let eval = evaluate_manifest(&ep, &manifest, dir.path()).await.unwrap();
    assert!(eval.failures.is_empty());
    assert_eq!(mock.requests().len(), manifest.len());
    let ids: Vec<_> = eval.responses.iter().map(|r| r.question_id.clone()).collect();
    let want: Vec<_> = manifest.iter().map(|r| r.question_id.clone()).collect();
    assert_eq!(ids, want);
    let rep = score(&manifest, &eval.responses).unwrap();
    let total_a = manifest.iter().filter(|r| r.answer == "A").count();
    let correct: usize = rep.cells.iter().map(|c| c.correct).sum();
    assert_eq!(correct, total_a);
    mock.stop().await;
}
