mod common;

use std::collections::BTreeMap;

use axum::http::StatusCode;
use common::*;
use healthrec_core::recommender::{KbMode, ProfileStore};
use healthrec_core::{SymptomVector, UserProfile};
use healthrec_service::router;
use serde_json::json;

fn descending(v: &serde_json::Value, key: &str) -> bool {
    let p: Vec<f64> = v[key]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["probability"].as_f64().unwrap())
        .collect();
    p.windows(2).all(|w| w[0] >= w[1])
}

#[tokio::test]
async fn health_reports_model_and_is_stable() {
    let app = router(state());
    let (status, v, bytes) = send(&app, get("/api/health")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["model_kind"], "nb");
    assert_eq!(v["class_count"], 6);
    assert_eq!(v["vocab_size"], 20);
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["models"], json!(["knn", "nb"]));
    let (_, _, again) = send(&app, get("/api/health")).await;
    assert_eq!(bytes, again);
}

#[tokio::test]
async fn symptoms_keep_vocabulary_order() {
    let app = router(state());
    let (status, v, bytes) = send(&app, get("/api/symptoms")).await;
    assert_eq!(status, StatusCode::OK);
    let names: Vec<String> = serde_json::from_value(v["symptoms"].clone()).unwrap();
    assert_eq!(names, dataset().vocabulary().names());
    assert_eq!(names.len(), 20);
    assert_eq!(&names[..2], ["itching", "skin_rash"]);
    let (_, _, again) = send(&app, get("/api/symptoms")).await;
    assert_eq!(bytes, again);
}

#[tokio::test]
async fn predict_ranks_descending() {
    let app = router(state());
    let (status, v, _) = send(&app, post("/api/predict", r#"{"symptoms":["itching","skin_rash"]}"#)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["predictions"].as_array().unwrap().len(), 5);
    assert!(descending(&v, "predictions"));
    assert!(v.get("unknown_ignored").is_none());

    let (_, v, _) = send(&app, post("/api/predict", r#"{"symptoms":["itching"],"top_k":50}"#)).await;
    assert_eq!(v["predictions"].as_array().unwrap().len(), 6);
    let total: f64 = v["predictions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["probability"].as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-9);

    let (status, v, _) = send(&app, post("/api/predict", r#"{"symptoms":["itching"],"model":"knn","top_k":2}"#)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["predictions"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn unknown_symptoms_are_422_with_names() {
    let app = router(state());
    let (status, v, _) = send(&app, post("/api/predict", r#"{"symptoms":["notasymptom"]}"#)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error_shape(&v);
    assert_eq!(v["unknown"], json!(["notasymptom"]));
    let (status, v, _) = send(&app, post("/api/recommend", r#"{"symptoms":["itching","bogus"]}"#)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["unknown"], json!(["bogus"]));
}

#[tokio::test]
async fn ignore_mode_reports_dropped_names() {
    let ds = dataset();
    let app = router(state_with(kb(&ds, &[]), KbMode::Strict, None, true));
    let (status, v, _) = send(&app, post("/api/predict", r#"{"symptoms":["itching","notasymptom"]}"#)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["unknown_ignored"], json!(["notasymptom"]));
}

#[tokio::test]
async fn bad_requests_are_400_json() {
    let app = router(state());
    let cases = [
        ("/api/predict", r#"{"symptoms":[]}"#, "empty_symptoms"),
        ("/api/recommend", r#"{"symptoms":[]}"#, "empty_symptoms"),
        ("/api/predict", r#"{"symptoms":["itching""#, "bad_request"),
        ("/api/predict", r#"{"symptoms":"itching"}"#, "bad_request"),
        ("/api/predict", r#"{"symptoms":["itching"],"extra":1}"#, "bad_request"),
        ("/api/predict", r#"{"symptoms":["itching"],"top_k":0}"#, "bad_request"),
        ("/api/predict", r#"{"symptoms":["itching"],"model":"xgboost"}"#, "unknown_model"),
        ("/api/predict", r#"{"symptoms":["itching"],"model":"svm"}"#, "unknown_model"),
    ];
    for (uri, body, code) in cases {
        let (status, v, _) = send(&app, post(uri, body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert_error_shape(&v);
        assert_eq!(v["error"], code, "{body}");
    }
    let req = axum::http::Request::post("/api/predict")
        .body(axum::body::Body::from(r#"{"symptoms":["itching"]}"#))
        .unwrap();
    let (status, v, _) = send(&app, req).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&v);
}

#[tokio::test]
async fn framework_errors_are_json() {
    let app = router(state());
    let (status, v, _) = send(&app, get("/api/predict")).await;
    assert_eq!(status, StatusCode::METHOD_NOT_ALLOWED);
    assert_error_shape(&v);
    let (status, v, _) = send(&app, get("/nope")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&v);
    let big = format!(r#"{{"symptoms":["{}"]}}"#, "a".repeat(70 * 1024));
    let (status, v, _) = send(&app, post("/api/predict", big)).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_error_shape(&v);
}

#[tokio::test]
async fn recommend_joins_kb_in_prediction_order() {
    let app = router(state());
    let body = r#"{"symptoms":["itching","skin_rash"],"top_k":3}"#;
    let (status, v, _) = send(&app, post("/api/recommend", body)).await;
    assert_eq!(status, StatusCode::OK);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    for r in results {
        assert!(r["description"].as_str().unwrap().starts_with("About"));
        for field in ["precautions", "medications", "diets", "workouts"] {
            assert!(!r[field].as_array().unwrap().is_empty(), "{field}");
        }
        assert!(!r["disclaimer"].as_str().unwrap().is_empty());
        assert_eq!(r["kb_missing"], false);
    }
    assert!(descending(&v, "results"));
    let (_, p, _) = send(&app, post("/api/predict", body)).await;
    let predicted: Vec<&serde_json::Value> = p["predictions"].as_array().unwrap().iter().map(|e| &e["disease"]).collect();
    let recommended: Vec<&serde_json::Value> = results.iter().map(|e| &e["disease"]).collect();
    assert_eq!(predicted, recommended);
}

async fn top_disease(app: &axum::Router) -> String {
    let (_, v, _) = send(app, post("/api/predict", r#"{"symptoms":["itching"],"top_k":1}"#)).await;
    v["predictions"][0]["disease"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn kb_miss_by_mode() {
    let ds = dataset();
    let top = top_disease(&router(state())).await;

    let lenient = router(state_with(kb(&ds, &[&top]), KbMode::Lenient, None, false));
    let (status, v, _) = send(&lenient, post("/api/recommend", r#"{"symptoms":["itching"],"top_k":1}"#)).await;
    assert_eq!(status, StatusCode::OK);
    let r = &v["results"][0];
    assert_eq!(r["disease"], top.as_str());
    assert_eq!(r["kb_missing"], true);
    assert_eq!(r["precautions"], json!([]));
    assert!(r["disclaimer"].is_string());

    let strict = router(state_with(kb(&ds, &[&top]), KbMode::Strict, None, false));
    let req = || post("/api/recommend", r#"{"symptoms":["itching"],"top_k":1}"#);
    let (status, v, _) = send(&strict, req()).await;
    assert_eq!(status, StatusCode::INTERNAL_SERVER_ERROR);
    assert_error_shape(&v);
    let id = v["diagnostic_id"].as_str().unwrap().to_string();
    let (_, again, _) = send(&strict, req()).await;
    assert_eq!(again["diagnostic_id"], id.as_str());
}

#[tokio::test]
async fn profile_store_adds_support() {
    let ds = dataset();
    let top = top_disease(&router(state())).await;
    let (x, _) = ds.vocabulary().encode_lenient(&["itching"]);
    let other = SymptomVector::from_active(20, &[19]).unwrap();
    let profiles = vec![
        UserProfile::new("a", x.clone(), Some(top.clone()), BTreeMap::new()).unwrap(),
        UserProfile::new("b", x, Some(top.clone()), BTreeMap::new()).unwrap(),
        UserProfile::new("c", other, Some(top.clone()), BTreeMap::new()).unwrap(),
    ];
    let store = ProfileStore::new(profiles).unwrap();
    let app = router(state_with(kb(&ds, &[]), KbMode::Strict, Some(store), false));
    let (status, v, _) = send(&app, post("/api/recommend", r#"{"symptoms":["itching"],"top_k":2}"#)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["results"][0]["disease"], top.as_str());
    assert_eq!(v["results"][0]["support"], 2);
    assert_eq!(v["results"][1]["support"], 0);
}

#[tokio::test]
async fn cors_headers_when_configured() {
    let app = router(state().with_cors(vec!["http://localhost:5173".into()]));
    let req = axum::http::Request::get("/api/health")
        .header("origin", "http://localhost:5173")
        .body(axum::body::Body::empty())
        .unwrap();
    let resp = tower::ServiceExt::oneshot(app, req).await.unwrap();
    assert_eq!(resp.headers()["access-control-allow-origin"], "http://localhost:5173");
}
