#![allow(dead_code)]

use std::collections::BTreeMap;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use healthrec_core::classifiers::{KnnParams, NbParams};
use healthrec_core::dataset::generate_synthetic;
use healthrec_core::recommender::{KbEntry, KbMode, ProfileStore};
use healthrec_core::{
    KnowledgeBase, LabeledDataset, ModelSpec, SimilarityMetric, SyntheticSpec, TrainedModel, ValidationMode,
};
use healthrec_service::AppState;
use tower::ServiceExt;

pub fn dataset() -> LabeledDataset {
    let spec = SyntheticSpec {
        n_diseases: 6,
        n_symptoms: 20,
        symptoms_per_disease: 3,
        p_present: 0.9,
        p_noise: 0.03,
        samples_per_disease: 30,
        seed: 3,
    };
    generate_synthetic(&spec).unwrap().0
}

pub fn models(ds: &LabeledDataset) -> Vec<TrainedModel> {
    [ModelSpec::Nb(NbParams::default()), ModelSpec::Knn(KnnParams { k: 3 })]
        .iter()
        .map(|s| s.train(ds, ValidationMode::Permissive).unwrap())
        .collect()
}

/// Entries for every class except those in `skip`.
pub fn kb(ds: &LabeledDataset, skip: &[&str]) -> KnowledgeBase {
    let entries: BTreeMap<String, KbEntry> = ds
        .class_names()
        .iter()
        .filter(|c| !skip.contains(&c.as_str()))
        .map(|c| {
            (
                c.clone(),
                KbEntry {
                    description: format!("About {c}."),
                    precautions: vec!["rest".into(), "hydrate".into()],
                    medications: vec!["consult a pharmacist".into()],
                    diets: vec!["balanced meals".into()],
                    workouts: vec!["light walking".into()],
                },
            )
        })
        .collect();
    KnowledgeBase::from_entries(entries)
}

pub fn state_with(kb: KnowledgeBase, mode: KbMode, profiles: Option<ProfileStore>, ignore: bool) -> AppState {
    let ds = dataset();
    AppState::from_parts(models(&ds), None, kb, mode, profiles, SimilarityMetric::Cosine, 5, ignore).unwrap()
}

pub fn state() -> AppState {
    let ds = dataset();
    state_with(kb(&ds, &[]), KbMode::Strict, None, false)
}

pub async fn send(app: &Router, req: Request<Body>) -> (StatusCode, serde_json::Value, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let ct = resp
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec();
    assert!(ct.starts_with("application/json"), "content type {ct:?} for {status}");
    let value = serde_json::from_slice(&bytes).unwrap();
    (status, value, bytes)
}

pub fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

pub fn post(uri: &str, body: impl Into<String>) -> Request<Body> {
    Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.into()))
        .unwrap()
}

pub fn assert_error_shape(v: &serde_json::Value) {
    assert!(v["error"].is_string(), "{v}");
    assert!(v["detail"].is_string(), "{v}");
}
