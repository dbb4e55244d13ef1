//! Canonical fixture files under `models/`. Set `RESPETRI_BLESS=1` to rewrite them.

use std::path::PathBuf;

use respetri_core::dsl::{parse_model, serialize_model, ModelSource};
use respetri_core::governance::{apply_patch, parse_patch};
use respetri_core::models::{
    build_risk_scoring_model, build_srs_symbolic_model, build_traffic_model, traffic_safeguard_patch, FixtureConfig,
};
use respetri_core::net::NetModel;

fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn bless() -> bool {
    std::env::var_os("RESPETRI_BLESS").is_some_and(|v| v == "1")
}

fn check(name: &str, expected: &str) {
    let path = models_dir().join(name);
    if bless() {
        std::fs::create_dir_all(models_dir()).unwrap();
        std::fs::write(&path, expected).unwrap();
        return;
    }
    let actual = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{} is stale; rerun with RESPETRI_BLESS=1", path.display());
}

fn fixtures() -> Vec<(&'static str, NetModel)> {
    let plain = FixtureConfig::new();
    let safe = FixtureConfig::safeguarded();
    vec![
        ("traffic.net", build_traffic_model(&plain)),
        ("traffic_safeguarded.net", build_traffic_model(&safe)),
        ("risk_scoring.net", build_risk_scoring_model(&plain)),
        ("risk_scoring_safeguarded.net", build_risk_scoring_model(&safe)),
        ("srs.net", build_srs_symbolic_model(&plain)),
        ("srs_safeguarded.net", build_srs_symbolic_model(&safe)),
    ]
}

#[test]
fn fixture_files_match_the_builders() {
    for (name, model) in fixtures() {
        check(name, &serialize_model(&model).text);
    }
    check("traffic_safeguard.patch", &traffic_safeguard_patch(&FixtureConfig::new()).to_text());
}

#[test]
fn fixture_files_parse_back() {
    for (name, model) in fixtures() {
        let src = ModelSource::from_path(&models_dir().join(name)).unwrap();
        let parsed = parse_model(&src).unwrap();
        assert!(parsed.structurally_eq(&model), "{name}");
    }
}

#[test]
fn safeguard_patch_file_turns_traffic_into_its_safeguarded_variant() {
    let base = parse_model(&ModelSource::from_path(&models_dir().join("traffic.net")).unwrap()).unwrap();
    let patch = parse_patch(&std::fs::read_to_string(models_dir().join("traffic_safeguard.patch")).unwrap()).unwrap();
    let patched = apply_patch(&base, &patch).unwrap();
    let safeguarded =
        parse_model(&ModelSource::from_path(&models_dir().join("traffic_safeguarded.net")).unwrap()).unwrap();
    assert_eq!(serialize_model(&patched).text, serialize_model(&safeguarded).text);
}
