//! Python bindings: run presets or config documents, list the incident
//! library, and compute surface reports, all returning the same canonical
//! JSON the CLI emits.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use bridgesim_core::config::ScenarioConfigFile;
use bridgesim_core::engine::{run_scenario, Scenario};
use bridgesim_core::presets::{all_presets, build_preset};
use bridgesim_core::report::{build_report, to_canonical_json};
use bridgesim_core::surface::{shipped_catalog, total_area};

fn apply_overrides(scenario: &mut Scenario, seed: Option<u64>, horizon: Option<u64>) {
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    if let Some(horizon) = horizon {
        scenario.horizon = horizon;
    }
}

fn execute(mut scenario: Scenario, seed: Option<u64>, horizon: Option<u64>) -> PyResult<String> {
    apply_overrides(&mut scenario, seed, horizon);
    let result = run_scenario(&scenario).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(to_canonical_json(&build_report(&scenario, &result)))
}

/// Run a shipped incident preset; returns the run report as a JSON string.
#[pyfunction]
#[pyo3(signature = (name, seed=None, horizon=None))]
fn run_preset(name: &str, seed: Option<u64>, horizon: Option<u64>) -> PyResult<String> {
    let preset = build_preset(name).map_err(|e| PyValueError::new_err(e.to_string()))?;
    execute(preset.scenario, seed, horizon)
}

/// Run a scenario config document (JSON text); returns the run report.
#[pyfunction]
#[pyo3(signature = (config_json, seed=None, horizon=None))]
fn run_config(config_json: &str, seed: Option<u64>, horizon: Option<u64>) -> PyResult<String> {
    let config =
        ScenarioConfigFile::parse(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let scenario = config
        .to_scenario("python")
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    execute(scenario, seed, horizon)
}

/// Names of the shipped incident presets.
#[pyfunction]
fn presets() -> Vec<String> {
    bridgesim_core::presets::preset_names()
        .into_iter()
        .map(String::from)
        .collect()
}

/// (name, description) pairs for the shipped presets.
#[pyfunction]
fn preset_citations() -> Vec<(String, String)> {
    all_presets()
        .into_iter()
        .map(|p| (p.name, p.citation))
        .collect()
}

/// Attack-surface report for a config document, without simulating.
#[pyfunction]
fn surface_report(config_json: &str) -> PyResult<String> {
    let config =
        ScenarioConfigFile::parse(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let scenario = config
        .to_scenario("python")
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let catalog = scenario
        .vector_catalog
        .clone()
        .unwrap_or_else(shipped_catalog);
    let report =
        total_area(&scenario.bridge, &catalog).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let mut json =
        serde_json::to_string_pretty(&report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json.push('\n');
    Ok(json)
}

/// An editable example config document.
#[pyfunction]
fn example_config() -> String {
    bridgesim_core::config::example_config().emit()
}

#[pymodule]
fn bridgesim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(preset_citations, m)?)?;
    m.add_function(wrap_pyfunction!(surface_report, m)?)?;
    m.add_function(wrap_pyfunction!(example_config, m)?)?;
    Ok(())
}
