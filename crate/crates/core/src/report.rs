//! Structured run reports: canonical JSON with stable key order, decimal
//! string amounts, and re-serialization that is byte-identical for
//! identical inputs.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{Address, Amount, ChainId, Tick, TokenId};
use crate::config::scenario_digest;
use crate::engine::{EvidenceTx, ExecutedInjection, RunResult, Scenario};
use crate::monitors::{Classification, Prior, SubRule};
use crate::surface::SurfaceReport;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("io error writing report: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub prior: Prior,
    pub sub_rule: SubRule,
    pub tick: Tick,
    pub classification: Classification,
    #[serde(default)]
    pub token_pair: Option<String>,
    pub evidence: Vec<String>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustReport {
    pub classification: String,
    pub size: usize,
    pub cost: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReportFile {
    pub scenario: String,
    pub config_digest: String,
    pub seed: u64,
    pub horizon: u64,
    pub violations: Vec<ViolationReport>,
    pub loss: BTreeMap<TokenId, Amount>,
    pub detection_latency: Option<u64>,
    pub halted: bool,
    pub surface: SurfaceReport,
    pub trust: TrustReport,
    pub transfers: Vec<crate::bridge::TransferRecord>,
    pub injections: Vec<ExecutedInjection>,
    pub evidence_transactions: BTreeMap<String, EvidenceTx>,
    pub final_balances: BTreeMap<ChainId, BTreeMap<Address, BTreeMap<TokenId, Amount>>>,
}

pub fn build_report(scenario: &Scenario, result: &RunResult) -> RunReportFile {
    RunReportFile {
        scenario: result.scenario.clone(),
        config_digest: scenario_digest(scenario),
        seed: result.seed,
        horizon: result.horizon,
        violations: result
            .violations
            .iter()
            .map(|v| ViolationReport {
                prior: v.prior,
                sub_rule: v.sub_rule,
                tick: v.detected_at,
                classification: v.classification,
                token_pair: v
                    .token_pair
                    .as_ref()
                    .map(|p| format!("{}/{}", p.source_token, p.dest_token)),
                evidence: v.evidence.iter().map(|e| e.to_string()).collect(),
                detail: v.detail.clone(),
            })
            .collect(),
        loss: result.loss.clone(),
        detection_latency: result.detection_latency,
        halted: result.halted,
        surface: result.surface.clone(),
        trust: TrustReport {
            classification: format!("{:?}", result.surface.trust.classification),
            size: result.surface.trust.size,
            cost: result.surface.trust.cost,
        },
        transfers: result.records.clone(),
        injections: result.executed_injections.clone(),
        evidence_transactions: result.evidence_transactions.clone(),
        final_balances: result.final_balances.clone(),
    }
}

/// Canonical serialization: pretty JSON with a trailing newline. Field
/// order is fixed by the struct, map order by BTreeMap.
pub fn to_canonical_json(report: &RunReportFile) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

pub fn emit_report(report: &RunReportFile, path: &Path) -> Result<(), ReportError> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(to_canonical_json(report).as_bytes())?;
    Ok(())
}
