//! Executable attack-vector injections: typed parameters, per-vector
//! validation, and the default layer attribution used when a scenario does
//! not pin one.
//!
//! Only a subset of the catalog is executable; the rest are code- or
//! UI-level vectors that exist for surface scoring but have no mechanism
//! semantics in the simulator.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::Direction;
use crate::chain::{Address, Amount, ChainId, Nonce, Price, Provenance, Tick, TokenId};
use crate::surface::{Layer, VectorId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("vector {0} is not executable")]
    VectorNotExecutable(VectorId),
    #[error("vector {vector} is missing parameter {field:?}")]
    MissingParams { vector: VectorId, field: String },
    #[error("vector {vector} has invalid parameter {field:?}: {why}")]
    InvalidParam {
        vector: VectorId,
        field: String,
        why: String,
    },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
}

/// One forged settlement claim: the adversary asks the bridge to pay
/// `value` of the pair's settled token to `recipient`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForgedWithdrawal {
    pub pair_index: usize,
    pub value: Amount,
    pub recipient: Address,
    pub direction: Direction,
}

/// Forged-settlement family shared by the verification-layer vectors. The
/// flags select which part of the path the vector abuses: stolen quorum
/// keys, a corrupted relay, or a contract-level bypass of the verifier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForgeAction {
    pub keys_compromised: usize,
    pub corrupt_sidechain: bool,
    pub skip_verification: bool,
    pub withdrawals: Vec<ForgedWithdrawal>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InjectionAction {
    /// V3, V8, V9, V10, V12, V13, V18.
    Forge(ForgeAction),
    /// V11: override the price the bridge observes; true prices stand.
    OverridePrice { token: TokenId, price: Price },
    /// V15: re-submit a previously accepted attestation, optionally re-bound
    /// to another chain id (fork replay).
    Replay {
        nonce: Option<Nonce>,
        rebind_chain: Option<ChainId>,
    },
    /// V17, V19: postpone every scheduled event by the given delay.
    DelayEvents { dos_delay: u64 },
    /// V20: roll the source chain back by `depth` transactions.
    Reorg { depth: usize },
    /// V21: strip the withdrawal cap / circuit breaker.
    RemoveCaps,
    /// V22: custodian release draining bridge custody on the source side.
    DrainCustody {
        pair_index: usize,
        value: Amount,
        recipient: Address,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Injection {
    pub vector: VectorId,
    pub at: Tick,
    pub provenance: Provenance,
    pub target_layer: Layer,
    pub action: InjectionAction,
}

impl Injection {
    pub fn new(vector: VectorId, at: Tick, action: InjectionAction) -> Injection {
        Injection {
            vector,
            at,
            provenance: default_provenance(vector),
            target_layer: default_layer(vector),
            action,
        }
    }
}

/// Denial-of-service and delayed-finality injections default to faults so
/// the resulting stall classifies as a failure; configs may mark them
/// adversarial.
pub fn default_provenance(vector: VectorId) -> Provenance {
    match vector.0 {
        17 | 19 => Provenance::Faulty,
        _ => Provenance::Adversarial,
    }
}

pub fn default_layer(vector: VectorId) -> Layer {
    match vector.0 {
        3 | 20 | 22 => Layer::SourceChain,
        8 | 9 | 12 | 13 | 18 | 19 => Layer::OffChain,
        _ => Layer::DestinationChain,
    }
}

fn get_amount(
    vector: VectorId,
    params: &serde_json::Map<String, serde_json::Value>,
    field: &str,
) -> Result<Amount, AdversaryError> {
    let v = params
        .get(field)
        .ok_or_else(|| AdversaryError::MissingParams {
            vector,
            field: field.to_string(),
        })?;
    let s = v.as_str().ok_or_else(|| AdversaryError::InvalidParam {
        vector,
        field: field.to_string(),
        why: "amounts are decimal strings".to_string(),
    })?;
    s.parse().map_err(|why| AdversaryError::InvalidParam {
        vector,
        field: field.to_string(),
        why,
    })
}

fn get_u64(
    vector: VectorId,
    params: &serde_json::Map<String, serde_json::Value>,
    field: &str,
) -> Result<u64, AdversaryError> {
    params
        .get(field)
        .ok_or_else(|| AdversaryError::MissingParams {
            vector,
            field: field.to_string(),
        })?
        .as_u64()
        .ok_or_else(|| AdversaryError::InvalidParam {
            vector,
            field: field.to_string(),
            why: "expected an unsigned integer".to_string(),
        })
}

fn opt_u64(
    vector: VectorId,
    params: &serde_json::Map<String, serde_json::Value>,
    field: &str,
    default: u64,
) -> Result<u64, AdversaryError> {
    if params.contains_key(field) {
        get_u64(vector, params, field)
    } else {
        Ok(default)
    }
}

fn get_str(
    params: &serde_json::Map<String, serde_json::Value>,
    field: &str,
    default: &str,
) -> String {
    params
        .get(field)
        .and_then(|v| v.as_str())
        .unwrap_or(default)
        .to_string()
}

fn withdrawals_from(
    vector: VectorId,
    params: &serde_json::Map<String, serde_json::Value>,
    default_direction: Direction,
) -> Result<Vec<ForgedWithdrawal>, AdversaryError> {
    let value = get_amount(vector, params, "forged_value")?;
    let recipient = get_str(params, "recipient", "attacker");
    let pair_index = opt_u64(vector, params, "pair", 0)? as usize;
    let direction = match get_str(params, "side", "").as_str() {
        "source" => Direction::Reverse,
        "dest" | "destination" => Direction::Forward,
        "" => default_direction,
        other => {
            return Err(AdversaryError::InvalidParam {
                vector,
                field: "side".to_string(),
                why: format!("expected source or dest, got {other:?}"),
            })
        }
    };
    let copycats = opt_u64(vector, params, "copycats", 1)?.max(1);
    Ok((0..copycats)
        .map(|i| ForgedWithdrawal {
            pair_index,
            value,
            recipient: if copycats == 1 {
                recipient.clone()
            } else {
                format!("{recipient}_{i}")
            },
            direction,
        })
        .collect())
}

/// Validate a raw parameter map against the vector's schema and build the
/// typed action. Incomplete parameter sets fail here, at config parse time.
pub fn parse_action(
    vector: VectorId,
    params: &serde_json::Map<String, serde_json::Value>,
) -> Result<InjectionAction, AdversaryError> {
    if !vector.is_executable() {
        return Err(AdversaryError::VectorNotExecutable(vector));
    }
    match vector.0 {
        3 => Ok(InjectionAction::Forge(ForgeAction {
            keys_compromised: 0,
            corrupt_sidechain: false,
            skip_verification: true,
            withdrawals: withdrawals_from(vector, params, Direction::Forward)?,
        })),
        8 | 10 => Ok(InjectionAction::Forge(ForgeAction {
            keys_compromised: 0,
            corrupt_sidechain: false,
            skip_verification: false,
            withdrawals: withdrawals_from(vector, params, Direction::Forward)?,
        })),
        9 | 12 => Ok(InjectionAction::Forge(ForgeAction {
            keys_compromised: opt_u64(vector, params, "keys_compromised", 0)? as usize,
            corrupt_sidechain: false,
            skip_verification: false,
            withdrawals: withdrawals_from(vector, params, Direction::Forward)?,
        })),
        13 => Ok(InjectionAction::Forge(ForgeAction {
            keys_compromised: get_u64(vector, params, "keys_compromised")? as usize,
            corrupt_sidechain: false,
            skip_verification: false,
            withdrawals: withdrawals_from(vector, params, Direction::Forward)?,
        })),
        18 => Ok(InjectionAction::Forge(ForgeAction {
            keys_compromised: 0,
            corrupt_sidechain: true,
            skip_verification: false,
            withdrawals: withdrawals_from(vector, params, Direction::Forward)?,
        })),
        11 => {
            let token = params
                .get("token")
                .and_then(|v| v.as_str())
                .ok_or_else(|| AdversaryError::MissingParams {
                    vector,
                    field: "token".to_string(),
                })?
                .to_string();
            let num = get_u64(vector, params, "price_num")?;
            let den = opt_u64(vector, params, "price_den", 1)?;
            if den == 0 {
                return Err(AdversaryError::InvalidParam {
                    vector,
                    field: "price_den".to_string(),
                    why: "denominator must be positive".to_string(),
                });
            }
            Ok(InjectionAction::OverridePrice {
                token,
                price: Price { num, den },
            })
        }
        15 => Ok(InjectionAction::Replay {
            nonce: params
                .get("replay_nonce")
                .and_then(|v| v.as_u64())
                .map(Nonce),
            rebind_chain: params
                .get("replay_target_chain")
                .and_then(|v| v.as_str())
                .map(|s| s.to_string()),
        }),
        17 | 19 => Ok(InjectionAction::DelayEvents {
            dos_delay: get_u64(vector, params, "dos_delay")?,
        }),
        20 => Ok(InjectionAction::Reorg {
            depth: get_u64(vector, params, "reorg_depth")? as usize,
        }),
        21 => Ok(InjectionAction::RemoveCaps),
        22 => Ok(InjectionAction::DrainCustody {
            pair_index: opt_u64(vector, params, "pair", 0)? as usize,
            value: get_amount(vector, params, "drain_value")?,
            recipient: get_str(params, "recipient", "attacker"),
        }),
        _ => Err(AdversaryError::VectorNotExecutable(vector)),
    }
}
