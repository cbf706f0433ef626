//! Scenario configuration files: a strict JSON schema (unknown keys
//! rejected, all amounts decimal strings) mapped onto the runtime scenario,
//! plus the content digest recorded in reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::adversary::{self, Injection};
use crate::bridge::{
    BridgeConfig, DestMechanism, Direction, FeeSchedule, FunctionalType, LpReserves,
    SourceMechanism, TokenPair,
};
use crate::chain::{Address, Amount, ChainId, Price, Provenance, Tick, TokenId};
use crate::engine::{ChainSetup, Defenses, GenesisBalance, Scenario, TrafficItem};
use crate::offchain::{
    LightClientBug, LightClientModel, NotarySet, OffchainMechanism, SidechainModel,
};
use crate::surface::{Layer, VectorId};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed scenario config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario config: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfigFile {
    #[serde(default)]
    pub name: Option<String>,
    pub chains: Vec<ChainConfig>,
    pub bridge: BridgeSection,
    #[serde(default)]
    pub prices: BTreeMap<TokenId, Price>,
    #[serde(default)]
    pub honest_traffic: Vec<TrafficConfig>,
    #[serde(default)]
    pub injections: Vec<InjectionConfig>,
    #[serde(default)]
    pub defenses: DefensesConfig,
    #[serde(default)]
    pub vector_catalog: Vec<VectorOverride>,
    pub run: RunSection,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub chain_id: ChainId,
    pub confirmation_delay: u64,
    #[serde(default = "yes")]
    pub consensus_honest: bool,
    #[serde(default)]
    pub genesis: Vec<GenesisEntry>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenesisEntry {
    pub address: Address,
    pub token: TokenId,
    pub amount: Amount,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct BridgeSection {
    pub source_chain_id: ChainId,
    pub dest_chain_id: ChainId,
    pub functional_type: FunctionalType,
    #[serde(default = "default_source_mechanism")]
    pub source_mechanism: SourceMechanism,
    pub offchain: OffchainSection,
    #[serde(default = "default_dest_mechanism")]
    pub dest_mechanism: DestMechanism,
    #[serde(default)]
    pub fees: FeeSchedule,
    #[serde(default)]
    pub reverse_fees: Option<FeeSchedule>,
    #[serde(default = "one")]
    pub d_off: u64,
    #[serde(default)]
    pub challenge_period: u64,
    #[serde(default)]
    pub buffer_delay: u64,
    #[serde(default)]
    pub breaker_cap: Option<Amount>,
    #[serde(default = "default_c1")]
    pub source_bridge_address: Address,
    #[serde(default = "default_c2")]
    pub dest_bridge_address: Address,
    pub token_pairs: Vec<TokenPair>,
    #[serde(default)]
    pub lp_reserves: Option<LpReserves>,
    #[serde(default)]
    pub price_conversion: bool,
    #[serde(default = "yes")]
    pub replay_tracking: bool,
    #[serde(default = "one_u32")]
    pub source_contract_count: u32,
    #[serde(default = "one_u32")]
    pub dest_contract_count: u32,
}

fn default_source_mechanism() -> SourceMechanism {
    SourceMechanism::SmartContract
}
fn default_dest_mechanism() -> DestMechanism {
    DestMechanism::SmartContract
}
fn one() -> u64 {
    1
}
fn one_u32() -> u32 {
    1
}
fn default_c1() -> Address {
    "c1".into()
}
fn default_c2() -> Address {
    "c2".into()
}

/// Off-chain mechanism in config form: notary committees are given by size
/// and threshold rather than explicit key lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "snake_case")]
pub enum OffchainSection {
    Notary {
        n: usize,
        quorum: usize,
        #[serde(default = "one")]
        per_notary_cost: u64,
    },
    LightClient {
        t_proof: u64,
        #[serde(default)]
        bug_flags: Vec<LightClientBug>,
    },
    Sidechain {
        #[serde(default = "yes")]
        consensus_honest: bool,
        relay_delay: u64,
        #[serde(default)]
        native: bool,
    },
    HybridAnd {
        first: Box<OffchainSection>,
        second: Box<OffchainSection>,
    },
    HybridOr {
        first: Box<OffchainSection>,
        second: Box<OffchainSection>,
    },
}

impl OffchainSection {
    pub fn to_mechanism(&self) -> OffchainMechanism {
        match self {
            OffchainSection::Notary {
                n,
                quorum,
                per_notary_cost,
            } => {
                let mut set = NotarySet::new(*n, *quorum);
                set.per_notary_cost = *per_notary_cost;
                OffchainMechanism::Notary(set)
            }
            OffchainSection::LightClient { t_proof, bug_flags } => {
                OffchainMechanism::LightClient(LightClientModel {
                    t_proof: *t_proof,
                    bug_flags: bug_flags.iter().copied().collect(),
                })
            }
            OffchainSection::Sidechain {
                consensus_honest,
                relay_delay,
                native,
            } => OffchainMechanism::Sidechain(SidechainModel {
                consensus_honest: *consensus_honest,
                relay_delay: *relay_delay,
                native: *native,
            }),
            OffchainSection::HybridAnd { first, second } => {
                OffchainMechanism::hybrid_and(first.to_mechanism(), second.to_mechanism())
            }
            OffchainSection::HybridOr { first, second } => {
                OffchainMechanism::hybrid_or(first.to_mechanism(), second.to_mechanism())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct TrafficConfig {
    pub at: u64,
    #[serde(default = "forward")]
    pub direction: String,
    pub from: Address,
    pub to: Address,
    pub value: Amount,
    #[serde(default)]
    pub pair: usize,
}

fn forward() -> String {
    "forward".into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectionConfig {
    pub vector: String,
    pub at: u64,
    #[serde(default)]
    pub provenance: Option<String>,
    #[serde(default)]
    pub target_layer: Option<String>,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefensesConfig {
    #[serde(default)]
    pub breaker_cap: Option<Amount>,
    #[serde(default)]
    pub breaker_on_monitor_trip: bool,
    #[serde(default)]
    pub buffer_delay: u64,
    #[serde(default)]
    pub challenge_period: u64,
    #[serde(default = "full_ppm")]
    pub honest_watcher_ppm: u32,
}

fn full_ppm() -> u32 {
    1_000_000
}

impl Default for DefensesConfig {
    fn default() -> Self {
        DefensesConfig {
            breaker_cap: None,
            breaker_on_monitor_trip: false,
            buffer_delay: 0,
            challenge_period: 0,
            honest_watcher_ppm: full_ppm(),
        }
    }
}

/// Patch for one catalog entry; unspecified fields keep the shipped values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorOverride {
    pub id: String,
    #[serde(default)]
    pub impact: Option<u64>,
    #[serde(default)]
    pub effort: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub horizon: u64,
}

impl ScenarioConfigFile {
    pub fn parse(json: &str) -> Result<ScenarioConfigFile, ConfigError> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn emit(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("config serializes");
        out.push('\n');
        out
    }

    pub fn to_scenario(&self, fallback_name: &str) -> Result<Scenario, ConfigError> {
        let bridge = BridgeConfig {
            source_chain_id: self.bridge.source_chain_id.clone(),
            dest_chain_id: self.bridge.dest_chain_id.clone(),
            functional_type: self.bridge.functional_type,
            source_mechanism: self.bridge.source_mechanism,
            offchain: self.bridge.offchain.to_mechanism(),
            dest_mechanism: self.bridge.dest_mechanism,
            fees: self.bridge.fees.clone(),
            reverse_fees: self.bridge.reverse_fees.clone(),
            d_off: self.bridge.d_off,
            challenge_period: self.bridge.challenge_period,
            buffer_delay: self.bridge.buffer_delay,
            breaker_cap: self.bridge.breaker_cap,
            source_bridge_address: self.bridge.source_bridge_address.clone(),
            dest_bridge_address: self.bridge.dest_bridge_address.clone(),
            token_pairs: self.bridge.token_pairs.clone(),
            lp_reserves: self.bridge.lp_reserves,
            price_conversion: self.bridge.price_conversion,
            replay_tracking: self.bridge.replay_tracking,
            source_contract_count: self.bridge.source_contract_count,
            dest_contract_count: self.bridge.dest_contract_count,
        };

        let chains = self
            .chains
            .iter()
            .map(|c| ChainSetup {
                chain_id: c.chain_id.clone(),
                confirmation_delay: c.confirmation_delay,
                consensus_honest: c.consensus_honest,
                genesis: c
                    .genesis
                    .iter()
                    .map(|g| GenesisBalance {
                        address: g.address.clone(),
                        token: g.token.clone(),
                        amount: g.amount,
                    })
                    .collect(),
            })
            .collect();

        let honest_traffic = self
            .honest_traffic
            .iter()
            .map(|t| {
                let direction = match t.direction.as_str() {
                    "forward" => Direction::Forward,
                    "reverse" => Direction::Reverse,
                    other => {
                        return Err(ConfigError::Invalid(format!(
                            "traffic direction must be forward or reverse, got {other:?}"
                        )))
                    }
                };
                Ok(TrafficItem {
                    at: Tick(t.at),
                    direction,
                    from: t.from.clone(),
                    to: t.to.clone(),
                    value: t.value,
                    pair_index: t.pair,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let injections = self
            .injections
            .iter()
            .map(|i| {
                let vector: VectorId = i.vector.parse().map_err(ConfigError::Invalid)?;
                let action = adversary::parse_action(vector, &i.params)
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                let provenance = match i.provenance.as_deref() {
                    None => adversary::default_provenance(vector),
                    Some("adversarial") => Provenance::Adversarial,
                    Some("faulty") => Provenance::Faulty,
                    Some("honest") => Provenance::Honest,
                    Some(other) => {
                        return Err(ConfigError::Invalid(format!(
                            "unknown provenance {other:?}"
                        )))
                    }
                };
                let target_layer = match i.target_layer.as_deref() {
                    None => adversary::default_layer(vector),
                    Some(s) => s
                        .parse::<Layer>()
                        .map_err(|e| ConfigError::Invalid(e.to_string()))?,
                };
                Ok(Injection {
                    vector,
                    at: Tick(i.at),
                    provenance,
                    target_layer,
                    action,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let vector_catalog = if self.vector_catalog.is_empty() {
            None
        } else {
            let mut catalog = crate::surface::shipped_catalog();
            for patch in &self.vector_catalog {
                let id: VectorId = patch.id.parse().map_err(ConfigError::Invalid)?;
                let entry = catalog
                    .iter_mut()
                    .find(|v| v.id == id)
                    .expect("catalog covers V1..V23");
                if let Some(i) = patch.impact {
                    entry.impact = i as u128;
                }
                if let Some(e) = patch.effort {
                    if e == 0 {
                        return Err(ConfigError::Invalid(format!("{id}: zero effort")));
                    }
                    entry.effort = e as u128;
                }
            }
            Some(catalog)
        };

        Ok(Scenario {
            name: self
                .name
                .clone()
                .unwrap_or_else(|| fallback_name.to_string()),
            chains,
            bridge,
            prices: self.prices.clone(),
            honest_traffic,
            injections,
            defenses: Defenses {
                breaker_cap: self.defenses.breaker_cap,
                breaker_on_monitor_trip: self.defenses.breaker_on_monitor_trip,
                buffer_delay: self.defenses.buffer_delay,
                challenge_period: self.defenses.challenge_period,
                honest_watcher_ppm: self.defenses.honest_watcher_ppm,
            },
            vector_catalog,
            seed: self.run.seed,
            horizon: self.run.horizon,
        })
    }
}

/// Content hash of the exact scenario a run executed, recorded in the
/// report so identical claims are checkable.
pub fn scenario_digest(scenario: &Scenario) -> String {
    let canonical = serde_json::to_vec(scenario).expect("scenario serializes");
    let mut hasher = Sha256::new();
    hasher.update(&canonical);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// A ready-to-edit honest example config.
pub fn example_config() -> ScenarioConfigFile {
    ScenarioConfigFile {
        name: Some("example_honest".into()),
        chains: vec![
            ChainConfig {
                chain_id: "b1".into(),
                confirmation_delay: 1,
                consensus_honest: true,
                genesis: vec![GenesisEntry {
                    address: "a1".into(),
                    token: "ETH".into(),
                    amount: Amount(1_000),
                }],
            },
            ChainConfig {
                chain_id: "b2".into(),
                confirmation_delay: 1,
                consensus_honest: true,
                genesis: vec![],
            },
        ],
        bridge: BridgeSection {
            source_chain_id: "b1".into(),
            dest_chain_id: "b2".into(),
            functional_type: FunctionalType::AssetLockMint,
            source_mechanism: SourceMechanism::SmartContract,
            offchain: OffchainSection::Notary {
                n: 5,
                quorum: 3,
                per_notary_cost: 1,
            },
            dest_mechanism: DestMechanism::SmartContract,
            fees: FeeSchedule::zero(),
            reverse_fees: None,
            d_off: 1,
            challenge_period: 0,
            buffer_delay: 0,
            breaker_cap: None,
            source_bridge_address: "c1".into(),
            dest_bridge_address: "c2".into(),
            token_pairs: vec![TokenPair::new("ETH", "wETH")],
            lp_reserves: None,
            price_conversion: false,
            replay_tracking: true,
            source_contract_count: 1,
            dest_contract_count: 1,
        },
        prices: BTreeMap::new(),
        honest_traffic: vec![TrafficConfig {
            at: 10,
            direction: "forward".into(),
            from: "a1".into(),
            to: "a2".into(),
            value: Amount(40),
            pair: 0,
        }],
        injections: vec![],
        defenses: DefensesConfig::default(),
        vector_catalog: vec![],
        run: RunSection {
            seed: 1,
            horizon: 100,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_round_trips_exactly() {
        let config = example_config();
        let emitted = config.emit();
        let parsed = ScenarioConfigFile::parse(&emitted).unwrap();
        assert_eq!(parsed, config);
        assert_eq!(parsed.emit(), emitted);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut doc: serde_json::Value = serde_json::from_str(&example_config().emit()).unwrap();
        doc.as_object_mut()
            .unwrap()
            .insert("surprise".into(), serde_json::json!(1));
        let err = ScenarioConfigFile::parse(&doc.to_string()).unwrap_err();
        assert!(err.to_string().contains("unknown field"));
    }

    #[test]
    fn amounts_reject_floats_and_numbers() {
        let emitted = example_config().emit();
        let corrupted = emitted.replace("\"amount\": \"1000\"", "\"amount\": 1000");
        assert!(ScenarioConfigFile::parse(&corrupted).is_err());
    }

    #[test]
    fn injection_params_validated_at_parse() {
        let mut config = example_config();
        config.injections.push(InjectionConfig {
            vector: "V13".into(),
            at: 50,
            provenance: None,
            target_layer: None,
            params: serde_json::Map::new(),
        });
        let err = config.to_scenario("x").unwrap_err();
        assert!(err.to_string().contains("keys_compromised"));
    }

    #[test]
    fn scenario_digest_is_stable_and_input_sensitive() {
        let sc1 = example_config().to_scenario("a").unwrap();
        let sc2 = example_config().to_scenario("a").unwrap();
        assert_eq!(scenario_digest(&sc1), scenario_digest(&sc2));
        let mut sc3 = sc1.clone();
        sc3.seed = 99;
        assert_ne!(scenario_digest(&sc1), scenario_digest(&sc3));
    }

    #[test]
    fn catalog_overrides_patch_shipped_entries() {
        let mut config = example_config();
        config.vector_catalog.push(VectorOverride {
            id: "V20".into(),
            impact: Some(50),
            effort: Some(10),
        });
        let scenario = config.to_scenario("x").unwrap();
        let catalog = scenario.vector_catalog.unwrap();
        let v20 = catalog.iter().find(|v| v.id == VectorId(20)).unwrap();
        assert_eq!(v20.impact, 50);
        assert_eq!(v20.effort, 10);
        // untouched entries keep shipped values
        let v1 = catalog.iter().find(|v| v.id == VectorId(1)).unwrap();
        assert_eq!(v1.effort, 1);
    }
}
