//! Scenario presets replaying documented bridge incidents at the mechanism
//! level: the trust model, the injected vector, and the stolen token
//! quantities match the incident record; everything else is abstract scale.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryError, ForgeAction, ForgedWithdrawal, Injection, InjectionAction};
use crate::bridge::{BridgeConfig, Direction, FunctionalType, TokenPair};
use crate::chain::{Amount, Nonce, Provenance, Tick, TokenId};
use crate::engine::Scenario;
use crate::monitors::{Classification, Prior};
use crate::offchain::{LightClientBug, LightClientModel, NotarySet, OffchainMechanism};
use crate::surface::{Layer, VectorId};

/// What the incident record says the run must reproduce.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedOutcome {
    pub prior: Prior,
    pub classification: Classification,
    pub target_layer: Layer,
    pub losses: BTreeMap<TokenId, Amount>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioPreset {
    pub name: String,
    /// Incident being replayed: protocol, date, technique, recorded loss.
    pub citation: String,
    pub scenario: Scenario,
    pub expected: ExpectedOutcome,
}

pub const PRESET_NAMES: [&str; 9] = [
    "ronin_2022",
    "wormhole_2022",
    "nomad_2022",
    "qubit_2022",
    "bsc_token_hub_2022",
    "harmony_2022",
    "omni_2022",
    "poly_2021",
    "multichain_2023",
];

pub fn preset_names() -> Vec<&'static str> {
    PRESET_NAMES.to_vec()
}

pub fn all_presets() -> Vec<ScenarioPreset> {
    PRESET_NAMES
        .iter()
        .map(|n| build_preset(n).expect("shipped preset"))
        .collect()
}

fn forge_injection(
    vector: u8,
    at: u64,
    keys: usize,
    layer: Layer,
    withdrawals: Vec<(usize, u128, &str, Direction)>,
) -> Injection {
    Injection {
        vector: VectorId(vector),
        at: Tick(at),
        provenance: Provenance::Adversarial,
        target_layer: layer,
        action: InjectionAction::Forge(ForgeAction {
            keys_compromised: keys,
            corrupt_sidechain: false,
            skip_verification: vector == 3,
            withdrawals: withdrawals
                .into_iter()
                .map(
                    |(pair_index, value, recipient, direction)| ForgedWithdrawal {
                        pair_index,
                        value: Amount(value),
                        recipient: recipient.to_string(),
                        direction,
                    },
                )
                .collect(),
        }),
    }
}

fn expect(prior: Prior, layer: Layer, losses: &[(&str, u128)]) -> ExpectedOutcome {
    ExpectedOutcome {
        prior,
        classification: Classification::Attack,
        target_layer: layer,
        losses: losses
            .iter()
            .map(|(t, v)| (t.to_string(), Amount(*v)))
            .collect(),
    }
}

/// Build one of the shipped incident presets by name.
pub fn build_preset(name: &str) -> Result<ScenarioPreset, AdversaryError> {
    match name {
        "ronin_2022" => Ok(ronin_2022()),
        "wormhole_2022" => Ok(wormhole_2022()),
        "nomad_2022" => Ok(nomad_2022()),
        "qubit_2022" => Ok(qubit_2022()),
        "bsc_token_hub_2022" => Ok(bsc_token_hub_2022()),
        "harmony_2022" => Ok(harmony_2022()),
        "omni_2022" => Ok(omni_2022()),
        "poly_2021" => Ok(poly_2021()),
        "multichain_2023" => Ok(multichain_2023()),
        other => Err(AdversaryError::UnknownPreset(other.to_string())),
    }
}

/// Validator key compromise on a 5-of-9 committee; two fraudulent
/// withdrawals drained the lock contract.
fn ronin_2022() -> ScenarioPreset {
    let mut cfg = BridgeConfig::minimal(
        FunctionalType::AssetLockMint,
        OffchainMechanism::Notary(NotarySet::new(9, 5)),
    );
    cfg.source_chain_id = "ethereum".into();
    cfg.dest_chain_id = "ronin".into();
    cfg.token_pairs = vec![
        TokenPair::new("ETH", "wETH"),
        TokenPair::new("USDC", "wUSDC"),
    ];

    let mut sc = Scenario::new("ronin_2022", cfg);
    sc.fund(0, "whale_eth", "ETH", 200_000);
    sc.fund(0, "whale_usdc", "USDC", 26_000_000);
    sc.transfer(10, "whale_eth", "player_eth", 200_000);
    sc.honest_traffic.push(crate::engine::TrafficItem {
        at: Tick(12),
        direction: Direction::Forward,
        from: "whale_usdc".into(),
        to: "player_usdc".into(),
        value: Amount(26_000_000),
        pair_index: 1,
    });
    // one key theft, two forged withdrawals against the source vault
    sc.injections.push(forge_injection(
        13,
        100,
        5,
        Layer::OffChain,
        vec![
            (0, 173_600, "lazarus", Direction::Reverse),
            (1, 25_500_000, "lazarus", Direction::Reverse),
        ],
    ));

    ScenarioPreset {
        name: "ronin_2022".into(),
        citation: "Ronin bridge, 2022-03-23: 5-of-9 validator keys stolen via social \
                   engineering; two forged withdrawals took 173,600 ETH and 25.5M USDC"
            .into(),
        scenario: sc,
        expected: expect(
            Prior::Causality,
            Layer::OffChain,
            &[("ETH", 173_600), ("USDC", 25_500_000)],
        ),
    }
}

/// Signature verification bypass on the destination verifier let a
/// fabricated message mint unbacked wrapped ether.
fn wormhole_2022() -> ScenarioPreset {
    let mut cfg = BridgeConfig::minimal(
        FunctionalType::AssetLockMint,
        OffchainMechanism::LightClient(LightClientModel::with_bug(
            1,
            LightClientBug::SkipSignatureCheck,
        )),
    );
    cfg.source_chain_id = "ethereum".into();
    cfg.dest_chain_id = "solana".into();

    let mut sc = Scenario::new("wormhole_2022", cfg);
    sc.fund(0, "u1", "ETH", 50_000);
    sc.transfer(10, "u1", "u1_sol", 10_000);
    sc.injections.push(forge_injection(
        12,
        100,
        0,
        Layer::DestinationChain,
        vec![(0, 120_000, "exploiter", Direction::Forward)],
    ));

    ScenarioPreset {
        name: "wormhole_2022".into(),
        citation: "Wormhole, 2022-02-02: bypassed signature verification on the \
                   destination program minted 120,000 wrapped ETH with no backing"
            .into(),
        scenario: sc,
        expected: expect(
            Prior::Causality,
            Layer::DestinationChain,
            &[("wETH", 120_000)],
        ),
    }
}

/// A zeroed trusted root accepted every message; copycats replayed the
/// exploit calldata with their own addresses.
fn nomad_2022() -> ScenarioPreset {
    let mut cfg = BridgeConfig::minimal(
        FunctionalType::AssetLockMint,
        OffchainMechanism::LightClient(LightClientModel::with_bug(
            1,
            LightClientBug::ZeroTrustedRoot,
        )),
    );
    cfg.source_chain_id = "ethereum".into();
    cfg.dest_chain_id = "moonbeam".into();

    let mut sc = Scenario::new("nomad_2022", cfg);
    sc.fund(0, "u1", "ETH", 100_000);
    sc.transfer(10, "u1", "u1_moon", 50_000);
    // the original exploiter plus two copycats replaying the message shape
    sc.injections.push(forge_injection(
        10,
        100,
        0,
        Layer::DestinationChain,
        vec![
            (0, 30_000, "exploiter_0", Direction::Forward),
            (0, 30_000, "copycat_1", Direction::Forward),
            (0, 30_000, "copycat_2", Direction::Forward),
        ],
    ));

    ScenarioPreset {
        name: "nomad_2022".into(),
        citation: "Nomad, 2022-08-01: an upgrade left the trusted root zeroed, so any \
                   message verified; dozens of copycats replayed the withdrawal calldata"
            .into(),
        scenario: sc,
        expected: expect(
            Prior::Causality,
            Layer::DestinationChain,
            &[("wETH", 90_000)],
        ),
    }
}

/// Deposit handler skipped the collateral transfer check, so a zero-value
/// deposit claim minted bridged collateral.
fn qubit_2022() -> ScenarioPreset {
    let mut cfg = BridgeConfig::minimal(
        FunctionalType::AssetLockMint,
        OffchainMechanism::Notary(NotarySet::new(3, 2)),
    );
    cfg.source_chain_id = "ethereum".into();
    cfg.dest_chain_id = "bsc".into();
    cfg.token_pairs = vec![TokenPair::new("ETH", "xETH")];

    let mut sc = Scenario::new("qubit_2022", cfg);
    sc.fund(0, "u1", "ETH", 20_000);
    sc.transfer(10, "u1", "u1_bsc", 5_000);
    sc.injections.push(forge_injection(
        3,
        100,
        0,
        Layer::SourceChain,
        vec![(0, 77_000, "exploiter", Direction::Forward)],
    ));

    ScenarioPreset {
        name: "qubit_2022".into(),
        citation: "Qubit Finance, 2022-01-28: the deposit function never verified the \
                   collateral call, so deposits of nothing minted bridged xETH"
            .into(),
        scenario: sc,
        expected: expect(Prior::Causality, Layer::SourceChain, &[("xETH", 77_000)]),
    }
}

/// Forged light-client proof for a past block minted two million native
/// units. The incident record files it as a consistency break.
fn bsc_token_hub_2022() -> ScenarioPreset {
    let mut cfg = BridgeConfig::minimal(
        FunctionalType::AssetLockMint,
        OffchainMechanism::LightClient(LightClientModel::with_bug(
            1,
            LightClientBug::ProofVerifierBug,
        )),
    );
    cfg.source_chain_id = "beacon".into();
    cfg.dest_chain_id = "bsc".into();
    cfg.token_pairs = vec![TokenPair::new("BNB", "BNB")];

    let mut sc = Scenario::new("bsc_token_hub_2022", cfg);
    sc.fund(0, "u1", "BNB", 50_000);
    sc.transfer(10, "u1", "u1_bsc", 5_000);
    sc.injections.push(forge_injection(
        9,
        100,
        0,
        Layer::OffChain,
        vec![(0, 2_000_000, "exploiter", Direction::Forward)],
    ));

    ScenarioPreset {
        name: "bsc_token_hub_2022".into(),
        citation: "BSC Token Hub, 2022-10-06: a flawed IAVL proof verifier accepted a \
                   fabricated proof for a past block and minted 2,000,000 BNB"
            .into(),
        scenario: sc,
        // The incident table files this as a consistency violation even
        // though the mechanics are an unbacked mint; the run reproduces the
        // filed label (the one-to-one rule breaks alongside causality).
        expected: expect(Prior::Consistency, Layer::OffChain, &[("BNB", 2_000_000)]),
    }
}

/// Two of five multisig keys stolen; forged withdrawals minted against the
/// bridge with a bare quorum.
fn harmony_2022() -> ScenarioPreset {
    let mut cfg = BridgeConfig::minimal(
        FunctionalType::AssetLockMint,
        OffchainMechanism::Notary(NotarySet::new(5, 2)),
    );
    cfg.source_chain_id = "ethereum".into();
    cfg.dest_chain_id = "harmony".into();
    cfg.token_pairs = vec![TokenPair::new("ETH", "oneETH")];

    let mut sc = Scenario::new("harmony_2022", cfg);
    sc.fund(0, "u1", "ETH", 120_000);
    sc.transfer(10, "u1", "u1_one", 100_000);
    sc.injections.push(forge_injection(
        12,
        100,
        2,
        Layer::OffChain,
        vec![(0, 85_000, "exploiter", Direction::Forward)],
    ));

    ScenarioPreset {
        name: "harmony_2022".into(),
        citation: "Harmony Horizon, 2022-06-23: 2-of-5 multisig keys compromised; \
                   forged withdrawals minted unbacked bridged assets"
            .into(),
        scenario: sc,
        expected: expect(Prior::Causality, Layer::OffChain, &[("oneETH", 85_000)]),
    }
}

/// Post-fork replay: the same accepted message settled again because
/// nothing bound it to one chain.
fn omni_2022() -> ScenarioPreset {
    let mut cfg = BridgeConfig::minimal(
        FunctionalType::AssetLockMint,
        OffchainMechanism::LightClient(LightClientModel::with_bug(
            1,
            LightClientBug::NoChainIdBinding,
        )),
    );
    cfg.source_chain_id = "ethereum".into();
    cfg.dest_chain_id = "gnosis".into();
    cfg.token_pairs = vec![TokenPair::new("ETH", "WETH")];

    let mut sc = Scenario::new("omni_2022", cfg);
    sc.fund(0, "u1", "ETH", 1_000);
    sc.transfer(10, "u1", "u1_gno", 200);
    // the fork's twin message: same payload, different claimed chain
    sc.injections.push(Injection {
        vector: VectorId(15),
        at: Tick(100),
        provenance: Provenance::Adversarial,
        target_layer: Layer::DestinationChain,
        action: InjectionAction::Replay {
            nonce: Some(Nonce(1)),
            rebind_chain: Some("ethereum-pow".into()),
        },
    });

    ScenarioPreset {
        name: "omni_2022".into(),
        citation: "Omni bridge, 2022-09-18: a transfer replayed across the proof-of-work \
                   fork settled twice; nothing checked the chain id"
            .into(),
        scenario: sc,
        expected: expect(
            Prior::Consistency,
            Layer::DestinationChain,
            &[("WETH", 200)],
        ),
    }
}

/// Keeper takeover: the manager contract re-assigned its keeper to the
/// attacker, who then released locked collateral on the source chain.
fn poly_2021() -> ScenarioPreset {
    let mut cfg = BridgeConfig::minimal(
        FunctionalType::AssetLockMint,
        OffchainMechanism::Notary(NotarySet::new(1, 1)),
    );
    cfg.source_chain_id = "ethereum".into();
    cfg.dest_chain_id = "poly".into();
    cfg.token_pairs = vec![TokenPair::new("ETH", "pETH")];

    let mut sc = Scenario::new("poly_2021", cfg);
    sc.fund(0, "whale", "ETH", 650_000);
    sc.transfer(10, "whale", "whale_poly", 620_000);
    sc.injections.push(forge_injection(
        9,
        100,
        1,
        Layer::SourceChain,
        vec![(0, 610_000, "exploiter", Direction::Reverse)],
    ));

    ScenarioPreset {
        name: "poly_2021".into(),
        citation: "Poly Network, 2021-08-10: an unchecked privileged call re-assigned the \
                   contract keeper; the attacker then drained locked collateral"
            .into(),
        scenario: sc,
        expected: expect(Prior::Causality, Layer::SourceChain, &[("ETH", 610_000)]),
    }
}

/// Every MPC key share sat with one actor; when they went dark the shares
/// authorized withdrawals from the custody pools.
fn multichain_2023() -> ScenarioPreset {
    let mut cfg = BridgeConfig::minimal(
        FunctionalType::AssetLockMint,
        OffchainMechanism::Notary(NotarySet::new(4, 3)),
    );
    cfg.source_chain_id = "ethereum".into();
    cfg.dest_chain_id = "fantom".into();
    cfg.token_pairs = vec![TokenPair::new("USDC", "anyUSDC")];

    let mut sc = Scenario::new("multichain_2023", cfg);
    sc.fund(0, "whale", "USDC", 200_000);
    sc.transfer(10, "whale", "whale_ftm", 150_000);
    sc.injections.push(forge_injection(
        13,
        100,
        4,
        Layer::OffChain,
        vec![(0, 126_000, "exploiter", Direction::Reverse)],
    ));

    ScenarioPreset {
        name: "multichain_2023".into(),
        citation: "Multichain, 2023-07-07: all critical MPC key shares controlled by a \
                   single actor authorized transfers out of the bridge pools"
            .into(),
        scenario: sc,
        expected: expect(Prior::Causality, Layer::OffChain, &[("USDC", 126_000)]),
    }
}

/// The notary presets, for quorum-threshold checks: (name, quorum m).
pub fn notary_presets() -> Vec<(&'static str, usize)> {
    vec![
        ("ronin_2022", 5),
        ("harmony_2022", 2),
        ("poly_2021", 1),
        ("multichain_2023", 3),
    ]
}
