//! Seeded scenario generators for property suites and the verification
//! subcommand: honest mixed-mode runs and randomized adversarial runs, both
//! fully determined by their seed.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversary::{ForgeAction, ForgedWithdrawal, Injection, InjectionAction};
use crate::bridge::{BridgeConfig, Direction, FeeSchedule, FeeTerm, FunctionalType, LpReserves};
use crate::chain::{Amount, Provenance, Tick};
use crate::engine::{Scenario, TrafficItem};
use crate::offchain::{
    LightClientBug, LightClientModel, NotarySet, OffchainMechanism, SidechainModel,
};
use crate::surface::{Layer, VectorId};

fn pick(rng: &mut ChaCha8Rng, bound: u64) -> u128 {
    (rng.next_u64() % bound) as u128
}

fn mode_for(seed: u64) -> FunctionalType {
    match seed % 3 {
        0 => FunctionalType::AssetLockMint,
        1 => FunctionalType::AssetBurnMint,
        _ => FunctionalType::LiquidityNetwork,
    }
}

fn mechanism_for(seed: u64) -> OffchainMechanism {
    match (seed / 3) % 4 {
        0 => OffchainMechanism::Notary(NotarySet::new(5, 3)),
        1 => OffchainMechanism::LightClient(LightClientModel::sound(2)),
        2 => OffchainMechanism::Sidechain(SidechainModel {
            consensus_honest: true,
            relay_delay: 2,
            native: false,
        }),
        _ => OffchainMechanism::hybrid_and(
            OffchainMechanism::Notary(NotarySet::new(4, 2)),
            OffchainMechanism::LightClient(LightClientModel::sound(3)),
        ),
    }
}

fn fees_for(seed: u64) -> FeeSchedule {
    match (seed / 12) % 3 {
        0 => FeeSchedule::zero(),
        1 => FeeSchedule {
            f1: FeeTerm::fixed(1),
            f2: FeeTerm::fixed(1),
            f_star: FeeTerm::fixed(2),
            min_cap: Amount::ZERO,
            max_cap: Amount(u128::MAX),
        },
        _ => FeeSchedule {
            f1: FeeTerm::default(),
            f2: FeeTerm::rate(5_000), // 0.5%
            f_star: FeeTerm::rate(10_000),
            min_cap: Amount::ZERO,
            max_cap: Amount(u128::MAX),
        },
    }
}

/// Mixed forward/reverse honest traffic over a seed-chosen functional type,
/// mechanism, and fee schedule; no injections. Each forward transfer uses a
/// distinct sender and recipient so conservation identities are checkable
/// per transfer.
pub fn honest_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mode = mode_for(seed);
    let mut cfg = BridgeConfig::minimal(mode, mechanism_for(seed));
    cfg.fees = fees_for(seed);
    if mode.is_liquidity() {
        cfg.lp_reserves = Some(LpReserves {
            source: Amount(1_000_000),
            dest: Amount(1_000_000),
        });
    }

    let mut sc = Scenario::new(&format!("honest_{seed}"), cfg);
    sc.seed = seed;
    sc.horizon = 400;

    let transfers = 2 + (seed % 3) as usize;
    for i in 0..transfers {
        let user = format!("u{i}");
        let recipient = format!("r{i}");
        let returnee = format!("w{i}");
        let value = 200 + pick(&mut rng, 800);
        sc.fund(0, &user, "ETH", 10_000);
        // forward transfers interleave with the previous one's reverse
        let t_fwd = 10 + (i as u64) * 8;
        sc.honest_traffic.push(TrafficItem {
            at: Tick(t_fwd),
            direction: Direction::Forward,
            from: user,
            to: recipient.clone(),
            value: Amount(value),
            pair_index: 0,
        });
        sc.honest_traffic.push(TrafficItem {
            at: Tick(t_fwd + 7),
            direction: Direction::Reverse,
            from: recipient,
            to: returnee,
            value: Amount(value / 2),
            pair_index: 0,
        });
    }
    sc
}

/// Honest base plus one or two seeded injections drawn from the executable
/// set, with the mechanism arranged so the vector has something to exploit.
pub fn random_adversarial_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xadc0_ffee);
    let mut sc = honest_scenario(seed);
    sc.name = format!("adversarial_{seed}");

    let archetype = seed % 8;
    match archetype {
        0 => {
            // quorum theft, unbacked mint
            sc.bridge.offchain = OffchainMechanism::Notary(NotarySet::new(5, 3));
            sc.injections.push(Injection {
                vector: VectorId(13),
                at: Tick(100),
                provenance: Provenance::Adversarial,
                target_layer: Layer::OffChain,
                action: InjectionAction::Forge(ForgeAction {
                    keys_compromised: 3,
                    corrupt_sidechain: false,
                    skip_verification: false,
                    withdrawals: vec![ForgedWithdrawal {
                        pair_index: 0,
                        value: Amount(1_009 + pick(&mut rng, 400)),
                        recipient: "attacker".into(),
                        direction: Direction::Forward,
                    }],
                }),
            });
        }
        1 => {
            // broken proof verification, unbacked mint
            sc.bridge.offchain = OffchainMechanism::LightClient(LightClientModel::with_bug(
                2,
                LightClientBug::ProofVerifierBug,
            ));
            sc.injections.push(Injection {
                vector: VectorId(9),
                at: Tick(100),
                provenance: Provenance::Adversarial,
                target_layer: Layer::OffChain,
                action: InjectionAction::Forge(ForgeAction {
                    keys_compromised: 0,
                    corrupt_sidechain: false,
                    skip_verification: false,
                    withdrawals: vec![ForgedWithdrawal {
                        pair_index: 0,
                        value: Amount(2_003 + pick(&mut rng, 500)),
                        recipient: "attacker".into(),
                        direction: Direction::Forward,
                    }],
                }),
            });
        }
        2 => {
            // custody drain while wrapped value is outstanding
            sc.bridge.functional_type = FunctionalType::AssetLockMint;
            sc.bridge.lp_reserves = None;
            sc.bridge.offchain = OffchainMechanism::Notary(NotarySet::new(5, 3));
            sc.injections.push(Injection {
                vector: VectorId(22),
                at: Tick(60),
                provenance: Provenance::Adversarial,
                target_layer: Layer::SourceChain,
                action: InjectionAction::DrainCustody {
                    pair_index: 0,
                    value: Amount(101 + pick(&mut rng, 97)),
                    recipient: "rug_operator".into(),
                },
            });
        }
        3 => {
            // deep reorg under the feet of a settled transfer
            sc.bridge.functional_type = FunctionalType::AssetLockMint;
            sc.bridge.lp_reserves = None;
            let adversarial = seed.is_multiple_of(2);
            sc.injections.push(Injection {
                vector: VectorId(20),
                at: Tick(30),
                provenance: if adversarial {
                    Provenance::Adversarial
                } else {
                    Provenance::Faulty
                },
                target_layer: Layer::SourceChain,
                action: InjectionAction::Reorg {
                    depth: 1 + (pick(&mut rng, 2) as usize),
                },
            });
        }
        4 => {
            // replay across a missing chain binding
            sc.bridge.offchain = OffchainMechanism::LightClient(LightClientModel::with_bug(
                2,
                LightClientBug::NoChainIdBinding,
            ));
            sc.injections.push(Injection {
                vector: VectorId(15),
                at: Tick(120),
                provenance: Provenance::Adversarial,
                target_layer: Layer::DestinationChain,
                action: InjectionAction::Replay {
                    nonce: None,
                    rebind_chain: Some("fork".into()),
                },
            });
        }
        5 => {
            // denial of service stalls the pipeline past its grace window
            sc.injections.push(Injection {
                vector: VectorId(19),
                at: Tick(11),
                provenance: Provenance::Faulty,
                target_layer: Layer::OffChain,
                action: InjectionAction::DelayEvents {
                    dos_delay: 80 + pick(&mut rng, 40) as u64,
                },
            });
        }
        6 => {
            // equivocating relay
            sc.bridge.offchain = OffchainMechanism::Sidechain(SidechainModel {
                consensus_honest: true,
                relay_delay: 2,
                native: false,
            });
            sc.injections.push(Injection {
                vector: VectorId(18),
                at: Tick(100),
                provenance: Provenance::Adversarial,
                target_layer: Layer::OffChain,
                action: InjectionAction::Forge(ForgeAction {
                    keys_compromised: 0,
                    corrupt_sidechain: true,
                    skip_verification: false,
                    withdrawals: vec![ForgedWithdrawal {
                        pair_index: 0,
                        value: Amount(3_001 + pick(&mut rng, 300)),
                        recipient: "attacker".into(),
                        direction: Direction::Forward,
                    }],
                }),
            });
        }
        _ => {
            // cap removal followed by a key-theft mint the cap would have
            // stopped: honest values stay under the cap, the forgery above it
            sc.bridge.functional_type = FunctionalType::AssetLockMint;
            sc.bridge.lp_reserves = None;
            sc.bridge.offchain = OffchainMechanism::Notary(NotarySet::new(5, 3));
            sc.defenses.breaker_cap = Some(Amount(2_000));
            sc.injections.push(Injection {
                vector: VectorId(21),
                at: Tick(90),
                provenance: Provenance::Adversarial,
                target_layer: Layer::DestinationChain,
                action: InjectionAction::RemoveCaps,
            });
            sc.injections.push(Injection {
                vector: VectorId(13),
                at: Tick(100),
                provenance: Provenance::Adversarial,
                target_layer: Layer::OffChain,
                action: InjectionAction::Forge(ForgeAction {
                    keys_compromised: 3,
                    corrupt_sidechain: false,
                    skip_verification: false,
                    withdrawals: vec![ForgedWithdrawal {
                        pair_index: 0,
                        value: Amount(2_101 + pick(&mut rng, 80)),
                        recipient: "attacker".into(),
                        direction: Direction::Forward,
                    }],
                }),
            });
        }
    }
    sc
}
