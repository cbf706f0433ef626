//! Deterministic simulator of cross-chain bridge protocols.
//!
//! Models lock-mint/burn-mint/liquidity transfers over two abstract ledgers,
//! runs the three bridge security invariants (peg, causality, consistency) as
//! online monitors, injects documented attack vectors as scenario presets,
//! and scores attack surfaces with the damage/effort calculus.

pub mod adversary;
pub mod bridge;
pub mod chain;
pub mod config;
pub mod engine;
pub mod monitors;
pub mod offchain;
pub mod presets;
pub mod report;
pub mod scenario_gen;
pub mod surface;

pub use bridge::{
    compute_fee, BridgeConfig, BridgeError, Direction, FeeSchedule, FeeTerm, Fees, FunctionalType,
    TokenPair, TransferRecord, TransferStatus,
};
pub use chain::{
    Amount, Blockchain, ChainError, Nonce, Price, Provenance, Tick, Transaction, TxId, TxKind,
};
pub use engine::{run_scenario, Defenses, RunResult, Scenario};
pub use monitors::{Classification, Prior, PriorViolation, SubRule};
pub use surface::{
    damage_effort_ratio, layer_area, shipped_catalog, total_area, AttackVectorSpec, Layer,
    SurfaceReport, VectorId,
};

pub use offchain::{
    attest, trust_set_of, verify_attestation, Attestation, LightClientBug, LightClientModel,
    NotarySet, OffchainMechanism, SidechainModel, TrustClass, TrustSet,
};
