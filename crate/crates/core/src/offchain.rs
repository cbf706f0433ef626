//! Off-chain communication and validation mechanisms: notary quorum signing,
//! light-client proof verification, sidechain relays, and the two hybrid
//! compositions, plus trust-set bookkeeping.
//!
//! Cryptography is abstracted: signatures are set membership of key
//! identifiers and proofs are a genuine/fabricated tag checked by a verifier
//! whose soundness can be degraded with bug flags. The documented bridge
//! exploits are verification-logic failures, which is exactly what the bug
//! flags model.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::{BridgeConfig, DestMechanism, Direction, SourceMechanism, TokenPair};
use crate::chain::{Address, Amount, Blockchain, ChainId, Nonce, Tick, TxKind};

pub type KeyId = String;

/// m-of-n notary committee. Compromised keys still count toward the quorum;
/// that is the attack.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotarySet {
    pub keys: BTreeSet<KeyId>,
    pub quorum: usize,
    #[serde(default)]
    pub compromised: BTreeSet<KeyId>,
    #[serde(default = "default_notary_cost")]
    pub per_notary_cost: u64,
}

fn default_notary_cost() -> u64 {
    1
}

impl NotarySet {
    pub fn new(n: usize, quorum: usize) -> NotarySet {
        NotarySet {
            keys: (0..n).map(|i| format!("k{i}")).collect(),
            quorum,
            compromised: BTreeSet::new(),
            per_notary_cost: 1,
        }
    }

    pub fn n(&self) -> usize {
        self.keys.len()
    }

    pub fn validate(&self) -> Result<(), OffchainError> {
        if self.quorum == 0 || self.quorum > self.keys.len() {
            return Err(OffchainError::InvalidQuorum {
                m: self.quorum,
                n: self.keys.len(),
            });
        }
        if !self.compromised.is_subset(&self.keys) {
            return Err(OffchainError::UnknownCompromisedKey);
        }
        Ok(())
    }

    /// Marks the first `count` keys (in sorted order) as compromised and
    /// returns them; deterministic by construction.
    pub fn compromise(&mut self, count: usize) -> BTreeSet<KeyId> {
        let taken: BTreeSet<KeyId> = self.keys.iter().take(count).cloned().collect();
        self.compromised.extend(taken.iter().cloned());
        taken
    }
}

/// Verifier soundness degradations, each mapping one documented incident to
/// the mechanism level: SkipSignatureCheck (Wormhole), ZeroTrustedRoot
/// (Nomad), ProofVerifierBug (BSC Token Hub), NoChainIdBinding (Omni).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LightClientBug {
    SkipSignatureCheck,
    ZeroTrustedRoot,
    NoChainIdBinding,
    ProofVerifierBug,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LightClientModel {
    pub t_proof: u64,
    #[serde(default)]
    pub bug_flags: BTreeSet<LightClientBug>,
}

impl LightClientModel {
    pub fn sound(t_proof: u64) -> LightClientModel {
        LightClientModel {
            t_proof,
            bug_flags: BTreeSet::new(),
        }
    }

    pub fn with_bug(t_proof: u64, bug: LightClientBug) -> LightClientModel {
        let mut bug_flags = BTreeSet::new();
        bug_flags.insert(bug);
        LightClientModel { t_proof, bug_flags }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidechainModel {
    /// Integrity of the relay's consensus rules. False means arbitrary
    /// attestations are accepted downstream.
    pub consensus_honest: bool,
    pub relay_delay: u64,
    /// True when the relay runs inside the bridged chains' own consensus
    /// (IBC/rollup-native verification) rather than on an extra chain. A
    /// native relay adds no external trust entity, so a pure
    /// validator-control bridge built on it classifies as trustless.
    #[serde(default)]
    pub native: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OffchainMechanism {
    Notary(NotarySet),
    LightClient(LightClientModel),
    Sidechain(SidechainModel),
    /// Approves iff both components approve.
    HybridAnd {
        first: Box<OffchainMechanism>,
        second: Box<OffchainMechanism>,
    },
    /// Approves iff either component approves.
    HybridOr {
        first: Box<OffchainMechanism>,
        second: Box<OffchainMechanism>,
    },
}

impl OffchainMechanism {
    pub fn hybrid_and(first: OffchainMechanism, second: OffchainMechanism) -> OffchainMechanism {
        OffchainMechanism::HybridAnd {
            first: Box::new(first),
            second: Box::new(second),
        }
    }

    pub fn hybrid_or(first: OffchainMechanism, second: OffchainMechanism) -> OffchainMechanism {
        OffchainMechanism::HybridOr {
            first: Box::new(first),
            second: Box::new(second),
        }
    }
    /// Signal delay from lock confirmation to attestation issuance. The
    /// notary path takes the shared `d_off`; light clients and sidechains
    /// take their own proof/relay time. Conjunctions wait for the slower
    /// component, disjunctions for the faster.
    pub fn signal_delay(&self, d_off: u64) -> u64 {
        match self {
            OffchainMechanism::Notary(_) => d_off,
            OffchainMechanism::LightClient(lc) => lc.t_proof,
            OffchainMechanism::Sidechain(sc) => sc.relay_delay,
            OffchainMechanism::HybridAnd { first, second } => {
                first.signal_delay(d_off).max(second.signal_delay(d_off))
            }
            OffchainMechanism::HybridOr { first, second } => {
                first.signal_delay(d_off).min(second.signal_delay(d_off))
            }
        }
    }

    /// All notary keys reachable through this mechanism (hybrids included).
    pub fn all_keys(&self) -> BTreeSet<KeyId> {
        match self {
            OffchainMechanism::Notary(n) => n.keys.clone(),
            OffchainMechanism::LightClient(_) | OffchainMechanism::Sidechain(_) => BTreeSet::new(),
            OffchainMechanism::HybridAnd { first, second }
            | OffchainMechanism::HybridOr { first, second } => {
                let mut keys = first.all_keys();
                keys.extend(second.all_keys());
                keys
            }
        }
    }

    /// Marks `count` keys compromised in every notary component.
    pub fn compromise_keys(&mut self, count: usize) -> BTreeSet<KeyId> {
        match self {
            OffchainMechanism::Notary(n) => n.compromise(count),
            OffchainMechanism::LightClient(_) | OffchainMechanism::Sidechain(_) => BTreeSet::new(),
            OffchainMechanism::HybridAnd { first, second }
            | OffchainMechanism::HybridOr { first, second } => {
                let mut keys = first.compromise_keys(count);
                keys.extend(second.compromise_keys(count));
                keys
            }
        }
    }

    pub fn compromised_keys(&self) -> BTreeSet<KeyId> {
        match self {
            OffchainMechanism::Notary(n) => n.compromised.clone(),
            OffchainMechanism::LightClient(_) | OffchainMechanism::Sidechain(_) => BTreeSet::new(),
            OffchainMechanism::HybridAnd { first, second }
            | OffchainMechanism::HybridOr { first, second } => {
                let mut keys = first.compromised_keys();
                keys.extend(second.compromised_keys());
                keys
            }
        }
    }

    pub fn validate(&self) -> Result<(), OffchainError> {
        match self {
            OffchainMechanism::Notary(n) => n.validate(),
            OffchainMechanism::LightClient(_) | OffchainMechanism::Sidechain(_) => Ok(()),
            OffchainMechanism::HybridAnd { first, second }
            | OffchainMechanism::HybridOr { first, second } => {
                first.validate()?;
                second.validate()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProofTag {
    GenuineProof,
    FabricatedProof,
}

/// Signed or proven claim that a specific source-side lock/burn happened,
/// authorizing settlement on the other side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attestation {
    pub transfer_id: Nonce,
    pub claimed_value: Amount,
    pub claimed_recipient: Address,
    pub token_pair: TokenPair,
    pub direction: Direction,
    pub signers: BTreeSet<KeyId>,
    pub proof: ProofTag,
    pub chain_binding: Option<ChainId>,
    pub issued_at: Tick,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OffchainError {
    #[error("transfer {0} not found on source chain")]
    TransferNotFound(Nonce),
    #[error("transfer {0} not yet confirmed")]
    TransferNotConfirmed(Nonce),
    #[error("invalid quorum {m} of {n}")]
    InvalidQuorum { m: usize, n: usize },
    #[error("compromised key not in notary set")]
    UnknownCompromisedKey,
}

/// Issue an honest attestation for a confirmed lock/burn. The initiating-side
/// transaction must exist and be confirmed by `now`; the attestation is
/// stamped `issued_at = now + signal_delay`.
#[allow(clippy::too_many_arguments)]
pub fn attest(
    mechanism: &OffchainMechanism,
    initiating_chain: &Blockchain,
    transfer_id: Nonce,
    claimed_value: Amount,
    claimed_recipient: &str,
    token_pair: &TokenPair,
    direction: Direction,
    target_chain: &str,
    d_off: u64,
    now: Tick,
) -> Result<Attestation, OffchainError> {
    let source_kinds = [TxKind::Lock, TxKind::Burn];
    let tx = source_kinds
        .iter()
        .find_map(|k| initiating_chain.find_by_nonce(transfer_id, *k))
        .ok_or(OffchainError::TransferNotFound(transfer_id))?;
    if !initiating_chain.is_confirmed(tx, now) {
        return Err(OffchainError::TransferNotConfirmed(transfer_id));
    }
    Ok(Attestation {
        transfer_id,
        claimed_value,
        claimed_recipient: claimed_recipient.to_string(),
        token_pair: token_pair.clone(),
        direction,
        signers: mechanism.all_keys(),
        proof: ProofTag::GenuineProof,
        chain_binding: Some(target_chain.to_string()),
        issued_at: Tick(now.0 + mechanism.signal_delay(d_off)),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub accepted: bool,
    pub reason: String,
}

impl Verdict {
    fn accept(reason: impl Into<String>) -> Verdict {
        Verdict {
            accepted: true,
            reason: reason.into(),
        }
    }
    fn reject(reason: impl Into<String>) -> Verdict {
        Verdict {
            accepted: false,
            reason: reason.into(),
        }
    }
}

/// Destination-side acceptance check. Rejection is a value, not an error.
pub fn verify_attestation(
    mechanism: &OffchainMechanism,
    att: &Attestation,
    expected_chain: &str,
) -> Verdict {
    match mechanism {
        OffchainMechanism::Notary(n) => {
            let valid = att.signers.intersection(&n.keys).count();
            if valid >= n.quorum {
                Verdict::accept(format!("quorum met: {valid} of {} valid signers", n.quorum))
            } else {
                Verdict::reject(format!(
                    "quorum not met: {valid} valid signers, need {}",
                    n.quorum
                ))
            }
        }
        OffchainMechanism::LightClient(lc) => {
            if lc.bug_flags.contains(&LightClientBug::ZeroTrustedRoot) {
                // Everything verifies against a zeroed trusted root.
                return Verdict::accept("zero trusted root accepts all messages");
            }
            let proof_ok = att.proof == ProofTag::GenuineProof
                || lc.bug_flags.contains(&LightClientBug::SkipSignatureCheck)
                || lc.bug_flags.contains(&LightClientBug::ProofVerifierBug);
            if !proof_ok {
                return Verdict::reject("fabricated proof rejected");
            }
            let binding_ok = lc.bug_flags.contains(&LightClientBug::NoChainIdBinding)
                || att.chain_binding.as_deref() == Some(expected_chain);
            if !binding_ok {
                return Verdict::reject("chain binding mismatch");
            }
            Verdict::accept("proof verified")
        }
        OffchainMechanism::Sidechain(sc) => {
            if !sc.consensus_honest {
                return Verdict::accept("relay consensus compromised: accepts anything");
            }
            if att.proof != ProofTag::GenuineProof {
                return Verdict::reject("relay rejected fabricated message");
            }
            if att.chain_binding.as_deref() != Some(expected_chain) {
                return Verdict::reject("relay rejected mismatched chain binding");
            }
            Verdict::accept("relayed under honest consensus")
        }
        OffchainMechanism::HybridAnd { first, second } => {
            let va = verify_attestation(first, att, expected_chain);
            let vb = verify_attestation(second, att, expected_chain);
            if va.accepted && vb.accepted {
                Verdict::accept("both components accepted")
            } else {
                Verdict::reject(format!(
                    "conjunction failed: [{}] / [{}]",
                    va.reason, vb.reason
                ))
            }
        }
        OffchainMechanism::HybridOr { first, second } => {
            let va = verify_attestation(first, att, expected_chain);
            if va.accepted {
                return Verdict::accept("first component accepted");
            }
            let vb = verify_attestation(second, att, expected_chain);
            if vb.accepted {
                Verdict::accept("second component accepted")
            } else {
                Verdict::reject(format!(
                    "disjunction failed: [{}] / [{}]",
                    va.reason, vb.reason
                ))
            }
        }
    }
}

/// Entities a bridge user must trust beyond the two chains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TrustEntity {
    SmartContract,
    Notary,
    LightClientVerifier,
    MerkleProof,
    SidechainConsensus,
    Custodian,
    Validator,
}

impl TrustEntity {
    /// Deterministic, publicly auditable algorithm descriptors stay
    /// trust-minimized; human-held keys and custodians do not.
    pub fn auditable(self) -> bool {
        matches!(
            self,
            TrustEntity::SmartContract
                | TrustEntity::LightClientVerifier
                | TrustEntity::MerkleProof
                | TrustEntity::SidechainConsensus
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrustClass {
    Trustless,
    TrustMinimized,
    Trusted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustSet {
    pub src_entities: BTreeSet<TrustEntity>,
    pub off_entities: BTreeSet<TrustEntity>,
    pub dest_entities: BTreeSet<TrustEntity>,
    pub classification: TrustClass,
    pub size: usize,
    pub cost: u64,
}

impl TrustSet {
    pub fn all_entities(&self) -> BTreeSet<TrustEntity> {
        let mut all = self.src_entities.clone();
        all.extend(self.off_entities.iter().copied());
        all.extend(self.dest_entities.iter().copied());
        all
    }
}

fn off_entities(mechanism: &OffchainMechanism, out: &mut BTreeSet<TrustEntity>, cost: &mut u64) {
    match mechanism {
        OffchainMechanism::Notary(n) => {
            out.insert(TrustEntity::Notary);
            *cost += n.per_notary_cost * n.n() as u64;
        }
        OffchainMechanism::LightClient(_) => {
            out.insert(TrustEntity::LightClientVerifier);
            out.insert(TrustEntity::MerkleProof);
            *cost += 2;
        }
        OffchainMechanism::Sidechain(sc) => {
            if !sc.native {
                out.insert(TrustEntity::SidechainConsensus);
                *cost += 1;
            }
        }
        OffchainMechanism::HybridAnd { first, second }
        | OffchainMechanism::HybridOr { first, second } => {
            off_entities(first, out, cost);
            off_entities(second, out, cost);
        }
    }
}

/// Derive the trust set and classification from the configured mechanisms.
pub fn trust_set_of(cfg: &BridgeConfig) -> TrustSet {
    let mut cost: u64 = 0;

    let mut src = BTreeSet::new();
    match cfg.source_mechanism {
        SourceMechanism::SmartContract | SourceMechanism::HybridSrc => {
            src.insert(TrustEntity::SmartContract);
            cost += 1;
        }
        SourceMechanism::ValidatorControl => {}
    }

    let mut off = BTreeSet::new();
    off_entities(&cfg.offchain, &mut off, &mut cost);

    let mut dest = BTreeSet::new();
    match cfg.dest_mechanism {
        DestMechanism::SmartContract | DestMechanism::HybridDest => {
            dest.insert(TrustEntity::SmartContract);
            cost += 1;
        }
        DestMechanism::Custodian => {
            dest.insert(TrustEntity::Custodian);
            cost += 1;
        }
        DestMechanism::ValidatorControl => {}
    }

    let size = src.len() + off.len() + dest.len();
    let classification = if size == 0 {
        TrustClass::Trustless
    } else if src
        .iter()
        .chain(off.iter())
        .chain(dest.iter())
        .all(|e| e.auditable())
    {
        TrustClass::TrustMinimized
    } else {
        TrustClass::Trusted
    };

    TrustSet {
        src_entities: src,
        off_entities: off,
        dest_entities: dest,
        classification,
        size,
        cost,
    }
}
