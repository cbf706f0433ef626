//! Deterministic discrete-event scheduler: honest traffic, mechanism
//! delays, injections, defense windows, monitor evaluation, and metric
//! extraction. A run is fully determined by (scenario, seed, horizon).

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{ForgeAction, Injection, InjectionAction};
use crate::bridge::{
    self, BridgeConfig, Direction, PendingWindow, SettleOutcome, TokenPair, TransferRecord,
    TransferStatus,
};
use crate::chain::{
    Address, Amount, Blockchain, ChainId, Nonce, Price, Provenance, Tick, TokenId, Transaction,
    TxId, TxKind,
};
use crate::monitors::{
    build_views, check_causality, check_consistency, check_peg, classify_violation, PegStatus,
    Prior, PriorViolation, SubRule,
};
use crate::offchain::{attest, verify_attestation, Attestation, OffchainMechanism, ProofTag};
use crate::surface::{self, AttackVectorSpec, Layer, SurfaceReport, VectorId};

/// Mitigation knobs, all off by default except the honest watcher, who is
/// certain to show up unless configured otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Defenses {
    pub breaker_cap: Option<Amount>,
    pub breaker_on_monitor_trip: bool,
    pub buffer_delay: u64,
    pub challenge_period: u64,
    /// Probability, in parts per million, that a watcher reviews a pending
    /// settlement during the challenge window.
    pub honest_watcher_ppm: u32,
}

impl Default for Defenses {
    fn default() -> Defenses {
        Defenses {
            breaker_cap: None,
            breaker_on_monitor_trip: false,
            buffer_delay: 0,
            challenge_period: 0,
            honest_watcher_ppm: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenesisBalance {
    pub address: Address,
    pub token: TokenId,
    pub amount: Amount,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSetup {
    pub chain_id: ChainId,
    pub confirmation_delay: u64,
    pub consensus_honest: bool,
    pub genesis: Vec<GenesisBalance>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficItem {
    pub at: Tick,
    pub direction: Direction,
    pub from: Address,
    pub to: Address,
    pub value: Amount,
    pub pair_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub chains: Vec<ChainSetup>,
    pub bridge: BridgeConfig,
    /// True prices per token; the bridge may observe overridden ones.
    pub prices: BTreeMap<TokenId, Price>,
    pub honest_traffic: Vec<TrafficItem>,
    pub injections: Vec<Injection>,
    pub defenses: Defenses,
    pub vector_catalog: Option<Vec<AttackVectorSpec>>,
    pub seed: u64,
    pub horizon: u64,
}

impl Scenario {
    /// Minimal two-chain scenario around a bridge config; callers fill in
    /// traffic and injections.
    pub fn new(name: &str, bridge: BridgeConfig) -> Scenario {
        Scenario {
            name: name.to_string(),
            chains: vec![
                ChainSetup {
                    chain_id: bridge.source_chain_id.clone(),
                    confirmation_delay: 1,
                    consensus_honest: true,
                    genesis: Vec::new(),
                },
                ChainSetup {
                    chain_id: bridge.dest_chain_id.clone(),
                    confirmation_delay: 1,
                    consensus_honest: true,
                    genesis: Vec::new(),
                },
            ],
            bridge,
            prices: BTreeMap::new(),
            honest_traffic: Vec::new(),
            injections: Vec::new(),
            defenses: Defenses::default(),
            vector_catalog: None,
            seed: 0,
            horizon: 200,
        }
    }

    pub fn fund(&mut self, chain: usize, address: &str, token: &str, amount: u128) {
        self.chains[chain].genesis.push(GenesisBalance {
            address: address.to_string(),
            token: token.to_string(),
            amount: Amount(amount),
        });
    }

    pub fn transfer(&mut self, at: u64, from: &str, to: &str, value: u128) {
        self.honest_traffic.push(TrafficItem {
            at: Tick(at),
            direction: Direction::Forward,
            from: from.to_string(),
            to: to.to_string(),
            value: Amount(value),
            pair_index: 0,
        });
    }

    pub fn transfer_back(&mut self, at: u64, from: &str, to: &str, value: u128) {
        self.honest_traffic.push(TrafficItem {
            at: Tick(at),
            direction: Direction::Reverse,
            from: from.to_string(),
            to: to.to_string(),
            value: Amount(value),
            pair_index: 0,
        });
    }

    fn validate(&self) -> Result<(), EngineError> {
        if self.horizon == 0 {
            return Err(EngineError::ConfigInvalid(
                "horizon must be positive".into(),
            ));
        }
        if self.chains.len() != 2 {
            return Err(EngineError::ConfigInvalid(
                "exactly two chains (source, destination) required".into(),
            ));
        }
        if self.chains[0].chain_id != self.bridge.source_chain_id
            || self.chains[1].chain_id != self.bridge.dest_chain_id
        {
            return Err(EngineError::ConfigInvalid(
                "chain ids must match the bridge's source/destination".into(),
            ));
        }
        if self.defenses.honest_watcher_ppm > 1_000_000 {
            return Err(EngineError::ConfigInvalid(
                "honest_watcher_ppm above 1e6".into(),
            ));
        }
        for (token, price) in &self.prices {
            if price.den == 0 {
                return Err(EngineError::ConfigInvalid(format!(
                    "price of {token} has a zero denominator"
                )));
            }
        }
        self.bridge
            .validate()
            .map_err(|e| EngineError::ConfigInvalid(e.to_string()))?;
        for item in &self.honest_traffic {
            if item.pair_index >= self.bridge.token_pairs.len() {
                return Err(EngineError::ConfigInvalid(format!(
                    "traffic references token pair {} but only {} configured",
                    item.pair_index,
                    self.bridge.token_pairs.len()
                )));
            }
        }
        for inj in &self.injections {
            if !inj.vector.is_executable() {
                return Err(EngineError::ConfigInvalid(format!(
                    "injection vector {} is catalog-only",
                    inj.vector
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid scenario: {0}")]
    ConfigInvalid(String),
    #[error("internal engine failure: {0}")]
    Internal(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum EventKind {
    SubmitTransfer(usize),
    ConfirmLock(Nonce),
    EmitAttestation(Nonce),
    VerifyAndSettle(Box<SettleJob>),
    BufferExpiry(Nonce),
    ChallengeExpiry(Nonce),
    Injection(usize),
    MonitorSweep,
    HonestWatcherReview(Nonce),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct SettleJob {
    att: Attestation,
    provenance: Provenance,
    /// Contract-level flaw: settle without consulting the off-chain
    /// verifier at all.
    force_accept: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct EventEntry {
    time: Tick,
    seq: u64,
    kind: EventKind,
}

impl Ord for EventEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}
impl PartialOrd for EventEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug)]
struct PendingSettlement {
    nonce: Nonce,
    direction: Direction,
    pair: TokenPair,
    recipient: Address,
    payout: Amount,
    fee_withheld: Amount,
    fraudulent: bool,
    provenance: Provenance,
    tx_ids: Vec<TxId>,
}

/// Resolved copy of a transaction referenced as violation evidence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceTx {
    pub chain: ChainId,
    pub uid: u64,
    pub kind: TxKind,
    pub token: TokenId,
    pub value: Amount,
    pub from: Address,
    pub to: Address,
    pub timestamp: Tick,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutedInjection {
    pub vector: VectorId,
    pub at: Tick,
    pub provenance: Provenance,
    pub target_layer: Layer,
}

/// Everything a run produced, deterministic in (scenario, seed, horizon).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub scenario: String,
    pub seed: u64,
    pub horizon: u64,
    pub violations: Vec<PriorViolation>,
    /// Value drained from bridge custody or minted without backing, minus
    /// what claw-backs recovered, per token.
    pub loss: BTreeMap<TokenId, Amount>,
    /// Ticks between the first injection and the first violation; present
    /// iff the run had at least one of each.
    pub detection_latency: Option<u64>,
    pub halted: bool,
    pub final_balances: BTreeMap<ChainId, BTreeMap<Address, BTreeMap<TokenId, Amount>>>,
    pub surface: SurfaceReport,
    pub records: Vec<TransferRecord>,
    pub executed_injections: Vec<ExecutedInjection>,
    pub first_injection_at: Option<Tick>,
    pub first_violation_at: Option<Tick>,
    /// Violation evidence ids resolved to the transactions they name.
    pub evidence_transactions: BTreeMap<String, EvidenceTx>,
}

impl RunResult {
    pub fn violated_priors(&self) -> BTreeSet<Prior> {
        self.violations.iter().map(|v| v.prior).collect()
    }

    pub fn total_loss(&self) -> Amount {
        Amount(self.loss.values().map(|a| a.0).sum())
    }

    pub fn loss_of(&self, token: &str) -> Amount {
        self.loss.get(token).copied().unwrap_or(Amount::ZERO)
    }
}

/// Per-token improvement of a defended run over its undefended baseline.
pub fn defense_delta(
    baseline: &RunResult,
    defended: &RunResult,
) -> BTreeMap<TokenId, (Amount, Amount)> {
    let mut out = BTreeMap::new();
    let tokens: BTreeSet<&TokenId> = baseline.loss.keys().chain(defended.loss.keys()).collect();
    for token in tokens {
        out.insert(
            token.clone(),
            (baseline.loss_of(token), defended.loss_of(token)),
        );
    }
    out
}

struct Sim {
    cfg: BridgeConfig,
    defenses: Defenses,
    source: Blockchain,
    dest: Blockchain,
    offchain: OffchainMechanism,
    records: BTreeMap<Nonce, TransferRecord>,
    pending: BTreeMap<Nonce, PendingSettlement>,
    queue: BinaryHeap<Reverse<EventEntry>>,
    next_seq: u64,
    next_nonce: u64,
    rng: ChaCha8Rng,
    true_prices: BTreeMap<TokenId, Price>,
    observed_prices: BTreeMap<TokenId, Price>,
    halted: bool,
    violations: Vec<PriorViolation>,
    seen_keys: BTreeSet<(SubRule, Option<TokenPair>, u8)>,
    accepted_attestations: Vec<Attestation>,
    settled_keys: BTreeSet<(Nonce, Option<ChainId>)>,
    executed_injections: Vec<ExecutedInjection>,
    first_injection_at: Option<Tick>,
    first_violation_at: Option<Tick>,
    loss: BTreeMap<TokenId, i128>,
    deficit_onset: Vec<Option<Tick>>,
    adversarial_context: bool,
    grace: u64,
    injections: Vec<Injection>,
    traffic: Vec<TrafficItem>,
    horizon: u64,
}

impl Sim {
    fn schedule(&mut self, time: Tick, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Reverse(EventEntry { time, seq, kind }));
    }

    fn fresh_nonce(&mut self) -> Nonce {
        self.next_nonce += 1;
        Nonce(self.next_nonce)
    }

    fn true_price(&self, token: &str) -> Price {
        self.true_prices.get(token).copied().unwrap_or(Price::one())
    }

    fn add_loss(&mut self, token: &str, amount: Amount) {
        *self.loss.entry(token.to_string()).or_insert(0) += amount.0 as i128;
    }

    fn sub_loss(&mut self, token: &str, amount: Amount) {
        *self.loss.entry(token.to_string()).or_insert(0) -= amount.0 as i128;
    }

    fn target_chain_id(&self, direction: Direction) -> &ChainId {
        match direction {
            Direction::Forward => &self.cfg.dest_chain_id,
            Direction::Reverse => &self.cfg.source_chain_id,
        }
    }

    // ---- event handlers --------------------------------------------------

    fn handle_submit(&mut self, idx: usize, now: Tick) {
        let item = self.traffic[idx].clone();
        if self.halted {
            return;
        }
        let nonce = self.fresh_nonce();
        let pair = self.cfg.token_pairs[item.pair_index].clone();
        let cfg = self.cfg.clone();
        let result = match item.direction {
            Direction::Forward => bridge::initiate_transfer(
                &cfg,
                &mut self.source,
                nonce,
                &item.from,
                &item.to,
                item.value,
                &pair,
                now,
                Provenance::Honest,
                false,
            ),
            Direction::Reverse => {
                let outstanding = self.outstanding_wrapped(&pair);
                bridge::initiate_reverse(
                    &cfg,
                    &mut self.dest,
                    nonce,
                    &item.from,
                    &item.to,
                    item.value,
                    &pair,
                    now,
                    Provenance::Honest,
                    false,
                    outstanding,
                )
            }
        };
        match result {
            Ok(record) => {
                let confirm_delay = match item.direction {
                    Direction::Forward => self.source.confirmation_delay,
                    Direction::Reverse => self.dest.confirmation_delay,
                };
                self.records.insert(nonce, record);
                self.schedule(now.plus(confirm_delay), EventKind::ConfirmLock(nonce));
                self.sweep(now);
            }
            Err(_) => {
                // unfundable or blocked traffic item: dropped, nonce burned
            }
        }
    }

    fn outstanding_wrapped(&self, pair: &TokenPair) -> Amount {
        let views = build_views(&self.cfg, &self.source, &self.dest, &self.records);
        views
            .iter()
            .find(|v| v.pair == *pair)
            .map(|v| Amount(v.minted_gross.max(0) as u128))
            .unwrap_or(Amount::ZERO)
    }

    fn handle_confirm(&mut self, nonce: Nonce, now: Tick) {
        let Some(record) = self.records.get_mut(&nonce) else {
            return;
        };
        if record.status != TransferStatus::Initiated {
            return;
        }
        if record.advance(TransferStatus::LockedOrBurned).is_ok() {
            record.t_locked = Some(now);
            self.schedule(now, EventKind::EmitAttestation(nonce));
        }
    }

    fn handle_emit_attestation(&mut self, nonce: Nonce, now: Tick) {
        let Some(record) = self.records.get(&nonce).cloned() else {
            return;
        };
        if record.status != TransferStatus::LockedOrBurned {
            return;
        }
        let initiating = match record.direction {
            Direction::Forward => &self.source,
            Direction::Reverse => &self.dest,
        };
        let target = self.target_chain_id(record.direction).clone();
        match attest(
            &self.offchain,
            initiating,
            nonce,
            record.v_x,
            &record.recipient,
            &record.token_pair,
            record.direction,
            &target,
            self.cfg.d_off,
            now,
        ) {
            Ok(att) => {
                let at = att.issued_at;
                self.schedule(
                    at,
                    EventKind::VerifyAndSettle(Box::new(SettleJob {
                        att,
                        provenance: Provenance::Honest,
                        force_accept: false,
                    })),
                );
            }
            Err(_) => {
                // unconfirmed or vanished (reorged) initiation: no signal
            }
        }
    }

    fn handle_settle(&mut self, job: SettleJob, now: Tick) {
        let att = &job.att;
        // only the honest pipeline's own settlement drives its record; a
        // replayed or forged attestation that happens to reuse a nonce is a
        // separate on-chain event
        let record_backed = job.provenance == Provenance::Honest
            && self
                .records
                .get(&att.transfer_id)
                .map(|r| r.direction == att.direction)
                .unwrap_or(false);

        if self.halted {
            if record_backed {
                let rec = self.records.get_mut(&att.transfer_id).unwrap();
                let _ = rec.advance(TransferStatus::Halted);
            }
            return;
        }

        // destination-side replay tracking
        let replay_key = (att.transfer_id, att.chain_binding.clone());
        if self.cfg.replay_tracking && self.settled_keys.contains(&replay_key) {
            return;
        }

        let target_chain_id = self.target_chain_id(att.direction).clone();
        if !job.force_accept {
            let verdict = verify_attestation(&self.offchain, att, &target_chain_id);
            if !verdict.accepted {
                return;
            }
        }
        if record_backed {
            let rec = self.records.get_mut(&att.transfer_id).unwrap();
            if rec.status != TransferStatus::LockedOrBurned {
                return; // already settled or terminal
            }
            rec.t_attested = Some(now);
            let _ = rec.advance(TransferStatus::Attested);
        }

        let cfg = self.cfg.clone();
        let observed = self.observed_prices.clone();
        let target = match att.direction {
            Direction::Forward => &mut self.dest,
            Direction::Reverse => &mut self.source,
        };
        let outcome = bridge::settle(
            &cfg,
            &self.offchain,
            att,
            target,
            &observed,
            now,
            job.provenance,
            self.defenses.breaker_cap,
            self.defenses.buffer_delay,
            self.defenses.challenge_period,
            false,
            true, // verdict already checked above
        );

        match outcome {
            Ok(SettleOutcome::Halted) => {
                self.halted = true;
                if record_backed {
                    let rec = self.records.get_mut(&att.transfer_id).unwrap();
                    let _ = rec.advance(TransferStatus::Halted);
                }
            }
            Ok(SettleOutcome::Pending {
                window,
                finalize_at,
                payout,
                fee_withheld,
                tx_ids,
            }) => {
                self.settled_keys.insert(replay_key);
                self.accepted_attestations.push(att.clone());
                let fraudulent = job.provenance == Provenance::Adversarial;
                if fraudulent {
                    let token = att.token_pair.settled_token(att.direction).clone();
                    self.add_loss(&token, payout);
                }
                self.pending.insert(
                    att.transfer_id,
                    PendingSettlement {
                        nonce: att.transfer_id,
                        direction: att.direction,
                        pair: att.token_pair.clone(),
                        recipient: att.claimed_recipient.clone(),
                        payout,
                        fee_withheld,
                        fraudulent,
                        provenance: job.provenance,
                        tx_ids,
                    },
                );
                if record_backed {
                    let rec = self.records.get_mut(&att.transfer_id).unwrap();
                    let status = match window {
                        PendingWindow::Buffer => TransferStatus::BufferPending,
                        PendingWindow::Challenge => TransferStatus::ChallengePending,
                    };
                    let _ = rec.advance(status);
                }
                match window {
                    PendingWindow::Buffer => {
                        self.schedule(finalize_at, EventKind::BufferExpiry(att.transfer_id));
                    }
                    PendingWindow::Challenge => {
                        // watcher first, expiry second, so a same-tick draw
                        // still precedes finalization
                        self.schedule(now.plus(1), EventKind::HonestWatcherReview(att.transfer_id));
                        self.schedule(finalize_at, EventKind::ChallengeExpiry(att.transfer_id));
                    }
                }
                self.sweep(now);
            }
            Ok(SettleOutcome::Finalized { payout, .. }) => {
                self.settled_keys.insert(replay_key);
                self.accepted_attestations.push(att.clone());
                if job.provenance == Provenance::Adversarial {
                    let token = att.token_pair.settled_token(att.direction).clone();
                    self.add_loss(&token, payout);
                }
                if record_backed {
                    let confirm = match att.direction {
                        Direction::Forward => self.dest.confirmation_delay,
                        Direction::Reverse => self.source.confirmation_delay,
                    };
                    let rec = self.records.get_mut(&att.transfer_id).unwrap();
                    let _ = rec.advance(TransferStatus::Completed);
                    rec.t_completed = Some(now.plus(confirm));
                }
                self.sweep(now);
            }
            Err(_) => {
                // liquidity/collateral shortfall or cap logic: nothing lands
            }
        }
    }

    fn revert_pending(&mut self, ps: &PendingSettlement, now: Tick) {
        let cfg = self.cfg.clone();
        let target = match ps.direction {
            Direction::Forward => &mut self.dest,
            Direction::Reverse => &mut self.source,
        };
        let recovered = bridge::claw_back(
            &cfg,
            target,
            ps.direction,
            ps.nonce,
            &ps.pair,
            &ps.recipient,
            ps.payout,
            ps.fee_withheld,
            now,
        )
        .unwrap_or(Amount::ZERO);
        if ps.provenance == Provenance::Adversarial {
            let token = ps.pair.settled_token(ps.direction).clone();
            self.sub_loss(&token, recovered);
        }
        if let Some(rec) = self.records.get_mut(&ps.nonce) {
            let _ = rec.advance(TransferStatus::Reversed);
        }
    }

    fn handle_buffer_expiry(&mut self, nonce: Nonce, now: Tick) {
        let Some(ps) = self.pending.get(&nonce).cloned() else {
            return;
        };
        // re-verify against the monitors before finalizing
        self.sweep(now);
        let implicated = self
            .violations
            .iter()
            .any(|v| v.evidence.iter().any(|e| ps.tx_ids.contains(e)));
        if self.halted || implicated {
            self.pending.remove(&nonce);
            self.revert_pending(&ps, now);
            self.sweep(now);
        } else if self.defenses.challenge_period > 0 {
            // both windows configured: the buffer chains into the
            // challenge period
            if let Some(rec) = self.records.get_mut(&nonce) {
                let _ = rec.advance(TransferStatus::ChallengePending);
            }
            self.schedule(now.plus(1), EventKind::HonestWatcherReview(nonce));
            self.schedule(
                now.plus(self.defenses.challenge_period),
                EventKind::ChallengeExpiry(nonce),
            );
        } else {
            self.pending.remove(&nonce);
            self.finalize_record(nonce, now);
        }
    }

    fn handle_challenge_expiry(&mut self, nonce: Nonce, now: Tick) {
        if self.pending.remove(&nonce).is_none() {
            return; // already reverted by a watcher
        }
        self.finalize_record(nonce, now);
    }

    fn handle_watcher_review(&mut self, nonce: Nonce, now: Tick) {
        let Some(ps) = self.pending.get(&nonce).cloned() else {
            return;
        };
        if !ps.fraudulent {
            return; // honest transfers always survive the window
        }
        let draw = self.rng.next_u32() % 1_000_000;
        if draw < self.defenses.honest_watcher_ppm {
            self.pending.remove(&nonce);
            self.revert_pending(&ps, now);
            self.sweep(now);
        }
    }

    fn finalize_record(&mut self, nonce: Nonce, now: Tick) {
        if let Some(rec) = self.records.get_mut(&nonce) {
            let confirm = match rec.direction {
                Direction::Forward => self.dest.confirmation_delay,
                Direction::Reverse => self.source.confirmation_delay,
            };
            let _ = rec.advance(TransferStatus::Completed);
            rec.t_completed = Some(now.plus(confirm));
        }
    }

    // ---- injections --------------------------------------------------------

    fn handle_injection(&mut self, idx: usize, now: Tick) {
        let inj = self.injections[idx].clone();
        self.executed_injections.push(ExecutedInjection {
            vector: inj.vector,
            at: now,
            provenance: inj.provenance,
            target_layer: inj.target_layer,
        });
        if self.first_injection_at.is_none() {
            self.first_injection_at = Some(now);
        }
        match inj.action.clone() {
            InjectionAction::Forge(forge) => self.inject_forge(&inj, &forge, now),
            InjectionAction::OverridePrice { token, price } => {
                self.observed_prices.insert(token, price);
            }
            InjectionAction::Replay {
                nonce,
                rebind_chain,
            } => {
                let template = match nonce {
                    Some(n) => self
                        .accepted_attestations
                        .iter()
                        .rev()
                        .find(|a| a.transfer_id == n),
                    None => self.accepted_attestations.last(),
                };
                if let Some(att) = template.cloned() {
                    let mut replayed = att;
                    replayed.issued_at = now;
                    if let Some(chain) = rebind_chain {
                        replayed.chain_binding = Some(chain);
                    }
                    self.schedule(
                        now,
                        EventKind::VerifyAndSettle(Box::new(SettleJob {
                            att: replayed,
                            provenance: inj.provenance,
                            force_accept: false,
                        })),
                    );
                }
            }
            InjectionAction::DelayEvents { dos_delay } => {
                if inj.provenance == Provenance::Adversarial {
                    self.adversarial_context = true;
                }
                let entries: Vec<EventEntry> = self.queue.drain().map(|Reverse(e)| e).collect();
                for mut e in entries {
                    if e.time >= now {
                        e.time = e.time.plus(dos_delay); // saturating
                    }
                    self.queue.push(Reverse(e));
                }
            }
            InjectionAction::Reorg { depth } => {
                if inj.provenance == Provenance::Adversarial {
                    self.adversarial_context = true;
                }
                let depth = depth.min(self.source.history().len());
                let _ = self.source.rollback(depth);
                self.sweep(now);
            }
            InjectionAction::RemoveCaps => {
                self.defenses.breaker_cap = None;
                self.cfg.breaker_cap = None;
            }
            InjectionAction::DrainCustody {
                pair_index,
                value,
                recipient,
            } => {
                // a rug needs an operator with unilateral custody control
                let trust = crate::offchain::trust_set_of(&self.cfg);
                if surface::key_bearing_entities(&trust).is_empty() {
                    return;
                }
                let Some(pair) = self.cfg.token_pairs.get(pair_index).cloned() else {
                    return;
                };
                let custody = self.cfg.source_bridge_address.clone();
                let available = self.source.balance_of(&custody, &pair.source_token);
                let drained = value.min(available);
                if drained.is_zero() {
                    return;
                }
                let tx = Transaction::new(
                    TxKind::Release,
                    pair.source_token.clone(),
                    drained,
                    custody,
                    recipient,
                    now,
                )
                .with_provenance(inj.provenance);
                if self.source.append_tx(tx).is_ok() {
                    self.add_loss(&pair.source_token, drained);
                    self.sweep(now);
                }
            }
        }
    }

    fn inject_forge(&mut self, inj: &Injection, forge: &ForgeAction, now: Tick) {
        if forge.keys_compromised > 0 {
            self.offchain.compromise_keys(forge.keys_compromised);
        }
        if forge.corrupt_sidechain && !corrupt_sidechains(&mut self.offchain) {
            return; // no relay to make equivocate
        }
        let signers = self.offchain.compromised_keys();
        for w in &forge.withdrawals {
            if forge.skip_verification {
                // contract-level bypass needs a contract to be buggy
                let has_contract = match w.direction {
                    Direction::Forward => {
                        self.cfg.dest_mechanism != crate::bridge::DestMechanism::ValidatorControl
                    }
                    Direction::Reverse => {
                        self.cfg.source_mechanism
                            != crate::bridge::SourceMechanism::ValidatorControl
                    }
                };
                if !has_contract {
                    continue;
                }
            }
            let Some(pair) = self.cfg.token_pairs.get(w.pair_index).cloned() else {
                continue;
            };
            let nonce = self.fresh_nonce();
            let att = Attestation {
                transfer_id: nonce,
                claimed_value: w.value,
                claimed_recipient: w.recipient.clone(),
                token_pair: pair,
                direction: w.direction,
                signers: signers.clone(),
                proof: ProofTag::FabricatedProof,
                chain_binding: Some(self.target_chain_id(w.direction).clone()),
                issued_at: now,
            };
            self.schedule(
                now,
                EventKind::VerifyAndSettle(Box::new(SettleJob {
                    att,
                    provenance: inj.provenance,
                    force_accept: forge.skip_verification,
                })),
            );
        }
    }

    // ---- monitors ----------------------------------------------------------

    fn sweep(&mut self, now: Tick) {
        let views = build_views(&self.cfg, &self.source, &self.dest, &self.records);
        let mut found: Vec<(PriorViolation, u8)> = Vec::new();

        for (i, view) in views.iter().enumerate() {
            let p_src = self.true_price(&view.pair.source_token);
            let p_dest = self.true_price(&view.pair.dest_token);
            match check_peg(view, p_src, p_dest) {
                PegStatus::Surplus => {
                    let mut evidence: Vec<TxId> = Vec::new();
                    evidence.extend(view.forward_mints.last().map(|e| e.tx.clone()));
                    evidence.extend(view.forward_locks.last().map(|e| e.tx.clone()));
                    evidence.extend(
                        view.unauthorized_custody_debits
                            .last()
                            .map(|d| d.tx.clone()),
                    );
                    evidence.extend(view.reverse_releases.last().map(|e| e.tx.clone()));
                    if evidence.is_empty() {
                        evidence.extend(self.dest.history().last().map(|tx| TxId {
                            chain: self.dest.chain_id.clone(),
                            uid: tx.uid,
                        }));
                    }
                    found.push((
                        PriorViolation {
                            prior: Prior::Peg,
                            sub_rule: SubRule::PegImbalance,
                            detected_at: now,
                            evidence,
                            classification: crate::monitors::Classification::Failure,
                            token_pair: Some(view.pair.clone()),
                            detail: format!(
                                "wrapped value {} exceeds collateral {}",
                                view.minted_gross, view.locked_gross
                            ),
                        },
                        2,
                    ));
                    self.deficit_onset[i] = None;
                }
                PegStatus::Deficit => {
                    let onset = *self.deficit_onset[i].get_or_insert(now);
                    if now.0 > onset.0 + self.grace {
                        let mut evidence: Vec<TxId> = Vec::new();
                        evidence.extend(view.forward_locks.last().map(|e| e.tx.clone()));
                        evidence.extend(
                            view.unauthorized_custody_debits
                                .last()
                                .map(|d| d.tx.clone()),
                        );
                        evidence.extend(view.reverse_burns.last().map(|e| e.tx.clone()));
                        if evidence.is_empty() {
                            evidence.extend(self.source.history().last().map(|tx| TxId {
                                chain: self.source.chain_id.clone(),
                                uid: tx.uid,
                            }));
                        }
                        found.push((
                            PriorViolation {
                                prior: Prior::Peg,
                                sub_rule: SubRule::PegImbalance,
                                detected_at: now,
                                evidence,
                                classification: crate::monitors::Classification::Failure,
                                token_pair: Some(view.pair.clone()),
                                detail: format!(
                                    "collateral {} unredeemed past grace, wrapped {}",
                                    view.locked_gross, view.minted_gross
                                ),
                            },
                            2,
                        ));
                    }
                }
                PegStatus::Balanced => {
                    self.deficit_onset[i] = None;
                }
            }

            for mut v in check_causality(&view.forward_locks, &view.forward_mints, now, self.grace)
            {
                v.token_pair = Some(view.pair.clone());
                found.push((v, 0));
            }
            for mut v in
                check_causality(&view.reverse_burns, &view.reverse_releases, now, self.grace)
            {
                v.token_pair = Some(view.pair.clone());
                found.push((v, 1));
            }
            for v in check_consistency(view, now) {
                found.push((v, 2));
            }
        }

        let mut tripped = false;
        for (mut v, dir_tag) in found {
            v.evidence = {
                let mut seen = Vec::new();
                for e in v.evidence {
                    if !seen.contains(&e) {
                        seen.push(e);
                    }
                }
                seen
            };
            let key = (v.sub_rule, v.token_pair.clone(), dir_tag);
            if self.seen_keys.contains(&key) {
                continue;
            }
            if classify_violation(&mut v, &self.source, &self.dest, self.adversarial_context)
                .is_err()
            {
                // evidence vanished in a reorg between sweeps; keep the
                // default classification rather than dropping the finding
            }
            self.seen_keys.insert(key);
            if self.first_violation_at.is_none() {
                self.first_violation_at = Some(v.detected_at);
            }
            self.violations.push(v);
            tripped = true;
        }
        if tripped && self.defenses.breaker_on_monitor_trip {
            self.halted = true;
        }
    }
}

fn corrupt_sidechains(mech: &mut OffchainMechanism) -> bool {
    match mech {
        OffchainMechanism::Sidechain(sc) => {
            sc.consensus_honest = false;
            true
        }
        OffchainMechanism::Notary(_) | OffchainMechanism::LightClient(_) => false,
        OffchainMechanism::HybridAnd { first, second }
        | OffchainMechanism::HybridOr { first, second } => {
            let a = corrupt_sidechains(first);
            let b = corrupt_sidechains(second);
            a || b
        }
    }
}

/// Final ledger state of a completed run, for cross-checking tools that
/// need more than the serialized result.
#[derive(Clone, Debug)]
pub struct FinalState {
    pub source: Blockchain,
    pub dest: Blockchain,
    pub records: BTreeMap<Nonce, TransferRecord>,
    pub effective_config: BridgeConfig,
}

/// Execute one scenario to its horizon. Identical inputs give identical
/// results, byte for byte once serialized.
pub fn run_scenario(scenario: &Scenario) -> Result<RunResult, EngineError> {
    run_scenario_full(scenario).map(|(result, _)| result)
}

/// As `run_scenario`, also returning the final ledgers and records.
pub fn run_scenario_full(scenario: &Scenario) -> Result<(RunResult, FinalState), EngineError> {
    scenario.validate()?;

    let mut source = Blockchain::new(
        &scenario.chains[0].chain_id,
        scenario.chains[0].confirmation_delay,
    );
    source.consensus_honest = scenario.chains[0].consensus_honest;
    let mut dest = Blockchain::new(
        &scenario.chains[1].chain_id,
        scenario.chains[1].confirmation_delay,
    );
    dest.consensus_honest = scenario.chains[1].consensus_honest;

    for (chain, setup) in [
        (&mut source, &scenario.chains[0]),
        (&mut dest, &scenario.chains[1]),
    ] {
        for g in &setup.genesis {
            chain
                .append_tx(Transaction::new(
                    TxKind::Mint,
                    g.token.clone(),
                    g.amount,
                    "genesis",
                    g.address.clone(),
                    Tick(0),
                ))
                .map_err(|e| EngineError::ConfigInvalid(format!("genesis: {e}")))?;
        }
    }
    // liquidity reserves are genesis funding of the custody addresses
    if let Some(lp) = scenario.bridge.lp_reserves {
        for pair in &scenario.bridge.token_pairs {
            if !lp.source.is_zero() {
                source
                    .append_tx(Transaction::new(
                        TxKind::Mint,
                        pair.source_token.clone(),
                        lp.source,
                        "genesis",
                        scenario.bridge.source_bridge_address.clone(),
                        Tick(0),
                    ))
                    .map_err(|e| EngineError::ConfigInvalid(format!("lp reserve: {e}")))?;
            }
            if !lp.dest.is_zero() {
                dest.append_tx(Transaction::new(
                    TxKind::Mint,
                    pair.dest_token.clone(),
                    lp.dest,
                    "genesis",
                    scenario.bridge.dest_bridge_address.clone(),
                    Tick(0),
                ))
                .map_err(|e| EngineError::ConfigInvalid(format!("lp reserve: {e}")))?;
            }
        }
    }

    let mut defenses = scenario.defenses.clone();
    // the bridge config carries deployment-level defaults for the windows
    if defenses.buffer_delay == 0 {
        defenses.buffer_delay = scenario.bridge.buffer_delay;
    }
    if defenses.challenge_period == 0 {
        defenses.challenge_period = scenario.bridge.challenge_period;
    }
    if defenses.breaker_cap.is_none() {
        defenses.breaker_cap = scenario.bridge.breaker_cap;
    }
    let mut cfg = scenario.bridge.clone();
    cfg.buffer_delay = defenses.buffer_delay;
    cfg.challenge_period = defenses.challenge_period;
    cfg.breaker_cap = defenses.breaker_cap;

    let grace = source.confirmation_delay
        + cfg.offchain.signal_delay(cfg.d_off)
        + dest.confirmation_delay
        + defenses.challenge_period
        + defenses.buffer_delay
        + 10;

    let pair_count = cfg.token_pairs.len();
    let mut sim = Sim {
        offchain: cfg.offchain.clone(),
        cfg,
        defenses,
        source,
        dest,
        records: BTreeMap::new(),
        pending: BTreeMap::new(),
        queue: BinaryHeap::new(),
        next_seq: 0,
        next_nonce: 0,
        rng: ChaCha8Rng::seed_from_u64(scenario.seed),
        true_prices: scenario.prices.clone(),
        observed_prices: scenario.prices.clone(),
        halted: false,
        violations: Vec::new(),
        seen_keys: BTreeSet::new(),
        accepted_attestations: Vec::new(),
        settled_keys: BTreeSet::new(),
        executed_injections: Vec::new(),
        first_injection_at: None,
        first_violation_at: None,
        loss: BTreeMap::new(),
        deficit_onset: vec![None; pair_count],
        adversarial_context: false,
        grace,
        injections: scenario.injections.clone(),
        traffic: scenario.honest_traffic.clone(),
        horizon: scenario.horizon,
    };

    // injections first so that, at equal ticks, attacks race ahead of the
    // honest flow they exploit
    for (i, inj) in scenario.injections.iter().enumerate() {
        sim.schedule(inj.at, EventKind::Injection(i));
    }
    for (i, item) in scenario.honest_traffic.iter().enumerate() {
        sim.schedule(item.at, EventKind::SubmitTransfer(i));
    }
    sim.schedule(Tick(scenario.horizon), EventKind::MonitorSweep);

    while let Some(Reverse(entry)) = sim.queue.pop() {
        if entry.time.0 > sim.horizon {
            break;
        }
        let now = entry.time;
        match entry.kind {
            EventKind::SubmitTransfer(i) => sim.handle_submit(i, now),
            EventKind::ConfirmLock(n) => sim.handle_confirm(n, now),
            EventKind::EmitAttestation(n) => sim.handle_emit_attestation(n, now),
            EventKind::VerifyAndSettle(job) => sim.handle_settle(*job, now),
            EventKind::BufferExpiry(n) => sim.handle_buffer_expiry(n, now),
            EventKind::ChallengeExpiry(n) => sim.handle_challenge_expiry(n, now),
            EventKind::Injection(i) => sim.handle_injection(i, now),
            EventKind::MonitorSweep => sim.sweep(now),
            EventKind::HonestWatcherReview(n) => sim.handle_watcher_review(n, now),
        }
    }

    // expire whatever never reached a terminal state
    let horizon_tick = Tick(sim.horizon);
    for rec in sim.records.values_mut() {
        if !rec.status.is_terminal() {
            let _ = rec.advance(TransferStatus::Expired);
        }
    }
    sim.sweep(horizon_tick);

    let catalog = scenario
        .vector_catalog
        .clone()
        .unwrap_or_else(surface::shipped_catalog);
    let surface_report = surface::total_area(&sim.cfg, &catalog)
        .map_err(|e| EngineError::ConfigInvalid(e.to_string()))?;

    let mut final_balances: BTreeMap<ChainId, BTreeMap<Address, BTreeMap<TokenId, Amount>>> =
        BTreeMap::new();
    for chain in [&sim.source, &sim.dest] {
        let per_chain = final_balances.entry(chain.chain_id.clone()).or_default();
        for ((addr, token), amount) in chain.balances() {
            if !amount.is_zero() {
                per_chain
                    .entry(addr.clone())
                    .or_default()
                    .insert(token.clone(), *amount);
            }
        }
    }

    let loss: BTreeMap<TokenId, Amount> = sim
        .loss
        .iter()
        .filter(|(_, v)| **v > 0)
        .map(|(k, v)| (k.clone(), Amount(*v as u128)))
        .collect();

    let detection_latency = match (sim.first_injection_at, sim.first_violation_at) {
        (Some(inj), Some(vio)) => Some(vio.0.saturating_sub(inj.0)),
        _ => None,
    };

    let mut evidence_transactions = BTreeMap::new();
    for violation in &sim.violations {
        for ev in &violation.evidence {
            let tx = if ev.chain == sim.source.chain_id {
                sim.source.find_by_uid(ev.uid)
            } else {
                sim.dest.find_by_uid(ev.uid)
            };
            if let Some(tx) = tx {
                evidence_transactions.insert(
                    ev.to_string(),
                    EvidenceTx {
                        chain: ev.chain.clone(),
                        uid: tx.uid,
                        kind: tx.kind,
                        token: tx.token.clone(),
                        value: tx.value,
                        from: tx.from.clone(),
                        to: tx.to.clone(),
                        timestamp: tx.timestamp,
                        provenance: tx.provenance,
                    },
                );
            }
        }
    }

    let result = RunResult {
        scenario: scenario.name.clone(),
        seed: scenario.seed,
        horizon: scenario.horizon,
        violations: sim.violations,
        loss,
        detection_latency,
        halted: sim.halted,
        final_balances,
        surface: surface_report,
        records: sim.records.values().cloned().collect(),
        executed_injections: sim.executed_injections,
        first_injection_at: sim.first_injection_at,
        first_violation_at: sim.first_violation_at,
        evidence_transactions,
    };
    let state = FinalState {
        source: sim.source,
        dest: sim.dest,
        records: sim.records,
        effective_config: sim.cfg,
    };
    Ok((result, state))
}
