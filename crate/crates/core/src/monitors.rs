//! Online monitors for the three bridge security invariants: value peg,
//! lock/mint causality, and collateral consistency, plus the
//! attack-vs-failure classification of whatever they catch.
//!
//! Monitors are pure functions of the two ledgers and the transfer-record
//! table. Aggregates are gross notionals: fee-free transfer values, so an
//! honest transfer contributes the same weight on both sides of the peg.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::{BridgeConfig, Direction, TokenPair, TransferRecord};
use crate::chain::{Amount, Blockchain, Nonce, Price, Provenance, Tick, TxId, TxKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Prior {
    Peg,
    Causality,
    Consistency,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubRule {
    PegImbalance,
    MissingCounterpart,
    DuplicateClaim,
    OrderInversion,
    CollateralEscape,
    BrokenOneToOne,
}

impl SubRule {
    pub fn prior(self) -> Prior {
        match self {
            SubRule::PegImbalance => Prior::Peg,
            SubRule::MissingCounterpart | SubRule::DuplicateClaim | SubRule::OrderInversion => {
                Prior::Causality
            }
            SubRule::CollateralEscape | SubRule::BrokenOneToOne => Prior::Consistency,
        }
    }
}

/// Attack when malicious agents caused it, failure when technical errors did.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Attack,
    Failure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorViolation {
    pub prior: Prior,
    pub sub_rule: SubRule,
    pub detected_at: Tick,
    pub evidence: Vec<TxId>,
    pub classification: Classification,
    pub token_pair: Option<TokenPair>,
    pub detail: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MonitorError {
    #[error("evidence transaction {0} does not resolve in either ledger")]
    DanglingEvidence(TxId),
}

/// One correlated bridge event (a lock, burn, settlement mint, or release),
/// reduced to what the causality check needs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalityEvent {
    pub nonce: Nonce,
    pub at: Tick,
    /// Gross transfer value: settlement events carry the matched record's
    /// v_x rather than the fee-reduced payout.
    pub value: Amount,
    pub tx: TxId,
    pub provenance: Provenance,
}

/// Unaudited movement out of bridge custody.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CustodyDebit {
    pub at: Tick,
    pub value: Amount,
    pub tx: TxId,
    pub provenance: Provenance,
}

/// Per-token-pair view of both ledgers, rebuilt from scratch at every sweep.
#[derive(Clone, Debug)]
pub struct LedgerView {
    pub pair: TokenPair,
    /// Gross collateral backing the pair on the source side. Signed: burn
    /// mode can momentarily over-issue.
    pub locked_gross: i128,
    /// Gross wrapped value outstanding on the destination side.
    pub minted_gross: i128,
    pub forward_locks: Vec<CausalityEvent>,
    pub forward_mints: Vec<CausalityEvent>,
    pub reverse_burns: Vec<CausalityEvent>,
    pub reverse_releases: Vec<CausalityEvent>,
    /// Debits of c1 not tied to an attested reverse transfer.
    pub unauthorized_custody_debits: Vec<CustodyDebit>,
}

fn worst(a: Provenance, b: Provenance) -> Provenance {
    match (a, b) {
        (Provenance::Adversarial, _) | (_, Provenance::Adversarial) => Provenance::Adversarial,
        (Provenance::Faulty, _) | (_, Provenance::Faulty) => Provenance::Faulty,
        _ => Provenance::Honest,
    }
}

/// Group same-nonce transactions committed at the same tick into one event
/// (a settlement and its fee movement are one logical step).
fn group_events<'a, I>(txs: I, chain_id: &str) -> Vec<CausalityEvent>
where
    I: Iterator<Item = &'a crate::chain::Transaction>,
{
    let mut groups: BTreeMap<(Nonce, Tick), CausalityEvent> = BTreeMap::new();
    for tx in txs {
        let nonce = tx.transfer_id.expect("grouped txs are tagged");
        groups
            .entry((nonce, tx.timestamp))
            .and_modify(|ev| {
                ev.value = Amount(ev.value.0 + tx.value.0);
                ev.provenance = worst(ev.provenance, tx.provenance);
            })
            .or_insert_with(|| CausalityEvent {
                nonce,
                at: tx.timestamp,
                value: tx.value,
                tx: TxId {
                    chain: chain_id.to_string(),
                    uid: tx.uid,
                },
                provenance: tx.provenance,
            });
    }
    groups.into_values().collect()
}

/// Remove one event per cancellation group: the latest event at or before
/// the cancellation tick (a claw-back reverts the settlement it vetoed).
fn cancel_events(events: &mut Vec<CausalityEvent>, cancels: &[CausalityEvent]) {
    for c in cancels {
        let target = events
            .iter()
            .enumerate()
            .filter(|(_, ev)| ev.nonce == c.nonce && ev.at <= c.at)
            .map(|(i, _)| i)
            .next_back();
        if let Some(i) = target {
            events.remove(i);
        }
    }
}

/// Rebuild per-pair ledger views. Only nonce-tagged transactions and flows
/// through the custody addresses are bridge events; genesis funding and user
/// payments stay invisible to the monitors.
pub fn build_views(
    cfg: &BridgeConfig,
    source: &Blockchain,
    dest: &Blockchain,
    records: &BTreeMap<Nonce, TransferRecord>,
) -> Vec<LedgerView> {
    cfg.token_pairs
        .iter()
        .map(|pair| build_pair_view(cfg, source, dest, records, pair))
        .collect()
}

fn build_pair_view(
    cfg: &BridgeConfig,
    source: &Blockchain,
    dest: &Blockchain,
    records: &BTreeMap<Nonce, TransferRecord>,
    pair: &TokenPair,
) -> LedgerView {
    let c1 = &cfg.source_bridge_address;
    let c2 = &cfg.dest_bridge_address;
    let burns_on_source = cfg.functional_type.burns_on_source();
    let liquidity = cfg.functional_type.is_liquidity();

    let is_reverse_record = |nonce: Nonce| {
        records
            .get(&nonce)
            .map(|r| r.direction == Direction::Reverse)
            .unwrap_or(false)
    };
    let is_forward_record = |nonce: Nonce| {
        records
            .get(&nonce)
            .map(|r| r.direction == Direction::Forward)
            .unwrap_or(false)
    };

    // ---- source side ----------------------------------------------------
    let src_token = &pair.source_token;
    let forward_locks = group_events(
        source.history().iter().filter(|tx| {
            tx.transfer_id.is_some()
                && tx.token == *src_token
                && if burns_on_source {
                    tx.kind == TxKind::Burn && is_forward_record(tx.transfer_id.unwrap())
                } else {
                    tx.kind == TxKind::Lock && tx.to == *c1
                }
        }),
        &source.chain_id,
    );

    // reverse settlements: releases from c1, or re-issue mints in burn mode
    // (forged settlements carry nonces with no record, so the filters admit
    // anything that is not a forward-record transaction)
    let reverse_settles = group_events(
        source.history().iter().filter(|tx| {
            tx.transfer_id.is_some()
                && tx.token == *src_token
                && if burns_on_source {
                    tx.kind == TxKind::Mint && !is_forward_record(tx.transfer_id.unwrap())
                } else {
                    tx.kind == TxKind::Release && tx.from == *c1
                }
        }),
        &source.chain_id,
    );
    // claw-backs of reverse settlements
    let reverse_clawbacks = group_events(
        source.history().iter().filter(|tx| {
            tx.transfer_id.is_some()
                && tx.token == *src_token
                && if burns_on_source {
                    tx.kind == TxKind::Burn && !is_forward_record(tx.transfer_id.unwrap())
                } else {
                    tx.kind == TxKind::Plain && tx.to == *c1
                }
        }),
        &source.chain_id,
    );
    let mut reverse_releases = reverse_settles;
    cancel_events(&mut reverse_releases, &reverse_clawbacks);

    // gross collateral
    let mut locked_gross: i128 = 0;
    if burns_on_source {
        for tx in source.history() {
            if tx.token != *src_token || tx.transfer_id.is_none() {
                continue;
            }
            match tx.kind {
                TxKind::Burn => locked_gross += tx.value.0 as i128,
                TxKind::Mint => locked_gross -= tx.value.0 as i128,
                _ => {}
            }
        }
    } else {
        for tx in source.history() {
            if tx.token != *src_token {
                continue;
            }
            let credit_to_c1 = tx.to == *c1
                && (tx.kind == TxKind::Lock
                    || (tx.kind == TxKind::Plain && tx.transfer_id.is_some()));
            let debit_from_c1 =
                tx.from == *c1 && matches!(tx.kind, TxKind::Release | TxKind::Plain | TxKind::Burn);
            if credit_to_c1 {
                locked_gross += tx.value.0 as i128;
            }
            if debit_from_c1 {
                locked_gross -= tx.value.0 as i128;
            }
        }
    }

    // custody debit audit: every outflow of c1 must trace to a reverse
    // transfer whose destination-side burn committed first
    let mut unauthorized = Vec::new();
    if !burns_on_source {
        let dest_burns: BTreeMap<Nonce, Tick> = dest
            .history()
            .iter()
            .filter(|tx| {
                tx.transfer_id.is_some()
                    && tx.token == pair.dest_token
                    && (tx.kind == TxKind::Burn
                        || (liquidity && tx.kind == TxKind::Lock && tx.to == *c2))
            })
            .map(|tx| (tx.transfer_id.unwrap(), tx.timestamp))
            .collect();
        for tx in source.history() {
            if tx.token != *src_token
                || tx.from != *c1
                || !matches!(tx.kind, TxKind::Release | TxKind::Plain)
            {
                continue;
            }
            let authorized = tx
                .transfer_id
                .filter(|n| is_reverse_record(*n))
                .and_then(|n| dest_burns.get(&n))
                .map(|t_burn| *t_burn < tx.timestamp)
                .unwrap_or(false);
            if !authorized {
                unauthorized.push(CustodyDebit {
                    at: tx.timestamp,
                    value: tx.value,
                    tx: TxId {
                        chain: source.chain_id.clone(),
                        uid: tx.uid,
                    },
                    provenance: tx.provenance,
                });
            }
        }
    }

    // ---- destination side -------------------------------------------------
    let dest_token = &pair.dest_token;
    let mut forward_mints = group_events(
        dest.history().iter().filter(|tx| {
            tx.transfer_id.is_some()
                && tx.token == *dest_token
                && if liquidity {
                    tx.kind == TxKind::Release && tx.from == *c2
                } else {
                    tx.kind == TxKind::Mint && !is_reverse_record(tx.transfer_id.unwrap())
                }
        }),
        &dest.chain_id,
    );
    let mut forward_clawbacks = group_events(
        dest.history().iter().filter(|tx| {
            tx.transfer_id.is_some()
                && tx.token == *dest_token
                && if liquidity {
                    tx.kind == TxKind::Plain && tx.to == *c2
                } else {
                    tx.kind == TxKind::Burn && is_forward_record(tx.transfer_id.unwrap())
                }
        }),
        &dest.chain_id,
    );

    // substitute gross values for fee-reduced payouts where the settlement
    // matches its record exactly
    let substitute_gross = |ev: &mut CausalityEvent| {
        if let Some(rec) = records.get(&ev.nonce) {
            if rec.direction == Direction::Forward && !cfg.price_conversion {
                let expected_payout = rec.v_x.saturating_sub(rec.fees_paid.f2);
                if ev.value == expected_payout || ev.value == rec.v_x {
                    ev.value = rec.v_x;
                }
            }
        }
    };
    forward_mints.iter_mut().for_each(substitute_gross);
    forward_clawbacks.iter_mut().for_each(substitute_gross);

    let mut minted_gross: i128 = forward_mints.iter().map(|e| e.value.0 as i128).sum();
    minted_gross -= forward_clawbacks
        .iter()
        .map(|e| e.value.0 as i128)
        .sum::<i128>();
    cancel_events(&mut forward_mints, &forward_clawbacks);

    // reverse initiations on the destination side
    let reverse_burns = group_events(
        dest.history().iter().filter(|tx| {
            tx.transfer_id.is_some()
                && tx.token == *dest_token
                && if liquidity {
                    tx.kind == TxKind::Lock && tx.to == *c2
                } else {
                    tx.kind == TxKind::Burn && is_reverse_record(tx.transfer_id.unwrap())
                }
        }),
        &dest.chain_id,
    );
    minted_gross -= reverse_burns
        .iter()
        .map(|e| e.value.0 as i128)
        .sum::<i128>();

    // untagged drains of the destination reserve count as extracted value
    for tx in dest.history() {
        if tx.token == *dest_token
            && tx.from == *c2
            && tx.transfer_id.is_none()
            && matches!(tx.kind, TxKind::Release | TxKind::Plain)
        {
            minted_gross += tx.value.0 as i128;
        }
    }

    LedgerView {
        pair: pair.clone(),
        locked_gross,
        minted_gross,
        forward_locks,
        forward_mints,
        reverse_burns,
        reverse_releases,
        unauthorized_custody_debits: unauthorized,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PegStatus {
    Balanced,
    /// More wrapped value outstanding than collateral: never legitimate.
    Surplus,
    /// Collateral exceeds wrapped value: expected while transfers are in
    /// flight, a violation only once it persists past the pipeline grace.
    Deficit,
}

/// Exact comparison of `minted * price(dest)` against `locked * price(source)`
/// by cross-multiplication; negative aggregates clamp to zero.
pub fn check_peg(view: &LedgerView, source_price: Price, dest_price: Price) -> PegStatus {
    let locked = BigInt::from(view.locked_gross.max(0))
        * BigInt::from(source_price.num)
        * BigInt::from(dest_price.den);
    let minted = BigInt::from(view.minted_gross.max(0))
        * BigInt::from(dest_price.num)
        * BigInt::from(source_price.den);
    match minted.cmp(&locked) {
        std::cmp::Ordering::Equal => PegStatus::Balanced,
        std::cmp::Ordering::Greater => PegStatus::Surplus,
        std::cmp::Ordering::Less => PegStatus::Deficit,
    }
}

fn admissible(lock: &CausalityEvent, mint: &CausalityEvent) -> bool {
    lock.nonce == mint.nonce && lock.at < mint.at && lock.value >= mint.value
}

/// Maximum bipartite matching (Kuhn's augmenting paths) of mints onto locks.
/// Returns, per lock, the index of the mint matched to it.
fn max_matching(locks: &[CausalityEvent], mints: &[CausalityEvent]) -> Vec<Option<usize>> {
    fn try_assign(
        mint_idx: usize,
        locks: &[CausalityEvent],
        mints: &[CausalityEvent],
        lock_taken: &mut Vec<Option<usize>>,
        visited: &mut Vec<bool>,
    ) -> bool {
        for (li, lock) in locks.iter().enumerate() {
            if visited[li] || !admissible(lock, &mints[mint_idx]) {
                continue;
            }
            visited[li] = true;
            if lock_taken[li].is_none()
                || try_assign(lock_taken[li].unwrap(), locks, mints, lock_taken, visited)
            {
                lock_taken[li] = Some(mint_idx);
                return true;
            }
        }
        false
    }

    let mut lock_taken: Vec<Option<usize>> = vec![None; locks.len()];
    for mi in 0..mints.len() {
        let mut visited = vec![false; locks.len()];
        try_assign(mi, locks, mints, &mut lock_taken, &mut visited);
    }
    lock_taken
}

/// Bijective time-ordered correspondence check between initiation events
/// ("locks") and settlement events ("mints"). A valid assignment maps every
/// mint to a distinct earlier lock with the same nonce and sufficient value;
/// locks older than `now - grace` must themselves be matched.
pub fn check_causality(
    locks: &[CausalityEvent],
    mints: &[CausalityEvent],
    now: Tick,
    grace: u64,
) -> Vec<PriorViolation> {
    let mut violations = Vec::new();
    let lock_taken = max_matching(locks, mints);
    let matched_mints: Vec<bool> = {
        let mut m = vec![false; mints.len()];
        for taken in lock_taken.iter().flatten() {
            m[*taken] = true;
        }
        m
    };

    // safety direction: any mint left unmatched breaks the bijection
    let mut existence: Option<PriorViolation> = None;
    let mut ordering: Option<PriorViolation> = None;
    let mut uniqueness: Option<PriorViolation> = None;
    for (mi, mint) in mints.iter().enumerate() {
        if matched_mints[mi] {
            continue;
        }
        let same_nonce: Vec<&CausalityEvent> =
            locks.iter().filter(|l| l.nonce == mint.nonce).collect();
        if same_nonce.is_empty() {
            existence.get_or_insert_with(|| PriorViolation {
                prior: Prior::Causality,
                sub_rule: SubRule::MissingCounterpart,
                detected_at: now,
                evidence: vec![mint.tx.clone()],
                classification: Classification::Failure,
                token_pair: None,
                detail: format!("settlement {} has no initiation event", mint.nonce),
            });
        } else if same_nonce
            .iter()
            .all(|l| l.at >= mint.at && l.value >= mint.value)
        {
            let mut evidence = vec![mint.tx.clone()];
            evidence.extend(same_nonce.iter().map(|l| l.tx.clone()));
            ordering.get_or_insert_with(|| PriorViolation {
                prior: Prior::Causality,
                sub_rule: SubRule::OrderInversion,
                detected_at: now,
                evidence,
                classification: Classification::Failure,
                token_pair: None,
                detail: format!("settlement {} precedes its initiation", mint.nonce),
            });
        } else if same_nonce.iter().all(|l| l.value < mint.value) {
            let mut evidence = vec![mint.tx.clone()];
            evidence.extend(same_nonce.iter().map(|l| l.tx.clone()));
            existence.get_or_insert_with(|| PriorViolation {
                prior: Prior::Causality,
                sub_rule: SubRule::MissingCounterpart,
                detected_at: now,
                evidence,
                classification: Classification::Failure,
                token_pair: None,
                detail: format!(
                    "settlement {} exceeds every candidate initiation value",
                    mint.nonce
                ),
            });
        } else {
            // candidates exist but are contended by other settlements
            let mut evidence: Vec<TxId> = mints
                .iter()
                .filter(|m| m.nonce == mint.nonce)
                .map(|m| m.tx.clone())
                .collect();
            evidence.extend(same_nonce.iter().map(|l| l.tx.clone()));
            uniqueness.get_or_insert_with(|| PriorViolation {
                prior: Prior::Causality,
                sub_rule: SubRule::DuplicateClaim,
                detected_at: now,
                evidence,
                classification: Classification::Failure,
                token_pair: None,
                detail: format!("multiple settlements claim initiation {}", mint.nonce),
            });
        }
    }
    violations.extend(existence);
    violations.extend(ordering);
    violations.extend(uniqueness);

    // liveness direction: a lock with no settlement past the grace window is
    // a stall, reported in the failure direction
    for (li, lock) in locks.iter().enumerate() {
        if lock_taken[li].is_none() && now.0 > lock.at.0 + grace {
            violations.push(PriorViolation {
                prior: Prior::Causality,
                sub_rule: SubRule::MissingCounterpart,
                detected_at: now,
                evidence: vec![lock.tx.clone()],
                classification: Classification::Failure,
                token_pair: None,
                detail: format!(
                    "initiation {} unmatched {} ticks past grace",
                    lock.nonce,
                    now.0 - lock.at.0 - grace
                ),
            });
            break;
        }
    }

    violations
}

/// Consistency checks: locked collateral must stay put while wrapped tokens
/// are outstanding (exclusivity) and every outstanding settlement must map
/// to exactly one initiation batch (one-to-one correspondence).
pub fn check_consistency(view: &LedgerView, now: Tick) -> Vec<PriorViolation> {
    let mut violations = Vec::new();

    if view.minted_gross > 0 {
        if let Some(debit) = view.unauthorized_custody_debits.first() {
            violations.push(PriorViolation {
                prior: Prior::Consistency,
                sub_rule: SubRule::CollateralEscape,
                detected_at: now,
                evidence: vec![debit.tx.clone()],
                classification: Classification::Failure,
                token_pair: Some(view.pair.clone()),
                detail: format!(
                    "{} left custody while wrapped value is outstanding",
                    debit.value
                ),
            });
        }
    }

    let mut mint_counts: BTreeMap<Nonce, Vec<&CausalityEvent>> = BTreeMap::new();
    for mint in &view.forward_mints {
        mint_counts.entry(mint.nonce).or_default().push(mint);
    }
    for (nonce, mints) in mint_counts {
        let lock_count = view
            .forward_locks
            .iter()
            .filter(|l| l.nonce == nonce)
            .count();
        if mints.len() > lock_count {
            violations.push(PriorViolation {
                prior: Prior::Consistency,
                sub_rule: SubRule::BrokenOneToOne,
                detected_at: now,
                evidence: mints.iter().map(|m| m.tx.clone()).collect(),
                classification: Classification::Failure,
                token_pair: Some(view.pair.clone()),
                detail: format!(
                    "{} settlements against {lock_count} initiation batches for {nonce}",
                    mints.len()
                ),
            });
            break;
        }
    }

    violations
}

/// Resolve the attack-vs-failure split: malicious agents anywhere in the
/// evidence (or a chain-level adversarial injection in scope) make it an
/// attack; otherwise it stays a failure.
pub fn classify_violation(
    violation: &mut PriorViolation,
    source: &Blockchain,
    dest: &Blockchain,
    adversarial_context: bool,
) -> Result<(), MonitorError> {
    let mut adversarial = adversarial_context;
    for ev in &violation.evidence {
        let tx = if ev.chain == source.chain_id {
            source.find_by_uid(ev.uid)
        } else if ev.chain == dest.chain_id {
            dest.find_by_uid(ev.uid)
        } else {
            None
        };
        let tx = tx.ok_or_else(|| MonitorError::DanglingEvidence(ev.clone()))?;
        if tx.provenance == Provenance::Adversarial {
            adversarial = true;
        }
    }
    violation.classification = if adversarial {
        Classification::Attack
    } else {
        Classification::Failure
    };
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(nonce: u64, at: u64, value: u128, uid: u64) -> CausalityEvent {
        CausalityEvent {
            nonce: Nonce(nonce),
            at: Tick(at),
            value: Amount(value),
            tx: TxId {
                chain: "t".into(),
                uid,
            },
            provenance: Provenance::Honest,
        }
    }

    fn view_with(locked: i128, minted: i128) -> LedgerView {
        LedgerView {
            pair: TokenPair::new("ETH", "wETH"),
            locked_gross: locked,
            minted_gross: minted,
            forward_locks: vec![],
            forward_mints: vec![],
            reverse_burns: vec![],
            reverse_releases: vec![],
            unauthorized_custody_debits: vec![],
        }
    }

    #[test]
    fn peg_balances_across_price_pairs() {
        // locked 10 @ 5 == minted 25 @ 2
        let p1 = Price { num: 5, den: 1 };
        let p2 = Price { num: 2, den: 1 };
        assert_eq!(check_peg(&view_with(10, 25), p1, p2), PegStatus::Balanced);
        // locked 10 @ 5 != minted 24 @ 2
        assert_eq!(check_peg(&view_with(10, 24), p1, p2), PegStatus::Deficit);
        assert_eq!(check_peg(&view_with(10, 26), p1, p2), PegStatus::Surplus);
    }

    #[test]
    fn peg_unbacked_mint_is_surplus() {
        // wrapped value minted against zero collateral
        let one = Price::one();
        assert_eq!(
            check_peg(&view_with(0, 120_000), one, one),
            PegStatus::Surplus
        );
    }

    #[test]
    fn causality_empty_is_clean() {
        assert!(check_causality(&[], &[], Tick(100), 10).is_empty());
    }

    #[test]
    fn causality_ordering_violation() {
        // lock at t=1, mint at t=0
        let locks = vec![ev(1, 1, 40, 1)];
        let mints = vec![ev(1, 0, 40, 2)];
        let v = check_causality(&locks, &mints, Tick(2), 100);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].sub_rule, SubRule::OrderInversion);
    }

    #[test]
    fn causality_crossed_pairs_have_valid_bijection() {
        // locks {(A,1),(B,2)}, mints {(A,4),(B,3)}: valid
        let locks = vec![ev(1, 1, 10, 1), ev(2, 2, 10, 2)];
        let mints = vec![ev(1, 4, 10, 3), ev(2, 3, 10, 4)];
        assert!(check_causality(&locks, &mints, Tick(5), 100).is_empty());
    }

    #[test]
    fn causality_unbacked_mint_is_existence_break() {
        let mints = vec![ev(9, 5, 120_000, 1)];
        let v = check_causality(&[], &mints, Tick(6), 100);
        assert_eq!(v[0].sub_rule, SubRule::MissingCounterpart);
    }

    #[test]
    fn causality_double_claim_is_uniqueness_break() {
        let locks = vec![ev(1, 1, 40, 1)];
        let mints = vec![ev(1, 2, 40, 2), ev(1, 3, 40, 3)];
        let v = check_causality(&locks, &mints, Tick(4), 100);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].sub_rule, SubRule::DuplicateClaim);
    }

    #[test]
    fn causality_stall_fires_after_grace() {
        let locks = vec![ev(1, 0, 40, 1)];
        assert!(check_causality(&locks, &[], Tick(10), 20).is_empty());
        let v = check_causality(&locks, &[], Tick(21), 20);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].sub_rule, SubRule::MissingCounterpart);
        assert_eq!(v[0].classification, Classification::Failure);
    }

    #[test]
    fn consistency_double_mint_against_single_lock() {
        let mut view = view_with(40, 80);
        view.forward_locks = vec![ev(1, 1, 40, 1)];
        view.forward_mints = vec![ev(1, 2, 40, 2), ev(1, 3, 40, 3)];
        let v = check_consistency(&view, Tick(4));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].sub_rule, SubRule::BrokenOneToOne);
    }

    #[test]
    fn consistency_drain_with_outstanding_mints() {
        let mut view = view_with(0, 40);
        view.unauthorized_custody_debits = vec![CustodyDebit {
            at: Tick(5),
            value: Amount(40),
            tx: TxId {
                chain: "b1".into(),
                uid: 9,
            },
            provenance: Provenance::Adversarial,
        }];
        let v = check_consistency(&view, Tick(5));
        assert_eq!(v[0].sub_rule, SubRule::CollateralEscape);
        // same drain with nothing outstanding: no exclusivity breach
        let mut quiet = view_with(0, 0);
        quiet.unauthorized_custody_debits = view.unauthorized_custody_debits.clone();
        assert!(check_consistency(&quiet, Tick(5)).is_empty());
    }

    #[test]
    fn classification_requires_resolvable_evidence() {
        let source = crate::chain::Blockchain::new("b1", 1);
        let dest = crate::chain::Blockchain::new("b2", 1);
        let mut v = PriorViolation {
            prior: Prior::Causality,
            sub_rule: SubRule::MissingCounterpart,
            detected_at: Tick(5),
            evidence: vec![TxId {
                chain: "b1".into(),
                uid: 42,
            }],
            classification: Classification::Failure,
            token_pair: None,
            detail: String::new(),
        };
        let err = classify_violation(&mut v, &source, &dest, false).unwrap_err();
        assert_eq!(
            err,
            MonitorError::DanglingEvidence(TxId {
                chain: "b1".into(),
                uid: 42
            })
        );
    }

    #[test]
    fn matching_reassigns_to_find_feasible_bijections() {
        // two locks of the same nonce serve two settlements
        let locks = vec![ev(1, 1, 40, 1), ev(1, 2, 40, 2)];
        let mints = vec![ev(1, 3, 40, 3), ev(1, 4, 40, 4)];
        assert!(check_causality(&locks, &mints, Tick(5), 100).is_empty());
    }
}
