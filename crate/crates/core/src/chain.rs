//! Minimal ledger model of a blockchain domain: addresses, tokens, an
//! append-only transaction history, derived balances, a confirmation delay,
//! and reorganization support.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Token quantity in base units. All arithmetic is checked: overflow is an
/// error, never wraparound. Serialized as a decimal string so no reader ever
/// sees a float.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Amount(pub u128);

impl Amount {
    pub const ZERO: Amount = Amount(0);

    pub fn checked_add(self, rhs: Amount) -> Result<Amount, ChainError> {
        self.0
            .checked_add(rhs.0)
            .map(Amount)
            .ok_or(ChainError::AmountOverflow)
    }

    pub fn checked_sub(self, rhs: Amount) -> Result<Amount, ChainError> {
        self.0
            .checked_sub(rhs.0)
            .map(Amount)
            .ok_or(ChainError::AmountUnderflow)
    }

    pub fn saturating_sub(self, rhs: Amount) -> Amount {
        Amount(self.0.saturating_sub(rhs.0))
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Floor of `self * ppm / 1_000_000`, exact in integer arithmetic and
    /// safe for the full u128 range (the quotient/remainder split keeps every
    /// intermediate product inside u128).
    pub fn mul_ppm_floor(self, ppm: u32) -> Result<Amount, ChainError> {
        const M: u128 = 1_000_000;
        let ppm = ppm as u128;
        let q = self.0 / M;
        let r = self.0 % M;
        let hi = q.checked_mul(ppm).ok_or(ChainError::AmountOverflow)?;
        let lo = r * ppm / M; // r < 1e6, ppm <= 1e6, product < 1e12
        hi.checked_add(lo)
            .map(Amount)
            .ok_or(ChainError::AmountOverflow)
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Amount {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<u128>()
            .map(Amount)
            .map_err(|e| format!("invalid amount {s:?}: {e}"))
    }
}

impl Serialize for Amount {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Amount {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Fiat price of one base unit, as an exact rational (micro-units per base
/// unit). Comparisons are done by cross-multiplication, never division.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Price {
    pub num: u64,
    pub den: u64,
}

impl Price {
    pub fn new(num: u64, den: u64) -> Result<Price, ChainError> {
        if den == 0 {
            return Err(ChainError::ZeroPriceDenominator);
        }
        Ok(Price { num, den })
    }

    pub fn one() -> Price {
        Price { num: 1, den: 1 }
    }
}

/// Abstract simulation time in ticks.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Tick(pub u64);

impl Tick {
    pub fn plus(self, delta: u64) -> Tick {
        Tick(self.0.saturating_add(delta))
    }
}

impl fmt::Display for Tick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Per-transfer nonce stamped on both legs of a bridge transfer so monitors
/// can correlate them. The causality monitor verifies the correspondence
/// independently; it does not trust the nonce blindly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Nonce(pub u64);

impl fmt::Display for Nonce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

pub type Address = String;
pub type TokenId = String;
pub type ChainId = String;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TxKind {
    Lock,
    Burn,
    Mint,
    Release,
    Plain,
}

/// Who caused a transaction. Immutable once appended; drives the
/// attack-vs-failure split when a monitor fires.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Honest,
    Adversarial,
    Faulty,
}

/// Stable reference to an appended transaction. Uids are never reused, so
/// references stay meaningful even after a reorg removes the transaction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TxId {
    pub chain: ChainId,
    pub uid: u64,
}

impl fmt::Display for TxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.chain, self.uid)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    /// Stamped by the chain on append; 0 until then.
    pub uid: u64,
    pub transfer_id: Option<Nonce>,
    pub token: TokenId,
    pub value: Amount,
    pub from: Address,
    pub to: Address,
    pub timestamp: Tick,
    pub kind: TxKind,
    pub provenance: Provenance,
}

impl Transaction {
    pub fn new(
        kind: TxKind,
        token: impl Into<TokenId>,
        value: Amount,
        from: impl Into<Address>,
        to: impl Into<Address>,
        timestamp: Tick,
    ) -> Transaction {
        Transaction {
            uid: 0,
            transfer_id: None,
            token: token.into(),
            value,
            from: from.into(),
            to: to.into(),
            timestamp,
            kind,
            provenance: Provenance::Honest,
        }
    }

    pub fn with_nonce(mut self, nonce: Nonce) -> Transaction {
        self.transfer_id = Some(nonce);
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Transaction {
        self.provenance = provenance;
        self
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChainError {
    #[error("insufficient balance: {address} holds {held} {token}, needs {needed}")]
    InsufficientBalance {
        address: Address,
        token: TokenId,
        held: Amount,
        needed: Amount,
    },
    #[error("non-monotone timestamp: tx at {attempted} but history head is {head}")]
    NonMonotoneTimestamp { attempted: Tick, head: Tick },
    #[error("rollback depth {depth} exceeds history length {len}")]
    DepthExceedsHistory { depth: usize, len: usize },
    #[error("zero-value {0:?} transaction")]
    ZeroValueTransfer(TxKind),
    #[error("plain transfer from an address to itself")]
    SelfTransfer,
    #[error("amount overflow")]
    AmountOverflow,
    #[error("amount underflow")]
    AmountUnderflow,
    #[error("price denominator must be positive")]
    ZeroPriceDenominator,
}

/// One blockchain domain. History is totally ordered by (timestamp, append
/// sequence); balances are always the left fold of history.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Blockchain {
    pub chain_id: ChainId,
    /// Block confirmation duration: a tx is confirmed once
    /// `now >= tx.timestamp + confirmation_delay`.
    pub confirmation_delay: u64,
    /// Stands in for the consensus rules: false means the domain accepts
    /// arbitrary state transitions (sidechain and 51% injections flip it).
    pub consensus_honest: bool,
    history: Vec<Transaction>,
    balances: BTreeMap<(Address, TokenId), Amount>,
    next_uid: u64,
}

impl Blockchain {
    pub fn new(chain_id: impl Into<ChainId>, confirmation_delay: u64) -> Blockchain {
        Blockchain {
            chain_id: chain_id.into(),
            confirmation_delay,
            consensus_honest: true,
            history: Vec::new(),
            balances: BTreeMap::new(),
            next_uid: 1,
        }
    }

    pub fn history(&self) -> &[Transaction] {
        &self.history
    }

    pub fn balance_of(&self, address: &str, token: &str) -> Amount {
        self.balances
            .get(&(address.to_string(), token.to_string()))
            .copied()
            .unwrap_or(Amount::ZERO)
    }

    pub fn balances(&self) -> &BTreeMap<(Address, TokenId), Amount> {
        &self.balances
    }

    /// Sum of all balances of `token`; mints raise it, burns lower it.
    pub fn total_supply(&self, token: &str) -> Amount {
        let mut total: u128 = 0;
        for ((_, t), v) in &self.balances {
            if t == token {
                total += v.0;
            }
        }
        Amount(total)
    }

    pub fn is_confirmed(&self, tx: &Transaction, now: Tick) -> bool {
        now.0 >= tx.timestamp.0 + self.confirmation_delay
    }

    pub fn find_by_nonce(&self, nonce: Nonce, kind: TxKind) -> Option<&Transaction> {
        self.history
            .iter()
            .find(|tx| tx.transfer_id == Some(nonce) && tx.kind == kind)
    }

    pub fn find_by_uid(&self, uid: u64) -> Option<&Transaction> {
        self.history.iter().find(|tx| tx.uid == uid)
    }

    /// Append a transaction, debiting and crediting per its kind. Mint is the
    /// only unbacked credit; Burn debits without a credit.
    pub fn append_tx(&mut self, mut tx: Transaction) -> Result<TxId, ChainError> {
        if let Some(head) = self.history.last() {
            if tx.timestamp < head.timestamp {
                return Err(ChainError::NonMonotoneTimestamp {
                    attempted: tx.timestamp,
                    head: head.timestamp,
                });
            }
        }
        match tx.kind {
            TxKind::Lock | TxKind::Burn | TxKind::Mint | TxKind::Release if tx.value.is_zero() => {
                return Err(ChainError::ZeroValueTransfer(tx.kind));
            }
            TxKind::Plain if tx.from == tx.to => return Err(ChainError::SelfTransfer),
            _ => {}
        }

        let debits = tx.kind != TxKind::Mint;
        let credits = tx.kind != TxKind::Burn;

        if debits {
            let held = self.balance_of(&tx.from, &tx.token);
            if held < tx.value {
                return Err(ChainError::InsufficientBalance {
                    address: tx.from.clone(),
                    token: tx.token.clone(),
                    held,
                    needed: tx.value,
                });
            }
        }

        tx.uid = self.next_uid;
        self.next_uid += 1;

        if debits {
            let key = (tx.from.clone(), tx.token.clone());
            let held = self.balances.get(&key).copied().unwrap_or(Amount::ZERO);
            self.balances.insert(key, held.checked_sub(tx.value)?);
        }
        if credits {
            let key = (tx.to.clone(), tx.token.clone());
            let held = self.balances.get(&key).copied().unwrap_or(Amount::ZERO);
            self.balances.insert(key, held.checked_add(tx.value)?);
        }

        let id = TxId {
            chain: self.chain_id.clone(),
            uid: tx.uid,
        };
        self.history.push(tx);
        Ok(id)
    }

    /// Remove the last `depth` transactions and recompute balances from the
    /// surviving history. Returns the reverted transactions, most recent
    /// first, so monitors can re-evaluate against what disappeared.
    pub fn rollback(&mut self, depth: usize) -> Result<Vec<Transaction>, ChainError> {
        if depth > self.history.len() {
            return Err(ChainError::DepthExceedsHistory {
                depth,
                len: self.history.len(),
            });
        }
        let mut reverted = Vec::with_capacity(depth);
        for _ in 0..depth {
            reverted.push(self.history.pop().expect("depth checked"));
        }
        self.balances = fold_balances(&self.history);
        Ok(reverted)
    }
}

/// Fresh left fold of a history into balances. `Blockchain` maintains the
/// same map incrementally; tests compare the two after every operation.
pub fn fold_balances(history: &[Transaction]) -> BTreeMap<(Address, TokenId), Amount> {
    let mut balances: BTreeMap<(Address, TokenId), Amount> = BTreeMap::new();
    for tx in history {
        if tx.kind != TxKind::Mint {
            let key = (tx.from.clone(), tx.token.clone());
            let held = balances.get(&key).copied().unwrap_or(Amount::ZERO);
            balances.insert(key, held.saturating_sub(tx.value));
        }
        if tx.kind != TxKind::Burn {
            let key = (tx.to.clone(), tx.token.clone());
            let held = balances.get(&key).copied().unwrap_or(Amount::ZERO);
            balances.insert(
                key,
                Amount(held.0.checked_add(tx.value.0).expect("fold overflow")),
            );
        }
    }
    balances
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_with(addr: &str, token: &str, v: u128) -> Blockchain {
        let mut c = Blockchain::new("b1", 1);
        c.append_tx(Transaction::new(
            TxKind::Mint,
            token,
            Amount(v),
            "genesis",
            addr,
            Tick(0),
        ))
        .unwrap();
        c
    }

    #[test]
    fn lock_debits_and_credits() {
        let mut c = chain_with("a1", "ETH", 100);
        c.append_tx(Transaction::new(
            TxKind::Lock,
            "ETH",
            Amount(40),
            "a1",
            "c1",
            Tick(1),
        ))
        .unwrap();
        assert_eq!(c.balance_of("a1", "ETH"), Amount(60));
        assert_eq!(c.balance_of("c1", "ETH"), Amount(40));
    }

    #[test]
    fn mint_credits_from_nothing() {
        let mut c = Blockchain::new("b2", 1);
        c.append_tx(Transaction::new(
            TxKind::Mint,
            "wETH",
            Amount(38),
            "bridge",
            "a2",
            Tick(0),
        ))
        .unwrap();
        assert_eq!(c.balance_of("a2", "wETH"), Amount(38));
        assert_eq!(c.total_supply("wETH"), Amount(38));
    }

    #[test]
    fn plain_insufficient_balance_is_rejected() {
        let mut c = chain_with("a1", "ETH", 10);
        let err = c
            .append_tx(Transaction::new(
                TxKind::Plain,
                "ETH",
                Amount(50),
                "a1",
                "a2",
                Tick(1),
            ))
            .unwrap_err();
        assert!(matches!(err, ChainError::InsufficientBalance { .. }));
        // guard failed: nothing appended
        assert_eq!(c.history().len(), 1);
        assert_eq!(c.balance_of("a1", "ETH"), Amount(10));
    }

    #[test]
    fn non_monotone_timestamp_is_rejected() {
        let mut c = chain_with("a1", "ETH", 10);
        c.append_tx(Transaction::new(
            TxKind::Plain,
            "ETH",
            Amount(1),
            "a1",
            "a2",
            Tick(5),
        ))
        .unwrap();
        let err = c
            .append_tx(Transaction::new(
                TxKind::Plain,
                "ETH",
                Amount(1),
                "a1",
                "a2",
                Tick(4),
            ))
            .unwrap_err();
        assert!(matches!(err, ChainError::NonMonotoneTimestamp { .. }));
    }

    #[test]
    fn balance_of_empty_history_is_zero() {
        let c = Blockchain::new("b1", 1);
        assert_eq!(c.balance_of("a1", "ETH"), Amount::ZERO);
    }

    #[test]
    fn balance_is_fold_of_history() {
        // history [Mint 5, Burn 2] on a -> 3
        let mut c = Blockchain::new("b1", 0);
        c.append_tx(Transaction::new(
            TxKind::Mint,
            "ETH",
            Amount(5),
            "x",
            "a",
            Tick(0),
        ))
        .unwrap();
        c.append_tx(Transaction::new(
            TxKind::Burn,
            "ETH",
            Amount(2),
            "a",
            "x",
            Tick(1),
        ))
        .unwrap();
        assert_eq!(c.balance_of("a", "ETH"), Amount(3));
        assert_eq!(*c.balances(), fold_balances(c.history()));
    }

    #[test]
    fn rollback_zero_is_identity() {
        let mut c = chain_with("a1", "ETH", 100);
        let before = c.clone();
        let reverted = c.rollback(0).unwrap();
        assert!(reverted.is_empty());
        assert_eq!(c.balances(), before.balances());
        assert_eq!(c.history().len(), before.history().len());
    }

    #[test]
    fn rollback_undoes_lock() {
        let mut c = chain_with("a1", "ETH", 100);
        c.append_tx(Transaction::new(
            TxKind::Lock,
            "ETH",
            Amount(40),
            "a1",
            "c1",
            Tick(1),
        ))
        .unwrap();
        let reverted = c.rollback(1).unwrap();
        assert_eq!(reverted.len(), 1);
        assert_eq!(reverted[0].kind, TxKind::Lock);
        assert_eq!(c.balance_of("a1", "ETH"), Amount(100));
        assert_eq!(c.balance_of("c1", "ETH"), Amount(0));
        assert_eq!(*c.balances(), fold_balances(c.history()));
    }

    #[test]
    fn rollback_depth_exceeding_history_is_rejected() {
        let mut c = chain_with("a1", "ETH", 100);
        assert!(matches!(
            c.rollback(2),
            Err(ChainError::DepthExceedsHistory { .. })
        ));
    }

    #[test]
    fn burn_reduces_total_supply() {
        let mut c = chain_with("a1", "ETH", 100);
        c.append_tx(Transaction::new(
            TxKind::Burn,
            "ETH",
            Amount(40),
            "a1",
            "void",
            Tick(1),
        ))
        .unwrap();
        assert_eq!(c.total_supply("ETH"), Amount(60));
    }

    #[test]
    fn zero_value_bridge_tx_rejected() {
        let mut c = chain_with("a1", "ETH", 100);
        let err = c
            .append_tx(Transaction::new(
                TxKind::Lock,
                "ETH",
                Amount(0),
                "a1",
                "c1",
                Tick(1),
            ))
            .unwrap_err();
        assert_eq!(err, ChainError::ZeroValueTransfer(TxKind::Lock));
    }

    #[test]
    fn uids_survive_rollback() {
        let mut c = chain_with("a1", "ETH", 100);
        c.append_tx(Transaction::new(
            TxKind::Plain,
            "ETH",
            Amount(1),
            "a1",
            "a2",
            Tick(1),
        ))
        .unwrap();
        c.rollback(1).unwrap();
        let id = c
            .append_tx(Transaction::new(
                TxKind::Plain,
                "ETH",
                Amount(1),
                "a1",
                "a2",
                Tick(1),
            ))
            .unwrap();
        // uid 2 was consumed by the reverted tx and is never reused
        assert_eq!(id.uid, 3);
    }

    #[test]
    fn mul_ppm_floor_is_exact() {
        // 0.025% of 10_000 = 2.5 -> floor 2
        assert_eq!(Amount(10_000).mul_ppm_floor(250).unwrap(), Amount(2));
        // 0.1% of 1_000_000 = 1000
        assert_eq!(
            Amount(1_000_000).mul_ppm_floor(1_000).unwrap(),
            Amount(1_000)
        );
        // full-range sanity: (2^127 / 1e6) * 1e6 fits
        assert!(Amount(1u128 << 127).mul_ppm_floor(1_000_000).is_ok());
    }
}
