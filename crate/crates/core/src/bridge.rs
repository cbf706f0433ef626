//! The bridge transfer state machine: fee computation, source-side lock or
//! burn, destination-side mint or release, the reverse process, and the
//! four-account transfer state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{
    Address, Amount, Blockchain, ChainError, ChainId, Nonce, Price, Tick, TokenId, Transaction,
    TxId, TxKind,
};
use crate::offchain::{verify_attestation, Attestation, OffchainMechanism};

/// Address where operator fees accumulate, including rounding remainders.
pub const FEE_SINK: &str = "bridge_operator_fees";
/// Credit side of burn transactions; never holds balance.
pub const BURN_SINK: &str = "burned";

/// One fee term: a fixed amount plus a proportional rate in parts-per-million
/// of the transferred value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeeTerm {
    #[serde(default)]
    pub fixed: Amount,
    #[serde(default)]
    pub rate_ppm: u32,
}

impl FeeTerm {
    pub fn fixed(v: u128) -> FeeTerm {
        FeeTerm {
            fixed: Amount(v),
            rate_ppm: 0,
        }
    }
    pub fn rate(ppm: u32) -> FeeTerm {
        FeeTerm {
            fixed: Amount::ZERO,
            rate_ppm: ppm,
        }
    }
}

/// Forward fee structure: processing fees on each chain plus the bridge
/// operation fee, with the proportional total clamped to [min_cap, max_cap].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeeSchedule {
    #[serde(default)]
    pub f1: FeeTerm,
    #[serde(default)]
    pub f2: FeeTerm,
    #[serde(default)]
    pub f_star: FeeTerm,
    #[serde(default)]
    pub min_cap: Amount,
    #[serde(default = "amount_max")]
    pub max_cap: Amount,
}

fn amount_max() -> Amount {
    Amount(u128::MAX)
}

impl Default for FeeSchedule {
    fn default() -> Self {
        FeeSchedule::zero()
    }
}

impl FeeSchedule {
    pub fn zero() -> FeeSchedule {
        FeeSchedule {
            f1: FeeTerm::default(),
            f2: FeeTerm::default(),
            f_star: FeeTerm::default(),
            min_cap: Amount::ZERO,
            max_cap: Amount::ZERO,
        }
    }

    /// Avalanche ERC-20 onboarding terms: 0.025% with a USD 3 floor and a
    /// USD 250 ceiling, in fiat-equivalent base units.
    pub fn avalanche_erc20() -> FeeSchedule {
        FeeSchedule {
            f1: FeeTerm::default(),
            f2: FeeTerm::default(),
            f_star: FeeTerm::rate(250),
            min_cap: Amount(3),
            max_cap: Amount(250),
        }
    }

    /// Multichain-to-Ethereum terms: 0.1% with a USD 40 floor and a USD 1000
    /// ceiling, in fiat-equivalent base units.
    pub fn multichain_ethereum() -> FeeSchedule {
        FeeSchedule {
            f1: FeeTerm::default(),
            f2: FeeTerm::default(),
            f_star: FeeTerm::rate(1_000),
            min_cap: Amount(40),
            max_cap: Amount(1_000),
        }
    }

    pub fn validate(&self) -> Result<(), BridgeError> {
        for term in [self.f1, self.f2, self.f_star] {
            if term.rate_ppm > 1_000_000 {
                return Err(BridgeError::InvalidSchedule("rate above 100%"));
            }
        }
        if self.min_cap > self.max_cap {
            return Err(BridgeError::InvalidSchedule("min_cap above max_cap"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fees {
    pub f1: Amount,
    pub f2: Amount,
    pub f_star: Amount,
}

impl Fees {
    pub fn total(&self) -> Amount {
        Amount(self.f1.0 + self.f2.0 + self.f_star.0)
    }
}

/// Each term is fixed + floor(rate * v_x); the proportional total is clamped
/// to [min_cap, max_cap], with the clamp correction landing on the bridge
/// operation fee first.
pub fn compute_fee(schedule: &FeeSchedule, v_x: Amount) -> Result<Fees, BridgeError> {
    schedule.validate()?;
    let mut p1 = v_x.mul_ppm_floor(schedule.f1.rate_ppm)?;
    let mut p2 = v_x.mul_ppm_floor(schedule.f2.rate_ppm)?;
    let mut ps = v_x.mul_ppm_floor(schedule.f_star.rate_ppm)?;
    let prop_total = p1.checked_add(p2)?.checked_add(ps)?;
    let clamped = prop_total.max(schedule.min_cap).min(schedule.max_cap);
    if clamped >= prop_total {
        ps = ps.checked_add(clamped.checked_sub(prop_total)?)?;
    } else {
        let mut cut = prop_total.checked_sub(clamped)?;
        for part in [&mut ps, &mut p1, &mut p2] {
            let take = (*part).min(cut);
            *part = part.checked_sub(take)?;
            cut = cut.checked_sub(take)?;
        }
    }
    Ok(Fees {
        f1: schedule.f1.fixed.checked_add(p1)?,
        f2: schedule.f2.fixed.checked_add(p2)?,
        f_star: schedule.f_star.fixed.checked_add(ps)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionalType {
    AssetLockMint,
    AssetBurnMint,
    LiquidityNetwork,
    Hybrid,
}

impl FunctionalType {
    /// Hybrid bridges settle their canonical leg like a lock-mint bridge.
    pub fn burns_on_source(self) -> bool {
        matches!(self, FunctionalType::AssetBurnMint)
    }
    pub fn is_liquidity(self) -> bool {
        matches!(self, FunctionalType::LiquidityNetwork)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceMechanism {
    SmartContract,
    ValidatorControl,
    HybridSrc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DestMechanism {
    SmartContract,
    ValidatorControl,
    Custodian,
    HybridDest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Reverse,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenPair {
    pub source_token: TokenId,
    pub dest_token: TokenId,
}

impl TokenPair {
    pub fn new(source: &str, dest: &str) -> TokenPair {
        TokenPair {
            source_token: source.into(),
            dest_token: dest.into(),
        }
    }

    /// Token issued on the chain where a settlement of `direction` lands.
    pub fn settled_token(&self, direction: Direction) -> &TokenId {
        match direction {
            Direction::Forward => &self.dest_token,
            Direction::Reverse => &self.source_token,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpReserves {
    pub source: Amount,
    pub dest: Amount,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeConfig {
    pub source_chain_id: ChainId,
    pub dest_chain_id: ChainId,
    pub functional_type: FunctionalType,
    pub source_mechanism: SourceMechanism,
    pub offchain: OffchainMechanism,
    pub dest_mechanism: DestMechanism,
    pub fees: FeeSchedule,
    /// Reverse transfers reuse the forward schedule shape; None means the
    /// forward terms apply in both directions.
    pub reverse_fees: Option<FeeSchedule>,
    pub d_off: u64,
    pub challenge_period: u64,
    pub buffer_delay: u64,
    pub breaker_cap: Option<Amount>,
    /// Bridge custody address c1 on the source chain.
    pub source_bridge_address: Address,
    /// Bridge custody address c2 on the destination chain.
    pub dest_bridge_address: Address,
    pub token_pairs: Vec<TokenPair>,
    pub lp_reserves: Option<LpReserves>,
    /// When set, settlements convert value units through the observed price
    /// pair instead of passing them 1:1. Required for oracle injections to
    /// have any effect.
    pub price_conversion: bool,
    /// Destination-side tracking of already-settled attestations.
    pub replay_tracking: bool,
    pub source_contract_count: u32,
    pub dest_contract_count: u32,
}

impl BridgeConfig {
    pub fn minimal(functional_type: FunctionalType, offchain: OffchainMechanism) -> BridgeConfig {
        BridgeConfig {
            source_chain_id: "b1".into(),
            dest_chain_id: "b2".into(),
            functional_type,
            source_mechanism: SourceMechanism::SmartContract,
            offchain,
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
        }
    }

    pub fn reverse_schedule(&self) -> &FeeSchedule {
        self.reverse_fees.as_ref().unwrap_or(&self.fees)
    }

    pub fn validate(&self) -> Result<(), BridgeError> {
        self.fees.validate()?;
        if let Some(rf) = &self.reverse_fees {
            rf.validate()?;
        }
        if self.token_pairs.is_empty() {
            return Err(BridgeError::InvalidSchedule("no token pairs configured"));
        }
        if self.functional_type.is_liquidity() && self.lp_reserves.is_none() {
            return Err(BridgeError::InvalidSchedule(
                "liquidity mode requires lp_reserves",
            ));
        }
        self.offchain.validate().map_err(BridgeError::Offchain)?;
        Ok(())
    }

    /// Custody address on the chain where a settlement of `direction` pays
    /// out: c2 for forward liquidity releases, c1 for reverse releases.
    pub fn custody_for(&self, direction: Direction) -> &Address {
        match direction {
            Direction::Forward => &self.dest_bridge_address,
            Direction::Reverse => &self.source_bridge_address,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransferStatus {
    Initiated,
    LockedOrBurned,
    Attested,
    BufferPending,
    ChallengePending,
    Completed,
    Reversed,
    Halted,
    Expired,
}

impl TransferStatus {
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            TransferStatus::Completed
                | TransferStatus::Reversed
                | TransferStatus::Halted
                | TransferStatus::Expired
        )
    }

    /// Legal next steps. Halted/Expired/Reversed are reachable from any
    /// non-terminal state; the honest path never skips a mandatory stage.
    pub fn can_advance_to(self, to: TransferStatus) -> bool {
        use TransferStatus::*;
        if self.is_terminal() {
            return false;
        }
        if matches!(to, Reversed | Halted | Expired) {
            return true;
        }
        matches!(
            (self, to),
            (Initiated, LockedOrBurned)
                | (LockedOrBurned, Attested)
                | (Attested, BufferPending)
                | (Attested, ChallengePending)
                | (Attested, Completed)
                | (BufferPending, ChallengePending)
                | (BufferPending, Completed)
                | (ChallengePending, Completed)
        )
    }
}

/// Lifecycle of one cross-chain transfer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub transfer_id: Nonce,
    pub direction: Direction,
    pub v_x: Amount,
    pub initiator: Address,
    pub recipient: Address,
    pub token_pair: TokenPair,
    pub status: TransferStatus,
    pub t_initiated: Option<Tick>,
    pub t_locked: Option<Tick>,
    pub t_attested: Option<Tick>,
    pub t_completed: Option<Tick>,
    pub fees_paid: Fees,
}

impl TransferRecord {
    pub fn advance(&mut self, to: TransferStatus) -> Result<(), BridgeError> {
        if !self.status.can_advance_to(to) {
            return Err(BridgeError::IllegalStatusTransition {
                from: self.status,
                to,
            });
        }
        self.status = to;
        Ok(())
    }
}

/// Snapshot of the four accounts a transfer touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferState {
    pub a1_balance: Amount,
    pub c1_balance: Amount,
    pub a2_balance: Amount,
    pub c2_balance: Amount,
}

impl TransferState {
    pub fn snapshot(
        cfg: &BridgeConfig,
        source: &Blockchain,
        dest: &Blockchain,
        a1: &str,
        a2: &str,
        pair: &TokenPair,
    ) -> TransferState {
        TransferState {
            a1_balance: source.balance_of(a1, &pair.source_token),
            c1_balance: source.balance_of(&cfg.source_bridge_address, &pair.source_token),
            a2_balance: dest.balance_of(a2, &pair.dest_token),
            c2_balance: dest.balance_of(&cfg.dest_bridge_address, &pair.dest_token),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BridgeError {
    #[error("insufficient balance: {address} holds {held}, transfer needs {needed}")]
    InsufficientBalance {
        address: Address,
        held: Amount,
        needed: Amount,
    },
    #[error("bridge is halted")]
    BridgeHalted,
    #[error("attestation rejected: {0}")]
    InvalidAttestation(String),
    #[error("liquidity exhausted: reserve holds {available}, settlement needs {needed}")]
    LiquidityExhausted { needed: Amount, available: Amount },
    #[error("no locked collateral: custody holds {available}, release needs {needed}")]
    NoLockedCollateral { needed: Amount, available: Amount },
    #[error("zero-value transfer")]
    ZeroTransfer,
    #[error("illegal status transition {from:?} -> {to:?}")]
    IllegalStatusTransition {
        from: TransferStatus,
        to: TransferStatus,
    },
    #[error("invalid configuration: {0}")]
    InvalidSchedule(&'static str),
    #[error("price conversion overflow")]
    PriceOverflow,
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Offchain(crate::offchain::OffchainError),
}

/// Source-side initiation: lock (or burn) v_x and pay the initiating-side
/// fees f1 + f*. The destination fee f2 is later withheld from the payout.
#[allow(clippy::too_many_arguments)]
pub fn initiate_transfer(
    cfg: &BridgeConfig,
    source: &mut Blockchain,
    nonce: Nonce,
    from: &str,
    recipient: &str,
    v_x: Amount,
    pair: &TokenPair,
    now: Tick,
    provenance: crate::chain::Provenance,
    halted: bool,
) -> Result<TransferRecord, BridgeError> {
    if halted {
        return Err(BridgeError::BridgeHalted);
    }
    if v_x.is_zero() {
        return Err(BridgeError::ZeroTransfer);
    }
    let fees = compute_fee(&cfg.fees, v_x)?;
    let upfront = v_x.checked_add(fees.f1)?.checked_add(fees.f_star)?;
    let held = source.balance_of(from, &pair.source_token);
    if held < upfront {
        return Err(BridgeError::InsufficientBalance {
            address: from.to_string(),
            held,
            needed: upfront,
        });
    }

    let kind = if cfg.functional_type.burns_on_source() {
        TxKind::Burn
    } else {
        TxKind::Lock
    };
    let to = if kind == TxKind::Burn {
        BURN_SINK.to_string()
    } else {
        cfg.source_bridge_address.clone()
    };
    source.append_tx(
        Transaction::new(kind, pair.source_token.clone(), v_x, from, to, now)
            .with_nonce(nonce)
            .with_provenance(provenance),
    )?;
    let upfront_fees = fees.f1.checked_add(fees.f_star)?;
    if !upfront_fees.is_zero() {
        source.append_tx(
            Transaction::new(
                TxKind::Plain,
                pair.source_token.clone(),
                upfront_fees,
                from,
                FEE_SINK,
                now,
            )
            .with_provenance(provenance),
        )?;
    }

    Ok(TransferRecord {
        transfer_id: nonce,
        direction: Direction::Forward,
        v_x,
        initiator: from.to_string(),
        recipient: recipient.to_string(),
        token_pair: pair.clone(),
        status: TransferStatus::Initiated,
        t_initiated: Some(now),
        t_locked: None,
        t_attested: None,
        t_completed: None,
        fees_paid: fees,
    })
}

/// Destination-side initiation of the reverse process: burn (or deposit) the
/// wrapped value and pay the initiating-side fees f2 + f*. The source fee f1
/// is withheld from the release.
#[allow(clippy::too_many_arguments)]
pub fn initiate_reverse(
    cfg: &BridgeConfig,
    dest: &mut Blockchain,
    nonce: Nonce,
    from: &str,
    recipient: &str,
    v_x: Amount,
    pair: &TokenPair,
    now: Tick,
    provenance: crate::chain::Provenance,
    halted: bool,
    outstanding_wrapped: Amount,
) -> Result<TransferRecord, BridgeError> {
    if halted {
        return Err(BridgeError::BridgeHalted);
    }
    if v_x.is_zero() {
        return Err(BridgeError::ZeroTransfer);
    }
    let fees = compute_fee(cfg.reverse_schedule(), v_x)?;
    let upfront = v_x.checked_add(fees.f2)?.checked_add(fees.f_star)?;
    let held = dest.balance_of(from, &pair.dest_token);
    if held < upfront {
        return Err(BridgeError::InsufficientBalance {
            address: from.to_string(),
            held,
            needed: upfront,
        });
    }
    if !cfg.functional_type.is_liquidity() && outstanding_wrapped < v_x {
        return Err(BridgeError::NoLockedCollateral {
            needed: v_x,
            available: outstanding_wrapped,
        });
    }

    if cfg.functional_type.is_liquidity() {
        // Reverse deposit replenishes the destination reserve.
        dest.append_tx(
            Transaction::new(
                TxKind::Lock,
                pair.dest_token.clone(),
                v_x,
                from,
                cfg.dest_bridge_address.clone(),
                now,
            )
            .with_nonce(nonce)
            .with_provenance(provenance),
        )?;
    } else {
        dest.append_tx(
            Transaction::new(
                TxKind::Burn,
                pair.dest_token.clone(),
                v_x,
                from,
                BURN_SINK,
                now,
            )
            .with_nonce(nonce)
            .with_provenance(provenance),
        )?;
    }
    let upfront_fees = fees.f2.checked_add(fees.f_star)?;
    if !upfront_fees.is_zero() {
        dest.append_tx(
            Transaction::new(
                TxKind::Plain,
                pair.dest_token.clone(),
                upfront_fees,
                from,
                FEE_SINK,
                now,
            )
            .with_provenance(provenance),
        )?;
    }

    Ok(TransferRecord {
        transfer_id: nonce,
        direction: Direction::Reverse,
        v_x,
        initiator: from.to_string(),
        recipient: recipient.to_string(),
        token_pair: pair.clone(),
        status: TransferStatus::Initiated,
        t_initiated: Some(now),
        t_locked: None,
        t_attested: None,
        t_completed: None,
        fees_paid: fees,
    })
}

/// Value-unit conversion through a price pair, rounding down.
fn convert_units(value: Amount, from_price: Price, to_price: Price) -> Result<Amount, BridgeError> {
    use num_bigint::BigUint;
    // value * from.num/from.den = x * to.num/to.den
    let num = BigUint::from(value.0) * BigUint::from(from_price.num) * BigUint::from(to_price.den);
    let den = BigUint::from(from_price.den) * BigUint::from(to_price.num);
    if den == BigUint::from(0u8) {
        return Err(BridgeError::PriceOverflow);
    }
    let out = num / den;
    let digits = out.to_u64_digits();
    match digits.len() {
        0 => Ok(Amount::ZERO),
        1 => Ok(Amount(digits[0] as u128)),
        2 => Ok(Amount((digits[1] as u128) << 64 | digits[0] as u128)),
        _ => Err(BridgeError::PriceOverflow),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PendingWindow {
    Buffer,
    Challenge,
}

/// What a settlement attempt produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SettleOutcome {
    /// Value cap exceeded: nothing settled, bridge halts.
    Halted,
    /// Settlement landed on-chain but stays revocable until `finalize_at`.
    Pending {
        window: PendingWindow,
        finalize_at: Tick,
        payout: Amount,
        fee_withheld: Amount,
        tx_ids: Vec<TxId>,
    },
    Finalized {
        payout: Amount,
        fee_withheld: Amount,
        tx_ids: Vec<TxId>,
    },
}

/// Settle an attested transfer on the target chain: mint v_x - f2 (asset
/// modes), release from reserves (liquidity), or release collateral for the
/// reverse direction. `force_accept` models adversarially forced settlement
/// that bypasses the off-chain verifier (contract-level flaws).
#[allow(clippy::too_many_arguments)]
pub fn settle(
    cfg: &BridgeConfig,
    offchain: &OffchainMechanism,
    att: &Attestation,
    target: &mut Blockchain,
    observed_prices: &BTreeMap<TokenId, Price>,
    now: Tick,
    provenance: crate::chain::Provenance,
    breaker_cap: Option<Amount>,
    buffer_delay: u64,
    challenge_period: u64,
    halted: bool,
    force_accept: bool,
) -> Result<SettleOutcome, BridgeError> {
    if halted {
        return Err(BridgeError::BridgeHalted);
    }
    if !force_accept {
        let verdict = verify_attestation(offchain, att, &target.chain_id);
        if !verdict.accepted {
            return Err(BridgeError::InvalidAttestation(verdict.reason));
        }
    }
    if let Some(cap) = breaker_cap {
        if att.claimed_value > cap {
            return Ok(SettleOutcome::Halted);
        }
    }

    let (payout, fee_withheld, tx_ids) =
        apply_settlement(cfg, att, target, observed_prices, now, provenance)?;

    if buffer_delay > 0 {
        Ok(SettleOutcome::Pending {
            window: PendingWindow::Buffer,
            finalize_at: now.plus(buffer_delay),
            payout,
            fee_withheld,
            tx_ids,
        })
    } else if challenge_period > 0 {
        Ok(SettleOutcome::Pending {
            window: PendingWindow::Challenge,
            finalize_at: now.plus(challenge_period),
            payout,
            fee_withheld,
            tx_ids,
        })
    } else {
        Ok(SettleOutcome::Finalized {
            payout,
            fee_withheld,
            tx_ids,
        })
    }
}

fn apply_settlement(
    cfg: &BridgeConfig,
    att: &Attestation,
    target: &mut Blockchain,
    observed_prices: &BTreeMap<TokenId, Price>,
    now: Tick,
    provenance: crate::chain::Provenance,
) -> Result<(Amount, Amount, Vec<TxId>), BridgeError> {
    let pair = &att.token_pair;
    let schedule = match att.direction {
        Direction::Forward => &cfg.fees,
        Direction::Reverse => cfg.reverse_schedule(),
    };
    let fees = compute_fee(schedule, att.claimed_value)?;
    // The settled-side processing fee is withheld from the payout.
    let fee_withheld = match att.direction {
        Direction::Forward => fees.f2,
        Direction::Reverse => fees.f1,
    };
    let mut payout = att
        .claimed_value
        .checked_sub(fee_withheld.min(att.claimed_value))?;
    let settled_token = pair.settled_token(att.direction).clone();

    if cfg.price_conversion {
        let from_token = match att.direction {
            Direction::Forward => &pair.source_token,
            Direction::Reverse => &pair.dest_token,
        };
        let from_price = observed_prices
            .get(from_token)
            .copied()
            .unwrap_or(Price::one());
        let to_price = observed_prices
            .get(&settled_token)
            .copied()
            .unwrap_or(Price::one());
        payout = convert_units(payout, from_price, to_price)?;
    }

    let mut tx_ids = Vec::new();
    match (att.direction, cfg.functional_type) {
        (Direction::Forward, FunctionalType::LiquidityNetwork) => {
            let reserve = target.balance_of(&cfg.dest_bridge_address, &settled_token);
            let total_out = payout.checked_add(fee_withheld)?;
            if reserve < total_out {
                return Err(BridgeError::LiquidityExhausted {
                    needed: total_out,
                    available: reserve,
                });
            }
            tx_ids.push(
                target.append_tx(
                    Transaction::new(
                        TxKind::Release,
                        settled_token.clone(),
                        payout,
                        cfg.dest_bridge_address.clone(),
                        att.claimed_recipient.clone(),
                        now,
                    )
                    .with_nonce(att.transfer_id)
                    .with_provenance(provenance),
                )?,
            );
            if !fee_withheld.is_zero() {
                tx_ids.push(
                    target.append_tx(
                        Transaction::new(
                            TxKind::Release,
                            settled_token.clone(),
                            fee_withheld,
                            cfg.dest_bridge_address.clone(),
                            FEE_SINK,
                            now,
                        )
                        .with_nonce(att.transfer_id)
                        .with_provenance(provenance),
                    )?,
                );
            }
        }
        (Direction::Forward, _) => {
            tx_ids.push(
                target.append_tx(
                    Transaction::new(
                        TxKind::Mint,
                        settled_token.clone(),
                        payout,
                        cfg.dest_bridge_address.clone(),
                        att.claimed_recipient.clone(),
                        now,
                    )
                    .with_nonce(att.transfer_id)
                    .with_provenance(provenance),
                )?,
            );
        }
        (Direction::Reverse, FunctionalType::AssetBurnMint) => {
            // Burn-mint bridges re-issue the source token.
            tx_ids.push(
                target.append_tx(
                    Transaction::new(
                        TxKind::Mint,
                        settled_token.clone(),
                        payout,
                        cfg.source_bridge_address.clone(),
                        att.claimed_recipient.clone(),
                        now,
                    )
                    .with_nonce(att.transfer_id)
                    .with_provenance(provenance),
                )?,
            );
            if !fee_withheld.is_zero() {
                tx_ids.push(
                    target.append_tx(
                        Transaction::new(
                            TxKind::Mint,
                            settled_token.clone(),
                            fee_withheld,
                            cfg.source_bridge_address.clone(),
                            FEE_SINK,
                            now,
                        )
                        .with_nonce(att.transfer_id)
                        .with_provenance(provenance),
                    )?,
                );
            }
        }
        (Direction::Reverse, _) => {
            let custody = cfg.source_bridge_address.clone();
            let available = target.balance_of(&custody, &settled_token);
            let total_out = payout.checked_add(fee_withheld)?;
            if available < total_out {
                return Err(BridgeError::NoLockedCollateral {
                    needed: total_out,
                    available,
                });
            }
            tx_ids.push(
                target.append_tx(
                    Transaction::new(
                        TxKind::Release,
                        settled_token.clone(),
                        payout,
                        custody.clone(),
                        att.claimed_recipient.clone(),
                        now,
                    )
                    .with_nonce(att.transfer_id)
                    .with_provenance(provenance),
                )?,
            );
            if !fee_withheld.is_zero() {
                tx_ids.push(
                    target.append_tx(
                        Transaction::new(
                            TxKind::Release,
                            settled_token.clone(),
                            fee_withheld,
                            custody,
                            FEE_SINK,
                            now,
                        )
                        .with_nonce(att.transfer_id)
                        .with_provenance(provenance),
                    )?,
                );
            }
        }
    }
    Ok((payout, fee_withheld, tx_ids))
}

/// Undo a still-pending settlement: burn back a minted payout or return a
/// released payout to custody. Recovers at most what the recipient (and fee
/// sink) still hold; returns the amount actually recovered from the
/// recipient side.
#[allow(clippy::too_many_arguments)]
pub fn claw_back(
    cfg: &BridgeConfig,
    target: &mut Blockchain,
    direction: Direction,
    nonce: Nonce,
    pair: &TokenPair,
    recipient: &str,
    payout: Amount,
    fee_withheld: Amount,
    now: Tick,
) -> Result<Amount, BridgeError> {
    let settled_token = pair.settled_token(direction).clone();
    let is_mint_back = match (direction, cfg.functional_type) {
        (Direction::Forward, FunctionalType::LiquidityNetwork) => false,
        (Direction::Forward, _) => true,
        (Direction::Reverse, FunctionalType::AssetBurnMint) => true,
        (Direction::Reverse, _) => false,
    };
    let custody = cfg.custody_for(direction).clone();

    let recoverable = payout.min(target.balance_of(recipient, &settled_token));
    if !recoverable.is_zero() {
        if is_mint_back {
            target.append_tx(
                Transaction::new(
                    TxKind::Burn,
                    settled_token.clone(),
                    recoverable,
                    recipient,
                    BURN_SINK,
                    now,
                )
                .with_nonce(nonce),
            )?;
        } else {
            target.append_tx(
                Transaction::new(
                    TxKind::Plain,
                    settled_token.clone(),
                    recoverable,
                    recipient,
                    custody.clone(),
                    now,
                )
                .with_nonce(nonce),
            )?;
        }
    }
    let fee_recoverable = fee_withheld.min(target.balance_of(FEE_SINK, &settled_token));
    if !fee_recoverable.is_zero() {
        if is_mint_back {
            target.append_tx(
                Transaction::new(
                    TxKind::Burn,
                    settled_token.clone(),
                    fee_recoverable,
                    FEE_SINK,
                    BURN_SINK,
                    now,
                )
                .with_nonce(nonce),
            )?;
        } else {
            target.append_tx(
                Transaction::new(
                    TxKind::Plain,
                    settled_token,
                    fee_recoverable,
                    FEE_SINK,
                    custody,
                    now,
                )
                .with_nonce(nonce),
            )?;
        }
    }
    Ok(recoverable)
}
