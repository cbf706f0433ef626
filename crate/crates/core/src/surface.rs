//! Attack-surface calculus: damage/effort ratios, per-vector viability,
//! per-layer surface areas, and total surface assembly from the 23-vector
//! catalog.
//!
//! The raw ratio and the viability indicator are kept separate: a vector is
//! viable iff impact strictly exceeds effort, and layer areas sum viability
//! indicators, one term per concrete surface the vector targets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::{BridgeConfig, DestMechanism, SourceMechanism};
use crate::offchain::{trust_set_of, OffchainMechanism, TrustEntity, TrustSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VectorId(pub u8);

impl Serialize for VectorId {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for VectorId {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl VectorId {
    pub fn label(self) -> String {
        format!("V{}", self.0)
    }

    /// Vectors the adversary module can actually fire; the rest are
    /// catalog-only (code- or UI-level semantics the simulator does not
    /// model).
    pub fn is_executable(self) -> bool {
        matches!(
            self.0,
            3 | 8 | 9 | 10 | 11 | 12 | 13 | 15 | 17 | 18 | 19 | 20 | 21 | 22
        )
    }
}

impl std::fmt::Display for VectorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "V{}", self.0)
    }
}

impl std::str::FromStr for VectorId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n: u8 = s
            .trim_start_matches(['V', 'v'])
            .parse()
            .map_err(|_| format!("invalid vector id {s:?}"))?;
        if (1..=23).contains(&n) {
            Ok(VectorId(n))
        } else {
            Err(format!("vector id out of range: {s:?}"))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layer {
    SourceChain,
    OffChain,
    DestinationChain,
}

impl std::str::FromStr for Layer {
    type Err = SurfaceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "source" | "source_chain" | "src" => Ok(Layer::SourceChain),
            "offchain" | "off_chain" | "off" => Ok(Layer::OffChain),
            "destination" | "destination_chain" | "dest" => Ok(Layer::DestinationChain),
            other => Err(SurfaceError::UnknownLayer(other.to_string())),
        }
    }
}

/// Whether a vector applies on a layer, and whether that application is
/// conditional on the bridge actually deploying the relevant component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerFlag {
    Absent,
    Applies,
    /// The dagger: only when the component (oracle, custodian, keys,
    /// validators) exists in the architecture.
    Conditional,
}

/// What kind of concrete surface the vector targets; drives the term count
/// in layer areas (one term per deployed contract, one for a custodian, one
/// otherwise).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceKind {
    Contract,
    Custodian,
    Generic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackVectorSpec {
    pub id: VectorId,
    pub name: String,
    pub source: LayerFlag,
    pub offchain: LayerFlag,
    pub destination: LayerFlag,
    pub kind: SurfaceKind,
    /// Expected damage in fiat units. Shipped catalog values are
    /// illustrative: the documented loss of the matched incident where one
    /// exists, zero otherwise.
    pub impact: u128,
    /// Effort in fiat-equivalent units; must stay positive.
    pub effort: u128,
    pub executable: bool,
}

impl AttackVectorSpec {
    pub fn conditional(&self) -> bool {
        self.source == LayerFlag::Conditional
            || self.offchain == LayerFlag::Conditional
            || self.destination == LayerFlag::Conditional
    }

    fn flag(&self, layer: Layer) -> LayerFlag {
        match layer {
            Layer::SourceChain => self.source,
            Layer::OffChain => self.offchain,
            Layer::DestinationChain => self.destination,
        }
    }
}

/// Exact damage/effort ratio as a reduced fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u128,
    pub den: u128,
}

impl Ratio {
    fn reduced(num: u128, den: u128) -> Ratio {
        match gcd(num, den) {
            0 => Ratio { num, den },
            g => Ratio {
                num: num / g,
                den: den / g,
            },
        }
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("attack vector {0} has zero effort")]
    ZeroEffort(VectorId),
    #[error("unknown layer {0:?}")]
    UnknownLayer(String),
}

/// der(V) = impact/effort, exact; viable iff the ratio strictly exceeds 1.
pub fn damage_effort_ratio(v: &AttackVectorSpec) -> Result<(Ratio, bool), SurfaceError> {
    if v.effort == 0 {
        return Err(SurfaceError::ZeroEffort(v.id));
    }
    let ratio = Ratio::reduced(v.impact, v.effort);
    Ok((ratio, v.impact > v.effort))
}

fn vector(
    id: u8,
    name: &str,
    source: LayerFlag,
    offchain: LayerFlag,
    destination: LayerFlag,
    kind: SurfaceKind,
    impact: u128,
) -> AttackVectorSpec {
    AttackVectorSpec {
        id: VectorId(id),
        name: name.to_string(),
        source,
        offchain,
        destination,
        kind,
        impact,
        effort: 1,
        executable: VectorId(id).is_executable(),
    }
}

/// The full 23-vector catalog with its per-layer applicability flags.
/// Impact figures are the documented incident losses in USD where a matched
/// incident exists (illustrative placeholders, not estimates); effort
/// defaults to one unit so every area property stays unit-independent.
pub fn shipped_catalog() -> Vec<AttackVectorSpec> {
    use LayerFlag::{Absent as N, Applies as Y, Conditional as C};
    use SurfaceKind::{Contract, Custodian, Generic};
    vec![
        vector(1, "Reentrancy attacks", Y, N, Y, Contract, 0),
        vector(
            2,
            "Integer and arithmetic errors",
            Y,
            N,
            Y,
            Contract,
            9_730_000,
        ),
        vector(
            3,
            "Access control and forged account flaws",
            Y,
            N,
            Y,
            Contract,
            80_000_000,
        ),
        vector(4, "Race condition attacks", Y, N, Y, Contract, 12_000_000),
        vector(
            5,
            "Unsafe external call exploits",
            Y,
            N,
            Y,
            Contract,
            2_000_000,
        ),
        vector(
            6,
            "Malicious event log manipulation",
            Y,
            N,
            Y,
            Contract,
            13_000_000,
        ),
        vector(7, "Contract upgrade risks", Y, N, Y, Contract, 220_000),
        vector(8, "Fake burn/lock proofs", Y, Y, Y, Generic, 0),
        vector(
            9,
            "Malicious transaction modification",
            Y,
            Y,
            Y,
            Generic,
            611_000_000,
        ),
        vector(
            10,
            "Light-client verification flaws",
            Y,
            Y,
            Y,
            Generic,
            190_000_000,
        ),
        vector(11, "Oracle manipulation", C, Y, C, Generic, 0),
        vector(
            12,
            "Malicious custodian manipulation",
            C,
            Y,
            C,
            Custodian,
            326_000_000,
        ),
        vector(
            13,
            "Private key leakage or theft",
            C,
            C,
            C,
            Generic,
            624_000_000,
        ),
        vector(14, "Timestamp manipulation", Y, N, Y, Generic, 0),
        vector(15, "Replay attacks", N, Y, Y, Generic, 290_000),
        vector(16, "Consensus failure (51% attack)", Y, N, Y, Generic, 0),
        vector(17, "Delayed finality exploitation", Y, N, Y, Generic, 0),
        vector(
            18,
            "Validator equivocation or misbehavior",
            C,
            Y,
            C,
            Generic,
            0,
        ),
        vector(19, "Denial of Service attacks", Y, Y, Y, Generic, 0),
        vector(20, "Deep chain reorganization", Y, N, Y, Generic, 0),
        vector(21, "Unbounded withdrawal limits", Y, N, Y, Generic, 0),
        vector(22, "Rugpull", N, Y, C, Custodian, 0),
        vector(23, "Front-end deception", N, Y, N, Generic, 240_000),
    ]
}

/// Vectors routed to the bridge-wide bucket rather than a chain layer:
/// governance/upgrade risks and operator rugpulls.
fn is_other_vector(id: VectorId) -> bool {
    matches!(id.0, 7 | 22)
}

fn has_notary(mech: &OffchainMechanism) -> bool {
    match mech {
        OffchainMechanism::Notary(_) => true,
        OffchainMechanism::LightClient(_) | OffchainMechanism::Sidechain(_) => false,
        OffchainMechanism::HybridAnd { first, second }
        | OffchainMechanism::HybridOr { first, second } => has_notary(first) || has_notary(second),
    }
}

fn has_light_client(mech: &OffchainMechanism) -> bool {
    match mech {
        OffchainMechanism::LightClient(_) => true,
        OffchainMechanism::Notary(_) | OffchainMechanism::Sidechain(_) => false,
        OffchainMechanism::HybridAnd { first, second }
        | OffchainMechanism::HybridOr { first, second } => {
            has_light_client(first) || has_light_client(second)
        }
    }
}

fn has_external_sidechain(mech: &OffchainMechanism) -> bool {
    match mech {
        OffchainMechanism::Sidechain(sc) => !sc.native,
        OffchainMechanism::Notary(_) | OffchainMechanism::LightClient(_) => false,
        OffchainMechanism::HybridAnd { first, second }
        | OffchainMechanism::HybridOr { first, second } => {
            has_external_sidechain(first) || has_external_sidechain(second)
        }
    }
}

fn contract_count(cfg: &BridgeConfig, layer: Layer) -> u32 {
    match layer {
        Layer::SourceChain => match cfg.source_mechanism {
            SourceMechanism::ValidatorControl => 0,
            _ => cfg.source_contract_count,
        },
        Layer::DestinationChain => match cfg.dest_mechanism {
            DestMechanism::ValidatorControl => 0,
            // custodial destinations keep their deployed mint contracts
            _ => cfg.dest_contract_count,
        },
        Layer::OffChain => 0,
    }
}

fn custodian_present(cfg: &BridgeConfig, layer: Layer) -> bool {
    layer == Layer::DestinationChain && cfg.dest_mechanism == DestMechanism::Custodian
}

/// The dagger rule plus mechanism compatibility: does this vector have a
/// concrete surface on this layer of this bridge?
fn applies(v: &AttackVectorSpec, layer: Layer, cfg: &BridgeConfig, trust: &TrustSet) -> bool {
    let flag = v.flag(layer);
    if flag == LayerFlag::Absent {
        return false;
    }

    // conditional vectors need their component deployed
    let component_present = match v.id.0 {
        // oracle-fed pricing
        11 => layer == Layer::OffChain || cfg.price_conversion,
        // custodial control on the layer
        12 => match layer {
            Layer::OffChain => has_notary(&cfg.offchain),
            _ => custodian_present(cfg, layer),
        },
        // held keys: notary keys off-chain, custodian keys on-chain
        13 => match layer {
            Layer::OffChain => has_notary(&cfg.offchain),
            _ => custodian_present(cfg, layer),
        },
        // external validators or relays that can equivocate
        18 => match layer {
            Layer::OffChain => has_notary(&cfg.offchain) || has_external_sidechain(&cfg.offchain),
            _ => !trust.all_entities().is_empty() && custodian_present(cfg, layer),
        },
        // an operator able to rug requires some trusted entity
        22 => match layer {
            Layer::OffChain => !trust.off_entities.is_empty(),
            _ => custodian_present(cfg, layer),
        },
        _ => true,
    };
    if flag == LayerFlag::Conditional && !component_present {
        return false;
    }
    if v.id.0 == 11 && layer == Layer::OffChain && !cfg.price_conversion {
        // oracle vector without an oracle in the architecture
        return false;
    }
    if v.id.0 == 18 && layer == Layer::OffChain && !component_present {
        return false;
    }
    if v.id.0 == 10 && !has_light_client(&cfg.offchain) {
        // light-client flaws need a light client somewhere in the path
        return false;
    }

    // contract-kind vectors need a contract on the layer
    if v.kind == SurfaceKind::Contract && contract_count(cfg, layer) == 0 {
        return false;
    }
    if v.kind == SurfaceKind::Custodian
        && layer != Layer::OffChain
        && !custodian_present(cfg, layer)
    {
        return false;
    }

    // off-chain layer surfaces collapse to the mechanism actually deployed
    if layer == Layer::OffChain {
        return offchain_vector_applies(v.id, &cfg.offchain);
    }
    true
}

/// Per-mechanism off-chain surface membership. A light-client off-chain
/// layer exposes a single verification surface; an external sidechain
/// exposes its consensus; a notary network exposes the full message path.
fn offchain_vector_applies(id: VectorId, mech: &OffchainMechanism) -> bool {
    match mech {
        OffchainMechanism::Notary(_) => id.0 != 10, // all notary-path vectors
        OffchainMechanism::LightClient(_) => id.0 == 10,
        OffchainMechanism::Sidechain(sc) => !sc.native && id.0 == 18,
        OffchainMechanism::HybridAnd { first, second }
        | OffchainMechanism::HybridOr { first, second } => {
            offchain_vector_applies(id, first) || offchain_vector_applies(id, second)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorScore {
    pub id: VectorId,
    pub name: String,
    pub ratio: Ratio,
    pub viable: bool,
    /// Concrete surfaces the vector targets on this layer (deployed
    /// contracts count once each, a custodian once).
    pub multiplicity: u32,
    pub contribution: u128,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerBreakdown {
    pub entries: Vec<VectorScore>,
    pub area: u128,
}

/// Surface area contribution of one layer: the sum of viability indicators
/// over the applicable vectors, one term per concrete surface.
pub fn layer_area(
    cfg: &BridgeConfig,
    layer: Layer,
    catalog: &[AttackVectorSpec],
) -> Result<LayerBreakdown, SurfaceError> {
    let trust = trust_set_of(cfg);
    let mut breakdown = LayerBreakdown::default();
    for v in catalog {
        if is_other_vector(v.id) || !applies(v, layer, cfg, &trust) {
            continue;
        }
        let (ratio, viable) = damage_effort_ratio(v)?;
        let multiplicity = match v.kind {
            SurfaceKind::Contract => contract_count(cfg, layer),
            SurfaceKind::Custodian if layer != Layer::OffChain => 1,
            _ => 1,
        };
        let contribution = if viable { multiplicity as u128 } else { 0 };
        breakdown.area += contribution;
        breakdown.entries.push(VectorScore {
            id: v.id,
            name: v.name.clone(),
            ratio,
            viable,
            multiplicity,
            contribution,
        });
    }
    Ok(breakdown)
}

/// Bridge-wide vectors outside the three chain layers: protocol upgrades,
/// governance failures, rugpulls. Counted once each.
fn other_area(
    cfg: &BridgeConfig,
    catalog: &[AttackVectorSpec],
) -> Result<LayerBreakdown, SurfaceError> {
    let trust = trust_set_of(cfg);
    let mut breakdown = LayerBreakdown::default();
    for v in catalog {
        if !is_other_vector(v.id) {
            continue;
        }
        let anywhere = [Layer::SourceChain, Layer::OffChain, Layer::DestinationChain]
            .into_iter()
            .any(|layer| applies(v, layer, cfg, &trust));
        if !anywhere {
            continue;
        }
        let (ratio, viable) = damage_effort_ratio(v)?;
        let contribution = u128::from(viable);
        breakdown.area += contribution;
        breakdown.entries.push(VectorScore {
            id: v.id,
            name: v.name.clone(),
            ratio,
            viable,
            multiplicity: 1,
            contribution,
        });
    }
    Ok(breakdown)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceReport {
    pub source: LayerBreakdown,
    pub offchain: LayerBreakdown,
    pub destination: LayerBreakdown,
    pub other: LayerBreakdown,
    pub area_total: u128,
    pub trust: TrustSet,
    /// Qualitative scaling relations for the off-chain mechanisms; reported
    /// as annotations, never computed.
    pub annotations: Vec<String>,
    /// A vector spanning several layers counts once per layer it applies
    /// to; disclosed because either convention is defensible.
    pub spanning_policy: String,
}

/// Assemble the total surface: per-layer areas plus the bridge-wide bucket.
pub fn total_area(
    cfg: &BridgeConfig,
    catalog: &[AttackVectorSpec],
) -> Result<SurfaceReport, SurfaceError> {
    let source = layer_area(cfg, Layer::SourceChain, catalog)?;
    let offchain = layer_area(cfg, Layer::OffChain, catalog)?;
    let destination = layer_area(cfg, Layer::DestinationChain, catalog)?;
    let other = other_area(cfg, catalog)?;
    let area_total = source.area + offchain.area + destination.area + other.area;

    let mut annotations = vec![
        "notary: E[C] scales with 1/Size(N); F and D scale with Size(N) and Cost(N)".to_string(),
        "light client: E[C] scales with 1/t_proof; F and D scale with t_proof".to_string(),
    ];
    if has_external_sidechain(&cfg.offchain) {
        annotations
            .push("sidechain: off-chain surface vanishes iff relay consensus risk is zero".into());
    }

    Ok(SurfaceReport {
        source,
        offchain,
        destination,
        other,
        area_total,
        trust: trust_set_of(cfg),
        annotations,
        spanning_policy: "per-layer".to_string(),
    })
}

/// Trust entities with standing keys or custody; trustless bridges have
/// none, which is what keeps key/custodian vectors off their surface.
pub fn key_bearing_entities(trust: &TrustSet) -> Vec<TrustEntity> {
    trust
        .all_entities()
        .into_iter()
        .filter(|e| matches!(e, TrustEntity::Notary | TrustEntity::Custodian))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::FunctionalType;
    use crate::offchain::{LightClientModel, NotarySet, SidechainModel};

    fn custom(
        id: u8,
        layers: (LayerFlag, LayerFlag, LayerFlag),
        i: u128,
        e: u128,
    ) -> AttackVectorSpec {
        AttackVectorSpec {
            id: VectorId(id),
            name: format!("test vector {id}"),
            source: layers.0,
            offchain: layers.1,
            destination: layers.2,
            kind: SurfaceKind::Generic,
            impact: i,
            effort: e,
            executable: false,
        }
    }

    #[test]
    fn ratio_and_viability() {
        let v = custom(
            14,
            (LayerFlag::Applies, LayerFlag::Absent, LayerFlag::Applies),
            2,
            1,
        );
        let (r, viable) = damage_effort_ratio(&v).unwrap();
        assert_eq!(r, Ratio { num: 2, den: 1 });
        assert!(viable);

        let boundary = custom(
            14,
            (LayerFlag::Applies, LayerFlag::Absent, LayerFlag::Applies),
            7,
            7,
        );
        let (r, viable) = damage_effort_ratio(&boundary).unwrap();
        assert_eq!(r, Ratio { num: 1, den: 1 });
        assert!(!viable, "viability needs a strict inequality");

        let zero = custom(
            14,
            (LayerFlag::Applies, LayerFlag::Absent, LayerFlag::Applies),
            0,
            3,
        );
        let (r, viable) = damage_effort_ratio(&zero).unwrap();
        assert_eq!(r, Ratio { num: 0, den: 1 });
        assert!(!viable);
    }

    #[test]
    fn zero_effort_is_an_error() {
        let mut v = custom(
            14,
            (LayerFlag::Applies, LayerFlag::Absent, LayerFlag::Absent),
            5,
            1,
        );
        v.effort = 0;
        assert_eq!(
            damage_effort_ratio(&v).unwrap_err(),
            SurfaceError::ZeroEffort(VectorId(14))
        );
    }

    #[test]
    fn viability_is_scale_invariant() {
        for (i, e) in [(3u128, 2u128), (1, 5), (100, 100)] {
            let base = custom(
                14,
                (LayerFlag::Applies, LayerFlag::Absent, LayerFlag::Absent),
                i,
                e,
            );
            let scaled = custom(
                14,
                (LayerFlag::Applies, LayerFlag::Absent, LayerFlag::Absent),
                i * 7,
                e * 7,
            );
            let (rb, vb) = damage_effort_ratio(&base).unwrap();
            let (rs, vs) = damage_effort_ratio(&scaled).unwrap();
            assert_eq!(vb, vs);
            assert_eq!(rb, rs, "reduced ratios are identical");
        }
    }

    #[test]
    fn catalog_matches_layer_flags() {
        let catalog = shipped_catalog();
        assert_eq!(catalog.len(), 23);
        let executable: Vec<u8> = catalog
            .iter()
            .filter(|v| v.executable)
            .map(|v| v.id.0)
            .collect();
        assert_eq!(
            executable,
            vec![3, 8, 9, 10, 11, 12, 13, 15, 17, 18, 19, 20, 21, 22]
        );
        // spot checks against the taxonomy
        let v15 = &catalog[14];
        assert_eq!(v15.id, VectorId(15));
        assert_eq!(v15.source, LayerFlag::Absent);
        assert_eq!(v15.offchain, LayerFlag::Applies);
        assert_eq!(v15.destination, LayerFlag::Applies);
        let v13 = &catalog[12];
        assert_eq!(v13.source, LayerFlag::Conditional);
        assert_eq!(v13.offchain, LayerFlag::Conditional);
        assert_eq!(v13.destination, LayerFlag::Conditional);
        let v23 = &catalog[22];
        assert_eq!(v23.source, LayerFlag::Absent);
        assert_eq!(v23.offchain, LayerFlag::Applies);
        assert_eq!(v23.destination, LayerFlag::Absent);
    }

    fn notary_cfg() -> BridgeConfig {
        BridgeConfig::minimal(
            FunctionalType::AssetLockMint,
            OffchainMechanism::Notary(NotarySet::new(9, 5)),
        )
    }

    #[test]
    fn destination_custodian_counts_contracts_plus_one() {
        // n = 3 contracts + custodian, all viable -> area 4
        let mut cfg = notary_cfg();
        cfg.dest_mechanism = DestMechanism::Custodian;
        cfg.dest_contract_count = 3;
        let catalog = vec![
            // a viable contract-logic vector and a viable custodian vector
            AttackVectorSpec {
                kind: SurfaceKind::Contract,
                ..custom(
                    1,
                    (LayerFlag::Applies, LayerFlag::Absent, LayerFlag::Applies),
                    2,
                    1,
                )
            },
            AttackVectorSpec {
                kind: SurfaceKind::Custodian,
                ..custom(
                    12,
                    (
                        LayerFlag::Conditional,
                        LayerFlag::Applies,
                        LayerFlag::Conditional,
                    ),
                    2,
                    1,
                )
            },
        ];
        let area = layer_area(&cfg, Layer::DestinationChain, &catalog).unwrap();
        assert_eq!(area.area, 4, "three contract surfaces plus the custodian");

        // without the custodian the same catalog scores contracts only
        cfg.dest_mechanism = DestMechanism::SmartContract;
        let area = layer_area(&cfg, Layer::DestinationChain, &catalog).unwrap();
        assert_eq!(area.area, 3);
    }

    #[test]
    fn sidechain_offchain_area_vanishes_with_sound_relay() {
        let mut cfg = notary_cfg();
        cfg.offchain = OffchainMechanism::Sidechain(SidechainModel {
            consensus_honest: true,
            relay_delay: 1,
            native: false,
        });
        let mut catalog = shipped_catalog();
        // relay consensus risk zero: der(R') = 0
        for v in &mut catalog {
            if v.id == VectorId(18) {
                v.impact = 0;
            }
        }
        let area = layer_area(&cfg, Layer::OffChain, &catalog).unwrap();
        assert_eq!(area.area, 0);

        // non-zero relay risk contributes its single viability term
        for v in &mut catalog {
            if v.id == VectorId(18) {
                v.impact = 10;
            }
        }
        let area = layer_area(&cfg, Layer::OffChain, &catalog).unwrap();
        assert_eq!(area.area, 1);
    }

    #[test]
    fn light_client_offchain_is_a_single_term() {
        let mut cfg = notary_cfg();
        cfg.offchain = OffchainMechanism::LightClient(LightClientModel::sound(3));
        let mut catalog = shipped_catalog();
        for v in &mut catalog {
            if v.id == VectorId(10) {
                v.impact = 3;
                v.effort = 1;
            }
        }
        let area = layer_area(&cfg, Layer::OffChain, &catalog).unwrap();
        assert_eq!(area.area, 1);
        assert_eq!(area.entries.len(), 1);
        assert_eq!(area.entries[0].id, VectorId(10));
    }

    #[test]
    fn empty_catalog_yields_zero_areas() {
        let report = total_area(&notary_cfg(), &[]).unwrap();
        assert_eq!(report.area_total, 0);
        assert_eq!(report.source.area, 0);
        assert_eq!(report.offchain.area, 0);
        assert_eq!(report.destination.area, 0);
        assert_eq!(report.other.area, 0);
    }

    #[test]
    fn layer_area_counts_viability_indicators() {
        // der values {0.5, 1.0, 3.0} on one layer -> area 1
        let catalog = vec![
            custom(
                14,
                (LayerFlag::Applies, LayerFlag::Absent, LayerFlag::Absent),
                1,
                2,
            ),
            custom(
                16,
                (LayerFlag::Applies, LayerFlag::Absent, LayerFlag::Absent),
                5,
                5,
            ),
            custom(
                17,
                (LayerFlag::Applies, LayerFlag::Absent, LayerFlag::Absent),
                3,
                1,
            ),
        ];
        let area = layer_area(&notary_cfg(), Layer::SourceChain, &catalog).unwrap();
        assert_eq!(area.area, 1);
    }

    #[test]
    fn adding_viable_vector_raises_total_by_layer_count() {
        let cfg = notary_cfg();
        let mut catalog = vec![custom(
            14,
            (LayerFlag::Applies, LayerFlag::Absent, LayerFlag::Applies),
            9,
            1,
        )];
        let before = total_area(&cfg, &catalog).unwrap().area_total;
        catalog.push(custom(
            16,
            (LayerFlag::Applies, LayerFlag::Absent, LayerFlag::Applies),
            4,
            1,
        ));
        let after = total_area(&cfg, &catalog).unwrap().area_total;
        assert_eq!(after - before, 2, "applies on two layers");

        // a non-viable vector changes nothing
        catalog.push(custom(
            20,
            (LayerFlag::Applies, LayerFlag::Absent, LayerFlag::Applies),
            1,
            4,
        ));
        assert_eq!(total_area(&cfg, &catalog).unwrap().area_total, after);
    }

    #[test]
    fn dagger_vectors_vanish_without_their_component() {
        // V11 on an oracle-free bridge contributes nothing anywhere
        let cfg = notary_cfg(); // price_conversion = false
        let catalog = shipped_catalog();
        let report = total_area(&cfg, &catalog).unwrap();
        for layer in [&report.source, &report.offchain, &report.destination] {
            assert!(layer.entries.iter().all(|s| s.id != VectorId(11)));
        }
    }

    #[test]
    fn trustless_config_excludes_key_and_custodian_vectors() {
        let mut cfg = BridgeConfig::minimal(
            FunctionalType::AssetLockMint,
            OffchainMechanism::Sidechain(SidechainModel {
                consensus_honest: true,
                relay_delay: 1,
                native: true,
            }),
        );
        cfg.source_mechanism = SourceMechanism::ValidatorControl;
        cfg.dest_mechanism = DestMechanism::ValidatorControl;
        let mut catalog = shipped_catalog();
        for v in &mut catalog {
            v.impact = 1_000; // everything viable where it applies
        }
        let report = total_area(&cfg, &catalog).unwrap();
        for layer in [
            &report.source,
            &report.offchain,
            &report.destination,
            &report.other,
        ] {
            for score in &layer.entries {
                assert!(
                    !matches!(score.id.0, 12 | 13 | 18),
                    "{} should not apply to a trustless bridge",
                    score.id
                );
            }
        }
    }
}
