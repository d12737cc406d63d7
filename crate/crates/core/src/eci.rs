//! Directive trees, their structural metrics and English realization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{self, CoefficientTable, CostError, FeatureVector};
use crate::descriptors::{ContextRef, Descriptor, DescriptorSet};
use crate::grouping::{EntityId, RefKind};
use crate::predicates::{Frame, PredicateKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityRef {
    pub descriptors: DescriptorSet,
    /// `None` for the block being placed, which has no identity yet.
    pub referent: Option<EntityId>,
}

impl EntityRef {
    pub fn new(descriptors: DescriptorSet, referent: EntityId) -> Self {
        Self {
            descriptors,
            referent: Some(referent),
        }
    }

    /// "a block": the block about to be placed.
    pub fn new_block() -> Self {
        Self {
            descriptors: DescriptorSet::of_ref(RefKind::Block),
            referent: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionContextKind {
    AddOneMore,
    Repeat,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Eci {
    Entity(EntityRef),
    /// Implicit ground of a locative phrase such as "at the back".
    Frame { frame: Frame },
    Relation {
        kind: PredicateKind,
        figure: Box<Eci>,
        ground: Box<Eci>,
    },
    And { children: Vec<Eci> },
    Put {
        affected: EntityRef,
        result: Box<Eci>,
    },
    ActionContext { kind: ActionContextKind },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EciError {
    #[error("cannot realize {0}")]
    Unrealizable(String),
    #[error(transparent)]
    Cost(#[from] CostError),
}

impl Eci {
    pub fn entity(descriptors: DescriptorSet, referent: EntityId) -> Self {
        Eci::Entity(EntityRef::new(descriptors, referent))
    }

    pub fn relation(kind: PredicateKind, figure: Eci, ground: Eci) -> Self {
        Eci::Relation {
            kind,
            figure: Box::new(figure),
            ground: Box::new(ground),
        }
    }

    pub fn locative(kind: PredicateKind, figure: Eci, frame: Frame) -> Self {
        Eci::relation(kind, figure, Eci::Frame { frame })
    }

    pub fn put(affected: EntityRef, result: Eci) -> Self {
        Eci::Put {
            affected,
            result: Box::new(result),
        }
    }

    /// The entity a ground description is about: the node itself, or the
    /// shared figure of its qualifying relations.
    pub fn head(&self) -> Option<&EntityRef> {
        match self {
            Eci::Entity(r) => Some(r),
            Eci::Relation { figure, .. } => figure.head(),
            Eci::And { children } => children.first().and_then(Eci::head),
            _ => None,
        }
    }

    /// Relation nodes below this one, in pre-order.
    pub fn relation_count(&self) -> usize {
        match self {
            Eci::Relation { ground, .. } => 1 + ground.relation_count(),
            Eci::And { children } => children.iter().map(Eci::relation_count).sum(),
            Eci::Put { result, .. } => result.relation_count(),
            _ => 0,
        }
    }

    /// Canonical nested serialization.
    pub fn to_canonical(&self) -> String {
        serde_json::to_string(self).expect("tree serializes")
    }
}

/// One relation per ground description, each with the description spliced
/// in as the ground.
pub fn ecify(kind: PredicateKind, ground_descriptions: &[Eci], figure: &Eci) -> Vec<Eci> {
    ground_descriptions
        .iter()
        .map(|g| Eci::relation(kind, figure.clone(), g.clone()))
        .collect()
}

/// Number of chained relations; zero for action-context forms.
pub fn depth(eci: &Eci) -> usize {
    eci.relation_count()
}

fn relation_phrase(kind: PredicateKind) -> &'static str {
    match kind {
        PredicateKind::OnTop => "on top of",
        PredicateKind::Below => "below",
        PredicateKind::InFront => "in front of",
        PredicateKind::Behind => "behind",
        PredicateKind::LeftOf => "to the left of",
        PredicateKind::RightOf => "to the right of",
        PredicateKind::NextTo => "next to",
        PredicateKind::Near => "near",
        PredicateKind::Far => "far from",
        PredicateKind::AtCorner => "at the corner of",
        PredicateKind::AtCenter => "at the center of",
        PredicateKind::OnTable => "on",
    }
}

pub fn locative_phrase(kind: PredicateKind) -> Option<&'static str> {
    Some(match kind {
        PredicateKind::OnTop => "on the top",
        PredicateKind::Below => "at the bottom",
        PredicateKind::Behind => "at the back",
        PredicateKind::InFront => "at the front",
        PredicateKind::LeftOf => "on the left",
        PredicateKind::RightOf => "on the right",
        PredicateKind::AtCenter => "at the center",
        PredicateKind::AtCorner => "at a corner",
        _ => return None,
    })
}

const ORDINALS: [&str; 10] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
];

const NUMBERS: [&str; 11] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
];

fn ordinal(n: usize) -> String {
    match n {
        1..=10 => ORDINALS[n - 1].to_string(),
        _ => {
            let suffix = match (n % 10, n % 100) {
                (_, 11..=13) => "th",
                (1, _) => "st",
                (2, _) => "nd",
                (3, _) => "rd",
                _ => "th",
            };
            format!("{n}{suffix}")
        }
    }
}

fn number(n: usize) -> String {
    NUMBERS.get(n).map_or_else(|| n.to_string(), |s| s.to_string())
}

/// Noun phrase for a descriptor set.
pub fn noun_phrase(d: &DescriptorSet) -> String {
    let noun = d.ref_kind().map_or("block", RefKind::noun);
    match d.context() {
        Some(ContextRef::It) => return "it".into(),
        Some(ContextRef::Previous) => return format!("the previous {noun}"),
        _ => {}
    }
    let mut words = vec!["the".to_string()];
    if let Some(ContextRef::Same) = d.context() {
        words.push("same".into());
    }
    for x in d.iter() {
        match x {
            Descriptor::Ord(n) => words.push(ordinal(*n)),
            Descriptor::Dm(e) => words.push(e.word().into()),
            _ => {}
        }
    }
    if let Some(Descriptor::Col(c)) = d.get(crate::descriptors::Category::Col) {
        words.push(c.clone());
    }
    words.push(noun.into());
    if let Some(Descriptor::Cnt(n)) = d.get(crate::descriptors::Category::Cnt) {
        words.push(format!("of {} blocks", number(*n)));
    }
    if let Some(Descriptor::Loc(l)) = d.get(crate::descriptors::Category::Loc) {
        words.push(l.phrase().into());
    }
    match d.context() {
        Some(ContextRef::JustPlaced) => words.push("you just placed".into()),
        Some(ContextRef::JustMade) => words.push("you just made".into()),
        _ => {}
    }
    words.join(" ")
}

fn unrealizable(e: &Eci) -> EciError {
    EciError::Unrealizable(e.to_canonical())
}

/// Relation phrase with its ground, e.g. "behind the stack" or "at the back".
fn realize_relation(e: &Eci) -> Result<String, EciError> {
    match e {
        Eci::Relation { kind, ground, .. } => match ground.as_ref() {
            Eci::Frame { .. } => locative_phrase(*kind)
                .map(str::to_string)
                .ok_or_else(|| unrealizable(e)),
            g => Ok(format!("{} {}", relation_phrase(*kind), realize_np(g)?)),
        },
        Eci::And { children } if children.len() >= 2 => {
            let parts = children
                .iter()
                .map(realize_relation)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(parts.join(" and "))
        }
        _ => Err(unrealizable(e)),
    }
}

fn realize_np(e: &Eci) -> Result<String, EciError> {
    match e {
        Eci::Entity(r) => Ok(noun_phrase(&r.descriptors)),
        Eci::Relation { figure, .. } => Ok(format!("{} {}", realize_np(figure)?, realize_relation(e)?)),
        Eci::And { children } => {
            let head = match children.first() {
                Some(Eci::Relation { figure, .. }) => realize_np(figure)?,
                _ => return Err(unrealizable(e)),
            };
            Ok(format!("{head} that is {}", realize_relation(e)?))
        }
        _ => Err(unrealizable(e)),
    }
}

pub fn realize(eci: &Eci) -> Result<String, EciError> {
    match eci {
        Eci::ActionContext { kind } => Ok(match kind {
            ActionContextKind::AddOneMore => "Add one more.".into(),
            ActionContextKind::Repeat => "Do that again.".into(),
        }),
        Eci::Put { affected, result } => {
            let rel = realize_relation(result)?;
            Ok(match &affected.referent {
                None => format!("Put a block {rel}."),
                Some(_) => format!("Move {} {rel}.", noun_phrase(&affected.descriptors)),
            })
        }
        other => Err(unrealizable(other)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectiveAlternative {
    pub eci: Eci,
    pub surface: String,
    pub depth: usize,
    pub features: FeatureVector,
    pub cost: f64,
}

impl DirectiveAlternative {
    pub fn new(eci: Eci, table: &CoefficientTable) -> Result<Self, EciError> {
        let features = cost::feature_vector(&eci)?;
        Ok(Self {
            surface: realize(&eci)?,
            depth: depth(&eci),
            cost: cost::cost(&features, table),
            features,
            eci,
        })
    }

    /// Number of properties.
    pub fn props(&self) -> u32 {
        self.features.total()
    }

    /// Selection order: cost, then depth, #prop and surface.
    pub fn rank_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.depth.cmp(&other.depth))
            .then(self.props().cmp(&other.props()))
            .then_with(|| self.surface.cmp(&other.surface))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::FeatureCategory::*;
    use crate::descriptors::Descriptor;
    use crate::grouping::GroupId;

    fn target() -> Eci {
        Eci::Entity(EntityRef::new_block())
    }

    fn block(id: &str) -> Eci {
        Eci::entity(DescriptorSet::of_ref(RefKind::Block), EntityId::block(id))
    }

    fn it(id: &str) -> Eci {
        Eci::entity(
            DescriptorSet::new([Descriptor::Con(ContextRef::It)]).unwrap(),
            EntityId::block(id),
        )
    }

    fn put(result: Eci) -> DirectiveAlternative {
        DirectiveAlternative::new(Eci::put(EntityRef::new_block(), result), &CoefficientTable::default()).unwrap()
    }

    #[test]
    fn on_top_of_it() {
        let a = put(Eci::relation(PredicateKind::OnTop, target(), it("a")));
        assert_eq!(a.surface, "Put a block on top of it.");
        assert_eq!(a.depth, 1);
        assert_eq!(a.props(), 2);
        assert_eq!(a.features, FeatureVector::new().with(Rel, 1).with(Con, 1));
        assert!((a.cost - 0.0956).abs() < 1e-12);
    }

    #[test]
    fn ground_with_locative() {
        let g = Eci::locative(PredicateKind::Below, block("a"), Frame::Scene);
        let a = put(Eci::relation(PredicateKind::Behind, target(), g));
        assert_eq!(a.surface, "Put a block behind the block at the bottom.");
        assert_eq!(a.depth, 2);
        assert_eq!(a.props(), 3);
        assert!((a.cost - 0.2466).abs() < 1e-12);
    }

    #[test]
    fn conjoined_locatives_become_relative_clause() {
        let g = Eci::And {
            children: vec![
                Eci::locative(PredicateKind::Behind, block("c"), Frame::Scene),
                Eci::locative(PredicateKind::LeftOf, block("c"), Frame::Scene),
            ],
        };
        let a = put(Eci::relation(PredicateKind::OnTop, target(), g));
        assert_eq!(a.surface, "Put a block on top of the block that is at the back and on the left.");
        assert_eq!(a.depth, 3);
        assert_eq!(a.props(), 4);
        assert!((a.cost - 0.3426).abs() < 1e-12);
    }

    #[test]
    fn nested_qualifiers_number_in_preorder() {
        let stack = Eci::entity(DescriptorSet::of_ref(RefKind::Stack), EntityId::Group(GroupId("s".into())));
        let inner = Eci::locative(PredicateKind::Behind, stack, Frame::Scene);
        let g = Eci::relation(PredicateKind::OnTop, block("x"), inner);
        let a = put(Eci::relation(PredicateKind::LeftOf, target(), g));
        assert_eq!(a.surface, "Put a block to the left of the block on top of the stack at the back.");
        let want = FeatureVector::new()
            .with(Rel, 1)
            .with(Ref, 1)
            .with(Rel, 2)
            .with(Ref, 2)
            .with(Rel, 3);
        assert_eq!(a.features, want);
    }

    #[test]
    fn add_one_more_is_depth_zero() {
        let a = DirectiveAlternative::new(
            Eci::ActionContext { kind: ActionContextKind::AddOneMore },
            &CoefficientTable::default(),
        )
        .unwrap();
        assert_eq!(a.surface, "Add one more.");
        assert_eq!(a.depth, 0);
        assert_eq!(a.cost, 0.0386);
        assert_eq!(format!("{:.3}", a.cost), "0.039");
    }

    #[test]
    fn context_phrases() {
        let d = |c| DescriptorSet::new([Descriptor::Ref(RefKind::Block), Descriptor::Con(c)]).unwrap();
        assert_eq!(noun_phrase(&d(ContextRef::Previous)), "the previous block");
        assert_eq!(noun_phrase(&d(ContextRef::JustPlaced)), "the block you just placed");
        let s = |c| DescriptorSet::new([Descriptor::Ref(RefKind::Stack), Descriptor::Con(c)]).unwrap();
        assert_eq!(noun_phrase(&s(ContextRef::Same)), "the same stack");
        assert_eq!(noun_phrase(&s(ContextRef::JustMade)), "the stack you just made");
        let full = DescriptorSet::new([
            Descriptor::Ref(RefKind::Block),
            Descriptor::Col("red".into()),
            Descriptor::Ord(1),
        ])
        .unwrap();
        assert_eq!(noun_phrase(&full), "the first red block");
        assert_eq!(ordinal(22), "22nd");
    }

    #[test]
    fn unrealizable_nodes() {
        assert!(realize(&target()).is_err());
        let bad = Eci::put(
            EntityRef::new_block(),
            Eci::locative(PredicateKind::Near, target(), Frame::Scene),
        );
        assert!(matches!(realize(&bad), Err(EciError::Unrealizable(_))));
    }

    #[test]
    fn canonical_round_trip() {
        let e = Eci::put(EntityRef::new_block(), Eci::relation(PredicateKind::OnTop, target(), it("a")));
        let s = e.to_canonical();
        assert_eq!(serde_json::from_str::<Eci>(&s).unwrap(), e);
        assert!(s.contains(r#""node":"put""#));
    }
}
