//! Typed object properties and minimal unambiguous referring expressions.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::InteractionContext;
use crate::cost::CoefficientTable;
use crate::grouping::{CandidateSet, EntityId, GroupKind, RefKind};
use crate::predicates::{locative_holds, FieldParams, Frame, PredicateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Category {
    Ref,
    Col,
    Dm,
    Con,
    Cnt,
    Ord,
    Loc,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::Ref,
        Category::Col,
        Category::Dm,
        Category::Con,
        Category::Cnt,
        Category::Ord,
        Category::Loc,
    ];

    /// Tie-break priority among equal-cost sets (lower wins).
    fn priority(self) -> u8 {
        match self {
            Category::Col => 0,
            Category::Loc => 1,
            Category::Con => 2,
            Category::Cnt => 3,
            Category::Ord => 4,
            Category::Dm => 5,
            Category::Ref => 6,
        }
    }

    pub fn acronym(self) -> &'static str {
        match self {
            Category::Ref => "REF",
            Category::Col => "COL",
            Category::Dm => "DM",
            Category::Con => "CON",
            Category::Cnt => "CNT",
            Category::Ord => "ORD",
            Category::Loc => "LOC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extreme {
    Frontmost,
    Backmost,
    Leftmost,
    Rightmost,
}

impl Extreme {
    fn predicate(self) -> PredicateKind {
        match self {
            Extreme::Frontmost => PredicateKind::InFront,
            Extreme::Backmost => PredicateKind::Behind,
            Extreme::Leftmost => PredicateKind::LeftOf,
            Extreme::Rightmost => PredicateKind::RightOf,
        }
    }

    pub fn word(self) -> &'static str {
        match self {
            Extreme::Frontmost => "frontmost",
            Extreme::Backmost => "backmost",
            Extreme::Leftmost => "leftmost",
            Extreme::Rightmost => "rightmost",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextRef {
    /// "it"
    It,
    /// "the previous block"
    Previous,
    /// "the block you just placed"
    JustPlaced,
    /// "the same stack"
    Same,
    /// "the stack you just made"
    JustMade,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Locality {
    Top,
    Bottom,
    Middle,
    Back,
    Front,
    Left,
    Right,
}

impl Locality {
    pub fn phrase(self) -> &'static str {
        match self {
            Locality::Top => "at the top",
            Locality::Bottom => "at the bottom",
            Locality::Middle => "in the middle",
            Locality::Back => "at the back",
            Locality::Front => "at the front",
            Locality::Left => "on the left",
            Locality::Right => "on the right",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "category", content = "value", rename_all = "UPPERCASE")]
pub enum Descriptor {
    Ref(RefKind),
    Col(String),
    Dm(Extreme),
    Con(ContextRef),
    Cnt(usize),
    Ord(usize),
    Loc(Locality),
}

impl Descriptor {
    pub fn category(&self) -> Category {
        match self {
            Descriptor::Ref(_) => Category::Ref,
            Descriptor::Col(_) => Category::Col,
            Descriptor::Dm(_) => Category::Dm,
            Descriptor::Con(_) => Category::Con,
            Descriptor::Cnt(_) => Category::Cnt,
            Descriptor::Ord(_) => Category::Ord,
            Descriptor::Loc(_) => Category::Loc,
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Descriptor::Ref(r) => write!(f, "REF:{}", r.noun()),
            Descriptor::Col(c) => write!(f, "COL:{c}"),
            Descriptor::Dm(d) => write!(f, "DM:{}", d.word()),
            Descriptor::Con(c) => write!(f, "CON:{c:?}"),
            Descriptor::Cnt(n) => write!(f, "CNT:{n}"),
            Descriptor::Ord(n) => write!(f, "ORD:{n}"),
            Descriptor::Loc(l) => write!(f, "LOC:{l:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DescriptorError {
    #[error("a descriptor set needs a REF or CON descriptor")]
    NoHead,
    #[error("more than one {0:?} descriptor")]
    DuplicateCategory(Category),
}

/// At most one descriptor per category, always including REF or CON.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Descriptor>", into = "Vec<Descriptor>")]
pub struct DescriptorSet(BTreeMap<Category, Descriptor>);

impl TryFrom<Vec<Descriptor>> for DescriptorSet {
    type Error = DescriptorError;
    fn try_from(v: Vec<Descriptor>) -> Result<Self, Self::Error> {
        DescriptorSet::new(v)
    }
}

impl From<DescriptorSet> for Vec<Descriptor> {
    fn from(d: DescriptorSet) -> Self {
        d.0.into_values().collect()
    }
}

impl DescriptorSet {
    pub fn new(descriptors: impl IntoIterator<Item = Descriptor>) -> Result<Self, DescriptorError> {
        let mut map = BTreeMap::new();
        for d in descriptors {
            let c = d.category();
            if map.insert(c, d).is_some() {
                return Err(DescriptorError::DuplicateCategory(c));
            }
        }
        if !map.contains_key(&Category::Ref) && !map.contains_key(&Category::Con) {
            return Err(DescriptorError::NoHead);
        }
        Ok(Self(map))
    }

    pub fn of_ref(kind: RefKind) -> Self {
        Self::new([Descriptor::Ref(kind)]).expect("REF alone is valid")
    }

    pub fn get(&self, c: Category) -> Option<&Descriptor> {
        self.0.get(&c)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Descriptor> {
        self.0.values()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ref_kind(&self) -> Option<RefKind> {
        match self.get(Category::Ref) {
            Some(Descriptor::Ref(k)) => Some(*k),
            _ => None,
        }
    }

    pub fn context(&self) -> Option<ContextRef> {
        match self.get(Category::Con) {
            Some(Descriptor::Con(c)) => Some(*c),
            _ => None,
        }
    }

    /// Every proper subset that is itself a valid set.
    pub fn proper_subsets(&self) -> Vec<DescriptorSet> {
        let items: Vec<&Descriptor> = self.iter().collect();
        let n = items.len();
        (0..(1u32 << n) - 1)
            .filter_map(|mask| {
                DescriptorSet::new(
                    (0..n)
                        .filter(|i| mask & (1 << i) != 0)
                        .map(|i| items[i].clone()),
                )
                .ok()
            })
            .collect()
    }

    fn sort_key(&self) -> (usize, Vec<u8>, String) {
        let mut prio: Vec<u8> = self
            .0
            .keys()
            .filter(|c| **c != Category::Ref)
            .map(|c| c.priority())
            .collect();
        prio.sort_unstable();
        (self.len(), prio, self.to_string())
    }
}

impl fmt::Display for DescriptorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|d| d.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Whether a single descriptor is true of an entity.
pub fn descriptor_holds(
    d: &Descriptor,
    entity: &EntityId,
    cs: &CandidateSet,
    ctx: &InteractionContext,
    params: &FieldParams,
) -> bool {
    match d {
        Descriptor::Ref(k) => cs.ref_kind(entity) == Some(*k),
        Descriptor::Col(c) => match entity {
            EntityId::Block(b) => cs.block(b).is_some_and(|b| &b.color == c),
            EntityId::Group(g) => cs
                .group(g)
                .is_some_and(|g| g.homogeneous_color.as_ref() == Some(c)),
            EntityId::Table => false,
        },
        Descriptor::Cnt(n) => match entity {
            EntityId::Group(g) => cs.group(g).is_some_and(|g| g.len() == *n),
            _ => false,
        },
        Descriptor::Ord(n) => entity
            .as_block()
            .is_some_and(|b| ctx.ordinal(b) == Some(*n)),
        Descriptor::Dm(x) => locative_holds(x.predicate(), Frame::Scene, entity, cs, params),
        Descriptor::Loc(l) => match l {
            Locality::Top => locative_holds(PredicateKind::OnTop, Frame::Scene, entity, cs, params),
            Locality::Bottom => locative_holds(PredicateKind::Below, Frame::Scene, entity, cs, params),
            Locality::Middle => entity.as_block().is_some_and(|b| {
                cs.groups.iter().any(|g| {
                    g.maximal
                        && g.kind == GroupKind::Stack
                        && g.contains(b)
                        && g.members.first() != Some(b)
                        && g.members.last() != Some(b)
                })
            }),
            Locality::Back => locative_holds(PredicateKind::Behind, Frame::Scene, entity, cs, params),
            Locality::Front => locative_holds(PredicateKind::InFront, Frame::Scene, entity, cs, params),
            Locality::Left => locative_holds(PredicateKind::LeftOf, Frame::Scene, entity, cs, params),
            Locality::Right => locative_holds(PredicateKind::RightOf, Frame::Scene, entity, cs, params),
        },
        Descriptor::Con(c) => context_holds(*c, entity, cs, ctx),
    }
}

fn context_holds(c: ContextRef, entity: &EntityId, cs: &CandidateSet, ctx: &InteractionContext) -> bool {
    match c {
        ContextRef::It => ctx.it().as_ref() == Some(entity),
        ContextRef::Previous | ContextRef::JustPlaced => {
            ctx.last_acted.is_some() && entity.as_block() == ctx.last_acted.as_ref()
        }
        ContextRef::Same | ContextRef::JustMade => match (entity, &ctx.last_acted) {
            (EntityId::Group(g), Some(b)) => cs.group(g).is_some_and(|g| g.maximal && g.contains(b)),
            _ => false,
        },
    }
}

/// True iff every descriptor of `d` is true of `entity`.
pub fn matches(
    entity: &EntityId,
    d: &DescriptorSet,
    cs: &CandidateSet,
    ctx: &InteractionContext,
    params: &FieldParams,
) -> bool {
    d.iter().all(|x| descriptor_holds(x, entity, cs, ctx, params))
}

/// Every descriptor true of the entity, restricted to `categories`.
pub fn applicable_descriptors(
    entity: &EntityId,
    cs: &CandidateSet,
    ctx: &InteractionContext,
    params: &FieldParams,
    categories: &[Category],
) -> Vec<Descriptor> {
    let mut out = Vec::new();
    let Some(kind) = cs.ref_kind(entity) else {
        return out;
    };
    out.push(Descriptor::Ref(kind));
    match entity {
        EntityId::Block(b) => {
            if let Some(block) = cs.block(b) {
                out.push(Descriptor::Col(block.color.clone()));
            }
            if let Some(n) = ctx.ordinal(b) {
                out.push(Descriptor::Ord(n));
            }
        }
        EntityId::Group(g) => {
            if let Some(g) = cs.group(g) {
                if let Some(c) = &g.homogeneous_color {
                    out.push(Descriptor::Col(c.clone()));
                }
                out.push(Descriptor::Cnt(g.len()));
            }
        }
        EntityId::Table => {}
    }
    for l in [
        Locality::Top,
        Locality::Bottom,
        Locality::Middle,
        Locality::Back,
        Locality::Front,
        Locality::Left,
        Locality::Right,
    ] {
        out.push(Descriptor::Loc(l));
    }
    for x in [Extreme::Frontmost, Extreme::Backmost, Extreme::Leftmost, Extreme::Rightmost] {
        out.push(Descriptor::Dm(x));
    }
    for c in [
        ContextRef::It,
        ContextRef::Previous,
        ContextRef::JustPlaced,
        ContextRef::Same,
        ContextRef::JustMade,
    ] {
        out.push(Descriptor::Con(c));
    }
    out.retain(|d| categories.contains(&d.category()) && descriptor_holds(d, entity, cs, ctx, params));
    out
}

/// Default cap on descriptor-set size.
pub const MAX_SET_SIZE: usize = 3;

/// All valid descriptor sets (one value per category, at most `cap`
/// descriptors) built from the entity's applicable descriptors.
pub fn all_descriptor_combinations(
    entity: &EntityId,
    cs: &CandidateSet,
    ctx: &InteractionContext,
    params: &FieldParams,
    categories: &[Category],
    cap: usize,
) -> Vec<DescriptorSet> {
    let mut by_cat: BTreeMap<Category, Vec<Descriptor>> = BTreeMap::new();
    for d in applicable_descriptors(entity, cs, ctx, params, categories) {
        by_cat.entry(d.category()).or_default().push(d);
    }
    let cats: Vec<(Category, Vec<Descriptor>)> = by_cat.into_iter().collect();
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        i: usize,
        cats: &[(Category, Vec<Descriptor>)],
        cap: usize,
        current: &mut Vec<Descriptor>,
        out: &mut Vec<DescriptorSet>,
    ) {
        if i == cats.len() {
            if let Ok(s) = DescriptorSet::new(current.iter().cloned()) {
                out.push(s);
            }
            return;
        }
        rec(i + 1, cats, cap, current, out);
        if current.len() < cap {
            for d in &cats[i].1 {
                current.push(d.clone());
                rec(i + 1, cats, cap, current, out);
                current.pop();
            }
        }
    }
    rec(0, &cats, cap, &mut current, &mut out);
    out.sort();
    out
}

/// Entities a set is compared against: everything of the same REF kind, or
/// for head-less context sets everything in the candidate set.
fn comparison_class(entity: &EntityId, d: &DescriptorSet, cs: &CandidateSet) -> Vec<EntityId> {
    match (d.ref_kind(), cs.ref_kind(entity)) {
        (Some(k), _) | (None, Some(k)) if d.ref_kind().is_some() => cs.class(k),
        _ => cs.entities(),
    }
}

/// Whether `d` picks out `entity` and nothing else in its comparison class.
pub fn is_unique(
    entity: &EntityId,
    d: &DescriptorSet,
    cs: &CandidateSet,
    ctx: &InteractionContext,
    params: &FieldParams,
) -> bool {
    matches(entity, d, cs, ctx, params)
        && comparison_class(entity, d, cs)
            .iter()
            .filter(|o| *o != entity)
            .all(|o| !matches(o, d, cs, ctx, params))
}

pub fn unique_descriptions(
    entity: &EntityId,
    cs: &CandidateSet,
    ctx: &InteractionContext,
    params: &FieldParams,
    categories: &[Category],
    cap: usize,
) -> Vec<DescriptorSet> {
    if entity == &EntityId::Table {
        return vec![DescriptorSet::of_ref(RefKind::Table)];
    }
    all_descriptor_combinations(entity, cs, ctx, params, categories, cap)
        .into_iter()
        .filter(|d| is_unique(entity, d, cs, ctx, params))
        .collect()
}

/// Unique sets with no unique proper subset, reduced to those of minimum
/// cost at `depth`. Ordered by the deterministic tie-break: fewer
/// descriptors, then category priority, then lexical order.
#[allow(clippy::too_many_arguments)]
pub fn minimal_unique_description(
    entity: &EntityId,
    cs: &CandidateSet,
    ctx: &InteractionContext,
    params: &FieldParams,
    table: &CoefficientTable,
    depth: usize,
    categories: &[Category],
    cap: usize,
) -> Vec<DescriptorSet> {
    let unique = unique_descriptions(entity, cs, ctx, params, categories, cap);
    let minimal: Vec<DescriptorSet> = unique
        .iter()
        .filter(|d| !d.proper_subsets().iter().any(|s| unique.contains(s)))
        .cloned()
        .collect();
    select_cheapest(minimal, table, depth)
}

pub(crate) fn select_cheapest(
    sets: Vec<DescriptorSet>,
    table: &CoefficientTable,
    depth: usize,
) -> Vec<DescriptorSet> {
    let costed: Vec<(f64, DescriptorSet)> = sets
        .into_iter()
        .map(|d| (crate::cost::descriptor_cost(&d, depth, table), d))
        .collect();
    let Some(min) = costed.iter().map(|(c, _)| *c).reduce(f64::min) else {
        return Vec::new();
    };
    let mut best: Vec<DescriptorSet> = costed
        .into_iter()
        .filter(|(c, _)| (*c - min).abs() <= 1e-12)
        .map(|(_, d)| d)
        .collect();
    best.sort_by_key(|d| d.sort_key());
    best
}
