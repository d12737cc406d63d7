//! Turns a machine move into ranked English directives.
//!
//! Every relation that holds between the imaginary block at the target and
//! an entity of the scene yields alternatives. A ground with a unique
//! descriptor set is named directly; otherwise it is qualified by further
//! relations, recursively, up to `d_max` chained relations. Context forms
//! are injected afterwards and the cheapest alternative wins.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::InteractionContext;
use crate::cost::CoefficientTable;
use crate::descriptors::{
    minimal_unique_description, Category, ContextRef, Descriptor, DescriptorSet, MAX_SET_SIZE,
};
use crate::eci::{ActionContextKind, DirectiveAlternative, Eci, EciError, EntityRef};
use crate::geometry::Aabb;
use crate::grouping::{candidate_set, CandidateSet, EntityId, RefKind};
use crate::predicates::{
    entity_relation_holds, evaluate_relations, field_between, locative_holds, overlaps,
    scene_locatives, table_region, FieldParams, Figure, Frame, PredicateKind,
};
use crate::scene::{MoveDirective, Scene, SceneError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgtConfig {
    pub d_max: usize,
    pub max_alternatives: usize,
    #[serde(skip, default)]
    pub coefficients: CoefficientTable,
    pub field: FieldParams,
    /// Descriptor categories used to name grounds directly.
    pub categories: Vec<Category>,
    /// Relations directives may use, at the top level and in qualifiers.
    pub relations: Vec<PredicateKind>,
    pub max_set_size: usize,
}

/// Directional and table relations. `near`, `far` and `next_to` hold over
/// wide regions and are left out unless configured.
pub const DEFAULT_RELATIONS: [PredicateKind; 9] = [
    PredicateKind::OnTop,
    PredicateKind::Below,
    PredicateKind::InFront,
    PredicateKind::Behind,
    PredicateKind::LeftOf,
    PredicateKind::RightOf,
    PredicateKind::AtCorner,
    PredicateKind::AtCenter,
    PredicateKind::OnTable,
];

impl Default for EgtConfig {
    fn default() -> Self {
        Self {
            d_max: 3,
            max_alternatives: 64,
            coefficients: CoefficientTable::default(),
            field: FieldParams::default(),
            categories: vec![Category::Ref, Category::Col, Category::Cnt],
            relations: DEFAULT_RELATIONS.to_vec(),
            max_set_size: MAX_SET_SIZE,
        }
    }
}

impl EgtConfig {
    pub fn with_coefficients(coefficients: CoefficientTable) -> Self {
        Self {
            coefficients,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub best: DirectiveAlternative,
    /// Every alternative, best first.
    pub all: Vec<DirectiveAlternative>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EgtError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("d_max must be at least 1")]
    BadConfig,
    #[error("no unambiguous directive within depth {d_max} ({} partial alternatives)", partial.len())]
    NoUnambiguous {
        d_max: usize,
        partial: Vec<DirectiveAlternative>,
    },
    #[error("the block to move has no unique description")]
    AmbiguousBlock,
    #[error(transparent)]
    Eci(#[from] EciError),
}

/// The scene the target is described against and the phrase for the
/// affected block.
fn prepare(m: &MoveDirective, scene: &Scene, ctx: &InteractionContext, cfg: &EgtConfig) -> Result<(Scene, EntityRef), EgtError> {
    if cfg.d_max == 0 {
        return Err(EgtError::BadConfig);
    }
    scene.apply_move(m)?;
    match m.existing() {
        None => Ok((scene.clone(), EntityRef::new_block())),
        Some(id) => {
            let cs = candidate_set(scene);
            let e = EntityId::Block(id.clone());
            let d = minimal_unique_description(
                &e,
                &cs,
                ctx,
                &cfg.field,
                &cfg.coefficients,
                1,
                &Category::ALL,
                cfg.max_set_size,
            )
            .into_iter()
            .next()
            .ok_or(EgtError::AmbiguousBlock)?;
            Ok((scene.without(id), EntityRef::new(d, e)))
        }
    }
}

fn target() -> Eci {
    Eci::Entity(EntityRef::new_block())
}

fn ref_only(e: &EntityId, cs: &CandidateSet) -> Option<Eci> {
    let k = cs.ref_kind(e)?;
    Some(Eci::entity(DescriptorSet::of_ref(k), e.clone()))
}

/// Members of `e`'s class satisfying `pred`, to test whether it singles out `e`.
fn selects_only(e: &EntityId, cs: &CandidateSet, pred: impl Fn(&EntityId) -> bool) -> bool {
    let Some(k) = cs.ref_kind(e) else {
        return false;
    };
    let hits: Vec<EntityId> = cs.class(k).into_iter().filter(|x| pred(x)).collect();
    hits.len() == 1 && &hits[0] == e
}

/// Orders ground descriptions by what they would cost as the ground of a
/// one-relation directive, then by surface.
fn order_and_cap(mut descs: Vec<Eci>, cfg: &EgtConfig) -> Vec<Eci> {
    let mut keyed: Vec<(f64, String, Eci)> = descs
        .drain(..)
        .filter_map(|g| {
            let probe = Eci::put(EntityRef::new_block(), Eci::relation(PredicateKind::OnTop, target(), g.clone()));
            let a = DirectiveAlternative::new(probe, &cfg.coefficients).ok()?;
            Some((a.cost, a.surface, g))
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    keyed.dedup_by(|a, b| a.1 == b.1);
    keyed.truncate(cfg.max_alternatives);
    keyed.into_iter().map(|(_, _, g)| g).collect()
}

/// Ground descriptions of `g` when it is introduced by the relation with
/// chain index `index`. Empty when no unambiguous description fits within
/// `d_max`.
pub fn describe_uniquely(
    g: &EntityId,
    cs: &CandidateSet,
    index: usize,
    ctx: &InteractionContext,
    cfg: &EgtConfig,
) -> Vec<Eci> {
    describe(g, cs, index, ctx, cfg, &BTreeSet::new())
}

fn describe(
    g: &EntityId,
    cs: &CandidateSet,
    index: usize,
    ctx: &InteractionContext,
    cfg: &EgtConfig,
    visiting: &BTreeSet<EntityId>,
) -> Vec<Eci> {
    if index > cfg.d_max {
        return Vec::new();
    }
    if *g == EntityId::Table {
        return vec![Eci::entity(DescriptorSet::of_ref(RefKind::Table), EntityId::Table)];
    }
    let direct = minimal_unique_description(
        g,
        cs,
        ctx,
        &cfg.field,
        &cfg.coefficients,
        index,
        &cfg.categories,
        cfg.max_set_size,
    );
    if let Some(d) = direct.into_iter().next() {
        return vec![Eci::entity(d, g.clone())];
    }
    let Some(head) = ref_only(g, cs) else {
        return Vec::new();
    };
    let p = &cfg.field;
    let mut out = Vec::new();
    let locs = scene_locatives(g, cs, p);

    if index < cfg.d_max {
        for &k in &locs {
            if selects_only(g, cs, |x| locative_holds(k, Frame::Scene, x, cs, p)) {
                out.push(Eci::locative(k, head.clone(), Frame::Scene));
            }
        }
        let mut seen = visiting.clone();
        seen.insert(g.clone());
        for g2 in cs.entities() {
            if g2 == *g || seen.contains(&g2) || overlaps(g, &g2, cs) {
                continue;
            }
            for &k in &cfg.relations {
                if g2 == EntityId::Table || k.is_table_only() {
                    continue;
                }
                if !entity_relation_holds(k, g, &g2, cs, p) {
                    continue;
                }
                if !selects_only(g, cs, |x| entity_relation_holds(k, x, &g2, cs, p)) {
                    continue;
                }
                for sub in describe(&g2, cs, index + 1, ctx, cfg, &seen) {
                    out.push(Eci::relation(k, head.clone(), sub));
                }
            }
        }
    }
    if index + 1 < cfg.d_max {
        for (i, &k1) in locs.iter().enumerate() {
            for &k2 in &locs[i + 1..] {
                let alone = |k: PredicateKind| selects_only(g, cs, |x| locative_holds(k, Frame::Scene, x, cs, p));
                if alone(k1) || alone(k2) {
                    continue;
                }
                let both = selects_only(g, cs, |x| {
                    locative_holds(k1, Frame::Scene, x, cs, p) && locative_holds(k2, Frame::Scene, x, cs, p)
                });
                if both {
                    out.push(Eci::And {
                        children: vec![
                            Eci::locative(k1, head.clone(), Frame::Scene),
                            Eci::locative(k2, head.clone(), Frame::Scene),
                        ],
                    });
                }
            }
        }
    }
    order_and_cap(out, cfg)
}

fn con(kind: Option<RefKind>, c: ContextRef) -> DescriptorSet {
    let mut v = vec![Descriptor::Con(c)];
    if let Some(k) = kind {
        v.push(Descriptor::Ref(k));
    }
    DescriptorSet::new(v).expect("context head")
}

/// Context forms for the ground of one relation.
fn context_grounds(
    kind: PredicateKind,
    g: &EntityId,
    cs: &CandidateSet,
    ctx: &InteractionContext,
) -> Vec<Eci> {
    let mut out = Vec::new();
    let it = ctx.it();
    match (g, &ctx.last_acted) {
        (EntityId::Block(b), Some(last)) if b == last => {
            out.push(Eci::entity(con(None, ContextRef::It), g.clone()));
            out.push(Eci::entity(con(Some(RefKind::Block), ContextRef::Previous), g.clone()));
            out.push(Eci::entity(con(Some(RefKind::Block), ContextRef::JustPlaced), g.clone()));
        }
        (EntityId::Group(id), Some(last)) => {
            if let Some(group) = cs.group(id).filter(|gr| gr.maximal && gr.contains(last)) {
                let c = if kind == PredicateKind::OnTop {
                    ContextRef::Same
                } else {
                    ContextRef::JustMade
                };
                out.push(Eci::entity(con(Some(group.kind.into()), c), g.clone()));
            }
        }
        _ => {}
    }
    // Dialog context only when it does not compete with the last-acted block.
    if ctx.last_mentioned.as_ref() == Some(g) && it.as_ref() == Some(g) && out.is_empty() {
        out.push(Eci::entity(con(None, ContextRef::It), g.clone()));
    }
    out
}

/// Adds dialog, task and action context forms to a list of Put trees.
pub fn inject_context(
    mut alts: Vec<Eci>,
    m: &MoveDirective,
    scene: &Scene,
    ctx: &InteractionContext,
    cfg: &EgtConfig,
) -> Vec<Eci> {
    let base = match m.existing() {
        Some(id) => scene.without(id),
        None => scene.clone(),
    };
    let cs = candidate_set(&base);
    let fig = Aabb::unit_cube(m.to_pos);
    let affected = match m.existing() {
        Some(_) => alts
            .iter()
            .find_map(|a| match a {
                Eci::Put { affected, .. } => Some(affected.clone()),
                _ => None,
            })
            .unwrap_or_else(EntityRef::new_block),
        None => EntityRef::new_block(),
    };
    for r in target_relations(&fig, &cs, cfg) {
        for g in context_grounds(r.kind, &r.ground, &cs, ctx) {
            alts.push(Eci::put(affected.clone(), Eci::relation(r.kind, target(), g)));
        }
    }
    if m.is_new() && repeats_last_action(&fig, &cs, ctx, &cfg.field) {
        alts.push(Eci::ActionContext {
            kind: ActionContextKind::AddOneMore,
        });
    }
    alts
}

/// The previous action, re-applied to the block it produced, lands here.
pub fn repeats_last_action(fig: &Aabb, cs: &CandidateSet, ctx: &InteractionContext, params: &FieldParams) -> bool {
    match (&ctx.last_action, &ctx.last_acted) {
        (Some(la), Some(last)) if la.succeeded => {
            let g = EntityId::Block(last.clone());
            cs.contains(&g) && field_between(la.kind, fig, &g, cs, params) >= params.acceptance
        }
        _ => false,
    }
}

fn target_relations(fig: &Aabb, cs: &CandidateSet, cfg: &EgtConfig) -> Vec<crate::predicates::SpatialRelation> {
    evaluate_relations(&Figure::Target, fig, cs, &cfg.field)
        .into_iter()
        .filter(|r| cfg.relations.contains(&r.kind))
        .collect()
}

/// All alternatives for a move, cheapest first.
pub fn machine_instruction_to_eci(
    m: &MoveDirective,
    scene: &Scene,
    ctx: &InteractionContext,
    cfg: &EgtConfig,
) -> Result<Generation, EgtError> {
    let (base, affected) = prepare(m, scene, ctx, cfg)?;
    let cs = candidate_set(&base);
    let fig = Aabb::unit_cube(m.to_pos);
    let mut trees = Vec::new();
    for r in target_relations(&fig, &cs, cfg) {
        let grounds = describe(&r.ground, &cs, 1, ctx, cfg, &BTreeSet::new());
        for rel in crate::eci::ecify(r.kind, &grounds, &target()) {
            trees.push(Eci::put(affected.clone(), rel));
        }
    }
    let trees = inject_context(trees, m, scene, ctx, cfg);
    let mut by_surface: BTreeMap<String, DirectiveAlternative> = BTreeMap::new();
    for t in trees {
        let a = DirectiveAlternative::new(t, &cfg.coefficients)?;
        if a.depth > cfg.d_max {
            continue;
        }
        match by_surface.get(&a.surface) {
            Some(prev) if prev.rank_cmp(&a).is_le() => {}
            _ => {
                by_surface.insert(a.surface.clone(), a);
            }
        }
    }
    let mut all: Vec<DirectiveAlternative> = by_surface.into_values().collect();
    all.sort_by(|a, b| a.rank_cmp(b));
    all.truncate(cfg.max_alternatives);
    match all.first() {
        Some(best) => Ok(Generation {
            best: best.clone(),
            all,
        }),
        None => Err(EgtError::NoUnambiguous {
            d_max: cfg.d_max,
            partial: all,
        }),
    }
}

/// Baseline: the nearest block (or the table) named by every property it
/// has, with the strongest relation and the table region it sits in. No
/// uniqueness check, no context, no ranking.
pub fn naive_generate(
    m: &MoveDirective,
    scene: &Scene,
    ctx: &InteractionContext,
    cfg: &EgtConfig,
) -> Result<DirectiveAlternative, EgtError> {
    let (base, affected) = prepare(m, scene, ctx, cfg)?;
    let cs = candidate_set(&base);
    let fig = Aabb::unit_cube(m.to_pos);
    let nearest = cs
        .blocks
        .iter()
        .min_by(|a, b| {
            a.position
                .distance(&m.to_pos)
                .total_cmp(&b.position.distance(&m.to_pos))
                .then_with(|| a.id.cmp(&b.id))
        });
    let (ground, kind, head) = match nearest {
        None => (
            EntityId::Table,
            PredicateKind::OnTable,
            DescriptorSet::of_ref(RefKind::Table),
        ),
        Some(b) => {
            let g = EntityId::Block(b.id.clone());
            let kind = cfg
                .relations
                .iter()
                .copied()
                .filter(|k| !k.is_table_only())
                .max_by(|x, y| {
                    field_between(*x, &fig, &g, &cs, &cfg.field)
                        .total_cmp(&field_between(*y, &fig, &g, &cs, &cfg.field))
                        .then_with(|| y.cmp(x))
                })
                .unwrap_or(PredicateKind::OnTop);
            let mut d = vec![Descriptor::Ref(RefKind::Block), Descriptor::Col(b.color.clone())];
            if let Some(n) = ctx.ordinal(&b.id) {
                d.push(Descriptor::Ord(n));
            }
            (g, kind, DescriptorSet::new(d).expect("has REF"))
        }
    };
    let center = cs.center(&ground).expect("ground in scene");
    let region = table_region(&center, &cs.table);
    let ground_eci = Eci::locative(region, Eci::entity(head, ground), Frame::TableRegion);
    let eci = Eci::put(affected, Eci::relation(kind, target(), ground_eci));
    Ok(DirectiveAlternative::new(eci, &cfg.coefficients)?)
}
