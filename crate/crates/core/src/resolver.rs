//! Interprets directive trees against a scene, independently of the
//! generator: referents by enumerating every candidate, targets by grid
//! search.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::context::InteractionContext;
use crate::descriptors::matches;
use crate::eci::Eci;
use crate::geometry::Vec3;
use crate::grouping::{candidate_set, CandidateSet, EntityId};
use crate::predicates::{
    entity_relation_holds, locative_holds, target_region, FieldParams, PredicateKind, RegionError,
    TargetRegion,
};
use crate::scene::Scene;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResolveError {
    #[error("ground at level {level} is ambiguous between {referents:?}")]
    AmbiguousGround { level: usize, referents: Vec<EntityId> },
    #[error("ground at level {level} refers to nothing")]
    NoReferent { level: usize },
    #[error("no previous action to repeat")]
    NoActionContext,
    #[error("not a directive: {0}")]
    Malformed(String),
    #[error(transparent)]
    Region(#[from] RegionError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    /// Referent of the top-level ground.
    pub referents: BTreeSet<EntityId>,
    pub target: Option<TargetRegion>,
}

/// Every candidate satisfying the description, ignoring whether nested
/// grounds are themselves unique.
pub fn resolve_entity(eci: &Eci, cs: &CandidateSet, ctx: &InteractionContext, params: &FieldParams) -> BTreeSet<EntityId> {
    match eci {
        Eci::Entity(r) => cs
            .entities()
            .into_iter()
            .filter(|x| matches(x, &r.descriptors, cs, ctx, params))
            .collect(),
        Eci::Relation { kind, figure, ground } => {
            let figures = resolve_entity(figure, cs, ctx, params);
            match ground.as_ref() {
                Eci::Frame { frame } => figures
                    .into_iter()
                    .filter(|x| locative_holds(*kind, *frame, x, cs, params))
                    .collect(),
                g => {
                    let grounds = resolve_entity(g, cs, ctx, params);
                    figures
                        .into_iter()
                        .filter(|x| grounds.iter().any(|y| entity_relation_holds(*kind, x, y, cs, params)))
                        .collect()
                }
            }
        }
        Eci::And { children } => {
            let mut sets = children.iter().map(|c| resolve_entity(c, cs, ctx, params));
            let Some(first) = sets.next() else {
                return BTreeSet::new();
            };
            sets.fold(first, |acc, s| acc.intersection(&s).cloned().collect())
        }
        _ => BTreeSet::new(),
    }
}

/// Resolves a ground, requiring every ground nested in it to be unique too.
fn resolve_strict(
    eci: &Eci,
    level: usize,
    cs: &CandidateSet,
    ctx: &InteractionContext,
    params: &FieldParams,
) -> Result<EntityId, ResolveError> {
    let mut inner = |e: &Eci| -> Result<(), ResolveError> {
        if let Eci::Relation { ground, .. } = e {
            if !matches!(ground.as_ref(), Eci::Frame { .. }) {
                resolve_strict(ground, level + 1, cs, ctx, params)?;
            }
        }
        Ok(())
    };
    match eci {
        Eci::Relation { .. } => inner(eci)?,
        Eci::And { children } => children.iter().try_for_each(&mut inner)?,
        _ => {}
    }
    let refs = resolve_entity(eci, cs, ctx, params);
    match refs.len() {
        0 => Err(ResolveError::NoReferent { level }),
        1 => Ok(refs.into_iter().next().expect("one")),
        _ => Err(ResolveError::AmbiguousGround {
            level,
            referents: refs.into_iter().collect(),
        }),
    }
}

/// Unique grounds and the target region a directive denotes.
pub fn resolve_directive(
    eci: &Eci,
    scene: &Scene,
    ctx: &InteractionContext,
    params: &FieldParams,
) -> Result<Resolution, ResolveError> {
    match eci {
        Eci::ActionContext { .. } => {
            let (Some(la), Some(last)) = (&ctx.last_action, &ctx.last_acted) else {
                return Err(ResolveError::NoActionContext);
            };
            let cs = candidate_set(scene);
            let g = EntityId::Block(last.clone());
            if !cs.contains(&g) {
                return Err(ResolveError::NoActionContext);
            }
            let target = target_region(&[(la.kind, g.clone())], &cs, params)?;
            Ok(Resolution {
                referents: BTreeSet::from([g]),
                target: Some(target),
            })
        }
        Eci::Put { affected, result } => {
            let base = match &affected.referent {
                Some(e) => {
                    let full = candidate_set(scene);
                    let who = resolve_strict(&Eci::Entity(affected.clone()), 0, &full, ctx, params)?;
                    match who {
                        EntityId::Block(b) => scene.without(&b),
                        _ => return Err(ResolveError::Malformed(format!("cannot move {e}"))),
                    }
                }
                None => scene.clone(),
            };
            let cs = candidate_set(&base);
            let relations = top_relations(result)?;
            let mut pairs: Vec<(PredicateKind, EntityId)> = Vec::new();
            let mut referents = BTreeSet::new();
            for (kind, ground) in relations {
                let g = resolve_strict(ground, 1, &cs, ctx, params)?;
                referents.insert(g.clone());
                pairs.push((kind, g));
            }
            let target = target_region(&pairs, &cs, params)?;
            Ok(Resolution {
                referents,
                target: Some(target),
            })
        }
        other => Err(ResolveError::Malformed(other.to_canonical())),
    }
}

fn top_relations(result: &Eci) -> Result<Vec<(PredicateKind, &Eci)>, ResolveError> {
    match result {
        Eci::Relation { kind, ground, .. } => Ok(vec![(*kind, ground.as_ref())]),
        Eci::And { children } => {
            let mut out = Vec::new();
            for c in children {
                out.extend(top_relations(c)?);
            }
            Ok(out)
        }
        other => Err(ResolveError::Malformed(other.to_canonical())),
    }
}

/// Whether a block placed at `placed_at` satisfies the directive.
pub fn check_placement(
    eci: &Eci,
    placed_at: Vec3,
    scene: &Scene,
    ctx: &InteractionContext,
    params: &FieldParams,
) -> Result<bool, ResolveError> {
    let r = resolve_directive(eci, scene, ctx, params)?;
    let base = match eci {
        Eci::Put { affected, .. } => match &affected.referent {
            Some(EntityId::Block(b)) => scene.without(b),
            _ => scene.clone(),
        },
        _ => scene.clone(),
    };
    let cs = candidate_set(&base);
    Ok(r.target.is_some_and(|t| t.accepts(placed_at, &cs)))
}
