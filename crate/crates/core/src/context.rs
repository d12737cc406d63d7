//! Dialog, task and action history used for context injection.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::grouping::{candidate_set, EntityId};
use crate::predicates::{evaluate_relations, FieldParams, Figure, PredicateKind};
use crate::scene::{BlockId, Scene};

/// The spatial relation that characterises the previous action: the block
/// it was put on, or failing that the relation the directive named.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LastAction {
    pub kind: PredicateKind,
    pub ground: EntityId,
    pub succeeded: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionContext {
    /// Dialog context: ground of the last narrated directive.
    pub last_mentioned: Option<EntityId>,
    /// Task context: the block acted upon last.
    pub last_acted: Option<BlockId>,
    /// Action context.
    pub last_action: Option<LastAction>,
    /// 1-based placement order within the session.
    pub placement_order: BTreeMap<BlockId, usize>,
}

impl InteractionContext {
    pub fn new() -> Self {
        Self::default()
    }

    /// Entity that "it" refers to. Task context wins over dialog context.
    pub fn it(&self) -> Option<EntityId> {
        self.last_acted
            .clone()
            .map(EntityId::Block)
            .or_else(|| self.last_mentioned.clone())
    }

    pub fn ordinal(&self, id: &BlockId) -> Option<usize> {
        self.placement_order.get(id).copied()
    }

    /// Records an executed step. `scene_after` includes the placed block;
    /// `narrated` is the (kind, ground) of the directive that was spoken, if
    /// it named a relation.
    pub fn record_action(
        &mut self,
        placed: &BlockId,
        scene_after: &Scene,
        narrated: Option<(PredicateKind, EntityId)>,
        succeeded: bool,
        params: &FieldParams,
    ) {
        let support = scene_after
            .support_of(placed)
            .map(|s| (PredicateKind::OnTop, EntityId::Block(s.id.clone())));
        let primary = support.or_else(|| {
            narrated
                .clone()
                .filter(|(k, g)| k.is_directional() && matches!(g, EntityId::Block(_) | EntityId::Group(_)))
                .and_then(|(k, g)| {
                    // The named ground must still hold for the placed block.
                    let rest = scene_after.without(placed);
                    let cs = candidate_set(&rest);
                    let b = scene_after.block(placed)?;
                    evaluate_relations(&Figure::Target, &b.aabb(), &cs, params)
                        .into_iter()
                        .any(|r| r.kind == k && r.ground == g)
                        .then_some((k, g))
                })
        });
        self.last_action = primary.map(|(kind, ground)| LastAction {
            kind,
            ground,
            succeeded,
        });
        if let Some((_, g)) = narrated {
            self.last_mentioned = Some(g);
        }
        self.last_acted = Some(placed.clone());
        let next = self.placement_order.len() + 1;
        self.placement_order.entry(placed.clone()).or_insert(next);
    }

    /// Drops references to blocks that no longer exist.
    pub fn prune(&mut self, scene: &Scene) {
        if self.last_acted.as_ref().is_some_and(|b| scene.block(b).is_none()) {
            self.last_acted = None;
        }
        if let Some(EntityId::Block(b)) = &self.last_mentioned {
            if scene.block(b).is_none() {
                self.last_mentioned = None;
            }
        }
        self.placement_order.retain(|b, _| scene.block(b).is_some());
    }
}
