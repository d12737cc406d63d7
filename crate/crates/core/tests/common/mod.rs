//! Random scenes built by replaying random placements, with the interaction
//! context each placement leaves behind.

#![allow(dead_code)]

use egt_core::egt::machine_instruction_to_eci;
use egt_core::report::narrated_relation;
use egt_core::{EgtConfig, InteractionContext, MoveDirective, Scene, TableGeometry, Vec3};
use rand::seq::IndexedRandom;
use rand::{Rng, RngCore};

pub const COLORS: [&str; 4] = ["red", "blue", "green", "yellow"];

pub struct Episode {
    pub scene: Scene,
    pub ctx: InteractionContext,
    /// A further valid placement, not yet applied.
    pub next: MoveDirective,
}

fn snap(v: f64) -> f64 {
    (v * 4.0).round() / 4.0
}

/// A valid placement for a new block: on top of a block, beside one, or
/// somewhere free on the table.
pub fn random_move(rng: &mut impl RngCore, scene: &Scene, colors: &[&str]) -> Option<MoveDirective> {
    let color = colors.choose(rng).expect("colours").to_string();
    for _ in 0..200 {
        let blocks = scene.blocks();
        let roll: f64 = rng.random();
        let to = if !blocks.is_empty() && roll < 0.35 {
            let b = blocks.choose(rng).expect("non-empty");
            Vec3::new(b.position.x, b.position.y + 1.0, b.position.z)
        } else if !blocks.is_empty() && roll < 0.7 {
            let b = blocks.choose(rng).expect("non-empty");
            let gap: f64 = rng.random_range(1.0..2.5);
            let (dx, dz) = *[(gap, 0.0), (-gap, 0.0), (0.0, gap), (0.0, -gap)].choose(rng).expect("four");
            Vec3::new(snap(b.position.x + dx), 0.5, snap(b.position.z + dz))
        } else {
            Vec3::new(snap(rng.random_range(-4.5..4.5)), 0.5, snap(rng.random_range(-4.5..4.5)))
        };
        let m = MoveDirective {
            block: egt_core::scene::BlockSpec::New { color: Some(color.clone()) },
            to_pos: to,
        };
        if to.y <= 3.5 && scene.apply_move(&m).is_ok() {
            return Some(m);
        }
    }
    None
}

/// Places `n` blocks one at a time, narrating each placement so the
/// context evolves as in a real session.
pub fn random_episode(rng: &mut impl RngCore, n: usize, n_colors: usize, cfg: &EgtConfig) -> Episode {
    let colors = &COLORS[..n_colors.clamp(1, COLORS.len())];
    let mut scene = Scene::empty(TableGeometry::new(10.0, 10.0).expect("table"));
    let mut ctx = InteractionContext::new();
    for _ in 0..n {
        let Some(m) = random_move(rng, &scene, colors) else {
            break;
        };
        let narrated = machine_instruction_to_eci(&m, &scene, &ctx, cfg)
            .ok()
            .and_then(|g| narrated_relation(&g.best.eci, &ctx));
        let (next, placed) = scene.apply_move(&m).expect("valid move");
        ctx.record_action(&placed, &next, narrated, true, &cfg.field);
        scene = next;
    }
    let next = random_move(rng, &scene, colors).unwrap_or_else(|| MoveDirective::new_block(Vec3::new(0.0, 0.5, 0.0)));
    Episode { scene, ctx, next }
}
