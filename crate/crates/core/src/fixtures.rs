//! The six-step stacking scenario shipped with the crate: two stacks built
//! on an empty 10 x 10 table, all blocks the same colour.

use crate::scene::{load_scene, Plan, Scene};

pub const TWO_STACKS_SCENE: &str = include_str!("../fixtures/two_stacks_scene.json");
pub const TWO_STACKS_PLAN: &str = include_str!("../fixtures/two_stacks_plan.json");

pub fn two_stacks_scene() -> Scene {
    load_scene(TWO_STACKS_SCENE).expect("fixture scene is valid")
}

pub fn two_stacks_plan() -> Plan {
    Plan::parse(TWO_STACKS_PLAN).expect("fixture plan is valid")
}
