//! Scenes of controllable size for the benchmarks.

use egt_core::{Block, MoveDirective, Scene, TableGeometry, Vec3};

const COLORS: [&str; 3] = ["red", "blue", "green"];

/// `n` blocks on a 20 x 20 table: stacks of up to three along a grid with
/// two units between columns, coloured in turn.
pub fn grid_scene(n: usize) -> Scene {
    let blocks = (0..n)
        .map(|i| {
            let column = i / 3;
            let level = i % 3;
            let x = -9.0 + 2.0 * (column % 9) as f64;
            let z = -9.0 + 2.0 * (column / 9) as f64;
            Block::new(format!("b{i}"), Vec3::new(x, 0.5 + level as f64, z), COLORS[i % COLORS.len()])
        })
        .collect();
    Scene::new(TableGeometry::new(20.0, 20.0).expect("table"), blocks).expect("grid scene is valid")
}

/// A new block on the table beside the first column.
pub fn next_move() -> MoveDirective {
    MoveDirective::new_block(Vec3::new(-8.0, 0.5, 9.0))
}
