//! World state: table, unit-cube blocks and move directives.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Aabb, Vec3};

/// Centres closer than this on every axis count as interpenetrating.
pub const PENETRATION_SLACK: f64 = 0.05;
/// Vertical slack allowed between a block's bottom face and its support.
pub const SUPPORT_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SceneError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("table extents must be positive (width {width}, depth {depth})")]
    InvalidTable { width: f64, depth: f64 },
    #[error("duplicate block id `{0}`")]
    DuplicateId(BlockId),
    #[error("block `{0}` has a non-finite position")]
    NonFinite(BlockId),
    #[error("block `{0}` lies outside the table extents")]
    OutsideTable(BlockId),
    #[error("interpenetration: blocks `{0}` and `{1}` overlap")]
    Interpenetration(BlockId, BlockId),
    #[error("support: block `{0}` is neither on the table nor resting on another block")]
    Unsupported(BlockId),
    #[error("unknown block id `{0}`")]
    UnknownBlock(BlockId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub String);

impl BlockId {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: BlockId,
    #[serde(rename = "pos")]
    pub position: Vec3,
    pub color: String,
}

impl Block {
    pub fn new(id: impl Into<String>, position: Vec3, color: impl Into<String>) -> Self {
        Self {
            id: BlockId::new(id),
            position,
            color: color.into(),
        }
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::unit_cube(self.position)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableGeometry {
    pub half_width: f64,
    pub half_depth: f64,
}

impl TableGeometry {
    pub fn new(width: f64, depth: f64) -> Result<Self, SceneError> {
        if !(width > 0.0 && depth > 0.0) {
            return Err(SceneError::InvalidTable { width, depth });
        }
        Ok(Self {
            half_width: width / 2.0,
            half_depth: depth / 2.0,
        })
    }

    pub fn contains_xz(&self, p: &Vec3) -> bool {
        p.x.abs() <= self.half_width + 1e-9 && p.z.abs() <= self.half_depth + 1e-9
    }

    pub fn diagonal(&self) -> f64 {
        2.0 * (self.half_width.powi(2) + self.half_depth.powi(2)).sqrt()
    }

    /// The table as a slab just below the surface, for box-based geometry.
    pub fn aabb(&self) -> Aabb {
        Aabb {
            min: Vec3::new(-self.half_width, -1.0, -self.half_depth),
            max: Vec3::new(self.half_width, 0.0, self.half_depth),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub table: TableGeometry,
    blocks: Vec<Block>,
}

impl Scene {
    /// Builds a scene and checks every invariant.
    pub fn new(table: TableGeometry, blocks: Vec<Block>) -> Result<Self, SceneError> {
        let scene = Self { table, blocks };
        scene.validate()?;
        Ok(scene)
    }

    pub fn empty(table: TableGeometry) -> Self {
        Self {
            table,
            blocks: Vec::new(),
        }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, id: &BlockId) -> Option<&Block> {
        self.blocks.iter().find(|b| &b.id == id)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// The scene with one block lifted out. Support of the remaining blocks
    /// is not re-checked; the result is only used as grounding context.
    pub fn without(&self, id: &BlockId) -> Scene {
        Scene {
            table: self.table,
            blocks: self.blocks.iter().filter(|b| &b.id != id).cloned().collect(),
        }
    }

    /// Every block translated by `d` (table unchanged, invariants not checked).
    pub fn translated(&self, d: Vec3) -> Scene {
        Scene {
            table: self.table,
            blocks: self
                .blocks
                .iter()
                .map(|b| Block {
                    position: b.position + d,
                    ..b.clone()
                })
                .collect(),
        }
    }

    /// Same blocks, different listing order.
    pub fn reordered(&self, order: &[usize]) -> Scene {
        Scene {
            table: self.table,
            blocks: order.iter().map(|&i| self.blocks[i].clone()).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let mut seen = HashSet::new();
        for b in &self.blocks {
            if !seen.insert(&b.id) {
                return Err(SceneError::DuplicateId(b.id.clone()));
            }
            if !b.position.is_finite() {
                return Err(SceneError::NonFinite(b.id.clone()));
            }
            if !self.table.contains_xz(&b.position) {
                return Err(SceneError::OutsideTable(b.id.clone()));
            }
        }
        for (i, a) in self.blocks.iter().enumerate() {
            for b in &self.blocks[i + 1..] {
                if interpenetrate(&a.position, &b.position) {
                    return Err(SceneError::Interpenetration(a.id.clone(), b.id.clone()));
                }
            }
        }
        for b in &self.blocks {
            if !self.is_supported(b) {
                return Err(SceneError::Unsupported(b.id.clone()));
            }
        }
        Ok(())
    }

    fn is_supported(&self, b: &Block) -> bool {
        if (b.position.y - 0.5).abs() <= SUPPORT_TOLERANCE {
            return true;
        }
        let bottom = b.position.y - 0.5;
        self.blocks.iter().any(|s| {
            s.id != b.id
                && rests_on(&b.position, &s.position)
                && (bottom - (s.position.y + 0.5)).abs() <= SUPPORT_TOLERANCE
        })
    }

    /// The block directly under `id`, if it rests on one.
    pub fn support_of(&self, id: &BlockId) -> Option<&Block> {
        let b = self.block(id)?;
        if (b.position.y - 0.5).abs() <= SUPPORT_TOLERANCE {
            return None;
        }
        let bottom = b.position.y - 0.5;
        self.blocks.iter().find(|s| {
            s.id != b.id
                && rests_on(&b.position, &s.position)
                && (bottom - (s.position.y + 0.5)).abs() <= SUPPORT_TOLERANCE
        })
    }

    pub fn fresh_id(&self) -> BlockId {
        (1..)
            .map(|n| BlockId(format!("b{n}")))
            .find(|id| self.block(id).is_none())
            .expect("unbounded id space")
    }

    /// Applies a move; a new-block spec gets a fresh id. Returns the new scene
    /// and the id of the block that was placed.
    pub fn apply_move(&self, m: &MoveDirective) -> Result<(Scene, BlockId), SceneError> {
        let mut blocks = self.blocks.clone();
        let id = match &m.block {
            BlockSpec::New { color } => {
                let id = self.fresh_id();
                blocks.push(Block {
                    id: id.clone(),
                    position: m.to_pos,
                    color: color.clone().unwrap_or_else(|| DEFAULT_COLOR.to_string()),
                });
                id
            }
            BlockSpec::Existing(id) => {
                let b = blocks
                    .iter_mut()
                    .find(|b| &b.id == id)
                    .ok_or_else(|| SceneError::UnknownBlock(id.clone()))?;
                b.position = m.to_pos;
                id.clone()
            }
        };
        Ok((Scene::new(self.table, blocks)?, id))
    }

    pub fn to_file(&self) -> SceneFile {
        SceneFile {
            table: TableFile {
                width: self.table.half_width * 2.0,
                depth: self.table.half_depth * 2.0,
            },
            blocks: self.blocks.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("scene serializes")
    }
}

/// Colour given to new blocks whose spec leaves it open.
pub const DEFAULT_COLOR: &str = "blue";

fn interpenetrate(a: &Vec3, b: &Vec3) -> bool {
    let lim = 1.0 - PENETRATION_SLACK;
    (a.x - b.x).abs() < lim && (a.y - b.y).abs() < lim && (a.z - b.z).abs() < lim
}

fn rests_on(upper: &Vec3, lower: &Vec3) -> bool {
    (upper.x - lower.x).abs() < 1.0 && (upper.z - lower.z).abs() < 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableFile {
    pub width: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub table: TableFile,
    #[serde(default)]
    pub blocks: Vec<Block>,
}

impl SceneFile {
    pub fn into_scene(self) -> Result<Scene, SceneError> {
        Scene::new(TableGeometry::new(self.table.width, self.table.depth)?, self.blocks)
    }
}

pub fn load_scene(document: &str) -> Result<Scene, SceneError> {
    let file: SceneFile =
        serde_json::from_str(document).map_err(|e| SceneError::Parse(e.to_string()))?;
    file.into_scene()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BlockSpec {
    New { color: Option<String> },
    Existing(BlockId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveDirective {
    pub block: BlockSpec,
    pub to_pos: Vec3,
}

impl MoveDirective {
    pub fn new_block(to_pos: Vec3) -> Self {
        Self {
            block: BlockSpec::New { color: None },
            to_pos,
        }
    }

    pub fn is_new(&self) -> bool {
        matches!(self.block, BlockSpec::New { .. })
    }

    /// The id of the moved block, if it already exists.
    pub fn existing(&self) -> Option<&BlockId> {
        match &self.block {
            BlockSpec::Existing(id) => Some(id),
            BlockSpec::New { .. } => None,
        }
    }
}

/// `translate(id, dir)` expressed as the equivalent `move(id, pos + dir)`.
pub fn normalize_translate(
    block: &BlockId,
    dir: Vec3,
    scene: &Scene,
) -> Result<MoveDirective, SceneError> {
    let b = scene
        .block(block)
        .ok_or_else(|| SceneError::UnknownBlock(block.clone()))?;
    Ok(MoveDirective {
        block: BlockSpec::Existing(block.clone()),
        to_pos: b.position + dir,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStepFile {
    /// `"new"` or the id of an existing block.
    pub block: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<Vec3>,
    /// Relative displacement, the `translate` form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub by: Option<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStepFile>,
}

impl Plan {
    pub fn parse(document: &str) -> Result<Plan, SceneError> {
        serde_json::from_str(document).map_err(|e| SceneError::Parse(e.to_string()))
    }

    /// Resolves step `i` against the scene it will be applied to.
    pub fn directive(&self, i: usize, scene: &Scene) -> Result<MoveDirective, SceneError> {
        let step = &self.steps[i];
        let spec = if step.block == "new" {
            BlockSpec::New {
                color: step.color.clone(),
            }
        } else {
            BlockSpec::Existing(BlockId::new(step.block.clone()))
        };
        match (step.to, step.by, &spec) {
            (Some(to), None, _) => Ok(MoveDirective {
                block: spec,
                to_pos: to,
            }),
            (None, Some(by), BlockSpec::Existing(id)) => normalize_translate(id, by, scene),
            _ => Err(SceneError::Parse(format!(
                "plan step {i}: give exactly one of `to` or `by` (`by` needs an existing block)"
            ))),
        }
    }
}
