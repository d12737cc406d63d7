//! Spatial predicates as soft fields over space.
//!
//! Directional predicates are separable: a plateau-with-Gaussian-falloff
//! profile along the predicate axis times Gaussian falloffs on the two
//! lateral axes. All distances are taken between boxes, so a predicate and
//! its dual (`behind(a, b)` / `in_front(b, a)`) evaluate the same number.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, Axis, Vec3};
use crate::grouping::{CandidateSet, EntityId, GroupKind, RefKind};
use crate::scene::TableGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateKind {
    OnTop,
    Below,
    InFront,
    Behind,
    LeftOf,
    RightOf,
    NextTo,
    Near,
    Far,
    AtCorner,
    AtCenter,
    OnTable,
}

impl PredicateKind {
    pub const ALL: [PredicateKind; 12] = [
        PredicateKind::OnTop,
        PredicateKind::Below,
        PredicateKind::InFront,
        PredicateKind::Behind,
        PredicateKind::LeftOf,
        PredicateKind::RightOf,
        PredicateKind::NextTo,
        PredicateKind::Near,
        PredicateKind::Far,
        PredicateKind::AtCorner,
        PredicateKind::AtCenter,
        PredicateKind::OnTable,
    ];

    pub const DIRECTIONAL: [PredicateKind; 6] = [
        PredicateKind::OnTop,
        PredicateKind::Below,
        PredicateKind::InFront,
        PredicateKind::Behind,
        PredicateKind::LeftOf,
        PredicateKind::RightOf,
    ];

    pub fn is_directional(self) -> bool {
        Self::DIRECTIONAL.contains(&self)
    }

    /// Predicates whose ground can only be the table.
    pub fn is_table_only(self) -> bool {
        matches!(
            self,
            PredicateKind::AtCorner | PredicateKind::AtCenter | PredicateKind::OnTable
        )
    }

    pub fn dual(self) -> Option<PredicateKind> {
        use PredicateKind::*;
        Some(match self {
            OnTop => Below,
            Below => OnTop,
            InFront => Behind,
            Behind => InFront,
            LeftOf => RightOf,
            RightOf => LeftOf,
            NextTo => NextTo,
            Near => Near,
            Far => Far,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        use PredicateKind::*;
        match self {
            OnTop => "on_top",
            Below => "below",
            InFront => "in_front",
            Behind => "behind",
            LeftOf => "left_of",
            RightOf => "right_of",
            NextTo => "next_to",
            Near => "near",
            Far => "far",
            AtCorner => "at_corner",
            AtCenter => "at_center",
            OnTable => "on_table",
        }
    }

    pub fn parse(s: &str) -> Option<PredicateKind> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for PredicateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Field shape parameters, in block-edge units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    /// A soft predicate counts as true at or above this value.
    pub acceptance: f64,
    /// Plateau of the along-axis profile, measured from the ground's face to
    /// the figure's centre: `[1 - w, 1 + w]`, i.e. centred one edge out.
    pub plateau_half_width: f64,
    pub axis_sigma: f64,
    pub lateral_sigma: f64,
    pub contact_tolerance: f64,
    pub near_distance: f64,
    /// Fraction of the table diagonal beyond which things are far apart.
    pub far_fraction: f64,
    pub far_sigma: f64,
    /// Face gap for `next_to` (0.5 = centres 1.5 apart for unit blocks).
    pub next_to_gap: f64,
    pub equal_height_tolerance: f64,
    /// Sigma of the centre/corner lobes as a fraction of the half extent.
    pub table_sigma_fraction: f64,
    /// Extremal margin for locative phrases (at the back, on the left, ...).
    pub extremal_margin: f64,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self {
            acceptance: 0.5,
            plateau_half_width: 0.5,
            axis_sigma: 0.5,
            lateral_sigma: 0.75,
            contact_tolerance: 0.1,
            near_distance: 2.5,
            far_fraction: 0.6,
            far_sigma: 1.0,
            next_to_gap: 0.5,
            equal_height_tolerance: 0.25,
            table_sigma_fraction: 0.15,
            extremal_margin: 0.5,
        }
    }
}

fn gauss(d: f64, sigma: f64) -> f64 {
    (-(d * d) / (2.0 * sigma * sigma)).exp()
}

impl FieldParams {
    fn plateau(&self, s: f64) -> f64 {
        let lo = 1.0 - self.plateau_half_width;
        let hi = 1.0 + self.plateau_half_width;
        if s < lo {
            gauss(lo - s, self.axis_sigma)
        } else if s > hi {
            gauss(s - hi, self.axis_sigma)
        } else {
            1.0
        }
    }

    fn lateral(&self, fig: &Aabb, ground: &Aabb, axis: Axis) -> f64 {
        // For a unit figure this is the distance of its centre from the
        // ground's extent on that axis.
        let d = (fig.separation(ground, axis) + 0.5).max(0.0);
        gauss(d, self.lateral_sigma)
    }

    fn contact(&self, gap: f64) -> f64 {
        let g = gap.abs();
        if g <= self.contact_tolerance {
            1.0
        } else {
            gauss(g - self.contact_tolerance, self.axis_sigma)
        }
    }

    /// Field between two boxes, neither of which is the table.
    pub fn between(&self, kind: PredicateKind, fig: &Aabb, ground: &Aabb) -> f64 {
        use PredicateKind::*;
        let horizontal = |axis: Axis, s: f64| {
            let others: Vec<Axis> = Axis::ALL.into_iter().filter(|a| *a != axis).collect();
            self.plateau(s + 0.5)
                * self.lateral(fig, ground, others[0])
                * self.lateral(fig, ground, others[1])
        };
        match kind {
            OnTop => {
                self.contact(fig.min.y - ground.max.y)
                    * self.lateral(fig, ground, Axis::X)
                    * self.lateral(fig, ground, Axis::Z)
            }
            Below => {
                self.contact(ground.min.y - fig.max.y)
                    * self.lateral(fig, ground, Axis::X)
                    * self.lateral(fig, ground, Axis::Z)
            }
            Behind => horizontal(Axis::Z, fig.min.z - ground.max.z),
            InFront => horizontal(Axis::Z, ground.min.z - fig.max.z),
            RightOf => horizontal(Axis::X, fig.min.x - ground.max.x),
            LeftOf => horizontal(Axis::X, ground.min.x - fig.max.x),
            NextTo => {
                let sx = fig.separation(ground, Axis::X).max(0.0);
                let sz = fig.separation(ground, Axis::Z).max(0.0);
                let gap = (sx * sx + sz * sz).sqrt();
                let h = if gap <= self.next_to_gap {
                    1.0
                } else {
                    gauss(gap - self.next_to_gap, self.axis_sigma)
                };
                // equal height: unit centres within tolerance <=> overlap depth >= 1 - tol
                let sy = fig.separation(ground, Axis::Y);
                let limit = -(1.0 - self.equal_height_tolerance);
                let v = if sy <= limit {
                    1.0
                } else {
                    gauss(sy - limit, self.equal_height_tolerance)
                };
                h * v
            }
            Near => {
                let d = fig.center().distance(&ground.center());
                if d <= self.near_distance {
                    1.0
                } else {
                    gauss(d - self.near_distance, self.axis_sigma)
                }
            }
            Far | AtCorner | AtCenter | OnTable => 0.0,
        }
    }

    fn far(&self, fig: &Aabb, ground: &Aabb, table: &TableGeometry) -> f64 {
        let d = fig.center().distance(&ground.center());
        let limit = self.far_fraction * table.diagonal();
        if d >= limit {
            1.0
        } else {
            gauss(limit - d, self.far_sigma)
        }
    }

    /// Field of a table predicate for a figure box.
    pub fn table_field(&self, kind: PredicateKind, fig: &Aabb, table: &TableGeometry) -> f64 {
        let c = fig.center();
        let outside_x = (c.x.abs() - table.half_width).max(0.0);
        let outside_z = (c.z.abs() - table.half_depth).max(0.0);
        let on = self.contact(fig.min.y)
            * gauss(outside_x, self.axis_sigma)
            * gauss(outside_z, self.axis_sigma);
        let sx = self.table_sigma_fraction * table.half_width;
        let sz = self.table_sigma_fraction * table.half_depth;
        match kind {
            PredicateKind::OnTable => on,
            PredicateKind::AtCenter => on * gauss(c.x, sx) * gauss(c.z, sz),
            PredicateKind::AtCorner => {
                let mut best: f64 = 0.0;
                for (cx, cz) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
                    let v = gauss(c.x - cx * table.half_width, sx)
                        * gauss(c.z - cz * table.half_depth, sz);
                    best = best.max(v);
                }
                on * best
            }
            _ => 0.0,
        }
    }
}

/// What a relation is about: the imaginary block at the target position, or
/// an entity of the candidate set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Target,
    Entity(EntityId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpatialRelation {
    pub figure: Figure,
    pub ground: EntityId,
    pub kind: PredicateKind,
}

/// Field of `kind` for a figure box against a ground entity.
pub fn field_between(
    kind: PredicateKind,
    fig: &Aabb,
    ground: &EntityId,
    cs: &CandidateSet,
    params: &FieldParams,
) -> f64 {
    match ground {
        EntityId::Table => params.table_field(kind, fig, &cs.table),
        _ if kind.is_table_only() => 0.0,
        _ => {
            let Some(g) = cs.aabb(ground) else {
                return 0.0;
            };
            if kind == PredicateKind::Far {
                params.far(fig, &g, &cs.table)
            } else {
                params.between(kind, fig, &g)
            }
        }
    }
}

/// Field value at a point, taken as the centre of a unit block.
pub fn field_value(
    kind: PredicateKind,
    ground: &EntityId,
    point: Vec3,
    cs: &CandidateSet,
    params: &FieldParams,
) -> f64 {
    field_between(kind, &Aabb::unit_cube(point), ground, cs, params)
}

/// True when one entity is part of the other (a block and its stack).
pub fn overlaps(a: &EntityId, b: &EntityId, cs: &CandidateSet) -> bool {
    match (a, b) {
        (EntityId::Block(x), EntityId::Block(y)) => x == y,
        (EntityId::Block(x), EntityId::Group(g)) | (EntityId::Group(g), EntityId::Block(x)) => {
            cs.group(g).is_some_and(|g| g.contains(x))
        }
        (EntityId::Group(g), EntityId::Group(h)) => match (cs.group(g), cs.group(h)) {
            (Some(g), Some(h)) => g.members.iter().any(|m| h.contains(m)),
            _ => false,
        },
        (EntityId::Table, EntityId::Table) => true,
        _ => false,
    }
}

/// Every (ground, kind) whose field at the figure reaches the acceptance
/// threshold. `near` is reported only when no contact-style relation holds
/// between the same pair. Sorted by (ground, kind).
pub fn evaluate_relations(
    figure: &Figure,
    fig_box: &Aabb,
    cs: &CandidateSet,
    params: &FieldParams,
) -> Vec<SpatialRelation> {
    let mut out = Vec::new();
    for ground in cs.entities() {
        if let Figure::Entity(f) = figure {
            if overlaps(f, &ground, cs) {
                continue;
            }
        }
        let kinds: Vec<PredicateKind> = if ground == EntityId::Table {
            vec![PredicateKind::AtCorner, PredicateKind::AtCenter, PredicateKind::OnTable]
        } else {
            PredicateKind::ALL
                .into_iter()
                .filter(|k| !k.is_table_only())
                .collect()
        };
        let held: Vec<PredicateKind> = kinds
            .into_iter()
            .filter(|k| field_between(*k, fig_box, &ground, cs, params) >= params.acceptance)
            .collect();
        let contact = held
            .iter()
            .any(|k| k.is_directional() || *k == PredicateKind::NextTo);
        for kind in held {
            if kind == PredicateKind::Near && contact {
                continue;
            }
            out.push(SpatialRelation {
                figure: figure.clone(),
                ground: ground.clone(),
                kind,
            });
        }
    }
    out.sort();
    out
}

/// Whether a relation holds between two entities of the candidate set.
pub fn entity_relation_holds(
    kind: PredicateKind,
    figure: &EntityId,
    ground: &EntityId,
    cs: &CandidateSet,
    params: &FieldParams,
) -> bool {
    if overlaps(figure, ground, cs) {
        return false;
    }
    let Some(fig) = cs.aabb(figure) else {
        return false;
    };
    field_between(kind, &fig, ground, cs, params) >= params.acceptance
}

/// Implicit frames for locative phrases that carry no explicit ground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Extremal position among the entities of the same kind, or the
    /// top/bottom of a stack ("the block at the back", "on the top").
    Scene,
    /// Region of the table surface ("at the front" of the table).
    TableRegion,
}

/// Region of the table a point falls in: `AtCenter`, or the dominant side
/// as `InFront` / `Behind` / `LeftOf` / `RightOf`.
pub fn table_region(p: &Vec3, table: &TableGeometry) -> PredicateKind {
    let rx = p.x / table.half_width;
    let rz = p.z / table.half_depth;
    if rx.abs() <= 0.25 && rz.abs() <= 0.25 {
        PredicateKind::AtCenter
    } else if rz.abs() >= rx.abs() {
        if rz < 0.0 {
            PredicateKind::InFront
        } else {
            PredicateKind::Behind
        }
    } else if rx < 0.0 {
        PredicateKind::LeftOf
    } else {
        PredicateKind::RightOf
    }
}

fn extremal(
    kind: PredicateKind,
    entity: &EntityId,
    cs: &CandidateSet,
    margin: f64,
) -> bool {
    let (axis, sign) = match kind {
        PredicateKind::Behind => (Axis::Z, 1.0),
        PredicateKind::InFront => (Axis::Z, -1.0),
        PredicateKind::RightOf => (Axis::X, 1.0),
        PredicateKind::LeftOf => (Axis::X, -1.0),
        _ => return false,
    };
    let Some(rk) = cs.ref_kind(entity) else {
        return false;
    };
    let Some(me) = cs.center(entity) else {
        return false;
    };
    let mine = sign * me.get(axis);
    let values: Vec<f64> = cs
        .class(rk)
        .iter()
        .filter_map(|e| cs.center(e))
        .map(|c| sign * c.get(axis))
        .collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    mine >= best - margin && values.iter().any(|v| *v <= mine - margin)
}

/// Locative phrase semantics: does `kind` hold for `entity` in `frame`?
pub fn locative_holds(
    kind: PredicateKind,
    frame: Frame,
    entity: &EntityId,
    cs: &CandidateSet,
    params: &FieldParams,
) -> bool {
    match frame {
        Frame::Scene => match (kind, entity) {
            (PredicateKind::OnTop, EntityId::Block(b)) => cs
                .groups
                .iter()
                .any(|g| g.maximal && g.kind == GroupKind::Stack && g.members.last() == Some(b)),
            (PredicateKind::Below, EntityId::Block(b)) => cs
                .groups
                .iter()
                .any(|g| g.maximal && g.kind == GroupKind::Stack && g.members.first() == Some(b)),
            (PredicateKind::OnTop | PredicateKind::Below, _) => false,
            (_, EntityId::Table) => false,
            _ => extremal(kind, entity, cs, params.extremal_margin),
        },
        Frame::TableRegion => cs
            .center(entity)
            .is_some_and(|c| table_region(&c, &cs.table) == kind),
    }
}

/// Locative relations available for an entity within the scene frame.
pub fn scene_locatives(entity: &EntityId, cs: &CandidateSet, params: &FieldParams) -> Vec<PredicateKind> {
    if cs.ref_kind(entity) == Some(RefKind::Table) {
        return Vec::new();
    }
    PredicateKind::DIRECTIONAL
        .into_iter()
        .filter(|k| locative_holds(*k, Frame::Scene, entity, cs, params))
        .collect()
}

/// Grid of field samples over the table at one or more heights.
/// `values[layer][row][col]`; row 0 is the back edge, column 0 the left edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSample {
    pub xs: Vec<f64>,
    pub zs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<Vec<Vec<f64>>>,
}

impl FieldSample {
    pub fn layer(&self, i: usize) -> &[Vec<f64>] {
        &self.values[i]
    }

    /// Max over layers, cell by cell.
    pub fn projected(&self) -> Vec<Vec<f64>> {
        let mut out = self.values[0].clone();
        for layer in &self.values[1..] {
            for (r, row) in layer.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    out[r][c] = out[r][c].max(*v);
                }
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for row in self.projected() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.2}")).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }

    /// Binary 8-bit portable graymap of the projected field.
    pub fn to_pgm(&self) -> Vec<u8> {
        let grid = self.projected();
        let h = grid.len();
        let w = grid.first().map_or(0, Vec::len);
        let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
        for row in grid {
            out.extend(row.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
        }
        out
    }
}

/// Samples a predicate field on a `res_x` by `res_z` grid of cell centres
/// covering the table, at each of the given heights (figure centres).
pub fn sample_field(
    kind: PredicateKind,
    ground: &EntityId,
    cs: &CandidateSet,
    params: &FieldParams,
    resolution: (usize, usize),
    heights: &[f64],
) -> FieldSample {
    let (nx, nz) = (resolution.0.max(2), resolution.1.max(2));
    let t = &cs.table;
    let xs: Vec<f64> = (0..nx)
        .map(|i| -t.half_width + (i as f64 + 0.5) * 2.0 * t.half_width / nx as f64)
        .collect();
    // back edge first
    let zs: Vec<f64> = (0..nz)
        .map(|j| t.half_depth - (j as f64 + 0.5) * 2.0 * t.half_depth / nz as f64)
        .collect();
    let ys = if heights.is_empty() { vec![0.5] } else { heights.to_vec() };
    let values = ys
        .iter()
        .map(|&y| {
            zs.iter()
                .map(|&z| {
                    xs.iter()
                        .map(|&x| field_value(kind, ground, Vec3::new(x, y, z), cs, params))
                        .collect()
                })
                .collect()
        })
        .collect();
    FieldSample { xs, zs, ys, values }
}

/// The natural sampling height for a predicate: one block above the
/// ground's top for `on_top`, table level otherwise.
pub fn default_height(kind: PredicateKind, ground: &EntityId, cs: &CandidateSet) -> f64 {
    match (kind, cs.aabb(ground)) {
        (PredicateKind::OnTop, Some(b)) if *ground != EntityId::Table => b.max.y + 0.5,
        _ => 0.5,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetRegion {
    pub argmax: Vec3,
    pub value: f64,
    relations: Vec<(PredicateKind, EntityId)>,
    params: FieldParams,
}

impl TargetRegion {
    pub fn relations(&self) -> &[(PredicateKind, EntityId)] {
        &self.relations
    }

    /// Product of the member fields at a point.
    pub fn value_at(&self, p: Vec3, cs: &CandidateSet) -> f64 {
        self.relations
            .iter()
            .map(|(k, g)| field_value(*k, g, p, cs, &self.params))
            .product()
    }

    pub fn accepts(&self, p: Vec3, cs: &CandidateSet) -> bool {
        self.value_at(p, cs) >= self.params.acceptance
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegionError {
    #[error("no relations given")]
    Empty,
    #[error("no point reaches the acceptance threshold (best {0:.3})")]
    Infeasible(f64),
}

/// Grid pitch of the target-region search.
pub const REGION_PITCH: f64 = 0.25;

/// Point maximising the product of the member fields, by grid search over
/// the table volume. Ties go to the lowest (z, x, y).
pub fn target_region(
    relations: &[(PredicateKind, EntityId)],
    cs: &CandidateSet,
    params: &FieldParams,
) -> Result<TargetRegion, RegionError> {
    if relations.is_empty() {
        return Err(RegionError::Empty);
    }
    let mut region = TargetRegion {
        argmax: Vec3::default(),
        value: f64::NEG_INFINITY,
        relations: relations.to_vec(),
        params: *params,
    };
    let t = &cs.table;
    let top = cs.blocks.iter().map(|b| b.position.y + 0.5).fold(0.0, f64::max);
    let steps = |lo: f64, hi: f64| -> Vec<f64> {
        let n = ((hi - lo) / REGION_PITCH).floor() as i64;
        (0..=n).map(|i| lo + i as f64 * REGION_PITCH).collect()
    };
    let xs = steps(-t.half_width + 0.5, t.half_width - 0.5);
    let zs = steps(-t.half_depth + 0.5, t.half_depth - 0.5);
    let ys = steps(0.5, top + 1.5);
    for &z in &zs {
        for &x in &xs {
            for &y in &ys {
                let p = Vec3::new(x, y, z);
                let v = region.value_at(p, cs);
                if v > region.value + 1e-12 {
                    region.value = v;
                    region.argmax = p;
                }
            }
        }
    }
    if region.value < params.acceptance {
        return Err(RegionError::Infeasible(region.value));
    }
    Ok(region)
}
