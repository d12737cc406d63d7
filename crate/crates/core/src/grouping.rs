//! Gestalt grouping of blocks into linear formations (stacks, rows,
//! columns) by proximity and continuity, and the candidate set of all
//! describable entities.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, Axis, Vec3};
use crate::scene::{Block, BlockId, Scene, TableGeometry, SUPPORT_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupingParams {
    /// Max centre distance between neighbours along the formation axis.
    pub proximity: f64,
    /// Max centre deviation between neighbours on the two other axes.
    pub alignment: f64,
    /// Stacks need vertical face contact within this slack.
    pub contact: f64,
}

impl Default for GroupingParams {
    fn default() -> Self {
        Self {
            proximity: 1.5,
            alignment: 0.25,
            contact: SUPPORT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Stack,
    Row,
    Column,
}

impl GroupKind {
    pub const ALL: [GroupKind; 3] = [GroupKind::Stack, GroupKind::Row, GroupKind::Column];

    /// Stacks grow bottom-to-top, rows left-to-right, columns front-to-back.
    pub fn axis(self) -> Axis {
        match self {
            GroupKind::Stack => Axis::Y,
            GroupKind::Row => Axis::X,
            GroupKind::Column => Axis::Z,
        }
    }

    pub fn noun(self) -> &'static str {
        match self {
            GroupKind::Stack => "stack",
            GroupKind::Row => "row",
            GroupKind::Column => "column",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupId(pub String);

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Group {
    pub id: GroupId,
    pub kind: GroupKind,
    pub members: Vec<BlockId>,
    pub homogeneous_color: Option<String>,
    /// False for the colour-based sub-formations of a mixed group.
    pub maximal: bool,
    #[serde(skip)]
    pub aabb: Aabb,
}

impl Group {
    fn from_members(kind: GroupKind, members: &[&Block], maximal: bool) -> Self {
        let ids: Vec<BlockId> = members.iter().map(|b| b.id.clone()).collect();
        let id = GroupId(format!(
            "{}:{}",
            kind.noun(),
            ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join("+")
        ));
        let color = members[0].color.clone();
        let homogeneous_color = members.iter().all(|b| b.color == color).then_some(color);
        let aabb = members
            .iter()
            .map(|b| b.aabb())
            .reduce(|a, b| a.union(&b))
            .expect("groups have members");
        Self {
            id,
            kind,
            members: ids,
            homogeneous_color,
            maximal,
            aabb,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: &BlockId) -> bool {
        self.members.contains(id)
    }

    pub fn axis(&self) -> Axis {
        self.kind.axis()
    }
}

fn linked(kind: GroupKind, lower: &Block, upper: &Block, p: &GroupingParams) -> bool {
    let axis = kind.axis();
    let d = upper.position.get(axis) - lower.position.get(axis);
    if !(d > 0.0 && d <= p.proximity) {
        return false;
    }
    let aligned = Axis::ALL
        .iter()
        .filter(|&&a| a != axis)
        .all(|&a| (upper.position.get(a) - lower.position.get(a)).abs() <= p.alignment);
    if !aligned {
        return false;
    }
    match kind {
        GroupKind::Stack => {
            ((upper.position.y - 0.5) - (lower.position.y + 0.5)).abs() <= p.contact
        }
        _ => true,
    }
}

/// Nearest linked neighbour in the positive axis direction, ties by id.
fn successor<'a>(
    kind: GroupKind,
    b: &Block,
    blocks: &'a [Block],
    p: &GroupingParams,
) -> Option<&'a Block> {
    let axis = kind.axis();
    blocks
        .iter()
        .filter(|o| linked(kind, b, o, p))
        .min_by(|x, y| {
            let dx = x.position.get(axis) - b.position.get(axis);
            let dy = y.position.get(axis) - b.position.get(axis);
            dx.total_cmp(&dy).then_with(|| x.id.cmp(&y.id))
        })
}

fn predecessor<'a>(
    kind: GroupKind,
    b: &Block,
    blocks: &'a [Block],
    p: &GroupingParams,
) -> Option<&'a Block> {
    let axis = kind.axis();
    blocks
        .iter()
        .filter(|o| linked(kind, o, b, p))
        .min_by(|x, y| {
            let dx = b.position.get(axis) - x.position.get(axis);
            let dy = b.position.get(axis) - y.position.get(axis);
            dx.total_cmp(&dy).then_with(|| x.id.cmp(&y.id))
        })
}

fn chains<'a>(kind: GroupKind, blocks: &'a [Block], p: &GroupingParams) -> Vec<Vec<&'a Block>> {
    // A link u -> v is kept only when each is the other's nearest neighbour.
    let next = |b: &Block| -> Option<&'a Block> {
        let s = successor(kind, b, blocks, p)?;
        (predecessor(kind, s, blocks, p)?.id == b.id).then_some(s)
    };
    let has_prev = |b: &Block| -> bool {
        predecessor(kind, b, blocks, p)
            .and_then(|q| successor(kind, q, blocks, p))
            .is_some_and(|s| s.id == b.id)
    };
    let mut out = Vec::new();
    for start in blocks.iter().filter(|b| !has_prev(b)) {
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(n) = next(cur) {
            chain.push(n);
            cur = n;
        }
        if chain.len() >= 2 {
            out.push(chain);
        }
    }
    out
}

pub fn perceptual_grouping(scene: &Scene) -> Vec<Group> {
    perceptual_grouping_with(scene, &GroupingParams::default())
}

/// All maximal linear formations, followed by the same-colour runs of each
/// colour-mixed formation. Output is sorted by (kind, id).
pub fn perceptual_grouping_with(scene: &Scene, params: &GroupingParams) -> Vec<Group> {
    let mut groups = Vec::new();
    for kind in GroupKind::ALL {
        for chain in chains(kind, scene.blocks(), params) {
            let g = Group::from_members(kind, &chain, true);
            let mixed = g.homogeneous_color.is_none();
            groups.push(g);
            if mixed {
                let mut start = 0;
                for i in 1..=chain.len() {
                    if i == chain.len() || chain[i].color != chain[start].color {
                        if i - start >= 2 {
                            groups.push(Group::from_members(kind, &chain[start..i], false));
                        }
                        start = i;
                    }
                }
            }
        }
    }
    groups.sort_by(|a, b| a.kind.cmp(&b.kind).then_with(|| a.id.cmp(&b.id)));
    groups.dedup_by(|a, b| a.id == b.id);
    groups
}

/// Re-checks a group's proximity and alignment thresholds from the scene.
pub fn satisfies_thresholds(g: &Group, scene: &Scene, params: &GroupingParams) -> bool {
    let members: Option<Vec<&Block>> = g.members.iter().map(|id| scene.block(id)).collect();
    let Some(members) = members else {
        return false;
    };
    members.len() >= 2 && members.windows(2).all(|w| linked(g.kind, w[0], w[1], params))
}

/// The kind of thing an entity is, i.e. the value of its REF descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefKind {
    Block,
    Stack,
    Row,
    Column,
    Table,
}

impl RefKind {
    pub fn noun(self) -> &'static str {
        match self {
            RefKind::Block => "block",
            RefKind::Stack => "stack",
            RefKind::Row => "row",
            RefKind::Column => "column",
            RefKind::Table => "table",
        }
    }
}

impl From<GroupKind> for RefKind {
    fn from(k: GroupKind) -> Self {
        match k {
            GroupKind::Stack => RefKind::Stack,
            GroupKind::Row => RefKind::Row,
            GroupKind::Column => RefKind::Column,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", content = "id", rename_all = "lowercase")]
pub enum EntityId {
    Table,
    Block(BlockId),
    Group(GroupId),
}

impl EntityId {
    pub fn block(id: impl Into<String>) -> Self {
        EntityId::Block(BlockId::new(id))
    }

    pub fn as_block(&self) -> Option<&BlockId> {
        match self {
            EntityId::Block(b) => Some(b),
            _ => None,
        }
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityId::Table => f.write_str("table"),
            EntityId::Block(b) => write!(f, "{b}"),
            EntityId::Group(g) => write!(f, "{g}"),
        }
    }
}

/// Every block, every detected group and the table.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub table: TableGeometry,
    pub blocks: Vec<Block>,
    pub groups: Vec<Group>,
    group_index: BTreeMap<GroupId, usize>,
}

impl CandidateSet {
    pub fn block(&self, id: &BlockId) -> Option<&Block> {
        self.blocks.iter().find(|b| &b.id == id)
    }

    pub fn group(&self, id: &GroupId) -> Option<&Group> {
        self.group_index.get(id).map(|&i| &self.groups[i])
    }

    pub fn contains(&self, e: &EntityId) -> bool {
        match e {
            EntityId::Table => true,
            EntityId::Block(b) => self.block(b).is_some(),
            EntityId::Group(g) => self.group(g).is_some(),
        }
    }

    /// Blocks, then groups, then the table.
    pub fn entities(&self) -> Vec<EntityId> {
        self.blocks
            .iter()
            .map(|b| EntityId::Block(b.id.clone()))
            .chain(self.groups.iter().map(|g| EntityId::Group(g.id.clone())))
            .chain(std::iter::once(EntityId::Table))
            .collect()
    }

    pub fn aabb(&self, e: &EntityId) -> Option<Aabb> {
        match e {
            EntityId::Table => Some(self.table.aabb()),
            EntityId::Block(b) => self.block(b).map(Block::aabb),
            EntityId::Group(g) => self.group(g).map(|g| g.aabb),
        }
    }

    pub fn center(&self, e: &EntityId) -> Option<Vec3> {
        self.aabb(e).map(|a| a.center())
    }

    pub fn ref_kind(&self, e: &EntityId) -> Option<RefKind> {
        match e {
            EntityId::Table => Some(RefKind::Table),
            EntityId::Block(b) => self.block(b).map(|_| RefKind::Block),
            EntityId::Group(g) => self.group(g).map(|g| g.kind.into()),
        }
    }

    /// All entities sharing a REF kind: the comparison class for uniqueness.
    pub fn class(&self, kind: RefKind) -> Vec<EntityId> {
        match kind {
            RefKind::Table => vec![EntityId::Table],
            RefKind::Block => self
                .blocks
                .iter()
                .map(|b| EntityId::Block(b.id.clone()))
                .collect(),
            _ => self
                .groups
                .iter()
                .filter(|g| RefKind::from(g.kind) == kind)
                .map(|g| EntityId::Group(g.id.clone()))
                .collect(),
        }
    }

    pub fn groups_containing<'a>(&'a self, id: &'a BlockId) -> impl Iterator<Item = &'a Group> + 'a {
        self.groups.iter().filter(move |g| g.contains(id))
    }
}

pub fn candidate_set(scene: &Scene) -> CandidateSet {
    let groups = perceptual_grouping(scene);
    let group_index = groups
        .iter()
        .enumerate()
        .map(|(i, g)| (g.id.clone(), i))
        .collect();
    CandidateSet {
        table: scene.table,
        blocks: scene.blocks().to_vec(),
        groups,
        group_index,
    }
}
