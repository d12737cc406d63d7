//! Translation of machine block-placement directives (`move(id, pos)`) into
//! grounded English directives.
//!
//! The pipeline: a [`Scene`] is grouped into formations
//! ([`grouping`]), spatial predicate fields relate the target position to
//! every candidate entity ([`predicates`]), referring expressions are built
//! from descriptor sets ([`descriptors`]) and composed into [`Eci`] trees by
//! the generative transformation ([`egt`]). Each alternative is priced by
//! the linear cost model ([`cost`]) and the cheapest one wins. The
//! [`resolver`] interprets generated trees independently of the generator.

pub mod context;
pub mod cost;
pub mod descriptors;
pub mod eci;
pub mod egt;
pub mod fixtures;
pub mod geometry;
pub mod grouping;
pub mod predicates;
pub mod report;
pub mod resolver;
pub mod scene;
pub mod stats;

pub use context::InteractionContext;
pub use cost::{CoefficientTable, FeatureCategory, FeatureVector};
pub use descriptors::{Category, Descriptor, DescriptorSet};
pub use eci::{ActionContextKind, DirectiveAlternative, Eci, EntityRef};
pub use egt::{EgtConfig, EgtError, Generation};
pub use geometry::{Aabb, Vec3};
pub use grouping::{CandidateSet, EntityId, Group, GroupId, GroupKind};
pub use predicates::{FieldParams, Frame, PredicateKind, SpatialRelation};
pub use scene::{Block, BlockId, MoveDirective, Plan, Scene, SceneError, TableGeometry};
