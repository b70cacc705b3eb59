//! Functional object-oriented network (FOON) toolkit.
//!
//! - [`graph`]: object/motion nodes, functional units, merging, validation
//!   and execution ordering
//! - [`parser`]: the `.foon` text format and kitchen inventories
//! - [`retrieval`]: task-tree retrieval against a kitchen
//! - [`recipegen`]: task tree to numbered recipe text
//! - [`corpus`]: reference recipe corpora and ingredient-overlap matching
//! - [`stats`]: weighted rating statistics, t-tests and TOST equivalence
//! - [`config`]: user-editable verb classes, weighting scheme and stop words

pub mod config;
pub mod corpus;
pub mod graph;
pub mod parser;
pub mod recipegen;
pub mod retrieval;
pub mod stats;

pub use graph::{
    merge, node_equals, topological_order, unit_equals, validate, CycleError, Descriptor,
    FoonGraph, FunctionalUnit, Kitchen, MotionNode, ObjectNode, Relation, RelationKind, TaskTree,
};
pub use parser::{parse_graph, serialize_graph, ParseDiagnostic, Severity};
pub use retrieval::{reachable_goals, retrieve, RetrievalError};
