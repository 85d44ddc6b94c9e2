//! Constant-delay enumeration for deterministic sequential eVA.
//!
//! Preprocessing ([`evaluate_preprocess`]) runs in time linear in the
//! document and builds a DAG whose paths to the sink `⊥` correspond one to
//! one to the output mappings. Enumeration ([`enumerate_stream`]) walks those
//! paths with work between outputs bounded by the number of variables.

mod enumerate;
mod eval;
pub mod list;

pub use enumerate::{enumerate_stream, measure_delay, partial_outputs, DelayReport, MappingStream};
pub use eval::{
    evaluate_preprocess, evaluate_preprocess_with, DagNode, EvaluationState, Evaluator, Stage,
};
pub use list::{ListArena, NodeList, Payload};

use crate::automata::Eva;
use crate::error::Result;
use crate::model::{Document, MappingSet};

/// Convenience: evaluates and collects every mapping.
pub fn evaluate(a: &Eva, d: &Document) -> Result<MappingSet> {
    let st = evaluate_preprocess(a, d)?;
    Ok(enumerate_stream(&st).collect())
}
