//! Document spanners over regex formulas and variable-set automata.
//!
//! The crate compiles regex formulas, variable-set automata (VA) and spanner
//! algebra expressions into deterministic sequential extended VA, then
//! evaluates them over a document with a linear-time preprocessing phase
//! followed by duplicate-free, constant-delay enumeration of the output
//! mappings. Outputs can also be counted in linear time.
//!
//! ```
//! use spanner_core::prelude::*;
//!
//! let sigma: Alphabet = ['a', 'b'].into();
//! let formula = parse_rgx(".*x{a}.*", &sigma).unwrap();
//! let det = functional_va_to_det_seva(&rgx_to_va(&formula, &sigma)).unwrap();
//! let doc = Document::new("abab", &sigma).unwrap();
//! let state = evaluate_preprocess(&det, &doc).unwrap();
//! let spans: Vec<String> = enumerate_stream(&state).map(|m| m.canonical()).collect();
//! assert_eq!(spans.len(), 2);
//! assert_eq!(count_det_seva(&det, &doc).unwrap(), 2u32.into());
//! ```

pub mod algebra;
pub mod automata;
pub mod counting;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod regex;

pub use error::{Error, Result};

/// The most commonly used items.
pub mod prelude {
    pub use crate::algebra::{
        compile_expr, evaluate_reference, join_eva, parse_expr, project_eva,
        union_eva_deterministic, union_eva_linear, AlgebraExpr, Atom, Strategy,
    };
    pub use crate::automata::{
        brute_enumerate, brute_enumerate_eva, brute_enumerate_va, classify, determinize_eva,
        eliminate_epsilon, eva_to_va, functional_va_to_det_seva, va_to_det_seva_general, va_to_eva,
        AnyAutomaton, Automaton, Eva, EvaLabel, StateId, Va, VaLabel,
    };
    pub use crate::counting::{count_det_seva, count_functional_va, count_oracle};
    pub use crate::engine::{enumerate_stream, evaluate_preprocess, measure_delay, DelayReport};
    pub use crate::error::{Error, Result};
    pub use crate::model::{
        mapping_set_join, mapping_set_project, span_concat, Alphabet, Document, Mapping,
        MappingSet, Marker, MarkerSet, Span, Variable,
    };
    pub use crate::regex::{parse_rgx, rgx_eval_reference, rgx_to_va, RegexAst};
}
