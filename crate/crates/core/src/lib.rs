//! Quantitative bipolar argumentation frameworks (QBAFs): gradual semantics,
//! polarity and priority analysis, counterfactual base-score search,
//! Shapley attribution and an experiment harness.
//!
//! ```
//! use qarg::{parse_qbaf, evaluate, EvalConfig, Semantics};
//!
//! let q = parse_qbaf(r#"{
//!   "arguments": [{"id": "a", "base_score": 0.5}, {"id": "b", "base_score": 0.4}],
//!   "attacks": [["b", "a"]],
//!   "supports": []
//! }"#).unwrap();
//! let s = evaluate(&q, Semantics::DfQuad, &EvalConfig::default()).unwrap();
//! assert!((s.get(q.require("a").unwrap()) - 0.3).abs() < 1e-12);
//! ```

pub mod attribution;
pub mod bench;
pub mod counterfactual;
pub mod error;
pub mod graph;
pub mod qbaf;
pub mod semantics;

#[cfg(test)]
mod testdata;

pub use attribution::{shapley_all, shapley_importance, AttributionReport, ShapleyConfig};
pub use counterfactual::{
    check_validity, difference_quotient, lp_distance, nullify, solve, trivial_counterfactual,
    CexQuery, CexResult, ProblemKind, SolverConfig, Variant,
};
pub use error::{Error, Result};
pub use graph::{
    connectivity, enumerate_simple_paths, find_elementary_cycles, polarity, priority,
    topic_profile, Connectivity, Path, Polarity, TopicProfile,
};
pub use qbaf::{
    is_acyclic, parse_qbaf, serialize_qbaf, serialize_with_scores, ArgumentId, BaseScoreFn, Qbaf,
    Relation,
};
pub use semantics::{
    aggregate, evaluate, evaluate_restricted, evaluate_with, influence, residual, EvalConfig,
    Semantics, StrengthMap,
};
