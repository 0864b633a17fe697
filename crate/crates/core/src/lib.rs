//! Model-based testing for statecharts.
//!
//! Parse a model from the line-oriented DSL, flatten and validate it, then
//! generate suites (exhaustive enumeration, k-transition coverage, sneak
//! path probes), measure their coverage and minimize them by subsumption.
//!
//! ```
//! use statecover::{parse_statechart, generate_ktc_suite, coverage_report};
//!
//! let sc = parse_statechart(
//!     "statechart Door\n\
//!      events open close\n\
//!      state Closed initial final\n\
//!      state Open\n\
//!      transition t1: Closed -> Open on open\n\
//!      transition t2: Open -> Closed on close\n",
//! )
//! .unwrap();
//! let suite = generate_ktc_suite(&sc, 1).unwrap();
//! let report = coverage_report(&sc, &suite, None).unwrap();
//! assert_eq!(report.transition_cov().value(), Some(1.0));
//! ```

pub mod generator;
pub mod id;
pub mod interpreter;
pub mod metrics;
pub mod minimizer;
pub mod model;
mod par;
pub mod parser;
pub mod tgraph;

pub use generator::{
    derive_faulty_pairs, enumerate_sequences, generate_ftc_suite, generate_ktc_suite,
    guard_probe_suite, solve_gtsp, start_sequence, FaultyPair, GenError, DEFAULT_CAP,
};
pub use id::Id;
pub use interpreter::{replay, run, ExecTrace, InterpError, ReplayError, Verdict};
pub use metrics::{coverage_report, CoverageReport, MetricsError, Ratio};
pub use minimizer::{
    covering_set, covering_table, greedy_reduce, minimize_suite, Dimension, Grouping,
    MinimizeError, Relation, SubsumptionStrategy,
};
pub use model::{Input, Provenance, State, Statechart, TestCase, TestSuite, Transition};
pub use par::is_parallel;
pub use parser::{
    export_dot, parse_statechart, parse_suite, serialize_statechart, suite_to_json, ParseError,
};
pub use tgraph::{build_transition_graph, TransitionGraph, Vertex};
