//! Safety verification for constrained Horn clauses over linear arithmetic.
//!
//! The verifier chains semantics-preserving transformations (redundant
//! argument filtering, forward unfolding, query-answer transformation,
//! predicate splitting) with a convex-polyhedra analysis that widens up to
//! threshold constraints. A program is [`Verdict::Safe`] when the
//! over-approximated model contains no fact for the goal predicate;
//! otherwise the answer is [`Verdict::Unknown`].

pub mod analyzer;
pub mod ast;
pub mod compare;
pub mod lincon;
pub mod parse;
pub mod pdg;
pub mod pipeline;
pub mod polyhedra;
pub mod print;
pub mod thresholds;
pub mod transform;

pub use analyzer::{analyze, bounded_concrete_eval, check_safety, AbstractModel, Verdict};
pub use ast::{Atom, AtomicConstraint, Clause, Constraint, LinExpr, Program, Rational, Rel, Var, FALSE};
pub use parse::{parse_program, ParseError};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineOutcome};
pub use polyhedra::Polyhedron;
pub use print::program_to_string;
