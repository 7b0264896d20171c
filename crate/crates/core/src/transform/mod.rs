//! Program transformations preserving derivability of the goal.

mod qa;
mod raf;
mod split;
mod unfold;

use thiserror::Error;

pub use qa::{ans_name, query_answer, query_name};
pub use raf::{erasable_positions, raf_filter};
pub use split::{split_blocks, split_name, split_predicates};
pub use unfold::{unfold_clause, unfold_forward, unfold_forward_from};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("clause index {index} out of range for a program of {len} clauses")]
    ClauseOutOfRange { index: usize, len: usize },
    #[error("body atom index {index} out of range for a body of {len} atoms")]
    AtomOutOfRange { index: usize, len: usize },
}
