//! Executable almost periodicity on groups.
//!
//! The crate checks the classical characterizations of almost periodic
//! functions (Maak covers, translate nets, Bohr periods with relative
//! density, uniform continuity moduli, Bochner subsequences) on finite
//! windows of computable groups, and emits certificates that can be
//! re-verified independently of how they were found.

pub mod certificate;
pub mod checkers;
pub mod corpus;
pub mod function;
pub mod group;
pub mod harmonic;
pub mod rows;
pub mod transforms;
pub mod uniformity;
pub mod window;

pub use checkers::verdict::Verdict;
pub use function::{codomain_distance, FunctionTable};
pub use group::{CayleyGroup, Element, GroupModel, ModelKind, Motion};
pub use uniformity::{Side, TranslateDistance};
pub use window::{build_window, WindowDoc, WindowParams, WindowSpec};

use function::EvalError;
use group::GroupError;
use window::WindowError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ApError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{what} needs {needed} stored values, above the cap of {cap}")]
    TooLarge {
        what: &'static str,
        needed: usize,
        cap: usize,
    },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("re-verification failed: {0}")]
    Reverification(String),
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T, E = ApError> = std::result::Result<T, E>;

/// Version string stamped into certificates and reports.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
