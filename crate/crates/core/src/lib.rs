//! Synchronous luminous robots on the infinite grid.
//!
//! * [`grid`]: positions, rotations, configurations and occluded views.
//! * [`rules`]: rule patterns, rotation closure, well-definedness checks and matching.
//! * [`engine`]: synchronous rounds, adversaries, exclusiveness monitoring, traces.
//! * [`algorithms`]: the three built-in exploration algorithms.
//! * [`verify`]: phase oracles, boundary coverage, exclusiveness audits.
//! * [`io`]: rule files, trace files and frame rendering.

pub mod algorithms;
pub mod engine;
pub mod error;
pub mod grid;
pub mod io;
pub mod rules;
pub mod verify;

pub use algorithms::{builtin, BuiltinId};
pub use engine::{
    run, run_with, step, visited_set, AdversaryStrategy, Simulation, Trace, ViolationEvent,
    ViolationKind,
};
pub use error::{
    EngineError, GridError, MatchError, ParseError, ParseErrorKind, RuleSetError, VerifyError,
};
pub use grid::{
    farthest_pair_distance, manhattan_distance, rotate_move, rotate_offset, rotate_view,
    translate_configuration, view_at, Ball, CellState, Color, Configuration, Move, Offset,
    Position, Rotation, Translation, View,
};
pub use rules::{
    expand_rotations, normalize_pattern, validate, PatternCell, Rule, RulePattern, RuleSet,
    RuleTable, SymmetryPolicy, ValidationReport,
};
