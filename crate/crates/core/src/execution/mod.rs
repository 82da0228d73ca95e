//! Exec units over command spans: assignment, eligibility and the engine
//! that runs them.

mod assign;
mod engine;

pub use assign::{assign, classify_imports, eligible, Assignment, ExecId, ImportClass, NodeAssignment, Priority};
pub use engine::{Engine, EngineConfig, Event, Status, UnitResult};
