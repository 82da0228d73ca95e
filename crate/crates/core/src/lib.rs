//! Versioned proof documents with incremental, cancellable checking.

pub mod batch;
pub mod checker;
pub mod config;
pub mod document;
pub mod execution;
pub mod markup;
pub mod message;
pub mod parallel;
pub mod presentation;
pub mod pretty;
pub mod protocol;
pub mod sessions;
pub mod syntax;
pub mod text;
