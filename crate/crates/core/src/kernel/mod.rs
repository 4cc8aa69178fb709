//! Core data model: atoms, terms, desugared programs and loading.

pub mod atom;
pub mod desugar;
pub mod loader;
pub mod program;
pub mod render;
pub mod term;

pub use atom::{Atom, ScopeId};
pub use desugar::{desugar_source, desugar_value, BlankMode, DesugarError, Desugarer};
pub use loader::{load_program, LoadError};
pub use program::*;
pub use render::{
    render_pattern, render_pattern_body, render_term, render_term_body, render_term_body_with, render_term_with,
    RenderOptions,
};
pub use term::{Pattern, Term, Var};
