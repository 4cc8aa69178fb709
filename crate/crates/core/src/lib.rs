//! Interpreter toolchain for the reversible Aleph calculus and its surface
//! language, alethe.

pub mod checker;
pub mod corpus;
pub mod engine;
pub mod kernel;
pub mod matcher;
pub mod planner;
pub mod reader;
pub mod shell;

/// Direction in which a rule or relation is run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }

    pub fn arrow(self) -> &'static str {
        match self {
            Direction::Forward => "→",
            Direction::Backward => "←",
        }
    }
}
