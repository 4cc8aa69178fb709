use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::atom::ScopeId;
use super::term::{Pattern, Var};
use crate::Direction;

pub type DefId = usize;

/// Where a definition came from, for diagnostics.
#[derive(Clone, Debug, Default)]
pub struct Origin {
    pub file: Option<Arc<Path>>,
    pub line: u32,
    pub col: u32,
    /// Source text of the head, re-rendered.
    pub label: String,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.file {
            Some(p) => write!(f, "{}:{}:{}", p.display(), self.line, self.col),
            None => write!(f, "<input>:{}:{}", self.line, self.col),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Context {
    Opaque(Var),
    Pattern(Pattern),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Party {
    pub context: Context,
    /// The party's term sequence, held as one composite.
    pub body: Pattern,
}

#[derive(Clone, Debug)]
pub struct SubRule {
    pub lhs: Pattern,
    pub rhs: Pattern,
    pub cost: u32,
    pub label: String,
}

impl SubRule {
    pub fn source(&self, dir: Direction) -> &Pattern {
        match dir {
            Direction::Forward => &self.lhs,
            Direction::Backward => &self.rhs,
        }
    }

    pub fn target(&self, dir: Direction) -> &Pattern {
        self.source(dir.flip())
    }
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub lhs: Vec<Party>,
    pub rhs: Vec<Party>,
    pub sub_rules: Vec<SubRule>,
    /// Sub-party declarations that could not be paired into sub-rules.
    pub loose_parties: Vec<Party>,
    pub concurrent: bool,
}

impl Rule {
    pub fn side(&self, dir: Direction) -> &[Party] {
        match dir {
            Direction::Forward => &self.lhs,
            Direction::Backward => &self.rhs,
        }
    }

    /// Body of the single party on one side of a relation-form rule.
    pub fn body(&self, dir: Direction) -> Option<&Pattern> {
        match self.side(dir) {
            [p] => Some(&p.body),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub enum DefKind {
    Halting(Pattern),
    Rule(Rule),
}

#[derive(Clone, Debug)]
pub struct Definition {
    pub kind: DefKind,
    pub origin: Origin,
    /// Set by the `-- @ambiguous` directive.
    pub allow_ambiguous: bool,
}

impl Definition {
    pub fn as_rule(&self) -> Option<&Rule> {
        match &self.kind {
            DefKind::Rule(r) => Some(r),
            DefKind::Halting(_) => None,
        }
    }

    pub fn as_halting(&self) -> Option<&Pattern> {
        match &self.kind {
            DefKind::Halting(p) => Some(p),
            DefKind::Rule(_) => None,
        }
    }
}

/// A fully desugared program: a flat list of definitions.
#[derive(Clone, Debug, Default)]
pub struct Program {
    pub definitions: Vec<Definition>,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub(crate) next_scope: ScopeId,
    pub(crate) fresh: u64,
    halting_shapes: HashMap<Pattern, DefId>,
    rule_shapes: HashMap<(Pattern, Pattern), Vec<DefId>>,
}

impl Program {
    pub fn new() -> Program {
        Program { next_scope: 1, ..Program::default() }
    }

    /// Adds a definition, dropping exact duplicates. Structurally equal
    /// halting patterns are merged silently; a repeated rule is a warning.
    pub fn push(&mut self, def: Definition) -> Option<DefId> {
        let id = self.definitions.len();
        match &def.kind {
            DefKind::Halting(p) => {
                let shape = p.shape();
                if let Some(&existing) = self.halting_shapes.get(&shape) {
                    if def.allow_ambiguous {
                        self.definitions[existing].allow_ambiguous = true;
                    }
                    return None;
                }
                self.halting_shapes.insert(shape, id);
            }
            DefKind::Rule(rule) => {
                if let (Some(l), Some(r)) = (rule.body(Direction::Forward), rule.body(Direction::Backward)) {
                    let key = (l.shape(), r.shape());
                    let same = self.rule_shapes.get(&key).into_iter().flatten().any(|&other| {
                        let o = self.definitions[other].as_rule().unwrap();
                        let both = Pattern::comp(vec![l.clone(), r.clone()]);
                        let theirs = Pattern::comp(vec![
                            o.body(Direction::Forward).unwrap().clone(),
                            o.body(Direction::Backward).unwrap().clone(),
                        ]);
                        both.alpha_eq(&theirs) && o.sub_rules.len() == rule.sub_rules.len()
                    });
                    if same {
                        self.warnings.push(format!("{}: duplicate definition `{}` ignored", def.origin, def.origin.label));
                        return None;
                    }
                    self.rule_shapes.entry(key).or_default().push(id);
                }
            }
        }
        self.definitions.push(def);
        Some(id)
    }

    pub fn rules(&self) -> impl Iterator<Item = (DefId, &Rule)> {
        self.definitions.iter().enumerate().filter_map(|(i, d)| d.as_rule().map(|r| (i, r)))
    }

    pub fn halting(&self) -> impl Iterator<Item = (DefId, &Pattern)> {
        self.definitions.iter().enumerate().filter_map(|(i, d)| d.as_halting().map(|p| (i, p)))
    }

    /// Number of patterns the matcher indexes: every party body and every
    /// halting pattern.
    pub fn pattern_count(&self) -> usize {
        self.definitions
            .iter()
            .map(|d| match &d.kind {
                DefKind::Halting(_) => 1,
                DefKind::Rule(r) => r.lhs.len() + r.rhs.len(),
            })
            .sum()
    }
}
