//! Surface syntax tree, before any desugaring.

use super::lexer::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomKind {
    Plain,
    /// `#"..."`
    Escaped,
    /// `#sym`, a symbol that never acts as a bare infix.
    Hash,
    /// `'c`
    Char,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceAtom {
    pub kind: AtomKind,
    pub name: String,
    pub tildes: usize,
}

impl SurfaceAtom {
    pub fn plain(name: &str) -> SurfaceAtom {
        SurfaceAtom { kind: AtomKind::Plain, name: name.into(), tildes: 0 }
    }

    /// Whether this atom may act as an infix operator without backticks.
    pub fn is_bare_symbol(&self) -> bool {
        self.kind == AtomKind::Plain
            && self.tildes == 0
            && self.name.chars().next().is_some_and(|c| !c.is_alphanumeric() && c != '_')
            && self.name != "="
            && self.name != "!"
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceTerm {
    Atom(SurfaceAtom),
    Var(String),
    Comp(Vec<SurfaceTerm>),
    Nat(u64),
    Str(String),
    List { items: Vec<SurfaceTerm>, tail: Option<Box<SurfaceTerm>> },
    Blank,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationForm {
    /// `lhs = rhs`
    Equation,
    /// ``lhs `f` rhs``
    Backtick(Vec<SurfaceTerm>),
    /// `lhs f rhs` with a bare symbol atom `f`
    Bare(SurfaceAtom),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub lhs: Vec<SurfaceTerm>,
    pub form: RelationForm,
    pub rhs: Vec<SurfaceTerm>,
}

impl Relation {
    /// The infix segment, if any.
    pub fn infix(&self) -> Option<Vec<SurfaceTerm>> {
        match &self.form {
            RelationForm::Equation => None,
            RelationForm::Backtick(f) => Some(f.clone()),
            RelationForm::Bare(a) => Some(vec![SurfaceTerm::Atom(a.clone())]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceParty {
    pub context: SurfaceTerm,
    pub body: Vec<SurfaceTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleHead {
    Relation(Relation),
    Bags { lhs: Vec<SurfaceParty>, rhs: Vec<SurfaceParty> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Halting {
    Pattern(Vec<SurfaceTerm>),
    Relation(Relation),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StatementKind {
    Rule { head: RuleHead, decls: Vec<Declaration> },
    Halting(Halting),
    Data(Vec<SurfaceTerm>),
    Import(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Statement {
    pub kind: StatementKind,
    /// Names of `-- @name` directives attached to this statement.
    pub pragmas: Vec<String>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeclarationKind {
    SubRelation { relation: Relation, halting: bool, cost: u32 },
    SubParty { party: SurfaceParty, cost: u32 },
    Nested(Statement),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Declaration {
    pub kind: DeclarationKind,
    pub span: Span,
}
