//! Matching ground terms against program patterns.

mod trie;
mod unify;

pub use trie::PatternTrie;
pub use unify::{matches, substitute, unify, Bindings, Unbound};

use crate::kernel::{DefId, DefKind, Pattern, Program, Term};
use crate::Direction;

/// Which pattern of a definition matched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// The left side of a rule: applying it runs the rule forward.
    Forward,
    /// The right side of a rule: applying it runs the rule backward.
    Backward,
    Halting,
}

impl Side {
    pub fn direction(self) -> Option<Direction> {
        match self {
            Side::Forward => Some(Direction::Forward),
            Side::Backward => Some(Direction::Backward),
            Side::Halting => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexEntry {
    pub def: DefId,
    pub side: Side,
    pub party: usize,
    pub pattern: Pattern,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchCandidate {
    pub def: DefId,
    pub side: Side,
    pub party: usize,
    pub bindings: Bindings,
}

/// Trie over every party body and halting pattern of a program.
#[derive(Clone, Debug, Default)]
pub struct ProgramIndex {
    trie: PatternTrie<IndexEntry>,
}

impl ProgramIndex {
    pub fn build(program: &Program) -> ProgramIndex {
        let mut trie = PatternTrie::new();
        for (def, d) in program.definitions.iter().enumerate() {
            match &d.kind {
                DefKind::Halting(p) => {
                    trie.insert(p, IndexEntry { def, side: Side::Halting, party: 0, pattern: p.clone() })
                }
                DefKind::Rule(r) => {
                    for (side, parties) in [(Side::Forward, &r.lhs), (Side::Backward, &r.rhs)] {
                        for (party, p) in parties.iter().enumerate() {
                            trie.insert(&p.body, IndexEntry { def, side, party, pattern: p.body.clone() });
                        }
                    }
                }
            }
        }
        ProgramIndex { trie }
    }

    /// Number of indexed patterns.
    pub fn len(&self) -> usize {
        self.trie.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trie.is_empty()
    }

    pub fn entries(&self) -> &[IndexEntry] {
        self.trie.values()
    }

    /// All patterns that match `term`, with their bindings, in definition
    /// order.
    pub fn lookup(&self, term: &Term) -> Vec<MatchCandidate> {
        self.trie
            .candidates(term)
            .into_iter()
            .filter_map(|e| {
                matches(&e.pattern, term).map(|bindings| MatchCandidate {
                    def: e.def,
                    side: e.side,
                    party: e.party,
                    bindings,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{desugar_source, desugar_value};
    use crate::reader::{parse_repl_line, ReplCommand};

    const ADD: &str = "! + _ _ (); ! () _ _ +;\n+ Z b () = () Z b +;\n+ (S a) b () = () (S a) (S b') +:\n  + a b () = () a b' +.\n";
    const SQUARE: &str = "! □ _ (); ! () _ □;\n□ n () = □ n Z □;\n□ Z m □ = () m □;\n□ (S n) m □ = □ n (S m'') □:\n  + n m () = () n m' +.\n  + (S n) m' () = () (S n) m'' +.\n";

    fn ground(src: &str) -> Term {
        let ReplCommand::Evaluate(ts) = parse_repl_line(&format!("| {src}")).unwrap() else { panic!() };
        Pattern::comp(ts.iter().map(|t| desugar_value(t).unwrap()).collect()).to_term().unwrap()
    }

    #[test]
    fn addition_index() {
        let p = desugar_source(ADD).unwrap();
        let idx = ProgramIndex::build(&p);
        assert_eq!(idx.len(), 6);
        let hits = idx.lookup(&ground("+ Z 3 ()"));
        let sides: Vec<(DefId, Side)> = hits.iter().map(|c| (c.def, c.side)).collect();
        assert_eq!(sides, vec![(0, Side::Halting), (2, Side::Forward)]);
        let stuck = idx.lookup(&ground("() 3 Z +"));
        assert!(stuck.iter().all(|c| c.side == Side::Halting));
        assert!(ProgramIndex::build(&Program::new()).is_empty());
    }

    #[test]
    fn square_step_matches_both_sides() {
        let p = desugar_source(SQUARE).unwrap();
        let idx = ProgramIndex::build(&p);
        let hits = idx.lookup(&ground("□ 2 5 □"));
        let step = hits.iter().filter(|c| c.side != Side::Halting).map(|c| c.side).collect::<Vec<_>>();
        assert_eq!(step, vec![Side::Forward, Side::Backward]);
    }
}
