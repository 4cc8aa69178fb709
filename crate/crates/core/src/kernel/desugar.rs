use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use super::atom::{self, Atom, ScopeId};
use super::program::*;
use super::term::{Pattern, Var};
use crate::reader::{self, *};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DesugarError {
    #[error("{span}: `{atom}` reaches {tildes} scopes out but only {depth} enclose it")]
    TildeDepth { span: Span, atom: String, tildes: usize, depth: usize },
    #[error("{span}: {message}")]
    Invalid { span: Span, message: String },
}

/// How `_` is read: a fresh wildcard in definitions, unit in ground terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlankMode {
    Wildcard,
    Unit,
}

/// Desugars a ground surface value: numerals, lists and strings expand and
/// `_` becomes unit. Tilde atoms are not meaningful outside a rule.
pub fn desugar_value(t: &SurfaceTerm) -> Result<Pattern, DesugarError> {
    let mut fresh = 0;
    let mut cx = Cx { scopes: &[], blank: BlankMode::Unit, fresh: &mut fresh, span: Span::default() };
    cx.term(t)
}

struct Cx<'a> {
    scopes: &'a [ScopeId],
    blank: BlankMode,
    fresh: &'a mut u64,
    span: Span,
}

impl Cx<'_> {
    fn atom(&self, a: &SurfaceAtom) -> Result<Atom, DesugarError> {
        match a.kind {
            AtomKind::Char => Ok(Atom::char(a.name.chars().next().unwrap_or(' '))),
            AtomKind::Escaped | AtomKind::Hash => Ok(Atom::global(&a.name)),
            AtomKind::Plain if a.tildes == 0 => Ok(Atom::global(&a.name)),
            AtomKind::Plain => {
                if a.tildes > self.scopes.len() {
                    return Err(DesugarError::TildeDepth {
                        span: self.span,
                        atom: format!("{}{}", "~".repeat(a.tildes), a.name),
                        tildes: a.tildes,
                        depth: self.scopes.len(),
                    });
                }
                Ok(Atom::scoped(self.scopes[self.scopes.len() - a.tildes], &a.name))
            }
        }
    }

    fn term(&mut self, t: &SurfaceTerm) -> Result<Pattern, DesugarError> {
        Ok(match t {
            SurfaceTerm::Atom(a) => Pattern::Atom(self.atom(a)?),
            SurfaceTerm::Var(v) => Pattern::var(v),
            SurfaceTerm::Comp(items) => Pattern::comp(self.terms(items)?),
            SurfaceTerm::Nat(n) => {
                let mut p = Pattern::Atom(atom::Z);
                for _ in 0..*n {
                    p = Pattern::comp(vec![Pattern::Atom(atom::S), p]);
                }
                p
            }
            SurfaceTerm::Str(s) => {
                let chars = s.chars().map(|c| Pattern::Atom(Atom::char(c))).collect();
                list(chars, Pattern::Atom(atom::NIL))
            }
            SurfaceTerm::List { items, tail } => {
                let tail = match tail {
                    Some(t) => self.term(t)?,
                    None => Pattern::Atom(atom::NIL),
                };
                list(self.terms(items)?, tail)
            }
            SurfaceTerm::Blank => match self.blank {
                BlankMode::Unit => Pattern::unit(),
                BlankMode::Wildcard => self.blank_var(),
            },
        })
    }

    fn terms(&mut self, ts: &[SurfaceTerm]) -> Result<Vec<Pattern>, DesugarError> {
        ts.iter().map(|t| self.term(t)).collect()
    }

    fn blank_var(&mut self) -> Pattern {
        *self.fresh += 1;
        Pattern::var(&format!("_{}", self.fresh))
    }
}

fn list(items: Vec<Pattern>, tail: Pattern) -> Pattern {
    items
        .into_iter()
        .rev()
        .fold(tail, |acc, x| Pattern::comp(vec![Pattern::Atom(atom::CONS), x, acc]))
}

/// A relation after expansion into its two sides. For infix relations the
/// infix term itself is kept so halting sugar can refer to it.
struct Sides {
    lhs: Pattern,
    rhs: Pattern,
    infix: Option<Pattern>,
    lhs_arity: usize,
    rhs_arity: usize,
}

/// Desugars the statements of one file (or one REPL input) into `program`.
pub struct Desugarer<'p> {
    program: &'p mut Program,
    file: Option<Arc<Path>>,
}

impl<'p> Desugarer<'p> {
    pub fn new(program: &'p mut Program, file: Option<&Path>) -> Self {
        Desugarer { program, file: file.map(Arc::from) }
    }

    fn fresh_scope(&mut self) -> ScopeId {
        let s = self.program.next_scope;
        self.program.next_scope += 1;
        s
    }

    fn fresh_opaque(&mut self) -> Var {
        self.program.fresh += 1;
        Arc::from(format!("κ{}", self.program.fresh))
    }

    fn cx<'a>(&'a mut self, scopes: &'a [ScopeId], blank: BlankMode, span: Span) -> Cx<'a> {
        Cx { scopes, blank, fresh: &mut self.program.fresh, span }
    }

    fn origin(&self, span: Span, label: String) -> Origin {
        Origin { file: self.file.clone(), line: span.line, col: span.col, label }
    }

    /// Desugars a whole file with its own top-level scope. Imports must have
    /// been resolved by the caller and are skipped here.
    pub fn file(&mut self, stmts: &[Statement]) -> Result<(), DesugarError> {
        let scope = self.fresh_scope();
        for s in stmts {
            self.statement(s, &[scope])?;
        }
        Ok(())
    }

    pub fn statement(&mut self, s: &Statement, scopes: &[ScopeId]) -> Result<(), DesugarError> {
        let allow = s.pragmas.iter().any(|p| p == "ambiguous");
        match &s.kind {
            StatementKind::Import(_) => {
                if scopes.len() > 1 {
                    return Err(DesugarError::Invalid { span: s.span, message: "imports must be top-level".into() });
                }
                Ok(())
            }
            StatementKind::Halting(Halting::Pattern(ts)) => {
                let body = Pattern::comp(self.cx(scopes, BlankMode::Wildcard, s.span).terms(ts)?);
                self.halting(body, s.span, allow);
                Ok(())
            }
            StatementKind::Halting(Halting::Relation(r)) => {
                let sides = self.sides(r, scopes, s.span)?;
                self.halting_sides(&sides, s.span, allow, false);
                Ok(())
            }
            StatementKind::Data(ts) => self.data(ts, scopes, s.span, allow),
            StatementKind::Rule { head, decls } => self.rule(head, decls, scopes, s.span, allow),
        }
    }

    fn halting(&mut self, body: Pattern, span: Span, allow: bool) {
        let label = format!("! {}", super::render::render_pattern_body(&body));
        let origin = self.origin(span, label);
        self.program.push(Definition { kind: DefKind::Halting(body), origin, allow_ambiguous: allow });
    }

    /// Halting patterns for both sides of a relation, plus the infix term
    /// when it is composite. With `generalize`, argument positions become
    /// blanks.
    fn halting_sides(&mut self, sides: &Sides, span: Span, allow: bool, generalize: bool) {
        let (lhs, rhs) = match (&sides.infix, generalize) {
            (Some(f), true) => {
                let mut fresh = || {
                    self.program.fresh += 1;
                    Pattern::var(&format!("_{}", self.program.fresh))
                };
                let mut l = vec![f.clone()];
                l.extend((0..sides.lhs_arity).map(|_| fresh()));
                l.push(Pattern::unit());
                let mut r = vec![Pattern::unit()];
                r.extend((0..sides.rhs_arity).map(|_| fresh()));
                r.push(f.clone());
                (Pattern::comp(l), Pattern::comp(r))
            }
            _ => (sides.lhs.clone(), sides.rhs.clone()),
        };
        self.halting(lhs, span, allow);
        self.halting(rhs, span, allow);
        if let Some(f @ Pattern::Comp(_)) = &sides.infix {
            self.halting(f.clone(), span, allow);
        }
    }

    fn sides(&mut self, r: &Relation, scopes: &[ScopeId], span: Span) -> Result<Sides, DesugarError> {
        let mut cx = self.cx(scopes, BlankMode::Wildcard, span);
        let lhs = cx.terms(&r.lhs)?;
        let rhs = cx.terms(&r.rhs)?;
        let (lhs_arity, rhs_arity) = (lhs.len(), rhs.len());
        Ok(match r.infix() {
            None => Sides { lhs: Pattern::comp(lhs), rhs: Pattern::comp(rhs), infix: None, lhs_arity, rhs_arity },
            Some(f) => {
                let mut f = cx.terms(&f)?;
                let f = if f.len() == 1 { f.pop().unwrap() } else { Pattern::comp(f) };
                let mut l = vec![f.clone()];
                l.extend(lhs);
                l.push(Pattern::unit());
                let mut rr = vec![Pattern::unit()];
                rr.extend(rhs);
                rr.push(f.clone());
                Sides { lhs: Pattern::comp(l), rhs: Pattern::comp(rr), infix: Some(f), lhs_arity, rhs_arity }
            }
        })
    }

    fn data(&mut self, ts: &[SurfaceTerm], scopes: &[ScopeId], span: Span, allow: bool) -> Result<(), DesugarError> {
        let body = Pattern::comp(self.cx(scopes, BlankMode::Wildcard, span).terms(ts)?);
        self.halting(body, span, allow);

        // `Dup v` copies the value field by field.
        let value = match ts {
            [single] => single.clone(),
            _ => SurfaceTerm::Comp(ts.to_vec()),
        };
        if matches!(value, SurfaceTerm::Var(_) | SurfaceTerm::Blank) {
            return Err(DesugarError::Invalid { span, message: "a data declaration needs a constructor".into() });
        }
        let mut vars = Vec::new();
        surface_vars(&value, &mut vars);
        let primed: Vec<(String, String)> = vars
            .iter()
            .map(|v| {
                let mut p = format!("{v}'");
                while vars.contains(&p) {
                    p.push('\'');
                }
                (v.clone(), p)
            })
            .collect();
        let copy = rename_surface(&value, &primed);
        let dup = |x: SurfaceTerm| vec![SurfaceTerm::Atom(SurfaceAtom::plain("Dup")), x];
        let decls = primed
            .iter()
            .map(|(v, p)| Declaration {
                kind: DeclarationKind::SubRelation {
                    relation: Relation {
                        lhs: vec![],
                        form: RelationForm::Backtick(dup(SurfaceTerm::Var(v.clone()))),
                        rhs: vec![SurfaceTerm::Var(p.clone())],
                    },
                    halting: false,
                    cost: 1,
                },
                span,
            })
            .collect::<Vec<_>>();
        let head = RuleHead::Relation(Relation { lhs: vec![], form: RelationForm::Backtick(dup(value)), rhs: vec![copy] });
        self.rule(&head, &decls, scopes, span, allow)
    }

    fn rule(
        &mut self,
        head: &RuleHead,
        decls: &[Declaration],
        scopes: &[ScopeId],
        span: Span,
        allow: bool,
    ) -> Result<(), DesugarError> {
        let inner: Vec<ScopeId> = scopes.iter().copied().chain([self.fresh_scope()]).collect();
        let (lhs, rhs, label) = match head {
            RuleHead::Relation(r) => {
                let sides = self.sides(r, scopes, span)?;
                if sides.infix.is_some() {
                    self.halting_sides(&sides, span, allow, true);
                }
                let kappa = self.fresh_opaque();
                let party = |body| Party { context: Context::Opaque(kappa.clone()), body };
                (vec![party(sides.lhs)], vec![party(sides.rhs)], reader::render_relation(r))
            }
            RuleHead::Bags { lhs, rhs } => {
                let l = self.parties(lhs, scopes, span)?;
                let r = self.parties(rhs, scopes, span)?;
                let label = format!("{{…}} = {{…}} ({} ⇄ {} parties)", l.len(), r.len());
                (l, r, label)
            }
        };

        let mut sub_rules: Vec<(usize, SubRule)> = Vec::new();
        let mut parties: Vec<(usize, Party, u32, String)> = Vec::new();
        for (pos, d) in decls.iter().enumerate() {
            match &d.kind {
                DeclarationKind::SubRelation { relation, halting, cost } => {
                    let sides = self.sides(relation, &inner, d.span)?;
                    if *halting {
                        // Hoisted: visible from the enclosing scope, as written.
                        self.halting_sides(&sides, d.span, allow, false);
                    }
                    let label = format!("{}{}", if *halting { "! " } else { "" }, reader::render_relation(relation));
                    sub_rules.push((pos, SubRule { lhs: sides.lhs, rhs: sides.rhs, cost: *cost, label }));
                }
                DeclarationKind::SubParty { party, cost } => {
                    let mut p = self.parties(std::slice::from_ref(party), &inner, d.span)?;
                    let text = format!("{}: {}", reader::render_term(&party.context), reader::render_terms(&party.body));
                    parties.push((pos, p.pop().unwrap(), *cost, text));
                }
                DeclarationKind::Nested(s) => self.statement(s, &inner)?,
            }
        }

        // Pair sub-parties that share an opaque context: `λ:s. λ:t.` is `s=t.`
        let mut loose = Vec::new();
        let mut used = vec![false; parties.len()];
        for i in 0..parties.len() {
            if used[i] {
                continue;
            }
            let Context::Opaque(v) = &parties[i].1.context else {
                loose.push(parties[i].1.clone());
                continue;
            };
            let partners: Vec<usize> = (i + 1..parties.len())
                .filter(|&j| matches!(&parties[j].1.context, Context::Opaque(w) if w == v))
                .collect();
            if let [j] = partners.as_slice() {
                used[*j] = true;
                let (pos, a, ca, ta) = &parties[i];
                let (_, b, cb, tb) = &parties[*j];
                sub_rules.push((
                    *pos,
                    SubRule { lhs: a.body.clone(), rhs: b.body.clone(), cost: (*ca).max(*cb), label: format!("{ta}. {tb}") },
                ));
            } else {
                loose.push(parties[i].1.clone());
                for j in partners {
                    used[j] = true;
                    loose.push(parties[j].1.clone());
                }
            }
        }
        sub_rules.sort_by_key(|(pos, _)| *pos);

        let single_shared = match (lhs.as_slice(), rhs.as_slice()) {
            ([a], [b]) => matches!((&a.context, &b.context), (Context::Opaque(x), Context::Opaque(y)) if x == y),
            _ => false,
        };
        let rule = Rule {
            lhs,
            rhs,
            sub_rules: sub_rules.into_iter().map(|(_, s)| s).collect(),
            concurrent: !single_shared || !loose.is_empty(),
            loose_parties: loose,
        };
        let origin = self.origin(span, label);
        self.program.push(Definition { kind: DefKind::Rule(rule), origin, allow_ambiguous: allow });
        Ok(())
    }

    fn parties(&mut self, ps: &[SurfaceParty], scopes: &[ScopeId], span: Span) -> Result<Vec<Party>, DesugarError> {
        ps.iter()
            .map(|p| {
                let mut cx = self.cx(scopes, BlankMode::Wildcard, span);
                let context = match &p.context {
                    SurfaceTerm::Var(v) => Context::Opaque(Arc::from(v.as_str())),
                    other => Context::Pattern(cx.term(other)?),
                };
                Ok(Party { context, body: Pattern::comp(cx.terms(&p.body)?) })
            })
            .collect()
    }
}

fn surface_vars(t: &SurfaceTerm, out: &mut Vec<String>) {
    match t {
        SurfaceTerm::Var(v) => {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        SurfaceTerm::Comp(items) => items.iter().for_each(|t| surface_vars(t, out)),
        SurfaceTerm::List { items, tail } => {
            items.iter().for_each(|t| surface_vars(t, out));
            if let Some(t) = tail {
                surface_vars(t, out);
            }
        }
        _ => {}
    }
}

fn rename_surface(t: &SurfaceTerm, map: &[(String, String)]) -> SurfaceTerm {
    match t {
        SurfaceTerm::Var(v) => {
            SurfaceTerm::Var(map.iter().find(|(a, _)| a == v).map(|(_, b)| b.clone()).unwrap_or_else(|| v.clone()))
        }
        SurfaceTerm::Comp(items) => SurfaceTerm::Comp(items.iter().map(|t| rename_surface(t, map)).collect()),
        SurfaceTerm::List { items, tail } => SurfaceTerm::List {
            items: items.iter().map(|t| rename_surface(t, map)).collect(),
            tail: tail.as_ref().map(|t| Box::new(rename_surface(t, map))),
        },
        other => other.clone(),
    }
}

/// Desugars source text as a standalone program (no imports).
pub fn desugar_source(src: &str) -> Result<Program, crate::kernel::LoadError> {
    let stmts = reader::parse_source(src).map_err(|e| crate::kernel::LoadError::Parse { path: None, source: e })?;
    let mut program = Program::new();
    Desugarer::new(&mut program, None)
        .file(&stmts)
        .map_err(|e| crate::kernel::LoadError::Desugar { path: None, source: e })?;
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Direction;

    fn show(p: &Pattern) -> String {
        crate::kernel::render::render_pattern_body(p)
    }

    #[test]
    fn numerals_and_lists() {
        let four = desugar_value(&SurfaceTerm::Nat(4)).unwrap();
        assert_eq!(format!("{four:?}"), "(S (S (S (S Z))))");
        let nil = desugar_value(&SurfaceTerm::List { items: vec![], tail: None }).unwrap();
        assert_eq!(nil, Pattern::Atom(atom::NIL));
        let l = desugar_value(&SurfaceTerm::List {
            items: vec![SurfaceTerm::Var("x".into()), SurfaceTerm::Var("y".into())],
            tail: Some(Box::new(SurfaceTerm::Var("zs".into()))),
        })
        .unwrap();
        assert_eq!(format!("{l:?}"), "(Cons x (Cons y zs))");
        assert_eq!(desugar_value(&SurfaceTerm::Blank).unwrap(), Pattern::unit());
    }

    #[test]
    fn addition_desugars_to_four_definitions() {
        let p = desugar_source("! + _ _ (); ! () _ _ +;\n+ Z b () = () Z b +;\n+ (S a) b () = () (S a) (S b') +:\n  + a b () = () a b' +.\n").unwrap();
        assert_eq!(p.definitions.len(), 4);
        let rules: Vec<_> = p.rules().collect();
        assert_eq!(rules.len(), 2);
        let step = rules[1].1;
        assert_eq!(step.sub_rules.len(), 1);
        assert!(!step.concurrent);
        assert_eq!(show(step.body(Direction::Forward).unwrap()), "+ (S a) b ()");
        assert_eq!(show(&step.sub_rules[0].rhs), "() a b' +");
    }

    #[test]
    fn infix_head_implies_halting_patterns() {
        let p = desugar_source("xs `InsertionSort p` ns ys: xs `Go p` ns ys.\n").unwrap();
        let halting: Vec<String> = p.halting().map(|(_, h)| show(h)).collect();
        assert_eq!(halting.len(), 3);
        assert!(halting[0].starts_with("(InsertionSort p) _"));
        assert!(halting[0].ends_with(" ()"));
        assert!(halting[1].starts_with("() _"));
        assert_eq!(halting[2], "InsertionSort p");
        let (_, rule) = p.rules().next().unwrap();
        assert_eq!(show(rule.body(Direction::Forward).unwrap()), "(InsertionSort p) xs ()");
        assert_eq!(show(rule.body(Direction::Backward).unwrap()), "() ns ys (InsertionSort p)");
    }

    #[test]
    fn data_generates_dup() {
        let p = desugar_source("data S n;").unwrap();
        let halting: Vec<String> = p.halting().map(|(_, h)| show(h)).collect();
        assert_eq!(halting[0], "S n");
        let (_, dup) = p.rules().next().unwrap();
        assert_eq!(show(dup.body(Direction::Forward).unwrap()), "(Dup (S n)) ()");
        assert_eq!(show(dup.body(Direction::Backward).unwrap()), "() (S n') (Dup (S n))");
        assert_eq!(dup.sub_rules.len(), 1);
        assert_eq!(show(&dup.sub_rules[0].lhs), "(Dup n) ()");

        let p = desugar_source("data A;").unwrap();
        let (_, dup) = p.rules().next().unwrap();
        assert!(dup.sub_rules.is_empty());
        assert_eq!(show(dup.body(Direction::Backward).unwrap()), "() A (Dup A)");
    }

    #[test]
    fn halting_subrule_is_hoisted() {
        let p = desugar_source("xs `R` ys:\n  ! ~Go xs [] = ~Go [] ys.\n  ~Go [x . xs] ys = ~Go xs [x . ys];\n").unwrap();
        // two from the infix head, two from `!ρ.`
        assert_eq!(p.halting().count(), 4);
        let rules: Vec<_> = p.rules().collect();
        assert_eq!(rules.len(), 2);
        let outer = rules.iter().find(|(_, r)| r.sub_rules.len() == 1).unwrap().1;
        let inner = rules.iter().find(|(_, r)| r.sub_rules.is_empty()).unwrap().1;
        // the nested loop's head resolves `~Go` in the outer rule's scope
        let sub_go = outer.sub_rules[0].lhs.items().unwrap()[0].clone();
        let loop_go = inner.body(Direction::Forward).unwrap().items().unwrap()[0].clone();
        assert_eq!(sub_go, loop_go);
    }

    #[test]
    fn scopes_are_disjoint_between_rules() {
        let p = desugar_source("A x = B y: ~Go x = ~Go y.\nC x = D y: ~Go x = ~Go y.\n").unwrap();
        let gos: Vec<Pattern> =
            p.rules().map(|(_, r)| r.sub_rules[0].lhs.items().unwrap()[0].clone()).collect();
        assert_ne!(gos[0], gos[1]);
    }

    #[test]
    fn tilde_too_deep() {
        let err = desugar_source("A x = B y: ~~~Go x = ~Go y.\n").unwrap_err();
        assert!(err.to_string().contains("scopes out"));
    }

    #[test]
    fn parties_pair_into_subrules() {
        let p = desugar_source("A x = B y:\n  β: F x.\n  β: G y.\n").unwrap();
        let (_, r) = p.rules().next().unwrap();
        assert_eq!(r.sub_rules.len(), 1);
        assert!(!r.concurrent);
        let p = desugar_source("{a: Alice x; b: Bob} = {a: Alice; b: Bob x};").unwrap();
        assert!(p.rules().next().unwrap().1.concurrent);
    }

    #[test]
    fn duplicates_are_dropped() {
        let p = desugar_source("! Foo x; ! Foo y;\nA x = B x;\nA y = B y;\n").unwrap();
        assert_eq!(p.definitions.len(), 2);
        assert_eq!(p.warnings.len(), 1);
    }
}
