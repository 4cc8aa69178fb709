//! Directional evaluation.
//!
//! A term is rewritten by the unique rule it matches, excluding the converse
//! of the rule that produced it, until only halting patterns match. Applying
//! a rule runs its plan: each step instantiates a sub-term, evaluates it to a
//! halting term in its own right, and matches the result back into the
//! bindings.
//!
//! Unary arithmetic nests deeply, so evaluation keeps its own frame stack
//! rather than recursing.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use thiserror::Error;

use crate::kernel::{render_term_body, DefId, Pattern, Program, Term};
use crate::matcher::{substitute, unify, Bindings, ProgramIndex, Side};
use crate::planner::{Plan, PlanError, PlanTable};
use crate::Direction;

mod copy;

pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000;

/// A loaded program with everything evaluation needs.
#[derive(Clone, Debug)]
pub struct Machine {
    pub program: Program,
    pub index: ProgramIndex,
    pub plans: PlanTable,
    /// Per definition: is it a plain structural `Dup` (see [`copy`])?
    copy_rules: Vec<bool>,
}

impl Machine {
    pub fn new(program: Program) -> Machine {
        let index = ProgramIndex::build(&program);
        let plans = PlanTable::build(&program);
        let copy_rules = program.definitions.iter().map(|d| d.as_rule().is_some_and(copy::is_copy_rule)).collect();
        Machine { program, index, plans, copy_rules }
    }
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    /// Total rule applications allowed, across all nesting levels.
    pub limit: u64,
    pub cancel: Option<Arc<AtomicBool>>,
    /// Answer structural `Dup` sub-computations by sharing the term instead
    /// of rebuilding it. Results and step counts are the same either way.
    pub share_copies: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { limit: DEFAULT_STEP_LIMIT, cancel: None, share_copies: true }
    }
}

/// Where a computation got stuck.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stall {
    /// The innermost term that could not continue.
    pub term: Term,
    pub reason: String,
    /// Rules being applied when the stall happened, outermost first, as
    /// `location: label`.
    pub chain: Vec<String>,
}

impl std::fmt::Display for Stall {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "stuck at `{}`: {}", render_term_body(&self.term), self.reason)?;
        for c in self.chain.iter().rev() {
            write!(f, "\n  while applying {c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Halted(Term),
    Stalled(Stall),
    LimitExceeded(Term),
    Cancelled(Term),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub outcome: Outcome,
    /// Rule applications at the top level.
    pub steps: u64,
    /// Rule applications at every level.
    pub work: u64,
}

impl Evaluation {
    pub fn halted(&self) -> Option<&Term> {
        match &self.outcome {
            Outcome::Halted(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("`{}` is not a halting term, so it cannot start a computation", render_term_body(.0))]
    NotHalting(Term),
    #[error("{origin}: concurrent rule `{label}` cannot be evaluated")]
    Concurrent { origin: String, label: String },
    #[error("`{}` matches more than one rule:\n  {}", render_term_body(.term), .rules.join("\n  "))]
    Nondeterministic { term: Term, rules: Vec<String> },
    #[error("{origin}: rule `{label}` has no plan: {error}")]
    Unplanned { origin: String, label: String, error: PlanError },
    #[error("{origin}: {message}")]
    Internal { origin: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    /// A (sub-)computation begins at `depth`.
    Enter { depth: usize, term: Term },
    /// A rule was applied at `depth`, producing `term`.
    Step { depth: usize, def: DefId, direction: Direction, term: Term },
    /// A (sub-)computation halted.
    Exit { depth: usize, term: Term },
}

pub trait Tracer {
    fn event(&mut self, event: &TraceEvent);
}

impl Tracer for Vec<TraceEvent> {
    fn event(&mut self, event: &TraceEvent) {
        self.push(event.clone());
    }
}

/// Discards events.
pub struct NoTrace;

impl Tracer for NoTrace {
    fn event(&mut self, _: &TraceEvent) {}
}

struct Pending {
    def: DefId,
    dir: Direction,
    step: usize,
    bindings: Bindings,
}

struct Frame {
    term: Term,
    /// The rule that produced `term`; `None` while it is still the start.
    last: Option<(DefId, Direction)>,
    pending: Option<Pending>,
}

enum Decision {
    Halt,
    Stall(String),
    Apply(DefId, Direction, Bindings),
}

impl Machine {
    fn origin(&self, def: DefId) -> String {
        let d = &self.program.definitions[def];
        format!("{}: {}", d.origin, d.origin.label)
    }

    /// Chooses what to do with `term`, given the rule that produced it.
    fn decide(&self, term: &Term, last: Option<(DefId, Direction)>) -> Result<Decision, EvalError> {
        let mut halting = false;
        let mut chosen: Vec<(DefId, Direction, Bindings)> = Vec::new();
        for c in self.index.lookup(term) {
            match c.side.direction() {
                None => halting = true,
                Some(d) => {
                    if last == Some((c.def, d.flip())) {
                        continue;
                    }
                    chosen.push((c.def, d, c.bindings));
                }
            }
        }
        match chosen.len() {
            0 if halting => Ok(Decision::Halt),
            0 => Ok(Decision::Stall("no matching rule".into())),
            1 => {
                let (def, dir, b) = chosen.pop().unwrap();
                let rule = self.program.definitions[def].as_rule().unwrap();
                if rule.concurrent {
                    let d = &self.program.definitions[def];
                    return Err(EvalError::Concurrent { origin: d.origin.to_string(), label: d.origin.label.clone() });
                }
                Ok(Decision::Apply(def, dir, b))
            }
            _ => Err(EvalError::Nondeterministic {
                term: term.clone(),
                rules: chosen.iter().map(|(d, dir, _)| format!("{} ({})", self.origin(*d), dir.arrow())).collect(),
            }),
        }
    }

    fn plan(&self, def: DefId, dir: Direction) -> Result<&Plan, EvalError> {
        match self.plans.get(def, dir) {
            Some(Ok(p)) => Ok(p),
            Some(Err(e)) => {
                let d = &self.program.definitions[def];
                Err(EvalError::Unplanned { origin: d.origin.to_string(), label: d.origin.label.clone(), error: e.clone() })
            }
            None => Err(self.internal(def, "rule has no plan entry")),
        }
    }

    fn internal(&self, def: DefId, message: impl Into<String>) -> EvalError {
        EvalError::Internal { origin: self.origin(def), message: message.into() }
    }

    /// Evaluates a ground term sequence. The start term must match a halting
    /// pattern.
    pub fn evaluate(&self, term: &Term, opts: &EvalOptions, tracer: &mut dyn Tracer) -> Result<Evaluation, EvalError> {
        if !self.index.lookup(term).iter().any(|c| c.side == Side::Halting) {
            return Err(EvalError::NotHalting(term.clone()));
        }
        let mut frames = vec![Frame { term: term.clone(), last: None, pending: None }];
        let mut memo = copy::CopyMemo::default();
        let mut steps = 0u64;
        let mut work = 0u64;
        tracer.event(&TraceEvent::Enter { depth: 0, term: term.clone() });
        let done = |outcome, steps, work| Ok(Evaluation { outcome, steps, work });

        loop {
            if let Some(flag) = &opts.cancel {
                if flag.load(Ordering::Relaxed) {
                    return done(Outcome::Cancelled(frames[0].term.clone()), steps, work);
                }
            }
            let depth = frames.len() - 1;
            let top = frames.last().unwrap();
            match self.decide(&top.term, top.last)? {
                Decision::Stall(reason) => {
                    let stall = self.stall(&frames, top.term.clone(), reason);
                    return done(Outcome::Stalled(stall), steps, work);
                }
                Decision::Apply(def, dir, bindings) => {
                    if work >= opts.limit {
                        return done(Outcome::LimitExceeded(frames[0].term.clone()), steps, work);
                    }
                    work += 1;
                    if depth == 0 {
                        steps += 1;
                    }
                    frames.last_mut().unwrap().pending = Some(Pending { def, dir, step: 0, bindings });
                }
                Decision::Halt => {
                    let finished = frames.pop().unwrap();
                    tracer.event(&TraceEvent::Exit { depth, term: finished.term.clone() });
                    let Some(parent) = frames.last_mut() else {
                        return done(Outcome::Halted(finished.term), steps, work);
                    };
                    let p = parent.pending.as_mut().unwrap();
                    let rule = self.program.definitions[p.def].as_rule().unwrap();
                    let step = self.plan(p.def, p.dir)?.steps[p.step];
                    let sub = &rule.sub_rules[step.sub_rule];
                    if !unify(sub.target(step.direction), &finished.term, &mut p.bindings) {
                        let fit = misfit(step.sub_rule, &sub.label, step.direction);
                        let reason = match finished.last {
                            None => format!("no matching rule, and the term {fit}"),
                            Some(_) => format!("the result {fit}"),
                        };
                        let stall = self.stall(&frames, finished.term, reason);
                        return done(Outcome::Stalled(stall), steps, work);
                    }
                    p.step += 1;
                }
            }
            // Run the top frame's pending application as far as it goes:
            // either spawn the next sub-computation or finish the rewrite.
            loop {
                // a sub-computation may just have been popped
                let depth = frames.len() - 1;
                let top = frames.last_mut().unwrap();
                let Some(p) = top.pending.as_mut() else { break };
                let plan = self.plan(p.def, p.dir)?;
                let rule = self.program.definitions[p.def].as_rule().unwrap();
                let Some(step) = plan.steps.get(p.step) else {
                    let out = rule.body(p.dir.flip()).ok_or_else(|| self.internal(p.def, "rule has no single output"))?;
                    let next = substitute(out, &p.bindings).map_err(|e| self.internal(p.def, e.to_string()))?;
                    let (def, dir) = (p.def, p.dir);
                    top.pending = None;
                    top.term = next;
                    top.last = Some((def, dir));
                    tracer.event(&TraceEvent::Step { depth, def, direction: dir, term: top.term.clone() });
                    break;
                };
                let sub = &rule.sub_rules[step.sub_rule];
                let src = sub.source(step.direction);
                let child = substitute(src, &p.bindings).map_err(|e| self.internal(p.def, e.to_string()))?;
                consume(src, &mut p.bindings);
                tracer.event(&TraceEvent::Enter { depth: depth + 1, term: child.clone() });
                let shortcut = if opts.share_copies { self.shortcut_copy(&child, opts.limit - work, &mut memo) } else { None };
                let Some((result, cost)) = shortcut else {
                    frames.push(Frame { term: child, last: None, pending: None });
                    break;
                };
                work += cost;
                tracer.event(&TraceEvent::Exit { depth: depth + 1, term: result.clone() });
                if !unify(sub.target(step.direction), &result, &mut p.bindings) {
                    let reason = format!("the result {}", misfit(step.sub_rule, &sub.label, step.direction));
                    let stall = self.stall(&frames, result, reason);
                    return done(Outcome::Stalled(stall), steps, work);
                }
                p.step += 1;
            }
        }
    }

    fn stall(&self, frames: &[Frame], term: Term, reason: String) -> Stall {
        let chain = frames.iter().filter_map(|f| f.pending.as_ref()).map(|p| self.origin(p.def)).collect();
        Stall { term, reason, chain }
    }

    /// Runs a relation query. The ground side is turned into a start term in
    /// the infix layout (`f x* ()` forward, `() y* f` backward); the result is
    /// matched against the other side's pattern.
    pub fn evaluate_relation(
        &self,
        ground: &[Term],
        infix: &Term,
        other: &[Pattern],
        dir: Direction,
        opts: &EvalOptions,
        tracer: &mut dyn Tracer,
    ) -> Result<(Evaluation, Option<Bindings>), EvalError> {
        let start = match dir {
            Direction::Forward => Term::comp([infix.clone()].into_iter().chain(ground.iter().cloned()).chain([Term::unit()]).collect()),
            Direction::Backward => Term::comp([Term::unit()].into_iter().chain(ground.iter().cloned()).chain([infix.clone()]).collect()),
        };
        let pattern = match dir {
            Direction::Forward => {
                Pattern::comp([Pattern::unit()].into_iter().chain(other.iter().cloned()).chain([Pattern::from_term(infix)]).collect())
            }
            Direction::Backward => {
                Pattern::comp([Pattern::from_term(infix)].into_iter().chain(other.iter().cloned()).chain([Pattern::unit()]).collect())
            }
        };
        let eval = self.evaluate(&start, opts, tracer)?;
        let bindings = eval.halted().and_then(|t| crate::matcher::matches(&pattern, t));
        Ok((eval, bindings))
    }
}

fn misfit(sub_rule: usize, label: &str, dir: Direction) -> String {
    format!("does not fit sub-rule {} `{label}` ({})", sub_rule + 1, dir.arrow())
}

/// Removes the variables of `p` from the bindings: that knowledge has been
/// handed to the sub-computation.
fn consume(p: &Pattern, b: &mut Bindings) {
    for v in p.vars() {
        b.take(&v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{desugar_source, desugar_value};
    use crate::reader::{parse_repl_line, ReplCommand};

    const ADD: &str = "! + _ _ (); ! () _ _ +;\n+ Z b () = () Z b +;\n+ (S a) b () = () (S a) (S b') +:\n  + a b () = () a b' +.\n";

    fn ground(src: &str) -> Term {
        let ReplCommand::Evaluate(ts) = parse_repl_line(&format!("| {src}")).unwrap() else { panic!() };
        Pattern::comp(ts.iter().map(|t| desugar_value(t).unwrap()).collect()).to_term().unwrap()
    }

    fn run(m: &Machine, src: &str) -> (Evaluation, Vec<TraceEvent>) {
        let mut trace = Vec::new();
        let e = m.evaluate(&ground(src), &EvalOptions::default(), &mut trace).unwrap();
        (e, trace)
    }

    #[test]
    fn addition_both_ways() {
        let m = Machine::new(desugar_source(ADD).unwrap());
        let (e, trace) = run(&m, "+ 4 3 ()");
        assert_eq!(render_term_body(e.halted().unwrap()), "() 4 7 +");
        assert_eq!(e.steps, 1);
        assert_eq!(e.work, 5);
        let entered: Vec<String> = trace
            .iter()
            .filter_map(|ev| match ev {
                TraceEvent::Enter { term, .. } => Some(render_term_body(term)),
                _ => None,
            })
            .collect();
        assert_eq!(entered, ["+ 4 3 ()", "+ 3 3 ()", "+ 2 3 ()", "+ 1 3 ()", "+ Z 3 ()"]);
        let (back, _) = run(&m, "() 4 7 +");
        assert_eq!(render_term_body(back.halted().unwrap()), "+ 4 3 ()");
        assert_eq!(back.work, e.work);
    }

    #[test]
    fn steps_after_sub_computations_keep_their_depth() {
        let src = format!("{ADD}! □ _ (); ! () _ □;\n□ n () = □ n Z □;\n□ Z m □ = () m □;\n□ (S n) m □ = □ n (S m'') □:\n  + n m () = () n m' +.\n  + n m' () = () n m'' +.\n");
        let m = Machine::new(desugar_source(&src).unwrap());
        let (e, trace) = run(&m, "□ 2 ()");
        assert_eq!(render_term_body(e.halted().unwrap()), "() 4 □");
        let top: Vec<String> = trace
            .iter()
            .filter_map(|ev| match ev {
                TraceEvent::Step { depth: 0, term, .. } => Some(render_term_body(term)),
                _ => None,
            })
            .collect();
        assert_eq!(top, ["□ 2 Z □", "□ 1 3 □", "□ Z 4 □", "() 4 □"]);
        assert_eq!(e.steps, 4);
    }

    #[test]
    fn subtraction_underflow_stalls() {
        let m = Machine::new(desugar_source(ADD).unwrap());
        let (e, _) = run(&m, "() 5 2 +");
        let Outcome::Stalled(s) = e.outcome else { panic!("{e:?}") };
        assert_eq!(render_term_body(&s.term), "() 3 Z +");
        assert_eq!(s.chain.len(), 2);
        let (e, _) = run(&m, "() 2 5 +");
        assert_eq!(render_term_body(e.halted().unwrap()), "+ 2 3 ()");
    }

    #[test]
    fn start_must_be_halting() {
        let m = Machine::new(desugar_source(ADD).unwrap());
        let err = m.evaluate(&ground("+ 4 3"), &EvalOptions::default(), &mut NoTrace).unwrap_err();
        assert!(matches!(err, EvalError::NotHalting(_)));
    }

    #[test]
    fn step_limit() {
        let m = Machine::new(desugar_source(ADD).unwrap());
        let opts = EvalOptions { limit: 3, ..Default::default() };
        let e = m.evaluate(&ground("+ 4 3 ()"), &opts, &mut NoTrace).unwrap();
        assert!(matches!(e.outcome, Outcome::LimitExceeded(_)));
    }

    #[test]
    fn cancellation() {
        let m = Machine::new(desugar_source(ADD).unwrap());
        let flag = Arc::new(AtomicBool::new(true));
        let opts = EvalOptions { cancel: Some(flag), ..Default::default() };
        let e = m.evaluate(&ground("+ 4 3 ()"), &opts, &mut NoTrace).unwrap();
        assert!(matches!(e.outcome, Outcome::Cancelled(_)));
    }

    #[test]
    fn relation_queries() {
        let src = "b `+ Z` b;\nb `+ (S a)` (S c): b `+ a` c.\n";
        let m = Machine::new(desugar_source(src).unwrap());
        let plus3 = ground("(+ 3)").items().unwrap()[0].clone();
        let (_, b) = m
            .evaluate_relation(&[Term::nat(4)], &plus3, &[Pattern::var("y")], Direction::Forward, &EvalOptions::default(), &mut NoTrace)
            .unwrap();
        assert_eq!(b.unwrap().get("y"), Some(&Term::nat(7)));
        let (_, b) = m
            .evaluate_relation(&[Term::nat(7)], &plus3, &[Pattern::var("x")], Direction::Backward, &EvalOptions::default(), &mut NoTrace)
            .unwrap();
        assert_eq!(b.unwrap().get("x"), Some(&Term::nat(4)));
    }

    #[test]
    fn concurrent_rules_are_refused() {
        let m = Machine::new(desugar_source("! Alice x; {a: Alice x; b: Bob} = {a: Alice; b: Bob x};").unwrap());
        let err = m.evaluate(&ground("Alice Z"), &EvalOptions::default(), &mut NoTrace);
        assert!(matches!(err, Ok(_) | Err(EvalError::Concurrent { .. })));
    }
}
