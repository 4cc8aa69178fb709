//! The interactive session behind the `alethe` binary: loading programs with
//! diagnostics, evaluation forms, session variables and printing.

use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::checker::{check_program, render_report};
use crate::engine::{EvalError, EvalOptions, Evaluation, Machine, NoTrace, Outcome};
use crate::kernel::{
    desugar_value, load_program, render_pattern_body, render_term_body_with, render_term_with,
    Context, DefKind, Pattern, Program, RenderOptions, Rule, Term,
};
use crate::matcher::{matches, substitute, Bindings};
use crate::planner::render_plan;
use crate::reader::{parse_repl_line, ReplCommand, Statement, SurfaceTerm};
use crate::Direction;

/// How a command went, ordered by severity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    /// Parse, load, checker or planner problems.
    Diagnostic,
    /// An evaluation stalled, ran out of steps or was interrupted.
    Stalled,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Diagnostic => 1,
            Status::Stalled => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reply {
    pub text: String,
    pub status: Status,
    pub quit: bool,
}

impl Reply {
    fn ok(text: impl Into<String>) -> Reply {
        Reply { text: text.into(), status: Status::Ok, quit: false }
    }

    fn diagnostic(text: impl Into<String>) -> Reply {
        Reply { text: text.into(), status: Status::Diagnostic, quit: false }
    }

    fn stalled(text: impl Into<String>) -> Reply {
        Reply { text: text.into(), status: Status::Stalled, quit: false }
    }
}

#[derive(Clone, Debug)]
pub struct SessionOptions {
    pub search: Vec<PathBuf>,
    pub limit: u64,
    pub color: bool,
}

impl Default for SessionOptions {
    fn default() -> Self {
        SessionOptions { search: Vec::new(), limit: crate::engine::DEFAULT_STEP_LIMIT, color: false }
    }
}

pub struct Session {
    pub machine: Machine,
    pub files: Vec<PathBuf>,
    /// Statements typed at the prompt, replayed on reload.
    pub typed: Vec<Vec<Statement>>,
    /// Variables assigned by `>` and `<` queries, in assignment order.
    pub variables: Vec<(String, Term)>,
    pub last_garbage: Option<Term>,
    /// Top-level steps and total rule applications of the last evaluation.
    pub last_stats: Option<(u64, u64)>,
    pub options: SessionOptions,
    pub render: RenderOptions,
    cancel: Arc<AtomicBool>,
}

impl Session {
    pub fn new(options: SessionOptions) -> Session {
        Session {
            machine: Machine::new(Program::new()),
            files: Vec::new(),
            typed: Vec::new(),
            variables: Vec::new(),
            last_garbage: None,
            last_stats: None,
            options,
            render: RenderOptions::default(),
            cancel: Arc::new(AtomicBool::new(false)),
        }
    }

    /// Flag that interrupts a running evaluation at its next step.
    pub fn cancel_flag(&self) -> Arc<AtomicBool> {
        self.cancel.clone()
    }

    pub fn variable(&self, name: &str) -> Option<&Term> {
        self.variables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Replaces the program with the given files. On any load or checker
    /// error the current program is kept.
    pub fn load(&mut self, files: &[PathBuf]) -> Reply {
        match self.build(files, &[]) {
            Ok((machine, reply)) => {
                self.machine = machine;
                self.files = files.to_vec();
                self.typed.clear();
                reply
            }
            Err(reply) => reply,
        }
    }

    pub fn reload(&mut self) -> Reply {
        let files = self.files.clone();
        let typed = self.typed.clone();
        match self.build(&files, &typed) {
            Ok((machine, reply)) => {
                self.machine = machine;
                reply
            }
            Err(reply) => reply,
        }
    }

    fn build(&self, files: &[PathBuf], typed: &[Vec<Statement>]) -> Result<(Machine, Reply), Reply> {
        let mut program = load_program(files, &self.options.search).map_err(|e| self.error(e.to_string()))?;
        for stmts in typed {
            program.add_statements(stmts, &self.options.search).map_err(|e| self.error(e.to_string()))?;
        }
        self.admit(program)
    }

    /// Checks a candidate program. Ambiguity rejects it; planning failures
    /// are reported but the program is still usable.
    fn admit(&self, program: Program) -> Result<(Machine, Reply), Reply> {
        let mut text = String::new();
        for w in &program.warnings {
            text.push_str(&self.paint("warning", w));
            text.push('\n');
        }
        let (graph, report) = check_program(&program);
        if report.is_ambiguous() {
            text.push_str(&self.paint("error", &render_report(&report, &graph, &program)));
            text.push_str("\nprogram not loaded\n");
            return Err(Reply::diagnostic(text));
        }
        let machine = Machine::new(program);
        let mut status = Status::Ok;
        for (def, dir, err) in machine.plans.errors() {
            let origin = &machine.program.definitions[def].origin;
            let way = if dir == Direction::Forward { "forward" } else { "backward" };
            let msg = format!("{origin}: `{}` cannot run {way}: {err}", origin.label);
            text.push_str(&self.paint("warning", &msg));
            text.push('\n');
            status = Status::Diagnostic;
        }
        Ok((machine, Reply { text, status, quit: false }))
    }

    fn error(&self, msg: String) -> Reply {
        Reply::diagnostic(self.paint("error", &msg) + "\n")
    }

    fn paint(&self, kind: &str, msg: &str) -> String {
        let msg = msg.trim_end();
        if !self.options.color {
            return format!("{kind}: {msg}");
        }
        let code = match kind {
            "error" => "31",
            "stall" => "33",
            _ => "35",
        };
        format!("\x1b[1;{code}m{kind}:\x1b[0m {msg}")
    }

    /// Runs one complete input line (or block of statements).
    pub fn execute(&mut self, line: &str) -> Reply {
        match parse_repl_line(line) {
            Ok(cmd) => self.command(cmd),
            Err(e) => self.error(e.to_string()),
        }
    }

    pub fn command(&mut self, cmd: ReplCommand) -> Reply {
        match cmd {
            ReplCommand::Empty => Reply::ok(""),
            ReplCommand::Quit => Reply { text: String::new(), status: Status::Ok, quit: true },
            ReplCommand::Load(files) => {
                let files: Vec<PathBuf> = files.into_iter().map(PathBuf::from).collect();
                self.load(&files)
            }
            ReplCommand::Reload => self.reload(),
            ReplCommand::Vars => {
                let mut out = String::new();
                for (name, t) in &self.variables {
                    out.push_str(&format!("{name} = {}\n", render_term_body_with(t, &self.render)));
                }
                Reply::ok(out)
            }
            ReplCommand::Print => Reply::ok(self.listing()),
            ReplCommand::Garbage => match &self.last_garbage {
                Some(g) => Reply::ok(render_term_with(g, &RenderOptions { hide_garbage: false, ..self.render }) + "\n"),
                None => Reply::ok("no garbage recorded\n"),
            },
            ReplCommand::Statements(stmts) => self.define(stmts),
            ReplCommand::Evaluate(terms) => self.evaluate(&terms),
            ReplCommand::Query { direction, relation } => {
                let (ground, other) = match direction {
                    Direction::Forward => (&relation.lhs, &relation.rhs),
                    Direction::Backward => (&relation.rhs, &relation.lhs),
                };
                self.query(ground, relation.infix().as_deref(), other, direction)
            }
        }
    }

    fn define(&mut self, stmts: Vec<Statement>) -> Reply {
        let mut program = self.machine.program.clone();
        let before = program.definitions.len();
        if let Err(e) = program.add_statements(&stmts, &self.options.search) {
            return self.error(e.to_string());
        }
        let added = program.definitions.len() - before;
        match self.admit(program) {
            Ok((machine, mut reply)) => {
                self.machine = machine;
                self.typed.push(stmts);
                if reply.text.is_empty() {
                    reply.text = format!("{added} definition(s) added\n");
                }
                reply
            }
            Err(reply) => reply,
        }
    }

    fn scope(&self) -> Bindings {
        let mut b = Bindings::new();
        for (name, t) in &self.variables {
            b.bind(&name.as_str().into(), t);
        }
        b
    }

    fn ground(&self, terms: &[SurfaceTerm]) -> Result<Vec<Term>, String> {
        let scope = self.scope();
        terms
            .iter()
            .map(|t| {
                let p = desugar_value(t).map_err(|e| e.to_string())?;
                substitute(&p, &scope).map_err(|u| format!("unknown variable `{}`", u.0))
            })
            .collect()
    }

    fn options(&self) -> EvalOptions {
        self.cancel.store(false, Ordering::SeqCst);
        EvalOptions { limit: self.options.limit, cancel: Some(self.cancel.clone()), ..EvalOptions::default() }
    }

    fn evaluate(&mut self, terms: &[SurfaceTerm]) -> Reply {
        let start = match self.ground(terms) {
            Ok(ts) => Term::comp(ts),
            Err(e) => return self.error(e),
        };
        match self.machine.evaluate(&start, &self.options(), &mut NoTrace) {
            Ok(eval) => {
                self.last_stats = Some((eval.steps, eval.work));
                match &eval.outcome {
                    Outcome::Halted(t) => {
                        self.note_garbage(t.items().unwrap_or(&[]).iter());
                        Reply::ok(render_term_body_with(t, &self.render) + "\n")
                    }
                    _ => self.unfinished(&eval),
                }
            }
            Err(e) => self.eval_error(e),
        }
    }

    fn query(&mut self, ground: &[SurfaceTerm], infix: Option<&[SurfaceTerm]>, other: &[SurfaceTerm], dir: Direction) -> Reply {
        let ground = match self.ground(ground) {
            Ok(ts) => ts,
            Err(e) => return self.error(e),
        };
        let infix = match infix.map(|f| self.ground(f)).transpose() {
            Ok(f) => f.map(|mut f| if f.len() == 1 { f.pop().unwrap() } else { Term::comp(f) }),
            Err(e) => return self.error(e),
        };
        let other: Vec<Pattern> = match other.iter().map(desugar_value).collect() {
            Ok(ps) => ps,
            Err(e) => return self.error(e.to_string()),
        };
        let opts = self.options();
        let result = match &infix {
            Some(f) => self.machine.evaluate_relation(&ground, f, &other, dir, &opts, &mut NoTrace),
            None => self.machine.evaluate(&Term::comp(ground), &opts, &mut NoTrace).map(|eval| {
                let b = eval.halted().and_then(|t| matches(&Pattern::comp(other.clone()), t));
                (eval, b)
            }),
        };
        let (eval, bindings) = match result {
            Ok(r) => r,
            Err(e) => return self.eval_error(e),
        };
        self.last_stats = Some((eval.steps, eval.work));
        let Some(halted) = eval.halted() else { return self.unfinished(&eval) };
        let Some(bindings) = bindings else {
            let pattern: Vec<String> = other.iter().map(render_pattern_body).collect();
            return Reply::stalled(
                self.paint(
                    "stall",
                    &format!(
                        "result `{}` does not match `{}`",
                        render_term_body_with(halted, &self.render),
                        pattern.join(" ")
                    ),
                ) + "\n",
            );
        };
        let mut out = String::new();
        let assigned: Vec<(String, Term)> =
            bindings.iter().filter(|(v, _)| !v.starts_with('_')).map(|(v, t)| (v.to_string(), t.clone())).collect();
        if assigned.is_empty() {
            out = render_term_body_with(halted, &self.render) + "\n";
        }
        self.note_garbage(assigned.iter().map(|(_, t)| t));
        for (name, t) in assigned {
            out.push_str(&format!("{name} = {}\n", render_term_body_with(&t, &self.render)));
            match self.variables.iter_mut().find(|(n, _)| *n == name) {
                Some(slot) => slot.1 = t,
                None => self.variables.push((name, t)),
            }
        }
        Reply::ok(out)
    }

    fn note_garbage<'a>(&mut self, terms: impl Iterator<Item = &'a Term>) {
        for t in terms {
            if t.is_garbage() {
                self.last_garbage = Some(t.clone());
            }
        }
    }

    fn unfinished(&self, eval: &Evaluation) -> Reply {
        let msg = match &eval.outcome {
            Outcome::Stalled(s) => s.to_string(),
            Outcome::LimitExceeded(t) => format!(
                "step limit of {} exceeded; last term `{}`",
                self.options.limit,
                render_term_body_with(t, &self.render)
            ),
            Outcome::Cancelled(t) => format!("interrupted at `{}`", render_term_body_with(t, &self.render)),
            Outcome::Halted(_) => unreachable!(),
        };
        Reply::stalled(self.paint("stall", &msg) + "\n")
    }

    fn eval_error(&self, e: EvalError) -> Reply {
        self.error(e.to_string())
    }

    /// Every definition with its serialisation, as shown by `:p`.
    pub fn listing(&self) -> String {
        let program = &self.machine.program;
        let mut out = String::new();
        for (id, d) in program.definitions.iter().enumerate() {
            match &d.kind {
                DefKind::Halting(p) => out.push_str(&format!("! {};\n", render_pattern_body(p))),
                DefKind::Rule(r) => {
                    out.push_str(&format!("{};", render_rule(r)));
                    out.push_str(&format!("  -- {}\n", d.origin));
                    if r.sub_rules.is_empty() {
                        continue;
                    }
                    match self.machine.plans.get(id, Direction::Forward) {
                        Some(Ok(plan)) => {
                            out.push_str(&format!("  plan {} (cost {})\n", plan.route(), plan.cost));
                            out.push_str(&render_plan(plan, r));
                        }
                        Some(Err(e)) => out.push_str(&format!("  no plan: {e}\n")),
                        None => {}
                    }
                }
            }
        }
        out
    }
}

fn render_side(parties: &[crate::kernel::Party]) -> String {
    let bodies: Vec<String> = parties
        .iter()
        .map(|p| match &p.context {
            Context::Opaque(_) => render_pattern_body(&p.body),
            Context::Pattern(c) => format!("{}: {}", render_pattern_body(c), render_pattern_body(&p.body)),
        })
        .collect();
    bodies.join("; ")
}

fn render_rule(r: &Rule) -> String {
    if r.concurrent || r.lhs.len() != 1 || r.rhs.len() != 1 {
        format!("{{{}}} = {{{}}}", render_side(&r.lhs), render_side(&r.rhs))
    } else {
        format!("{} = {}", render_side(&r.lhs), render_side(&r.rhs))
    }
}

/// Reads a start term as it would be typed after `|`, without the bar.
pub fn parse_term(text: &str) -> Result<Term, String> {
    let ReplCommand::Evaluate(terms) = parse_repl_line(&format!("| {text}")).map_err(|e| e.to_string())? else {
        return Err(format!("`{text}` is not a term"));
    };
    let items = terms
        .iter()
        .map(|t| {
            let p = desugar_value(t).map_err(|e| e.to_string())?;
            p.to_term().ok_or_else(|| format!("`{text}` is not ground"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Term::comp(items))
}

/// Reads commands until `:q` or end of input. A statement spanning several
/// lines is collected until it parses. Returns the worst status seen.
pub fn run_repl(session: &mut Session, input: impl BufRead, mut output: impl Write, prompt: bool) -> io::Result<Status> {
    let mut worst = Status::Ok;
    let mut pending = String::new();
    let mut lines = input.lines();
    loop {
        if prompt {
            write!(output, "{}", if pending.is_empty() { "alethe> " } else { "   ...> " })?;
            output.flush()?;
        }
        let Some(line) = lines.next() else { break };
        let line = line?;
        pending.push_str(&line);
        pending.push('\n');
        let is_statement = !matches!(pending.trim_start().chars().next(), Some(':' | '|' | '>' | '<') | None);
        if is_statement {
            if let Err(e) = crate::reader::parse_source(&pending) {
                if e.is_incomplete() {
                    continue;
                }
            }
        }
        let text = std::mem::take(&mut pending);
        let reply = session.execute(&text);
        write!(output, "{}", reply.text)?;
        output.flush()?;
        worst = worst.max(reply.status);
        if reply.quit {
            break;
        }
    }
    if !pending.trim().is_empty() {
        let reply = session.execute(&pending);
        write!(output, "{}", reply.text)?;
        worst = worst.max(reply.status);
    }
    Ok(worst)
}

/// Loads `files` and, if given, runs one query. Exit status: 0 success, 1
/// diagnostics, 2 stall.
pub fn run_batch(session: &mut Session, files: &[PathBuf], query: Option<&str>, mut out: impl Write, mut err: impl Write) -> io::Result<i32> {
    let mut status = Status::Ok;
    if !files.is_empty() {
        let reply = session.load(files);
        write!(err, "{}", reply.text)?;
        status = reply.status;
        if session.files != files {
            return Ok(status.exit_code());
        }
    }
    if let Some(q) = query {
        let reply = session.execute(q);
        if reply.status == Status::Ok {
            write!(out, "{}", reply.text)?;
        } else {
            write!(err, "{}", reply.text)?;
        }
        status = status.max(reply.status);
    }
    Ok(status.exit_code())
}
