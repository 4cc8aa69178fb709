//! Renders surface syntax back to source text that reparses to the same tree.

use std::fmt::Write;

use super::syntax::*;

pub fn render_program(stmts: &[Statement]) -> String {
    let mut out = String::new();
    for s in stmts {
        render_statement(s, 0, &mut out);
    }
    out
}

pub fn render_term(t: &SurfaceTerm) -> String {
    let mut out = String::new();
    term(t, &mut out);
    out
}

pub fn render_terms(ts: &[SurfaceTerm]) -> String {
    let mut out = String::new();
    terms(ts, &mut out);
    out
}

pub fn render_relation(r: &Relation) -> String {
    let mut out = String::new();
    relation(r, &mut out);
    out
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn render_statement(s: &Statement, depth: usize, out: &mut String) {
    for p in &s.pragmas {
        indent(depth, out);
        let _ = writeln!(out, "-- @{p}");
    }
    indent(depth, out);
    match &s.kind {
        StatementKind::Import(path) => {
            out.push_str("import ");
            string(path, out);
            out.push_str(";\n");
        }
        StatementKind::Data(ts) => {
            out.push_str("data ");
            terms(ts, out);
            out.push_str(";\n");
        }
        StatementKind::Halting(h) => {
            out.push_str("! ");
            halting(h, out);
            out.push_str(";\n");
        }
        StatementKind::Rule { head, decls } => {
            match head {
                RuleHead::Relation(r) => relation(r, out),
                RuleHead::Bags { lhs, rhs } => {
                    bag(lhs, out);
                    out.push_str(" = ");
                    bag(rhs, out);
                }
            }
            if decls.is_empty() {
                out.push_str(";\n");
            } else {
                out.push_str(":\n");
                for d in decls {
                    declaration(d, depth + 1, out);
                }
            }
        }
    }
}

fn declaration(d: &Declaration, depth: usize, out: &mut String) {
    match &d.kind {
        DeclarationKind::Nested(s) => render_statement(s, depth, out),
        DeclarationKind::SubRelation { relation: r, halting, cost } => {
            indent(depth, out);
            if *halting {
                out.push_str("! ");
            }
            relation(r, out);
            dots(*cost, out);
        }
        DeclarationKind::SubParty { party: p, cost } => {
            indent(depth, out);
            party(p, out);
            dots(*cost, out);
        }
    }
}

fn dots(n: u32, out: &mut String) {
    for _ in 0..n {
        out.push('.');
    }
    out.push('\n');
}

fn halting(h: &Halting, out: &mut String) {
    match h {
        Halting::Pattern(ts) => terms(ts, out),
        Halting::Relation(r) => relation(r, out),
    }
}

fn bag(parties: &[SurfaceParty], out: &mut String) {
    out.push('{');
    for (i, p) in parties.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        party(p, out);
    }
    out.push('}');
}

fn party(p: &SurfaceParty, out: &mut String) {
    term(&p.context, out);
    out.push(':');
    if !p.body.is_empty() {
        out.push(' ');
        terms(&p.body, out);
    }
}

fn relation(r: &Relation, out: &mut String) {
    terms(&r.lhs, out);
    if !r.lhs.is_empty() {
        out.push(' ');
    }
    match &r.form {
        RelationForm::Equation => out.push('='),
        RelationForm::Bare(a) => atom(a, out),
        RelationForm::Backtick(f) => {
            out.push('`');
            terms(f, out);
            out.push('`');
        }
    }
    if !r.rhs.is_empty() {
        out.push(' ');
        terms(&r.rhs, out);
    }
}

fn terms(ts: &[SurfaceTerm], out: &mut String) {
    for (i, t) in ts.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        term(t, out);
    }
}

fn term(t: &SurfaceTerm, out: &mut String) {
    match t {
        SurfaceTerm::Atom(a) => atom(a, out),
        SurfaceTerm::Var(v) => out.push_str(v),
        SurfaceTerm::Comp(items) => {
            out.push('(');
            terms(items, out);
            out.push(')');
        }
        SurfaceTerm::Nat(n) => {
            let _ = write!(out, "{n}");
        }
        SurfaceTerm::Str(s) => string(s, out),
        SurfaceTerm::List { items, tail } => {
            out.push('[');
            terms(items, out);
            if let Some(tail) = tail {
                out.push_str(" . ");
                term(tail, out);
            }
            out.push(']');
        }
        SurfaceTerm::Blank => out.push('_'),
    }
}

fn atom(a: &SurfaceAtom, out: &mut String) {
    match a.kind {
        AtomKind::Plain => {
            for _ in 0..a.tildes {
                out.push('~');
            }
            out.push_str(&a.name);
        }
        AtomKind::Hash => {
            out.push('#');
            out.push_str(&a.name);
        }
        AtomKind::Escaped => {
            out.push('#');
            string(&a.name, out);
        }
        AtomKind::Char => {
            out.push('\'');
            let c = a.name.chars().next().unwrap_or(' ');
            escape_char(c, '\'', out);
        }
    }
}

pub(crate) fn escape_char(c: char, quote: char, out: &mut String) {
    match c {
        '\n' => out.push_str("\\n"),
        '\t' => out.push_str("\\t"),
        '\\' => out.push_str("\\\\"),
        c if c == quote => {
            out.push('\\');
            out.push(c);
        }
        c if c.is_control() || (quote == '\'' && c.is_whitespace()) => {
            let _ = write!(out, "\\{}", c as u32);
        }
        c => out.push(c),
    }
}

pub(crate) fn string(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        escape_char(c, '"', out);
    }
    out.push('"');
}
