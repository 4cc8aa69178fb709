use thiserror::Error;

use super::lexer::{tokenize, LexError, Pragma, Span, Token, TokenKind};
use super::syntax::*;
use crate::Direction;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("{span}: {message}{}", expected_suffix(.expected))]
    Syntax { span: Span, message: String, expected: Vec<String> },
    #[error("{span}: {message}")]
    Indentation { span: Span, message: String },
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

impl ParseError {
    pub fn span(&self) -> Span {
        match self {
            ParseError::Lex(e) => e.span,
            ParseError::Syntax { span, .. } | ParseError::Indentation { span, .. } => *span,
        }
    }

    /// True when more input could have completed the parse.
    pub fn is_incomplete(&self) -> bool {
        matches!(self, ParseError::Syntax { message, .. } if message == "unexpected end of input")
    }
}

/// A REPL input line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReplCommand {
    Empty,
    Quit,
    Load(Vec<String>),
    Reload,
    Vars,
    Print,
    Garbage,
    Evaluate(Vec<SurfaceTerm>),
    Query { direction: Direction, relation: Relation },
    Statements(Vec<Statement>),
}

pub fn parse_source(src: &str) -> Result<Vec<Statement>, ParseError> {
    let (tokens, pragmas) = tokenize(src)?;
    parse_program(&tokens, &pragmas)
}

pub fn parse_program(tokens: &[Token], pragmas: &[Pragma]) -> Result<Vec<Statement>, ParseError> {
    let mut p = Parser { tokens, pos: 0, end: end_span(tokens) };
    let mut stmts = Vec::new();
    let mut lines = Vec::new();
    while p.peek().is_some() {
        let first = p.tokens[p.pos].span.line;
        stmts.push(p.statement()?);
        lines.push((first, p.tokens[p.pos - 1].span.line));
    }
    for pragma in pragmas {
        let line = pragma.span.line;
        let target = lines
            .iter()
            .position(|&(a, b)| a <= line && line <= b)
            .or_else(|| lines.iter().position(|&(a, _)| a > line));
        if let Some(i) = target {
            stmts[i].pragmas.push(pragma.name.clone());
        }
    }
    Ok(stmts)
}

pub fn parse_repl_line(text: &str) -> Result<ReplCommand, ParseError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(ReplCommand::Empty);
    }
    if let Some(rest) = trimmed.strip_prefix(':') {
        let mut words = rest.split_whitespace();
        let cmd = words.next().unwrap_or("");
        let args: Vec<String> = words.map(String::from).collect();
        let at = text.len() - text.trim_start().len();
        let whole = Span { start: at, end: at + trimmed.len(), line: 1, col: 1 + text[..at].chars().count() as u32 };
        let no_args = |c: ReplCommand| {
            if args.is_empty() {
                Ok(c)
            } else {
                Err(syntax(whole, format!("`:{cmd}` takes no arguments"), vec![]))
            }
        };
        return match cmd {
            "q" => no_args(ReplCommand::Quit),
            "l" if !args.is_empty() => Ok(ReplCommand::Load(args)),
            "l" => Err(syntax(whole, "`:l` needs at least one file".into(), vec![])),
            "r" => no_args(ReplCommand::Reload),
            "v" => no_args(ReplCommand::Vars),
            "p" => no_args(ReplCommand::Print),
            "g" => no_args(ReplCommand::Garbage),
            _ => Err(syntax(whole, format!("unknown directive `:{cmd}`"), vec![])),
        };
    }
    let lead = trimmed.chars().next().unwrap();
    let after = trimmed[lead.len_utf8()..].chars().next();
    let is_form = matches!(lead, '|' | '>' | '<') && after.is_none_or(|c| c.is_whitespace() || c == '`');
    if !is_form {
        return parse_source(text).map(ReplCommand::Statements);
    }
    let (mut tokens, _) = tokenize(&trimmed[lead.len_utf8()..])?;
    // The en dash is accepted as unit in REPL position.
    for t in &mut tokens {
        if t.kind == TokenKind::Word("–".into()) {
            t.kind = TokenKind::Word("_".into());
        }
    }
    let mut p = Parser { tokens: &tokens, pos: 0, end: end_span(&tokens) };
    let cmd = if lead == '|' {
        let mut terms = Vec::new();
        while p.at_term() {
            terms.push(p.term()?);
        }
        if terms.is_empty() {
            return Err(p.unexpected(vec!["a term".into()]));
        }
        ReplCommand::Evaluate(terms)
    } else {
        let (lhs, form, rhs) = p.relation_items()?;
        let relation = p.finish_relation(lhs, form, rhs)?;
        let direction = if lead == '>' { Direction::Forward } else { Direction::Backward };
        ReplCommand::Query { direction, relation }
    };
    if p.peek().is_some() {
        return Err(p.unexpected(vec!["end of line".into()]));
    }
    Ok(cmd)
}

fn syntax(span: Span, message: String, expected: Vec<String>) -> ParseError {
    ParseError::Syntax { span, message, expected }
}

fn end_span(tokens: &[Token]) -> Span {
    match tokens.last() {
        Some(t) => Span { start: t.span.end, end: t.span.end + 1, line: t.span.line, col: t.span.col + 1 },
        None => Span { start: 0, end: 1, line: 1, col: 1 },
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: Span,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&'a TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn peek_word(&self, w: &str) -> bool {
        matches!(self.peek_kind(), Some(TokenKind::Word(x)) if x == w)
    }

    fn bump(&mut self) -> &'a Token {
        let t = &self.tokens[self.pos];
        self.pos += 1;
        t
    }

    fn span(&self) -> Span {
        self.peek().map(|t| t.span).unwrap_or(self.end)
    }

    fn last_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn unexpected(&self, expected: Vec<String>) -> ParseError {
        match self.peek() {
            Some(t) => syntax(t.span, format!("unexpected {}", t.kind), expected),
            None => syntax(self.end, "unexpected end of input".into(), expected),
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<&'a Token, ParseError> {
        if self.peek_kind() == Some(&kind) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(vec![kind.to_string()]))
        }
    }

    fn at_term(&self) -> bool {
        match self.peek_kind() {
            Some(TokenKind::LParen | TokenKind::LBracket | TokenKind::Str(_))
            | Some(TokenKind::HashStr(_) | TokenKind::Char(_)) => true,
            Some(TokenKind::Word(w)) => w != "=",
            _ => false,
        }
    }

    fn term(&mut self) -> Result<SurfaceTerm, ParseError> {
        let tok = match self.peek() {
            Some(t) => t,
            None => return Err(self.unexpected(vec!["a term".into()])),
        };
        match &tok.kind {
            TokenKind::LParen => {
                self.bump();
                let mut items = Vec::new();
                while self.at_term() {
                    items.push(self.term()?);
                }
                self.expect(TokenKind::RParen)?;
                Ok(SurfaceTerm::Comp(items))
            }
            TokenKind::LBracket => {
                self.bump();
                let mut items = Vec::new();
                while self.at_term() {
                    items.push(self.term()?);
                }
                let mut tail = None;
                if self.peek_kind() == Some(&TokenKind::Dots(1)) {
                    if items.is_empty() {
                        return Err(syntax(self.span(), "a dotted list needs at least one element".into(), vec![]));
                    }
                    self.bump();
                    tail = Some(Box::new(self.term()?));
                }
                self.expect(TokenKind::RBracket)?;
                Ok(SurfaceTerm::List { items, tail })
            }
            TokenKind::Str(s) => {
                self.bump();
                Ok(SurfaceTerm::Str(s.clone()))
            }
            TokenKind::HashStr(s) => {
                self.bump();
                Ok(SurfaceTerm::Atom(SurfaceAtom { kind: AtomKind::Escaped, name: s.clone(), tildes: 0 }))
            }
            TokenKind::Char(c) => {
                self.bump();
                Ok(SurfaceTerm::Atom(SurfaceAtom { kind: AtomKind::Char, name: c.to_string(), tildes: 0 }))
            }
            TokenKind::Word(w) if w != "=" => {
                self.bump();
                classify_word(w, tok.span)
            }
            _ => Err(self.unexpected(vec!["a term".into()])),
        }
    }

    /// Reads `lhs (= rhs | `f` rhs)?` without interpreting bare symbols.
    #[allow(clippy::type_complexity)]
    fn relation_items(
        &mut self,
    ) -> Result<(Vec<SurfaceTerm>, Option<RelationForm>, Vec<SurfaceTerm>), ParseError> {
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        let mut form = None;
        loop {
            if self.peek_word("=") {
                if form.is_some() {
                    return Err(syntax(self.span(), "a relation has a single `=` or infix".into(), vec![]));
                }
                self.bump();
                form = Some(RelationForm::Equation);
            } else if self.peek_kind() == Some(&TokenKind::Backtick) {
                if form.is_some() {
                    return Err(syntax(self.span(), "a relation has a single `=` or infix".into(), vec![]));
                }
                let open = self.bump().span;
                let mut f = Vec::new();
                while self.at_term() {
                    f.push(self.term()?);
                }
                self.expect(TokenKind::Backtick)?;
                if f.is_empty() {
                    return Err(syntax(open.to(self.last_span()), "empty infix segment".into(), vec![]));
                }
                form = Some(RelationForm::Backtick(f));
            } else if self.at_term() {
                let t = self.term()?;
                if form.is_none() {
                    lhs.push(t);
                } else {
                    rhs.push(t);
                }
            } else {
                break;
            }
        }
        Ok((lhs, form, rhs))
    }

    /// Completes a relation, splitting at a lone bare symbol when no `=` or
    /// backticks were written.
    fn finish_relation(
        &self,
        lhs: Vec<SurfaceTerm>,
        form: Option<RelationForm>,
        rhs: Vec<SurfaceTerm>,
    ) -> Result<Relation, ParseError> {
        if let Some(form) = form {
            return Ok(Relation { lhs, form, rhs });
        }
        let symbols: Vec<usize> = lhs
            .iter()
            .enumerate()
            .filter(|(_, t)| matches!(t, SurfaceTerm::Atom(a) if a.is_bare_symbol()))
            .map(|(i, _)| i)
            .collect();
        match symbols.as_slice() {
            [i] => {
                let mut lhs = lhs;
                let rhs = lhs.split_off(i + 1);
                let f = match lhs.pop() {
                    Some(SurfaceTerm::Atom(a)) => a,
                    _ => unreachable!(),
                };
                Ok(Relation { lhs, form: RelationForm::Bare(f), rhs })
            }
            [] => Err(syntax(self.last_span(), "expected a relation".into(), vec!["`=`".into(), "an infix".into()])),
            _ => Err(syntax(
                self.last_span(),
                "several bare symbols; mark the infix with backticks".into(),
                vec![],
            )),
        }
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let start = self.span();
        let kind = if self.peek_word("import") && matches!(self.tokens.get(self.pos + 1).map(|t| &t.kind), Some(TokenKind::Str(_))) {
            self.bump();
            let path = match &self.bump().kind {
                TokenKind::Str(s) => s.clone(),
                _ => unreachable!(),
            };
            self.expect(TokenKind::Semi)?;
            StatementKind::Import(path)
        } else if self.peek_word("data") {
            self.bump();
            let mut terms = Vec::new();
            while self.at_term() {
                terms.push(self.term()?);
            }
            if terms.is_empty() {
                return Err(self.unexpected(vec!["a term".into()]));
            }
            self.expect(TokenKind::Semi)?;
            StatementKind::Data(terms)
        } else if self.peek_word("!") {
            self.bump();
            let h = self.halting_body()?;
            self.expect(TokenKind::Semi)?;
            StatementKind::Halting(h)
        } else {
            let head = self.rule_head()?;
            self.rule_rest(head, start)?
        };
        Ok(Statement { kind, pragmas: Vec::new(), span: start.to(self.last_span()) })
    }

    fn halting_body(&mut self) -> Result<Halting, ParseError> {
        let (lhs, form, rhs) = self.relation_items()?;
        match form {
            None if lhs.is_empty() => Err(self.unexpected(vec!["a pattern".into()])),
            None => Ok(Halting::Pattern(lhs)),
            Some(form) => Ok(Halting::Relation(Relation { lhs, form, rhs })),
        }
    }

    fn rule_head(&mut self) -> Result<RuleHead, ParseError> {
        if self.peek_kind() == Some(&TokenKind::LBrace) {
            let lhs = self.bag()?;
            if !self.peek_word("=") {
                return Err(self.unexpected(vec!["`=`".into()]));
            }
            self.bump();
            let rhs = self.bag()?;
            return Ok(RuleHead::Bags { lhs, rhs });
        }
        let (lhs, form, rhs) = self.relation_items()?;
        if lhs.is_empty() && form.is_none() {
            return Err(self.unexpected(vec!["a statement".into()]));
        }
        Ok(RuleHead::Relation(self.finish_relation(lhs, form, rhs)?))
    }

    fn bag(&mut self) -> Result<Vec<SurfaceParty>, ParseError> {
        self.expect(TokenKind::LBrace)?;
        let mut parties = Vec::new();
        loop {
            if self.peek_kind() == Some(&TokenKind::RBrace) {
                break;
            }
            let context = self.term()?;
            self.expect(TokenKind::Colon)?;
            let mut body = Vec::new();
            while self.at_term() {
                body.push(self.term()?);
            }
            parties.push(SurfaceParty { context, body });
            if self.peek_kind() == Some(&TokenKind::Semi) {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(TokenKind::RBrace)?;
        Ok(parties)
    }

    /// After a head: `;` or `:` followed by off-side declarations.
    fn rule_rest(&mut self, head: RuleHead, start: Span) -> Result<StatementKind, ParseError> {
        match self.peek_kind() {
            Some(TokenKind::Semi) => {
                self.bump();
                Ok(StatementKind::Rule { head, decls: Vec::new() })
            }
            Some(TokenKind::Colon) => {
                let colon = self.bump().span;
                let decls = self.declarations(start.col, colon.line)?;
                if decls.is_empty() {
                    let span = self.span();
                    return Err(match self.peek() {
                        Some(_) => ParseError::Indentation {
                            span,
                            message: format!(
                                "declarations must be on the rule's line or indented past column {}",
                                start.col
                            ),
                        },
                        None => self.unexpected(vec!["a declaration".into()]),
                    });
                }
                Ok(StatementKind::Rule { head, decls })
            }
            _ => Err(self.unexpected(vec!["`;`".into(), "`:`".into()])),
        }
    }

    fn declarations(&mut self, head_col: u32, colon_line: u32) -> Result<Vec<Declaration>, ParseError> {
        let mut decls = Vec::new();
        while let Some(t) = self.peek() {
            if t.span.line != colon_line && t.span.col <= head_col {
                break;
            }
            decls.push(self.declaration()?);
        }
        Ok(decls)
    }

    fn cost(&mut self) -> Option<u32> {
        match self.peek_kind() {
            Some(TokenKind::Dots(n)) => {
                let n = *n;
                self.bump();
                Some(n)
            }
            _ => None,
        }
    }

    fn declaration(&mut self) -> Result<Declaration, ParseError> {
        let start = self.span();
        let kind = if self.peek_word("!") {
            self.bump();
            let h = self.halting_body()?;
            if let Some(cost) = self.cost() {
                match h {
                    Halting::Relation(relation) => DeclarationKind::SubRelation { relation, halting: true, cost },
                    Halting::Pattern(_) => {
                        return Err(syntax(start, "a halting sub-rule needs a relation".into(), vec![]))
                    }
                }
            } else {
                self.expect(TokenKind::Semi)?;
                DeclarationKind::Nested(Statement {
                    kind: StatementKind::Halting(h),
                    pragmas: Vec::new(),
                    span: start.to(self.last_span()),
                })
            }
        } else if self.peek_word("data") || self.peek_word("import") || self.peek_kind() == Some(&TokenKind::LBrace) {
            DeclarationKind::Nested(self.statement()?)
        } else if let Some(party) = self.try_party()? {
            let cost = match self.cost() {
                Some(c) => c,
                None => return Err(self.unexpected(vec!["`.`".into()])),
            };
            DeclarationKind::SubParty { party, cost }
        } else {
            let (lhs, form, rhs) = self.relation_items()?;
            if lhs.is_empty() && form.is_none() {
                return Err(self.unexpected(vec!["a declaration".into()]));
            }
            let relation = self.finish_relation(lhs, form, rhs)?;
            if let Some(cost) = self.cost() {
                DeclarationKind::SubRelation { relation, halting: false, cost }
            } else {
                let kind = self.rule_rest(RuleHead::Relation(relation), start)?;
                DeclarationKind::Nested(Statement { kind, pragmas: Vec::new(), span: start.to(self.last_span()) })
            }
        };
        Ok(Declaration { kind, span: start.to(self.last_span()) })
    }

    /// `ctx: body` where the context is a single non-operator term.
    fn try_party(&mut self) -> Result<Option<SurfaceParty>, ParseError> {
        if !self.at_term() {
            return Ok(None);
        }
        let save = self.pos;
        let context = self.term()?;
        let is_operator = matches!(&context, SurfaceTerm::Atom(a) if a.is_bare_symbol());
        if is_operator || self.peek_kind() != Some(&TokenKind::Colon) {
            self.pos = save;
            return Ok(None);
        }
        self.bump();
        let mut body = Vec::new();
        while self.at_term() {
            body.push(self.term()?);
        }
        Ok(Some(SurfaceParty { context, body }))
    }
}

fn classify_word(w: &str, span: Span) -> Result<SurfaceTerm, ParseError> {
    if w == "_" {
        return Ok(SurfaceTerm::Blank);
    }
    if w.bytes().all(|b| b.is_ascii_digit()) {
        return w
            .parse::<u64>()
            .map(SurfaceTerm::Nat)
            .map_err(|_| syntax(span, format!("numeral `{w}` is too large"), vec![]));
    }
    if w.starts_with('~') {
        let name = w.trim_start_matches('~');
        let tildes = w.len() - name.len();
        return Ok(SurfaceTerm::Atom(SurfaceAtom { kind: AtomKind::Plain, name: name.into(), tildes }));
    }
    if let Some(name) = w.strip_prefix('#') {
        if !name.is_empty() {
            return Ok(SurfaceTerm::Atom(SurfaceAtom { kind: AtomKind::Hash, name: name.into(), tildes: 0 }));
        }
    }
    if w.chars().next().is_some_and(char::is_lowercase) {
        return Ok(SurfaceTerm::Var(w.into()));
    }
    Ok(SurfaceTerm::Atom(SurfaceAtom::plain(w)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Vec<Statement> {
        parse_source(src).unwrap_or_else(|e| panic!("{e}"))
    }

    fn atom(s: &str) -> SurfaceTerm {
        SurfaceTerm::Atom(SurfaceAtom::plain(s))
    }

    fn var(s: &str) -> SurfaceTerm {
        SurfaceTerm::Var(s.into())
    }

    #[test]
    fn addition_program() {
        let stmts = parse("+ Z b () = () Z b +;\n+ (S a) b () = () (S a) (S b') +:\n    + a b () = () a b' +.\n");
        assert_eq!(stmts.len(), 2);
        match &stmts[0].kind {
            StatementKind::Rule { decls, .. } => assert!(decls.is_empty()),
            other => panic!("{other:?}"),
        }
        match &stmts[1].kind {
            StatementKind::Rule { decls, .. } => {
                assert_eq!(decls.len(), 1);
                assert!(matches!(decls[0].kind, DeclarationKind::SubRelation { cost: 1, halting: false, .. }));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn halting_with_blanks() {
        let stmts = parse("! + _ _ ();");
        assert_eq!(
            stmts[0].kind,
            StatementKind::Halting(Halting::Pattern(vec![
                atom("+"),
                SurfaceTerm::Blank,
                SurfaceTerm::Blank,
                SurfaceTerm::Comp(vec![])
            ]))
        );
    }

    #[test]
    fn tuple_data() {
        let stmts = parse("data , a b;");
        assert_eq!(stmts[0].kind, StatementKind::Data(vec![atom(","), var("a"), var("b")]));
    }

    #[test]
    fn bare_symbol_infix() {
        let stmts = parse("4 3 + 4 7;");
        match &stmts[0].kind {
            StatementKind::Rule { head: RuleHead::Relation(r), .. } => {
                assert_eq!(r.form, RelationForm::Bare(SurfaceAtom::plain("+")));
                assert_eq!(r.lhs, vec![SurfaceTerm::Nat(4), SurfaceTerm::Nat(3)]);
                assert_eq!(r.rhs.len(), 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lists_and_sugar() {
        let stmts = parse("! [x y . zs] \"hi\" 'c #\"lower\" #+ ~~Go;");
        let StatementKind::Halting(Halting::Pattern(ts)) = &stmts[0].kind else { panic!() };
        assert_eq!(ts[0], SurfaceTerm::List { items: vec![var("x"), var("y")], tail: Some(Box::new(var("zs"))) });
        assert_eq!(ts[1], SurfaceTerm::Str("hi".into()));
        assert!(matches!(&ts[2], SurfaceTerm::Atom(a) if a.kind == AtomKind::Char));
        assert!(matches!(&ts[3], SurfaceTerm::Atom(a) if a.kind == AtomKind::Escaped));
        assert!(matches!(&ts[4], SurfaceTerm::Atom(a) if a.kind == AtomKind::Hash && a.name == "+"));
        assert!(matches!(&ts[5], SurfaceTerm::Atom(a) if a.tildes == 2 && a.name == "Go"));
    }

    #[test]
    fn offside_nesting() {
        let src = "\
xs `Sort p` ns' ys:
    ns `Reverse` ns'.
    ~Go p [x . xs] ns ys = ~Go p xs [n . ns'] ys':
        x ys `Insert p` n ys'.
        m `~Go n` m':
            `< m n` b.
        m `~ True` m;
    ! ~Go p xs [] [] = ~Go p [] ns ys.
Next = Thing;
";
        let stmts = parse(src);
        assert_eq!(stmts.len(), 2);
        let StatementKind::Rule { decls, .. } = &stmts[0].kind else { panic!() };
        assert_eq!(decls.len(), 3);
        let DeclarationKind::Nested(inner) = &decls[1].kind else { panic!() };
        let StatementKind::Rule { decls: inner_decls, .. } = &inner.kind else { panic!() };
        assert_eq!(inner_decls.len(), 3);
        assert!(matches!(decls[2].kind, DeclarationKind::SubRelation { halting: true, .. }));
    }

    #[test]
    fn detached_declaration_changes_parse() {
        let attached = parse_source("A x = B y:\n  x `F` y.\n");
        assert!(attached.is_ok());
        let detached = parse_source("A x = B y:\nx `F` y.\n");
        assert!(matches!(detached, Err(ParseError::Indentation { .. })));
    }

    #[test]
    fn same_line_declarations() {
        let stmts = parse("`≤ m n` b': `< m n` b. b `Not` b'.\nX = Y;");
        assert_eq!(stmts.len(), 2);
        let StatementKind::Rule { decls, .. } = &stmts[0].kind else { panic!() };
        assert_eq!(decls.len(), 2);
    }

    #[test]
    fn parties_and_costs() {
        let stmts = parse("A x = B y:\n  β: + a b ().\n  β: () a b' +..\n");
        let StatementKind::Rule { decls, .. } = &stmts[0].kind else { panic!() };
        assert!(matches!(decls[0].kind, DeclarationKind::SubParty { cost: 1, .. }));
        assert!(matches!(decls[1].kind, DeclarationKind::SubParty { cost: 2, .. }));
    }

    #[test]
    fn brace_heads() {
        let stmts = parse("{a: Alice x; b: Bob} = {a: Alice; b: Bob x};");
        let StatementKind::Rule { head: RuleHead::Bags { lhs, rhs }, .. } = &stmts[0].kind else { panic!() };
        assert_eq!((lhs.len(), rhs.len()), (2, 2));
    }

    #[test]
    fn pragma_attaches() {
        let stmts = parse("-- @ambiguous\n`Coin` Heads;\n`Coin` Tails; -- @ambiguous\nX = Y;");
        assert_eq!(stmts[0].pragmas, vec!["ambiguous"]);
        assert_eq!(stmts[1].pragmas, vec!["ambiguous"]);
        assert!(stmts[2].pragmas.is_empty());
    }

    #[test]
    fn syntax_error_reports_expectation() {
        let err = parse_source("A = B").unwrap_err();
        assert!(err.is_incomplete());
        let err = parse_source("A = B )").unwrap_err();
        let ParseError::Syntax { expected, .. } = err else { panic!() };
        assert!(!expected.is_empty());
    }

    #[test]
    fn repl_lines() {
        assert_eq!(parse_repl_line(":q").unwrap(), ReplCommand::Quit);
        assert_eq!(
            parse_repl_line("| (+ 3) 4 _").unwrap(),
            ReplCommand::Evaluate(vec![
                SurfaceTerm::Comp(vec![atom("+"), SurfaceTerm::Nat(3)]),
                SurfaceTerm::Nat(4),
                SurfaceTerm::Blank
            ])
        );
        assert_eq!(parse_repl_line("| 4 –").unwrap(), ReplCommand::Evaluate(vec![SurfaceTerm::Nat(4), SurfaceTerm::Blank]));
        match parse_repl_line("> 4 `+ 3` y").unwrap() {
            ReplCommand::Query { direction, relation } => {
                assert_eq!(direction, Direction::Forward);
                assert_eq!(relation.lhs, vec![SurfaceTerm::Nat(4)]);
                assert_eq!(relation.form, RelationForm::Backtick(vec![atom("+"), SurfaceTerm::Nat(3)]));
                assert_eq!(relation.rhs, vec![var("y")]);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_repl_line(":x").is_err());
        assert!(matches!(parse_repl_line("A = B;").unwrap(), ReplCommand::Statements(_)));
        assert!(parse_repl_line("> 4 `+ 3` y )").is_err());
    }
}
