use std::fmt;

use thiserror::Error;

/// Byte range plus the 1-based line/column of its start.
///
/// Spans never take part in equality: two syntax trees that differ only in
/// where they were written are the same tree.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span { end: other.end.max(self.end), ..self }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Colon,
    Semi,
    /// A run of full stops; the count is significant.
    Dots(u32),
    Backtick,
    Str(String),
    HashStr(String),
    Char(char),
    Word(String),
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::LParen => write!(f, "`(`"),
            TokenKind::RParen => write!(f, "`)`"),
            TokenKind::LBracket => write!(f, "`[`"),
            TokenKind::RBracket => write!(f, "`]`"),
            TokenKind::LBrace => write!(f, "`{{`"),
            TokenKind::RBrace => write!(f, "`}}`"),
            TokenKind::Colon => write!(f, "`:`"),
            TokenKind::Semi => write!(f, "`;`"),
            TokenKind::Dots(n) => write!(f, "`{}`", ".".repeat(*n as usize)),
            TokenKind::Backtick => write!(f, "backtick"),
            TokenKind::Str(s) => write!(f, "string {s:?}"),
            TokenKind::HashStr(s) => write!(f, "atom #{s:?}"),
            TokenKind::Char(c) => write!(f, "character '{c}"),
            TokenKind::Word(w) => write!(f, "`{w}`"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

/// A `-- @name` comment directive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pragma {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{span}: {message}")]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

pub fn is_reserved(c: char) -> bool {
    matches!(c, '(' | ')' | '[' | ']' | '{' | '}' | ':' | ';' | '.' | '`' | '"') || c.is_whitespace()
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
    tokens: Vec<Token>,
    pragmas: Vec<Pragma>,
}

/// Splits source text into tokens. Comments are dropped; `-- @name`
/// directives are returned separately.
pub fn tokenize(src: &str) -> Result<(Vec<Token>, Vec<Pragma>), LexError> {
    let mut lx = Lexer { src, pos: 0, line: 1, col: 1, tokens: Vec::new(), pragmas: Vec::new() };
    lx.run()?;
    Ok((lx.tokens, lx.pragmas))
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> Span {
        Span { start: self.pos, end: self.pos, line: self.line, col: self.col }
    }

    fn finish(&self, start: Span) -> Span {
        Span { end: self.pos.max(start.start + 1), ..start }
    }

    fn err<T>(&self, start: Span, message: impl Into<String>) -> Result<T, LexError> {
        Err(LexError { span: self.finish(start), message: message.into() })
    }

    fn push(&mut self, kind: TokenKind, start: Span) {
        let span = self.finish(start);
        self.tokens.push(Token { kind, span });
    }

    fn run(&mut self) -> Result<(), LexError> {
        while let Some(c) = self.peek() {
            let start = self.here();
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            if c == '-' && self.peek2() == Some('-') {
                self.line_comment(start);
                continue;
            }
            if c == '{' && self.peek2() == Some('-') {
                self.block_comment(start)?;
                continue;
            }
            let single = match c {
                '(' => Some(TokenKind::LParen),
                ')' => Some(TokenKind::RParen),
                '[' => Some(TokenKind::LBracket),
                ']' => Some(TokenKind::RBracket),
                '{' => Some(TokenKind::LBrace),
                '}' => Some(TokenKind::RBrace),
                ':' => Some(TokenKind::Colon),
                ';' => Some(TokenKind::Semi),
                '`' => Some(TokenKind::Backtick),
                _ => None,
            };
            if let Some(kind) = single {
                self.bump();
                self.push(kind, start);
                continue;
            }
            match c {
                '.' => {
                    let mut n = 0;
                    while self.peek() == Some('.') {
                        self.bump();
                        n += 1;
                    }
                    self.push(TokenKind::Dots(n), start);
                }
                '"' => {
                    self.bump();
                    let s = self.string_body(start)?;
                    self.push(TokenKind::Str(s), start);
                }
                '#' if self.peek2() == Some('"') => {
                    self.bump();
                    self.bump();
                    let s = self.string_body(start)?;
                    self.push(TokenKind::HashStr(s), start);
                }
                '\'' => {
                    self.bump();
                    let ch = match self.peek() {
                        None | Some('\n') => return self.err(start, "empty character atom"),
                        Some('\\') => {
                            self.bump();
                            self.escape(start)?
                        }
                        Some(_) => self.bump().unwrap(),
                    };
                    if let Some(next) = self.peek() {
                        if !is_reserved(next) {
                            return self.err(start, "character atom must be a single character");
                        }
                    }
                    self.push(TokenKind::Char(ch), start);
                }
                _ => {
                    let from = self.pos;
                    while let Some(c) = self.peek() {
                        if is_reserved(c) {
                            break;
                        }
                        self.bump();
                    }
                    let word = self.src[from..self.pos].to_string();
                    self.push(TokenKind::Word(word), start);
                }
            }
        }
        Ok(())
    }

    fn line_comment(&mut self, start: Span) {
        let from = self.pos;
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.bump();
        }
        let text = self.src[from..self.pos].trim_start_matches('-').trim();
        if let Some(rest) = text.strip_prefix('@') {
            let name = rest.split_whitespace().next().unwrap_or("").to_string();
            self.pragmas.push(Pragma { name, span: self.finish(start) });
        }
    }

    fn block_comment(&mut self, start: Span) -> Result<(), LexError> {
        let mut depth = 0usize;
        loop {
            match (self.peek(), self.peek2()) {
                (Some('{'), Some('-')) => {
                    self.bump();
                    self.bump();
                    depth += 1;
                }
                (Some('-'), Some('}')) => {
                    self.bump();
                    self.bump();
                    depth -= 1;
                    if depth == 0 {
                        return Ok(());
                    }
                }
                (Some(_), _) => {
                    self.bump();
                }
                (None, _) => return self.err(start, "unterminated block comment"),
            }
        }
    }

    fn string_body(&mut self, start: Span) -> Result<String, LexError> {
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return self.err(start, "unterminated string"),
                Some('"') => return Ok(out),
                Some('\\') => out.push(self.escape(start)?),
                Some(c) => out.push(c),
            }
        }
    }

    /// Escape after the backslash: `\n \t \\ \" \'` or decimal `\NNN`.
    fn escape(&mut self, start: Span) -> Result<char, LexError> {
        match self.bump() {
            Some('n') => Ok('\n'),
            Some('t') => Ok('\t'),
            Some('\\') => Ok('\\'),
            Some('"') => Ok('"'),
            Some('\'') => Ok('\''),
            Some(d) if d.is_ascii_digit() => {
                let mut code = d.to_digit(10).unwrap();
                while let Some(d) = self.peek().and_then(|c| c.to_digit(10)) {
                    self.bump();
                    code = code.saturating_mul(10).saturating_add(d);
                }
                match char::from_u32(code) {
                    Some(c) => Ok(c),
                    None => self.err(start, format!("invalid character code {code}")),
                }
            }
            Some(c) => self.err(start, format!("unsupported escape `\\{c}`")),
            None => self.err(start, "unterminated escape"),
        }
    }
}
