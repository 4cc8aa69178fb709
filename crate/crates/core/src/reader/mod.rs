//! Lexing and parsing of alethe source text and REPL lines.

pub mod lexer;
pub mod parser;
pub mod print;
pub mod syntax;

pub use lexer::{tokenize, LexError, Pragma, Span, Token, TokenKind};
pub use parser::{parse_program, parse_repl_line, parse_source, ParseError, ReplCommand};
pub use print::{render_program, render_relation, render_term, render_terms};
pub use syntax::*;
