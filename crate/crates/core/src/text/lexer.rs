use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{ParseCode, ParseDiagnostic, SourceSpan};
use crate::diag::Severity;
use crate::ident::is_ident_char;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Word(String),
    Number(String),
    Str(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Eq,
    Arrow,
    DotDot,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Str(_) => String::from("string literal"),
            Tok::LBrace => String::from("`{`"),
            Tok::RBrace => String::from("`}`"),
            Tok::LBracket => String::from("`[`"),
            Tok::RBracket => String::from("`]`"),
            Tok::Comma => String::from("`,`"),
            Tok::Semi => String::from("`;`"),
            Tok::Eq => String::from("`=`"),
            Tok::Arrow => String::from("`->`"),
            Tok::DotDot => String::from("`..`"),
            Tok::Eof => String::from("end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub start: Pos,
    /// Position of the last character (inclusive).
    pub end: Pos,
}

impl Token {
    pub(crate) fn span(&self, file: &str) -> SourceSpan {
        SourceSpan {
            file: String::from(file),
            line_start: self.start.line,
            col_start: self.start.col,
            line_end: self.end.line,
            col_end: self.end.col,
        }
    }
}

struct Cursor<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    line: u32,
    col: u32,
    /// Position of the most recently consumed char.
    last: Pos,
}

impl<'a> Cursor<'a> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        self.last = self.pos();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

/// Splits source into tokens. Lexical problems are reported and skipped so
/// the parser still sees the rest of the input.
pub(crate) fn lex(file: &str, text: &str) -> (Vec<Token>, Vec<ParseDiagnostic>) {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
        last: Pos { line: 1, col: 1 },
    };
    let mut toks = Vec::new();
    let mut diags = Vec::new();
    let err = |diags: &mut Vec<ParseDiagnostic>, start: Pos, end: Pos, msg: String| {
        diags.push(ParseDiagnostic {
            severity: Severity::Error,
            code: ParseCode::LexicalError,
            message: msg,
            span: SourceSpan {
                file: String::from(file),
                line_start: start.line,
                col_start: start.col,
                line_end: end.line,
                col_end: end.col,
            },
        });
    };

    while let Some(c) = cur.peek() {
        let start = cur.pos();
        let simple = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = simple {
            cur.bump();
            toks.push(Token {
                tok,
                start,
                end: start,
            });
            continue;
        }
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c == '-' && cur.peek2() == Some('>') {
            cur.bump();
            cur.bump();
            toks.push(Token {
                tok: Tok::Arrow,
                start,
                end: cur.last,
            });
            continue;
        }
        if c == '.' {
            cur.bump();
            if cur.peek() == Some('.') {
                cur.bump();
                toks.push(Token {
                    tok: Tok::DotDot,
                    start,
                    end: cur.last,
                });
            } else {
                err(&mut diags, start, start, String::from("stray `.`"));
            }
            continue;
        }
        if c == '"' {
            cur.bump();
            let mut s = String::new();
            let mut closed = false;
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
                match c {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' => match cur.bump() {
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some('n') => s.push('\n'),
                        Some('t') => s.push('\t'),
                        Some(other) => {
                            err(
                                &mut diags,
                                cur.last,
                                cur.last,
                                format!("unknown escape `\\{other}`"),
                            );
                            s.push(other);
                        }
                        None => break,
                    },
                    c => s.push(c),
                }
            }
            if closed {
                toks.push(Token {
                    tok: Tok::Str(s),
                    start,
                    end: cur.last,
                });
            } else {
                err(
                    &mut diags,
                    start,
                    cur.last,
                    String::from("unterminated string literal"),
                );
            }
            continue;
        }
        if is_ident_char(c) {
            let mut w = String::new();
            while let Some(c) = cur.peek() {
                if !is_ident_char(c) || (c == '-' && cur.peek2() == Some('>')) {
                    break;
                }
                w.push(c);
                cur.bump();
            }
            let numeric = w.chars().all(|c| c.is_ascii_digit());
            if numeric && cur.peek() == Some('.') && cur.peek2().is_some_and(|d| d.is_ascii_digit())
            {
                w.push('.');
                cur.bump();
                while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                    w.push(d);
                    cur.bump();
                }
                toks.push(Token {
                    tok: Tok::Number(w),
                    start,
                    end: cur.last,
                });
            } else if numeric {
                toks.push(Token {
                    tok: Tok::Number(w),
                    start,
                    end: cur.last,
                });
            } else {
                toks.push(Token {
                    tok: Tok::Word(w),
                    start,
                    end: cur.last,
                });
            }
            continue;
        }
        cur.bump();
        err(
            &mut diags,
            start,
            start,
            format!("unexpected character `{c}`"),
        );
    }
    let eof = cur.pos();
    toks.push(Token {
        tok: Tok::Eof,
        start: eof,
        end: eof,
    });
    (toks, diags)
}
