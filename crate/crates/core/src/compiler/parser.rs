//! Recursive-descent parser for the pulse language.
//!
//! ```text
//! program    := def* seq
//! def        := ("pulse" | "ramp") NAME "{" kv* "}"
//! kv         := KEY "=" value ","?
//! seq        := "seq" NAME "{" item* "}"
//! item       := invocation | "wait" DURATION ";"? | "merge" "{" invocation* "}"
//! invocation := NAME ("(" kv* ")")? ";"
//! ```

use super::lexer::{tokenize, Tok, Token};
use super::Diagnostic;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum RawValue {
    Number { value: f64, unit: Option<String> },
    Ident(String),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RawKv {
    pub key: String,
    pub value: RawValue,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RawDefKind {
    Pulse,
    Ramp,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RawDef {
    pub kind: RawDefKind,
    pub name: String,
    pub params: Vec<RawKv>,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RawInvocation {
    pub name: String,
    pub overrides: Vec<RawKv>,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum RawItem {
    Invoke(RawInvocation),
    Wait { value: RawValue, line: usize, col: usize },
    Merge { items: Vec<RawInvocation>, line: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RawProgram {
    pub defs: Vec<RawDef>,
    pub seq_name: String,
    pub items: Vec<RawItem>,
}

const KEYWORDS: [&str; 5] = ["pulse", "ramp", "seq", "wait", "merge"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> Diagnostic {
        let t = self.peek();
        Diagnostic {
            line: t.line,
            col: t.col,
            message: format!("unexpected {}", t.tok.describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Token> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.error(&[what]))
        }
    }

    fn name(&mut self) -> PResult<Token> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => Ok(self.bump()),
            _ => Err(self.error(&["name"])),
        }
    }

    fn value(&mut self) -> PResult<RawValue> {
        match self.peek().tok.clone() {
            Tok::Number { value, unit } => {
                self.bump();
                Ok(RawValue::Number { value, unit })
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(RawValue::Ident(s))
            }
            _ => Err(self.error(&["number", "identifier"])),
        }
    }

    fn kvs(&mut self, close: Tok, close_desc: &str) -> PResult<Vec<RawKv>> {
        let mut out = Vec::new();
        loop {
            if self.peek().tok == close {
                self.bump();
                return Ok(out);
            }
            let key_tok = match &self.peek().tok {
                Tok::Ident(_) => self.bump(),
                _ => return Err(self.error(&["key", close_desc])),
            };
            let Tok::Ident(key) = key_tok.tok else { unreachable!() };
            self.expect(Tok::Eq, "`=`")?;
            let value = self.value()?;
            out.push(RawKv { key, value, line: key_tok.line, col: key_tok.col });
            if self.peek().tok == Tok::Comma {
                self.bump();
            }
        }
    }

    fn def(&mut self) -> PResult<RawDef> {
        let kw = self.bump();
        let kind = match &kw.tok {
            Tok::Ident(s) if s == "pulse" => RawDefKind::Pulse,
            _ => RawDefKind::Ramp,
        };
        let name_tok = self.name()?;
        let Tok::Ident(name) = name_tok.tok else { unreachable!() };
        self.expect(Tok::LBrace, "`{`")?;
        let params = self.kvs(Tok::RBrace, "`}`")?;
        Ok(RawDef { kind, name, params, line: kw.line, col: kw.col })
    }

    fn invocation(&mut self) -> PResult<RawInvocation> {
        let name_tok = self.name()?;
        let Tok::Ident(name) = name_tok.tok else { unreachable!() };
        let overrides = if self.peek().tok == Tok::LParen {
            self.bump();
            self.kvs(Tok::RParen, "`)`")?
        } else {
            Vec::new()
        };
        self.expect(Tok::Semi, "`;`")?;
        Ok(RawInvocation { name, overrides, line: name_tok.line, col: name_tok.col })
    }

    fn program(&mut self) -> PResult<RawProgram> {
        let mut defs = Vec::new();
        while self.is_keyword("pulse") || self.is_keyword("ramp") {
            defs.push(self.def()?);
        }
        if !self.is_keyword("seq") {
            return Err(self.error(&["`pulse`", "`ramp`", "`seq`"]));
        }
        self.bump();
        let name_tok = self.name()?;
        let Tok::Ident(seq_name) = name_tok.tok else { unreachable!() };
        self.expect(Tok::LBrace, "`{`")?;

        let mut items = Vec::new();
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Ident(s) if s == "wait" => {
                    self.bump();
                    let value = match &self.peek().tok {
                        Tok::Number { .. } => self.value()?,
                        _ => return Err(self.error(&["duration"])),
                    };
                    if self.peek().tok == Tok::Semi {
                        self.bump();
                    }
                    items.push(RawItem::Wait { value, line: t.line, col: t.col });
                }
                Tok::Ident(s) if s == "merge" => {
                    self.bump();
                    self.expect(Tok::LBrace, "`{`")?;
                    let mut inner = Vec::new();
                    while self.peek().tok != Tok::RBrace {
                        inner.push(self.invocation()?);
                    }
                    self.bump();
                    items.push(RawItem::Merge { items: inner, line: t.line, col: t.col });
                }
                Tok::Ident(_) => items.push(RawItem::Invoke(self.invocation()?)),
                _ => return Err(self.error(&["pulse name", "`wait`", "`merge`", "`}`"])),
            }
        }
        if self.peek().tok != Tok::Eof {
            return Err(self.error(&["end of input"]));
        }
        Ok(RawProgram { defs, seq_name, items })
    }
}

pub(crate) fn parse_raw(src: &str) -> PResult<RawProgram> {
    let toks = tokenize(src)?;
    Parser { toks, pos: 0 }.program()
}
