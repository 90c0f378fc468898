//! Concrete syntax reader for `.pcbpv` signatures, terms, and type expressions.
//!
//! The grammar is LL(1). Types are first parsed into a neutral surface form
//! and then polarized; the iso and CBN/CBV front ends reuse the surface form
//! with their own conversions.

use crate::syntax::*;
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    fn new(span: Span, message: impl Into<String>) -> ParseError {
        ParseError {
            span,
            message: message.into(),
            expected: Vec::new(),
        }
    }

    fn expecting(span: Span, message: impl Into<String>, expected: Vec<&str>) -> ParseError {
        ParseError {
            span,
            message: message.into(),
            expected: expected.into_iter().map(String::from).collect(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Tokens
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    // keywords
    Type,
    Def,
    Up,
    Down,
    Return,
    Let,
    In,
    Match,
    Split,
    As,
    Force,
    Thunk,
    Fold,
    Unfold,
    Mu,
    Nu,
    // literals / names
    One,
    Ident(String),
    /// `%`-prefixed internal name
    Internal(String),
    /// `'label`
    Tick(String),
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Equal,
    Dot,
    Bar,
    Star,
    Plus,
    Amp,
    Backslash,
    Arrow,
    FatArrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{}`", s),
            Tok::Internal(s) => format!("internal name `{}`", s),
            Tok::Tick(s) => format!("label `'{}`", s),
            Tok::One => "`1`".into(),
            Tok::Eof => "end of input".into(),
            Tok::Type => "`type`".into(),
            Tok::Def => "`def`".into(),
            Tok::Up => "`up`".into(),
            Tok::Down => "`down`".into(),
            Tok::Return => "`return`".into(),
            Tok::Let => "`let`".into(),
            Tok::In => "`in`".into(),
            Tok::Match => "`match`".into(),
            Tok::Split => "`split`".into(),
            Tok::As => "`as`".into(),
            Tok::Force => "`force`".into(),
            Tok::Thunk => "`thunk`".into(),
            Tok::Fold => "`fold`".into(),
            Tok::Unfold => "`unfold`".into(),
            Tok::Mu => "`mu`".into(),
            Tok::Nu => "`nu`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Equal => "`=`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Star => "`*`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Backslash => "`\\`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::FatArrow => "`=>`".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: Span,
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "type" => Tok::Type,
        "def" => Tok::Def,
        "up" => Tok::Up,
        "down" => Tok::Down,
        "return" => Tok::Return,
        "let" => Tok::Let,
        "in" => Tok::In,
        "match" => Tok::Match,
        "split" => Tok::Split,
        "as" => Tok::As,
        "force" => Tok::Force,
        "thunk" => Tok::Thunk,
        "fold" => Tok::Fold,
        "unfold" => Tok::Unfold,
        "mu" => Tok::Mu,
        "nu" => Tok::Nu,
        _ => return None,
    })
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn is_internal_char(c: char) -> bool {
    is_ident_char(c) || c == '.' || c == '%'
}

struct Lexer<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            chars: src.char_indices().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<(usize, char)> {
        let next = self.chars.next();
        if let Some((_, c)) = next {
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        next
    }

    fn peek_char(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn here(&self) -> (u32, u32) {
        (self.line, self.col)
    }

    fn tokenize(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            // skip whitespace and comments
            loop {
                match self.peek_char() {
                    Some(c) if c.is_whitespace() => {
                        self.bump();
                    }
                    Some('%') => {
                        // `%` immediately followed by an identifier character is
                        // an internal name; otherwise a comment to end of line
                        let mut look = self.chars.clone();
                        look.next();
                        let next = look.peek().map(|&(_, c)| c);
                        if next.map(is_ident_start).unwrap_or(false) {
                            break;
                        }
                        while let Some(c) = self.peek_char() {
                            if c == '\n' {
                                break;
                            }
                            self.bump();
                        }
                    }
                    _ => break,
                }
            }
            let (line, col) = self.here();
            let span_at = |l: u32, c0: u32, c1: u32| Span {
                start_line: l,
                start_col: c0,
                end_line: l,
                end_col: c1,
            };
            let Some((start, c)) = self.bump() else {
                out.push(Token {
                    tok: Tok::Eof,
                    span: span_at(line, col, col),
                });
                return Ok(out);
            };
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                '.' => Tok::Dot,
                '|' => Tok::Bar,
                '*' => Tok::Star,
                '+' => Tok::Plus,
                '&' => Tok::Amp,
                '\\' => Tok::Backslash,
                '1' => Tok::One,
                '-' => {
                    if self.peek_char() == Some('>') {
                        self.bump();
                        Tok::Arrow
                    } else {
                        return Err(ParseError::new(
                            span_at(line, col, self.col),
                            "stray `-`; did you mean `->`?",
                        ));
                    }
                }
                '=' => {
                    if self.peek_char() == Some('>') {
                        self.bump();
                        Tok::FatArrow
                    } else {
                        Tok::Equal
                    }
                }
                '\'' => {
                    let mut end = start + 1;
                    while let Some(c2) = self.peek_char() {
                        if is_ident_char(c2) {
                            end += c2.len_utf8();
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let name = &self.src[start + 1..end];
                    if name.is_empty() {
                        return Err(ParseError::new(
                            span_at(line, col, self.col),
                            "expected a label after `'`",
                        ));
                    }
                    Tok::Tick(name.to_string())
                }
                '%' => {
                    let mut end = start + 1;
                    while let Some(c2) = self.peek_char() {
                        if is_internal_char(c2) {
                            end += c2.len_utf8();
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Internal(self.src[start..end].to_string())
                }
                c if is_ident_start(c) => {
                    let mut end = start + c.len_utf8();
                    while let Some(c2) = self.peek_char() {
                        if is_ident_char(c2) {
                            end += c2.len_utf8();
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let word = &self.src[start..end];
                    keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string()))
                }
                other => {
                    return Err(ParseError::new(
                        span_at(line, col, self.col),
                        format!("unexpected character `{}`", other),
                    ));
                }
            };
            let (eline, ecol) = self.here();
            out.push(Token {
                tok,
                span: Span {
                    start_line: line,
                    start_col: col,
                    end_line: eline,
                    end_col: ecol.saturating_sub(1).max(col),
                },
            });
        }
    }
}

// ---------------------------------------------------------------------------
// Surface types
// ---------------------------------------------------------------------------

/// Unpolarized surface type, shared by every front end.
#[derive(Clone, Debug, PartialEq)]
pub struct SType {
    pub kind: STypeKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum STypeKind {
    Arrow(Box<SType>, Box<SType>),
    Tensor(Box<SType>, Box<SType>),
    Unit,
    Variant(Vec<(Label, SType)>),
    Lazy(Vec<(Label, SType)>),
    Down(Box<SType>),
    Up(Box<SType>),
    Name(String),
    Mu(String, Box<SType>),
    Nu(String, Box<SType>),
}

/// Surface form of one `.pcbpv` file.
#[derive(Clone, Debug, Default)]
pub struct SurfaceSig {
    pub defs: Vec<SurfaceDef>,
}

#[derive(Clone, Debug)]
pub enum SurfaceDef {
    Type {
        name: String,
        body: SType,
        span: Span,
    },
    Expr {
        name: String,
        dtype: SType,
        body: Computation,
        span: Span,
    },
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, want: Tok, what: &str) -> Result<Span, ParseError> {
        if *self.peek() == want {
            Ok(self.next().span)
        } else {
            Err(ParseError::expecting(
                self.peek_span(),
                format!("found {} while parsing {}", self.peek().describe(), what),
                vec![Box::leak(want.describe().into_boxed_str())],
            ))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.next().span;
                Ok((s, sp))
            }
            Tok::Internal(s) => {
                let sp = self.next().span;
                Ok((s, sp))
            }
            other => Err(ParseError::expecting(
                self.peek_span(),
                format!("found {} while parsing {}", other.describe(), what),
                vec!["identifier"],
            )),
        }
    }

    /// A plain identifier (no internal names): variables and labels.
    fn plain_ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.next().span;
                Ok((s, sp))
            }
            other => Err(ParseError::expecting(
                self.peek_span(),
                format!("found {} while parsing {}", other.describe(), what),
                vec!["identifier"],
            )),
        }
    }

    // -- types --------------------------------------------------------------

    fn stype(&mut self) -> Result<SType, ParseError> {
        let lhs = self.stype_tensor()?;
        if *self.peek() == Tok::Arrow {
            self.next();
            let rhs = self.stype()?;
            let span = lhs.span.join(rhs.span);
            Ok(SType {
                kind: STypeKind::Arrow(Box::new(lhs), Box::new(rhs)),
                span,
            })
        } else {
            Ok(lhs)
        }
    }

    fn stype_tensor(&mut self) -> Result<SType, ParseError> {
        let mut lhs = self.stype_prefix()?;
        while *self.peek() == Tok::Star {
            self.next();
            let rhs = self.stype_prefix()?;
            let span = lhs.span.join(rhs.span);
            lhs = SType {
                kind: STypeKind::Tensor(Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn stype_prefix(&mut self) -> Result<SType, ParseError> {
        match self.peek() {
            Tok::Up => {
                let sp = self.next().span;
                let body = self.stype_prefix()?;
                let span = sp.join(body.span);
                Ok(SType {
                    kind: STypeKind::Up(Box::new(body)),
                    span,
                })
            }
            Tok::Down => {
                let sp = self.next().span;
                let body = self.stype_prefix()?;
                let span = sp.join(body.span);
                Ok(SType {
                    kind: STypeKind::Down(Box::new(body)),
                    span,
                })
            }
            Tok::Mu => {
                let sp = self.next().span;
                let (var, _) = self.plain_ident("a recursive type binder")?;
                self.eat(Tok::Dot, "a recursive type")?;
                let body = self.stype()?;
                let span = sp.join(body.span);
                Ok(SType {
                    kind: STypeKind::Mu(var, Box::new(body)),
                    span,
                })
            }
            Tok::Nu => {
                let sp = self.next().span;
                let (var, _) = self.plain_ident("a corecursive type binder")?;
                self.eat(Tok::Dot, "a corecursive type")?;
                let body = self.stype()?;
                let span = sp.join(body.span);
                Ok(SType {
                    kind: STypeKind::Nu(var, Box::new(body)),
                    span,
                })
            }
            _ => self.stype_atom(),
        }
    }

    fn stype_atom(&mut self) -> Result<SType, ParseError> {
        let span = self.peek_span();
        match self.peek().clone() {
            Tok::One => {
                self.next();
                Ok(SType {
                    kind: STypeKind::Unit,
                    span,
                })
            }
            Tok::Ident(s) => {
                self.next();
                Ok(SType {
                    kind: STypeKind::Name(s),
                    span,
                })
            }
            Tok::Internal(s) => {
                self.next();
                Ok(SType {
                    kind: STypeKind::Name(s),
                    span,
                })
            }
            Tok::Plus => {
                self.next();
                let (fields, end) = self.type_fields("a variant record type")?;
                Ok(SType {
                    kind: STypeKind::Variant(fields),
                    span: span.join(end),
                })
            }
            Tok::Amp => {
                self.next();
                let (fields, end) = self.type_fields("a lazy record type")?;
                Ok(SType {
                    kind: STypeKind::Lazy(fields),
                    span: span.join(end),
                })
            }
            Tok::LParen => {
                self.next();
                let inner = self.stype()?;
                let end = self.eat(Tok::RParen, "a parenthesized type")?;
                Ok(SType {
                    kind: inner.kind,
                    span: span.join(end),
                })
            }
            other => Err(ParseError::expecting(
                self.peek_span(),
                format!("found {} while parsing a type", other.describe()),
                vec!["`1`", "type name", "`+{`", "`&{`", "`up`", "`down`", "`(`"],
            )),
        }
    }

    fn type_fields(&mut self, what: &str) -> Result<(Vec<(Label, SType)>, Span), ParseError> {
        self.eat(Tok::LBrace, what)?;
        let mut fields = Vec::new();
        if *self.peek() == Tok::RBrace {
            let end = self.next().span;
            return Ok((fields, end));
        }
        loop {
            let (label, _) = self.plain_ident("a field label")?;
            self.eat(Tok::Colon, what)?;
            let ty = self.stype()?;
            fields.push((label, ty));
            match self.peek() {
                Tok::Comma => {
                    self.next();
                }
                Tok::RBrace => {
                    let end = self.next().span;
                    return Ok((fields, end));
                }
                other => {
                    return Err(ParseError::expecting(
                        self.peek_span(),
                        format!("found {} while parsing {}", other.describe(), what),
                        vec!["`,`", "`}`"],
                    ))
                }
            }
        }
    }

    // -- values ---------------------------------------------------------------

    fn value(&mut self) -> Result<Value, ParseError> {
        let span = self.peek_span();
        match self.peek().clone() {
            Tok::Tick(label) => {
                self.next();
                let inner = self.value()?;
                let span = span.join(inner.span);
                Ok(Value::with_span(
                    ValueKind::Inj(label, Box::new(inner)),
                    span,
                ))
            }
            Tok::Thunk => {
                self.next();
                let e = self.computation()?;
                let span = span.join(e.span);
                Ok(Value::with_span(ValueKind::Thunk(Box::new(e)), span))
            }
            Tok::Fold => {
                self.next();
                let inner = self.value()?;
                let span = span.join(inner.span);
                Ok(Value::with_span(ValueKind::FoldMu(Box::new(inner)), span))
            }
            Tok::Ident(x) => {
                self.next();
                Ok(Value::with_span(ValueKind::Var(x), span))
            }
            Tok::LParen => {
                self.next();
                if *self.peek() == Tok::RParen {
                    let end = self.next().span;
                    return Ok(Value::with_span(ValueKind::Unit, span.join(end)));
                }
                let first = self.value()?;
                match self.peek() {
                    Tok::Comma => {
                        self.next();
                        let second = self.value()?;
                        let end = self.eat(Tok::RParen, "a pair")?;
                        Ok(Value::with_span(
                            ValueKind::Pair(Box::new(first), Box::new(second)),
                            span.join(end),
                        ))
                    }
                    Tok::Colon => {
                        self.next();
                        let sty = self.stype()?;
                        let ty = stype_to_pos(&sty)?;
                        let end = self.eat(Tok::RParen, "a value annotation")?;
                        Ok(Value::with_span(
                            ValueKind::Anno(Box::new(first), ty),
                            span.join(end),
                        ))
                    }
                    Tok::RParen => {
                        let end = self.next().span;
                        Ok(Value::with_span(first.kind, span.join(end)))
                    }
                    other => Err(ParseError::expecting(
                        self.peek_span(),
                        format!("found {} while parsing a value", other.describe()),
                        vec!["`,`", "`:`", "`)`"],
                    )),
                }
            }
            other => Err(ParseError::expecting(
                self.peek_span(),
                format!("found {} while parsing a value", other.describe()),
                vec!["variable", "`()`", "`(`", "label", "`thunk`"],
            )),
        }
    }

    fn at_value_start(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Tick(_) | Tok::Thunk | Tok::Fold | Tok::Ident(_) | Tok::LParen
        )
    }

    // -- computations -----------------------------------------------------------

    fn computation(&mut self) -> Result<Computation, ParseError> {
        let span = self.peek_span();
        match self.peek().clone() {
            Tok::Backslash => {
                self.next();
                let (x, _) = self.plain_ident("a lambda binder")?;
                self.eat(Tok::Dot, "a lambda")?;
                let body = self.computation()?;
                let span = span.join(body.span);
                Ok(Computation::with_span(
                    CompKind::Lam(x, Box::new(body)),
                    span,
                ))
            }
            Tok::Let => {
                self.next();
                let (x, _) = self.plain_ident("a let binder")?;
                self.eat(Tok::Equal, "a let binding")?;
                let e1 = self.computation()?;
                self.eat(Tok::In, "a let binding")?;
                let e2 = self.computation()?;
                let span = span.join(e2.span);
                Ok(Computation::with_span(
                    CompKind::LetUp(x, Box::new(e1), Box::new(e2)),
                    span,
                ))
            }
            Tok::Split => {
                self.next();
                let v = self.value()?;
                self.eat(Tok::As, "a split")?;
                self.eat(Tok::LParen, "a split pattern")?;
                if *self.peek() == Tok::RParen {
                    self.next();
                    self.eat(Tok::In, "a split")?;
                    let body = self.computation()?;
                    let span = span.join(body.span);
                    return Ok(Computation::with_span(
                        CompKind::SplitUnit(Box::new(v), Box::new(body)),
                        span,
                    ));
                }
                let (x, _) = self.plain_ident("a split pattern")?;
                self.eat(Tok::Comma, "a split pattern")?;
                let (y, _) = self.plain_ident("a split pattern")?;
                self.eat(Tok::RParen, "a split pattern")?;
                self.eat(Tok::In, "a split")?;
                let body = self.computation()?;
                let span = span.join(body.span);
                Ok(Computation::with_span(
                    CompKind::SplitPair(Box::new(v), x, y, Box::new(body)),
                    span,
                ))
            }
            Tok::Match => {
                self.next();
                let v = self.value()?;
                self.eat(Tok::LBrace, "a match")?;
                // `fold` pattern: iso-recursive case analysis
                if *self.peek() == Tok::Fold {
                    self.next();
                    let (x, _) = self.plain_ident("a fold pattern")?;
                    self.eat(Tok::FatArrow, "a match branch")?;
                    let body = self.computation()?;
                    let end = self.eat(Tok::RBrace, "a match")?;
                    return Ok(Computation::with_span(
                        CompKind::CaseFold(x, Box::new(v), Box::new(body)),
                        span.join(end),
                    ));
                }
                let mut branches = Vec::new();
                if *self.peek() == Tok::RBrace {
                    let end = self.next().span;
                    return Ok(Computation::with_span(
                        CompKind::Match(Box::new(v), branches),
                        span.join(end),
                    ));
                }
                loop {
                    let label = match self.peek().clone() {
                        Tok::Tick(l) => {
                            self.next();
                            l
                        }
                        other => {
                            return Err(ParseError::expecting(
                                self.peek_span(),
                                format!(
                                    "found {} while parsing a match branch",
                                    other.describe()
                                ),
                                vec!["label"],
                            ))
                        }
                    };
                    let (x, _) = self.plain_ident("a match branch binder")?;
                    self.eat(Tok::FatArrow, "a match branch")?;
                    let body = self.computation()?;
                    branches.push((label, x, body));
                    match self.peek() {
                        Tok::Bar => {
                            self.next();
                        }
                        Tok::RBrace => {
                            let end = self.next().span;
                            return Ok(Computation::with_span(
                                CompKind::Match(Box::new(v), branches),
                                span.join(end),
                            ));
                        }
                        other => {
                            return Err(ParseError::expecting(
                                self.peek_span(),
                                format!("found {} while parsing a match", other.describe()),
                                vec!["`|`", "`}`"],
                            ))
                        }
                    }
                }
            }
            Tok::Return => {
                self.next();
                let v = self.value()?;
                let span = span.join(v.span);
                Ok(Computation::with_span(CompKind::Return(Box::new(v)), span))
            }
            Tok::Force => {
                self.next();
                let v = self.value()?;
                let span = span.join(v.span);
                Ok(Computation::with_span(CompKind::Force(Box::new(v)), span))
            }
            Tok::Fold => {
                self.next();
                let e = self.computation()?;
                let span = span.join(e.span);
                Ok(Computation::with_span(CompKind::FoldNu(Box::new(e)), span))
            }
            Tok::Unfold => {
                self.next();
                let e = self.computation()?;
                let span = span.join(e.span);
                Ok(Computation::with_span(CompKind::Unfold(Box::new(e)), span))
            }
            _ => self.app_chain(),
        }
    }

    fn app_chain(&mut self) -> Result<Computation, ParseError> {
        let mut head = self.comp_postfix()?;
        while self.at_value_start() {
            let arg = self.value()?;
            let span = head.span.join(arg.span);
            head = Computation::with_span(CompKind::App(Box::new(head), Box::new(arg)), span);
        }
        Ok(head)
    }

    fn comp_postfix(&mut self) -> Result<Computation, ParseError> {
        let mut base = self.comp_atom()?;
        while *self.peek() == Tok::Dot {
            self.next();
            let (label, lsp) = self.plain_ident("a projection")?;
            let span = base.span.join(lsp);
            base = Computation::with_span(CompKind::Proj(Box::new(base), label), span);
        }
        Ok(base)
    }

    fn comp_atom(&mut self) -> Result<Computation, ParseError> {
        let span = self.peek_span();
        match self.peek().clone() {
            Tok::Ident(f) => {
                self.next();
                Ok(Computation::with_span(
                    CompKind::Def(ExprName::new(f)),
                    span,
                ))
            }
            Tok::Internal(f) => {
                self.next();
                Ok(Computation::with_span(
                    CompKind::Def(ExprName::new(f)),
                    span,
                ))
            }
            Tok::LBrace => {
                self.next();
                let mut fields = Vec::new();
                if *self.peek() == Tok::RBrace {
                    let end = self.next().span;
                    return Ok(Computation::with_span(
                        CompKind::Record(fields),
                        span.join(end),
                    ));
                }
                loop {
                    let (label, _) = self.plain_ident("a record field")?;
                    self.eat(Tok::Equal, "a record field")?;
                    let e = self.computation()?;
                    fields.push((label, e));
                    match self.peek() {
                        Tok::Comma => {
                            self.next();
                        }
                        Tok::RBrace => {
                            let end = self.next().span;
                            return Ok(Computation::with_span(
                                CompKind::Record(fields),
                                span.join(end),
                            ));
                        }
                        other => {
                            return Err(ParseError::expecting(
                                self.peek_span(),
                                format!("found {} while parsing a record", other.describe()),
                                vec!["`,`", "`}`"],
                            ))
                        }
                    }
                }
            }
            Tok::LParen => {
                self.next();
                let e = self.computation()?;
                match self.peek() {
                    Tok::Colon => {
                        self.next();
                        let sty = self.stype()?;
                        let ty = stype_to_neg(&sty)?;
                        let end = self.eat(Tok::RParen, "a computation annotation")?;
                        Ok(Computation::with_span(
                            CompKind::Anno(Box::new(e), ty),
                            span.join(end),
                        ))
                    }
                    Tok::RParen => {
                        let end = self.next().span;
                        Ok(Computation::with_span(e.kind, span.join(end)))
                    }
                    other => Err(ParseError::expecting(
                        self.peek_span(),
                        format!("found {} while parsing a computation", other.describe()),
                        vec!["`:`", "`)`"],
                    )),
                }
            }
            other => Err(ParseError::expecting(
                self.peek_span(),
                format!("found {} while parsing a computation", other.describe()),
                vec![
                    "definition name",
                    "`\\`",
                    "`return`",
                    "`let`",
                    "`match`",
                    "`split`",
                    "`force`",
                    "`{`",
                    "`(`",
                ],
            )),
        }
    }

    // -- top level -------------------------------------------------------------

    fn surface_sig(&mut self) -> Result<SurfaceSig, ParseError> {
        let mut defs = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => return Ok(SurfaceSig { defs }),
                Tok::Type => {
                    let start = self.next().span;
                    let (name, _) = self.ident("a type definition")?;
                    self.eat(Tok::Equal, "a type definition")?;
                    let body = self.stype()?;
                    let span = start.join(body.span);
                    defs.push(SurfaceDef::Type { name, body, span });
                }
                Tok::Def => {
                    let start = self.next().span;
                    let (name, _) = self.ident("a definition")?;
                    self.eat(Tok::Colon, "a definition")?;
                    let dtype = self.stype()?;
                    self.eat(Tok::Equal, "a definition")?;
                    let body = self.computation()?;
                    let span = start.join(body.span);
                    defs.push(SurfaceDef::Expr {
                        name,
                        dtype,
                        body,
                        span,
                    });
                }
                other => {
                    return Err(ParseError::expecting(
                        self.peek_span(),
                        format!("found {} at top level", other.describe()),
                        vec!["`type`", "`def`"],
                    ))
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Polarization of surface types
// ---------------------------------------------------------------------------

/// Converts a surface type to a positive type; `mu`/`nu` binders are rejected
/// (they belong to the iso front end).
pub fn stype_to_pos(t: &SType) -> Result<PosType, ParseError> {
    match &t.kind {
        STypeKind::Tensor(a, b) => Ok(PosType::Tensor(
            Box::new(stype_to_pos(a)?),
            Box::new(stype_to_pos(b)?),
        )),
        STypeKind::Unit => Ok(PosType::Unit),
        STypeKind::Variant(fields) => {
            let mut out = Vec::new();
            for (l, ty) in fields {
                out.push((l.clone(), stype_to_pos(ty)?));
            }
            Ok(PosType::Variant(out))
        }
        STypeKind::Down(s) => Ok(PosType::Down(Box::new(stype_to_neg(s)?))),
        STypeKind::Name(n) => Ok(PosType::Name(TypeName::new(n.clone()))),
        STypeKind::Arrow(..) | STypeKind::Lazy(..) | STypeKind::Up(..) => Err(ParseError::new(
            t.span,
            "expected a positive type, found a negative type constructor",
        )),
        STypeKind::Mu(..) | STypeKind::Nu(..) => Err(ParseError::new(
            t.span,
            "recursive type binders require the iso front end",
        )),
    }
}

/// Converts a surface type to a negative type.
pub fn stype_to_neg(t: &SType) -> Result<NegType, ParseError> {
    match &t.kind {
        STypeKind::Arrow(a, b) => Ok(NegType::Arrow(
            Box::new(stype_to_pos(a)?),
            Box::new(stype_to_neg(b)?),
        )),
        STypeKind::Lazy(fields) => {
            let mut out = Vec::new();
            for (l, ty) in fields {
                out.push((l.clone(), stype_to_neg(ty)?));
            }
            Ok(NegType::Lazy(out))
        }
        STypeKind::Up(s) => Ok(NegType::Up(Box::new(stype_to_pos(s)?))),
        STypeKind::Name(n) => Ok(NegType::Name(TypeName::new(n.clone()))),
        STypeKind::Tensor(..) | STypeKind::Unit | STypeKind::Variant(..) | STypeKind::Down(..) => {
            Err(ParseError::new(
                t.span,
                "expected a negative type, found a positive type constructor",
            ))
        }
        STypeKind::Mu(..) | STypeKind::Nu(..) => Err(ParseError::new(
            t.span,
            "recursive type binders require the iso front end",
        )),
    }
}

/// A surface type whose polarity is determined by its head constructor.
pub fn stype_to_typedef(t: &SType, sig_hint: Option<Polarity>) -> Result<TypeDef, ParseError> {
    match &t.kind {
        STypeKind::Tensor(..) | STypeKind::Unit | STypeKind::Variant(..) | STypeKind::Down(..) => {
            Ok(TypeDef::Pos(stype_to_pos(t)?))
        }
        STypeKind::Arrow(..) | STypeKind::Lazy(..) | STypeKind::Up(..) => {
            Ok(TypeDef::Neg(stype_to_neg(t)?))
        }
        // A bare name is not contractive; validation reports it. Pick the hinted
        // or positive polarity so parsing can continue.
        STypeKind::Name(n) => match sig_hint {
            Some(Polarity::Neg) => Ok(TypeDef::Neg(NegType::Name(TypeName::new(n.clone())))),
            _ => Ok(TypeDef::Pos(PosType::Name(TypeName::new(n.clone())))),
        },
        STypeKind::Mu(..) | STypeKind::Nu(..) => Err(ParseError::new(
            t.span,
            "recursive type binders require the iso front end",
        )),
    }
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

fn tokens(text: &str) -> Result<Parser, ParseError> {
    let toks = Lexer::new(text).tokenize()?;
    Ok(Parser { toks, pos: 0 })
}

/// Parses a file into its surface form (types not yet polarized).
pub fn parse_surface(text: &str) -> Result<SurfaceSig, ParseError> {
    tokens(text)?.surface_sig()
}

/// Parses a core signature: surface parse plus polarization.
pub fn parse_signature(text: &str) -> Result<Signature, ParseError> {
    let surface = parse_surface(text)?;
    let mut sig = Signature::new();
    for def in surface.defs {
        match def {
            SurfaceDef::Type { name, body, span } => {
                let body = stype_to_typedef(&body, None)?;
                sig.push_type(TypeName::new(name), body, span);
            }
            SurfaceDef::Expr {
                name,
                dtype,
                body,
                span,
            } => {
                let dtype = stype_to_neg(&dtype)?;
                sig.push_expr(ExprName::new(name), dtype, body, span);
            }
        }
    }
    Ok(sig)
}

fn parse_all<T>(
    text: &str,
    f: impl FnOnce(&mut Parser) -> Result<T, ParseError>,
) -> Result<T, ParseError> {
    let mut p = tokens(text)?;
    let out = f(&mut p)?;
    if *p.peek() != Tok::Eof {
        return Err(ParseError::new(
            p.peek_span(),
            format!("trailing input: {}", p.peek().describe()),
        ));
    }
    Ok(out)
}

pub fn parse_pos_type(text: &str) -> Result<PosType, ParseError> {
    parse_all(text, |p| {
        let sty = p.stype()?;
        stype_to_pos(&sty)
    })
}

pub fn parse_neg_type(text: &str) -> Result<NegType, ParseError> {
    parse_all(text, |p| {
        let sty = p.stype()?;
        stype_to_neg(&sty)
    })
}

pub fn parse_stype(text: &str) -> Result<SType, ParseError> {
    parse_all(text, |p| p.stype())
}

pub fn parse_value(text: &str) -> Result<Value, ParseError> {
    parse_all(text, |p| p.value())
}

pub fn parse_computation(text: &str) -> Result<Computation, ParseError> {
    parse_all(text, |p| p.computation())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_variant_type() {
        let sig = parse_signature("type pos = +{ b0 : pos, b1 : std }").unwrap();
        let body = sig.pos_def(&TypeName::new("pos")).unwrap();
        match body {
            PosType::Variant(fields) => {
                assert_eq!(fields.len(), 2);
                assert_eq!(fields[0].0, "b0");
                assert_eq!(fields[1].0, "b1");
            }
            other => panic!("expected a variant, got {:?}", other),
        }
    }

    #[test]
    fn empty_input_is_empty_signature() {
        let sig = parse_signature("").unwrap();
        assert!(sig.is_empty());
    }

    #[test]
    fn parses_six() {
        let sig = parse_signature("def six : up pos = return 'b0 'b1 'b1 'e ()").unwrap();
        let def = sig.expr_def(&ExprName::new("six")).unwrap();
        assert_eq!(def.dtype, NegType::Up(Box::new(PosType::Name(TypeName::new("pos")))));
        let expected = Computation::ret(Value::inj(
            "b0",
            Value::inj("b1", Value::inj("b1", Value::inj("e", Value::unit()))),
        ));
        assert_eq!(def.body, expected);
    }

    #[test]
    fn application_is_left_associative() {
        let e = parse_computation("f x y").unwrap();
        let expected = Computation::app(
            Computation::app(Computation::def("f"), Value::var("x")),
            Value::var("y"),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn injection_nests_right() {
        let v = parse_value("'b1 'e ()").unwrap();
        assert_eq!(v, Value::inj("b1", Value::inj("e", Value::unit())));
    }

    #[test]
    fn arrow_is_right_associative_and_tensor_binds_tighter() {
        let t = parse_neg_type("1 * 1 -> 1 -> up 1").unwrap();
        let unit = PosType::Unit;
        let expected = NegType::Arrow(
            Box::new(PosType::Tensor(Box::new(unit.clone()), Box::new(unit.clone()))),
            Box::new(NegType::Arrow(
                Box::new(unit.clone()),
                Box::new(NegType::Up(Box::new(unit))),
            )),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn comments_are_skipped_but_internal_names_lex() {
        let sig = parse_signature("type a = 1 % a comment\ntype %a.0 = 1").unwrap();
        assert!(sig.type_def(&TypeName::new("%a.0")).is_some());
    }

    #[test]
    fn parse_errors_carry_spans() {
        let err = parse_signature("type t = ").unwrap_err();
        assert!(err.span.start_line >= 1);
        assert!(!err.expected.is_empty());
    }

    #[test]
    fn omega_parses() {
        let text = "type U = (down U) -> U\n\
                    def omega : (down U) -> U = \\x. (force x) x\n\
                    def Omega : U = omega (thunk omega)";
        let sig = parse_signature(text).unwrap();
        let omega = sig.expr_def(&ExprName::new("omega")).unwrap();
        let expected = Computation::lam(
            "x",
            Computation::app(Computation::force(Value::var("x")), Value::var("x")),
        );
        assert_eq!(omega.body, expected);
    }

    #[test]
    fn match_and_split_parse() {
        let e = parse_computation(
            "match x { 'e u => return 'b1 'e u | 'b0 x' => return 'b1 x' }",
        )
        .unwrap();
        match &e.kind {
            CompKind::Match(v, branches) => {
                assert_eq!(**v, Value::var("x"));
                assert_eq!(branches.len(), 2);
                assert_eq!(branches[0].0, "e");
                assert_eq!(branches[1].1, "x'");
            }
            other => panic!("expected match, got {:?}", other),
        }
        let e = parse_computation("split np as (n, p) in return (n, p)").unwrap();
        assert!(matches!(e.kind, CompKind::SplitPair(..)));
        let e = parse_computation("split u as () in return ()").unwrap();
        assert!(matches!(e.kind, CompKind::SplitUnit(..)));
    }

    #[test]
    fn iso_terms_parse() {
        let v = parse_value("fold 'z ()").unwrap();
        assert!(matches!(v.kind, ValueKind::FoldMu(_)));
        let e = parse_computation("match v { fold x => return x }").unwrap();
        assert!(matches!(e.kind, CompKind::CaseFold(..)));
        let e = parse_computation("unfold s").unwrap();
        assert!(matches!(e.kind, CompKind::Unfold(_)));
    }

    #[test]
    fn mu_types_parse_in_surface_form() {
        let t = parse_stype("mu a . +{z : 1, s : a}").unwrap();
        assert!(matches!(t.kind, STypeKind::Mu(..)));
        // but are rejected by core polarization
        assert!(parse_pos_type("mu a . +{z : 1, s : a}").is_err());
    }
}
