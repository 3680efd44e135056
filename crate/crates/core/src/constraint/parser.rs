//! Recursive-descent parser for the constraint file format.
//!
//! ```text
//! constraint := pathdecl ("," pathdecl)* ";" preds "=>" preds
//! pathdecl   := IDENT "=" sequence
//! sequence   := item+
//! item       := (node | edge | "[" sequence ("|" sequence)* "]") ("*" | "+")*
//! node       := "(" IDENT? (":" labelexpr)? ")"
//! edge       := "-[" (":" labelexpr)? "]->" | "<-[" (":" labelexpr)? "]-"
//! labelexpr  := and ("|" and)* ; and := not ("&" not)* ; not := "!" not | atom
//! atom       := IDENT | `quoted` | "%" | "(" labelexpr ")"
//! preds      := "{" (pred ("," pred)*)? "}"
//! pred       := "false" | IDENT op IDENT | prop op operand | operand op prop
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

use chrono::{DateTime, Utc};

use super::ast::{
    is_keyword, CompOp, Constraint, LabelExpr, NodeVar, Operand, PathPattern, PathVar, Predicate, PropertyRef,
};
use crate::error::ConstraintError;
use crate::graph::{parse_timestamp, Direction, Value};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Str(String),
    Int(i64),
    Float(f64),
    Time(DateTime<Utc>),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Colon,
    Comma,
    Semi,
    Dot,
    Assign,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
    Implies,
    Amp,
    Pipe,
    Bang,
    Percent,
    Star,
    Plus,
    FwdOpen,
    FwdClose,
    RevOpen,
    RevClose,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Quoted(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Int(i) => format!("integer {i}"),
            Tok::Float(x) => format!("float {x}"),
            Tok::Time(_) => "timestamp".into(),
            Tok::Eof => "end of input".into(),
            other => format!("{other:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: Vec<char>,
    i: usize,
    line: usize,
    column: usize,
    in_reverse_edge: bool,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { chars: src.chars().collect(), i: 0, line: 1, column: 1, in_reverse_edge: false, _src: src }
    }

    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.i).copied()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(k, c)| self.peek(k) == Some(c))
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, column: self.column }
    }

    fn err(&self, pos: Pos, message: impl Into<String>) -> ConstraintError {
        ConstraintError::Syntax { line: pos.line, column: pos.column, message: message.into() }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek(0) {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.peek(0) {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn tokenize(mut self) -> Result<Vec<(Tok, Pos)>, ConstraintError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let pos = self.pos();
            let Some(c) = self.peek(0) else {
                out.push((Tok::Eof, pos));
                return Ok(out);
            };
            let fixed: &[(&str, Tok)] = &[
                ("<-[", Tok::RevOpen),
                ("]->", Tok::FwdClose),
                ("-[", Tok::FwdOpen),
                ("=>", Tok::Implies),
                ("!=", Tok::Ne),
                ("<>", Tok::Ne),
                ("<=", Tok::Le),
                (">=", Tok::Ge),
            ];
            if let Some((s, t)) = fixed.iter().find(|(s, _)| self.starts_with(s)) {
                for _ in 0..s.chars().count() {
                    self.bump();
                }
                if *t == Tok::RevOpen {
                    self.in_reverse_edge = true;
                }
                out.push((t.clone(), pos));
                continue;
            }
            // Label expressions contain no brackets, so the next `]` closes the edge.
            if self.in_reverse_edge && self.starts_with("]-") {
                self.bump();
                self.bump();
                self.in_reverse_edge = false;
                out.push((Tok::RevClose, pos));
                continue;
            }
            if c.is_ascii_digit() || (c == '-' && self.peek(1).is_some_and(|d| d.is_ascii_digit())) {
                out.push((self.number(pos)?, pos));
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let mut s = String::new();
                while let Some(d) = self.peek(0).filter(|d| d.is_ascii_alphanumeric() || *d == '_') {
                    s.push(d);
                    self.bump();
                }
                out.push((Tok::Ident(s), pos));
                continue;
            }
            self.bump();
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ':' => Tok::Colon,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '.' => Tok::Dot,
                '=' => Tok::Assign,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '&' => Tok::Amp,
                '|' => Tok::Pipe,
                '!' => Tok::Bang,
                '%' => Tok::Percent,
                '*' => Tok::Star,
                '+' => Tok::Plus,
                '`' => Tok::Quoted(self.quoted(pos)?),
                '"' => Tok::Str(self.string(pos)?),
                other => return Err(self.err(pos, format!("unexpected character `{other}`"))),
            };
            out.push((tok, pos));
        }
    }

    fn quoted(&mut self, pos: Pos) -> Result<String, ConstraintError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err(pos, "unterminated quoted name")),
                Some('`') if self.peek(0) == Some('`') => {
                    self.bump();
                    s.push('`');
                }
                Some('`') => return Ok(s),
                Some(c) => s.push(c),
            }
        }
    }

    fn string(&mut self, pos: Pos) -> Result<String, ConstraintError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err(pos, "unterminated string literal")),
                Some('"') => return Ok(s),
                Some('\\') => {
                    let esc = self.bump().ok_or_else(|| self.err(pos, "unterminated escape"))?;
                    match esc {
                        'n' => s.push('\n'),
                        't' => s.push('\t'),
                        'r' => s.push('\r'),
                        '0' => s.push('\0'),
                        '\\' | '"' | '\'' => s.push(esc),
                        'u' => {
                            if self.bump() != Some('{') {
                                return Err(self.err(pos, "expected `{` in unicode escape"));
                            }
                            let mut hex = String::new();
                            loop {
                                match self.bump() {
                                    Some('}') => break,
                                    Some(h) if h.is_ascii_hexdigit() => hex.push(h),
                                    _ => return Err(self.err(pos, "bad unicode escape")),
                                }
                            }
                            let ch = u32::from_str_radix(&hex, 16)
                                .ok()
                                .and_then(char::from_u32)
                                .ok_or_else(|| self.err(pos, "bad unicode escape"))?;
                            s.push(ch);
                        }
                        other => return Err(self.err(pos, format!("unknown escape `\\{other}`"))),
                    }
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn number(&mut self, pos: Pos) -> Result<Tok, ConstraintError> {
        // Dates and instants: 2020-12-31 or 2020-12-31T10:00:00Z.
        if self.looks_like_date() {
            let mut s = String::new();
            while let Some(c) = self.peek(0).filter(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | ':' | '.' | '+'))
            {
                s.push(c);
                self.bump();
            }
            return parse_timestamp(&s).map(Tok::Time).ok_or_else(|| self.err(pos, format!("invalid timestamp `{s}`")));
        }
        let mut s = String::new();
        if self.peek(0) == Some('-') {
            s.push('-');
            self.bump();
        }
        let mut is_float = false;
        while let Some(c) = self.peek(0) {
            if c.is_ascii_digit() {
                s.push(c);
            } else if c == '.' && !is_float && self.peek(1).is_some_and(|d| d.is_ascii_digit()) {
                is_float = true;
                s.push(c);
            } else if matches!(c, 'e' | 'E')
                && (self.peek(1).is_some_and(|d| d.is_ascii_digit())
                    || (matches!(self.peek(1), Some('-' | '+')) && self.peek(2).is_some_and(|d| d.is_ascii_digit())))
            {
                is_float = true;
                s.push(c);
                self.bump();
                s.push(self.bump().expect("checked"));
                continue;
            } else {
                break;
            }
            self.bump();
        }
        if is_float {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Tok::Float)
                .ok_or_else(|| self.err(pos, format!("invalid float `{s}`")))
        } else {
            s.parse::<i64>().map(Tok::Int).map_err(|_| self.err(pos, format!("integer `{s}` out of range")))
        }
    }

    fn looks_like_date(&self) -> bool {
        let digit = |k| self.peek(k).is_some_and(|c: char| c.is_ascii_digit());
        (0..4).all(digit) && self.peek(4) == Some('-') && digit(5) && digit(6) && self.peek(7) == Some('-')
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    anon: usize,
}

type PResult<T> = Result<T, ConstraintError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> ConstraintError {
        let p = self.pos();
        ConstraintError::Syntax { line: p.line, column: p.column, message: message.into() }
    }

    fn invalid(&self, at: Pos, message: impl Into<String>) -> ConstraintError {
        ConstraintError::Validation { line: at.line, column: at.column, message: message.into() }
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {what}, found {}", self.peek().describe())))
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.err(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn name(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Quoted(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.err(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn constraints(&mut self) -> PResult<Vec<Constraint>> {
        let mut out = Vec::new();
        while *self.peek() != Tok::Eof {
            out.push(self.constraint()?);
        }
        Ok(out)
    }

    fn constraint(&mut self) -> PResult<Constraint> {
        let start = self.pos();
        self.anon = 0;
        let mut patterns: Vec<(PathVar, PathPattern)> = Vec::new();
        loop {
            let at = self.pos();
            let z = PathVar(self.ident("path variable")?);
            if patterns.iter().any(|(v, _)| *v == z) {
                return Err(self.invalid(at, format!("duplicate path variable `{z}`")));
            }
            self.expect(Tok::Assign, "`=`")?;
            let mut p = self.sequence()?;
            self.name_anonymous(&mut p, false);
            patterns.push((z, p));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Semi, "`;`")?;
        let filter = self.predicates()?;
        self.expect(Tok::Implies, "`=>`")?;
        let condition = self.predicates()?;
        let c = Constraint { patterns, filter, condition };
        c.validate().map_err(|m| self.invalid(start, m))?;
        Ok(c)
    }

    /// Gives every anonymous node pattern outside union and repetition
    /// (including `+`) a fresh internal variable.
    fn name_anonymous(&mut self, p: &mut PathPattern, nested: bool) {
        match p {
            PathPattern::Node { var, .. } => {
                if var.is_none() && !nested {
                    *var = Some(NodeVar(format!("#{}", self.anon)));
                    self.anon += 1;
                }
            }
            PathPattern::Edge { .. } => {}
            PathPattern::Concat(_) => {
                let repeated = nested || p.as_plus().is_some();
                if let PathPattern::Concat(cs) = p {
                    cs.iter_mut().for_each(|c| self.name_anonymous(c, repeated));
                }
            }
            PathPattern::Union(a, b) => {
                self.name_anonymous(a, true);
                self.name_anonymous(b, true);
            }
            PathPattern::Star(c) => self.name_anonymous(c, true),
        }
    }

    fn starts_item(&self) -> bool {
        matches!(self.peek(), Tok::LParen | Tok::LBracket | Tok::FwdOpen | Tok::RevOpen)
    }

    fn sequence(&mut self) -> PResult<PathPattern> {
        if !self.starts_item() {
            return Err(self.err(format!("expected a path pattern, found {}", self.peek().describe())));
        }
        let mut items = Vec::new();
        while self.starts_item() {
            items.push(self.item()?);
        }
        Ok(if items.len() == 1 { items.pop().expect("one") } else { PathPattern::Concat(items) })
    }

    fn item(&mut self) -> PResult<PathPattern> {
        let at = self.pos();
        let mut p = match self.peek() {
            Tok::LParen => self.node()?,
            Tok::FwdOpen | Tok::RevOpen => self.edge()?,
            Tok::LBracket => {
                self.bump();
                let mut alt = self.sequence()?;
                while self.eat(&Tok::Pipe) {
                    let rhs = self.sequence()?;
                    alt = PathPattern::Union(Box::new(alt), Box::new(rhs));
                }
                self.expect(Tok::RBracket, "`]`")?;
                alt
            }
            _ => unreachable!("checked by starts_item"),
        };
        loop {
            let repeated = match self.peek() {
                Tok::Star => false,
                Tok::Plus => true,
                _ => break,
            };
            self.bump();
            if p.has_node_vars() {
                return Err(self.invalid(at, "node variables are not allowed inside a repetition"));
            }
            if p.min_match_length() == 0 {
                return Err(self.invalid(at, "a repeated pattern must not match a path of length 0"));
            }
            p = if repeated { PathPattern::plus(p) } else { PathPattern::Star(Box::new(p)) };
        }
        Ok(p)
    }

    fn node(&mut self) -> PResult<PathPattern> {
        self.expect(Tok::LParen, "`(`")?;
        let var = match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Some(NodeVar(s))
            }
            _ => None,
        };
        let label = if self.eat(&Tok::Colon) { self.label_or()? } else { LabelExpr::True };
        self.expect(Tok::RParen, "`)`")?;
        Ok(PathPattern::Node { var, label })
    }

    fn edge(&mut self) -> PResult<PathPattern> {
        let direction = match self.bump() {
            Tok::FwdOpen => Direction::Forward,
            _ => Direction::Reverse,
        };
        let label = if self.eat(&Tok::Colon) { self.label_or()? } else { LabelExpr::True };
        match direction {
            Direction::Forward => self.expect(Tok::FwdClose, "`]->`")?,
            Direction::Reverse => self.expect(Tok::RevClose, "`]-`")?,
        }
        Ok(PathPattern::Edge { direction, label })
    }

    fn label_or(&mut self) -> PResult<LabelExpr> {
        let mut e = self.label_and()?;
        while self.eat(&Tok::Pipe) {
            e = LabelExpr::Or(Box::new(e), Box::new(self.label_and()?));
        }
        Ok(e)
    }

    fn label_and(&mut self) -> PResult<LabelExpr> {
        let mut e = self.label_not()?;
        while self.eat(&Tok::Amp) {
            e = LabelExpr::And(Box::new(e), Box::new(self.label_not()?));
        }
        Ok(e)
    }

    fn label_not(&mut self) -> PResult<LabelExpr> {
        if self.eat(&Tok::Bang) {
            return Ok(LabelExpr::Not(Box::new(self.label_not()?)));
        }
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Quoted(s) => {
                self.bump();
                Ok(LabelExpr::Label(s))
            }
            Tok::Percent => {
                self.bump();
                Ok(LabelExpr::True)
            }
            Tok::LParen => {
                self.bump();
                let e = self.label_or()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            other => Err(self.err(format!("expected a label, found {}", other.describe()))),
        }
    }

    fn predicates(&mut self) -> PResult<Vec<Predicate>> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut out = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(out);
        }
        loop {
            out.push(self.predicate()?);
            if self.eat(&Tok::RBrace) {
                return Ok(out);
            }
            self.expect(Tok::Comma, "`,` or `}`")?;
        }
    }

    fn predicate(&mut self) -> PResult<Predicate> {
        if *self.peek() == Tok::Ident("false".into()) && matches!(self.peek_at(1), Tok::Comma | Tok::RBrace) {
            self.bump();
            return Ok(Predicate::False);
        }
        let at = self.pos();
        let left = self.operand()?;
        let op = match self.bump() {
            Tok::Assign => CompOp::Eq,
            Tok::Ne => CompOp::Ne,
            Tok::Le => CompOp::Le,
            Tok::Ge => CompOp::Ge,
            Tok::Lt => CompOp::Lt,
            Tok::Gt => CompOp::Gt,
            other => {
                self.i -= 1;
                return Err(self.err(format!("expected a comparison operator, found {}", other.describe())));
            }
        };
        let right = self.operand()?;
        match (left, right) {
            (Term::Var(a), Term::Var(b)) => match op {
                CompOp::Eq => Ok(Predicate::VarEq(a, b)),
                CompOp::Ne => Ok(Predicate::VarNe(a, b)),
                _ => Err(self.invalid(at, "node variables can only be compared with `=` or `!=`")),
            },
            (Term::Operand(Operand::Property(left)), Term::Operand(right)) => {
                Ok(Predicate::Compare { left, op, right })
            }
            (Term::Operand(left), Term::Operand(Operand::Property(right))) => {
                Ok(Predicate::Compare { left: right, op: op.flip(), right: left })
            }
            _ => Err(self.invalid(at, "a comparison must mention a property `var.key`")),
        }
    }

    fn operand(&mut self) -> PResult<Term> {
        let tok = self.bump();
        Ok(match tok {
            Tok::Ident(s) if s == "NOW" => {
                self.expect(Tok::LParen, "`(`")?;
                self.expect(Tok::RParen, "`)`")?;
                Term::Operand(Operand::Now)
            }
            Tok::Ident(s) if s == "true" || s == "false" => Term::Operand(Operand::Const(Value::Bool(s == "true"))),
            Tok::Ident(s) => {
                if self.eat(&Tok::Dot) {
                    let key = self.name("property key")?;
                    Term::Operand(Operand::Property(PropertyRef { var: NodeVar(s), key }))
                } else {
                    Term::Var(NodeVar(s))
                }
            }
            Tok::Int(i) => Term::Operand(Operand::Const(Value::Int(i))),
            Tok::Float(x) => Term::Operand(Operand::Const(Value::Float(x))),
            Tok::Str(s) => Term::Operand(Operand::Const(Value::String(s))),
            Tok::Time(t) => Term::Operand(Operand::Const(Value::Timestamp(t))),
            other => {
                self.i -= 1;
                return Err(self.err(format!("expected an operand, found {}", other.describe())));
            }
        })
    }
}

enum Term {
    Var(NodeVar),
    Operand(Operand),
}

/// Parses a constraint file into validated constraints.
pub fn parse_constraints(text: &str) -> Result<Vec<Constraint>, ConstraintError> {
    let toks = Lexer::new(text).tokenize()?;
    Parser { toks, i: 0, anon: 0 }.constraints()
}

/// Parses exactly one constraint.
pub fn parse_constraint(text: &str) -> Result<Constraint, ConstraintError> {
    let mut all = parse_constraints(text)?;
    match all.len() {
        1 => Ok(all.pop().expect("one")),
        n => Err(ConstraintError::Syntax {
            line: 1,
            column: 1,
            message: format!("expected exactly one constraint, found {n}"),
        }),
    }
}
