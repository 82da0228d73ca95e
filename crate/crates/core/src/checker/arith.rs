//! Integer arithmetic claims such as `2 + 2 = 4` or `x * 3 <= 10`.

use thiserror::Error;

use crate::text::TextRange;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct ArithError {
    pub range: TextRange,
    pub message: String,
}

fn err<T>(range: TextRange, message: impl Into<String>) -> Result<T, ArithError> {
    Err(ArithError {
        range,
        message: message.into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl Rel {
    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Rel::Eq => a == b,
            Rel::Ne => a != b,
            Rel::Lt => a < b,
            Rel::Gt => a > b,
            Rel::Le => a <= b,
            Rel::Ge => a >= b,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Lt => "<",
            Rel::Gt => ">",
            Rel::Le => "<=",
            Rel::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(i64, TextRange),
    Var(String, TextRange),
    Neg(Box<Expr>, TextRange),
    Bin(Op, Box<Expr>, Box<Expr>, TextRange),
}

impl Expr {
    pub fn range(&self) -> TextRange {
        match self {
            Expr::Num(_, r) | Expr::Var(_, r) | Expr::Neg(_, r) | Expr::Bin(_, _, _, r) => *r,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Claim {
    pub lhs: Expr,
    pub rel: Option<(Rel, Expr)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(i64),
    Ident(String),
    Op(Op),
    Rel(Rel),
    Open,
    Close,
}

fn lex(src: &str, base: usize) -> Result<Vec<(Tok, TextRange)>, ArithError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let sym = |i: usize, s: &str| -> bool {
        let s: Vec<char> = s.chars().collect();
        chars.len() >= i + s.len() && chars[i..i + s.len()] == s[..]
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = if c.is_whitespace() {
            i += 1;
            continue;
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            match digits.parse::<i64>() {
                Ok(n) => Tok::Num(n),
                Err(_) => return err(TextRange::new(base + start, base + i), "numeral too large"),
            }
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            let table: [(&str, Tok); 16] = [
                ("\\<noteq>", Tok::Rel(Rel::Ne)),
                ("\\<le>", Tok::Rel(Rel::Le)),
                ("\\<ge>", Tok::Rel(Rel::Ge)),
                ("\\<times>", Tok::Op(Op::Mul)),
                ("<=", Tok::Rel(Rel::Le)),
                (">=", Tok::Rel(Rel::Ge)),
                ("!=", Tok::Rel(Rel::Ne)),
                ("=", Tok::Rel(Rel::Eq)),
                ("<", Tok::Rel(Rel::Lt)),
                (">", Tok::Rel(Rel::Gt)),
                ("+", Tok::Op(Op::Add)),
                ("-", Tok::Op(Op::Sub)),
                ("*", Tok::Op(Op::Mul)),
                ("/", Tok::Op(Op::Div)),
                ("%", Tok::Op(Op::Rem)),
                ("(", Tok::Open),
            ];
            if c == ')' {
                i += 1;
                Tok::Close
            } else if let Some((s, t)) = table.iter().find(|(s, _)| sym(i, s)) {
                i += s.chars().count();
                t.clone()
            } else {
                return err(TextRange::new(base + i, base + i + 1), format!("unexpected character `{c}`"));
            }
        };
        out.push((tok, TextRange::new(base + start, base + i)));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, TextRange)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> TextRange {
        self.toks
            .get(self.pos)
            .map(|(_, r)| *r)
            .unwrap_or(TextRange::empty(self.end))
    }

    fn expr(&mut self) -> Result<Expr, ArithError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ (Op::Add | Op::Sub))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            let r = TextRange::new(lhs.range().start, rhs.range().end);
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), r);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ArithError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ (Op::Mul | Op::Div | Op::Rem))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            let r = TextRange::new(lhs.range().start, rhs.range().end);
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), r);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ArithError> {
        let here = self.here();
        match self.peek().cloned() {
            Some(Tok::Op(Op::Sub)) => {
                self.pos += 1;
                let e = self.unary()?;
                let r = TextRange::new(here.start, e.range().end);
                Ok(Expr::Neg(Box::new(e), r))
            }
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n, here))
            }
            Some(Tok::Ident(x)) => {
                self.pos += 1;
                Ok(Expr::Var(x, here))
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::Close) {
                    return err(self.here(), "expected `)`");
                }
                self.pos += 1;
                Ok(e)
            }
            _ => err(here, "expected a number, name or `(`"),
        }
    }
}

/// Parse an expression, optionally followed by one comparison. Ranges are
/// offset by `base`.
pub fn parse_claim(src: &str, base: usize) -> Result<Claim, ArithError> {
    let toks = lex(src, base)?;
    let end = base + src.chars().count();
    let mut p = Parser { toks, pos: 0, end };
    let lhs = p.expr()?;
    let rel = match p.peek().cloned() {
        Some(Tok::Rel(rel)) => {
            p.pos += 1;
            Some((rel, p.expr()?))
        }
        _ => None,
    };
    if p.peek().is_some() {
        return err(p.here(), "unexpected material after claim");
    }
    Ok(Claim { lhs, rel })
}

pub fn parse_expr(src: &str, base: usize) -> Result<Expr, ArithError> {
    match parse_claim(src, base)? {
        Claim { lhs, rel: None } => Ok(lhs),
        Claim { rel: Some((_, rhs)), lhs } => err(
            TextRange::new(lhs.range().end, rhs.range().end),
            "expected an expression, found a comparison",
        ),
    }
}

pub fn eval(e: &Expr, env: &dyn Fn(&str) -> Option<i64>) -> Result<i64, ArithError> {
    match e {
        Expr::Num(n, _) => Ok(*n),
        Expr::Var(x, r) => env(x).map_or_else(|| err(*r, format!("unknown name `{x}`")), Ok),
        Expr::Neg(a, r) => eval(a, env)?
            .checked_neg()
            .map_or_else(|| err(*r, "arithmetic overflow"), Ok),
        Expr::Bin(op, a, b, r) => {
            let (x, y) = (eval(a, env)?, eval(b, env)?);
            if matches!(op, Op::Div | Op::Rem) && y == 0 {
                return err(*r, "division by zero");
            }
            let v = match op {
                Op::Add => x.checked_add(y),
                Op::Sub => x.checked_sub(y),
                Op::Mul => x.checked_mul(y),
                Op::Div => x.checked_div(y),
                Op::Rem => x.checked_rem(y),
            };
            v.map_or_else(|| err(*r, "arithmetic overflow"), Ok)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Value(i64),
    Holds { lhs: i64, rhs: i64 },
    Fails { lhs: i64, rhs: i64, rel: Rel },
}

pub fn judge(c: &Claim, env: &dyn Fn(&str) -> Option<i64>) -> Result<Verdict, ArithError> {
    let lhs = eval(&c.lhs, env)?;
    match &c.rel {
        None => Ok(Verdict::Value(lhs)),
        Some((rel, e)) => {
            let rhs = eval(e, env)?;
            Ok(if rel.holds(lhs, rhs) {
                Verdict::Holds { lhs, rhs }
            } else {
                Verdict::Fails { lhs, rhs, rel: *rel }
            })
        }
    }
}
