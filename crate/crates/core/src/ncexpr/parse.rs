//! Recursive-descent parser for maps, expressions and tensor expressions.
//!
//! ```text
//! map     := stmt (";" stmt)* [";"]
//! stmt    := "y" INT "=" expr
//! expr    := term (("+" | "-") term)*
//! term    := unary ("*" unary)*
//! unary   := "-" unary | factor
//! factor  := primary ("^" INT)*
//! primary := REAL | basis-symbol | "x" INT | "inv(" expr ")" | "(" expr ")"
//!          | "q(" REAL "," REAL "," REAL "," REAL ")"
//! texpr   := tterm (("+" | "-") tterm)*
//! tterm   := term ("⊗" | "(x)") term | "0"
//! ```
//!
//! Positions in errors are byte offsets into the source.

use crate::algebra::Algebra;
use crate::error::{Error, Result};

use super::ast::{Expr, TensorExpr};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    Tensor,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next_token(&mut self) -> Result<(usize, Tok)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if self.pos >= bytes.len() {
            return Ok((start, Tok::End));
        }
        let rest = &self.src[self.pos..];
        if rest.starts_with('⊗') {
            self.pos += '⊗'.len_utf8();
            return Ok((start, Tok::Tensor));
        }
        if rest.starts_with("(x)") {
            self.pos += 3;
            return Ok((start, Tok::Tensor));
        }
        let c = bytes[self.pos] as char;
        if c.is_ascii_digit() || c == '.' {
            let mut end = self.pos;
            while end < bytes.len() && ((bytes[end] as char).is_ascii_digit() || bytes[end] == b'.')
            {
                end += 1;
            }
            // exponent part
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut e = end + 1;
                if e < bytes.len() && (bytes[e] == b'+' || bytes[e] == b'-') {
                    e += 1;
                }
                if e < bytes.len() && (bytes[e] as char).is_ascii_digit() {
                    while e < bytes.len() && (bytes[e] as char).is_ascii_digit() {
                        e += 1;
                    }
                    end = e;
                }
            }
            let text = &self.src[self.pos..end];
            let v: f64 = text
                .parse()
                .map_err(|_| Error::syntax(start, format!("malformed number `{text}`")))?;
            self.pos = end;
            return Ok((start, Tok::Num(v)));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = self.pos;
            while end < bytes.len()
                && ((bytes[end] as char).is_ascii_alphanumeric() || bytes[end] == b'_')
            {
                end += 1;
            }
            let id = self.src[self.pos..end].to_string();
            self.pos = end;
            return Ok((start, Tok::Ident(id)));
        }
        if "+-*^()=;,".contains(c) {
            self.pos += 1;
            return Ok((start, Tok::Sym(c)));
        }
        let ch = rest.chars().next().unwrap();
        Err(Error::syntax(start, format!("unexpected character `{ch}`")))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    pos: usize,
    alg: &'a Algebra,
    n_in: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, alg: &'a Algebra, n_in: usize) -> Result<Self> {
        let mut lexer = Lexer { src, pos: 0 };
        let (pos, tok) = lexer.next_token()?;
        Ok(Parser {
            lexer,
            tok,
            pos,
            alg,
            n_in,
        })
    }

    fn bump(&mut self) -> Result<()> {
        let (pos, tok) = self.lexer.next_token()?;
        self.pos = pos;
        self.tok = tok;
        Ok(())
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.tok == Tok::Sym(c) {
            self.bump()
        } else {
            Err(Error::syntax(
                self.pos,
                format!("expected `{c}`, found {}", describe(&self.tok)),
            ))
        }
    }

    fn map(&mut self) -> Result<Vec<(usize, usize, Expr)>> {
        let mut stmts = Vec::new();
        loop {
            if self.tok == Tok::End && !stmts.is_empty() {
                break;
            }
            stmts.push(self.stmt()?);
            match self.tok {
                Tok::Sym(';') => self.bump()?,
                Tok::End => break,
                _ => {
                    return Err(Error::syntax(
                        self.pos,
                        format!(
                            "expected `;` or end of input, found {}",
                            describe(&self.tok)
                        ),
                    ))
                }
            }
        }
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<(usize, usize, Expr)> {
        let pos = self.pos;
        let idx = match &self.tok {
            Tok::Ident(id) => indexed(id, 'y').ok_or_else(|| {
                Error::syntax(pos, format!("expected output variable `yN`, found `{id}`"))
            })?,
            t => {
                return Err(Error::syntax(
                    pos,
                    format!("expected output variable, found {}", describe(t)),
                ))
            }
        };
        self.bump()?;
        self.expect_sym('=')?;
        let e = self.expr()?;
        Ok((pos, idx, e))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            match self.tok {
                Tok::Sym('+') => {
                    self.bump()?;
                    terms.push(self.term()?);
                }
                Tok::Sym('-') => {
                    self.bump()?;
                    terms.push(Expr::negate(self.term()?));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Sum(terms)
        })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.unary()?];
        while self.tok == Tok::Sym('*') {
            self.bump()?;
            factors.push(self.unary()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Prod(factors)
        })
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.tok == Tok::Sym('-') {
            self.bump()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        let mut base = self.primary()?;
        while self.tok == Tok::Sym('^') {
            self.bump()?;
            let pos = self.pos;
            match self.tok {
                Tok::Num(v) if v.fract() == 0.0 && v >= 1.0 && v <= u32::MAX as f64 => {
                    self.bump()?;
                    base = Expr::Pow(Box::new(base), v as u32);
                }
                _ => return Err(Error::syntax(pos, "exponent must be a positive integer")),
            }
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<f64> {
        let neg = if self.tok == Tok::Sym('-') {
            self.bump()?;
            true
        } else {
            false
        };
        match self.tok {
            Tok::Num(v) => {
                self.bump()?;
                Ok(if neg { -v } else { v })
            }
            _ => Err(Error::syntax(
                self.pos,
                format!("expected a number, found {}", describe(&self.tok)),
            )),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        let pos = self.pos;
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Const(self.alg.scalar(v)))
            }
            Tok::Sym('(') => {
                self.bump()?;
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(id) => {
                self.bump()?;
                if id == "inv" {
                    self.expect_sym('(')?;
                    let e = self.expr()?;
                    self.expect_sym(')')?;
                    return Ok(Expr::Inv(Box::new(e)));
                }
                if id == "q" && self.tok == Tok::Sym('(') {
                    if self.alg.dim() != 4 || self.alg.basis_index("k").is_none() {
                        return Err(Error::UnknownSymbol {
                            pos,
                            name: "q(...)".into(),
                        });
                    }
                    self.bump()?;
                    let mut c = [0.0; 4];
                    for (n, slot) in c.iter_mut().enumerate() {
                        if n > 0 {
                            self.expect_sym(',')?;
                        }
                        *slot = self.number()?;
                    }
                    self.expect_sym(')')?;
                    return Ok(Expr::Const(self.alg.element(c.to_vec())?));
                }
                if let Some(b) = self.alg.basis_index(&id) {
                    return Ok(Expr::Const(self.alg.basis(b)));
                }
                if let Some(i) = indexed(&id, 'x') {
                    if i == 0 || i > self.n_in {
                        return Err(Error::IndexOutOfRange {
                            pos,
                            index: i,
                            max: self.n_in,
                        });
                    }
                    return Ok(Expr::Var(i));
                }
                Err(Error::UnknownSymbol { pos, name: id })
            }
            t => Err(Error::syntax(pos, format!("unexpected {}", describe(&t)))),
        }
    }

    fn texpr(&mut self) -> Result<TensorExpr> {
        let mut terms = Vec::new();
        let mut negate = false;
        loop {
            let pos = self.pos;
            let left = self.term()?;
            if self.tok == Tok::Tensor {
                self.bump()?;
                let right = self.term()?;
                let left = if negate { Expr::negate(left) } else { left };
                terms.push((left, right));
            } else if !left.is_zero() {
                return Err(Error::syntax(pos, "expected `left ⊗ right`"));
            }
            match self.tok {
                Tok::Sym('+') => negate = false,
                Tok::Sym('-') => negate = true,
                _ => break,
            }
            self.bump()?;
        }
        Ok(TensorExpr { terms })
    }

    fn finish(&self) -> Result<()> {
        if self.tok == Tok::End {
            Ok(())
        } else {
            Err(Error::syntax(
                self.pos,
                format!("unexpected {}", describe(&self.tok)),
            ))
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::Tensor => "`⊗`".into(),
        Tok::End => "end of input".into(),
    }
}

fn indexed(id: &str, prefix: char) -> Option<usize> {
    let rest = id.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

/// Parses `y1 = ...; y2 = ...` into output components ordered by index.
pub fn parse_components(src: &str, n_in: usize, alg: &Algebra) -> Result<Vec<Expr>> {
    let mut p = Parser::new(src, alg, n_in)?;
    let stmts = p.map()?;
    p.finish()?;
    let n_out = stmts.len();
    let mut slots: Vec<Option<Expr>> = vec![None; n_out];
    for (pos, idx, e) in stmts {
        if idx == 0 || idx > n_out {
            return Err(Error::IndexOutOfRange {
                pos,
                index: idx,
                max: n_out,
            });
        }
        if slots[idx - 1].is_some() {
            return Err(Error::syntax(pos, format!("y{idx} assigned twice")));
        }
        slots[idx - 1] = Some(e);
    }
    Ok(slots
        .into_iter()
        .map(|e| e.expect("all slots filled"))
        .collect())
}

/// Largest `xN` index mentioned in a map source; used to infer input arity.
pub fn infer_arity(src: &str) -> usize {
    let mut lexer = Lexer { src, pos: 0 };
    let mut max = 0;
    while let Ok((_, tok)) = lexer.next_token() {
        match tok {
            Tok::End => break,
            Tok::Ident(id) => {
                if let Some(i) = indexed(&id, 'x') {
                    max = max.max(i);
                }
            }
            _ => {}
        }
    }
    max
}

pub fn parse_expr(src: &str, n_in: usize, alg: &Algebra) -> Result<Expr> {
    let mut p = Parser::new(src, alg, n_in)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_tensor_expr(src: &str, n_in: usize, alg: &Algebra) -> Result<TensorExpr> {
    let mut p = Parser::new(src, alg, n_in)?;
    let e = p.texpr()?;
    p.finish()?;
    Ok(e)
}
