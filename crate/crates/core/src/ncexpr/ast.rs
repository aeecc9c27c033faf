use std::fmt;

use crate::algebra::{Algebra, Element, Tuple};
use crate::error::{Error, Result};

/// Non-commutative polynomial expression over tuple variables `x1..xn`.
///
/// `Prod` keeps factor order. An empty `Prod` is the unit and an empty `Sum`
/// is zero, so derivative construction never needs an algebra handle.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Element),
    /// 1-based variable index.
    Var(usize),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Neg(Box<Expr>),
    Inv(Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn one() -> Expr {
        Expr::Prod(Vec::new())
    }

    pub fn zero() -> Expr {
        Expr::Sum(Vec::new())
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn inv(e: Expr) -> Expr {
        Expr::Inv(Box::new(e))
    }

    pub fn pow(e: Expr, n: u32) -> Expr {
        Expr::Pow(Box::new(e), n)
    }

    pub fn is_one(&self) -> bool {
        match self {
            Expr::Prod(f) => f.is_empty(),
            Expr::Const(c) => c.is_one(),
            _ => false,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Expr::Sum(t) => t.is_empty(),
            Expr::Const(c) => c.is_zero(),
            Expr::Neg(e) => e.is_zero(),
            _ => false,
        }
    }

    /// Ordered product with nested products flattened and unit factors dropped.
    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out = Vec::new();
        for f in factors {
            match f {
                Expr::Prod(inner) => out.extend(inner),
                f if f.is_one() => {}
                f => out.push(f),
            }
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expr::Prod(out)
        }
    }

    pub fn negate(e: Expr) -> Expr {
        match e {
            Expr::Neg(inner) => *inner,
            e => Expr::Neg(Box::new(e)),
        }
    }

    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out = Vec::new();
        for t in terms {
            match t {
                Expr::Sum(inner) => out.extend(inner),
                t => out.push(t),
            }
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expr::Sum(out)
        }
    }

    pub fn eval(&self, alg: &Algebra, x: &Tuple) -> Result<Element> {
        match self {
            Expr::Const(c) => {
                if c.algebra() != alg {
                    return Err(Error::AlgebraMismatch(
                        alg.name().into(),
                        c.algebra().name().into(),
                    ));
                }
                Ok(c.clone())
            }
            Expr::Var(i) => {
                let v = x.components().get(i - 1).ok_or_else(|| {
                    Error::ShapeMismatch(format!(
                        "x{i} requested from a tuple of length {}",
                        x.len()
                    ))
                })?;
                if v.algebra() != alg {
                    return Err(Error::AlgebraMismatch(
                        alg.name().into(),
                        v.algebra().name().into(),
                    ));
                }
                Ok(v.clone())
            }
            Expr::Sum(terms) => terms
                .iter()
                .try_fold(alg.zero(), |acc, t| Ok(&acc + &t.eval(alg, x)?)),
            Expr::Prod(factors) => factors
                .iter()
                .try_fold(alg.one(), |acc, f| Ok(&acc * &f.eval(alg, x)?)),
            Expr::Neg(e) => Ok(-&e.eval(alg, x)?),
            Expr::Inv(e) => e.eval(alg, x)?.inv(),
            Expr::Pow(e, n) => {
                let base = e.eval(alg, x)?;
                Ok((0..*n).fold(alg.one(), |acc, _| &acc * &base))
            }
        }
    }

    /// Largest variable index referenced (0 when constant).
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => *i,
            Expr::Sum(v) | Expr::Prod(v) => v.iter().map(Expr::max_var).max().unwrap_or(0),
            Expr::Neg(e) | Expr::Inv(e) | Expr::Pow(e, _) => e.max_var(),
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(i) => *i == var,
            Expr::Sum(v) | Expr::Prod(v) => v.iter().any(|e| e.depends_on(var)),
            Expr::Neg(e) | Expr::Inv(e) | Expr::Pow(e, _) => e.depends_on(var),
        }
    }

    /// Replaces every `Var(i)` by `f(i)`.
    pub fn substitute(&self, f: &impl Fn(usize) -> Expr) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(i) => f(*i),
            Expr::Sum(v) => Expr::Sum(v.iter().map(|e| e.substitute(f)).collect()),
            Expr::Prod(v) => Expr::Prod(v.iter().map(|e| e.substitute(f)).collect()),
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute(f))),
            Expr::Inv(e) => Expr::Inv(Box::new(e.substitute(f))),
            Expr::Pow(e, n) => Expr::Pow(Box::new(e.substitute(f)), *n),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Sum(v) if v.len() > 1 => 0,
            Expr::Prod(v) if v.len() > 1 => 1,
            Expr::Neg(_) => 2,
            Expr::Const(c) if const_needs_parens(c) => 0,
            _ => 3,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }

    pub fn to_latex(&self) -> String {
        match self {
            Expr::Const(c) => {
                let s = c.to_string();
                if s.contains(' ') {
                    format!("({s})")
                } else {
                    s
                }
            }
            Expr::Var(i) => format!("x^{{{i}}}"),
            Expr::Sum(v) if v.is_empty() => "0".into(),
            Expr::Sum(v) => {
                let mut s = String::new();
                for (n, t) in v.iter().enumerate() {
                    match t {
                        Expr::Neg(inner) => {
                            s.push_str(if n == 0 { "-" } else { " - " });
                            s.push_str(&latex_child(inner, 1));
                        }
                        t => {
                            if n > 0 {
                                s.push_str(" + ");
                            }
                            s.push_str(&t.to_latex());
                        }
                    }
                }
                s
            }
            Expr::Prod(v) if v.is_empty() => "1".into(),
            Expr::Prod(v) => v
                .iter()
                .map(|e| latex_child(e, 2))
                .collect::<Vec<_>>()
                .join(" "),
            Expr::Neg(e) => format!("-{}", latex_child(e, 2)),
            Expr::Inv(e) => format!("{}^{{-1}}", latex_child(e, 3)),
            Expr::Pow(e, n) => format!("{}^{{{n}}}", latex_child(e, 3)),
        }
    }
}

fn latex_child(e: &Expr, min: u8) -> String {
    // Var renders with a superscript index, so powers of it need parentheses.
    let needs = e.precedence() < min || (min == 3 && matches!(e, Expr::Var(_)));
    if needs {
        format!("({})", e.to_latex())
    } else {
        e.to_latex()
    }
}

fn const_needs_parens(c: &Element) -> bool {
    let s = const_source(c);
    s.starts_with('-') || s.contains(" + ")
}

/// Literal in the expression grammar.
pub(crate) fn const_source(c: &Element) -> String {
    if let Some(r) = c.as_real() {
        return format!("{r}");
    }
    let names = c.algebra().basis_names();
    let coords = c.coords();
    let nonzero: Vec<usize> = (0..coords.len()).filter(|&i| coords[i] != 0.0).collect();
    if let [i] = nonzero.as_slice() {
        let v = coords[*i];
        if v == 1.0 {
            return names[*i].clone();
        }
        return format!("{v}*{}", names[*i]);
    }
    if names.iter().map(String::as_str).eq(["1", "i", "j", "k"]) {
        return format!(
            "q({}, {}, {}, {})",
            coords[0], coords[1], coords[2], coords[3]
        );
    }
    nonzero
        .iter()
        .map(|&i| format!("{}*{}", coords[i], names[i]))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Source form in the expression grammar; parses back to an equal value.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{}", const_source(c)),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Sum(v) if v.is_empty() => write!(f, "0"),
            Expr::Sum(v) => {
                for (n, t) in v.iter().enumerate() {
                    match t {
                        Expr::Neg(inner) if n > 0 => {
                            write!(f, " - ")?;
                            inner.write_child(f, 1)?;
                        }
                        t => {
                            if n > 0 {
                                write!(f, " + ")?;
                            }
                            t.write_child(f, 1)?;
                        }
                    }
                }
                Ok(())
            }
            Expr::Prod(v) if v.is_empty() => write!(f, "1"),
            Expr::Prod(v) => {
                for (n, e) in v.iter().enumerate() {
                    if n > 0 {
                        write!(f, "*")?;
                    }
                    e.write_child(f, 2)?;
                }
                Ok(())
            }
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.write_child(f, 2)
            }
            Expr::Inv(e) => write!(f, "inv({e})"),
            Expr::Pow(e, n) => {
                e.write_child(f, 3)?;
                write!(f, "^{n}")
            }
        }
    }
}

/// Sum of `left ⊗ right` pairs of expressions; evaluates to a tensor map.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TensorExpr {
    pub terms: Vec<(Expr, Expr)>,
}

impl TensorExpr {
    pub fn zero() -> Self {
        TensorExpr { terms: Vec::new() }
    }

    /// `1 ⊗ 1`
    pub fn identity() -> Self {
        TensorExpr {
            terms: vec![(Expr::one(), Expr::one())],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, alg: &Algebra, x: &Tuple) -> Result<crate::linmap::TensorMap> {
        let terms = self
            .terms
            .iter()
            .map(|(l, r)| Ok((l.eval(alg, x)?, r.eval(alg, x)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(crate::linmap::TensorMap::from_terms(alg, terms))
    }

    pub fn substitute(&self, f: &impl Fn(usize) -> Expr) -> TensorExpr {
        TensorExpr {
            terms: self
                .terms
                .iter()
                .map(|(l, r)| (l.substitute(f), r.substitute(f)))
                .collect(),
        }
    }

    pub fn max_var(&self) -> usize {
        self.terms
            .iter()
            .map(|(l, r)| l.max_var().max(r.max_var()))
            .max()
            .unwrap_or(0)
    }

    /// `[[leftSrc, rightSrc], ...]`
    pub fn source_pairs(&self) -> Vec<[String; 2]> {
        self.terms
            .iter()
            .map(|(l, r)| [l.to_string(), r.to_string()])
            .collect()
    }

    pub fn to_latex(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(l, r)| {
                format!(
                    "{} \\otimes {}",
                    tensor_factor_latex(l),
                    tensor_factor_latex(r)
                )
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn tensor_factor_latex(e: &Expr) -> String {
    if e.precedence() == 0 {
        format!("({})", e.to_latex())
    } else {
        e.to_latex()
    }
}

impl fmt::Display for TensorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (l, r)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            l.write_child(f, 1)?;
            write!(f, "⊗")?;
            r.write_child(f, 1)?;
        }
        Ok(())
    }
}
