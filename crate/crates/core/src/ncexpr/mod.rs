//! Non-commutative polynomial maps `A^n -> A^m` and their derivatives.
//!
//! First derivatives are exact: [`PolyMap::diff`] returns a matrix of
//! [`TensorExpr`] that evaluates to a [`MapMatrix`]. Finite differences are
//! provided only as an independent check.

mod ast;
mod diff;
mod parse;

pub use ast::{Expr, TensorExpr};
pub use diff::{diff, diff_tensor, BiTermExpr, BilinearExpr};
pub use parse::{infer_arity, parse_components, parse_expr, parse_tensor_expr};

use serde::Serialize;

use crate::algebra::{Algebra, Tuple};
use crate::error::{Error, Result};
use crate::linmap::BilinearMap;
use crate::mapmatrix::{MapMatrix, MapMatrixJson};

/// `f = f^1 ⊕ ... ⊕ f^m` over input variables `x1..xn`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap {
    alg: Algebra,
    n_in: usize,
    components: Vec<Expr>,
}

impl PolyMap {
    pub fn new(alg: &Algebra, n_in: usize, components: Vec<Expr>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Invalid("a map needs at least one output".into()));
        }
        if let Some(e) = components.iter().find(|e| e.max_var() > n_in) {
            return Err(Error::IndexOutOfRange {
                pos: 0,
                index: e.max_var(),
                max: n_in,
            });
        }
        Ok(PolyMap {
            alg: alg.clone(),
            n_in,
            components,
        })
    }

    pub fn parse(src: &str, n_in: usize, alg: &Algebra) -> Result<Self> {
        let components = parse_components(src, n_in, alg)?;
        Self::new(alg, n_in, components)
    }

    /// Parses with `n_in` inferred from the largest `xN` mentioned (at least 1).
    pub fn parse_infer(src: &str, alg: &Algebra) -> Result<Self> {
        Self::parse(src, infer_arity(src).max(1), alg)
    }

    pub fn identity(alg: &Algebra, n: usize) -> Self {
        PolyMap {
            alg: alg.clone(),
            n_in: n,
            components: (1..=n).map(Expr::Var).collect(),
        }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    fn check_point(&self, x: &Tuple) -> Result<()> {
        if x.len() != self.n_in {
            return Err(Error::ShapeMismatch(format!(
                "map of {} inputs evaluated at a tuple of length {}",
                self.n_in,
                x.len()
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: &Tuple) -> Result<Tuple> {
        self.check_point(x)?;
        self.components
            .iter()
            .map(|c| c.eval(&self.alg, x))
            .collect::<Result<Vec<_>>>()
            .map(Tuple)
    }

    /// Symbolic `n_out x n_in` matrix of partial derivatives.
    pub fn diff(&self) -> Derivative {
        let entries = self
            .components
            .iter()
            .flat_map(|c| (1..=self.n_in).map(move |j| diff(c, j)))
            .collect();
        Derivative {
            n_in: self.n_in,
            n_out: self.n_out(),
            entries,
        }
    }

    pub fn eval_derivative(&self, x: &Tuple) -> Result<MapMatrix> {
        self.check_point(x)?;
        self.diff().eval(&self.alg, x)
    }

    /// Central difference `(f(x+th) - f(x-th)) / 2t` with
    /// `t = eps^(1/3) max(1, |x|)`.
    pub fn fd_directional(&self, x: &Tuple, h: &Tuple) -> Result<Tuple> {
        self.check_point(x)?;
        self.check_point(h)?;
        central_difference(|p| self.eval(p), x, h)
    }

    /// Second partial `∂/∂x^i ∂f/∂x^j` at `x`, one bilinear map per output.
    /// Slot 1 is the direction of `x^i`, slot 2 the argument of `∂f/∂x^j`.
    pub fn second_partial(&self, i: usize, j: usize, x: &Tuple) -> Result<Vec<BilinearMap>> {
        self.check_point(x)?;
        if i == 0 || j == 0 || i > self.n_in || j > self.n_in {
            return Err(Error::IndexOutOfRange {
                pos: 0,
                index: i.max(j),
                max: self.n_in,
            });
        }
        self.components
            .iter()
            .map(|c| diff_tensor(&diff(c, j), i).eval(&self.alg, x))
            .collect()
    }

    /// `self ∘ inner`: substitutes the outputs of `inner` for the inputs of `self`.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap> {
        if inner.n_out() != self.n_in {
            return Err(Error::ShapeMismatch(format!(
                "composing a map of {} inputs with one of {} outputs",
                self.n_in,
                inner.n_out()
            )));
        }
        if self.alg != inner.alg {
            return Err(Error::AlgebraMismatch(
                self.alg.name().into(),
                inner.alg.name().into(),
            ));
        }
        let sub = |i: usize| inner.components[i - 1].clone();
        Ok(PolyMap {
            alg: self.alg.clone(),
            n_in: inner.n_in,
            components: self.components.iter().map(|c| c.substitute(&sub)).collect(),
        })
    }

    /// Linear combination `a * self + other` (same arity).
    pub fn lin_comb(&self, a: f64, other: &PolyMap) -> Result<PolyMap> {
        if (self.n_in, self.n_out()) != (other.n_in, other.n_out()) {
            return Err(Error::ShapeMismatch("maps of different shapes".into()));
        }
        let scale = Expr::Const(self.alg.scalar(a));
        Ok(PolyMap {
            alg: self.alg.clone(),
            n_in: self.n_in,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(s, o)| Expr::Sum(vec![Expr::product([scale.clone(), s.clone()]), o.clone()]))
                .collect(),
        })
    }

    pub fn to_source(&self) -> String {
        self.components
            .iter()
            .enumerate()
            .map(|(k, c)| format!("y{} = {}", k + 1, c))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Block-flat residual of the chain rule `D(g∘f)(x) = Dg(f(x)) ∘° Df(x)`.
pub fn check_chain_rule(g: &PolyMap, f: &PolyMap, x: &Tuple) -> Result<f64> {
    let gf = g.compose(f)?;
    let lhs = gf.eval_derivative(x)?;
    let rhs = g
        .eval_derivative(&f.eval(x)?)?
        .comp_product(&f.eval_derivative(x)?)?;
    Ok(lhs.residual(&rhs))
}

/// FD step used throughout: `eps^(1/3) max(1, scale)`.
pub fn fd_step(scale: f64) -> f64 {
    f64::EPSILON.cbrt() * scale.max(1.0)
}

/// Central difference of an arbitrary tuple-valued function along `h`.
pub fn central_difference(
    f: impl Fn(&Tuple) -> Result<Tuple>,
    x: &Tuple,
    h: &Tuple,
) -> Result<Tuple> {
    let t = fd_step(x.norm());
    let plus = f(&x.axpy(t, h))?;
    let minus = f(&x.axpy(-t, h))?;
    Ok(plus.sub(&minus).scale(0.5 / t))
}

/// Symbolic derivative matrix, row-major `n_out x n_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub n_in: usize,
    pub n_out: usize,
    pub entries: Vec<TensorExpr>,
}

impl Derivative {
    pub fn get(&self, row: usize, col: usize) -> &TensorExpr {
        &self.entries[row * self.n_in + col]
    }

    pub fn eval(&self, alg: &Algebra, x: &Tuple) -> Result<MapMatrix> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.eval(alg, x))
            .collect::<Result<Vec<_>>>()?;
        MapMatrix::new(alg, self.n_out, self.n_in, entries)
    }

    pub fn to_json(&self) -> DerivativeJson {
        DerivativeJson {
            n_in: self.n_in,
            n_out: self.n_out,
            entries: (0..self.n_out)
                .map(|r| {
                    (0..self.n_in)
                        .map(|c| self.get(r, c).source_pairs())
                        .collect()
                })
                .collect(),
            at: None,
        }
    }

    pub fn render(&self) -> Vec<Vec<String>> {
        (0..self.n_out)
            .map(|r| (0..self.n_in).map(|c| self.get(r, c).to_string()).collect())
            .collect()
    }

    /// `\begin{pmatrix} ... \end{pmatrix}` with `a \otimes b` entries.
    pub fn to_latex(&self) -> String {
        let rows: Vec<String> = (0..self.n_out)
            .map(|r| {
                (0..self.n_in)
                    .map(|c| self.get(r, c).to_latex())
                    .collect::<Vec<_>>()
                    .join(" & ")
            })
            .collect();
        format!(
            "\\begin{{pmatrix}} {} \\end{{pmatrix}}",
            rows.join(" \\\\ ")
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivativeJson {
    pub n_in: usize,
    pub n_out: usize,
    pub entries: Vec<Vec<Vec<[String; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<MapMatrixJson>,
}
