//! Exact symbolic differentiation.
//!
//! `d(Var i)/dx^j = δ 1⊗1`; sums termwise; for an ordered product every
//! factor is differentiated in place, so a term `l⊗r` of `d f_s` becomes
//! `(f_1..f_{s-1} l) ⊗ (r f_{s+1}..f_m)`; for `inv(u)` every term `l⊗r` of
//! `du` becomes `(-inv(u) l) ⊗ (r inv(u))`.

use crate::algebra::{Algebra, Tuple};
use crate::error::Result;
use crate::linmap::{BiTerm, BilinearMap, SlotOrder};

use super::ast::{Expr, TensorExpr};

/// Partial derivative of `e` with respect to `x{var}`.
pub fn diff(e: &Expr, var: usize) -> TensorExpr {
    let terms = match e {
        Expr::Const(_) => Vec::new(),
        Expr::Var(i) => {
            if *i == var {
                vec![(Expr::one(), Expr::one())]
            } else {
                Vec::new()
            }
        }
        Expr::Sum(ts) => ts.iter().flat_map(|t| diff(t, var).terms).collect(),
        Expr::Neg(inner) => diff(inner, var)
            .terms
            .into_iter()
            .map(|(l, r)| (Expr::negate(l), r))
            .collect(),
        Expr::Prod(fs) => diff_product(fs, var),
        Expr::Pow(base, n) => {
            let fs = vec![(**base).clone(); *n as usize];
            diff_product(&fs, var)
        }
        Expr::Inv(u) => {
            let inv = e.clone();
            diff(u, var)
                .terms
                .into_iter()
                .map(|(l, r)| {
                    (
                        Expr::negate(Expr::product([inv.clone(), l])),
                        Expr::product([r, inv.clone()]),
                    )
                })
                .collect()
        }
    };
    TensorExpr {
        terms: terms
            .into_iter()
            .filter(|(l, r)| !l.is_zero() && !r.is_zero())
            .collect(),
    }
}

fn diff_product(fs: &[Expr], var: usize) -> Vec<(Expr, Expr)> {
    // Last factor first, so `x x` gives `x⊗1 + 1⊗x`.
    let mut out = Vec::new();
    for (s, f) in fs.iter().enumerate().rev() {
        if !f.depends_on(var) {
            continue;
        }
        let df = diff(f, var);
        if df.is_zero() {
            continue;
        }
        let prefix = Expr::product(fs[..s].iter().cloned());
        let suffix = Expr::product(fs[s + 1..].iter().cloned());
        for (l, r) in df.terms {
            out.push((
                Expr::product([prefix.clone(), l]),
                Expr::product([r, suffix.clone()]),
            ));
        }
    }
    out
}

/// Symbolic bilinear term `(x, y) -> p x q y r` (or `p y q x r`).
#[derive(Debug, Clone, PartialEq)]
pub struct BiTermExpr {
    pub p: Expr,
    pub q: Expr,
    pub r: Expr,
    pub order: SlotOrder,
}

/// Sum of symbolic bilinear terms; the first slot is the derivative direction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BilinearExpr {
    pub terms: Vec<BiTermExpr>,
}

impl BilinearExpr {
    pub fn eval(&self, alg: &Algebra, x: &Tuple) -> Result<BilinearMap> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(BiTerm {
                    p: t.p.eval(alg, x)?,
                    q: t.q.eval(alg, x)?,
                    r: t.r.eval(alg, x)?,
                    order: t.order,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BilinearMap::from_terms(alg, terms))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Derivative of a tensor-map-valued expression with respect to `x{var}`.
///
/// For a term `y -> L y R` the derivative in direction `h` is
/// `dL[h] y R + L y dR[h]`; the first becomes `XY` terms `(l', r', R)` and
/// the second `YX` terms `(L, l'', r'')`.
pub fn diff_tensor(te: &TensorExpr, var: usize) -> BilinearExpr {
    let mut terms = Vec::new();
    for (big_l, big_r) in &te.terms {
        for (l, r) in diff(big_l, var).terms {
            terms.push(BiTermExpr {
                p: l,
                q: r,
                r: big_r.clone(),
                order: SlotOrder::XY,
            });
        }
        for (l, r) in diff(big_r, var).terms {
            terms.push(BiTermExpr {
                p: big_l.clone(),
                q: l,
                r,
                order: SlotOrder::YX,
            });
        }
    }
    BilinearExpr { terms }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linmap::TensorMap;
    use crate::ncexpr::parse::parse_expr;

    fn h() -> Algebra {
        Algebra::quaternion()
    }

    #[test]
    fn var_and_const() {
        let alg = h();
        assert_eq!(diff(&Expr::Var(1), 1), TensorExpr::identity());
        assert!(diff(&Expr::Var(2), 1).is_zero());
        assert!(diff(&Expr::Const(alg.basis(1)), 1).is_zero());
    }

    #[test]
    fn absent_variable_gives_empty_terms() {
        let e = parse_expr("x1*x2*i + x2^3", 3, &h()).unwrap();
        assert!(diff(&e, 3).terms.is_empty());
    }

    #[test]
    fn product_rule_structure() {
        let e = parse_expr("x1*x1 + x2*x3", 3, &h()).unwrap();
        assert_eq!(diff(&e, 1).to_string(), "x1⊗1 + 1⊗x1");
        assert_eq!(diff(&e, 2).to_string(), "1⊗x3");
        assert_eq!(diff(&e, 3).to_string(), "x2⊗1");
    }

    #[test]
    fn inverse_rule_at_i() {
        // d(inv x)/dx at x = i applied to j: -(-i) j (-i) = -j
        let alg = h();
        let d = diff(&Expr::inv(Expr::Var(1)), 1);
        let t = d.eval(&alg, &Tuple(vec![alg.basis(1)])).unwrap();
        let out = t.apply(&alg.basis(2)).unwrap();
        assert!(out.max_abs_diff(&-&alg.basis(2)) < 1e-15);
    }

    #[test]
    fn second_derivative_of_square() {
        let alg = h();
        let e = parse_expr("x1^2", 1, &alg).unwrap();
        let b = diff_tensor(&diff(&e, 1), 1);
        let x = Tuple(vec![alg.element(vec![0.3, 0.1, -0.7, 2.0]).unwrap()]);
        let bm = b.eval(&alg, &x).unwrap();
        let prod = BilinearMap::product(&alg);
        assert!(bm.approx_eq(&prod.add(&prod.swap_slots()), 1e-14));
        assert!(diff_tensor(&diff(&Expr::Var(1), 1), 1).is_zero());
    }

    #[test]
    fn identity_tensor_value() {
        let alg = h();
        let t = TensorExpr::identity().eval(&alg, &Tuple(vec![])).unwrap();
        assert!(t.approx_eq(&TensorMap::identity(&alg), 0.0));
    }
}
