//! Vector fields on a single chart `A^n`, the Lie derivative, the field
//! commutator, and the anholonomy object of a frame.

use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, Tuple};
use crate::error::{Error, Result};
use crate::linmap::{BilinearMap, BilinearMapJson, TensorMap};
use crate::mapmatrix::MapMatrix;
use crate::ncexpr::{diff_tensor, parse_tensor_expr, Expr, PolyMap, TensorExpr};

/// Tolerance for the commutation flag of [`field_commutator`].
pub const COMMUTE_TOL: f64 = 1e-10;

/// `v = v^i ∂/∂x^i` with polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    coeffs: PolyMap,
}

impl VectorField {
    pub fn new(coeffs: PolyMap) -> Result<Self> {
        if coeffs.n_in() != coeffs.n_out() {
            return Err(Error::ShapeMismatch(format!(
                "vector field on a chart of dimension {} has {} coefficients",
                coeffs.n_in(),
                coeffs.n_out()
            )));
        }
        Ok(VectorField { coeffs })
    }

    pub fn parse(src: &str, n: usize, alg: &Algebra) -> Result<Self> {
        Self::new(PolyMap::parse(src, n, alg)?)
    }

    pub fn from_exprs(alg: &Algebra, coeffs: Vec<Expr>) -> Result<Self> {
        let n = coeffs.len();
        Self::new(PolyMap::new(alg, n, coeffs)?)
    }

    /// Constant field `v ≡ c`.
    pub fn constant(c: &Tuple) -> Result<Self> {
        let alg = c
            .components()
            .first()
            .map(|e| e.algebra().clone())
            .ok_or_else(|| Error::Invalid("empty tuple".into()))?;
        Self::from_exprs(
            &alg,
            c.components().iter().cloned().map(Expr::Const).collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.coeffs.n_in()
    }

    pub fn algebra(&self) -> &Algebra {
        self.coeffs.algebra()
    }

    pub fn coeffs(&self) -> &PolyMap {
        &self.coeffs
    }

    pub fn eval(&self, x: &Tuple) -> Result<Tuple> {
        self.coeffs.eval(x)
    }

    pub fn jacobian(&self, x: &Tuple) -> Result<MapMatrix> {
        self.coeffs.eval_derivative(x)
    }

    /// `a v + w`.
    pub fn lin_comb(&self, a: f64, w: &VectorField) -> Result<VectorField> {
        Self::new(self.coeffs.lin_comb(a, &w.coeffs)?)
    }
}

fn check_pair(v: &VectorField, w: &VectorField) -> Result<()> {
    if v.n() != w.n() {
        return Err(Error::ShapeMismatch(format!(
            "fields on charts of dimension {} and {}",
            v.n(),
            w.n()
        )));
    }
    if v.algebra() != w.algebra() {
        return Err(Error::AlgebraMismatch(
            v.algebra().name().into(),
            w.algebra().name().into(),
        ));
    }
    Ok(())
}

/// `(L_v w)^k = ∂w^k/∂x^l ∘ v^l - ∂v^k/∂x^l ∘ w^l` at `x`.
pub fn lie_derivative(v: &VectorField, w: &VectorField, x: &Tuple) -> Result<Tuple> {
    check_pair(v, w)?;
    let dw_v = w.jacobian(x)?.apply_col(&v.eval(x)?)?;
    let dv_w = v.jacobian(x)?.apply_col(&w.eval(x)?)?;
    Ok(dw_v.sub(&dv_w))
}

/// Lie derivative for fields given as closures, with central differences.
pub fn lie_derivative_fd(
    v: impl Fn(&Tuple) -> Result<Tuple>,
    w: impl Fn(&Tuple) -> Result<Tuple>,
    x: &Tuple,
) -> Result<Tuple> {
    let vx = v(x)?;
    let wx = w(x)?;
    let dw_v = crate::ncexpr::central_difference(&w, x, &vx)?;
    let dv_w = crate::ncexpr::central_difference(&v, x, &wx)?;
    Ok(dw_v.sub(&dv_w))
}

/// Commutator of fields with the factors in the order `v^j ∂w^i/∂x^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Commutator {
    pub value: Tuple,
    /// Whether `v^j w^i = w^i v^j` for all `i, j` at the point.
    pub condition_ok: bool,
}

/// Component `i` is `v^j (∂w^i/∂x^j)(1) - w^j (∂v^i/∂x^j)(1)`.
///
/// This agrees with [`lie_derivative`] whenever the coefficient values and
/// the derivative maps all commute, but the flag only checks the
/// coefficient values: `v ≡ i`, `w = x²` at `x = j` sets the flag and still
/// gives `2k` against a Lie derivative of `0`.
pub fn field_commutator(v: &VectorField, w: &VectorField, x: &Tuple) -> Result<Commutator> {
    check_pair(v, w)?;
    let alg = v.algebra();
    let one = alg.one();
    let vx = v.eval(x)?;
    let wx = w.eval(x)?;
    let dv = v.jacobian(x)?;
    let dw = w.jacobian(x)?;
    let n = v.n();
    let value = (0..n)
        .map(|i| {
            (0..n).fold(alg.zero(), |acc, j| {
                let a = &vx.components()[j] * &dw.get(i, j).apply(&one).expect("same algebra");
                let b = &wx.components()[j] * &dv.get(i, j).apply(&one).expect("same algebra");
                &acc + &(&a - &b)
            })
        })
        .collect();
    let condition_ok = vx.components().iter().all(|vj| {
        wx.components()
            .iter()
            .all(|wi| vj.commutes_with(wi, COMMUTE_TOL))
    });
    Ok(Commutator {
        value: Tuple(value),
        condition_ok,
    })
}

/// Frame `e_k = e_k^l ∘ ∂/∂x^l`; `entries[k][l] = e_k^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    alg: Algebra,
    n: usize,
    entries: Vec<Vec<TensorExpr>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameSource {
    pub n: usize,
    pub entries: Vec<Vec<String>>,
}

impl Frame {
    pub fn new(alg: &Algebra, entries: Vec<Vec<TensorExpr>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|row| row.len() != n) {
            return Err(Error::ShapeMismatch(
                "frame must be a square n x n array".into(),
            ));
        }
        if let Some(m) = entries.iter().flatten().map(TensorExpr::max_var).max() {
            if m > n {
                return Err(Error::IndexOutOfRange {
                    pos: 0,
                    index: m,
                    max: n,
                });
            }
        }
        Ok(Frame {
            alg: alg.clone(),
            n,
            entries,
        })
    }

    /// Coordinate frame `e_k^l = δ_k^l 1⊗1`.
    pub fn coordinate(alg: &Algebra, n: usize) -> Self {
        let entries = (0..n)
            .map(|k| {
                (0..n)
                    .map(|l| {
                        if k == l {
                            TensorExpr::identity()
                        } else {
                            TensorExpr::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Frame {
            alg: alg.clone(),
            n,
            entries,
        }
    }

    pub fn from_source(src: &FrameSource, alg: &Algebra) -> Result<Self> {
        if src.entries.len() != src.n {
            return Err(Error::ShapeMismatch(format!(
                "frame declares n = {} but has {} rows",
                src.n,
                src.entries.len()
            )));
        }
        let entries = src
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| parse_tensor_expr(s, src.n, alg))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(alg, entries)
    }

    pub fn from_json(json: &str, alg: &Algebra) -> Result<Self> {
        let src: FrameSource =
            serde_json::from_str(json).map_err(|e| Error::Invalid(format!("frame JSON: {e}")))?;
        Self::from_source(&src, alg)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn entry(&self, k: usize, l: usize) -> &TensorExpr {
        &self.entries[k][l]
    }

    pub fn eval(&self, x: &Tuple) -> Result<MapMatrix> {
        let maps = self
            .entries
            .iter()
            .flatten()
            .map(|e| e.eval(&self.alg, x))
            .collect::<Result<Vec<_>>>()?;
        MapMatrix::new(&self.alg, self.n, self.n, maps)
    }
}

/// `ω^i_{kl}` for all `i, k, l`, each a bilinear map whose first slot is the
/// direction of the differentiating coordinate.
#[derive(Debug, Clone)]
pub struct Anholonomy {
    n: usize,
    entries: Vec<BilinearMap>,
}

impl Anholonomy {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `ω^i_{kl}` (zero-based indices).
    pub fn get(&self, i: usize, k: usize, l: usize) -> &BilinearMap {
        &self.entries[(i * self.n + k) * self.n + l]
    }

    /// `ω^i_{kl}` with the direction slot fixed to `h`.
    pub fn contracted(
        &self,
        i: usize,
        k: usize,
        l: usize,
        h: &crate::algebra::Element,
    ) -> TensorMap {
        self.get(i, k, l).contract_first(h)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|b| b.flatten3().iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_json(&self) -> AnholonomyJson {
        AnholonomyJson {
            n: self.n,
            omega: (0..self.n)
                .map(|i| {
                    (0..self.n)
                        .map(|k| (0..self.n).map(|l| self.get(i, k, l).to_json()).collect())
                        .collect()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnholonomyJson {
    pub n: usize,
    /// `omega[i][k][l]`
    pub omega: Vec<Vec<Vec<BilinearMapJson>>>,
}

/// `ω^i_{kl} = ∂e_k^i/∂x^l - ∂e_l^i/∂x^k` at `x`, without contraction
/// against the frame.
pub fn anholonomy(frame: &Frame, x: &Tuple) -> Result<Anholonomy> {
    if x.len() != frame.n {
        return Err(Error::ShapeMismatch(format!(
            "frame of dimension {} evaluated at a tuple of length {}",
            frame.n,
            x.len()
        )));
    }
    let n = frame.n;
    let alg = &frame.alg;
    let partial =
        |k: usize, i: usize, l: usize| diff_tensor(&frame.entries[k][i], l + 1).eval(alg, x);
    let mut entries = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for k in 0..n {
            for l in 0..n {
                let a = partial(k, i, l)?;
                let b = partial(l, i, k)?;
                entries.push(a.sub(&b));
            }
        }
    }
    Ok(Anholonomy { n, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_element, random_tuple, rng};

    fn h() -> Algebra {
        Algebra::quaternion()
    }

    fn point(alg: &Algebra, n: usize, seed: u64) -> Tuple {
        random_tuple(alg, n, &mut rng(seed))
    }

    #[test]
    fn lie_derivative_of_field_with_itself() {
        let alg = h();
        let v = VectorField::parse("y1 = x1*x2 + i; y2 = x2*x2*j - x1", 2, &alg).unwrap();
        let x = point(&alg, 2, 1);
        assert!(lie_derivative(&v, &v, &x).unwrap().norm() < 1e-15);
    }

    #[test]
    fn constant_fields_commute() {
        let alg = h();
        let v = VectorField::parse("y1 = i; y2 = 2", 2, &alg).unwrap();
        let w = VectorField::parse("y1 = j; y2 = k", 2, &alg).unwrap();
        let x = point(&alg, 2, 2);
        assert!(lie_derivative(&v, &w, &x).unwrap().norm() == 0.0);
    }

    #[test]
    fn identity_against_constant() {
        let alg = h();
        let v = VectorField::parse("y1 = x1", 1, &alg).unwrap();
        let w = VectorField::parse("y1 = q(0.5, 1, -2, 3)", 1, &alg).unwrap();
        let x = point(&alg, 1, 3);
        let l = lie_derivative(&v, &w, &x).unwrap();
        let c = alg.element(vec![0.5, 1.0, -2.0, 3.0]).unwrap();
        assert!(l.components()[0].dist(&-&c) < 1e-15);
    }

    #[test]
    fn lie_derivative_matches_fd() {
        let alg = h();
        let v = VectorField::parse("y1 = x1*x2*i + x2; y2 = inv(x1) + k*x2*x2", 2, &alg).unwrap();
        let w = VectorField::parse("y1 = x2*x1 - j; y2 = x1*x1*x1", 2, &alg).unwrap();
        let mut r = rng(4);
        for _ in 0..5 {
            let x = random_tuple(&alg, 2, &mut r);
            let sym = lie_derivative(&v, &w, &x).unwrap();
            let fd = lie_derivative_fd(|p| v.eval(p), |p| w.eval(p), &x).unwrap();
            assert!(sym.dist(&fd) < 1e-6 * sym.norm().max(1.0));
        }
    }

    #[test]
    fn lie_derivative_is_bilinear() {
        let alg = h();
        let v1 = VectorField::parse("y1 = x1*x2; y2 = i*x1", 2, &alg).unwrap();
        let v2 = VectorField::parse("y1 = x2*x2*k; y2 = x1 + 1", 2, &alg).unwrap();
        let w = VectorField::parse("y1 = x2*j*x1; y2 = x2*x2", 2, &alg).unwrap();
        let x = point(&alg, 2, 5);
        let comb = v1.lin_comb(-1.5, &v2).unwrap();
        let lhs = lie_derivative(&comb, &w, &x).unwrap();
        let rhs = lie_derivative(&v1, &w, &x)
            .unwrap()
            .scale(-1.5)
            .add(&lie_derivative(&v2, &w, &x).unwrap());
        assert!(lhs.dist(&rhs) < 1e-12);
        let lhs = lie_derivative(&w, &comb, &x).unwrap();
        let rhs = lie_derivative(&w, &v1, &x)
            .unwrap()
            .scale(-1.5)
            .add(&lie_derivative(&w, &v2, &x).unwrap());
        assert!(lhs.dist(&rhs) < 1e-12);
    }

    #[test]
    fn commutator_of_field_with_itself() {
        let alg = h();
        let v = VectorField::parse("y1 = x1*x2 + i; y2 = x2*j", 2, &alg).unwrap();
        let c = field_commutator(&v, &v, &point(&alg, 2, 6)).unwrap();
        assert!(c.value.norm() < 1e-15);
    }

    #[test]
    fn witness_constant_i_j() {
        let alg = h();
        let v = VectorField::parse("y1 = i", 1, &alg).unwrap();
        let w = VectorField::parse("y1 = j", 1, &alg).unwrap();
        let c = field_commutator(&v, &w, &point(&alg, 1, 7)).unwrap();
        assert!(c.value.norm() == 0.0);
        assert!(!c.condition_ok);
    }

    #[test]
    fn real_coefficients_match_lie_derivative() {
        let alg = h();
        let v = VectorField::parse("y1 = 2*x1*x1 - x2; y2 = x1*x2 + 3", 2, &alg).unwrap();
        let w = VectorField::parse("y1 = x2*x2*x2; y2 = 0.5*x1 - x2*x1", 2, &alg).unwrap();
        let x = Tuple(vec![alg.scalar(0.3), alg.scalar(-1.2)]);
        let c = field_commutator(&v, &w, &x).unwrap();
        assert!(c.condition_ok);
        assert!(c.value.dist(&lie_derivative(&v, &w, &x).unwrap()) < 1e-10);
    }

    #[test]
    fn flag_does_not_force_agreement() {
        let alg = h();
        let v = VectorField::parse("y1 = i", 1, &alg).unwrap();
        let w = VectorField::parse("y1 = x1*x1", 1, &alg).unwrap();
        let x = Tuple(vec![alg.basis(2)]);
        let c = field_commutator(&v, &w, &x).unwrap();
        assert!(c.condition_ok);
        assert!(c.value.components()[0].dist(&alg.basis(3).scale(2.0)) < 1e-15);
        assert!(lie_derivative(&v, &w, &x).unwrap().norm() < 1e-15);
    }

    #[test]
    fn coordinate_frame_has_zero_anholonomy() {
        let alg = h();
        let om = anholonomy(&Frame::coordinate(&alg, 3), &point(&alg, 3, 8)).unwrap();
        assert_eq!(om.max_abs(), 0.0);
        assert!(om
            .contracted(0, 1, 2, &alg.one())
            .approx_eq(&TensorMap::zero(&alg), 0.0));
    }

    #[test]
    fn one_dimensional_frame_has_zero_anholonomy() {
        let alg = h();
        let f = Frame::from_json(
            r#"{"n": 1, "entries": [["x1*i ⊗ x1 + 1 ⊗ inv(x1)"]]}"#,
            &alg,
        )
        .unwrap();
        let om = anholonomy(&f, &point(&alg, 1, 9)).unwrap();
        assert_eq!(om.max_abs(), 0.0);
    }

    #[test]
    fn anholonomy_is_antisymmetric() {
        let alg = h();
        let f = Frame::from_json(
            r#"{"n": 2, "entries": [["x1*x2 ⊗ j", "x2 ⊗ x1"], ["0", "1 ⊗ x1*x1 + k ⊗ x2"]]}"#,
            &alg,
        )
        .unwrap();
        let om = anholonomy(&f, &point(&alg, 2, 10)).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let s = om.get(i, k, l).add(om.get(i, l, k));
                    assert_eq!(s.flat_norm(), 0.0);
                }
            }
        }
        assert!(om.max_abs() > 0.1);
    }

    #[test]
    fn anholonomy_matches_fd() {
        // e_1^1 = x1⊗1 and identity elsewhere on the diagonal
        let alg = h();
        let f = Frame::from_json(
            r#"{"n": 2, "entries": [["x1 ⊗ 1 + x2 ⊗ x2", "0"], ["0", "1 ⊗ 1"]]}"#,
            &alg,
        )
        .unwrap();
        let mut r = rng(11);
        let x = random_tuple(&alg, 2, &mut r);
        let om = anholonomy(&f, &x).unwrap();
        let hdir = random_element(&alg, &mut r);
        let y = random_element(&alg, &mut r);
        // ∂e_k^i/∂x^l [h](y) by differences of the evaluated frame
        let fd_partial = |k: usize, i: usize, l: usize| {
            let mut dir = Tuple::zeros(&alg, 2);
            dir.0[l] = hdir.clone();
            let g = |p: &Tuple| -> Result<Tuple> {
                Ok(Tuple(vec![f.entry(k, i).eval(&alg, p)?.apply(&y)?]))
            };
            crate::ncexpr::central_difference(g, &x, &dir)
                .unwrap()
                .components()[0]
                .clone()
        };
        for i in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let fd = &fd_partial(k, i, l) - &fd_partial(l, i, k);
                    let sym = om.get(i, k, l).apply2(&hdir, &y).unwrap();
                    assert!(fd.dist(&sym) < 1e-6, "{i}{k}{l}");
                }
            }
        }
        assert!(om.get(0, 0, 1).flat_norm() > 0.1);
    }

    #[test]
    fn frame_json_errors() {
        let alg = h();
        assert!(Frame::from_json(r#"{"n": 2, "entries": [["1 ⊗ 1"]]}"#, &alg).is_err());
        assert!(matches!(
            Frame::from_json(r#"{"n": 1, "entries": [["x2 ⊗ 1"]]}"#, &alg),
            Err(Error::IndexOutOfRange { .. })
        ));
    }
}
