//! Linear and bilinear maps on an algebra.
//!
//! A [`TensorMap`] is `h -> sum_s l_s h r_s`, the value type of first
//! derivatives. A [`BilinearMap`] is a sum of `p x q y r` / `p y q x r`
//! terms, the value type of second derivatives and structure constants.
//! Term lists are not unique, so equality always goes through the flattened
//! real forms: a `d x d` matrix for tensor maps and a `d x d x d` array for
//! bilinear maps.
//!
//! Bilinear slot convention: the first argument is the derivative direction,
//! the second the argument of the differentiated map.

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::{is_singular, singular_values, Algebra, Element};
use crate::error::{Error, Result};

/// Entrywise tolerance used by `==`-style checks on flats.
pub const FLAT_TOL: f64 = 1e-12;

#[derive(Clone)]
pub struct TensorMap {
    alg: Algebra,
    terms: Vec<(Element, Element)>,
    flat: DMatrix<f64>,
    numeric: bool,
}

impl TensorMap {
    /// Single term `h -> u h v`.
    pub fn tensor(u: &Element, v: &Element) -> Result<Self> {
        u.same_algebra(v)?;
        Ok(Self::from_terms(u.algebra(), vec![(u.clone(), v.clone())]))
    }

    pub fn from_terms(alg: &Algebra, terms: Vec<(Element, Element)>) -> Self {
        let d = alg.dim();
        let mut flat = DMatrix::zeros(d, d);
        for (l, r) in &terms {
            flat += alg.left_matrix(l) * alg.right_matrix(r);
        }
        TensorMap {
            alg: alg.clone(),
            terms,
            flat,
            numeric: false,
        }
    }

    /// Map known only through its matrix; displayed as "numeric".
    pub fn from_flat(alg: &Algebra, flat: DMatrix<f64>) -> Result<Self> {
        let d = alg.dim();
        if flat.shape() != (d, d) {
            return Err(Error::ShapeMismatch(format!(
                "flat of shape {:?} for dimension {d}",
                flat.shape()
            )));
        }
        Ok(TensorMap {
            alg: alg.clone(),
            terms: Vec::new(),
            flat,
            numeric: true,
        })
    }

    pub fn zero(alg: &Algebra) -> Self {
        TensorMap {
            alg: alg.clone(),
            terms: Vec::new(),
            flat: DMatrix::zeros(alg.dim(), alg.dim()),
            numeric: false,
        }
    }

    /// `1 ⊗ 1`
    pub fn identity(alg: &Algebra) -> Self {
        Self::from_terms(alg, vec![(alg.one(), alg.one())])
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn terms(&self) -> &[(Element, Element)] {
        &self.terms
    }

    pub fn flat(&self) -> &DMatrix<f64> {
        &self.flat
    }

    pub fn is_numeric(&self) -> bool {
        self.numeric
    }

    fn check(&self, other: &Algebra) -> Result<()> {
        if &self.alg == other {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch(
                self.alg.name().into(),
                other.name().into(),
            ))
        }
    }

    pub fn apply(&self, h: &Element) -> Result<Element> {
        self.check(h.algebra())?;
        Ok(self.apply_unchecked(h))
    }

    pub(crate) fn apply_unchecked(&self, h: &Element) -> Element {
        Element::from_vector(&self.alg, &(&self.flat * h.to_vector()))
    }

    /// `(self ∘ other)(h) = self(other(h))`; termwise `(a⊗b)∘(c⊗d) = (ac)⊗(db)`.
    pub fn compose(&self, other: &TensorMap) -> Result<TensorMap> {
        self.check(other.algebra())?;
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &TensorMap) -> TensorMap {
        let flat = &self.flat * &other.flat;
        if self.numeric || other.numeric {
            return TensorMap {
                alg: self.alg.clone(),
                terms: Vec::new(),
                flat,
                numeric: true,
            };
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, b) in &self.terms {
            for (c, dd) in &other.terms {
                terms.push((a * c, dd * b));
            }
        }
        TensorMap {
            alg: self.alg.clone(),
            terms,
            flat,
            numeric: false,
        }
    }

    pub fn add(&self, other: &TensorMap) -> Result<TensorMap> {
        self.check(other.algebra())?;
        Ok(self.add_unchecked(other))
    }

    pub(crate) fn add_unchecked(&self, other: &TensorMap) -> TensorMap {
        let numeric = self.numeric || other.numeric;
        TensorMap {
            alg: self.alg.clone(),
            terms: if numeric {
                Vec::new()
            } else {
                self.terms.iter().chain(&other.terms).cloned().collect()
            },
            flat: &self.flat + &other.flat,
            numeric,
        }
    }

    pub fn scale(&self, s: f64) -> TensorMap {
        TensorMap {
            alg: self.alg.clone(),
            terms: self
                .terms
                .iter()
                .map(|(l, r)| (l.scale(s), r.clone()))
                .collect(),
            flat: &self.flat * s,
            numeric: self.numeric,
        }
    }

    pub fn neg(&self) -> TensorMap {
        self.scale(-1.0)
    }

    /// Inverse map; single-term maps invert termwise to `a⁻¹ ⊗ b⁻¹`.
    pub fn invert(&self) -> Result<TensorMap> {
        if is_singular(&self.flat) {
            return Err(Error::SingularMap);
        }
        if let [(a, b)] = self.terms.as_slice() {
            if let (Ok(ai), Ok(bi)) = (a.inv(), b.inv()) {
                return Ok(Self::from_terms(&self.alg, vec![(ai, bi)]));
            }
        }
        let inv = self.flat.clone().try_inverse().ok_or(Error::SingularMap)?;
        Self::from_flat(&self.alg, inv)
    }

    /// Operator norm with respect to the Euclidean coordinate norm.
    pub fn op_norm(&self) -> f64 {
        singular_values(&self.flat).into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &TensorMap) -> f64 {
        (&self.flat - &other.flat).amax()
    }

    pub fn approx_eq(&self, other: &TensorMap, tol: f64) -> bool {
        self.alg == other.alg && self.max_abs_diff(other) <= tol
    }

    /// Display form; flat-only maps render as `numeric`.
    pub fn render(&self) -> String {
        if self.numeric {
            return "numeric".into();
        }
        if self.terms.is_empty() {
            return "0⊗0".into();
        }
        self.terms
            .iter()
            .map(|(l, r)| format!("{}⊗{}", paren(l), paren(r)))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn to_json(&self) -> TensorMapJson {
        TensorMapJson {
            terms: self
                .terms
                .iter()
                .map(|(l, r)| [l.coords().to_vec(), r.coords().to_vec()])
                .collect(),
            flat: row_major(&self.flat),
            numeric: self.numeric,
        }
    }
}

fn paren(e: &Element) -> String {
    let s = e.to_string();
    if s.contains(' ') {
        format!("({s})")
    } else {
        s
    }
}

pub(crate) fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push(m[(r, c)]);
        }
    }
    out
}

impl fmt::Debug for TensorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TensorMap[{}]", self.render())
    }
}

impl fmt::Display for TensorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TensorMapJson {
    pub terms: Vec<[Vec<f64>; 2]>,
    pub flat: Vec<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub numeric: bool,
}

/// Argument order inside a bilinear term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SlotOrder {
    /// `(x, y) -> p x q y r`
    XY,
    /// `(x, y) -> p y q x r`
    YX,
}

#[derive(Debug, Clone)]
pub struct BiTerm {
    pub p: Element,
    pub q: Element,
    pub r: Element,
    pub order: SlotOrder,
}

impl BiTerm {
    fn eval(&self, x: &Element, y: &Element) -> Element {
        let (first, second) = match self.order {
            SlotOrder::XY => (x, y),
            SlotOrder::YX => (y, x),
        };
        &(&(&(&self.p * first) * &self.q) * second) * &self.r
    }
}

#[derive(Clone)]
pub struct BilinearMap {
    alg: Algebra,
    terms: Vec<BiTerm>,
    /// Indexed `[k][i][j]`: coordinate `k` of `B(e_i, e_j)`.
    flat3: Vec<f64>,
    numeric: bool,
}

impl BilinearMap {
    pub fn from_terms(alg: &Algebra, terms: Vec<BiTerm>) -> Self {
        let d = alg.dim();
        let mut flat3 = vec![0.0; d * d * d];
        for i in 0..d {
            let ei = alg.basis(i);
            for j in 0..d {
                let ej = alg.basis(j);
                for t in &terms {
                    let v = t.eval(&ei, &ej);
                    for (k, c) in v.coords().iter().enumerate() {
                        flat3[(k * d + i) * d + j] += c;
                    }
                }
            }
        }
        BilinearMap {
            alg: alg.clone(),
            terms,
            flat3,
            numeric: false,
        }
    }

    pub fn from_flat3(alg: &Algebra, flat3: Vec<f64>) -> Result<Self> {
        let d = alg.dim();
        if flat3.len() != d * d * d {
            return Err(Error::ShapeMismatch(format!(
                "flat3 of length {} for dimension {d}",
                flat3.len()
            )));
        }
        Ok(BilinearMap {
            alg: alg.clone(),
            terms: Vec::new(),
            flat3,
            numeric: true,
        })
    }

    pub fn zero(alg: &Algebra) -> Self {
        let d = alg.dim();
        BilinearMap {
            alg: alg.clone(),
            terms: Vec::new(),
            flat3: vec![0.0; d * d * d],
            numeric: false,
        }
    }

    /// `(x, y) -> x y`
    pub fn product(alg: &Algebra) -> Self {
        let one = alg.one();
        Self::from_terms(
            alg,
            vec![BiTerm {
                p: one.clone(),
                q: one.clone(),
                r: one,
                order: SlotOrder::XY,
            }],
        )
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn terms(&self) -> &[BiTerm] {
        &self.terms
    }

    pub fn is_numeric(&self) -> bool {
        self.numeric
    }

    pub fn flatten3(&self) -> &[f64] {
        &self.flat3
    }

    pub fn apply2(&self, x: &Element, y: &Element) -> Result<Element> {
        x.same_algebra(y)?;
        if x.algebra() != &self.alg {
            return Err(Error::AlgebraMismatch(
                self.alg.name().into(),
                x.algebra().name().into(),
            ));
        }
        Ok(self.apply2_unchecked(x, y))
    }

    pub(crate) fn apply2_unchecked(&self, x: &Element, y: &Element) -> Element {
        let d = self.alg.dim();
        let (xc, yc) = (x.coords(), y.coords());
        let mut out = vec![0.0; d];
        for (k, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for (i, xi) in xc.iter().enumerate() {
                if *xi == 0.0 {
                    continue;
                }
                let row = &self.flat3[(k * d + i) * d..(k * d + i + 1) * d];
                s += xi * row.iter().zip(yc).map(|(b, y)| b * y).sum::<f64>();
            }
            *o = s;
        }
        self.alg.element(out).expect("dimension matches")
    }

    /// `(x, y) -> B(y, x)`
    pub fn swap_slots(&self) -> BilinearMap {
        let d = self.alg.dim();
        let mut flat3 = vec![0.0; d * d * d];
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    flat3[(k * d + i) * d + j] = self.flat3[(k * d + j) * d + i];
                }
            }
        }
        let terms = self
            .terms
            .iter()
            .map(|t| BiTerm {
                order: match t.order {
                    SlotOrder::XY => SlotOrder::YX,
                    SlotOrder::YX => SlotOrder::XY,
                },
                ..t.clone()
            })
            .collect();
        BilinearMap {
            alg: self.alg.clone(),
            terms,
            flat3,
            numeric: self.numeric,
        }
    }

    /// Fixes the direction slot: `y -> B(x, y)`.
    pub fn contract_first(&self, x: &Element) -> TensorMap {
        let d = self.alg.dim();
        let xc = x.coords();
        let flat = DMatrix::from_fn(d, d, |k, j| {
            (0..d)
                .map(|i| xc[i] * self.flat3[(k * d + i) * d + j])
                .sum()
        });
        TensorMap::from_flat(&self.alg, flat).expect("dimension matches")
    }

    pub fn add(&self, other: &BilinearMap) -> BilinearMap {
        let numeric = self.numeric || other.numeric;
        BilinearMap {
            alg: self.alg.clone(),
            terms: if numeric {
                Vec::new()
            } else {
                self.terms.iter().chain(&other.terms).cloned().collect()
            },
            flat3: self
                .flat3
                .iter()
                .zip(&other.flat3)
                .map(|(a, b)| a + b)
                .collect(),
            numeric,
        }
    }

    pub fn scale(&self, s: f64) -> BilinearMap {
        BilinearMap {
            alg: self.alg.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| BiTerm {
                    p: t.p.scale(s),
                    ..t.clone()
                })
                .collect(),
            flat3: self.flat3.iter().map(|v| v * s).collect(),
            numeric: self.numeric,
        }
    }

    pub fn sub(&self, other: &BilinearMap) -> BilinearMap {
        self.add(&other.scale(-1.0))
    }

    pub fn max_abs_diff(&self, other: &BilinearMap) -> f64 {
        self.flat3
            .iter()
            .zip(&other.flat3)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Euclidean norm of the flattened array.
    pub fn flat_norm(&self) -> f64 {
        self.flat3.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn approx_eq(&self, other: &BilinearMap, tol: f64) -> bool {
        self.alg == other.alg && self.max_abs_diff(other) <= tol
    }

    /// Display form. Flat-only maps are listed on basis pairs as
    /// `(e_i, e_j) -> B(e_i, e_j)`, rounded to 9 decimals.
    pub fn render(&self) -> String {
        if (!self.numeric && self.terms.is_empty()) || self.flat3.iter().all(|v| *v == 0.0) {
            return "0".into();
        }
        if self.numeric {
            let d = self.alg.dim();
            let names = self.alg.basis_names();
            let parts: Vec<String> = (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .filter_map(|(i, j)| {
                    let v = self
                        .apply2_unchecked(&self.alg.basis(i), &self.alg.basis(j))
                        .rounded(9);
                    (!v.is_zero()).then(|| format!("({}, {}) -> {v}", names[i], names[j]))
                })
                .collect();
            return if parts.is_empty() {
                "0".into()
            } else {
                parts.join("; ")
            };
        }
        self.terms
            .iter()
            .map(|t| {
                let (a, b) = match t.order {
                    SlotOrder::XY => ("h₁", "h₂"),
                    SlotOrder::YX => ("h₂", "h₁"),
                };
                format!("({}){a}({}){b}({})", t.p, t.q, t.r)
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn to_json(&self) -> BilinearMapJson {
        BilinearMapJson {
            flat3: self.flat3.clone(),
        }
    }
}

impl fmt::Debug for BilinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BilinearMap[{}]", self.render())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BilinearMapJson {
    pub flat3: Vec<f64>,
}
