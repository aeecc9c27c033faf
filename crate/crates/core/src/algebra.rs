//! Finite-dimensional associative unital algebras over the reals.
//!
//! An algebra is given by its structure constants over a fixed basis:
//! `e_i * e_j = sum_k table[i][j][k] e_k`. Elements are coordinate vectors
//! over that basis and carry a cheap handle to their algebra.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold on the smallest singular value below which a
/// multiplication matrix is treated as singular.
pub const SINGULAR_RTOL: f64 = 1e-10;

const TABLE_TOL: f64 = 1e-12;

/// Raw algebra description, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDef {
    pub name: String,
    pub dim: usize,
    pub unit: Vec<f64>,
    /// Flat row-major `d*d*d` array indexed `[i][j][k]`.
    pub table: Vec<f64>,
    /// Symbols used for basis elements in expressions and display.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
}

#[derive(Debug)]
struct Inner {
    name: String,
    dim: usize,
    unit: Vec<f64>,
    table: Vec<f64>,
    basis: Vec<String>,
}

/// Validated algebra handle. Clones share the same definition.
#[derive(Clone)]
pub struct Algebra(Arc<Inner>);

impl fmt::Debug for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Algebra({}, dim={})", self.0.name, self.0.dim)
    }
}

impl PartialEq for Algebra {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.name == other.0.name
                && self.0.dim == other.0.dim
                && self.0.table == other.0.table
                && self.0.unit == other.0.unit)
    }
}

impl Algebra {
    /// Validates table dimensions, associativity on all basis triples and the unit law.
    pub fn new(def: AlgebraDef) -> Result<Self> {
        let d = def.dim;
        if d == 0 {
            return Err(Error::InvalidTable("dimension must be positive".into()));
        }
        if def.table.len() != d * d * d {
            return Err(Error::InvalidTable(format!(
                "table has {} entries, expected {}",
                def.table.len(),
                d * d * d
            )));
        }
        if def.unit.len() != d {
            return Err(Error::InvalidTable(format!(
                "unit has {} coordinates, expected {}",
                def.unit.len(),
                d
            )));
        }
        let basis = match def.basis {
            Some(b) if b.len() == d => b,
            Some(b) => {
                return Err(Error::InvalidTable(format!(
                    "{} basis symbols for dimension {}",
                    b.len(),
                    d
                )))
            }
            None => (0..d).map(|i| format!("e{i}")).collect(),
        };
        let alg = Algebra(Arc::new(Inner {
            name: def.name,
            dim: d,
            unit: def.unit,
            table: def.table,
            basis,
        }));
        alg.check_associative()?;
        alg.check_unit()?;
        Ok(alg)
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let def: AlgebraDef =
            serde_json::from_str(src).map_err(|e| Error::InvalidTable(e.to_string()))?;
        Self::new(def)
    }

    pub fn def(&self) -> AlgebraDef {
        AlgebraDef {
            name: self.0.name.clone(),
            dim: self.0.dim,
            unit: self.0.unit.clone(),
            table: self.0.table.clone(),
            basis: Some(self.0.basis.clone()),
        }
    }

    fn check_associative(&self) -> Result<()> {
        let d = self.dim();
        let scale = self.0.table.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (ei, ej, ek) = (self.basis(i), self.basis(j), self.basis(k));
                    let lhs = &(&ei * &ej) * &ek;
                    let rhs = &ei * &(&ej * &ek);
                    if lhs.max_abs_diff(&rhs) > TABLE_TOL * scale * scale {
                        return Err(Error::NonAssociative(i, j, k));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_unit(&self) -> Result<()> {
        let one = self.one();
        for i in 0..self.dim() {
            let e = self.basis(i);
            if (&one * &e).max_abs_diff(&e) > TABLE_TOL || (&e * &one).max_abs_diff(&e) > TABLE_TOL
            {
                return Err(Error::NoUnit(i));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn basis_names(&self) -> &[String] {
        &self.0.basis
    }

    #[inline]
    pub(crate) fn table(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.0.dim;
        self.0.table[(i * d + j) * d + k]
    }

    pub fn element(&self, coords: Vec<f64>) -> Result<Element> {
        if coords.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} coordinates for algebra {} of dimension {}",
                coords.len(),
                self.name(),
                self.dim()
            )));
        }
        Ok(Element {
            alg: self.clone(),
            coords,
        })
    }

    pub fn zero(&self) -> Element {
        Element {
            alg: self.clone(),
            coords: vec![0.0; self.dim()],
        }
    }

    pub fn one(&self) -> Element {
        Element {
            alg: self.clone(),
            coords: self.0.unit.clone(),
        }
    }

    pub fn scalar(&self, s: f64) -> Element {
        self.one().scale(s)
    }

    pub fn basis(&self, i: usize) -> Element {
        let mut coords = vec![0.0; self.dim()];
        coords[i] = 1.0;
        Element {
            alg: self.clone(),
            coords,
        }
    }

    pub fn basis_index(&self, symbol: &str) -> Option<usize> {
        self.0.basis.iter().position(|b| b == symbol)
    }

    /// Matrix of `h -> a h` in coordinates.
    pub fn left_matrix(&self, a: &Element) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |k, j| {
            (0..d).map(|i| a.coords[i] * self.table(i, j, k)).sum()
        })
    }

    /// Matrix of `h -> h b` in coordinates.
    pub fn right_matrix(&self, b: &Element) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |k, i| {
            (0..d).map(|j| b.coords[j] * self.table(i, j, k)).sum()
        })
    }

    /// Quaternions with basis `1, i, j, k`.
    pub fn quaternion() -> Self {
        let mut t = vec![0.0; 64];
        let mut set = |i: usize, j: usize, k: usize, v: f64| t[(i * 4 + j) * 4 + k] = v;
        // e0 = 1, e1 = i, e2 = j, e3 = k
        for a in 0..4 {
            set(0, a, a, 1.0);
            set(a, 0, a, 1.0);
        }
        set(1, 1, 0, -1.0);
        set(2, 2, 0, -1.0);
        set(3, 3, 0, -1.0);
        set(1, 2, 3, 1.0);
        set(2, 1, 3, -1.0);
        set(2, 3, 1, 1.0);
        set(3, 2, 1, -1.0);
        set(3, 1, 2, 1.0);
        set(1, 3, 2, -1.0);
        Self::new(AlgebraDef {
            name: "quaternion".into(),
            dim: 4,
            unit: vec![1.0, 0.0, 0.0, 0.0],
            table: t,
            basis: Some(vec!["1".into(), "i".into(), "j".into(), "k".into()]),
        })
        .expect("quaternion table is valid")
    }

    pub fn complex() -> Self {
        let t = vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, -1.0, 0.0];
        Self::new(AlgebraDef {
            name: "complex".into(),
            dim: 2,
            unit: vec![1.0, 0.0],
            table: t,
            basis: Some(vec!["1".into(), "i".into()]),
        })
        .expect("complex table is valid")
    }

    pub fn real() -> Self {
        Self::new(AlgebraDef {
            name: "real".into(),
            dim: 1,
            unit: vec![1.0],
            table: vec![1.0],
            basis: Some(vec!["1".into()]),
        })
        .expect("real table is valid")
    }

    /// 2x2 real matrices with matrix-unit basis `e11, e12, e21, e22`.
    pub fn mat2() -> Self {
        // E_ab E_cd = delta_bc E_ad, index of E_ab is 2a + b
        let mut t = vec![0.0; 64];
        for a in 0..2 {
            for b in 0..2 {
                for d in 0..2 {
                    let (i, j, k) = (2 * a + b, 2 * b + d, 2 * a + d);
                    t[(i * 4 + j) * 4 + k] = 1.0;
                }
            }
        }
        Self::new(AlgebraDef {
            name: "mat2".into(),
            dim: 4,
            unit: vec![1.0, 0.0, 0.0, 1.0],
            table: t,
            basis: Some(vec!["e11".into(), "e12".into(), "e21".into(), "e22".into()]),
        })
        .expect("mat2 table is valid")
    }

    /// Looks up one of the built-in algebras.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "quaternion" | "H" => Some(Self::quaternion()),
            "complex" | "C" => Some(Self::complex()),
            "real" | "R" => Some(Self::real()),
            "mat2" => Some(Self::mat2()),
            _ => None,
        }
    }
}

/// Element of an algebra, stored as coordinates over its basis.
#[derive(Clone, PartialEq)]
pub struct Element {
    alg: Algebra,
    coords: Vec<f64>,
}

impl Element {
    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub(crate) fn from_vector(alg: &Algebra, v: &DVector<f64>) -> Self {
        Element {
            alg: alg.clone(),
            coords: v.iter().copied().collect(),
        }
    }

    pub(crate) fn to_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coords)
    }

    pub fn same_algebra(&self, other: &Element) -> Result<()> {
        if self.alg == other.alg {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch(
                self.alg.name().to_string(),
                other.alg.name().to_string(),
            ))
        }
    }

    pub fn try_add(&self, other: &Element) -> Result<Element> {
        self.same_algebra(other)?;
        Ok(self + other)
    }

    pub fn try_sub(&self, other: &Element) -> Result<Element> {
        self.same_algebra(other)?;
        Ok(self - other)
    }

    /// Product through the multiplication table.
    pub fn try_mul(&self, other: &Element) -> Result<Element> {
        self.same_algebra(other)?;
        Ok(self * other)
    }

    pub fn scale(&self, s: f64) -> Element {
        Element {
            alg: self.alg.clone(),
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }

    /// Two-sided inverse. Fails with [`Error::Singular`] when the left
    /// multiplication matrix is numerically singular.
    pub fn inv(&self) -> Result<Element> {
        let lm = self.alg.left_matrix(self);
        if is_singular(&lm) {
            return Err(Error::Singular);
        }
        let x = lm
            .lu()
            .solve(&self.alg.one().to_vector())
            .ok_or(Error::Singular)?;
        Ok(Element::from_vector(&self.alg, &x))
    }

    /// Condition number of the left multiplication matrix.
    pub fn condition(&self) -> f64 {
        condition_number(&self.alg.left_matrix(self))
    }

    /// Coordinates rounded to `decimals` places, with `-0` cleared.
    pub fn rounded(&self, decimals: i32) -> Element {
        let f = 10f64.powi(decimals);
        let coords = self
            .coords
            .iter()
            .map(|c| {
                let r = (c * f).round() / f;
                if r == 0.0 {
                    0.0
                } else {
                    r
                }
            })
            .collect();
        Element {
            alg: self.alg.clone(),
            coords,
        }
    }

    /// Euclidean norm of the coordinates.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    pub fn is_one(&self) -> bool {
        self.coords == self.alg.0.unit
    }

    /// Real multiple of the unit, if it is one.
    pub fn as_real(&self) -> Option<f64> {
        let unit = &self.alg.0.unit;
        let pivot = unit.iter().position(|&u| u != 0.0)?;
        let s = self.coords[pivot] / unit[pivot];
        self.coords
            .iter()
            .zip(unit)
            .all(|(c, u)| *c == s * u)
            .then_some(s)
    }

    pub fn max_abs_diff(&self, other: &Element) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn dist(&self, other: &Element) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Commutes with `other` up to `tol` in the Euclidean norm.
    pub fn commutes_with(&self, other: &Element, tol: f64) -> bool {
        (self * other).dist(&(other * self)) <= tol
    }
}

pub(crate) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

pub(crate) fn is_singular(m: &DMatrix<f64>) -> bool {
    let sv = singular_values(m);
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    max == 0.0 || min < SINGULAR_RTOL * max
}

pub(crate) fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = singular_values(m);
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Renders as a signed sum over basis symbols, e.g. `1 + 2i - 0.5k`.
impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.alg.basis_names();
        let mut first = true;
        for (c, name) in self.coords.iter().zip(names) {
            if *c == 0.0 {
                continue;
            }
            let mag = c.abs();
            if first {
                if *c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if *c < 0.0 { '-' } else { '+' })?;
            }
            first = false;
            if name == "1" {
                write!(f, "{mag}")?;
            } else if mag == 1.0 {
                write!(f, "{name}")?;
            } else if name.len() == 1 {
                write!(f, "{mag}{name}")?;
            } else {
                write!(f, "{mag}*{name}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

// Operator impls assume both operands share an algebra; the `try_*` methods
// check it and are what public entry points use.
impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        debug_assert!(self.alg == rhs.alg);
        Element {
            alg: self.alg.clone(),
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        debug_assert!(self.alg == rhs.alg);
        Element {
            alg: self.alg.clone(),
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &Element {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        debug_assert!(self.alg == rhs.alg);
        let d = self.alg.dim();
        let mut out = vec![0.0; d];
        for (i, &a) in self.coords.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in rhs.coords.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                let ab = a * b;
                for (k, o) in out.iter_mut().enumerate() {
                    *o += ab * self.alg.table(i, j, k);
                }
            }
        }
        Element {
            alg: self.alg.clone(),
            coords: out,
        }
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale(-1.0)
    }
}

/// Ordered tuple of elements of one algebra: a point of the direct sum `A^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tuple(pub Vec<Element>);

impl Tuple {
    pub fn new(components: Vec<Element>) -> Result<Self> {
        if let Some(first) = components.first() {
            for c in &components[1..] {
                first.same_algebra(c)?;
            }
        }
        Ok(Tuple(components))
    }

    pub fn zeros(alg: &Algebra, n: usize) -> Self {
        Tuple(vec![alg.zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &[Element] {
        &self.0
    }

    /// Max of component norms.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(Element::norm).fold(0.0, f64::max)
    }

    pub fn rounded(&self, decimals: i32) -> Tuple {
        Tuple(self.0.iter().map(|e| e.rounded(decimals)).collect())
    }

    pub fn add(&self, other: &Tuple) -> Tuple {
        Tuple(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Tuple) -> Tuple {
        Tuple(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> Tuple {
        Tuple(self.0.iter().map(|a| a.scale(s)).collect())
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Tuple) -> Tuple {
        Tuple(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + &b.scale(s))
                .collect(),
        )
    }

    pub fn concat(&self, other: &Tuple) -> Tuple {
        Tuple(self.0.iter().chain(&other.0).cloned().collect())
    }

    pub fn dist(&self, other: &Tuple) -> f64 {
        self.sub(other).norm()
    }

    pub fn coords(&self) -> Vec<Vec<f64>> {
        self.0.iter().map(|e| e.coords().to_vec()).collect()
    }

    pub fn from_coords(alg: &Algebra, coords: &[Vec<f64>]) -> Result<Self> {
        coords
            .iter()
            .map(|c| alg.element(c.clone()))
            .collect::<Result<Vec<_>>>()
            .map(Tuple)
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}
