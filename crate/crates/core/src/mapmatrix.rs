//! Matrices over the algebra and matrices whose entries are tensor maps.
//!
//! Index convention: entry `(i, j)` sits in row `i`, column `j`. For a
//! derivative matrix row `k` is the output component and column `i` the
//! input variable, so `apply_col` contracts over columns.
//!
//! Everything numeric reduces to the block-flat real matrix, where entry
//! `(k, i)` is replaced by its `d x d` flat.

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::{is_singular, Algebra, Element, Tuple};
use crate::error::{Error, Result};
use crate::linmap::{row_major, TensorMap, TensorMapJson};

/// Matrix with algebra entries, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Element>,
}

impl AMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Element>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        for e in &entries[1..] {
            entries[0].same_algebra(e)?;
        }
        Ok(AMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn identity(alg: &Algebra, n: usize) -> Self {
        let entries = (0..n * n)
            .map(|idx| {
                if idx / n == idx % n {
                    alg.one()
                } else {
                    alg.zero()
                }
            })
            .collect();
        AMatrix {
            rows: n,
            cols: n,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Element {
        &self.entries[i * self.cols + j]
    }

    pub fn algebra(&self) -> &Algebra {
        self.entries[0].algebra()
    }

    pub fn max_abs_diff(&self, other: &AMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    /// Row-over-column product: `(a*b)[i][j] = sum_k a[i][k] b[k][j]`.
    pub fn star_rc(&self, b: &AMatrix) -> Result<AMatrix> {
        if self.cols != b.rows {
            return Err(Error::ShapeMismatch(format!(
                "star_rc of {}x{} and {}x{}",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        self.algebra().one().same_algebra(&b.algebra().one())?;
        let alg = self.algebra().clone();
        let mut entries = Vec::with_capacity(self.rows * b.cols);
        for i in 0..self.rows {
            for j in 0..b.cols {
                let mut s = alg.zero();
                for k in 0..self.cols {
                    s = &s + &(self.get(i, k) * b.get(k, j));
                }
                entries.push(s);
            }
        }
        AMatrix::new(self.rows, b.cols, entries)
    }

    /// Column-over-row product: `(a⁎b)[i][j] = sum_k a[k][j] b[i][k]`, with
    /// the `a` factor on the left. Requires `rows(a) = cols(b)`; the result
    /// is `rows(b) x cols(a)`.
    pub fn star_cr(&self, b: &AMatrix) -> Result<AMatrix> {
        if self.rows != b.cols {
            return Err(Error::ShapeMismatch(format!(
                "star_cr of {}x{} and {}x{}",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        self.algebra().one().same_algebra(&b.algebra().one())?;
        let alg = self.algebra().clone();
        let mut entries = Vec::with_capacity(b.rows * self.cols);
        for i in 0..b.rows {
            for j in 0..self.cols {
                let mut s = alg.zero();
                for k in 0..self.rows {
                    s = &s + &(self.get(k, j) * b.get(i, k));
                }
                entries.push(s);
            }
        }
        AMatrix::new(b.rows, self.cols, entries)
    }
}

/// Matrix of tensor maps.
#[derive(Clone)]
pub struct MapMatrix {
    alg: Algebra,
    rows: usize,
    cols: usize,
    entries: Vec<TensorMap>,
}

impl MapMatrix {
    pub fn new(alg: &Algebra, rows: usize, cols: usize, entries: Vec<TensorMap>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix of maps",
                entries.len()
            )));
        }
        if let Some(e) = entries.iter().find(|e| e.algebra() != alg) {
            return Err(Error::AlgebraMismatch(
                alg.name().into(),
                e.algebra().name().into(),
            ));
        }
        Ok(MapMatrix {
            alg: alg.clone(),
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(
        alg: &Algebra,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> TensorMap,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        MapMatrix {
            alg: alg.clone(),
            rows,
            cols,
            entries,
        }
    }

    /// Diagonal `1⊗1`, off-diagonal zero maps.
    pub fn identity(alg: &Algebra, n: usize) -> Self {
        Self::from_fn(alg, n, n, |r, c| {
            if r == c {
                TensorMap::identity(alg)
            } else {
                TensorMap::zero(alg)
            }
        })
    }

    pub fn zero(alg: &Algebra, rows: usize, cols: usize) -> Self {
        Self::from_fn(alg, rows, cols, |_, _| TensorMap::zero(alg))
    }

    pub fn diag(alg: &Algebra, maps: Vec<TensorMap>) -> Self {
        let n = maps.len();
        Self::from_fn(alg, n, n, |r, c| {
            if r == c {
                maps[r].clone()
            } else {
                TensorMap::zero(alg)
            }
        })
    }

    /// Slices a block-flat matrix back into flat-only entries.
    pub fn from_block_flat(
        alg: &Algebra,
        rows: usize,
        cols: usize,
        m: &DMatrix<f64>,
    ) -> Result<Self> {
        let d = alg.dim();
        if m.shape() != (rows * d, cols * d) {
            return Err(Error::ShapeMismatch(format!(
                "block-flat of shape {:?} for {rows}x{cols} maps of dimension {d}",
                m.shape()
            )));
        }
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let block = m.view((r * d, c * d), (d, d)).into_owned();
                entries.push(TensorMap::from_flat(alg, block)?);
            }
        }
        Ok(MapMatrix {
            alg: alg.clone(),
            rows,
            cols,
            entries,
        })
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &TensorMap {
        &self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[TensorMap] {
        &self.entries
    }

    pub fn block_flat(&self) -> DMatrix<f64> {
        let d = self.alg.dim();
        let mut m = DMatrix::zeros(self.rows * d, self.cols * d);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.view_mut((r * d, c * d), (d, d))
                    .copy_from(self.get(r, c).flat());
            }
        }
        m
    }

    /// Columns `start..start+len` as a new matrix.
    pub fn columns(&self, start: usize, len: usize) -> MapMatrix {
        MapMatrix::from_fn(&self.alg, self.rows, len, |r, c| {
            self.get(r, start + c).clone()
        })
    }

    fn check_same(&self, other: &MapMatrix) -> Result<()> {
        if self.alg != other.alg {
            return Err(Error::AlgebraMismatch(
                self.alg.name().into(),
                other.alg.name().into(),
            ));
        }
        Ok(())
    }

    /// `∘°`-product: entry `(k, l) = sum_i f[k][i] ∘ g[i][l]`.
    pub fn comp_product(&self, g: &MapMatrix) -> Result<MapMatrix> {
        self.check_same(g)?;
        if self.cols != g.rows {
            return Err(Error::ShapeMismatch(format!(
                "∘° product of {}x{} and {}x{}",
                self.rows, self.cols, g.rows, g.cols
            )));
        }
        Ok(MapMatrix::from_fn(&self.alg, self.rows, g.cols, |k, l| {
            (0..self.cols).fold(TensorMap::zero(&self.alg), |acc, i| {
                acc.add_unchecked(&self.get(k, i).compose_unchecked(g.get(i, l)))
            })
        }))
    }

    /// Component `k` of the result is `sum_i f[k][i](v[i])`.
    pub fn apply_col(&self, v: &Tuple) -> Result<Tuple> {
        if self.cols != v.len() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix of maps applied to a tuple of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        for c in v.components() {
            if c.algebra() != &self.alg {
                return Err(Error::AlgebraMismatch(
                    self.alg.name().into(),
                    c.algebra().name().into(),
                ));
            }
        }
        Ok(Tuple(
            (0..self.rows)
                .map(|k| {
                    (0..self.cols).fold(self.alg.zero(), |acc, i| {
                        &acc + &self.get(k, i).apply_unchecked(&v.components()[i])
                    })
                })
                .collect(),
        ))
    }

    /// Inverse through a dense solve on the block-flat matrix.
    pub fn invert(&self) -> Result<MapMatrix> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "cannot invert a {}x{} matrix of maps",
                self.rows, self.cols
            )));
        }
        let bf = self.block_flat();
        if is_singular(&bf) {
            return Err(Error::SingularMapMatrix);
        }
        let inv = bf.try_inverse().ok_or(Error::SingularMapMatrix)?;
        MapMatrix::from_block_flat(&self.alg, self.rows, self.cols, &inv)
    }

    pub fn add(&self, other: &MapMatrix) -> Result<MapMatrix> {
        self.check_same(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::ShapeMismatch(
                "sum of differently shaped matrices".into(),
            ));
        }
        Ok(MapMatrix::from_fn(
            &self.alg,
            self.rows,
            self.cols,
            |r, c| self.get(r, c).add_unchecked(other.get(r, c)),
        ))
    }

    pub fn scale(&self, s: f64) -> MapMatrix {
        MapMatrix::from_fn(&self.alg, self.rows, self.cols, |r, c| {
            self.get(r, c).scale(s)
        })
    }

    pub fn neg(&self) -> MapMatrix {
        self.scale(-1.0)
    }

    /// Frobenius norm of the block-flat difference.
    pub fn residual(&self, other: &MapMatrix) -> f64 {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return f64::INFINITY;
        }
        (self.block_flat() - other.block_flat()).norm()
    }

    pub fn to_json(&self, with_flat: bool) -> MapMatrixJson {
        MapMatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(TensorMap::to_json).collect(),
            flat: with_flat.then(|| row_major(&self.block_flat())),
        }
    }

    pub fn render(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).render()).collect())
            .collect()
    }
}

impl fmt::Debug for MapMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MapMatrix{:?}", self.render())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MapMatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<TensorMapJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat: Option<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_element, rng};

    fn h() -> Algebra {
        Algebra::quaternion()
    }

    #[test]
    fn star_rc_small_cases() {
        let h = h();
        let a = AMatrix::new(1, 1, vec![h.basis(1)]).unwrap();
        let b = AMatrix::new(1, 1, vec![h.basis(2)]).unwrap();
        assert_eq!(a.star_rc(&b).unwrap().get(0, 0), &h.basis(3));
        let mut r = rng(3);
        let m = AMatrix::new(2, 3, (0..6).map(|_| random_element(&h, &mut r)).collect()).unwrap();
        assert!(
            AMatrix::identity(&h, 2)
                .star_rc(&m)
                .unwrap()
                .max_abs_diff(&m)
                < 1e-15
        );
    }

    #[test]
    fn star_rc_shape_mismatch() {
        let h = h();
        let a = AMatrix::identity(&h, 2);
        let b = AMatrix::identity(&h, 3);
        assert!(matches!(a.star_rc(&b), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn star_cr_commutative_and_identity() {
        let c = Algebra::complex();
        let a = AMatrix::new(1, 1, vec![c.element(vec![1.0, 2.0]).unwrap()]).unwrap();
        let b = AMatrix::new(1, 1, vec![c.element(vec![-0.5, 3.0]).unwrap()]).unwrap();
        assert!(a.star_cr(&b).unwrap().max_abs_diff(&a.star_rc(&b).unwrap()) < 1e-15);

        let h = h();
        let mut r = rng(5);
        let m = AMatrix::new(2, 2, (0..4).map(|_| random_element(&h, &mut r)).collect()).unwrap();
        let id = AMatrix::identity(&h, 2);
        assert!(
            id.star_cr(&m)
                .unwrap()
                .max_abs_diff(&id.star_rc(&m).unwrap())
                < 1e-15
        );
        assert!(
            m.star_cr(&id)
                .unwrap()
                .max_abs_diff(&m.star_rc(&id).unwrap())
                < 1e-15
        );
    }

    #[test]
    fn star_cr_worked_example() {
        // a = [[i, j], [1, k]], b = [[k, 1], [j, i]] over H:
        // (a⁎b)[0][0] = a[0][0] b[0][0] + a[1][0] b[0][1] = i k + 1 = 1 - j
        // (a*b)[0][0] = a[0][0] b[0][0] + a[0][1] b[1][0] = i k + j j = -1 - j
        let h = h();
        let (one, i, j, k) = (h.one(), h.basis(1), h.basis(2), h.basis(3));
        let a = AMatrix::new(2, 2, vec![i.clone(), j.clone(), one.clone(), k.clone()]).unwrap();
        let b = AMatrix::new(2, 2, vec![k.clone(), one.clone(), j.clone(), i.clone()]).unwrap();
        let cr = a.star_cr(&b).unwrap();
        let rc = a.star_rc(&b).unwrap();
        assert_eq!(cr.get(0, 0).coords(), &[1.0, 0.0, -1.0, 0.0]);
        assert_eq!(rc.get(0, 0).coords(), &[-1.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn star_cr_differs_from_star_rc_over_h() {
        let h = h();
        let mut r = rng(11);
        let mut found = false;
        for _ in 0..20 {
            let a =
                AMatrix::new(2, 2, (0..4).map(|_| random_element(&h, &mut r)).collect()).unwrap();
            let b =
                AMatrix::new(2, 2, (0..4).map(|_| random_element(&h, &mut r)).collect()).unwrap();
            if a.star_cr(&b).unwrap().max_abs_diff(&a.star_rc(&b).unwrap()) > 1e-6 {
                found = true;
                break;
            }
        }
        assert!(found);
    }

    #[test]
    fn comp_product_identity_and_1x1() {
        let h = h();
        let a = h.element(vec![1.0, 0.5, -1.0, 2.0]).unwrap();
        let t = TensorMap::tensor(&a, &h.basis(2)).unwrap();
        let s = TensorMap::tensor(&h.basis(1), &a).unwrap();
        let g = MapMatrix::new(&h, 1, 1, vec![t.clone()]).unwrap();
        let f = MapMatrix::new(&h, 1, 1, vec![s.clone()]).unwrap();
        let fg = f.comp_product(&g).unwrap();
        assert!(fg.get(0, 0).approx_eq(&s.compose(&t).unwrap(), 1e-13));
        let id = MapMatrix::identity(&h, 1);
        assert!(id.comp_product(&g).unwrap().residual(&g) < 1e-15);
    }

    #[test]
    fn invert_examples() {
        let h = h();
        let id = MapMatrix::identity(&h, 3);
        assert!(id.invert().unwrap().residual(&id) < 1e-15);

        let a = h.element(vec![0.5, 1.0, -0.3, 0.2]).unwrap();
        let one = h.one();
        let ta = TensorMap::tensor(&a, &one).unwrap();
        let m = MapMatrix::diag(&h, vec![ta.clone(), ta]);
        let ai = TensorMap::tensor(&a.inv().unwrap(), &one).unwrap();
        let expected = MapMatrix::diag(&h, vec![ai.clone(), ai]);
        assert!(m.invert().unwrap().residual(&expected) < 1e-12);

        let z = MapMatrix::from_fn(&h, 2, 2, |r, c| {
            if r == 0 {
                TensorMap::zero(&h)
            } else {
                TensorMap::tensor(&h.basis(c), &one).unwrap()
            }
        });
        assert!(matches!(z.invert(), Err(Error::SingularMapMatrix)));
        assert!(matches!(
            MapMatrix::zero(&h, 2, 3).invert(),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn apply_col_identity() {
        let h = h();
        let mut r = rng(1);
        let v = Tuple((0..3).map(|_| random_element(&h, &mut r)).collect());
        let out = MapMatrix::identity(&h, 3).apply_col(&v).unwrap();
        assert!(out.dist(&v) < 1e-15);
        assert!(matches!(
            MapMatrix::identity(&h, 2).apply_col(&v),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
