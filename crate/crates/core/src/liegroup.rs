//! Lie groups given by polynomial chart data over an algebra.
//!
//! The product `φ(b, a)` is a map of `2n` variables: `x1..xn` hold `b`,
//! `x(n+1)..x2n` hold `a`. Shift Jacobians come from its exact symbolic
//! derivative; derivatives of the basic maps `ψ` and `λ` are taken by
//! central differences of their block-flat matrices.
//!
//! Conventions (all maps act on column tuples):
//! - `A_L(b, a) = ∂φ(b, x)/∂x` at `x = a`, `A_R(a, b) = ∂φ(x, b)/∂x` at `x = a`
//! - `ψ_L(a) = A_L(a, e)`, `ψ_R(a) = A_R(e, a)`, `λ = ψ^-1`
//! - structure constants `R^c_{tq}(x, y) = λ^c_k(c) ∂ψ^k_t(c)/∂c^p [ψ^p_q(c) x] (y)`:
//!   the first slot is the direction (lower index `q`), the second the
//!   argument of `ψ_t` (lower index `t`)
//! - `[v, w]^c = R^c_{tq}(v^q, w^t) - R^c_{tq}(w^q, v^t)`

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{condition_number, Algebra, Element, Tuple};
use crate::error::{Error, Result};
use crate::geometry::VectorField;
use crate::linmap::BilinearMap;
use crate::mapmatrix::MapMatrix;
use crate::ncexpr::{fd_step, Derivative, Expr, PolyMap};
use crate::random::{random_tuple, rng, SeededRng};

/// Group points whose basic maps are worse conditioned than this are resampled.
pub const MAX_POINT_CONDITION: f64 = 1e6;
/// Tolerance of the Maurer check (two layers of differences).
pub const MAURER_TOL: f64 = 1e-4;

const VALIDATION_POINTS: usize = 20;
const MAX_RESAMPLE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Group data as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSource {
    #[serde(default)]
    pub name: Option<String>,
    pub algebra: String,
    pub n: usize,
    pub product: String,
    pub identity: Vec<Vec<f64>>,
    pub inverse: String,
}

#[derive(Debug, Clone)]
pub struct LieGroup {
    name: String,
    alg: Algebra,
    n: usize,
    product: PolyMap,
    dproduct: Derivative,
    identity: Tuple,
    inverse: PolyMap,
}

impl LieGroup {
    pub fn new(name: &str, product: PolyMap, identity: Tuple, inverse: PolyMap) -> Result<Self> {
        let alg = product.algebra().clone();
        let n = product.n_out();
        if n == 0 {
            return Err(Error::Invalid(
                "group chart dimension must be positive".into(),
            ));
        }
        if product.n_in() != 2 * n {
            return Err(Error::ShapeMismatch(format!(
                "product has {} outputs but {} inputs (expected {})",
                n,
                product.n_in(),
                2 * n
            )));
        }
        if inverse.n_in() != n || inverse.n_out() != n {
            return Err(Error::ShapeMismatch(format!(
                "inverse must map {n} components to {n}"
            )));
        }
        if identity.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "identity has {} components, expected {n}",
                identity.len()
            )));
        }
        if inverse.algebra() != &alg {
            return Err(Error::AlgebraMismatch(
                alg.name().into(),
                inverse.algebra().name().into(),
            ));
        }
        for c in identity.components() {
            if c.algebra() != &alg {
                return Err(Error::AlgebraMismatch(
                    alg.name().into(),
                    c.algebra().name().into(),
                ));
            }
        }
        let dproduct = product.diff();
        Ok(LieGroup {
            name: name.to_string(),
            alg,
            n,
            product,
            dproduct,
            identity,
            inverse,
        })
    }

    /// Parses group data over the given algebra (the `algebra` field is not
    /// looked up here).
    pub fn from_source(src: &GroupSource, alg: &Algebra) -> Result<Self> {
        if src.n == 0 {
            return Err(Error::Invalid(
                "group chart dimension must be positive".into(),
            ));
        }
        let product = PolyMap::parse(&src.product, 2 * src.n, alg)?;
        if product.n_out() != src.n {
            return Err(Error::ShapeMismatch(format!(
                "product defines {} components, expected {}",
                product.n_out(),
                src.n
            )));
        }
        let inverse = PolyMap::parse(&src.inverse, src.n, alg)?;
        let identity = Tuple::from_coords(alg, &src.identity)?;
        let name = src.name.clone().unwrap_or_else(|| "custom".into());
        Self::new(&name, product, identity, inverse)
    }

    /// Parses a JSON group spec; the algebra is resolved among the built-ins.
    pub fn from_json(json: &str) -> Result<Self> {
        let src: GroupSource =
            serde_json::from_str(json).map_err(|e| Error::Invalid(format!("group JSON: {e}")))?;
        let alg = Algebra::builtin(&src.algebra)
            .ok_or_else(|| Error::Invalid(format!("unknown algebra `{}`", src.algebra)))?;
        Self::from_source(&src, &alg)
    }

    pub const BUILTINS: [&'static str; 3] = ["quat-mult", "quat-affine", "complex-mult"];

    pub fn builtin_source(name: &str) -> Option<GroupSource> {
        let src =
            |algebra: &str, n, product: &str, identity: Vec<Vec<f64>>, inverse: &str| GroupSource {
                name: Some(name.to_string()),
                algebra: algebra.into(),
                n,
                product: product.into(),
                identity,
                inverse: inverse.into(),
            };
        match name {
            "quat-mult" => Some(src(
                "quaternion",
                1,
                "y1 = x1*x2",
                vec![vec![1.0, 0.0, 0.0, 0.0]],
                "y1 = inv(x1)",
            )),
            "quat-affine" => Some(src(
                "quaternion",
                2,
                "y1 = x1*x3; y2 = x1*x4 + x2",
                vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 4]],
                "y1 = inv(x1); y2 = -inv(x1)*x2",
            )),
            "complex-mult" => Some(src(
                "complex",
                1,
                "y1 = x1*x2",
                vec![vec![1.0, 0.0]],
                "y1 = inv(x1)",
            )),
            _ => None,
        }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        let src = Self::builtin_source(name)?;
        let alg = Algebra::builtin(&src.algebra)?;
        Some(Self::from_source(&src, &alg).expect("built-in groups are well formed"))
    }

    pub fn quat_mult() -> Self {
        Self::builtin("quat-mult").expect("built-in")
    }

    pub fn quat_affine() -> Self {
        Self::builtin("quat-affine").expect("built-in")
    }

    pub fn complex_mult() -> Self {
        Self::builtin("complex-mult").expect("built-in")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> &Tuple {
        &self.identity
    }

    pub fn product_map(&self) -> &PolyMap {
        &self.product
    }

    pub fn inverse_map(&self) -> &PolyMap {
        &self.inverse
    }

    /// Real dimension of the chart, `n * dim A`.
    fn real_dim(&self) -> usize {
        self.n * self.alg.dim()
    }

    fn check_point(&self, a: &Tuple) -> Result<()> {
        if a.len() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "group of dimension {} given a point of length {}",
                self.n,
                a.len()
            )));
        }
        Ok(())
    }

    /// `φ(b, a) = ba`.
    pub fn mul(&self, b: &Tuple, a: &Tuple) -> Result<Tuple> {
        self.check_point(b)?;
        self.check_point(a)?;
        self.product.eval(&b.concat(a))
    }

    pub fn inv(&self, a: &Tuple) -> Result<Tuple> {
        self.check_point(a)?;
        self.inverse.eval(a)
    }

    fn product_derivative(&self, b: &Tuple, a: &Tuple) -> Result<MapMatrix> {
        self.check_point(b)?;
        self.check_point(a)?;
        self.dproduct.eval(&self.alg, &b.concat(a))
    }

    /// Derivative of the left shift `x -> bx` at `a`.
    pub fn jac_left(&self, b: &Tuple, a: &Tuple) -> Result<MapMatrix> {
        Ok(self.product_derivative(b, a)?.columns(self.n, self.n))
    }

    /// Derivative of the right shift `x -> xb` at `a`.
    pub fn jac_right(&self, a: &Tuple, b: &Tuple) -> Result<MapMatrix> {
        Ok(self.product_derivative(a, b)?.columns(0, self.n))
    }

    pub fn psi(&self, side: Side, a: &Tuple) -> Result<MapMatrix> {
        match side {
            Side::Left => self.jac_left(a, &self.identity),
            Side::Right => self.jac_right(&self.identity, a),
        }
    }

    pub fn psi_left(&self, a: &Tuple) -> Result<MapMatrix> {
        self.psi(Side::Left, a)
    }

    pub fn psi_right(&self, a: &Tuple) -> Result<MapMatrix> {
        self.psi(Side::Right, a)
    }

    pub fn lambda(&self, side: Side, a: &Tuple) -> Result<MapMatrix> {
        self.psi(side, a)?.invert()
    }

    pub fn lambda_left(&self, a: &Tuple) -> Result<MapMatrix> {
        self.lambda(Side::Left, a)
    }

    pub fn lambda_right(&self, a: &Tuple) -> Result<MapMatrix> {
        self.lambda(Side::Right, a)
    }

    /// Exact derivative of the inverse map at `a`.
    pub fn inverse_derivative(&self, a: &Tuple) -> Result<MapMatrix> {
        self.inverse.eval_derivative(a)
    }

    /// Checks the identity, associativity and inverse laws at seeded points.
    pub fn validate(&self, seed: u64) -> Result<()> {
        let mut r = rng(seed);
        let sample = |r: &mut SeededRng| random_tuple(&self.alg, self.n, r);
        let fail = |check: &str, residual: f64| Error::SpecInvariant {
            check: check.into(),
            residual,
        };
        let e = &self.identity;
        let mut worst = 0.0_f64;
        for _ in 0..VALIDATION_POINTS {
            let a = sample(&mut r);
            worst = worst
                .max(self.mul(e, &a)?.dist(&a))
                .max(self.mul(&a, e)?.dist(&a));
        }
        if worst.is_nan() || worst > 1e-10 {
            return Err(fail("identity law", worst));
        }
        worst = 0.0;
        for _ in 0..VALIDATION_POINTS {
            let (a, b, c) = (sample(&mut r), sample(&mut r), sample(&mut r));
            let lhs = self.mul(&self.mul(&a, &b)?, &c)?;
            let rhs = self.mul(&a, &self.mul(&b, &c)?)?;
            worst = worst.max(lhs.dist(&rhs));
        }
        if worst.is_nan() || worst > 1e-9 {
            return Err(fail("associativity", worst));
        }
        worst = 0.0;
        let mut checked = 0;
        for _ in 0..VALIDATION_POINTS * 5 {
            let a = sample(&mut r);
            // points where the inverse map itself is singular are skipped
            let Ok(ai) = self.inv(&a) else { continue };
            worst = worst.max(self.mul(&ai, &a)?.dist(e));
            checked += 1;
            if checked == VALIDATION_POINTS {
                break;
            }
        }
        if checked == 0 || worst.is_nan() || worst > 1e-9 {
            return Err(fail(
                "inverse law",
                if checked == 0 { f64::INFINITY } else { worst },
            ));
        }
        Ok(())
    }

    /// A random point with an evaluable inverse and well-conditioned basic maps.
    pub fn random_point(&self, r: &mut SeededRng) -> Result<Tuple> {
        for _ in 0..MAX_RESAMPLE {
            let a = random_tuple(&self.alg, self.n, r);
            if self.point_ok(&a) {
                return Ok(a);
            }
        }
        Err(Error::Invalid(format!(
            "no well-conditioned group point found in {MAX_RESAMPLE} draws"
        )))
    }

    fn point_ok(&self, a: &Tuple) -> bool {
        let ok = || -> Result<bool> {
            let ai = self.inv(a)?;
            for p in [a, &ai] {
                for side in Side::BOTH {
                    if condition_number(&self.psi(side, p)?.block_flat()) > MAX_POINT_CONDITION {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        };
        ok().unwrap_or(false)
    }

    pub fn random_points(&self, r: &mut SeededRng, count: usize) -> Result<Vec<Tuple>> {
        (0..count).map(|_| self.random_point(r)).collect()
    }

    fn flat_coords(&self, a: &Tuple) -> Vec<f64> {
        a.components()
            .iter()
            .flat_map(|c| c.coords().iter().copied())
            .collect()
    }

    fn tuple_from_flat(&self, v: &[f64]) -> Tuple {
        let d = self.alg.dim();
        Tuple(
            v.chunks(d)
                .map(|c| self.alg.element(c.to_vec()).expect("dimension matches"))
                .collect(),
        )
    }

    /// Partial derivatives of a matrix-valued function along every real
    /// coordinate of the point, by the five-point central stencil.
    fn fd_partials(
        &self,
        f: impl Fn(&Tuple) -> Result<DMatrix<f64>>,
        x: &Tuple,
    ) -> Result<Vec<DMatrix<f64>>> {
        let base = self.flat_coords(x);
        let step = fd_step(x.norm());
        (0..base.len())
            .map(|p| {
                let xp = base[p];
                let t = (xp + step) - xp;
                let at = |s: f64| {
                    let mut c = base.clone();
                    c[p] = xp + s * t;
                    f(&self.tuple_from_flat(&c))
                };
                let d1 = at(1.0)? - at(-1.0)?;
                let d2 = at(2.0)? - at(-2.0)?;
                Ok((d1 * 8.0 - d2) / (12.0 * t))
            })
            .collect()
    }

    /// `R[C][Q][T]` over real indices at one point.
    fn structure_tensor_at(&self, side: Side, c: &Tuple) -> Result<Vec<f64>> {
        let psi = self.psi(side, c)?;
        let lam = psi.invert()?.block_flat();
        let psi = psi.block_flat();
        let g = self.fd_partials(|x| Ok(self.psi(side, x)?.block_flat()), c)?;
        let nn = self.real_dim();
        let mut full = vec![0.0; nn * nn * nn];
        for q in 0..nn {
            let mut m = DMatrix::zeros(nn, nn);
            for (p, gp) in g.iter().enumerate() {
                let s = psi[(p, q)];
                if s != 0.0 {
                    m += gp * s;
                }
            }
            let dq = &lam * m;
            for cc in 0..nn {
                for t in 0..nn {
                    full[(cc * nn + q) * nn + t] = dq[(cc, t)];
                }
            }
        }
        Ok(full)
    }

    /// Structure constants from the first point, with the largest pairwise
    /// deviation across all points.
    pub fn structure_constants_with_spread(
        &self,
        side: Side,
        points: &[Tuple],
    ) -> Result<StructureConstants> {
        if points.is_empty() {
            return Err(Error::Invalid(
                "structure constants need at least one point".into(),
            ));
        }
        for p in points {
            self.check_point(p)?;
        }
        let all = points
            .iter()
            .map(|c| self.structure_tensor_at(side, c))
            .collect::<Result<Vec<_>>>()?;
        let mut spread = 0.0_f64;
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                let dev = a
                    .iter()
                    .zip(b)
                    .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
                spread = spread.max(dev);
            }
        }
        Ok(StructureConstants {
            alg: self.alg.clone(),
            side,
            n: self.n,
            full: all.into_iter().next().expect("non-empty"),
            spread,
        })
    }

    /// As [`Self::structure_constants_with_spread`], failing with
    /// `SpreadTooLarge` when the constants move by more than `tol`.
    pub fn structure_constants(
        &self,
        side: Side,
        points: &[Tuple],
        tol: f64,
    ) -> Result<StructureConstants> {
        let sc = self.structure_constants_with_spread(side, points)?;
        if sc.spread.is_nan() || sc.spread > tol {
            return Err(Error::SpreadTooLarge {
                spread: sc.spread,
                tol,
            });
        }
        Ok(sc)
    }

    /// Largest Frobenius deviation, over index triples and points, between
    /// the bracket side of the Maurer equation and the curl of `λ`.
    pub fn maurer_residual(&self, sc: &StructureConstants, points: &[Tuple]) -> Result<f64> {
        let side = sc.side;
        let n = self.n;
        let d = self.alg.dim();
        let nn = self.real_dim();
        let mut worst = 0.0_f64;
        for a in points {
            let lam = self.lambda(side, a)?.block_flat();
            let dl = self.fd_partials(|x| Ok(self.lambda(side, x)?.block_flat()), a)?;
            // S_C = λᵀ R_C λ
            let s: Vec<DMatrix<f64>> = (0..nn)
                .map(|cc| {
                    let rc = DMatrix::from_fn(nn, nn, |q, t| sc.full[(cc * nn + q) * nn + t]);
                    lam.transpose() * rc * &lam
                })
                .collect();
            for ci in 0..n {
                for ai in 0..n {
                    for bi in 0..n {
                        let mut sq = 0.0;
                        for kk in 0..d {
                            let cc = ci * d + kk;
                            for r in 0..d {
                                let ar = ai * d + r;
                                for u in 0..d {
                                    let bs = bi * d + u;
                                    let lhs = s[cc][(bs, ar)] - s[cc][(ar, bs)];
                                    let rhs = dl[ar][(cc, bs)] - dl[bs][(cc, ar)];
                                    sq += (lhs - rhs).powi(2);
                                }
                            }
                        }
                        worst = worst.max(sq.sqrt());
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Invariant field generated by `b ∈ T_eG`.
    pub fn invariant_field(&self, side: Side, b: &Tuple) -> Result<InvariantField> {
        self.check_point(b)?;
        let n = self.n;
        let e = &self.identity;
        let (cols, sub): (usize, Box<dyn Fn(usize) -> Expr>) = match side {
            Side::Left => (
                n,
                Box::new(move |j| {
                    if j <= n {
                        Expr::Var(j)
                    } else {
                        Expr::Const(e.components()[j - n - 1].clone())
                    }
                }),
            ),
            Side::Right => (
                0,
                Box::new(move |j| {
                    if j <= n {
                        Expr::Const(e.components()[j - 1].clone())
                    } else {
                        Expr::Var(j - n)
                    }
                }),
            ),
        };
        let coeffs = (0..n)
            .map(|k| {
                let terms = (0..n).flat_map(|i| {
                    let bi = Expr::Const(b.components()[i].clone());
                    self.dproduct
                        .get(k, cols + i)
                        .substitute(&sub)
                        .terms
                        .into_iter()
                        .map(move |(l, r)| Expr::product([l, bi.clone(), r]))
                });
                Expr::sum(terms)
            })
            .collect();
        Ok(InvariantField {
            side,
            generator: b.clone(),
            field: VectorField::from_exprs(&self.alg, coeffs)?,
        })
    }

    /// Runs the identity suite, structure constants, Maurer checks and the
    /// bracket table.
    pub fn report(&self, cfg: &VerifyConfig) -> Result<GroupReport> {
        let mut r = rng(cfg.seed);
        let suite = self.identity_suite(&mut r, cfg)?;
        let points = self.random_points(&mut r, cfg.points.max(2))?;
        let mut structure = Vec::new();
        let mut maurer = Vec::new();
        let mut brackets = Vec::new();
        for side in Side::BOTH {
            let sc = self.structure_constants_with_spread(side, &points)?;
            let m = self.maurer_residual(&sc, &points)?;
            maurer.push(MaurerReport {
                side,
                max_residual: m,
                tol: cfg.tol_maurer,
                pass: m < cfg.tol_maurer,
            });
            brackets.extend(self.bracket_table(&sc));
            structure.push(StructureReport {
                side,
                spread: sc.spread,
                tol: cfg.tol_struct,
                pass: sc.spread < cfg.tol_struct,
                flat3: sc.nested(),
            });
        }
        let pass = suite.iter().all(|i| i.pass)
            && structure.iter().all(|s| s.pass)
            && maurer.iter().all(|m| m.pass);
        Ok(GroupReport {
            group: self.name.clone(),
            algebra: self.alg.name().to_string(),
            n: self.n,
            seed: cfg.seed,
            points: cfg.points,
            identities: suite,
            structure_constants: structure,
            maurer,
            bracket_table: brackets,
            pass,
        })
    }

    /// Residuals of the shift-Jacobian identities over `cfg.points` random
    /// triples `(a, b, c)`.
    pub fn identity_suite(
        &self,
        r: &mut SeededRng,
        cfg: &VerifyConfig,
    ) -> Result<Vec<IdentityResult>> {
        let alg = &self.alg;
        let n = self.n;
        let e = &self.identity;
        let id = MapMatrix::identity(alg, n);
        let mut worst = vec![0.0_f64; IDENTITIES.len()];
        for _ in 0..cfg.points.max(1) {
            let a = self.random_point(r)?;
            let b = self.random_point(r)?;
            let c = self.random_point(r)?;
            let h = random_tuple(alg, n, r);
            let ai = self.inv(&a)?;
            let bi = self.inv(&b)?;
            let ba = self.mul(&b, &a)?;
            let ab = self.mul(&a, &b)?;
            let ca = self.mul(&c, &a)?;
            let bc = self.mul(&b, &c)?;
            let jl_ba = self.jac_left(&b, &a)?;
            let jr_ab = self.jac_right(&a, &b)?;
            let psi_l_ba = self.psi_left(&ba)?;
            let psi_r_ab = self.psi_right(&ab)?;
            let lam_l_a = self.lambda_left(&a)?;
            let lam_r_a = self.lambda_right(&a)?;
            let dinv = self.inverse_derivative(&a)?;
            let res = [
                self.jac_left(&b, &ca)?
                    .comp_product(&self.jac_left(&c, &a)?)?
                    .residual(&self.jac_left(&bc, &a)?),
                self.jac_right(&ab, &c)?
                    .comp_product(&jr_ab)?
                    .residual(&self.jac_right(&a, &bc)?),
                self.jac_left(e, &a)?.residual(&id),
                self.jac_right(&a, e)?.residual(&id),
                self.psi_left(e)?.residual(&id),
                self.psi_right(e)?.residual(&id),
                jl_ba.invert()?.residual(&self.jac_left(&bi, &ba)?),
                jr_ab.invert()?.residual(&self.jac_right(&ab, &bi)?),
                lam_l_a.residual(&self.jac_left(&ai, &a)?),
                lam_r_a.residual(&self.jac_right(&a, &ai)?),
                jl_ba.residual(&psi_l_ba.comp_product(&lam_l_a)?),
                jr_ab.residual(&psi_r_ab.comp_product(&lam_r_a)?),
                jl_ba
                    .apply_col(&h)?
                    .dist(&psi_l_ba.apply_col(&lam_l_a.apply_col(&h)?)?),
                jr_ab
                    .apply_col(&h)?
                    .dist(&psi_r_ab.apply_col(&lam_r_a.apply_col(&h)?)?),
                dinv.residual(&self.psi_right(&ai)?.comp_product(&lam_l_a)?.neg()),
                dinv.residual(&self.psi_left(&ai)?.comp_product(&lam_r_a)?.neg()),
            ];
            for (w, v) in worst.iter_mut().zip(res) {
                *w = w.max(if v.is_nan() { f64::INFINITY } else { v });
            }
        }
        Ok(IDENTITIES
            .iter()
            .zip(worst)
            .map(|(def, max_residual)| {
                let tol = if def.inverse_derivative {
                    cfg.tol_fd
                } else {
                    cfg.tol_exact
                };
                IdentityResult {
                    name: def.name.to_string(),
                    eq: def.eq.to_string(),
                    max_residual,
                    tol,
                    pass: max_residual < tol,
                }
            })
            .collect())
    }

    /// Brackets of all pairs of real basis vectors of `T_eG`.
    pub fn bracket_table(&self, sc: &StructureConstants) -> Vec<BracketEntry> {
        let basis = self.tangent_basis();
        let mut out = Vec::new();
        for (i, (vl, v)) in basis.iter().enumerate() {
            for (wl, w) in &basis[i + 1..] {
                let value = sc.bracket(v, w);
                out.push(BracketEntry {
                    side: sc.side,
                    v: vl.clone(),
                    w: wl.clone(),
                    value: display_rounded(&value),
                    coords: value.coords(),
                });
            }
        }
        out
    }

    /// Real basis of `A^n` labelled by basis symbol, with the slot appended
    /// when `n > 1`.
    pub fn tangent_basis(&self) -> Vec<(String, Tuple)> {
        let names = self.alg.basis_names();
        let mut out = Vec::new();
        for slot in 0..self.n {
            for (k, name) in names.iter().enumerate() {
                let mut t = Tuple::zeros(&self.alg, self.n);
                t.0[slot] = self.alg.basis(k);
                let label = if self.n == 1 {
                    name.clone()
                } else {
                    format!("{name}@{}", slot + 1)
                };
                out.push((label, t));
            }
        }
        out
    }
}

/// Tuple rendered with coordinates rounded to 9 decimals; parentheses only
/// for `n > 1`.
pub fn display_rounded(t: &Tuple) -> String {
    let t = t.rounded(9);
    match t.components() {
        [e] => e.to_string(),
        _ => t.to_string(),
    }
}

struct IdentityDef {
    name: &'static str,
    eq: &'static str,
    inverse_derivative: bool,
}

const fn def(name: &'static str, eq: &'static str, inverse_derivative: bool) -> IdentityDef {
    IdentityDef {
        name,
        eq,
        inverse_derivative,
    }
}

const IDENTITIES: [IdentityDef; 16] = [
    def("left_cocycle", "A_L(b, ca) ∘ A_L(c, a) = A_L(bc, a)", false),
    def(
        "right_cocycle",
        "A_R(ab, c) ∘ A_R(a, b) = A_R(a, bc)",
        false,
    ),
    def("left_shift_by_identity", "A_L(e, a) = I", false),
    def("right_shift_by_identity", "A_R(a, e) = I", false),
    def("psi_left_at_identity", "ψ_L(e) = I", false),
    def("psi_right_at_identity", "ψ_R(e) = I", false),
    def(
        "left_jacobian_inverse",
        "A_L(b, a)^-1 = A_L(b^-1, ba)",
        false,
    ),
    def(
        "right_jacobian_inverse",
        "A_R(a, b)^-1 = A_R(ab, b^-1)",
        false,
    ),
    def("lambda_left", "λ_L(a) = A_L(a^-1, a)", false),
    def("lambda_right", "λ_R(a) = A_R(a, a^-1)", false),
    def("left_decomposition", "A_L(b, a) = ψ_L(ba) ∘ λ_L(a)", false),
    def("right_decomposition", "A_R(a, b) = ψ_R(ab) ∘ λ_R(a)", false),
    def(
        "left_shift_derivative",
        "∂(ba)/∂a ∘ h = ψ_L(ba) ∘ λ_L(a) ∘ h",
        false,
    ),
    def(
        "right_shift_derivative",
        "∂(ab)/∂a ∘ h = ψ_R(ab) ∘ λ_R(a) ∘ h",
        false,
    ),
    def(
        "inverse_derivative_left",
        "∂a^-1/∂a = -ψ_R(a^-1) ∘ λ_L(a)",
        true,
    ),
    def(
        "inverse_derivative_right",
        "∂a^-1/∂a = -ψ_L(a^-1) ∘ λ_R(a)",
        true,
    ),
];

/// `R^c_{tq}` for all index triples, with the spread measured while
/// computing them.
#[derive(Debug, Clone)]
pub struct StructureConstants {
    alg: Algebra,
    side: Side,
    n: usize,
    /// `full[C][Q][T]` over real indices `C = c d + k` etc.
    full: Vec<f64>,
    spread: f64,
}

impl StructureConstants {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spread(&self) -> f64 {
        self.spread
    }

    fn entry(&self, cc: usize, q: usize, t: usize) -> f64 {
        let nn = self.n * self.alg.dim();
        self.full[(cc * nn + q) * nn + t]
    }

    /// `flat3` of `R^c_{tq}`: `[k][i][j]` is coordinate `k` of `R(e_i, e_j)`.
    pub fn flat3(&self, c: usize, t: usize, q: usize) -> Vec<f64> {
        let d = self.alg.dim();
        let mut out = Vec::with_capacity(d * d * d);
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    out.push(self.entry(c * d + k, q * d + i, t * d + j));
                }
            }
        }
        out
    }

    pub fn get(&self, c: usize, t: usize, q: usize) -> BilinearMap {
        BilinearMap::from_flat3(&self.alg, self.flat3(c, t, q)).expect("dimension matches")
    }

    /// `[c][t][q]` nesting of the `flat3` arrays.
    pub fn nested(&self) -> Vec<Vec<Vec<Vec<f64>>>> {
        (0..self.n)
            .map(|c| {
                (0..self.n)
                    .map(|t| (0..self.n).map(|q| self.flat3(c, t, q)).collect())
                    .collect()
            })
            .collect()
    }

    /// `Σ R^c_{tq}(x^q, y^t)` over all `t, q`.
    fn contract(&self, x: &Tuple, y: &Tuple) -> Vec<f64> {
        let d = self.alg.dim();
        let nn = self.n * d;
        let xf: Vec<f64> = x
            .components()
            .iter()
            .flat_map(|e| e.coords().to_vec())
            .collect();
        let yf: Vec<f64> = y
            .components()
            .iter()
            .flat_map(|e| e.coords().to_vec())
            .collect();
        (0..nn)
            .map(|cc| {
                let mut s = 0.0;
                for (q, xq) in xf.iter().enumerate() {
                    if *xq == 0.0 {
                        continue;
                    }
                    for (t, yt) in yf.iter().enumerate() {
                        s += xq * yt * self.entry(cc, q, t);
                    }
                }
                s
            })
            .collect()
    }

    /// `[v, w]^c = R^c_{tq}(v^q, w^t) - R^c_{tq}(w^q, v^t)`.
    pub fn bracket(&self, v: &Tuple, w: &Tuple) -> Tuple {
        let d = self.alg.dim();
        let a = self.contract(v, w);
        let b = self.contract(w, v);
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        Tuple(
            diff.chunks(d)
                .map(|c| self.alg.element(c.to_vec()).expect("dimension matches"))
                .collect(),
        )
    }
}

/// Left- or right-invariant field `a -> ψ(a) b`.
#[derive(Debug, Clone)]
pub struct InvariantField {
    pub side: Side,
    pub generator: Tuple,
    pub field: VectorField,
}

impl InvariantField {
    pub fn eval(&self, a: &Tuple) -> Result<Tuple> {
        self.field.eval(a)
    }
}

/// Evaluator form of the invariant field, straight from `ψ`.
pub fn invariant_field_eval(g: &LieGroup, side: Side, b: &Tuple, a: &Tuple) -> Result<Tuple> {
    g.psi(side, a)?.apply_col(b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub points: usize,
    pub tol_exact: f64,
    pub tol_fd: f64,
    pub tol_struct: f64,
    pub tol_maurer: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 42,
            points: 10,
            tol_exact: 1e-8,
            tol_fd: 1e-5,
            tol_struct: 1e-6,
            tol_maurer: MAURER_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResult {
    pub name: String,
    pub eq: String,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub side: Side,
    pub spread: f64,
    pub tol: f64,
    pub pass: bool,
    /// `flat3[c][t][q]`
    pub flat3: Vec<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaurerReport {
    pub side: Side,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketEntry {
    pub side: Side,
    pub v: String,
    pub w: String,
    pub value: String,
    pub coords: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub group: String,
    pub algebra: String,
    pub n: usize,
    pub seed: u64,
    pub points: usize,
    pub identities: Vec<IdentityResult>,
    pub structure_constants: Vec<StructureReport>,
    pub maurer: Vec<MaurerReport>,
    pub bracket_table: Vec<BracketEntry>,
    pub pass: bool,
}

impl GroupReport {
    pub fn bracket(&self, side: Side, v: &str, w: &str) -> Option<&BracketEntry> {
        self.bracket_table
            .iter()
            .find(|b| b.side == side && b.v == v && b.w == w)
    }
}

/// Convenience for tests and the CLI: the element-valued bracket of two
/// single-slot tangent vectors.
pub fn bracket_elements(sc: &StructureConstants, v: &Element, w: &Element) -> Element {
    sc.bracket(&Tuple(vec![v.clone()]), &Tuple(vec![w.clone()]))
        .0
        .remove(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lie_derivative;
    use crate::linmap::TensorMap;
    use crate::random::random_element;

    fn t1(e: Element) -> Tuple {
        Tuple(vec![e])
    }

    #[test]
    fn builtins_validate() {
        for name in LieGroup::BUILTINS {
            LieGroup::builtin(name).unwrap().validate(1).unwrap();
        }
        assert!(LieGroup::builtin("nope").is_none());
    }

    #[test]
    fn quaternion_jacobians() {
        let g = LieGroup::quat_mult();
        let alg = g.algebra().clone();
        let mut r = rng(2);
        let a = random_element(&alg, &mut r);
        let b = random_element(&alg, &mut r);
        let one = alg.one();
        let jl = g.jac_left(&t1(b.clone()), &t1(a.clone())).unwrap();
        assert!(jl
            .get(0, 0)
            .approx_eq(&TensorMap::tensor(&b, &one).unwrap(), 1e-15));
        let jr = g.jac_right(&t1(a.clone()), &t1(b.clone())).unwrap();
        assert!(jr
            .get(0, 0)
            .approx_eq(&TensorMap::tensor(&one, &b).unwrap(), 1e-15));
        let id = MapMatrix::identity(&alg, 1);
        assert_eq!(
            g.jac_left(g.identity(), &t1(a.clone()))
                .unwrap()
                .residual(&id),
            0.0
        );
        assert_eq!(
            g.jac_right(&t1(a.clone()), g.identity())
                .unwrap()
                .residual(&id),
            0.0
        );
        let pl = g.psi_left(&t1(a.clone())).unwrap();
        assert!(pl
            .get(0, 0)
            .approx_eq(&TensorMap::tensor(&a, &one).unwrap(), 1e-15));
        let pr = g.psi_right(&t1(a.clone())).unwrap();
        assert!(pr
            .get(0, 0)
            .approx_eq(&TensorMap::tensor(&one, &a).unwrap(), 1e-15));
        let ll = g.lambda_left(&t1(a.clone())).unwrap();
        let expected = TensorMap::tensor(&a.inv().unwrap(), &one).unwrap();
        assert!(ll.get(0, 0).approx_eq(&expected, 1e-12));
    }

    #[test]
    fn affine_jacobians() {
        let g = LieGroup::quat_affine();
        let alg = g.algebra().clone();
        let mut r = rng(3);
        let a = random_tuple(&alg, 2, &mut r);
        let b = random_tuple(&alg, 2, &mut r);
        let one = alg.one();
        let b1 = TensorMap::tensor(&b.components()[0], &one).unwrap();
        let jl = g.jac_left(&b, &a).unwrap();
        assert!(jl.residual(&MapMatrix::diag(&alg, vec![b1.clone(), b1])) < 1e-15);
        let jr = g.jac_right(g.identity(), &a).unwrap();
        let expected = MapMatrix::new(
            &alg,
            2,
            2,
            vec![
                TensorMap::tensor(&one, &a.components()[0]).unwrap(),
                TensorMap::zero(&alg),
                TensorMap::tensor(&one, &a.components()[1]).unwrap(),
                TensorMap::identity(&alg),
            ],
        )
        .unwrap();
        assert!(jr.residual(&expected) < 1e-15);
        let a1 = TensorMap::tensor(&a.components()[0], &one).unwrap();
        let pl = g.psi_left(&a).unwrap();
        assert!(pl.residual(&MapMatrix::diag(&alg, vec![a1.clone(), a1])) < 1e-15);
        assert_eq!(
            g.psi_left(g.identity())
                .unwrap()
                .residual(&MapMatrix::identity(&alg, 2)),
            0.0
        );
    }

    #[test]
    fn lambda_cross_check() {
        let g = LieGroup::quat_affine();
        let mut r = rng(4);
        for a in g.random_points(&mut r, 10).unwrap() {
            let ai = g.inv(&a).unwrap();
            let via_inverse = g.jac_left(&ai, &a).unwrap();
            assert!(g.lambda_left(&a).unwrap().residual(&via_inverse) < 1e-8);
        }
        let e = g.identity().clone();
        assert!(
            g.lambda_left(&e)
                .unwrap()
                .residual(&MapMatrix::identity(g.algebra(), 2))
                < 1e-15
        );
    }

    #[test]
    fn quaternion_suite_is_exact() {
        let g = LieGroup::quat_mult();
        let cfg = VerifyConfig::default();
        for res in g.identity_suite(&mut rng(5), &cfg).unwrap() {
            assert!(
                res.max_residual < 1e-10,
                "{} {}",
                res.name,
                res.max_residual
            );
        }
    }

    #[test]
    fn affine_suite() {
        let g = LieGroup::quat_affine();
        let cfg = VerifyConfig::default();
        for res in g.identity_suite(&mut rng(6), &cfg).unwrap() {
            assert!(res.max_residual < 1e-8, "{} {}", res.name, res.max_residual);
        }
    }

    #[test]
    fn quaternion_structure_constants() {
        let g = LieGroup::quat_mult();
        let alg = g.algebra().clone();
        let pts = g.random_points(&mut rng(7), 5).unwrap();
        let left = g.structure_constants(Side::Left, &pts, 1e-8).unwrap();
        assert!(left
            .get(0, 0, 0)
            .approx_eq(&BilinearMap::product(&alg), 1e-8));
        let right = g.structure_constants(Side::Right, &pts, 1e-8).unwrap();
        assert!(right
            .get(0, 0, 0)
            .approx_eq(&BilinearMap::product(&alg).swap_slots(), 1e-8));
        let ij = bracket_elements(&left, &alg.basis(1), &alg.basis(2));
        assert!(ij.dist(&alg.basis(3).scale(2.0)) < 1e-9);
        let ij_r = bracket_elements(&right, &alg.basis(1), &alg.basis(2));
        assert!(ij_r.dist(&alg.basis(3).scale(-2.0)) < 1e-9);
    }

    #[test]
    fn bracket_is_antisymmetric() {
        let g = LieGroup::quat_affine();
        let alg = g.algebra().clone();
        let mut r = rng(8);
        let pts = g.random_points(&mut r, 3).unwrap();
        let sc = g.structure_constants_with_spread(Side::Left, &pts).unwrap();
        let v = random_tuple(&alg, 2, &mut r);
        let w = random_tuple(&alg, 2, &mut r);
        assert!(sc.bracket(&v, &w).dist(&sc.bracket(&w, &v).scale(-1.0)) < 1e-12);
        assert!(sc.bracket(&v, &v).norm() < 1e-12);
    }

    #[test]
    fn complex_brackets_vanish() {
        let g = LieGroup::complex_mult();
        let pts = g.random_points(&mut rng(9), 5).unwrap();
        for side in Side::BOTH {
            let sc = g.structure_constants_with_spread(side, &pts).unwrap();
            for b in g.bracket_table(&sc) {
                assert!(b.coords.iter().flatten().all(|c| c.abs() < 1e-10));
            }
            assert!(g.maurer_residual(&sc, &pts).unwrap() < 1e-8);
        }
    }

    #[test]
    fn maurer_quaternion() {
        let g = LieGroup::quat_mult();
        let pts = g.random_points(&mut rng(10), 5).unwrap();
        for side in Side::BOTH {
            let sc = g.structure_constants_with_spread(side, &pts).unwrap();
            assert!(g.maurer_residual(&sc, &pts).unwrap() < 1e-6);
        }
    }

    #[test]
    fn invariant_fields() {
        let g = LieGroup::quat_mult();
        let alg = g.algebra().clone();
        let b = t1(alg.basis(1));
        let f = g.invariant_field(Side::Left, &b).unwrap();
        assert_eq!(f.eval(g.identity()).unwrap(), b);
        let a = t1(random_element(&alg, &mut rng(11)));
        let expected = &a.components()[0] * &alg.basis(1);
        assert!(f.eval(&a).unwrap().components()[0].dist(&expected) < 1e-15);
        let fr = g.invariant_field(Side::Right, &b).unwrap();
        let expected = &alg.basis(1) * &a.components()[0];
        assert!(fr.eval(&a).unwrap().components()[0].dist(&expected) < 1e-15);
    }

    #[test]
    fn invariant_field_matches_evaluator() {
        let g = LieGroup::quat_affine();
        let mut r = rng(12);
        let b = random_tuple(g.algebra(), 2, &mut r);
        let a = g.random_point(&mut r).unwrap();
        for side in Side::BOTH {
            let sym = g.invariant_field(side, &b).unwrap().eval(&a).unwrap();
            let direct = invariant_field_eval(&g, side, &b, &a).unwrap();
            assert!(sym.dist(&direct) < 1e-14);
        }
    }

    #[test]
    fn lie_derivative_of_invariant_fields_is_bracket() {
        for g in [LieGroup::quat_mult(), LieGroup::quat_affine()] {
            let alg = g.algebra().clone();
            let mut r = rng(13);
            let pts = g.random_points(&mut r, 3).unwrap();
            let v = random_tuple(&alg, g.n(), &mut r);
            let w = random_tuple(&alg, g.n(), &mut r);
            for side in Side::BOTH {
                let sc = g.structure_constants_with_spread(side, &pts).unwrap();
                let fv = g.invariant_field(side, &v).unwrap();
                let fw = g.invariant_field(side, &w).unwrap();
                let br = sc.bracket(&v, &w);
                for c in &pts {
                    let lie = lie_derivative(&fv.field, &fw.field, c).unwrap();
                    let expected = g.psi(side, c).unwrap().apply_col(&br).unwrap();
                    assert!(lie.dist(&expected) < 1e-6, "{} {side}", g.name());
                }
            }
        }
    }

    #[test]
    fn validation_failures() {
        let alg = Algebra::quaternion();
        let src = |product: &str, inverse: &str| GroupSource {
            name: None,
            algebra: "quaternion".into(),
            n: 1,
            product: product.into(),
            identity: vec![vec![0.0; 4]],
            inverse: inverse.into(),
        };
        let bad_assoc = LieGroup::from_source(&src("y1 = x1 + x2 + x1*x2*x1*x2", "y1 = -x1"), &alg)
            .unwrap()
            .validate(1);
        assert!(
            matches!(bad_assoc, Err(Error::SpecInvariant { ref check, .. }) if check == "associativity")
        );
        let bad_inv = LieGroup::from_source(&src("y1 = x1 + x2", "y1 = x1"), &alg)
            .unwrap()
            .validate(1);
        assert!(
            matches!(bad_inv, Err(Error::SpecInvariant { ref check, .. }) if check == "inverse law")
        );
        let bad_id = LieGroup::from_source(&src("y1 = x1*x2", "y1 = x1"), &alg)
            .unwrap()
            .validate(1);
        assert!(
            matches!(bad_id, Err(Error::SpecInvariant { ref check, .. }) if check == "identity law")
        );
        let mut zero = src("y1 = x1", "y1 = x1");
        zero.n = 0;
        assert!(LieGroup::from_source(&zero, &alg).is_err());
    }

    #[test]
    fn report_is_deterministic() {
        let g = LieGroup::quat_mult();
        let cfg = VerifyConfig {
            points: 3,
            ..VerifyConfig::default()
        };
        let a = serde_json::to_string(&g.report(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&g.report(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
        let rep = g.report(&cfg).unwrap();
        assert!(rep.pass);
        let ij = rep.bracket(Side::Left, "i", "j").unwrap();
        assert_eq!(ij.value, "2k");
    }
}
