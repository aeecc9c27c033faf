mod common;

use nccalc::geometry::{lie_derivative, VectorField};
use nccalc::liegroup::{bracket_elements, LieGroup, Side};
use nccalc::ncexpr::{diff, diff_tensor};
use nccalc::random::{random_element, random_tuple, rng};
use nccalc::{AMatrix, Algebra, Element, PolyMap, TensorMap};
use proptest::prelude::*;

fn coords4() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0_f64, 4)
}

fn quat(c: Vec<f64>) -> Element {
    Algebra::quaternion().element(c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quaternion_norm_is_multiplicative(a in coords4(), b in coords4()) {
        let (a, b) = (quat(a), quat(b));
        let lhs = (&a * &b).norm();
        let rhs = a.norm() * b.norm();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn mat2_norm_is_submultiplicative(a in coords4(), b in coords4()) {
        let alg = Algebra::mat2();
        let a = alg.element(a).unwrap();
        let b = alg.element(b).unwrap();
        prop_assert!((&a * &b).norm() <= a.norm() * b.norm() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn inverse_is_two_sided(a in coords4()) {
        let a = quat(a);
        prop_assume!(a.norm() > 1e-3);
        let inv = a.inv().unwrap();
        let one = Algebra::quaternion().one();
        prop_assert!((&a * &inv).max_abs_diff(&one) < 1e-12);
        prop_assert!((&inv * &a).max_abs_diff(&one) < 1e-12);
    }

    #[test]
    fn compose_flat_is_matrix_product(seed in any::<u64>()) {
        let alg = Algebra::quaternion();
        let mut r = rng(seed);
        let f = common::random_tensor_map(&alg, &mut r);
        let g = common::random_tensor_map(&alg, &mut r);
        let fg = f.compose(&g).unwrap();
        prop_assert!((fg.flat() - f.flat() * g.flat()).amax() < 1e-12);
        let h = random_element(&alg, &mut r);
        let direct = f.apply(&g.apply(&h).unwrap()).unwrap();
        prop_assert!(fg.apply(&h).unwrap().max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn op_norm_is_submultiplicative(seed in any::<u64>()) {
        let alg = Algebra::quaternion();
        let mut r = rng(seed);
        let f = common::random_tensor_map(&alg, &mut r);
        let g = common::random_tensor_map(&alg, &mut r);
        let fg = f.compose(&g).unwrap();
        prop_assert!(fg.op_norm() <= f.op_norm() * g.op_norm() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn tensor_map_inverse_round_trips(seed in any::<u64>()) {
        let alg = Algebra::quaternion();
        let mut r = rng(seed);
        let f = common::random_tensor_map(&alg, &mut r);
        if let Ok(inv) = f.invert() {
            let id = TensorMap::identity(&alg);
            let cond = f.op_norm() * inv.op_norm();
            prop_assert!(f.compose(&inv).unwrap().max_abs_diff(&id) < 1e-12 * cond.max(1.0));
        }
    }

    #[test]
    fn derivative_is_linear(seed in any::<u64>(), a in -3.0..3.0_f64) {
        let alg = Algebra::quaternion();
        let mut r = rng(seed);
        let f = common::random_map(&alg, 2, 2, 3, &mut r);
        let g = common::random_map(&alg, 2, 2, 3, &mut r);
        let x = random_tuple(&alg, 2, &mut r);
        let lhs = f.lin_comb(a, &g).unwrap().eval_derivative(&x).unwrap();
        let rhs = f
            .eval_derivative(&x)
            .unwrap()
            .scale(a)
            .add(&g.eval_derivative(&x).unwrap())
            .unwrap();
        prop_assert!(lhs.residual(&rhs) < 1e-12 * (1.0 + lhs.block_flat().amax()));
    }

    #[test]
    fn derivative_of_product_follows_leibniz(seed in any::<u64>()) {
        let alg = Algebra::quaternion();
        let mut r = rng(seed);
        let u = common::random_map(&alg, 2, 1, 2, &mut r);
        let v = common::random_map(&alg, 2, 1, 2, &mut r);
        let src = format!(
            "y1 = ({})*({})",
            u.to_source().trim_start_matches("y1 = "),
            v.to_source().trim_start_matches("y1 = ")
        );
        let uv = PolyMap::parse(&src, 2, &alg).unwrap();
        let x = random_tuple(&alg, 2, &mut r);
        let h = random_tuple(&alg, 2, &mut r);
        let ux = u.eval(&x).unwrap().components()[0].clone();
        let vx = v.eval(&x).unwrap().components()[0].clone();
        let du = u.eval_derivative(&x).unwrap().apply_col(&h).unwrap().components()[0].clone();
        let dv = v.eval_derivative(&x).unwrap().apply_col(&h).unwrap().components()[0].clone();
        let expected = &(&du * &vx) + &(&ux * &dv);
        let got = uv.eval_derivative(&x).unwrap().apply_col(&h).unwrap().components()[0].clone();
        prop_assert!(got.max_abs_diff(&expected) < 1e-10 * (1.0 + expected.norm()));
    }

    #[test]
    fn second_derivative_is_symmetric(seed in any::<u64>()) {
        let alg = Algebra::quaternion();
        let mut r = rng(seed);
        let f = common::random_map(&alg, 2, 1, 3, &mut r);
        let x = random_tuple(&alg, 2, &mut r);
        let d12 = diff_tensor(&diff(&f.components()[0], 2), 1).eval(&alg, &x).unwrap();
        let d21 = diff_tensor(&diff(&f.components()[0], 1), 2).eval(&alg, &x).unwrap();
        prop_assert!(d12.swap_slots().max_abs_diff(&d21) < 1e-12);
    }

    #[test]
    fn lie_derivative_is_bilinear_and_antisymmetric(seed in any::<u64>(), a in -2.0..2.0_f64) {
        let alg = Algebra::quaternion();
        let mut r = rng(seed);
        let field = |r: &mut _| VectorField::new(common::random_map(&alg, 2, 2, 2, r)).unwrap();
        let (u, v, w) = (field(&mut r), field(&mut r), field(&mut r));
        let x = random_tuple(&alg, 2, &mut r);
        let uv = lie_derivative(&u.lin_comb(a, &v).unwrap(), &w, &x).unwrap();
        let split = lie_derivative(&u, &w, &x)
            .unwrap()
            .scale(a)
            .add(&lie_derivative(&v, &w, &x).unwrap());
        prop_assert!(uv.dist(&split) < 1e-10 * (1.0 + uv.norm()));
        let vw = lie_derivative(&v, &w, &x).unwrap();
        let wv = lie_derivative(&w, &v, &x).unwrap();
        prop_assert!(vw.add(&wv).norm() < 1e-12 * (1.0 + vw.norm()));
    }

    #[test]
    fn comp_product_is_block_flat_homomorphism(seed in any::<u64>()) {
        let alg = Algebra::quaternion();
        let mut r = rng(seed);
        let f = common::random_map_matrix(&alg, 2, 3, &mut r);
        let g = common::random_map_matrix(&alg, 3, 2, &mut r);
        let lhs = f.comp_product(&g).unwrap().block_flat();
        prop_assert!((lhs - f.block_flat() * g.block_flat()).amax() < 1e-12);
    }

    #[test]
    fn star_rc_matches_entrywise_sum(seed in any::<u64>()) {
        let alg = Algebra::mat2();
        let mut r = rng(seed);
        let entries = |n, r: &mut _| (0..n).map(|_| random_element(&alg, r)).collect::<Vec<_>>();
        let a = AMatrix::new(2, 3, entries(6, &mut r)).unwrap();
        let b = AMatrix::new(3, 2, entries(6, &mut r)).unwrap();
        let c = a.star_rc(&b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s = (0..3).fold(alg.zero(), |s, k| &s + &(a.get(i, k) * b.get(k, j)));
                prop_assert!(c.get(i, j).max_abs_diff(&s) == 0.0);
            }
        }
        // the column-row product is the row-column one with the factors swapped
        let cr = b.star_cr(&a).unwrap();
        let rc = AMatrix::new(
            2,
            2,
            (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| (0..3).fold(alg.zero(), |s, k| &s + &(b.get(k, j) * a.get(i, k))))
                .collect(),
        )
        .unwrap();
        prop_assert!(cr.max_abs_diff(&rc) == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bracket_is_antisymmetric_and_bilinear(
        v in coords4(),
        w in coords4(),
        u in coords4(),
        a in -2.0..2.0_f64,
    ) {
        let g = LieGroup::quat_mult();
        let mut r = rng(0);
        let points = g.random_points(&mut r, 2).unwrap();
        for side in Side::BOTH {
            let sc = g.structure_constants_with_spread(side, &points).unwrap();
            let (v, w, u) = (quat(v.clone()), quat(w.clone()), quat(u.clone()));
            let vw = bracket_elements(&sc, &v, &w);
            let wv = bracket_elements(&sc, &w, &v);
            prop_assert!((&vw + &wv).norm() < 1e-8 * (1.0 + vw.norm()));
            let lhs = bracket_elements(&sc, &(&v.scale(a) + &u), &w);
            let rhs = &bracket_elements(&sc, &v, &w).scale(a) + &bracket_elements(&sc, &u, &w);
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-8 * (1.0 + lhs.norm()));
            // quaternion commutator, with the sign flipped on the right side
            let comm = &(&v * &w) - &(&w * &v);
            let expected = match side {
                Side::Left => comm,
                Side::Right => -&comm,
            };
            prop_assert!(vw.max_abs_diff(&expected) < 1e-8 * (1.0 + expected.norm()));
        }
    }
}
