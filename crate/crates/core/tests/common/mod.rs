//! Shared random generators for the integration tests.
#![allow(dead_code)]

use nccalc::random::{random_element, SeededRng};
use nccalc::{Algebra, MapMatrix, PolyMap, TensorMap};
use rand::Rng;

/// Constant literal with three-decimal coordinates, in source form.
pub fn literal(alg: &Algebra, r: &mut SeededRng) -> String {
    let coords: Vec<String> = (0..alg.dim())
        .map(|_| format!("{:.3}", r.gen_range(-1.0..1.0)))
        .collect();
    if alg.dim() == 4 {
        format!("q({})", coords.join(", "))
    } else {
        // basis symbols of the smaller algebras
        let names = alg.basis_names();
        coords
            .iter()
            .zip(names)
            .map(|(c, n)| {
                if n == "1" {
                    format!("({c})")
                } else {
                    format!("({c})*{n}")
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Monomial with `degree` variable factors and random constants in between.
fn monomial(alg: &Algebra, n_in: usize, degree: usize, r: &mut SeededRng) -> String {
    let mut factors = Vec::new();
    if r.gen_bool(0.5) {
        factors.push(format!("({})", literal(alg, r)));
    }
    for _ in 0..degree {
        factors.push(format!("x{}", r.gen_range(1..=n_in)));
        if r.gen_bool(0.3) {
            factors.push(format!("({})", literal(alg, r)));
        }
    }
    if factors.is_empty() {
        factors.push(format!("({})", literal(alg, r)));
    }
    factors.join("*")
}

/// Source of a random polynomial map with `n_out` components of degree at
/// most `max_degree` in `n_in` variables.
pub fn random_map_source(
    alg: &Algebra,
    n_in: usize,
    n_out: usize,
    max_degree: usize,
    r: &mut SeededRng,
) -> String {
    (1..=n_out)
        .map(|k| {
            let terms: Vec<String> = (0..r.gen_range(1..=4))
                .map(|_| {
                    let deg = r.gen_range(0..=max_degree);
                    monomial(alg, n_in, deg, r)
                })
                .collect();
            format!("y{k} = {}", terms.join(" + "))
        })
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn random_map(
    alg: &Algebra,
    n_in: usize,
    n_out: usize,
    max_degree: usize,
    r: &mut SeededRng,
) -> PolyMap {
    let src = random_map_source(alg, n_in, n_out, max_degree, r);
    PolyMap::parse(&src, n_in, alg).unwrap_or_else(|e| panic!("{src}: {e}"))
}

pub fn random_tensor_map(alg: &Algebra, r: &mut SeededRng) -> TensorMap {
    let terms = (0..r.gen_range(1..=3))
        .map(|_| (random_element(alg, r), random_element(alg, r)))
        .collect();
    TensorMap::from_terms(alg, terms)
}

pub fn random_map_matrix(alg: &Algebra, rows: usize, cols: usize, r: &mut SeededRng) -> MapMatrix {
    let entries = (0..rows * cols)
        .map(|_| random_tensor_map(alg, r))
        .collect();
    MapMatrix::new(alg, rows, cols, entries).expect("shape matches")
}
