//! Calculus of non-commutative polynomial maps over finite-dimensional
//! real associative algebras, with Lie group invariants computed from the
//! group product.

pub mod algebra;
pub mod error;
pub mod geometry;
pub mod liegroup;
pub mod linmap;
pub mod mapmatrix;
pub mod ncexpr;
pub mod random;

pub use algebra::{Algebra, AlgebraDef, Element, Tuple};
pub use error::{Error, Result};
pub use linmap::{BilinearMap, SlotOrder, TensorMap};
pub use mapmatrix::{AMatrix, MapMatrix};
pub use ncexpr::{Derivative, Expr, PolyMap, TensorExpr};
