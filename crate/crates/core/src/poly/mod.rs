//! Homogeneous polynomial algebra, exact and floating.

pub mod coeff;
pub mod gcd;
pub mod homogeneous;
pub mod line;
pub mod map;
pub mod parse;
pub mod resultant;
pub mod roots;
pub mod sparse;

pub use coeff::{Coefficient, QComplex};
pub use gcd::poly_gcd;
pub use homogeneous::{ExactPoly, FloatPoly, HomogeneousPoly};
pub use line::{restrict_to_line, LineRestriction};
pub use map::{compose_and_reduce, parse_map, ExactMap, FloatMap, PolyMap};
pub use parse::{parse_affine, parse_poly, parse_univariate};
pub use resultant::{bivariate_common_zeros, bivariate_common_zeros_seeded};
pub use roots::{dense_roots, univariate_roots, Root, RootSet};
pub use sparse::{Monomial, Poly};
