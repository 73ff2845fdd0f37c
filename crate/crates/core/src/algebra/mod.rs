//! Exact rational arithmetic on sparse multivariate polynomials and
//! rational functions over a fixed symbol registry.

pub mod linear_elim;
pub mod parse;
pub mod poly;
pub mod ratfunc;
pub mod registry;
pub mod subst;

pub use linear_elim::eliminate_linear;
pub use parse::{parse_poly, parse_ratfunc};
pub use poly::{fmt_rational, int, rat, Monomial, MultiPoly};
pub use ratfunc::{ratfunc_equal, RatFunc};
pub use registry::{Role, Symbol, VarRegistry};
pub use subst::{substitute, Substitution};
