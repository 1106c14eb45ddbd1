//! Exact symbolic engine for equivariant de Rham theory.
//!
//! Builds Weil algebras and Weil/Cartan models over finite differential
//! graded algebras with Lie-algebra actions, converts between the two models
//! with the Mathai-Quillen projector, computes equivariant cohomology by exact
//! rational linear algebra, and produces equivariant Chern-Weil forms
//! `f(K + sum_k u_k L_k)` for connections on bundle models.
//!
//! Module map:
//!
//! - [`ratlin`]: rank, kernels and quotients over `Q`
//! - [`lie`]: structure constants, coadjoint action, invariant polynomials
//! - [`gca`]: free graded-commutative algebras and (anti)derivations
//! - [`weil`]: the Weil algebra `W(s)` with `d`, `iota_i`, `L_i`
//! - [`sdga`]: finite models of forms with `s`- and `g`-actions, builtin catalog
//! - [`eqmodels`]: Weil model, Cartan model, Mathai-Quillen maps, cohomology
//! - [`chernweil`]: connections, curvature, moment maps, equivariant curvature

use std::fmt;

use num::{One, Signed};

pub mod chernweil;
pub mod eqmodels;
pub mod gca;
pub mod lie;
pub mod ratlin;
pub mod report;
pub mod sdga;
pub mod weil;

pub use chernweil::{Connection, GValued};
pub use eqmodels::{CartanElement, EquivariantComplex, WeilModelElement};
pub use gca::{GcaElement, GcaUniverse, GradedOperator, Monomial, Parity};
pub use lie::{InvariantPolynomial, LieAlgebraData, Polynomial};
pub use ratlin::{Rat, RatMatrix};
pub use sdga::{BundleModel, SDgaModel};
pub use weil::WeilAlgebra;

/// Writes `coeff*body` as one term of a sum, e.g. `- 3/2*x1` after the first term.
pub(crate) fn write_term(f: &mut fmt::Formatter<'_>, first: bool, coeff: &ratlin::Rat, body: &str) -> fmt::Result {
    let neg = coeff.is_negative();
    let abs = coeff.abs();
    match (first, neg) {
        (true, true) => write!(f, "-")?,
        (true, false) => {}
        (false, true) => write!(f, " - ")?,
        (false, false) => write!(f, " + ")?,
    }
    if body.is_empty() {
        write!(f, "{}", ratlin::fmt_rat(&abs))
    } else if abs.is_one() {
        write!(f, "{body}")
    } else {
        write!(f, "{}*{body}", ratlin::fmt_rat(&abs))
    }
}
