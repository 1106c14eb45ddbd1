//! The Weil algebra `W(s) = S(s*) (x) Lambda(s*)` of a Lie algebra.
//!
//! Generators are `u1..ul` (degree 2) followed by `theta1..thetal` (degree 1):
//!
//! ```text
//! d theta_i = u_i - 1/2 sum_{j,k} c_{jk}^i theta_j theta_k
//! d u_i     = sum_{j,k} c_{jk}^i u_j theta_k
//! iota_i theta_j = delta_ij,   iota_i u_j = 0
//! L_i = d iota_i + iota_i d
//! ```
//!
//! `L_i` is computed from the other two operators, never assigned.

use std::sync::Arc;

use num::Zero;
use thiserror::Error;

use crate::gca::{operator_from_fn, GcaElement, GcaError, GcaUniverse, GeneratorSpec, GradedOperator, Parity};
use crate::lie::LieAlgebraData;
use crate::ratlin::rat;
use crate::report::CheckReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeilError {
    #[error(transparent)]
    Gca(#[from] GcaError),
    #[error("Weil algebra axioms fail:\n{0}")]
    Axioms(WeilReport),
}

pub type WeilReport = CheckReport;

trait RecordGca {
    fn record_elem(&mut self, identity: String, witness: &GcaElement, residual: GcaElement);
}

impl RecordGca for CheckReport {
    fn record_elem(&mut self, identity: String, witness: &GcaElement, residual: GcaElement) {
        let r = (!residual.is_zero()).then(|| residual.to_string());
        self.record(identity, witness.to_string(), r);
    }
}

#[derive(Clone, Debug)]
pub struct WeilAlgebra {
    lie: LieAlgebraData,
    universe: Arc<GcaUniverse>,
    d: GradedOperator,
    iota: Vec<GradedOperator>,
    lie_derivs: Vec<GradedOperator>,
}

impl WeilAlgebra {
    /// Builds the operators without checking any identity.
    pub fn build_unchecked(lie: &LieAlgebraData) -> Result<Self, GcaError> {
        let l = lie.dim();
        let mut gens: Vec<GeneratorSpec> = (1..=l).map(|i| GeneratorSpec::new(format!("u{i}"), 2)).collect();
        gens.extend((1..=l).map(|i| GeneratorSpec::new(format!("theta{i}"), 1)));
        let universe = GcaUniverse::new(gens)?;
        let u = |i: usize| GcaElement::generator(&universe, i);
        let th = |i: usize| GcaElement::generator(&universe, l + i);
        let half = rat(1, 2);

        let d = operator_from_fn(&universe, 1, Parity::Odd, |g| {
            if g < l {
                let i = g;
                let mut out = GcaElement::zero(&universe);
                for j in 0..l {
                    for k in 0..l {
                        let c = lie.c(j, k, i);
                        if !c.is_zero() {
                            out = &out + &(&u(j) * &th(k)).scale(c);
                        }
                    }
                }
                out
            } else {
                let i = g - l;
                let mut out = u(i);
                for j in 0..l {
                    for k in 0..l {
                        let c = lie.c(j, k, i);
                        if !c.is_zero() {
                            out = &out - &(&th(j) * &th(k)).scale(&(c * &half));
                        }
                    }
                }
                out
            }
        })?;

        let iota = (0..l)
            .map(|i| {
                operator_from_fn(&universe, -1, Parity::Odd, |g| {
                    if g == l + i {
                        GcaElement::one(&universe)
                    } else {
                        GcaElement::zero(&universe)
                    }
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let lie_derivs = iota
            .iter()
            .map(|io| {
                let images = (0..universe.len())
                    .map(|g| {
                        let x = GcaElement::generator(&universe, g);
                        let a = d.apply(&io.apply(&x)?)?;
                        let b = io.apply(&d.apply(&x)?)?;
                        Ok(Some(&a + &b))
                    })
                    .collect::<Result<Vec<_>, GcaError>>()?;
                GradedOperator::new(&universe, 0, Parity::Even, images)
            })
            .collect::<Result<Vec<_>, _>>()?;

        Ok(WeilAlgebra {
            lie: lie.clone(),
            universe,
            d,
            iota,
            lie_derivs,
        })
    }

    /// Builds and verifies; fails with the report if any identity is violated.
    pub fn build(lie: &LieAlgebraData) -> Result<Self, WeilError> {
        let w = Self::build_unchecked(lie)?;
        let report = w.verify()?;
        if report.passed() {
            Ok(w)
        } else {
            Err(WeilError::Axioms(report))
        }
    }

    pub fn lie(&self) -> &LieAlgebraData {
        &self.lie
    }

    pub fn dim(&self) -> usize {
        self.lie.dim()
    }

    pub fn universe(&self) -> &Arc<GcaUniverse> {
        &self.universe
    }

    pub fn u(&self, i: usize) -> GcaElement {
        GcaElement::generator(&self.universe, i)
    }

    pub fn theta(&self, i: usize) -> GcaElement {
        GcaElement::generator(&self.universe, self.dim() + i)
    }

    pub fn d(&self) -> &GradedOperator {
        &self.d
    }

    pub fn iota(&self, i: usize) -> &GradedOperator {
        &self.iota[i]
    }

    pub fn lie_derivative(&self, i: usize) -> &GradedOperator {
        &self.lie_derivs[i]
    }

    pub fn generators(&self) -> Vec<GcaElement> {
        (0..self.universe.len())
            .map(|g| GcaElement::generator(&self.universe, g))
            .collect()
    }

    /// Checks every Weil-algebra identity on every generator, plus the magic
    /// formula on products of two generators.
    pub fn verify(&self) -> Result<WeilReport, GcaError> {
        let l = self.dim();
        let c = |i, j, k| self.lie.c(i, j, k).clone();
        let d = |x: &GcaElement| self.d.apply(x);
        let io = |i: usize, x: &GcaElement| self.iota[i].apply(x);
        let lv = |i: usize, x: &GcaElement| self.lie_derivs[i].apply(x);
        let zero = GcaElement::zero(&self.universe);
        let mut rep = CheckReport::new();

        let gens = self.generators();
        for x in &gens {
            rep.record_elem("d^2 = 0".into(), x, d(&d(x)?)?);
            for i in 0..l {
                rep.record_elem(format!("iota{}^2 = 0", i + 1), x, io(i, &io(i, x)?)?);
                for j in i + 1..l {
                    let r = &io(i, &io(j, x)?)? + &io(j, &io(i, x)?)?;
                    rep.record_elem(format!("{{iota{}, iota{}}} = 0", i + 1, j + 1), x, r);
                }
                for j in 0..l {
                    // [L_i, L_j] = sum_k c_ij^k L_k
                    let mut r = &lv(i, &lv(j, x)?)? - &lv(j, &lv(i, x)?)?;
                    let mut s = &io(j, &lv(i, x)?)? - &lv(i, &io(j, x)?)?;
                    for k in 0..l {
                        if !c(i, j, k).is_zero() {
                            r = &r - &lv(k, x)?.scale(&c(i, j, k));
                            s = &s + &io(k, x)?.scale(&c(i, j, k));
                        }
                    }
                    rep.record_elem(format!("[L{}, L{}] = sum c L", i + 1, j + 1), x, r);
                    // [L_i, iota_j] = sum_k c_ij^k iota_k  (s holds -(lhs - rhs))
                    rep.record_elem(format!("[L{}, iota{}] = sum c iota", i + 1, j + 1), x, s);
                }
                let r = &lv(i, &d(x)?)? - &d(&lv(i, x)?)?;
                rep.record_elem(format!("L{} d = d L{}", i + 1, i + 1), x, r);
            }
        }
        for i in 0..l {
            for j in 0..l {
                // iota_i theta_j = delta_ij, iota_i u_j = 0
                let expect = if i == j { GcaElement::one(&self.universe) } else { zero.clone() };
                rep.record_elem(format!("iota{} theta{} = delta", i + 1, j + 1), &self.theta(j), &io(i, &self.theta(j))? - &expect);
                rep.record_elem(format!("iota{} u{} = 0", i + 1, j + 1), &self.u(j), io(i, &self.u(j))?);
                // L_i theta_j = -sum_k c_ik^j theta_k ; same pattern on u
                let mut rt = lv(i, &self.theta(j))?;
                let mut ru = lv(i, &self.u(j))?;
                for k in 0..l {
                    let x = c(i, k, j);
                    if !x.is_zero() {
                        rt = &rt + &self.theta(k).scale(&x);
                        ru = &ru + &self.u(k).scale(&x);
                    }
                }
                rep.record_elem(format!("L{} theta{} = -sum c theta", i + 1, j + 1), &self.theta(j), rt);
                rep.record_elem(format!("L{} u{} = -sum c u", i + 1, j + 1), &self.u(j), ru);
            }
        }
        for (a, x) in gens.iter().enumerate() {
            for y in &gens[a..] {
                let xy = x * y;
                for i in 0..l {
                    let r = &(&lv(i, &xy)? - &d(&io(i, &xy)?)?) - &io(i, &d(&xy)?)?;
                    rep.record_elem(format!("L{} = d iota{} + iota{} d", i + 1, i + 1, i + 1), &xy, r);
                }
            }
        }
        Ok(rep)
    }
}

pub fn build_weil(lie: &LieAlgebraData) -> Result<WeilAlgebra, WeilError> {
    WeilAlgebra::build(lie)
}

pub fn verify_weil(w: &WeilAlgebra) -> Result<WeilReport, GcaError> {
    w.verify()
}
