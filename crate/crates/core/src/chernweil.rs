//! Connections on bundle models, curvature, moment maps and equivariant
//! characteristic forms.
//!
//! With structure constants `c` of `g` and `s`:
//!
//! ```text
//! K^c    = d Theta^c + 1/2 sum_{a,b} c_ab^c Theta^a Theta^b
//! L_i^a  = -iota^S_i Theta^a
//! (D x)^c = d x^c + sum_{a,b} c_ab^c Theta^a x^b
//! K_eq   = K + sum_k u_k L_k                          (Cartan model)
//! K_inf  = prod_i (1 - theta_i iota_i) K_eq           (Weil model)
//! ```
//!
//! `K_inf` is also computed as the curvature of
//! `Xi = 1 (x) Theta + sum_i theta_i (x) L_i` and from the expanded formula
//! `1 (x) K + sum_i d theta_i (x) L_i - sum_i theta_i (x) iota_i K
//!  + sum_{i<j} theta_i theta_j (x) [L_i, L_j]`; the three must agree.

use num::{One, Zero};
use thiserror::Error;

use crate::eqmodels::{CartanElement, EqError, EquivariantComplex, Tensor, WeilModelElement};
use crate::gca::GcaElement;
use crate::lie::{InvariantPolynomial, LieAlgebraData, Polynomial};
use crate::ratlin::{rat, Rat, SparseVec};
use crate::report::CheckReport;
use crate::sdga::{BaseModel, BundleModel, ModelError, SDgaModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChernError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eq(#[from] EqError),
    #[error("expected {expected} connection components, found {found}")]
    ComponentCount { expected: usize, found: usize },
    #[error("connection component {0} is not of degree 1")]
    NotDegreeOne(usize),
    #[error("invalid connection:\n{0}")]
    InvalidConnection(CheckReport),
    #[error("polynomial has {found} variables but g has dimension {expected}")]
    PolynomialArity { expected: usize, found: usize },
    #[error("cannot substitute the odd-degree element {0} into a polynomial")]
    OddComponent(String),
    #[error("Chern-Weil form is not g-basic: {0}")]
    NotGBasic(String),
    #[error("Chern-Weil form is not closed: d_C gives {0}")]
    NotClosed(String),
    #[error("equivariant curvature computations disagree: {0}")]
    Inconsistent(String),
    #[error("point has {found} coordinates, s has dimension {expected}")]
    PointDimension { expected: usize, found: usize },
}

/// One component per basis vector of `g`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GValued<T>(pub Vec<T>);

impl<T> GValued<T> {
    pub fn components(&self) -> &[T] {
        &self.0
    }

    pub fn component(&self, a: usize) -> &T {
        &self.0[a]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> GValued<U> {
        GValued(self.0.iter().map(f).collect())
    }
}

/// A connection together with the bundle it lives on.
#[derive(Clone, Debug)]
pub struct Connection {
    bundle: BundleModel,
    theta: GValued<SparseVec>,
    cx: EquivariantComplex,
}

impl Connection {
    /// Checks the component count and degrees only.
    pub fn new_unchecked(bundle: &BundleModel, theta: Vec<SparseVec>) -> Result<Self, ChernError> {
        let expected = bundle.g_lie().dim();
        if theta.len() != expected {
            return Err(ChernError::ComponentCount { expected, found: theta.len() });
        }
        for (a, t) in theta.iter().enumerate() {
            if !t.is_zero() && bundle.model().degree_of(t) != Some(1) {
                return Err(ChernError::NotDegreeOne(a));
            }
        }
        let cx = EquivariantComplex::new(bundle.model().clone(), 2)?;
        Ok(Connection {
            bundle: bundle.clone(),
            theta: GValued(theta),
            cx,
        })
    }

    /// Builds the connection and rejects it if [`validate_connection`] fails.
    pub fn new(bundle: &BundleModel, theta: Vec<SparseVec>) -> Result<Self, ChernError> {
        let conn = Self::new_unchecked(bundle, theta)?;
        let report = validate_connection(&conn);
        if report.passed() {
            Ok(conn)
        } else {
            Err(ChernError::InvalidConnection(report))
        }
    }

    pub fn bundle(&self) -> &BundleModel {
        &self.bundle
    }

    pub fn model(&self) -> &SDgaModel {
        self.bundle.model()
    }

    pub fn theta(&self) -> &GValued<SparseVec> {
        &self.theta
    }

    /// Operators on `W(s) (x) A_P`.
    pub fn complex(&self) -> &EquivariantComplex {
        &self.cx
    }

    fn g(&self) -> &LieAlgebraData {
        self.bundle.g_lie()
    }

    fn s(&self) -> &LieAlgebraData {
        self.model().lie()
    }

    pub fn format(&self, x: &GValued<SparseVec>) -> String {
        format_components(x.components().iter().map(|v| self.model().format(v)))
    }

    pub fn format_tensor<T: std::ops::Deref<Target = Tensor>>(&self, x: &GValued<T>) -> String {
        format_components(x.components().iter().map(|v| self.cx.format(v)))
    }

    /// `[x, y]^c = sum_{a,b} c_ab^c x^a y^b`.
    pub fn bracket(&self, x: &GValued<SparseVec>, y: &GValued<SparseVec>) -> GValued<SparseVec> {
        let g = self.g();
        let n = g.dim();
        GValued(
            (0..n)
                .map(|c| {
                    let mut out = SparseVec::new();
                    for a in 0..n {
                        for b in 0..n {
                            let k = g.c(a, b, c);
                            if !k.is_zero() {
                                out.add_scaled(&self.model().product(&x.0[a], &y.0[b]), k);
                            }
                        }
                    }
                    out
                })
                .collect(),
        )
    }

    pub fn curvature(&self) -> GValued<SparseVec> {
        let half = self.bracket(&self.theta, &self.theta);
        GValued(
            (0..self.g().dim())
                .map(|c| {
                    let mut k = self.model().apply_d(&self.theta.0[c]);
                    k.add_scaled(&half.0[c], &rat(1, 2));
                    k
                })
                .collect(),
        )
    }

    /// `L_i = -iota^S_i Theta`.
    pub fn moment(&self, i: usize) -> GValued<SparseVec> {
        self.theta.map(|t| self.model().apply_iota(i, t).scaled(&-Rat::one()))
    }

    pub fn moments(&self) -> Vec<GValued<SparseVec>> {
        (0..self.s().dim()).map(|i| self.moment(i)).collect()
    }

    pub fn covariant_derivative(&self, x: &GValued<SparseVec>) -> GValued<SparseVec> {
        let br = self.bracket(&self.theta, x);
        GValued(
            x.0.iter()
                .zip(&br.0)
                .map(|(xc, bc)| self.model().apply_d(xc).plus(bc))
                .collect(),
        )
    }

    fn apply_iota_s(&self, i: usize, x: &GValued<SparseVec>) -> GValued<SparseVec> {
        x.map(|v| self.model().apply_iota(i, v))
    }

    /// `K + sum_k u_k L_k`, one Cartan element per `g` component.
    pub fn equivariant_curvature(&self) -> GValued<CartanElement> {
        let k = self.curvature();
        let ls = self.moments();
        let cx = &self.cx;
        GValued(
            (0..self.g().dim())
                .map(|c| {
                    let mut t = cx.from_model(&k.0[c]);
                    for (i, l) in ls.iter().enumerate() {
                        t.add(&cx.u_monomial(i), &l.0[c], &Rat::one());
                    }
                    CartanElement::new(t).expect("no theta factors were introduced")
                })
                .collect(),
        )
    }

    /// `K_inf` through the Mathai-Quillen projector, cross-checked against the
    /// curvature of `Xi` and against the expanded formula.
    pub fn weil_equivariant_curvature(&self) -> Result<WeilCurvature, ChernError> {
        let cx = &self.cx;
        let via_projector = self.equivariant_curvature().map(|x| cx.mq_to_weil(x));
        let via_xi = self.xi_curvature();
        let via_formula = self.expanded_curvature();
        for c in 0..self.g().dim() {
            let p = &via_projector.0[c];
            if p != &via_xi.0[c] {
                return Err(ChernError::Inconsistent(format!(
                    "component {}: projector gives {}, Xi gives {}",
                    c + 1,
                    cx.format(p),
                    cx.format(&via_xi.0[c])
                )));
            }
            if p != &via_formula.0[c] {
                return Err(ChernError::Inconsistent(format!(
                    "component {}: projector gives {}, expanded formula gives {}",
                    c + 1,
                    cx.format(p),
                    cx.format(&via_formula.0[c])
                )));
            }
        }
        Ok(WeilCurvature { k_inf: via_projector, via_xi, via_formula })
    }

    /// `Xi = 1 (x) Theta + sum_i theta_i (x) L_i`.
    pub fn xi(&self) -> GValued<WeilModelElement> {
        let cx = &self.cx;
        let ls = self.moments();
        GValued(
            (0..self.g().dim())
                .map(|c| {
                    let mut t = cx.from_model(&self.theta.0[c]);
                    for (i, l) in ls.iter().enumerate() {
                        t.add(&cx.theta_monomial(i), &l.0[c], &Rat::one());
                    }
                    WeilModelElement::new(t)
                })
                .collect(),
        )
    }

    /// `d Xi + 1/2 [Xi, Xi]` with the total differential of `W(s) (x) A_P`.
    pub fn xi_curvature(&self) -> GValued<WeilModelElement> {
        let cx = &self.cx;
        let xi = self.xi();
        let g = self.g();
        let n = g.dim();
        GValued(
            (0..n)
                .map(|c| {
                    let mut t = cx.total_d(&xi.0[c]);
                    for a in 0..n {
                        for b in 0..n {
                            let k = g.c(a, b, c);
                            if !k.is_zero() {
                                t.add_tensor(&cx.multiply(&xi.0[a], &xi.0[b]), &(k * rat(1, 2)));
                            }
                        }
                    }
                    WeilModelElement::new(t)
                })
                .collect(),
        )
    }

    /// `1 (x) K + sum_i d theta_i (x) L_i - sum_i theta_i (x) iota_i K
    ///  + sum_{i<j} theta_i theta_j (x) [L_i, L_j]`.
    pub fn expanded_curvature(&self) -> GValued<WeilModelElement> {
        let cx = &self.cx;
        let w = cx.weil();
        let l = self.s().dim();
        let k = self.curvature();
        let ls = self.moments();
        let iota_k: Vec<_> = (0..l).map(|i| self.apply_iota_s(i, &k)).collect();
        let dtheta: Vec<GcaElement> = (0..l)
            .map(|i| w.d().apply(&w.theta(i)).expect("Weil operators are defined on every generator"))
            .collect();
        let mut brackets = Vec::new();
        for i in 0..l {
            for j in i + 1..l {
                brackets.push((i, j, self.bracket(&ls[i], &ls[j])));
            }
        }
        GValued(
            (0..self.g().dim())
                .map(|c| {
                    let mut t = cx.from_model(&k.0[c]);
                    for i in 0..l {
                        t.add_tensor(&cx.embed(&dtheta[i], &ls[i].0[c]), &Rat::one());
                        t.add(&cx.theta_monomial(i), &iota_k[i].0[c], &-Rat::one());
                    }
                    for (i, j, br) in &brackets {
                        let (s, m) = cx.theta_monomial(*i).mul(&cx.theta_monomial(*j)).expect("distinct thetas");
                        t.add(&m, &br.0[c], &Rat::from_integer(s.into()));
                    }
                    WeilModelElement::new(t)
                })
                .collect(),
        )
    }

    /// `f` evaluated on the components of the Cartan equivariant curvature, over `A_P`.
    pub fn cartan_form_on_total(&self, f: &InvariantPolynomial) -> Result<CartanElement, ChernError> {
        let keq = self.equivariant_curvature();
        let t = self.substitute(f.poly(), &keq.map(|x| x.tensor().clone()))?;
        Ok(CartanElement::new(t).expect("products of theta-free tensors are theta-free"))
    }

    /// `f(K_inf)` in `W(s) (x) A_P`.
    pub fn weil_form_on_total(&self, f: &InvariantPolynomial) -> Result<WeilModelElement, ChernError> {
        let kinf = self.weil_equivariant_curvature()?.k_inf;
        Ok(WeilModelElement::new(self.substitute(f.poly(), &kinf.map(|x| x.tensor().clone()))?))
    }

    fn substitute(&self, f: &Polynomial, values: &GValued<Tensor>) -> Result<Tensor, ChernError> {
        let n = self.g().dim();
        if f.nvars() != n {
            return Err(ChernError::PolynomialArity { expected: n, found: f.nvars() });
        }
        let cx = &self.cx;
        for v in values.components() {
            if cx.degree_of(v).is_some_and(|d| d % 2 == 1) || (!v.is_zero() && cx.degree_of(v).is_none()) {
                return Err(ChernError::OddComponent(cx.format(v)));
            }
        }
        let one = cx.from_model(&self.model().one());
        Ok(f.evaluate(
            values.components(),
            |c| one.scaled(c),
            |a, b| a.plus(b),
            |a, b| cx.multiply(a, b),
        ))
    }

    /// Applies `iota^G_a` to every `A_P` coefficient, with the Koszul sign past the Weil factor.
    pub fn total_iota_g(&self, a: usize, t: &Tensor) -> Tensor {
        let mut out = Tensor::zero();
        for (m, v) in t.terms() {
            let sign = if self.cx.monomial_degree(m) % 2 == 1 { -Rat::one() } else { Rat::one() };
            out.add(m, &self.bundle.apply_iota_g(a, v), &sign);
        }
        out
    }

    pub fn total_lie_g(&self, a: usize, t: &Tensor) -> Tensor {
        let mut out = Tensor::zero();
        for (m, v) in t.terms() {
            out.add(m, &self.bundle.apply_lie_g(a, v), &Rat::one());
        }
        out
    }

    /// The Chern-Weil form `f(K + sum u_k L_k)` written over the base.
    pub fn chern_weil_form(&self, f: &InvariantPolynomial) -> Result<ChernWeilForm, ChernError> {
        let total = self.cartan_form_on_total(f)?;
        for a in 0..self.g().dim() {
            for (what, img) in [("iota^G", self.total_iota_g(a, &total)), ("L^G", self.total_lie_g(a, &total))] {
                if !img.is_zero() {
                    return Err(ChernError::NotGBasic(format!("{what}_{} gives {}", a + 1, self.cx.format(&img))));
                }
            }
        }
        let base = self.bundle.base()?;
        let mut t = Tensor::zero();
        for (m, v) in total.terms() {
            let down = base.descend(v).ok_or_else(|| ChernError::NotGBasic(self.model().format(v)))?;
            t.add(m, &down, &Rat::one());
        }
        let degree = self.cx.degree_of(&total).unwrap_or(2 * f.poly().degree().unwrap_or(0));
        let base_cx = EquivariantComplex::new(base.model().clone(), degree)?;
        let form = CartanElement::new(t).expect("descended from a theta-free element");
        let dc = base_cx.cartan_d(&form);
        if !dc.is_zero() {
            return Err(ChernError::NotClosed(base_cx.format(&dc)));
        }
        Ok(ChernWeilForm { base, complex: base_cx, form, degree })
    }
}

fn format_components(parts: impl Iterator<Item = String>) -> String {
    let v: Vec<String> = parts.collect();
    if v.len() == 1 {
        v[0].clone()
    } else {
        format!("({})", v.join(", "))
    }
}

/// The three computations of `K_inf`, already checked equal.
#[derive(Clone, Debug)]
pub struct WeilCurvature {
    pub k_inf: GValued<WeilModelElement>,
    pub via_xi: GValued<WeilModelElement>,
    pub via_formula: GValued<WeilModelElement>,
}

/// A closed Cartan element over the base model `A_M`.
#[derive(Clone, Debug)]
pub struct ChernWeilForm {
    base: BaseModel,
    complex: EquivariantComplex,
    form: CartanElement,
    degree: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassAnalysis {
    pub degree: u32,
    /// `Some(y)` with `d_C y = form` when the class vanishes.
    pub primitive: Option<CartanElement>,
    pub cohomology_dimension: usize,
}

impl ClassAnalysis {
    pub fn is_zero(&self) -> bool {
        self.primitive.is_some()
    }
}

impl ChernWeilForm {
    pub fn base(&self) -> &BaseModel {
        &self.base
    }

    pub fn complex(&self) -> &EquivariantComplex {
        &self.complex
    }

    pub fn form(&self) -> &CartanElement {
        &self.form
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn format(&self) -> String {
        self.complex.format(&self.form)
    }

    pub fn analyze(&self) -> Result<ClassAnalysis, ChernError> {
        let primitive = self.complex.cartan_primitive(&self.form)?;
        let cohomology_dimension = self.complex.equivariant_cohomology(self.degree)?.dimension;
        Ok(ClassAnalysis { degree: self.degree, primitive, cohomology_dimension })
    }

    /// `h(X)`: substitutes `u_k -> X_k`.
    pub fn evaluate_at(&self, x: &[Rat]) -> Result<SparseVec, ChernError> {
        let l = self.complex.dim_s();
        if x.len() != l {
            return Err(ChernError::PointDimension { expected: l, found: x.len() });
        }
        Ok(self.complex.evaluate_u(&self.form, x))
    }

    /// `L^A_i h(X) - Dh_X([X_i, X])` for each `i`; all zero for an invariant form.
    pub fn equivariance_defect(&self, x: &[Rat]) -> Result<Vec<SparseVec>, ChernError> {
        let l = self.complex.dim_s();
        if x.len() != l {
            return Err(ChernError::PointDimension { expected: l, found: x.len() });
        }
        let model = self.base.model();
        let lie = model.lie();
        let hx = self.evaluate_at(x)?;
        let mut out = Vec::new();
        for i in 0..l {
            // [X_i, X]^j = sum_k c_ik^j X_k
            let y: Vec<Rat> = (0..l)
                .map(|j| (0..l).map(|k| lie.c(i, k, j) * &x[k]).sum())
                .collect();
            let mut defect = model.apply_lie(i, &hx);
            defect.add_scaled(&self.directional_derivative(x, &y), &-Rat::one());
            out.push(defect);
        }
        Ok(out)
    }

    fn directional_derivative(&self, x: &[Rat], y: &[Rat]) -> SparseVec {
        let mut out = SparseVec::new();
        for (m, v) in self.form.terms() {
            let e = m.even_exponents();
            for k in 0..e.len() {
                if e[k] == 0 || y[k].is_zero() {
                    continue;
                }
                let mut c = Rat::from_integer(e[k].into()) * &y[k];
                for (j, &p) in e.iter().enumerate() {
                    let p = if j == k { p - 1 } else { p };
                    for _ in 0..p {
                        c *= &x[j];
                    }
                }
                out.add_scaled(v, &c);
            }
        }
        out
    }
}

/// Infinitesimal connection conditions: normalization `iota^G_a Theta^b = delta`,
/// equivariance `L^G_a Theta^c = -sum_b c_ab^c Theta^b`, `s`-invariance `L^S_i Theta = 0`.
pub fn validate_connection(conn: &Connection) -> CheckReport {
    let mut rep = CheckReport::new();
    let b = conn.bundle();
    let m = conn.model();
    let g = b.g_lie();
    let n = g.dim();
    let th = &conn.theta.0;
    for a in 0..n {
        for c in 0..n {
            let mut r = b.apply_iota_g(a, &th[c]);
            if a == c {
                r.add_term(m.unit(), &-Rat::one());
            }
            let w = format!("Theta{}", c + 1);
            rep.record(format!("iota^G_{} Theta{} = delta", a + 1, c + 1), w.clone(), residual(m, &r));
            let mut r = b.apply_lie_g(a, &th[c]);
            for bb in 0..n {
                r.add_scaled(&th[bb], g.c(a, bb, c));
            }
            rep.record(format!("L^G_{} Theta{} = -sum c Theta", a + 1, c + 1), w, residual(m, &r));
        }
    }
    for i in 0..m.lie().dim() {
        for c in 0..n {
            let r = m.apply_lie(i, &th[c]);
            rep.record(format!("L^S_{} Theta{} = 0", i + 1, c + 1), format!("Theta{}", c + 1), residual(m, &r));
        }
    }
    rep
}

fn residual(m: &SDgaModel, v: &SparseVec) -> Option<String> {
    (!v.is_zero()).then(|| m.format(v))
}

/// Curvature is horizontal and equivariant.
pub fn verify_curvature(conn: &Connection) -> CheckReport {
    let mut rep = CheckReport::new();
    let b = conn.bundle();
    let m = conn.model();
    let g = b.g_lie();
    let k = conn.curvature();
    for a in 0..g.dim() {
        for c in 0..g.dim() {
            let w = format!("K{}", c + 1);
            let r = b.apply_iota_g(a, &k.0[c]);
            rep.record(format!("iota^G_{} K{} = 0", a + 1, c + 1), w.clone(), residual(m, &r));
            let mut r = b.apply_lie_g(a, &k.0[c]);
            for bb in 0..g.dim() {
                r.add_scaled(&k.0[bb], g.c(a, bb, c));
            }
            rep.record(format!("L^G_{} K{} = -sum c K", a + 1, c + 1), w, residual(m, &r));
        }
    }
    rep
}

/// `L^S_j L_i = sum_k c(s)_ji^k L_k` and `L^G_a L_i^c = -sum_b c(g)_ab^c L_i^b`.
pub fn verify_moment_equivariance(conn: &Connection) -> CheckReport {
    let mut rep = CheckReport::new();
    let m = conn.model();
    let s = m.lie();
    let g = conn.bundle().g_lie();
    let ls = conn.moments();
    for i in 0..s.dim() {
        for c in 0..g.dim() {
            for j in 0..s.dim() {
                let mut r = m.apply_lie(j, &ls[i].0[c]);
                for k in 0..s.dim() {
                    r.add_scaled(&ls[k].0[c], &-s.c(j, i, k));
                }
                let id = format!("L^S_{} L{}^{} = sum c L", j + 1, i + 1, c + 1);
                rep.record(id, format!("L{}", i + 1), residual(m, &r));
            }
            for a in 0..g.dim() {
                let mut r = conn.bundle().apply_lie_g(a, &ls[i].0[c]);
                for b in 0..g.dim() {
                    r.add_scaled(&ls[i].0[b], g.c(a, b, c));
                }
                let id = format!("L^G_{} L{}^{} = -sum c L", a + 1, i + 1, c + 1);
                rep.record(id, format!("L{}", i + 1), residual(m, &r));
            }
        }
    }
    rep
}

/// `iota_i K = D L_i` and `iota_j iota_i K = [L_i, L_j] - sum_k c(s)_ij^k L_k`.
pub fn verify_curvature_contractions(conn: &Connection) -> CheckReport {
    let mut rep = CheckReport::new();
    let m = conn.model();
    let s = m.lie();
    let k = conn.curvature();
    let ls = conn.moments();
    let ng = conn.bundle().g_lie().dim();
    for i in 0..s.dim() {
        let lhs = conn.apply_iota_s(i, &k);
        let rhs = conn.covariant_derivative(&ls[i]);
        for c in 0..ng {
            let r = lhs.0[c].minus(&rhs.0[c]);
            rep.record(format!("iota{} K = D L{}", i + 1, i + 1), format!("component {}", c + 1), residual(m, &r));
        }
        for j in 0..s.dim() {
            let lhs = conn.apply_iota_s(j, &conn.apply_iota_s(i, &k));
            let br = conn.bracket(&ls[i], &ls[j]);
            for c in 0..ng {
                let mut r = lhs.0[c].minus(&br.0[c]);
                for kk in 0..s.dim() {
                    r.add_scaled(&ls[kk].0[c], s.c(i, j, kk));
                }
                let id = format!("iota{} iota{} K = [L{}, L{}] - L[X{}, X{}]", j + 1, i + 1, i + 1, j + 1, i + 1, j + 1);
                rep.record(id, format!("component {}", c + 1), residual(m, &r));
            }
        }
    }
    rep
}

/// The three `K_inf` computations agree, `K_inf` is `s`-basic, and the
/// projector recovers `K_eq` as its theta-free part.
pub fn verify_weil_curvature(conn: &Connection) -> Result<CheckReport, ChernError> {
    let mut rep = CheckReport::new();
    let cx = conn.complex();
    let keq = conn.equivariant_curvature();
    let proj = keq.map(|x| cx.mq_to_weil(x));
    let xi = conn.xi_curvature();
    let formula = conn.expanded_curvature();
    for c in 0..keq.len() {
        let w = format!("K_inf{}", c + 1);
        let r = proj.0[c].minus(&xi.0[c]);
        rep.record("projector K_eq = d Xi + 1/2 [Xi, Xi]", w.clone(), (!r.is_zero()).then(|| cx.format(&r)));
        let r = proj.0[c].minus(&formula.0[c]);
        rep.record("projector K_eq = expanded formula", w.clone(), (!r.is_zero()).then(|| cx.format(&r)));
        for i in 0..cx.dim_s() {
            for (name, img) in [("iota", cx.total_iota(i, &proj.0[c])), ("L", cx.total_lie(i, &proj.0[c]))] {
                rep.record(format!("{name}^S_{} K_inf = 0", i + 1), w.clone(), (!img.is_zero()).then(|| cx.format(&img)));
            }
        }
        let back = cx.mq_to_cartan(&proj.0[c]).minus(&keq.0[c]);
        rep.record("theta-free part of K_inf = K_eq", w, (!back.is_zero()).then(|| cx.format(&back)));
    }
    Ok(rep)
}

/// `f(K_inf)` is annihilated by every total `iota^S_i`, `L^S_i` and `iota^G_a`,
/// and its theta-free part is `f(K_eq)`.
pub fn verify_basic_characteristic_forms(conn: &Connection, f: &InvariantPolynomial) -> Result<CheckReport, ChernError> {
    let mut rep = CheckReport::new();
    let cx = conn.complex();
    let fk = conn.weil_form_on_total(f)?;
    let w = format!("f(K_inf), f = {}", f.poly());
    let fmt = |t: &Tensor| (!t.is_zero()).then(|| cx.format(t));
    for i in 0..cx.dim_s() {
        rep.record(format!("iota^S_{} f(K_inf) = 0", i + 1), w.clone(), fmt(&cx.total_iota(i, &fk)));
        rep.record(format!("L^S_{} f(K_inf) = 0", i + 1), w.clone(), fmt(&cx.total_lie(i, &fk)));
    }
    for a in 0..conn.bundle().g_lie().dim() {
        rep.record(format!("iota^G_{} f(K_inf) = 0", a + 1), w.clone(), fmt(&conn.total_iota_g(a, &fk)));
    }
    let keq_form = conn.cartan_form_on_total(f)?;
    let r = cx.mq_to_cartan(&fk).minus(&keq_form);
    rep.record("theta-free part of f(K_inf) = f(K_eq)", w, fmt(&r));
    Ok(rep)
}

/// Difference of two Chern-Weil forms and, when exact, a primitive.
#[derive(Clone, Debug)]
pub struct IndependenceReport {
    pub difference: CartanElement,
    pub primitive: Option<CartanElement>,
}

impl IndependenceReport {
    pub fn holds(&self) -> bool {
        self.primitive.is_some()
    }
}

pub fn connection_independence(
    f: &InvariantPolynomial,
    first: &Connection,
    second: &Connection,
) -> Result<IndependenceReport, ChernError> {
    let a = first.chern_weil_form(f)?;
    let b = second.chern_weil_form(f)?;
    let difference = a.form().minus(b.form());
    let primitive = a.complex().cartan_primitive(&difference)?;
    Ok(IndependenceReport { difference, primitive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratlin::int;
    use crate::sdga::{builtin, builtin_connection, ModelBuilder};

    fn builtin_conn(name: &str) -> Connection {
        let m = builtin(name).unwrap();
        Connection::new(m.bundle().unwrap(), builtin_connection(name).unwrap()).unwrap()
    }

    fn flat(c: Rat) -> Connection {
        let m = builtin("flat_circle_over_circle").unwrap();
        let b = m.bundle().unwrap();
        let p = b.model();
        let theta = SparseVec::from_pairs([(p.find("beta").unwrap(), int(1)), (p.find("alpha").unwrap(), c)]);
        Connection::new(b, vec![theta]).unwrap()
    }

    fn x(n: u32) -> InvariantPolynomial {
        InvariantPolynomial::new(Polynomial::var(1, 0).pow(n), &LieAlgebraData::u1()).unwrap()
    }

    #[test]
    fn flat_values() {
        let conn = flat(rat(3, 2));
        assert!(conn.curvature().0[0].is_zero());
        assert_eq!(conn.format(&conn.moment(0)), "-3/2");
        let cx = conn.complex();
        assert_eq!(conn.format_tensor(&conn.equivariant_curvature()), "-3/2*u1");
        let w = conn.weil_equivariant_curvature().unwrap();
        assert_eq!(cx.format(&w.k_inf.0[0]), "-3/2*u1");
        assert!(conn.covariant_derivative(&conn.moment(0)).0[0].is_zero());
    }

    #[test]
    fn bad_normalization_rejected() {
        let m = builtin("flat_circle_over_circle").unwrap();
        let b = m.bundle().unwrap();
        let theta = SparseVec::from_pairs([(2, int(2)), (1, rat(3, 2))]);
        match Connection::new(b, vec![theta]) {
            Err(ChernError::InvalidConnection(rep)) => assert!(rep.has_failure("iota^G_1 Theta1 = delta")),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn hopf_values() {
        let t = builtin_conn("hopf_trivial_s");
        assert_eq!(t.format(&t.curvature()), "omega");
        assert!(t.moment(0).0[0].is_zero());
        let r = builtin_conn("hopf_fiber_rotation");
        assert_eq!(r.format(&r.moment(0)), "-1");
        assert_eq!(r.format_tensor(&r.equivariant_curvature()), "omega - u1");
        let w = r.weil_equivariant_curvature().unwrap();
        assert_eq!(r.complex().format(&w.k_inf.0[0]), "omega - u1");
    }

    #[test]
    fn chern_forms_and_classes() {
        let f = flat(rat(3, 2)).chern_weil_form(&x(1)).unwrap();
        assert_eq!(f.format(), "-3/2*u1");
        let cls = f.analyze().unwrap();
        assert!(cls.is_zero());
        assert_eq!(f.complex().format(cls.primitive.as_ref().unwrap()), "3/2*alpha");

        let h = builtin_conn("hopf_trivial_s").chern_weil_form(&x(1)).unwrap();
        assert_eq!(h.format(), "omega");
        let cls = h.analyze().unwrap();
        assert!(!cls.is_zero());
        assert_eq!(cls.cohomology_dimension, 2);

        let r = builtin_conn("hopf_fiber_rotation").chern_weil_form(&x(2)).unwrap();
        assert_eq!(r.format(), "-2*u1*omega + u1^2");
        assert!(!r.analyze().unwrap().is_zero());
    }

    #[test]
    fn evaluation() {
        let f = flat(rat(3, 2)).chern_weil_form(&x(1)).unwrap();
        let m = f.base().model();
        assert_eq!(m.format(&f.evaluate_at(&[int(2)]).unwrap()), "-3");
        assert_eq!(m.format(&f.evaluate_at(&[int(1)]).unwrap()), "-3/2");
        assert!(f.evaluate_at(&[int(0)]).unwrap().is_zero());
        assert!(f.evaluate_at(&[]).is_err());
        let h = builtin_conn("hopf_fiber_rotation").chern_weil_form(&x(1)).unwrap();
        assert_eq!(h.base().model().format(&h.evaluate_at(&[int(1)]).unwrap()), "omega - 1");
        assert!(h.equivariance_defect(&[int(5)]).unwrap().iter().all(SparseVec::is_zero));
    }

    #[test]
    fn independence_on_flat_family() {
        let rep = connection_independence(&x(1), &flat(rat(3, 2)), &flat(int(-2))).unwrap();
        assert!(rep.holds());
        let cx = flat(int(0)).chern_weil_form(&x(1)).unwrap();
        assert_eq!(cx.complex().format(&rep.difference), "-7/2*u1");
        assert_eq!(cx.complex().format(rep.primitive.as_ref().unwrap()), "7/2*alpha");
        let same = connection_independence(&x(2), &flat(int(3)), &flat(int(3))).unwrap();
        assert!(same.difference.is_zero() && same.holds());
    }

    /// `s` abelian of dimension 2 acting on `Lambda(e1, e2)`, `g = su(2)`
    /// acting trivially, so only the `s`-side identities are meaningful.
    fn synthetic() -> Connection {
        let mut b = ModelBuilder::new(LieAlgebraData::abelian(2));
        b.structure_algebra(LieAlgebraData::su2());
        b.basis("1", 0).unwrap();
        b.basis("e1", 1).unwrap();
        b.basis("e2", 1).unwrap();
        b.basis("e12", 2).unwrap();
        b.product("e1", "e2", &[("e12", int(1))]).unwrap();
        for (i, e) in ["e1", "e2"].iter().enumerate() {
            b.iota_s(i, e, &[("1", int(1))]).unwrap();
        }
        b.iota_s(0, "e12", &[("e2", int(1))]).unwrap();
        b.iota_s(1, "e12", &[("e1", int(-1))]).unwrap();
        let bundle = b.build_bundle().unwrap();
        let lam = [[1, 2], [0, 3], [-1, 1]];
        let theta = lam
            .iter()
            .map(|r| SparseVec::from_pairs([(1, int(r[0])), (2, int(r[1]))]))
            .collect();
        Connection::new_unchecked(&bundle, theta).unwrap()
    }

    #[test]
    fn nonabelian_bracket_terms() {
        let conn = synthetic();
        let ls = conn.moments();
        assert!(conn.bracket(&ls[0], &ls[1]).components().iter().any(|v| !v.is_zero()));
        assert!(verify_curvature_contractions(&conn).passed(), "{}", verify_curvature_contractions(&conn));
        assert!(!verify_moment_equivariance(&conn).has_failure("L^S"));
        let rep = verify_weil_curvature(&conn).unwrap();
        assert!(rep.passed(), "{rep}");
        conn.weil_equivariant_curvature().unwrap();
    }

    #[test]
    fn maurer_cartan_is_flat() {
        let su2 = LieAlgebraData::su2();
        let mut b = ModelBuilder::new(LieAlgebraData::abelian(0));
        b.structure_algebra(su2.clone());
        b.basis("1", 0).unwrap();
        let names = ["t1", "t2", "t3", "t12", "t13", "t23", "t123"];
        for (i, n) in names.iter().enumerate() {
            b.basis(n, [1, 1, 1, 2, 2, 2, 3][i]).unwrap();
        }
        b.product("t1", "t2", &[("t12", int(1))]).unwrap();
        b.product("t1", "t3", &[("t13", int(1))]).unwrap();
        b.product("t2", "t3", &[("t23", int(1))]).unwrap();
        b.product("t1", "t23", &[("t123", int(1))]).unwrap();
        b.product("t2", "t13", &[("t123", int(-1))]).unwrap();
        b.product("t3", "t12", &[("t123", int(1))]).unwrap();
        // d t^c = -1/2 sum c_ab^c t^a t^b
        b.d("t1", &[("t23", int(-1))]).unwrap();
        b.d("t2", &[("t13", int(1))]).unwrap();
        b.d("t3", &[("t12", int(-1))]).unwrap();
        for (a, t) in ["t1", "t2", "t3"].iter().enumerate() {
            b.iota_g(a, t, &[("1", int(1))]).unwrap();
        }
        b.iota_g(0, "t12", &[("t2", int(1))]).unwrap();
        b.iota_g(1, "t12", &[("t1", int(-1))]).unwrap();
        b.iota_g(0, "t13", &[("t3", int(1))]).unwrap();
        b.iota_g(2, "t13", &[("t1", int(-1))]).unwrap();
        b.iota_g(1, "t23", &[("t3", int(1))]).unwrap();
        b.iota_g(2, "t23", &[("t2", int(-1))]).unwrap();
        b.iota_g(0, "t123", &[("t23", int(1))]).unwrap();
        b.iota_g(1, "t123", &[("t13", int(-1))]).unwrap();
        b.iota_g(2, "t123", &[("t12", int(1))]).unwrap();
        let bundle = b.build_bundle().unwrap();
        let rep = crate::sdga::validate_bundle(&bundle);
        assert!(rep.passed(), "{rep}");
        let theta = (1..=3).map(SparseVec::unit).collect();
        let conn = Connection::new(&bundle, theta).unwrap();
        assert!(conn.curvature().components().iter().all(SparseVec::is_zero));
        assert!(verify_curvature(&conn).passed());
    }

    #[test]
    fn vanishing_form_keeps_its_degree() {
        let zero = flat(int(0)).chern_weil_form(&x(2)).unwrap();
        assert!(zero.form().is_zero());
        assert_eq!(zero.degree(), 4);
        let rep = connection_independence(&x(2), &flat(int(0)), &flat(int(3))).unwrap();
        assert_eq!(zero.complex().cartan_d(rep.primitive.as_ref().unwrap()), rep.difference);
    }
}
