//! Weil model `W(s) (x) A` and Cartan model `(S(s*) (x) A)^s` over a finite model.
//!
//! Elements are sparse maps from Weil monomials to `A`-coefficient vectors.
//! Cartan elements only use `theta`-free monomials. Every operator on the
//! tensor product follows the Koszul rule:
//!
//! ```text
//! D(w (x) a) = Dw (x) a + (-1)^{|w|} w (x) Da      D odd (d, iota_i)
//! L(w (x) a) = Lw (x) a + w (x) La                 L even
//! (w (x) a)(w' (x) a') = (-1)^{|a||w'|} ww' (x) aa'
//! ```

use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;

use num::{One, Zero};
use thiserror::Error;

use crate::gca::{GcaElement, GradedOperator, Monomial, Parity};
use crate::ratlin::{kernel_basis, quotient_basis, solve, Echelon, LinAlgError, Rat, RatMatrix, RatVector, SparseVec};
use crate::sdga::{apply_op, LinearOp, SDgaModel};
use crate::weil::{WeilAlgebra, WeilError};
use crate::write_term;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EqError {
    #[error(transparent)]
    Weil(#[from] WeilError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error("degree {degree} exceeds the cutoff {cutoff}")]
    CutoffExceeded { degree: u32, cutoff: u32 },
    #[error("element is not homogeneous")]
    Inhomogeneous,
    #[error("element has theta factors and is not a Cartan element")]
    NotThetaFree,
}

/// Sparse element of `W(s) (x) A`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tensor {
    terms: BTreeMap<Monomial, SparseVec>,
}

impl Tensor {
    pub fn zero() -> Self {
        Tensor::default()
    }

    pub fn term(m: Monomial, v: SparseVec) -> Self {
        let mut t = Tensor::zero();
        t.add(&m, &v, &Rat::one());
        t
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &SparseVec)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c * m (x) v`.
    pub fn add(&mut self, m: &Monomial, v: &SparseVec, c: &Rat) {
        if c.is_zero() || v.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_default();
        slot.add_scaled(v, c);
        if slot.is_zero() {
            self.terms.remove(m);
        }
    }

    pub fn add_tensor(&mut self, other: &Tensor, c: &Rat) {
        for (m, v) in &other.terms {
            self.add(m, v, c);
        }
    }

    pub fn plus(&self, other: &Tensor) -> Tensor {
        let mut out = self.clone();
        out.add_tensor(other, &Rat::one());
        out
    }

    pub fn minus(&self, other: &Tensor) -> Tensor {
        let mut out = self.clone();
        out.add_tensor(other, &-Rat::one());
        out
    }

    pub fn scaled(&self, c: &Rat) -> Tensor {
        let mut out = Tensor::zero();
        out.add_tensor(self, c);
        out
    }

    pub fn is_theta_free(&self) -> bool {
        self.terms.keys().all(|m| m.odd_mask() == 0)
    }

    pub fn theta_free_part(&self) -> Tensor {
        Tensor {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.odd_mask() == 0)
                .map(|(m, v)| (m.clone(), v.clone()))
                .collect(),
        }
    }

    fn entries(&self) -> impl Iterator<Item = (Monomial, usize, &Rat)> + '_ {
        self.terms
            .iter()
            .flat_map(|(m, v)| v.iter().map(move |(a, c)| (m.clone(), a, c)))
    }
}

/// Element of `S(s*) (x) A`; invariance is not part of the type.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CartanElement(Tensor);

impl CartanElement {
    pub fn new(t: Tensor) -> Result<Self, EqError> {
        if t.is_theta_free() {
            Ok(CartanElement(t))
        } else {
            Err(EqError::NotThetaFree)
        }
    }

    pub fn zero() -> Self {
        CartanElement(Tensor::zero())
    }

    pub fn tensor(&self) -> &Tensor {
        &self.0
    }

    pub fn plus(&self, other: &Self) -> Self {
        CartanElement(self.0.plus(&other.0))
    }

    pub fn minus(&self, other: &Self) -> Self {
        CartanElement(self.0.minus(&other.0))
    }

    pub fn scaled(&self, c: &Rat) -> Self {
        CartanElement(self.0.scaled(c))
    }
}

impl Deref for CartanElement {
    type Target = Tensor;
    fn deref(&self) -> &Tensor {
        &self.0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct WeilModelElement(Tensor);

impl WeilModelElement {
    pub fn new(t: Tensor) -> Self {
        WeilModelElement(t)
    }

    pub fn zero() -> Self {
        WeilModelElement(Tensor::zero())
    }

    pub fn tensor(&self) -> &Tensor {
        &self.0
    }

    pub fn plus(&self, other: &Self) -> Self {
        WeilModelElement(self.0.plus(&other.0))
    }

    pub fn minus(&self, other: &Self) -> Self {
        WeilModelElement(self.0.minus(&other.0))
    }

    pub fn scaled(&self, c: &Rat) -> Self {
        WeilModelElement(self.0.scaled(c))
    }
}

impl Deref for WeilModelElement {
    type Target = Tensor;
    fn deref(&self) -> &Tensor {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TotalOp {
    D,
    Iota(usize),
    Lie(usize),
}

impl fmt::Display for TotalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TotalOp::D => write!(f, "d"),
            TotalOp::Iota(i) => write!(f, "iota{}", i + 1),
            TotalOp::Lie(i) => write!(f, "L{}", i + 1),
        }
    }
}

/// Outcome of a basic-ness test; the witness is the first operator that fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Basicness {
    Basic,
    NotBasic { operator: TotalOp, image: WeilModelElement },
}

impl Basicness {
    pub fn is_basic(&self) -> bool {
        matches!(self, Basicness::Basic)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyGroup<E> {
    pub degree: u32,
    pub dimension: usize,
    pub representatives: Vec<E>,
}

/// Basis of one total degree: pairs (Weil monomial, `A` basis index).
#[derive(Clone, Debug)]
struct DegreeSpace {
    basis: Vec<(Monomial, usize)>,
    index: BTreeMap<(Monomial, usize), usize>,
}

impl DegreeSpace {
    fn new(basis: Vec<(Monomial, usize)>) -> Self {
        let index = basis.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        DegreeSpace { basis, index }
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn element(&self, i: usize) -> Tensor {
        let (m, a) = &self.basis[i];
        Tensor::term(m.clone(), SparseVec::unit(*a))
    }

    fn from_coords(&self, v: &[Rat]) -> Tensor {
        let mut t = Tensor::zero();
        for (i, c) in v.iter().enumerate() {
            if !c.is_zero() {
                let (m, a) = &self.basis[i];
                t.add(m, &SparseVec::unit(*a), c);
            }
        }
        t
    }

    /// `None` when some term lies outside this degree.
    fn coords(&self, t: &Tensor) -> Option<RatVector> {
        let mut out = vec![Rat::zero(); self.dim()];
        for (m, a, c) in t.entries() {
            out[*self.index.get(&(m, a))?] = c.clone();
        }
        Some(out)
    }
}

/// Per-degree data of one side (Cartan or Weil-basic).
#[derive(Clone, Debug)]
struct SideData {
    space: DegreeSpace,
    /// Invariant (Cartan) or basic (Weil) subspace, in `space` coordinates.
    sub: Vec<RatVector>,
}

#[derive(Clone, Debug)]
pub struct EquivariantComplex {
    weil: WeilAlgebra,
    model: SDgaModel,
    cutoff: u32,
    cartan: Vec<OnceCell<SideData>>,
    basic: Vec<OnceCell<SideData>>,
}

impl EquivariantComplex {
    /// Complex for degrees `0..=cutoff`; spaces of degree `cutoff + 1` are
    /// built as well so that top-degree cycles can be computed.
    pub fn new(model: SDgaModel, cutoff: u32) -> Result<Self, EqError> {
        let weil = WeilAlgebra::build(model.lie())?;
        let n = cutoff as usize + 2;
        Ok(EquivariantComplex {
            weil,
            model,
            cutoff,
            cartan: (0..n).map(|_| OnceCell::new()).collect(),
            basic: (0..n).map(|_| OnceCell::new()).collect(),
        })
    }

    pub fn weil(&self) -> &WeilAlgebra {
        &self.weil
    }

    pub fn model(&self) -> &SDgaModel {
        &self.model
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn dim_s(&self) -> usize {
        self.weil.dim()
    }

    pub fn unit_monomial(&self) -> Monomial {
        Monomial::one(self.weil.universe())
    }

    /// The Weil monomial of `u_i`.
    pub fn u_monomial(&self, i: usize) -> Monomial {
        self.weil.universe().generator_monomial(i)
    }

    pub fn theta_monomial(&self, i: usize) -> Monomial {
        self.weil.universe().generator_monomial(self.dim_s() + i)
    }

    pub fn monomial_degree(&self, m: &Monomial) -> u32 {
        self.weil.universe().monomial_degree(m)
    }

    /// `w (x) a` for a Weil element `w` and a model vector `a`.
    pub fn embed(&self, w: &GcaElement, a: &SparseVec) -> Tensor {
        let mut t = Tensor::zero();
        for (m, c) in w.terms() {
            t.add(m, a, c);
        }
        t
    }

    /// `1 (x) a`.
    pub fn from_model(&self, a: &SparseVec) -> Tensor {
        Tensor::term(self.unit_monomial(), a.clone())
    }

    pub fn cartan_from_model(&self, a: &SparseVec) -> CartanElement {
        CartanElement(self.from_model(a))
    }

    pub fn degree_of(&self, t: &Tensor) -> Option<u32> {
        let mut degs = t.entries().map(|(m, a, _)| self.monomial_degree(&m) + self.model.degree(a));
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    fn apply_pair(&self, w_op: &GradedOperator, a_op: &LinearOp, t: &Tensor) -> Tensor {
        let odd = w_op.parity() == Parity::Odd;
        let mut out = Tensor::zero();
        for (m, v) in t.terms() {
            let img = w_op
                .apply_monomial(m)
                .expect("Weil operators are defined on every generator");
            for (m2, c) in img.terms() {
                out.add(m2, v, c);
            }
            let sign = if odd && self.monomial_degree(m) % 2 == 1 { -Rat::one() } else { Rat::one() };
            out.add(m, &apply_op(a_op, v), &sign);
        }
        out
    }

    pub fn total_d(&self, t: &Tensor) -> Tensor {
        self.apply_pair(self.weil.d(), self.model.d_table(), t)
    }

    pub fn total_iota(&self, i: usize, t: &Tensor) -> Tensor {
        self.apply_pair(self.weil.iota(i), self.model.action().iota(i), t)
    }

    pub fn total_lie(&self, i: usize, t: &Tensor) -> Tensor {
        self.apply_pair(self.weil.lie_derivative(i), self.model.action().lie_derivative(i), t)
    }

    pub fn total(&self, op: TotalOp, t: &Tensor) -> Tensor {
        match op {
            TotalOp::D => self.total_d(t),
            TotalOp::Iota(i) => self.total_iota(i, t),
            TotalOp::Lie(i) => self.total_lie(i, t),
        }
    }

    pub fn total_operator(&self, op: TotalOp, x: &WeilModelElement) -> WeilModelElement {
        WeilModelElement(self.total(op, x))
    }

    /// `(w (x) a)(w' (x) a') = (-1)^{|a||w'|} ww' (x) aa'`.
    pub fn multiply(&self, x: &Tensor, y: &Tensor) -> Tensor {
        let mut out = Tensor::zero();
        for (m1, a1, c1) in x.entries() {
            for (m2, a2, c2) in y.entries() {
                let Some((s, m)) = m1.mul(&m2) else { continue };
                let mut sign = s;
                if self.model.degree(a1) % 2 == 1 && self.monomial_degree(&m2) % 2 == 1 {
                    sign = -sign;
                }
                let c = c1 * c2 * Rat::from_integer(sign.into());
                out.add(&m, self.model.mul_basis(a1, a2), &c);
            }
        }
        out
    }

    /// Left multiplication by a Weil monomial (no sign: it sits left of everything).
    pub fn left_mul(&self, w: &Monomial, t: &Tensor) -> Tensor {
        let mut out = Tensor::zero();
        for (m, v) in t.terms() {
            if let Some((s, p)) = w.mul(m) {
                out.add(&p, v, &Rat::from_integer(s.into()));
            }
        }
        out
    }

    /// `d_C(u^m (x) w) = u^m (x) dw - sum_i u_i u^m (x) iota_i w`.
    pub fn cartan_d(&self, a: &CartanElement) -> CartanElement {
        let mut out = Tensor::zero();
        for (m, v) in a.terms() {
            out.add(m, &self.model.apply_d(v), &Rat::one());
            for i in 0..self.dim_s() {
                let (_, um) = self.u_monomial(i).mul(m).expect("even monomials always multiply");
                out.add(&um, &self.model.apply_iota(i, v), &-Rat::one());
            }
        }
        CartanElement(out)
    }

    /// `(1 - theta_1 iota_1) ... (1 - theta_l iota_l) a`, rightmost factor first.
    pub fn mq_to_weil(&self, a: &CartanElement) -> WeilModelElement {
        let mut y = a.0.clone();
        for i in (0..self.dim_s()).rev() {
            let correction = self.left_mul(&self.theta_monomial(i), &self.total_iota(i, &y));
            y = y.minus(&correction);
        }
        WeilModelElement(y)
    }

    pub fn mq_to_cartan(&self, x: &WeilModelElement) -> CartanElement {
        CartanElement(x.theta_free_part())
    }

    pub fn is_basic(&self, x: &WeilModelElement) -> Basicness {
        for i in 0..self.dim_s() {
            for op in [TotalOp::Iota(i), TotalOp::Lie(i)] {
                let image = self.total(op, x);
                if !image.is_zero() {
                    return Basicness::NotBasic {
                        operator: op,
                        image: WeilModelElement(image),
                    };
                }
            }
        }
        Basicness::Basic
    }

    pub fn is_invariant(&self, a: &Tensor) -> bool {
        (0..self.dim_s()).all(|i| self.total_lie(i, a).is_zero())
    }

    fn check_degree(&self, k: u32) -> Result<(), EqError> {
        if k > self.cutoff + 1 {
            return Err(EqError::CutoffExceeded { degree: k, cutoff: self.cutoff });
        }
        Ok(())
    }

    /// All Weil monomials of degree `j`, optionally without `theta`s.
    fn weil_monomials(&self, j: u32, theta_free: bool) -> Vec<Monomial> {
        let l = self.dim_s();
        let mut out = Vec::new();
        let max_odd = if theta_free { 0 } else { (j as usize).min(l) };
        for s in 0..=max_odd {
            if (j as usize - s) % 2 != 0 {
                continue;
            }
            let weight = (j as usize - s) / 2;
            let subsets = combinations(l, s);
            for exps in compositions(l, weight) {
                for sub in &subsets {
                    out.push(Monomial::from_parts(exps.clone(), sub));
                }
            }
        }
        out.sort();
        out
    }

    fn space(&self, k: u32, theta_free: bool) -> DegreeSpace {
        let mut basis = Vec::new();
        for j in 0..=k {
            let idx = self.model.indices_of_degree(k - j);
            if idx.is_empty() {
                continue;
            }
            for m in self.weil_monomials(j, theta_free) {
                for &a in &idx {
                    basis.push((m.clone(), a));
                }
            }
        }
        basis.sort();
        DegreeSpace::new(basis)
    }

    /// Matrix of `op` from degree `k` to `target`.
    fn op_matrix<F: Fn(&Tensor) -> Tensor>(&self, from: &DegreeSpace, to: &DegreeSpace, op: F) -> RatMatrix {
        let mut m = RatMatrix::zeros(to.dim(), from.dim());
        for j in 0..from.dim() {
            let img = op(&from.element(j));
            let col = to.coords(&img).expect("operator image stays in its degree");
            for (i, c) in col.into_iter().enumerate() {
                if !c.is_zero() {
                    m.set(i, j, c);
                }
            }
        }
        m
    }

    fn cartan_data(&self, k: u32) -> &SideData {
        self.cartan[k as usize].get_or_init(|| {
            let space = self.space(k, true);
            let blocks: Vec<RatMatrix> = (0..self.dim_s())
                .map(|i| self.op_matrix(&space, &space, |t| self.total_lie(i, t)))
                .collect();
            let sub = joint_kernel(space.dim(), &blocks);
            SideData { space, sub }
        })
    }

    fn basic_data(&self, k: u32) -> &SideData {
        self.basic[k as usize].get_or_init(|| {
            let space = self.space(k, false);
            let mut blocks = Vec::new();
            if k > 0 {
                let lower = self.space(k - 1, false);
                for i in 0..self.dim_s() {
                    blocks.push(self.op_matrix(&space, &lower, |t| self.total_iota(i, t)));
                }
            }
            for i in 0..self.dim_s() {
                blocks.push(self.op_matrix(&space, &space, |t| self.total_lie(i, t)));
            }
            let sub = joint_kernel(space.dim(), &blocks);
            SideData { space, sub }
        })
    }

    /// Spanning set of `S(s*) (x) A` in degree `k` (all basis tensors).
    pub fn cartan_spanning_set(&self, k: u32) -> Result<Vec<CartanElement>, EqError> {
        self.check_degree(k)?;
        let sp = &self.cartan_data(k).space;
        Ok((0..sp.dim()).map(|i| CartanElement(sp.element(i))).collect())
    }

    pub fn weil_spanning_set(&self, k: u32) -> Result<Vec<WeilModelElement>, EqError> {
        self.check_degree(k)?;
        let sp = &self.basic_data(k).space;
        Ok((0..sp.dim()).map(|i| WeilModelElement(sp.element(i))).collect())
    }

    /// Basis of the invariant Cartan elements of degree `k`.
    pub fn invariant_basis(&self, k: u32) -> Result<Vec<CartanElement>, EqError> {
        self.check_degree(k)?;
        let data = self.cartan_data(k);
        Ok(data.sub.iter().map(|v| CartanElement(data.space.from_coords(v))).collect())
    }

    /// Basis of the basic elements of `W(s) (x) A` of degree `k`.
    pub fn basic_basis(&self, k: u32) -> Result<Vec<WeilModelElement>, EqError> {
        self.check_degree(k)?;
        let data = self.basic_data(k);
        Ok(data.sub.iter().map(|v| WeilModelElement(data.space.from_coords(v))).collect())
    }

    /// Cycles and boundaries of degree `k` inside a subcomplex, as coordinates.
    fn cycles_and_boundaries<'s, F>(&'s self, k: u32, data: F, d: impl Fn(&Tensor) -> Tensor) -> (Vec<RatVector>, Vec<RatVector>)
    where
        F: Fn(u32) -> &'s SideData,
    {
        let here = data(k);
        let next = data(k + 1);
        let dk = self.restricted(here, next, &d);
        let cycles = kernel_basis(&dk)
            .into_iter()
            .map(|z| combine(&here.sub, &z, here.space.dim()))
            .collect();
        let boundaries = if k == 0 {
            Vec::new()
        } else {
            let prev = data(k - 1);
            prev.sub
                .iter()
                .map(|v| {
                    let img = d(&prev.space.from_coords(v));
                    here.space.coords(&img).expect("differential raises degree by one")
                })
                .collect()
        };
        (cycles, boundaries)
    }

    /// Matrix of `d` restricted to the subspace `from.sub`, landing in `to.space` coordinates.
    fn restricted(&self, from: &SideData, to: &SideData, d: &impl Fn(&Tensor) -> Tensor) -> RatMatrix {
        let cols: Vec<RatVector> = from
            .sub
            .iter()
            .map(|v| {
                let img = d(&from.space.from_coords(v));
                to.space.coords(&img).expect("differential raises degree by one")
            })
            .collect();
        RatMatrix::from_columns(to.space.dim(), &cols)
    }

    /// Equivariant cohomology from the Cartan model in degree `k <= cutoff`.
    pub fn equivariant_cohomology(&self, k: u32) -> Result<CohomologyGroup<CartanElement>, EqError> {
        if k > self.cutoff {
            return Err(EqError::CutoffExceeded { degree: k, cutoff: self.cutoff });
        }
        let (cycles, boundaries) =
            self.cycles_and_boundaries(k, |j| self.cartan_data(j), |t| self.cartan_d(&CartanElement(t.clone())).0);
        let q = quotient_basis(&cycles, &boundaries)?;
        let space = &self.cartan_data(k).space;
        Ok(CohomologyGroup {
            degree: k,
            dimension: q.dimension,
            representatives: q.representatives.iter().map(|v| CartanElement(space.from_coords(v))).collect(),
        })
    }

    /// Cohomology of the basic subcomplex of the Weil model in degree `k <= cutoff`.
    pub fn weil_basic_cohomology(&self, k: u32) -> Result<CohomologyGroup<WeilModelElement>, EqError> {
        if k > self.cutoff {
            return Err(EqError::CutoffExceeded { degree: k, cutoff: self.cutoff });
        }
        let (cycles, boundaries) = self.cycles_and_boundaries(k, |j| self.basic_data(j), |t| self.total_d(t));
        let q = quotient_basis(&cycles, &boundaries)?;
        let space = &self.basic_data(k).space;
        Ok(CohomologyGroup {
            degree: k,
            dimension: q.dimension,
            representatives: q.representatives.iter().map(|v| WeilModelElement(space.from_coords(v))).collect(),
        })
    }

    pub fn cohomology_dimensions(&self) -> Result<Vec<usize>, EqError> {
        (0..=self.cutoff).map(|k| Ok(self.equivariant_cohomology(k)?.dimension)).collect()
    }

    pub fn weil_cohomology_dimensions(&self) -> Result<Vec<usize>, EqError> {
        (0..=self.cutoff).map(|k| Ok(self.weil_basic_cohomology(k)?.dimension)).collect()
    }

    /// An invariant `y` with `d_C y = x`, if one exists.
    pub fn cartan_primitive(&self, x: &CartanElement) -> Result<Option<CartanElement>, EqError> {
        let Some(k) = self.degree_of(x) else {
            return Ok(Some(CartanElement::zero()));
        };
        self.check_degree(k)?;
        if k == 0 {
            return Ok(None);
        }
        let prev = self.cartan_data(k - 1);
        let here = self.cartan_data(k);
        let m = self.restricted(prev, here, &|t: &Tensor| self.cartan_d(&CartanElement(t.clone())).0);
        let b = here.space.coords(x).ok_or(EqError::Inhomogeneous)?;
        Ok(solve(&m, &b)?.map(|z| CartanElement(prev.space.from_coords(&combine(&prev.sub, &z, prev.space.dim())))))
    }

    /// A basic `y` with `d y = x`, if one exists.
    pub fn weil_primitive(&self, x: &WeilModelElement) -> Result<Option<WeilModelElement>, EqError> {
        let Some(k) = self.degree_of(x) else {
            return Ok(Some(WeilModelElement::zero()));
        };
        self.check_degree(k)?;
        if k == 0 {
            return Ok(None);
        }
        let prev = self.basic_data(k - 1);
        let here = self.basic_data(k);
        let m = self.restricted(prev, here, &|t: &Tensor| self.total_d(t));
        let b = here.space.coords(x).ok_or(EqError::Inhomogeneous)?;
        Ok(solve(&m, &b)?.map(|z| WeilModelElement(prev.space.from_coords(&combine(&prev.sub, &z, prev.space.dim())))))
    }

    /// Whether `mq_to_weil` carries the Cartan representatives of degree `k`
    /// onto basic cocycles spanning the same classes as the Weil representatives.
    pub fn mq_classes_agree(&self, k: u32) -> Result<bool, EqError> {
        let cartan = self.equivariant_cohomology(k)?;
        let weil = self.weil_basic_cohomology(k)?;
        if cartan.dimension != weil.dimension {
            return Ok(false);
        }
        let data = self.basic_data(k);
        let (_, boundaries) = self.cycles_and_boundaries(k, |j| self.basic_data(j), |t| self.total_d(t));
        let mut with_mq = Echelon::new(data.space.dim());
        let mut with_weil = Echelon::new(data.space.dim());
        for b in &boundaries {
            with_mq.insert(b);
            with_weil.insert(b);
        }
        for r in &cartan.representatives {
            let x = self.mq_to_weil(r);
            if !self.is_basic(&x).is_basic() || !self.total_d(&x).is_zero() {
                return Ok(false);
            }
            let v = data.space.coords(&x).ok_or(EqError::Inhomogeneous)?;
            with_mq.insert(&v);
        }
        for r in &weil.representatives {
            with_weil.insert(&data.space.coords(r).ok_or(EqError::Inhomogeneous)?);
        }
        let all_in = |e: &Echelon, vs: &[RatVector]| vs.iter().all(|v| e.contains(v));
        let mq_vecs: Vec<RatVector> = cartan
            .representatives
            .iter()
            .map(|r| data.space.coords(&self.mq_to_weil(r)).expect("degree checked above"))
            .collect();
        let weil_vecs: Vec<RatVector> = weil
            .representatives
            .iter()
            .map(|r| data.space.coords(r).expect("degree checked above"))
            .collect();
        Ok(with_mq.rank() == with_weil.rank() && all_in(&with_mq, &weil_vecs) && all_in(&with_weil, &mq_vecs))
    }

    /// Substitutes `u_k -> x_k`; `theta` terms are rejected.
    pub fn evaluate_u(&self, a: &CartanElement, x: &[Rat]) -> SparseVec {
        let mut out = SparseVec::new();
        for (m, v) in a.terms() {
            let mut c = Rat::one();
            for (k, &e) in m.even_exponents().iter().enumerate() {
                for _ in 0..e {
                    c *= &x[k];
                }
            }
            out.add_scaled(v, &c);
        }
        out
    }

    pub fn format(&self, t: &Tensor) -> String {
        TensorDisplay { cx: self, t }.to_string()
    }
}

struct TensorDisplay<'a> {
    cx: &'a EquivariantComplex,
    t: &'a Tensor,
}

impl fmt::Display for TensorDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.t.is_zero() {
            return write!(f, "0");
        }
        let model = &self.cx.model;
        let mut first = true;
        for (m, v) in self.t.terms() {
            let mono = self.cx.weil.universe().format_monomial(m);
            let mut entries: Vec<_> = v.iter().collect();
            entries.sort_by_key(|&(a, _)| (std::cmp::Reverse(model.degree(a)), a));
            for (a, c) in entries {
                let mut parts = Vec::new();
                if !mono.is_empty() {
                    parts.push(mono.clone());
                }
                if a != model.unit() {
                    parts.push(model.name(a).to_string());
                }
                write_term(f, first, c, &parts.join("*"))?;
                first = false;
            }
        }
        Ok(())
    }
}

/// Basis of the common kernel of maps out of a space of dimension `dim`.
fn joint_kernel(dim: usize, blocks: &[RatMatrix]) -> Vec<RatVector> {
    if blocks.is_empty() {
        return (0..dim)
            .map(|i| {
                let mut v = vec![Rat::zero(); dim];
                v[i] = Rat::one();
                v
            })
            .collect();
    }
    kernel_basis(&RatMatrix::vstack(dim, blocks))
}

fn combine(vectors: &[RatVector], coeffs: &[Rat], dim: usize) -> RatVector {
    let mut out = vec![Rat::zero(); dim];
    for (v, c) in vectors.iter().zip(coeffs) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v) {
            *o += x * c;
        }
    }
    out
}

/// Exponent vectors of length `n` with entries summing to `weight`.
fn compositions(n: usize, weight: usize) -> Vec<Vec<u32>> {
    if n == 0 {
        return if weight == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=weight {
        for mut rest in compositions(n - 1, weight - first) {
            rest.insert(0, first as u32);
            out.push(rest);
        }
    }
    out
}

/// Strictly increasing index lists of length `k` drawn from `0..n`.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::LieAlgebraData;
    use crate::ratlin::int;
    use crate::sdga::builtin;

    fn complex(name: &str, cutoff: u32) -> EquivariantComplex {
        EquivariantComplex::new(builtin(name).unwrap().sdga().clone(), cutoff).unwrap()
    }

    #[test]
    fn compositions_and_combinations() {
        assert_eq!(compositions(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(2, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn total_operators_on_examples() {
        let p = complex("point", 2);
        let theta = Tensor::term(p.theta_monomial(0), p.model().one());
        assert_eq!(p.format(&p.total_d(&theta)), "u1");

        let c = complex("circle_rotation", 2);
        let alpha = SparseVec::unit(c.model().find("alpha").unwrap());
        let one_alpha = c.from_model(&alpha);
        assert_eq!(c.total_iota(0, &one_alpha), c.from_model(&c.model().one()));
        let th_alpha = Tensor::term(c.theta_monomial(0), alpha.clone());
        assert_eq!(c.format(&c.total_d(&th_alpha)), "u1*alpha");
    }

    #[test]
    fn cartan_d_examples() {
        let c = complex("circle_rotation", 2);
        let alpha = c.cartan_from_model(&SparseVec::unit(1));
        assert_eq!(c.format(&c.cartan_d(&alpha)), "-u1");
        let s2 = complex("s2_trivial", 2);
        assert!(s2.cartan_d(&s2.cartan_from_model(&SparseVec::unit(1))).is_zero());
    }

    #[test]
    fn circle_mq_recipe() {
        let c = complex("circle_rotation", 2);
        let alpha = c.cartan_from_model(&SparseVec::unit(1));
        let w = c.mq_to_weil(&alpha);
        assert_eq!(c.format(&w), "alpha - theta1");
        assert!(c.is_basic(&w).is_basic());
        assert_eq!(c.mq_to_cartan(&w), alpha);
        let th = WeilModelElement::new(Tensor::term(c.theta_monomial(0), c.model().one()));
        assert!(c.mq_to_cartan(&th).is_zero());
        match c.is_basic(&th) {
            Basicness::NotBasic { operator, .. } => assert_eq!(operator, TotalOp::Iota(0)),
            Basicness::Basic => panic!("theta is not basic"),
        }
    }

    #[test]
    fn point_dimensions() {
        let u1 = complex("point", 8);
        assert_eq!(u1.cohomology_dimensions().unwrap(), [1, 0, 1, 0, 1, 0, 1, 0, 1]);
        assert_eq!(u1.weil_cohomology_dimensions().unwrap(), [1, 0, 1, 0, 1, 0, 1, 0, 1]);
        let m = builtin("point").unwrap().with_lie(LieAlgebraData::su2()).unwrap();
        let su2 = EquivariantComplex::new(m.sdga().clone(), 8).unwrap();
        assert_eq!(su2.cohomology_dimensions().unwrap(), [1, 0, 0, 0, 1, 0, 0, 0, 1]);
    }

    #[test]
    fn circle_collapses() {
        let c = complex("circle_rotation", 4);
        assert_eq!(c.cohomology_dimensions().unwrap(), [1, 0, 0, 0, 0]);
        assert_eq!(c.weil_cohomology_dimensions().unwrap(), [1, 0, 0, 0, 0]);
        let u = CartanElement(Tensor::term(c.u_monomial(0), c.model().one()));
        let y = c.cartan_primitive(&u).unwrap().unwrap();
        assert_eq!(c.cartan_d(&y), u);
        assert_eq!(c.format(&y), "-alpha");
        for k in 0..=4 {
            assert!(c.mq_classes_agree(k).unwrap());
        }
    }

    #[test]
    fn cutoff_is_enforced() {
        let c = complex("point", 2);
        assert!(matches!(c.equivariant_cohomology(3), Err(EqError::CutoffExceeded { .. })));
    }

    #[test]
    fn product_sign() {
        let c = complex("circle_rotation", 3);
        // (1 (x) alpha)(theta (x) 1) = -theta (x) alpha
        let a = c.from_model(&SparseVec::unit(1));
        let th = Tensor::term(c.theta_monomial(0), c.model().one());
        let prod = c.multiply(&a, &th);
        assert_eq!(prod, Tensor::term(c.theta_monomial(0), SparseVec::unit(1)).scaled(&int(-1)));
    }
}
