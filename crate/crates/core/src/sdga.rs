//! Finite models of differential forms carrying Lie-algebra actions.
//!
//! An [`SDgaModel`] is a finite-dimensional graded-commutative algebra with a
//! basis of named homogeneous elements, a full multiplication table, a
//! differential `d` and contractions `iota_i` for a Lie algebra `s`. Lie
//! derivatives are always derived as `L_i = d iota_i + iota_i d`.
//!
//! A [`BundleModel`] adds a second action of a structure algebra `g`, the model
//! of forms on the total space of a principal bundle.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};
use thiserror::Error;

use crate::lie::LieAlgebraData;
use crate::ratlin::{kernel_basis, rat, solve, Echelon, Rat, RatMatrix, SparseVec};
use crate::report::CheckReport;
use crate::write_term;

/// Images of basis elements under a linear map, one sparse column each.
pub type LinearOp = Vec<SparseVec>;

pub const UNIT_NAME: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("model has an empty basis")]
    EmptyBasis,
    #[error("model has no degree-0 unit element named `1`")]
    MissingUnit,
    #[error("basis element `{0}` declared twice")]
    DuplicateName(String),
    #[error("unknown basis element `{0}`")]
    UnknownName(String),
    #[error("unknown builtin model `{0}`")]
    UnknownBuiltin(String),
    #[error("{what} index {index} out of range (bound {bound})")]
    IndexOutOfRange { what: &'static str, index: usize, bound: usize },
    #[error("table shape mismatch: {0}")]
    Shape(String),
    #[error("{operation} of {element} leaves the subalgebra")]
    NotClosed { operation: String, element: String },
    #[error("the action is not trivial, so the Lie algebra cannot be replaced")]
    NonTrivialAction,
}

pub fn apply_op(op: &LinearOp, v: &SparseVec) -> SparseVec {
    let mut out = SparseVec::new();
    for (i, c) in v.iter() {
        out.add_scaled(&op[i], c);
    }
    out
}

/// Sign `(-1)^{ab}` picked up when swapping elements of degrees `a` and `b`.
pub fn koszul_sign(a: u32, b: u32) -> Rat {
    if a % 2 == 1 && b % 2 == 1 {
        -Rat::one()
    } else {
        Rat::one()
    }
}

fn sign_of_degree(a: u32) -> Rat {
    if a % 2 == 1 {
        -Rat::one()
    } else {
        Rat::one()
    }
}

/// An action of a Lie algebra by contractions, with derived Lie derivatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    lie: LieAlgebraData,
    iota: Vec<LinearOp>,
    lie_derivs: Vec<LinearOp>,
}

impl Action {
    fn new(lie: LieAlgebraData, iota: Vec<LinearOp>, d: &LinearOp) -> Self {
        let lie_derivs = iota
            .iter()
            .map(|io| {
                (0..d.len())
                    .map(|b| apply_op(d, &io[b]).plus(&apply_op(io, &d[b])))
                    .collect()
            })
            .collect();
        Action { lie, iota, lie_derivs }
    }

    pub fn lie(&self) -> &LieAlgebraData {
        &self.lie
    }

    pub fn dim(&self) -> usize {
        self.lie.dim()
    }

    pub fn iota(&self, i: usize) -> &LinearOp {
        &self.iota[i]
    }

    pub fn lie_derivative(&self, i: usize) -> &LinearOp {
        &self.lie_derivs[i]
    }

    pub fn is_trivial(&self) -> bool {
        self.iota.iter().flatten().all(SparseVec::is_zero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SDgaModel {
    names: Vec<String>,
    degrees: Vec<u32>,
    unit: usize,
    mul: Vec<Vec<SparseVec>>,
    d: LinearOp,
    s: Action,
}

impl SDgaModel {
    /// Assembles a model from complete tables, checking only their shapes.
    pub fn from_tables(
        names: Vec<String>,
        degrees: Vec<u32>,
        mul: Vec<Vec<SparseVec>>,
        d: LinearOp,
        lie: LieAlgebraData,
        iota: Vec<LinearOp>,
    ) -> Result<Self, ModelError> {
        let n = names.len();
        if n == 0 {
            return Err(ModelError::EmptyBasis);
        }
        if degrees.len() != n {
            return Err(ModelError::Shape(format!("{} degrees for {} basis elements", degrees.len(), n)));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(ModelError::DuplicateName(a.clone()));
            }
        }
        let unit = names
            .iter()
            .position(|s| s == UNIT_NAME)
            .filter(|&u| degrees[u] == 0)
            .ok_or(ModelError::MissingUnit)?;
        if mul.len() != n || mul.iter().any(|row| row.len() != n) {
            return Err(ModelError::Shape("multiplication table is not square".into()));
        }
        if d.len() != n {
            return Err(ModelError::Shape("differential table has the wrong length".into()));
        }
        if iota.len() != lie.dim() || iota.iter().any(|op| op.len() != n) {
            return Err(ModelError::Shape("contraction tables do not match the Lie algebra".into()));
        }
        let all = mul.iter().flatten().chain(&d).chain(iota.iter().flatten());
        for v in all {
            if let Some((index, _)) = v.iter().last() {
                if index >= n {
                    return Err(ModelError::IndexOutOfRange { what: "basis", index, bound: n });
                }
            }
        }
        let s = Action::new(lie, iota, &d);
        Ok(SDgaModel { names, degrees, unit, mul, d, s })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn unit(&self) -> usize {
        self.unit
    }

    pub fn one(&self) -> SparseVec {
        SparseVec::unit(self.unit)
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|s| s == name)
    }

    pub fn indices_of_degree(&self, k: u32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.degrees[i] == k).collect()
    }

    pub fn lie(&self) -> &LieAlgebraData {
        &self.s.lie
    }

    pub fn action(&self) -> &Action {
        &self.s
    }

    pub fn mul_basis(&self, i: usize, j: usize) -> &SparseVec {
        &self.mul[i][j]
    }

    pub fn d_table(&self) -> &LinearOp {
        &self.d
    }

    pub fn product(&self, a: &SparseVec, b: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, x) in a.iter() {
            for (j, y) in b.iter() {
                out.add_scaled(&self.mul[i][j], &(x * y));
            }
        }
        out
    }

    pub fn apply_d(&self, v: &SparseVec) -> SparseVec {
        apply_op(&self.d, v)
    }

    pub fn apply_iota(&self, i: usize, v: &SparseVec) -> SparseVec {
        apply_op(&self.s.iota[i], v)
    }

    pub fn apply_lie(&self, i: usize, v: &SparseVec) -> SparseVec {
        apply_op(&self.s.lie_derivs[i], v)
    }

    /// Degree of a nonzero homogeneous vector.
    pub fn degree_of(&self, v: &SparseVec) -> Option<u32> {
        let mut degs = v.iter().map(|(i, _)| self.degrees[i]);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn format(&self, v: &SparseVec) -> String {
        VecDisplay { model: self, v }.to_string()
    }

    /// Same model over another Lie algebra; only allowed when `s` acts trivially.
    pub fn with_trivial_action(&self, lie: LieAlgebraData) -> Result<Self, ModelError> {
        if !self.s.is_trivial() {
            return Err(ModelError::NonTrivialAction);
        }
        let iota = vec![vec![SparseVec::new(); self.dim()]; lie.dim()];
        SDgaModel::from_tables(self.names.clone(), self.degrees.clone(), self.mul.clone(), self.d.clone(), lie, iota)
    }

    fn label(&self, i: usize) -> String {
        self.names[i].clone()
    }
}

struct VecDisplay<'a> {
    model: &'a SDgaModel,
    v: &'a SparseVec,
}

impl fmt::Display for VecDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.v.is_zero() {
            return write!(f, "0");
        }
        // highest degree first, then basis order
        let mut terms: Vec<_> = self.v.iter().collect();
        terms.sort_by_key(|&(i, _)| (std::cmp::Reverse(self.model.degrees[i]), i));
        for (n, (i, c)) in terms.into_iter().enumerate() {
            let body = if i == self.model.unit { "" } else { self.model.name(i) };
            write_term(f, n == 0, c, body)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleModel {
    model: SDgaModel,
    g: Action,
}

impl BundleModel {
    pub fn new(model: SDgaModel, g_lie: LieAlgebraData, g_iota: Vec<LinearOp>) -> Result<Self, ModelError> {
        let n = model.dim();
        if g_iota.len() != g_lie.dim() || g_iota.iter().any(|op| op.len() != n) {
            return Err(ModelError::Shape("g-contraction tables do not match the Lie algebra".into()));
        }
        for v in g_iota.iter().flatten() {
            if let Some((index, _)) = v.iter().last() {
                if index >= n {
                    return Err(ModelError::IndexOutOfRange { what: "basis", index, bound: n });
                }
            }
        }
        let g = Action::new(g_lie, g_iota, &model.d);
        Ok(BundleModel { model, g })
    }

    pub fn model(&self) -> &SDgaModel {
        &self.model
    }

    pub fn g_action(&self) -> &Action {
        &self.g
    }

    pub fn g_lie(&self) -> &LieAlgebraData {
        &self.g.lie
    }

    pub fn apply_iota_g(&self, a: usize, v: &SparseVec) -> SparseVec {
        apply_op(&self.g.iota[a], v)
    }

    pub fn apply_lie_g(&self, a: usize, v: &SparseVec) -> SparseVec {
        apply_op(&self.g.lie_derivs[a], v)
    }

    pub fn with_trivial_s(&self, lie: LieAlgebraData) -> Result<Self, ModelError> {
        let model = self.model.with_trivial_action(lie)?;
        BundleModel::new(model, self.g.lie.clone(), self.g.iota.clone())
    }

    /// The subalgebra of `g`-basic elements: killed by every `iota^G_a` and `L^G_a`.
    pub fn base(&self) -> Result<BaseModel, ModelError> {
        let p = &self.model;
        let n = p.dim();
        let mut embedding: Vec<SparseVec> = Vec::new();
        let mut names = Vec::new();
        let mut degrees = Vec::new();
        for k in 0..=p.max_degree() {
            let idx = p.indices_of_degree(k);
            if idx.is_empty() {
                continue;
            }
            let mut m = RatMatrix::zeros(2 * self.g.dim() * n, idx.len());
            for a in 0..self.g.dim() {
                for (col, &b) in idx.iter().enumerate() {
                    for (r, c) in self.g.iota[a][b].iter() {
                        m.set(2 * a * n + r, col, c.clone());
                    }
                    for (r, c) in self.g.lie_derivs[a][b].iter() {
                        m.set((2 * a + 1) * n + r, col, c.clone());
                    }
                }
            }
            let mut candidates: Vec<Vec<Rat>> = Vec::new();
            if k == 0 {
                if let Some(pos) = idx.iter().position(|&b| b == p.unit) {
                    let mut e = vec![Rat::zero(); idx.len()];
                    e[pos] = Rat::one();
                    if m.mul_vec(&e).map(|v| v.iter().all(Zero::is_zero)).unwrap_or(false) {
                        candidates.push(e);
                    }
                }
            }
            candidates.extend(kernel_basis(&m));
            let mut span = Echelon::new(idx.len());
            for c in candidates {
                if !span.insert(&c) {
                    continue;
                }
                let v = SparseVec::from_pairs(idx.iter().zip(c).map(|(&b, x)| (b, x)));
                let name = match v.iter().collect::<Vec<_>>()[..] {
                    [(b, x)] if x.is_one() => p.name(b).to_string(),
                    _ => format!("({})", p.format(&v)),
                };
                names.push(name);
                degrees.push(k);
                embedding.push(v);
            }
        }
        let coords = Coordinates::new(n, &embedding);
        let locate = |v: &SparseVec, operation: &str| {
            coords.of(v).ok_or_else(|| ModelError::NotClosed {
                operation: operation.to_string(),
                element: p.format(v),
            })
        };
        let m = embedding.len();
        let mut mul = vec![vec![SparseVec::new(); m]; m];
        for i in 0..m {
            for j in 0..m {
                mul[i][j] = locate(&p.product(&embedding[i], &embedding[j]), "product")?;
            }
        }
        let d = embedding
            .iter()
            .map(|v| locate(&p.apply_d(v), "d"))
            .collect::<Result<Vec<_>, _>>()?;
        let iota = (0..p.lie().dim())
            .map(|i| {
                embedding
                    .iter()
                    .map(|v| locate(&p.apply_iota(i, v), "iota^S"))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        if names.first().map(String::as_str) != Some(UNIT_NAME) {
            return Err(ModelError::MissingUnit);
        }
        let model = SDgaModel::from_tables(names, degrees, mul, d, p.lie().clone(), iota)?;
        Ok(BaseModel { model, embedding, coords })
    }
}

/// Coordinates with respect to a fixed independent family of vectors.
#[derive(Clone, Debug)]
struct Coordinates {
    matrix: RatMatrix,
}

impl Coordinates {
    fn new(ambient: usize, vectors: &[SparseVec]) -> Self {
        let cols: Vec<Vec<Rat>> = vectors.iter().map(|v| v.to_dense(ambient)).collect();
        Coordinates { matrix: RatMatrix::from_columns(ambient, &cols) }
    }

    fn of(&self, v: &SparseVec) -> Option<SparseVec> {
        let b = v.to_dense(self.matrix.rows());
        solve(&self.matrix, &b).ok().flatten().map(|x| SparseVec::from_dense(&x))
    }
}

/// The base subalgebra of a bundle model and its inclusion.
#[derive(Clone, Debug)]
pub struct BaseModel {
    model: SDgaModel,
    embedding: Vec<SparseVec>,
    coords: Coordinates,
}

impl BaseModel {
    pub fn model(&self) -> &SDgaModel {
        &self.model
    }

    /// Image of base basis element `i` in the total space.
    pub fn embedding(&self) -> &[SparseVec] {
        &self.embedding
    }

    pub fn include(&self, v: &SparseVec) -> SparseVec {
        apply_op(&self.embedding, v)
    }

    /// Writes a total-space vector in base coordinates, if it is basic.
    pub fn descend(&self, v: &SparseVec) -> Option<SparseVec> {
        self.coords.of(v)
    }
}

fn residual(model: &SDgaModel, v: &SparseVec) -> Option<String> {
    (!v.is_zero()).then(|| model.format(v))
}

/// Checks the graded-algebra and differential laws of a model and its `s`-action.
pub fn validate_sdga(model: &SDgaModel) -> CheckReport {
    let mut rep = CheckReport::new();
    let n = model.dim();
    let deg = |i: usize| model.degrees[i];
    let e = SparseVec::unit;

    for a in 0..n {
        let da = &model.d[a];
        let ok = da.iter().all(|(j, _)| deg(j) == deg(a) + 1);
        rep.record("d raises degree by 1", model.label(a), (!ok).then(|| model.format(da)));
        let one_a = model.product(&model.one(), &e(a)).minus(&e(a));
        let a_one = model.product(&e(a), &model.one()).minus(&e(a));
        rep.record("1*a = a", model.label(a), residual(model, &one_a));
        rep.record("a*1 = a", model.label(a), residual(model, &a_one));
        rep.record("d^2 = 0", model.label(a), residual(model, &model.apply_d(da)));
        for b in 0..n {
            let w = format!("({}, {})", model.name(a), model.name(b));
            let ab = &model.mul[a][b];
            let ok = ab.iter().all(|(j, _)| deg(j) == deg(a) + deg(b));
            rep.record("product is additive in degree", w.clone(), (!ok).then(|| model.format(ab)));
            let comm = ab.minus(&model.mul[b][a].scaled(&koszul_sign(deg(a), deg(b))));
            rep.record("graded commutativity", w.clone(), residual(model, &comm));
            let leib = model
                .apply_d(ab)
                .minus(&model.product(da, &e(b)))
                .minus(&model.product(&e(a), &model.d[b]).scaled(&sign_of_degree(deg(a))));
            rep.record("d is a derivation", w, residual(model, &leib));
            for c in 0..n {
                let lhs = model.product(ab, &e(c));
                let rhs = model.product(&e(a), &model.mul[b][c]);
                let w = format!("({}, {}, {})", model.name(a), model.name(b), model.name(c));
                rep.record("associativity", w, residual(model, &lhs.minus(&rhs)));
            }
        }
    }
    rep.merge(validate_action(model, &model.s, "S"));
    rep
}

/// Laws of a contraction action: degree, Leibniz, `iota` anticommutation and
/// the bracket relations of the derived Lie derivatives.
fn validate_action(model: &SDgaModel, act: &Action, tag: &str) -> CheckReport {
    let mut rep = CheckReport::new();
    let n = model.dim();
    let l = act.dim();
    let deg = |i: usize| model.degrees[i];
    let e = SparseVec::unit;
    for i in 0..l {
        let io = &act.iota[i];
        let lv = &act.lie_derivs[i];
        for a in 0..n {
            let ok = io[a].iter().all(|(j, _)| deg(j) + 1 == deg(a));
            let id = format!("iota^{tag}_{} lowers degree by 1", i + 1);
            rep.record(id, model.label(a), (!ok).then(|| model.format(&io[a])));
            let r = apply_op(lv, &model.d[a]).minus(&model.apply_d(&lv[a]));
            rep.record(format!("L^{tag}_{} commutes with d", i + 1), model.label(a), residual(model, &r));
            for b in a..n {
                let w = format!("({}, {})", model.name(a), model.name(b));
                let leib = apply_op(io, &model.mul[a][b])
                    .minus(&model.product(&io[a], &e(b)))
                    .minus(&model.product(&e(a), &io[b]).scaled(&sign_of_degree(deg(a))));
                rep.record(format!("iota^{tag}_{} is a derivation", i + 1), w, residual(model, &leib));
            }
            for j in i..l {
                let r = apply_op(io, &act.iota[j][a]).plus(&apply_op(&act.iota[j], &io[a]));
                let id = format!("{{iota^{tag}_{}, iota^{tag}_{}}} = 0", i + 1, j + 1);
                rep.record(id, model.label(a), residual(model, &r));
            }
            for j in 0..l {
                let mut r = apply_op(lv, &act.lie_derivs[j][a]).minus(&apply_op(&act.lie_derivs[j], &lv[a]));
                let mut s = apply_op(lv, &act.iota[j][a]).minus(&apply_op(&act.iota[j], &lv[a]));
                for k in 0..l {
                    let c = act.lie.c(i, j, k);
                    if !c.is_zero() {
                        r.add_scaled(&act.lie_derivs[k][a], &-c);
                        s.add_scaled(&act.iota[k][a], &-c);
                    }
                }
                let id = format!("[L^{tag}_{}, L^{tag}_{}] = sum c L^{tag}", i + 1, j + 1);
                rep.record(id, model.label(a), residual(model, &r));
                let id = format!("[L^{tag}_{}, iota^{tag}_{}] = sum c iota^{tag}", i + 1, j + 1);
                rep.record(id, model.label(a), residual(model, &s));
            }
        }
    }
    rep
}

/// Validates both actions and the four mixed commutation families.
pub fn validate_bundle(bundle: &BundleModel) -> CheckReport {
    let model = &bundle.model;
    let mut rep = validate_sdga(model);
    rep.merge(validate_action(model, &bundle.g, "G"));
    let s = &model.s;
    let g = &bundle.g;
    let comm = |x: &LinearOp, y: &LinearOp, anti: bool, a: usize| {
        let xy = apply_op(x, &y[a]);
        let yx = apply_op(y, &x[a]);
        if anti {
            xy.plus(&yx)
        } else {
            xy.minus(&yx)
        }
    };
    for i in 0..s.dim() {
        for b in 0..g.dim() {
            for a in 0..model.dim() {
                let w = model.label(a);
                let (i1, b1) = (i + 1, b + 1);
                let r = comm(&s.lie_derivs[i], &g.lie_derivs[b], false, a);
                rep.record(format!("[L^S_{i1}, L^G_{b1}] = 0"), w.clone(), residual(model, &r));
                let r = comm(&s.iota[i], &g.iota[b], true, a);
                rep.record(format!("{{iota^S_{i1}, iota^G_{b1}}} = 0"), w.clone(), residual(model, &r));
                let r = comm(&s.lie_derivs[i], &g.iota[b], false, a);
                rep.record(format!("[L^S_{i1}, iota^G_{b1}] = 0"), w.clone(), residual(model, &r));
                let r = comm(&g.lie_derivs[b], &s.iota[i], false, a);
                rep.record(format!("[L^G_{b1}, iota^S_{i1}] = 0"), w, residual(model, &r));
            }
        }
    }
    rep
}

/// Name-based construction of models; the symmetric half of the product table
/// and products with the unit are filled in automatically.
#[derive(Clone, Debug)]
pub struct ModelBuilder {
    names: Vec<String>,
    degrees: Vec<u32>,
    products: BTreeMap<(usize, usize), SparseVec>,
    d: BTreeMap<usize, SparseVec>,
    s_lie: LieAlgebraData,
    s_iota: BTreeMap<(usize, usize), SparseVec>,
    g_lie: Option<LieAlgebraData>,
    g_iota: BTreeMap<(usize, usize), SparseVec>,
}

impl ModelBuilder {
    pub fn new(s_lie: LieAlgebraData) -> Self {
        ModelBuilder {
            names: Vec::new(),
            degrees: Vec::new(),
            products: BTreeMap::new(),
            d: BTreeMap::new(),
            s_lie,
            s_iota: BTreeMap::new(),
            g_lie: None,
            g_iota: BTreeMap::new(),
        }
    }

    pub fn structure_algebra(&mut self, g_lie: LieAlgebraData) -> &mut Self {
        self.g_lie = Some(g_lie);
        self
    }

    pub fn basis(&mut self, name: &str, degree: u32) -> Result<usize, ModelError> {
        if self.names.iter().any(|s| s == name) {
            return Err(ModelError::DuplicateName(name.to_string()));
        }
        self.names.push(name.to_string());
        self.degrees.push(degree);
        Ok(self.names.len() - 1)
    }

    pub fn index(&self, name: &str) -> Result<usize, ModelError> {
        self.names
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| ModelError::UnknownName(name.to_string()))
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.degrees[i]
    }

    pub fn lincomb(&self, terms: &[(&str, Rat)]) -> Result<SparseVec, ModelError> {
        let mut v = SparseVec::new();
        for (name, c) in terms {
            v.add_term(self.index(name)?, c);
        }
        Ok(v)
    }

    pub fn set_product(&mut self, a: usize, b: usize, v: SparseVec) {
        self.products.insert((a, b), v);
    }

    pub fn set_d(&mut self, a: usize, v: SparseVec) {
        self.d.insert(a, v);
    }

    pub fn set_iota_s(&mut self, i: usize, a: usize, v: SparseVec) -> Result<(), ModelError> {
        let bound = self.s_lie.dim();
        if i >= bound {
            return Err(ModelError::IndexOutOfRange { what: "iota_s", index: i, bound });
        }
        self.s_iota.insert((i, a), v);
        Ok(())
    }

    pub fn set_iota_g(&mut self, i: usize, a: usize, v: SparseVec) -> Result<(), ModelError> {
        let bound = self.g_lie.as_ref().map_or(0, LieAlgebraData::dim);
        if i >= bound {
            return Err(ModelError::IndexOutOfRange { what: "iota_g", index: i, bound });
        }
        self.g_iota.insert((i, a), v);
        Ok(())
    }

    pub fn product(&mut self, a: &str, b: &str, terms: &[(&str, Rat)]) -> Result<(), ModelError> {
        let v = self.lincomb(terms)?;
        let (a, b) = (self.index(a)?, self.index(b)?);
        self.set_product(a, b, v);
        Ok(())
    }

    pub fn d(&mut self, a: &str, terms: &[(&str, Rat)]) -> Result<(), ModelError> {
        let v = self.lincomb(terms)?;
        let a = self.index(a)?;
        self.set_d(a, v);
        Ok(())
    }

    pub fn iota_s(&mut self, i: usize, a: &str, terms: &[(&str, Rat)]) -> Result<(), ModelError> {
        let v = self.lincomb(terms)?;
        let a = self.index(a)?;
        self.set_iota_s(i, a, v)
    }

    pub fn iota_g(&mut self, i: usize, a: &str, terms: &[(&str, Rat)]) -> Result<(), ModelError> {
        let v = self.lincomb(terms)?;
        let a = self.index(a)?;
        self.set_iota_g(i, a, v)
    }

    fn tables(&self) -> Result<(Vec<Vec<SparseVec>>, LinearOp), ModelError> {
        let n = self.names.len();
        if n == 0 {
            return Err(ModelError::EmptyBasis);
        }
        let unit = self
            .names
            .iter()
            .position(|s| s == UNIT_NAME)
            .filter(|&u| self.degrees[u] == 0)
            .ok_or(ModelError::MissingUnit)?;
        let mut mul = vec![vec![SparseVec::new(); n]; n];
        for (a, row) in mul.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                *cell = if let Some(v) = self.products.get(&(a, b)) {
                    v.clone()
                } else if let Some(v) = self.products.get(&(b, a)) {
                    v.scaled(&koszul_sign(self.degrees[a], self.degrees[b]))
                } else if a == unit {
                    SparseVec::unit(b)
                } else if b == unit {
                    SparseVec::unit(a)
                } else {
                    SparseVec::new()
                };
            }
        }
        let d = (0..n).map(|a| self.d.get(&a).cloned().unwrap_or_default()).collect();
        Ok((mul, d))
    }

    fn ops(&self, l: usize, table: &BTreeMap<(usize, usize), SparseVec>) -> Vec<LinearOp> {
        let n = self.names.len();
        (0..l)
            .map(|i| (0..n).map(|a| table.get(&(i, a)).cloned().unwrap_or_default()).collect())
            .collect()
    }

    pub fn build(&self) -> Result<SDgaModel, ModelError> {
        let (mul, d) = self.tables()?;
        let iota = self.ops(self.s_lie.dim(), &self.s_iota);
        SDgaModel::from_tables(self.names.clone(), self.degrees.clone(), mul, d, self.s_lie.clone(), iota)
    }

    pub fn build_bundle(&self) -> Result<BundleModel, ModelError> {
        let model = self.build()?;
        let g_lie = self.g_lie.clone().unwrap_or_else(|| LieAlgebraData::abelian(0));
        let iota = self.ops(g_lie.dim(), &self.g_iota);
        BundleModel::new(model, g_lie, iota)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Plain(SDgaModel),
    Bundle(BundleModel),
}

impl ModelKind {
    pub fn sdga(&self) -> &SDgaModel {
        match self {
            ModelKind::Plain(m) => m,
            ModelKind::Bundle(b) => b.model(),
        }
    }

    pub fn bundle(&self) -> Option<&BundleModel> {
        match self {
            ModelKind::Plain(_) => None,
            ModelKind::Bundle(b) => Some(b),
        }
    }

    /// Replaces `s` when it acts trivially.
    pub fn with_lie(&self, lie: LieAlgebraData) -> Result<Self, ModelError> {
        Ok(match self {
            ModelKind::Plain(m) => ModelKind::Plain(m.with_trivial_action(lie)?),
            ModelKind::Bundle(b) => ModelKind::Bundle(b.with_trivial_s(lie)?),
        })
    }
}

pub const BUILTIN_NAMES: &[&str] = &[
    "point",
    "circle_rotation",
    "s2_trivial",
    "flat_circle_over_circle",
    "hopf_trivial_s",
    "hopf_fiber_rotation",
];

fn one() -> Rat {
    Rat::one()
}

pub fn builtin(name: &str) -> Result<ModelKind, ModelError> {
    let u1 = LieAlgebraData::u1();
    let mut b = ModelBuilder::new(u1.clone());
    b.basis(UNIT_NAME, 0)?;
    match name {
        "point" => Ok(ModelKind::Plain(b.build()?)),
        "circle_rotation" => {
            b.basis("alpha", 1)?;
            b.iota_s(0, "alpha", &[("1", one())])?;
            Ok(ModelKind::Plain(b.build()?))
        }
        "s2_trivial" => {
            b.basis("omega", 2)?;
            Ok(ModelKind::Plain(b.build()?))
        }
        "flat_circle_over_circle" => {
            b.structure_algebra(u1);
            b.basis("alpha", 1)?;
            b.basis("beta", 1)?;
            b.basis("alpha_beta", 2)?;
            b.product("alpha", "beta", &[("alpha_beta", one())])?;
            b.iota_g(0, "beta", &[("1", one())])?;
            b.iota_g(0, "alpha_beta", &[("alpha", -one())])?;
            b.iota_s(0, "alpha", &[("1", one())])?;
            b.iota_s(0, "alpha_beta", &[("beta", one())])?;
            Ok(ModelKind::Bundle(b.build_bundle()?))
        }
        "hopf_trivial_s" | "hopf_fiber_rotation" => {
            b.structure_algebra(u1);
            b.basis("beta", 1)?;
            b.basis("omega", 2)?;
            b.basis("beta_omega", 3)?;
            b.product("beta", "omega", &[("beta_omega", one())])?;
            b.d("beta", &[("omega", one())])?;
            b.iota_g(0, "beta", &[("1", one())])?;
            b.iota_g(0, "beta_omega", &[("omega", one())])?;
            if name == "hopf_fiber_rotation" {
                b.iota_s(0, "beta", &[("1", one())])?;
                b.iota_s(0, "beta_omega", &[("omega", one())])?;
            }
            Ok(ModelKind::Bundle(b.build_bundle()?))
        }
        _ => Err(ModelError::UnknownBuiltin(name.to_string())),
    }
}

/// Default connection of a builtin bundle, one `A`-vector per `g` basis element.
pub fn builtin_connection(name: &str) -> Option<Vec<SparseVec>> {
    let model = builtin(name).ok()?;
    let m = model.bundle()?.model();
    let at = |s: &str| m.find(s).expect("builtin basis name");
    match name {
        "flat_circle_over_circle" => Some(vec![SparseVec::from_pairs([
            (at("beta"), one()),
            (at("alpha"), rat(3, 2)),
        ])]),
        "hopf_trivial_s" | "hopf_fiber_rotation" => Some(vec![SparseVec::unit(at("beta"))]),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratlin::int;

    #[test]
    fn builtins_validate() {
        for name in BUILTIN_NAMES {
            let m = builtin(name).unwrap();
            let rep = match &m {
                ModelKind::Plain(p) => validate_sdga(p),
                ModelKind::Bundle(b) => validate_bundle(b),
            };
            assert!(rep.passed(), "{name}: {rep}");
            assert!(rep.checks > 0);
        }
    }

    #[test]
    fn symmetric_half_is_filled() {
        let m = builtin("flat_circle_over_circle").unwrap();
        let p = m.sdga();
        let (a, b, ab) = (p.find("alpha").unwrap(), p.find("beta").unwrap(), p.find("alpha_beta").unwrap());
        assert_eq!(p.mul_basis(b, a), &SparseVec::from_pairs([(ab, int(-1))]));
        assert!(p.mul_basis(a, a).is_zero());
        assert_eq!(p.format(&p.mul_basis(b, a).plus(&p.one().scaled(&rat(1, 2)))), "-alpha_beta + 1/2");
    }

    #[test]
    fn missing_unit_and_empty_basis() {
        let mut b = ModelBuilder::new(LieAlgebraData::u1());
        assert_eq!(b.build().unwrap_err(), ModelError::EmptyBasis);
        b.basis("x", 1).unwrap();
        assert_eq!(b.build().unwrap_err(), ModelError::MissingUnit);
        assert_eq!(b.basis("x", 2).unwrap_err(), ModelError::DuplicateName("x".into()));
    }

    #[test]
    fn broken_leibniz_reported() {
        let mut b = ModelBuilder::new(LieAlgebraData::u1());
        b.basis("1", 0).unwrap();
        b.basis("x", 1).unwrap();
        b.basis("y", 2).unwrap();
        b.d("x", &[("y", one())]).unwrap();
        b.d("1", &[("y", one())]).unwrap();
        let rep = validate_sdga(&b.build().unwrap());
        assert!(rep.has_failure("d raises degree"));
        assert!(rep.has_failure("d is a derivation"));
    }

    #[test]
    fn derived_lie_derivative() {
        let m = builtin("hopf_fiber_rotation").unwrap();
        let p = m.sdga();
        for a in 0..p.dim() {
            assert!(p.apply_lie(0, &SparseVec::unit(a)).is_zero());
        }
    }

    #[test]
    fn base_of_builtins() {
        let m = builtin("flat_circle_over_circle").unwrap();
        let base = m.bundle().unwrap().base().unwrap();
        assert_eq!(base.model().names(), ["1", "alpha"]);
        assert!(validate_sdga(base.model()).passed());
        let h = builtin("hopf_fiber_rotation").unwrap();
        let base = h.bundle().unwrap().base().unwrap();
        assert_eq!(base.model().names(), ["1", "omega"]);
        assert!(base.model().action().is_trivial());
    }

    #[test]
    fn retarget_trivial_action() {
        let p = builtin("point").unwrap().with_lie(LieAlgebraData::su2()).unwrap();
        assert_eq!(p.sdga().lie().dim(), 3);
        assert!(builtin("circle_rotation").unwrap().with_lie(LieAlgebraData::su2()).is_err());
    }
}
