//! Exact sparse linear algebra over arbitrary-precision rationals.
//!
//! Everything here pivots on the first nonzero entry in row order, so the
//! bases returned by [`kernel_basis`] and [`quotient_basis`] are reproducible
//! bit for bit.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar; always in lowest terms with a positive denominator.
pub type Rat = BigRational;

/// A dense coordinate vector.
pub type RatVector = Vec<Rat>;

pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn zero_vector(len: usize) -> RatVector {
    vec![Rat::zero(); len]
}

pub fn is_zero_vector(v: &[Rat]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Formats a rational the way the rest of the crate prints coefficients: `p` or `p/q`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinAlgError {
    #[error("dimension mismatch: expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    /// A boundary is not in the span of the cycles; upstream d^2 != 0.
    #[error("invalid complex: boundary #{index} is not a cycle")]
    BoundaryNotCycle { index: usize },
}

/// Sparse vector keyed by coordinate index; never stores zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparseVec(BTreeMap<usize, Rat>);

impl SparseVec {
    pub fn new() -> Self {
        SparseVec(BTreeMap::new())
    }

    pub fn unit(index: usize) -> Self {
        let mut v = SparseVec::new();
        v.0.insert(index, Rat::one());
        v
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, Rat)>>(pairs: I) -> Self {
        let mut v = SparseVec::new();
        for (i, c) in pairs {
            v.add_term(i, &c);
        }
        v
    }

    pub fn from_dense(v: &[Rat]) -> Self {
        SparseVec(
            v.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i, c.clone()))
                .collect(),
        )
    }

    pub fn to_dense(&self, len: usize) -> RatVector {
        let mut out = zero_vector(len);
        for (&i, c) in &self.0 {
            out[i] = c.clone();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> Rat {
        self.0.get(&index).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rat)> {
        self.0.iter().map(|(&i, c)| (i, c))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_term(&mut self, index: usize, coeff: &Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.0.entry(index).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.0.remove(&index);
        }
    }

    pub fn add_scaled(&mut self, other: &SparseVec, factor: &Rat) {
        if factor.is_zero() {
            return;
        }
        for (&i, c) in &other.0 {
            self.add_term(i, &(c * factor));
        }
    }

    pub fn scaled(&self, factor: &Rat) -> SparseVec {
        if factor.is_zero() {
            return SparseVec::new();
        }
        SparseVec(self.0.iter().map(|(&i, c)| (i, c * factor)).collect())
    }

    pub fn plus(&self, other: &SparseVec) -> SparseVec {
        let mut out = self.clone();
        out.add_scaled(other, &Rat::one());
        out
    }

    pub fn minus(&self, other: &SparseVec) -> SparseVec {
        let mut out = self.clone();
        out.add_scaled(other, &-Rat::one());
        out
    }
}

/// Sparse rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Rat>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = RatMatrix::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged row {r}");
            for (c, v) in row.iter().enumerate() {
                m.set(r, c, v.clone());
            }
        }
        m
    }

    /// Builds a matrix whose `j`th column is `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[Vec<Rat>]) -> Self {
        let mut m = RatMatrix::zeros(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column {c} has wrong length");
            for (r, v) in col.iter().enumerate() {
                m.set(r, c, v.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Rat {
        self.entries
            .get(&(r, c))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    pub fn set(&mut self, r: usize, c: usize, value: Rat) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        if value.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), value);
        }
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &Rat)> {
        self.entries.iter().map(|(&k, v)| (k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn column(&self, c: usize) -> RatVector {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Result<RatVector, LinAlgError> {
        if v.len() != self.cols {
            return Err(LinAlgError::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut out = zero_vector(self.rows);
        for (&(r, c), x) in &self.entries {
            if !v[c].is_zero() {
                out[r] += x * &v[c];
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix, LinAlgError> {
        if self.cols != other.rows {
            return Err(LinAlgError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut by_row: BTreeMap<usize, Vec<(usize, &Rat)>> = BTreeMap::new();
        for (&(r, c), x) in &other.entries {
            by_row.entry(r).or_default().push((c, x));
        }
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for (&(r, k), a) in &self.entries {
            if let Some(row) = by_row.get(&k) {
                for &(c, b) in row {
                    let cur = out.get(r, c);
                    out.set(r, c, cur + a * b);
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (&(r, c), x) in &other.entries {
            let cur = out.get(r, c);
            out.set(r, c, cur - x);
        }
        out
    }

    pub fn scaled(&self, factor: &Rat) -> RatMatrix {
        let mut out = RatMatrix::zeros(self.rows, self.cols);
        for (&(r, c), x) in &self.entries {
            out.set(r, c, x * factor);
        }
        out
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(cols: usize, blocks: &[RatMatrix]) -> RatMatrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut out = RatMatrix::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack column mismatch");
            for (&(r, c), x) in &b.entries {
                out.set(offset + r, c, x.clone());
            }
            offset += b.rows;
        }
        out
    }

    fn sparse_rows(&self) -> Vec<SparseVec> {
        let mut rows = vec![SparseVec::new(); self.rows];
        for (&(r, c), x) in &self.entries {
            rows[r].add_term(c, x);
        }
        rows
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| fmt_rat(&self.get(r, c))).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Reduced row echelon form; `pivots[i]` is the pivot column of row `i`.
struct Rref {
    rows: Vec<SparseVec>,
    pivots: Vec<usize>,
}

fn rref(m: &RatMatrix) -> Rref {
    let mut pending = m.sparse_rows();
    pending.retain(|r| !r.is_zero());
    let mut done: Vec<SparseVec> = Vec::new();
    let mut pivots = Vec::new();
    for col in 0..m.cols {
        let Some(pos) = pending.iter().position(|r| !r.get(col).is_zero()) else {
            continue;
        };
        let row = pending.remove(pos);
        let inv = row.get(col).recip();
        let row = row.scaled(&inv);
        for other in pending.iter_mut().chain(done.iter_mut()) {
            let f = other.get(col);
            if !f.is_zero() {
                other.add_scaled(&row, &-f);
            }
        }
        pending.retain(|r| !r.is_zero());
        done.push(row);
        pivots.push(col);
    }
    Rref { rows: done, pivots }
}

pub fn rank(m: &RatMatrix) -> usize {
    rref(m).pivots.len()
}

/// Basis of the null space, one vector per non-pivot column (in column order).
pub fn kernel_basis(m: &RatMatrix) -> Vec<RatVector> {
    let r = rref(m);
    let mut is_pivot = vec![false; m.cols];
    for &p in &r.pivots {
        is_pivot[p] = true;
    }
    let mut out = Vec::new();
    for free in (0..m.cols).filter(|&c| !is_pivot[c]) {
        let mut v = zero_vector(m.cols);
        v[free] = Rat::one();
        for (row, &p) in r.rows.iter().zip(&r.pivots) {
            let x = row.get(free);
            if !x.is_zero() {
                v[p] = -x;
            }
        }
        out.push(v);
    }
    out
}

/// Returns some `x` with `m x = b`, or `None` if the system is inconsistent.
/// Free variables are set to zero.
pub fn solve(m: &RatMatrix, b: &[Rat]) -> Result<Option<RatVector>, LinAlgError> {
    if b.len() != m.rows {
        return Err(LinAlgError::DimensionMismatch {
            expected: m.rows,
            found: b.len(),
        });
    }
    let mut aug = RatMatrix::zeros(m.rows, m.cols + 1);
    for ((r, c), x) in m.entries() {
        aug.set(r, c, x.clone());
    }
    for (r, x) in b.iter().enumerate() {
        aug.set(r, m.cols, x.clone());
    }
    let red = rref(&aug);
    if red.pivots.contains(&m.cols) {
        return Ok(None);
    }
    let mut x = zero_vector(m.cols);
    for (row, &p) in red.rows.iter().zip(&red.pivots) {
        x[p] = row.get(m.cols);
    }
    Ok(Some(x))
}

/// Incrementally built echelon basis of a subspace of `Q^dim`.
///
/// Each stored row has leading entry 1 at its pivot column; reduction walks
/// pivots in ascending order so the reduced form of a vector is its canonical
/// normal form modulo the subspace.
#[derive(Clone, Debug)]
pub struct Echelon {
    dim: usize,
    rows: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new(dim: usize) -> Self {
        Echelon {
            dim,
            rows: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce_sparse(&self, mut v: SparseVec) -> SparseVec {
        for (&p, row) in &self.rows {
            let f = v.get(p);
            if !f.is_zero() {
                v.add_scaled(row, &-f);
            }
        }
        v
    }

    pub fn reduce(&self, v: &[Rat]) -> RatVector {
        assert_eq!(v.len(), self.dim);
        self.reduce_sparse(SparseVec::from_dense(v)).to_dense(self.dim)
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.reduce_sparse(SparseVec::from_dense(v)).is_zero()
    }

    /// Adds `v` to the span; returns whether it was independent.
    pub fn insert(&mut self, v: &[Rat]) -> bool {
        assert_eq!(v.len(), self.dim);
        let red = self.reduce_sparse(SparseVec::from_dense(v));
        let Some((lead, c)) = red.iter().next() else {
            return false;
        };
        let row = red.scaled(&c.recip());
        self.rows.insert(lead, row);
        true
    }
}

/// Result of a quotient computation `span(cycles) / span(boundaries)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    pub dimension: usize,
    /// Cycles in normal form modulo the boundaries, independent modulo them.
    pub representatives: Vec<RatVector>,
}

/// Picks representatives of `span(cycles) / span(boundaries)`.
///
/// Cycles are scanned in order; a cycle is kept when it is independent of the
/// boundaries and of the cycles kept before it. Kept cycles are returned in
/// their normal form modulo the boundaries.
pub fn quotient_basis(cycles: &[RatVector], boundaries: &[RatVector]) -> Result<Quotient, LinAlgError> {
    let Some(dim) = cycles.first().or(boundaries.first()).map(Vec::len) else {
        return Ok(Quotient {
            dimension: 0,
            representatives: Vec::new(),
        });
    };
    for v in cycles.iter().chain(boundaries) {
        if v.len() != dim {
            return Err(LinAlgError::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }
    let mut cycle_span = Echelon::new(dim);
    for c in cycles {
        cycle_span.insert(c);
    }
    let mut bounds = Echelon::new(dim);
    for (index, b) in boundaries.iter().enumerate() {
        if !cycle_span.contains(b) {
            return Err(LinAlgError::BoundaryNotCycle { index });
        }
        bounds.insert(b);
    }
    let mut acc = bounds.clone();
    let mut representatives = Vec::new();
    for c in cycles {
        if acc.insert(c) {
            representatives.push(bounds.reduce(c));
        }
    }
    Ok(Quotient {
        dimension: representatives.len(),
        representatives,
    })
}

/// Writes `v` in terms of the given vectors, if it lies in their span.
pub fn coordinates_in_span(vectors: &[RatVector], v: &[Rat]) -> Result<Option<RatVector>, LinAlgError> {
    let m = RatMatrix::from_columns(v.len(), vectors);
    solve(&m, v)
}

/// Largest absolute numerator or denominator bit length, for diagnostics.
pub fn max_bits(v: &[Rat]) -> u64 {
    v.iter()
        .map(|x| x.numer().abs().bits().max(x.denom().bits()))
        .max()
        .unwrap_or(0)
}
