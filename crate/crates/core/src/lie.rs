//! Lie algebras given by structure constants, and Ad-invariant polynomials.
//!
//! Indices are zero-based in the API; user-facing text prints them one-based.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Zero};
use thiserror::Error;

use crate::ratlin::{fmt_rat, int, Rat, RatMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    #[error("structure constant index out of range: ({i},{j},{k}) in dimension {dim}")]
    IndexOutOfRange { i: usize, j: usize, k: usize, dim: usize },
    #[error("structure constants must be given with i < j, found ({i},{j})")]
    NotUpperTriangular { i: usize, j: usize },
    #[error("duplicate structure constant for ({i},{j},{k})")]
    DuplicateConstant { i: usize, j: usize, k: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("raw structure-constant array has {found} entries, expected {expected}")]
    BadArrayLength { expected: usize, found: usize },
    #[error("polynomial {poly} is not Ad-invariant (fails for basis element e{})", .index + 1)]
    NotInvariant { poly: String, index: usize },
}

/// First violated axiom found by [`LieAlgebraData::validate_lie`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LieViolation {
    /// `c[i][j][k] != -c[j][i][k]`.
    Antisymmetry { i: usize, j: usize, k: usize },
    /// Coefficient of `X_p` in `[[X_i,X_j],X_k] + [[X_j,X_k],X_i] + [[X_k,X_i],X_j]` is `value`.
    Jacobi {
        i: usize,
        j: usize,
        k: usize,
        p: usize,
        value: Rat,
    },
}

impl fmt::Display for LieViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LieViolation::Antisymmetry { i, j, k } => write!(
                f,
                "antisymmetry fails: c[{}][{}][{}] != -c[{}][{}][{}]",
                i + 1,
                j + 1,
                k + 1,
                j + 1,
                i + 1,
                k + 1
            ),
            LieViolation::Jacobi { i, j, k, p, value } => write!(
                f,
                "Jacobi identity fails at ({},{},{}): coefficient of X{} is {}",
                i + 1,
                j + 1,
                k + 1,
                p + 1,
                fmt_rat(value)
            ),
        }
    }
}

/// A Lie algebra presented by a basis and structure constants
/// `[X_i, X_j] = sum_k c[i][j][k] X_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieAlgebraData {
    dim: usize,
    names: Vec<String>,
    constants: Vec<Rat>,
}

impl LieAlgebraData {
    pub fn abelian(dim: usize) -> Self {
        LieAlgebraData {
            dim,
            names: (1..=dim).map(|i| format!("X{i}")).collect(),
            constants: vec![Rat::zero(); dim * dim * dim],
        }
    }

    pub fn u1() -> Self {
        Self::abelian(1)
    }

    /// su(2) with `[X1,X2] = X3`, `[X2,X3] = X1`, `[X3,X1] = X2`.
    pub fn su2() -> Self {
        Self::from_upper_triples(
            3,
            &[(0, 1, 2, int(1)), (1, 2, 0, int(1)), (0, 2, 1, int(-1))],
        )
        .expect("su(2) constants are well formed")
    }

    /// Builds the algebra from constants with `i < j`; the `j > i` half is
    /// filled in by antisymmetry.
    pub fn from_upper_triples(dim: usize, triples: &[(usize, usize, usize, Rat)]) -> Result<Self, LieError> {
        let mut lie = Self::abelian(dim);
        let mut seen = std::collections::BTreeSet::new();
        for (i, j, k, v) in triples {
            let (i, j, k) = (*i, *j, *k);
            if i >= dim || j >= dim || k >= dim {
                return Err(LieError::IndexOutOfRange { i, j, k, dim });
            }
            if i >= j {
                return Err(LieError::NotUpperTriangular { i, j });
            }
            if !seen.insert((i, j, k)) {
                return Err(LieError::DuplicateConstant { i, j, k });
            }
            let a = lie.index(i, j, k);
            let b = lie.index(j, i, k);
            lie.constants[a] = v.clone();
            lie.constants[b] = -v.clone();
        }
        Ok(lie)
    }

    /// Takes a full `dim^3` array (`c[i][j][k]` at `(i*dim + j)*dim + k`) as is,
    /// without enforcing antisymmetry. Use [`validate_lie`](Self::validate_lie)
    /// to check it.
    pub fn from_raw(dim: usize, constants: Vec<Rat>) -> Result<Self, LieError> {
        if constants.len() != dim * dim * dim {
            return Err(LieError::BadArrayLength {
                expected: dim * dim * dim,
                found: constants.len(),
            });
        }
        let mut lie = Self::abelian(dim);
        lie.constants = constants;
        Ok(lie)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.dim);
        self.names = names;
        self
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// `c_{ij}^k`.
    pub fn c(&self, i: usize, j: usize, k: usize) -> &Rat {
        &self.constants[self.index(i, j, k)]
    }

    pub fn raw_constants(&self) -> &[Rat] {
        &self.constants
    }

    pub fn is_abelian(&self) -> bool {
        self.constants.iter().all(Zero::is_zero)
    }

    /// Nonzero constants with `i < j`, in lexicographic order.
    pub fn upper_triples(&self) -> Vec<(usize, usize, usize, Rat)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                for k in 0..self.dim {
                    let v = self.c(i, j, k);
                    if !v.is_zero() {
                        out.push((i, j, k, v.clone()));
                    }
                }
            }
        }
        out
    }

    /// Checks antisymmetry, then the Jacobi identity over all `(i,j,k,p)`.
    pub fn validate_lie(&self) -> Result<(), LieViolation> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if *self.c(i, j, k) != -self.c(j, i, k).clone() {
                        return Err(LieViolation::Antisymmetry { i, j, k });
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for p in 0..n {
                        let mut s = Rat::zero();
                        for m in 0..n {
                            s += self.c(i, j, m) * self.c(m, k, p);
                            s += self.c(j, k, m) * self.c(m, i, p);
                            s += self.c(k, i, m) * self.c(m, j, p);
                        }
                        if !s.is_zero() {
                            return Err(LieViolation::Jacobi { i, j, k, p, value: s });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_len(&self, v: &[Rat]) -> Result<(), LieError> {
        if v.len() != self.dim {
            return Err(LieError::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    /// `([v,w])_k = sum_{ij} v_i w_j c_{ij}^k`.
    pub fn bracket(&self, v: &[Rat], w: &[Rat]) -> Result<Vec<Rat>, LieError> {
        self.check_len(v)?;
        self.check_len(w)?;
        let mut out = vec![Rat::zero(); self.dim];
        for (i, vi) in v.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, wj) in w.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                let vw = vi * wj;
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.c(i, j, k);
                    if !c.is_zero() {
                        *o += &vw * c;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix of the derivation `L_i` on the dual basis: column `j` holds the
    /// coordinates of `L_i u_j = -sum_k c_{ik}^j u_k`.
    pub fn coadjoint_matrix(&self, i: usize) -> Result<RatMatrix, LieError> {
        if i >= self.dim {
            return Err(LieError::IndexOutOfRange {
                i,
                j: 0,
                k: 0,
                dim: self.dim,
            });
        }
        let mut m = RatMatrix::zeros(self.dim, self.dim);
        for k in 0..self.dim {
            for j in 0..self.dim {
                m.set(k, j, -self.c(i, k, j).clone());
            }
        }
        Ok(m)
    }

    /// Structure constants as coordinates of `[X_i, X_j]`.
    pub fn bracket_of_basis(&self, i: usize, j: usize) -> Vec<Rat> {
        (0..self.dim).map(|k| self.c(i, j, k).clone()).collect()
    }
}

/// Polynomial with rational coefficients in `nvars` commuting variables
/// `x1..xn`, stored as exponent vector -> coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable x{} out of range", i + 1);
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Rat::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rat)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Rat) {
        assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(exps.clone()).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, x) in &self.terms {
            out.add_term(e.clone(), x * c);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(self.nvars, Rat::one());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Total degree of the highest term; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                out.add_term(e2, c * int(e[i] as i64));
            }
        }
        out
    }

    /// Evaluates the polynomial on values in any commutative algebra.
    pub fn evaluate<T, F, A, M>(&self, values: &[T], constant: F, add: A, mul: M) -> T
    where
        T: Clone,
        F: Fn(&Rat) -> T,
        A: Fn(&T, &T) -> T,
        M: Fn(&T, &T) -> T,
    {
        assert_eq!(values.len(), self.nvars);
        let mut acc = constant(&Rat::zero());
        for (exps, c) in &self.terms {
            let mut term = constant(c);
            for (v, &e) in values.iter().zip(exps) {
                for _ in 0..e {
                    term = mul(&term, v);
                }
            }
            acc = add(&acc, &term);
        }
        acc
    }

    pub fn eval_rat(&self, point: &[Rat]) -> Rat {
        self.evaluate(point, |c| c.clone(), |a, b| a + b, |a, b| a * b)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rat::one())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Polynomial::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest total degree first, then lexicographically descending exponents
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (n, (e, c)) in terms.into_iter().enumerate() {
            let factors: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(i, &x)| {
                    if x == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, x)
                    }
                })
                .collect();
            crate::write_term(f, n == 0, c, &factors.join("*"))?;
        }
        Ok(())
    }
}

/// Tests `sum_{b,c} c_{ab}^c x_b df/dx_c = 0` for every `a`; returns the
/// first failing index.
pub fn ad_invariance_failure(f: &Polynomial, g: &LieAlgebraData) -> Result<Option<usize>, LieError> {
    if f.nvars() != g.dim() {
        return Err(LieError::DimensionMismatch {
            expected: g.dim(),
            found: f.nvars(),
        });
    }
    let n = g.dim();
    let partials: Vec<Polynomial> = (0..n).map(|c| f.partial(c)).collect();
    for a in 0..n {
        let mut acc = Polynomial::zero(n);
        for b in 0..n {
            for (c, pc) in partials.iter().enumerate() {
                let k = g.c(a, b, c);
                if k.is_zero() || pc.is_zero() {
                    continue;
                }
                acc = &acc + &(&Polynomial::var(n, b) * pc).scale(k);
            }
        }
        if !acc.is_zero() {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

pub fn check_ad_invariance(f: &Polynomial, g: &LieAlgebraData) -> Result<bool, LieError> {
    Ok(ad_invariance_failure(f, g)?.is_none())
}

/// A polynomial on a Lie algebra that passed the infinitesimal invariance test.
///
/// Only the Lie-algebra condition is checked; it is equivalent to
/// Ad-invariance when the group is connected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantPolynomial {
    poly: Polynomial,
}

impl InvariantPolynomial {
    pub fn new(poly: Polynomial, g: &LieAlgebraData) -> Result<Self, LieError> {
        match ad_invariance_failure(&poly, g)? {
            None => Ok(InvariantPolynomial { poly }),
            Some(index) => Err(LieError::NotInvariant {
                poly: poly.to_string(),
                index,
            }),
        }
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratlin::rat;

    /// Brute-force Jacobi on basis triples via `bracket`.
    fn jacobi_by_brackets(g: &LieAlgebraData) -> bool {
        let n = g.dim();
        let e = |i: usize| -> Vec<Rat> { (0..n).map(|k| if k == i { int(1) } else { int(0) }).collect() };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let a = g.bracket(&g.bracket(&e(i), &e(j)).unwrap(), &e(k)).unwrap();
                    let b = g.bracket(&g.bracket(&e(j), &e(k)).unwrap(), &e(i)).unwrap();
                    let c = g.bracket(&g.bracket(&e(k), &e(i)).unwrap(), &e(j)).unwrap();
                    if (0..n).any(|p| !(&a[p] + &b[p] + &c[p]).is_zero()) {
                        return false;
                    }
                }
            }
        }
        true
    }

    #[test]
    fn validate_examples() {
        assert!(LieAlgebraData::u1().validate_lie().is_ok());
        let su2 = LieAlgebraData::su2();
        assert!(su2.validate_lie().is_ok());
        assert!(jacobi_by_brackets(&su2));

        // [X1,X2] = X1, [X1,X3] = X2
        let bad = LieAlgebraData::from_upper_triples(3, &[(0, 1, 0, int(1)), (0, 2, 1, int(1))]).unwrap();
        assert!(!jacobi_by_brackets(&bad));
        match bad.validate_lie() {
            Err(LieViolation::Jacobi { i, j, k, p, value }) => {
                assert_eq!((i, j, k, p), (0, 1, 2, 1));
                // [[X1,X2],X3] + [[X2,X3],X1] + [[X3,X1],X2] = [X1,X3] + 0 - [X2,X2] = X2
                assert_eq!(value, int(1));
            }
            other => panic!("expected Jacobi violation, got {other:?}"),
        }
    }

    #[test]
    fn raw_array_antisymmetry_violation() {
        let mut raw = LieAlgebraData::su2().raw_constants().to_vec();
        raw[3 * 3 + 2] = int(1); // c[2][1][3] = +1
        let g = LieAlgebraData::from_raw(3, raw).unwrap();
        assert_eq!(
            g.validate_lie(),
            Err(LieViolation::Antisymmetry { i: 0, j: 1, k: 2 })
        );
    }

    #[test]
    fn upper_triples_reject_bad_input() {
        assert!(matches!(
            LieAlgebraData::from_upper_triples(2, &[(1, 0, 0, int(1))]),
            Err(LieError::NotUpperTriangular { .. })
        ));
        assert!(matches!(
            LieAlgebraData::from_upper_triples(2, &[(0, 1, 5, int(1))]),
            Err(LieError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            LieAlgebraData::from_upper_triples(2, &[(0, 1, 0, int(1)), (0, 1, 0, int(2))]),
            Err(LieError::DuplicateConstant { .. })
        ));
    }

    #[test]
    fn bracket_examples() {
        let su2 = LieAlgebraData::su2();
        let e1 = vec![int(1), int(0), int(0)];
        let e2 = vec![int(0), int(1), int(0)];
        assert_eq!(su2.bracket(&e1, &e2).unwrap(), vec![int(0), int(0), int(1)]);
        let v = vec![rat(1, 2), int(-3), int(7)];
        assert!(su2.bracket(&v, &v).unwrap().iter().all(Zero::is_zero));
        let ab = LieAlgebraData::abelian(2);
        assert!(ab.bracket(&[int(1), int(2)], &[int(3), int(4)]).unwrap().iter().all(Zero::is_zero));
        assert!(su2.bracket(&e1, &[int(1)]).is_err());
    }

    #[test]
    fn coadjoint_examples() {
        assert!(LieAlgebraData::u1().coadjoint_matrix(0).unwrap().is_zero());
        let su2 = LieAlgebraData::su2();
        let m1 = su2.coadjoint_matrix(0).unwrap();
        // L_1 u_2 = -c_{13}^2 u_3 = u_3 ; L_1 u_3 = -c_{12}^3 u_2 = -u_2
        assert_eq!(m1.get(2, 1), int(1));
        assert_eq!(m1.get(1, 2), int(-1));
        assert_eq!(m1.nonzero_count(), 2);
        assert!(su2.coadjoint_matrix(3).is_err());
    }

    #[test]
    fn coadjoint_bracket_relation() {
        let su2 = LieAlgebraData::su2();
        let ms: Vec<RatMatrix> = (0..3).map(|i| su2.coadjoint_matrix(i).unwrap()).collect();
        for i in 0..3 {
            for j in 0..3 {
                let lhs = ms[i].mul(&ms[j]).unwrap().sub(&ms[j].mul(&ms[i]).unwrap());
                let mut rhs = RatMatrix::zeros(3, 3);
                for k in 0..3 {
                    rhs = rhs.sub(&ms[k].scaled(&-su2.c(i, j, k).clone()));
                }
                assert_eq!(lhs, rhs, "i={i} j={j}");
            }
        }
    }

    #[test]
    fn invariance_examples() {
        let su2 = LieAlgebraData::su2();
        let x = |i| Polynomial::var(3, i);
        let casimir = &(&x(0).pow(2) + &x(1).pow(2)) + &x(2).pow(2);
        assert!(check_ad_invariance(&casimir, &su2).unwrap());
        assert_eq!(ad_invariance_failure(&x(0), &su2).unwrap(), Some(1));
        let ab = LieAlgebraData::abelian(2);
        let any = &Polynomial::var(2, 0).pow(3) + &Polynomial::var(2, 1);
        assert!(check_ad_invariance(&any, &ab).unwrap());
        assert!(InvariantPolynomial::new(x(0), &su2).is_err());
    }

    #[test]
    fn polynomial_display() {
        let x = |i| Polynomial::var(2, i);
        let p = &(&x(0).pow(2).scale(&rat(3, 2)) - &x(1)) + &Polynomial::constant(2, int(-1));
        assert_eq!(p.to_string(), "3/2*x1^2 - x2 - 1");
        assert_eq!(Polynomial::zero(1).to_string(), "0");
    }
}
