//! Free graded-commutative algebras over the rationals.
//!
//! A monomial is stored in normal form: exponents of the even generators in
//! generator order, followed by a strictly increasing set of odd generators
//! (kept as a bitmask). All signs come from sorting odd generators.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num::{One, Zero};
use thiserror::Error;

use crate::ratlin::{int, Rat};

/// At most this many odd generators fit in a monomial.
pub const MAX_ODD_GENERATORS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GcaError {
    #[error("elements belong to different generator universes")]
    UniverseMismatch,
    #[error("duplicate generator name {0:?}")]
    DuplicateGenerator(String),
    #[error("too many odd generators ({0}); at most {MAX_ODD_GENERATORS} are supported")]
    TooManyOdd(usize),
    #[error("operator has no action assigned on generator {0:?}")]
    MissingAction(String),
    #[error("operator image of {generator:?} has degree {found}, expected {expected}")]
    DegreeMismatch {
        generator: String,
        expected: i64,
        found: i64,
    },
    #[error("operator assigns {found} generator images, universe has {expected}")]
    ArityMismatch { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_degree(d: i64) -> Parity {
        if d.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    /// `(-1)^(self * other)` as an integer.
    pub fn koszul(self, other: Parity) -> i64 {
        if self == Parity::Odd && other == Parity::Odd {
            -1
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GeneratorSpec {
    pub name: String,
    pub degree: u32,
}

impl GeneratorSpec {
    pub fn new(name: impl Into<String>, degree: u32) -> Self {
        GeneratorSpec {
            name: name.into(),
            degree,
        }
    }

    pub fn parity(&self) -> Parity {
        Parity::of_degree(self.degree as i64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Slot {
    Even(usize),
    Odd(usize),
}

/// The generator set of a free graded-commutative algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GcaUniverse {
    gens: Vec<GeneratorSpec>,
    slots: Vec<Slot>,
    even: Vec<usize>,
    odd: Vec<usize>,
}

impl GcaUniverse {
    pub fn new(gens: Vec<GeneratorSpec>) -> Result<Arc<Self>, GcaError> {
        let mut slots = Vec::with_capacity(gens.len());
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for (g, spec) in gens.iter().enumerate() {
            if gens[..g].iter().any(|o| o.name == spec.name) {
                return Err(GcaError::DuplicateGenerator(spec.name.clone()));
            }
            match spec.parity() {
                Parity::Even => {
                    slots.push(Slot::Even(even.len()));
                    even.push(g);
                }
                Parity::Odd => {
                    slots.push(Slot::Odd(odd.len()));
                    odd.push(g);
                }
            }
        }
        if odd.len() > MAX_ODD_GENERATORS {
            return Err(GcaError::TooManyOdd(odd.len()));
        }
        Ok(Arc::new(GcaUniverse {
            gens,
            slots,
            even,
            odd,
        }))
    }

    pub fn generators(&self) -> &[GeneratorSpec] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn even_count(&self) -> usize {
        self.even.len()
    }

    pub fn odd_count(&self) -> usize {
        self.odd.len()
    }

    /// Generator index of the `pos`-th even generator.
    pub fn even_generator(&self, pos: usize) -> usize {
        self.even[pos]
    }

    /// Generator index of the `pos`-th odd generator.
    pub fn odd_generator(&self, pos: usize) -> usize {
        self.odd[pos]
    }

    pub fn monomial_degree(&self, m: &Monomial) -> u32 {
        let e: u32 = m
            .even
            .iter()
            .enumerate()
            .map(|(p, &x)| x * self.gens[self.even[p]].degree)
            .sum();
        let o: u32 = m.odd_positions().map(|p| self.gens[self.odd[p]].degree).sum();
        e + o
    }

    pub fn generator_monomial(&self, g: usize) -> Monomial {
        let mut m = Monomial::one(self);
        match self.slots[g] {
            Slot::Even(p) => m.even[p] = 1,
            Slot::Odd(p) => m.odd = 1 << p,
        }
        m
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (p, &e) in m.even.iter().enumerate() {
            let name = &self.gens[self.even[p]].name;
            match e {
                0 => {}
                1 => parts.push(name.clone()),
                _ => parts.push(format!("{name}^{e}")),
            }
        }
        for p in m.odd_positions() {
            parts.push(self.gens[self.odd[p]].name.clone());
        }
        parts.join("*")
    }
}

/// Normal-form monomial. Equality of monomials is equality of this struct.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    even: Vec<u32>,
    odd: u64,
}

fn odd_merge_sign(a: u64, b: u64) -> i64 {
    // number of pairs (x in a, y in b) with x > y
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += if y >= 63 { 0 } else { (a >> (y + 1)).count_ones() };
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

impl Monomial {
    pub fn one(u: &GcaUniverse) -> Self {
        Monomial {
            even: vec![0; u.even_count()],
            odd: 0,
        }
    }

    pub fn from_parts(even: Vec<u32>, odd_positions: &[usize]) -> Self {
        let mut odd = 0u64;
        for &p in odd_positions {
            odd |= 1 << p;
        }
        Monomial { even, odd }
    }

    pub fn is_one(&self) -> bool {
        self.odd == 0 && self.even.iter().all(|&e| e == 0)
    }

    pub fn even_exponents(&self) -> &[u32] {
        &self.even
    }

    pub fn odd_mask(&self) -> u64 {
        self.odd
    }

    pub fn odd_positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..64).filter(move |p| self.odd >> p & 1 == 1)
    }

    pub fn odd_len(&self) -> u32 {
        self.odd.count_ones()
    }

    /// Part without odd generators.
    pub fn even_part(&self) -> Monomial {
        Monomial {
            even: self.even.clone(),
            odd: 0,
        }
    }

    /// Product in normal form with its sign, or `None` if an odd generator repeats.
    pub fn mul(&self, other: &Monomial) -> Option<(i64, Monomial)> {
        if self.odd & other.odd != 0 {
            return None;
        }
        let even = self.even.iter().zip(&other.even).map(|(a, b)| a + b).collect();
        let sign = odd_merge_sign(self.odd, other.odd);
        Some((
            sign,
            Monomial {
                even,
                odd: self.odd | other.odd,
            },
        ))
    }
}

/// Element of a free graded-commutative algebra: sparse map monomial -> coefficient.
#[derive(Clone, Debug)]
pub struct GcaElement {
    universe: Arc<GcaUniverse>,
    terms: BTreeMap<Monomial, Rat>,
}

impl PartialEq for GcaElement {
    fn eq(&self, other: &Self) -> bool {
        same_universe(&self.universe, &other.universe) && self.terms == other.terms
    }
}

impl Eq for GcaElement {}

fn same_universe(a: &Arc<GcaUniverse>, b: &Arc<GcaUniverse>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl GcaElement {
    pub fn zero(universe: &Arc<GcaUniverse>) -> Self {
        GcaElement {
            universe: universe.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(universe: &Arc<GcaUniverse>, c: Rat) -> Self {
        Self::from_monomial(universe, Monomial::one(universe), c)
    }

    pub fn one(universe: &Arc<GcaUniverse>) -> Self {
        Self::scalar(universe, Rat::one())
    }

    pub fn generator(universe: &Arc<GcaUniverse>, g: usize) -> Self {
        Self::from_monomial(universe, universe.generator_monomial(g), Rat::one())
    }

    pub fn from_monomial(universe: &Arc<GcaUniverse>, m: Monomial, c: Rat) -> Self {
        let mut out = Self::zero(universe);
        out.add_term(m, c);
        out
    }

    pub fn universe(&self) -> &Arc<GcaUniverse> {
        &self.universe
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    /// Degree if every term has the same degree; zero is homogeneous of every degree.
    pub fn degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|m| self.universe.monomial_degree(m));
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.degree().is_some()
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut out = Self::zero(&self.universe);
        if c.is_zero() {
            return out;
        }
        for (m, x) in &self.terms {
            out.terms.insert(m.clone(), x * c);
        }
        out
    }

    fn check(&self, other: &GcaElement) -> Result<(), GcaError> {
        if same_universe(&self.universe, &other.universe) {
            Ok(())
        } else {
            Err(GcaError::UniverseMismatch)
        }
    }

    pub fn try_add(&self, other: &GcaElement) -> Result<Self, GcaError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    /// Graded-commutative product with Koszul signs.
    pub fn multiply(&self, other: &GcaElement) -> Result<Self, GcaError> {
        self.check(other)?;
        let mut out = Self::zero(&self.universe);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((s, m)) = m1.mul(m2) {
                    out.add_term(m, c1 * c2 * int(s));
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one(&self.universe);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }
}

impl Add for &GcaElement {
    type Output = GcaElement;
    fn add(self, rhs: &GcaElement) -> GcaElement {
        self.try_add(rhs).expect("adding elements of different universes")
    }
}

impl Sub for &GcaElement {
    type Output = GcaElement;
    fn sub(self, rhs: &GcaElement) -> GcaElement {
        self + &(-rhs)
    }
}

impl Neg for &GcaElement {
    type Output = GcaElement;
    fn neg(self) -> GcaElement {
        self.scale(&-Rat::one())
    }
}

impl Mul for &GcaElement {
    type Output = GcaElement;
    fn mul(self, rhs: &GcaElement) -> GcaElement {
        self.multiply(rhs).expect("multiplying elements of different universes")
    }
}

impl fmt::Display for GcaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            crate::write_term(f, n == 0, c, &self.universe.format_monomial(m))?;
        }
        Ok(())
    }
}

/// A derivation (even) or antiderivation (odd) of fixed degree, determined by
/// its values on the generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedOperator {
    universe: Arc<GcaUniverse>,
    degree: i32,
    parity: Parity,
    images: Vec<Option<GcaElement>>,
}

impl GradedOperator {
    /// `images[g]` is the value on generator `g`; `None` leaves it undefined,
    /// and applying the operator to a monomial containing `g` is an error.
    pub fn new(
        universe: &Arc<GcaUniverse>,
        degree: i32,
        parity: Parity,
        images: Vec<Option<GcaElement>>,
    ) -> Result<Self, GcaError> {
        if images.len() != universe.len() {
            return Err(GcaError::ArityMismatch {
                expected: universe.len(),
                found: images.len(),
            });
        }
        for (g, img) in images.iter().enumerate() {
            let Some(img) = img else { continue };
            if !same_universe(universe, &img.universe) {
                return Err(GcaError::UniverseMismatch);
            }
            let expected = universe.gens[g].degree as i64 + degree as i64;
            for m in img.terms.keys() {
                let found = universe.monomial_degree(m) as i64;
                if found != expected {
                    return Err(GcaError::DegreeMismatch {
                        generator: universe.gens[g].name.clone(),
                        expected,
                        found,
                    });
                }
            }
        }
        Ok(GradedOperator {
            universe: universe.clone(),
            degree,
            parity,
            images,
        })
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn universe(&self) -> &Arc<GcaUniverse> {
        &self.universe
    }

    pub fn image(&self, g: usize) -> Option<&GcaElement> {
        self.images[g].as_ref()
    }

    fn image_or_err(&self, g: usize) -> Result<&GcaElement, GcaError> {
        self.images[g]
            .as_ref()
            .ok_or_else(|| GcaError::MissingAction(self.universe.gens[g].name.clone()))
    }

    /// Value on a single normal-form monomial, by the graded Leibniz rule.
    pub fn apply_monomial(&self, m: &Monomial) -> Result<GcaElement, GcaError> {
        let u = &self.universe;
        let mut out = GcaElement::zero(u);
        // even part: D(E O) = D(E) O + E D(O), and D(g^e) = e g^(e-1) D(g)
        let odd_part = Monomial {
            even: vec![0; u.even_count()],
            odd: m.odd,
        };
        let odd_elem = GcaElement::from_monomial(u, odd_part, Rat::one());
        for (p, &e) in m.even.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let img = self.image_or_err(u.even[p])?;
            let mut rest = m.even_part();
            rest.even[p] -= 1;
            let rest = GcaElement::from_monomial(u, rest, int(e as i64));
            out = &out + &(&(&rest * img) * &odd_elem);
        }
        // odd part, left to right: sign (-1)^(parity * #odd factors passed)
        let positions: Vec<usize> = m.odd_positions().collect();
        for (t, &p) in positions.iter().enumerate() {
            let img = self.image_or_err(u.odd[p])?;
            let prefix = Monomial {
                even: m.even.clone(),
                odd: positions[..t].iter().fold(0, |acc, &q| acc | 1 << q),
            };
            let suffix = Monomial {
                even: vec![0; u.even_count()],
                odd: positions[t + 1..].iter().fold(0, |acc, &q| acc | 1 << q),
            };
            let sign = if self.parity == Parity::Odd && t % 2 == 1 { -1 } else { 1 };
            let prefix = GcaElement::from_monomial(u, prefix, int(sign));
            let suffix = GcaElement::from_monomial(u, suffix, Rat::one());
            out = &out + &(&(&prefix * img) * &suffix);
        }
        Ok(out)
    }

    pub fn apply(&self, a: &GcaElement) -> Result<GcaElement, GcaError> {
        if !same_universe(&self.universe, &a.universe) {
            return Err(GcaError::UniverseMismatch);
        }
        let mut out = GcaElement::zero(&self.universe);
        for (m, c) in &a.terms {
            let v = self.apply_monomial(m)?;
            out = &out + &v.scale(c);
        }
        Ok(out)
    }
}

/// Vector-space operations needed to compare operator tables.
pub trait LinearElement: Clone {
    fn add_elem(&self, other: &Self) -> Self;
    fn sub_elem(&self, other: &Self) -> Self;
    fn is_zero_elem(&self) -> bool;
}

impl LinearElement for GcaElement {
    fn add_elem(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_elem(&self, other: &Self) -> Self {
        self - other
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
}

/// `D1 D2 - (-1)^(p1 p2) D2 D1` evaluated on each element of `basis`.
pub fn graded_commutator<E, Er, F1, F2>(
    d1: F1,
    p1: Parity,
    d2: F2,
    p2: Parity,
    basis: &[E],
) -> Result<Vec<E>, Er>
where
    E: LinearElement,
    F1: Fn(&E) -> Result<E, Er>,
    F2: Fn(&E) -> Result<E, Er>,
{
    basis
        .iter()
        .map(|x| {
            let a = d1(&d2(x)?)?;
            let b = d2(&d1(x)?)?;
            Ok(if p1.koszul(p2) == -1 {
                a.add_elem(&b)
            } else {
                a.sub_elem(&b)
            })
        })
        .collect()
}

/// Derivation/antiderivation built from a closure on generators.
pub fn operator_from_fn<F>(
    universe: &Arc<GcaUniverse>,
    degree: i32,
    parity: Parity,
    f: F,
) -> Result<GradedOperator, GcaError>
where
    F: Fn(usize) -> GcaElement,
{
    let images = (0..universe.len()).map(|g| Some(f(g))).collect();
    GradedOperator::new(universe, degree, parity, images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn weil_like(l: usize) -> Arc<GcaUniverse> {
        let mut gens: Vec<GeneratorSpec> = (1..=l).map(|i| GeneratorSpec::new(format!("u{i}"), 2)).collect();
        gens.extend((1..=l).map(|i| GeneratorSpec::new(format!("theta{i}"), 1)));
        GcaUniverse::new(gens).unwrap()
    }

    fn g(u: &Arc<GcaUniverse>, name: &str) -> GcaElement {
        GcaElement::generator(u, u.find(name).unwrap())
    }

    #[test]
    fn multiply_examples() {
        let u = weil_like(2);
        let (t1, t2, u1) = (g(&u, "theta1"), g(&u, "theta2"), g(&u, "u1"));
        assert!((&t1 * &t1).is_zero());
        assert_eq!(&t2 * &t1, -&(&t1 * &t2));
        let a = &u1 * &t1;
        let b = &u1 * &t2;
        let expected = &(&u1 * &u1) * &(&t1 * &t2);
        assert_eq!(&a * &b, expected);
        assert_eq!(&b * &a, -&expected);
        assert_eq!(expected.to_string(), "u1^2*theta1*theta2");
    }

    #[test]
    fn universe_mismatch_is_error() {
        let a = GcaElement::one(&weil_like(1));
        let b = GcaElement::one(&GcaUniverse::new(vec![GeneratorSpec::new("x", 0)]).unwrap());
        assert_eq!(a.multiply(&b), Err(GcaError::UniverseMismatch));
        assert!(GcaUniverse::new(vec![GeneratorSpec::new("x", 0), GeneratorSpec::new("x", 1)]).is_err());
    }

    fn abelian_weil_d(u: &Arc<GcaUniverse>, l: usize) -> GradedOperator {
        operator_from_fn(u, 1, Parity::Odd, |gi| {
            if gi >= l {
                GcaElement::generator(u, gi - l)
            } else {
                GcaElement::zero(u)
            }
        })
        .unwrap()
    }

    fn contraction(u: &Arc<GcaUniverse>, l: usize, i: usize) -> GradedOperator {
        operator_from_fn(u, -1, Parity::Odd, |gi| {
            if gi == l + i {
                GcaElement::one(u)
            } else {
                GcaElement::zero(u)
            }
        })
        .unwrap()
    }

    #[test]
    fn apply_examples() {
        let u = weil_like(2);
        let d = abelian_weil_d(&u, 2);
        let t12 = &g(&u, "theta1") * &g(&u, "theta2");
        let expected = &(&g(&u, "u1") * &g(&u, "theta2")) - &(&g(&u, "u2") * &g(&u, "theta1"));
        assert_eq!(d.apply(&t12).unwrap(), expected);

        let iota1 = contraction(&u, 2, 0);
        assert_eq!(iota1.apply(&t12).unwrap(), g(&u, "theta2"));

        let even = operator_from_fn(&u, 0, Parity::Even, |gi| GcaElement::generator(&u, gi)).unwrap();
        assert!(even.apply(&GcaElement::scalar(&u, int(5))).unwrap().is_zero());
    }

    #[test]
    fn missing_action_is_error() {
        let u = weil_like(1);
        let op = GradedOperator::new(&u, 0, Parity::Even, vec![None, Some(GcaElement::zero(&u))]).unwrap();
        assert!(matches!(op.apply(&g(&u, "u1")), Err(GcaError::MissingAction(_))));
        assert!(op.apply(&g(&u, "theta1")).unwrap().is_zero());
    }

    #[test]
    fn degree_checked_on_construction() {
        let u = weil_like(1);
        let bad = GradedOperator::new(&u, 1, Parity::Odd, vec![Some(g(&u, "u1")), Some(g(&u, "theta1"))]);
        assert!(matches!(bad, Err(GcaError::DegreeMismatch { .. })));
    }

    #[test]
    fn commutator_examples() {
        let u = weil_like(1);
        let d = abelian_weil_d(&u, 1);
        let iota = contraction(&u, 1, 0);
        let basis: Vec<GcaElement> = (0..2).map(|gi| GcaElement::generator(&u, gi)).collect();
        let ap = |op: &GradedOperator| {
            let op = op.clone();
            move |x: &GcaElement| op.apply(x)
        };
        let ii = graded_commutator(ap(&iota), Parity::Odd, ap(&iota), Parity::Odd, &basis).unwrap();
        assert!(ii.iter().all(GcaElement::is_zero));
        let di = graded_commutator(ap(&d), Parity::Odd, ap(&iota), Parity::Odd, &basis).unwrap();
        assert!(di.iter().all(GcaElement::is_zero));
    }

    fn arb_element(u: Arc<GcaUniverse>) -> impl Strategy<Value = GcaElement> {
        let ne = u.even_count();
        let no = u.odd_count();
        prop::collection::vec(
            (prop::collection::vec(0u32..3, ne), 0u64..(1 << no), -3i64..4),
            0..4,
        )
        .prop_map(move |terms| {
            let mut e = GcaElement::zero(&u);
            for (ev, odd, c) in terms {
                e.add_term(Monomial { even: ev, odd }, int(c));
            }
            e
        })
    }

    fn arb_homogeneous_terms(u: Arc<GcaUniverse>) -> impl Strategy<Value = GcaElement> {
        // a single term is always homogeneous
        let ne = u.even_count();
        let no = u.odd_count();
        (prop::collection::vec(0u32..3, ne), 0u64..(1 << no), 1i64..4).prop_map(move |(ev, odd, c)| {
            GcaElement::from_monomial(&u, Monomial { even: ev, odd }, int(c))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn multiply_is_associative(
            (a, b, c) in {
                let u = weil_like(2);
                (arb_element(u.clone()), arb_element(u.clone()), arb_element(u))
            }
        ) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn graded_commutativity(
            (a, b) in {
                let u = weil_like(2);
                (arb_homogeneous_terms(u.clone()), arb_homogeneous_terms(u))
            }
        ) {
            let da = a.degree().unwrap() as i64;
            let db = b.degree().unwrap() as i64;
            let sign = int(Parity::of_degree(da).koszul(Parity::of_degree(db)));
            prop_assert_eq!(&a * &b, (&b * &a).scale(&sign));
            prop_assert_eq!((&a * &b).degree().unwrap_or((da + db) as u32) as i64, da + db);
        }

        #[test]
        fn leibniz_holds(
            (a, b, images) in {
                let u = weil_like(2);
                (arb_homogeneous_terms(u.clone()), arb_element(u.clone()),
                 prop::collection::vec(-2i64..3, 8))
            }
        ) {
            let u = a.universe().clone();
            // odd degree +1 operator with random images on generators
            let th = |i: usize| GcaElement::generator(&u, 2 + i);
            let ug = |i: usize| GcaElement::generator(&u, i);
            let d = operator_from_fn(&u, 1, Parity::Odd, |gi| match gi {
                0 => (&ug(1) * &th(0)).scale(&int(images[0])),
                1 => (&ug(0) * &th(1)).scale(&int(images[1])),
                2 => &ug(0).scale(&int(images[2])) + &(&th(0) * &th(1)).scale(&int(images[3])),
                _ => ug(1).scale(&int(images[4])),
            }).unwrap();
            let lhs = d.apply(&(&a * &b)).unwrap();
            let sign = if a.degree().unwrap() % 2 == 1 { -1 } else { 1 };
            let rhs = &(&d.apply(&a).unwrap() * &b) + &(&a * &d.apply(&b).unwrap()).scale(&int(sign));
            prop_assert_eq!(lhs, rhs);
            // degree bookkeeping on the single-term input
            let da = d.apply(&a).unwrap();
            if !da.is_zero() {
                prop_assert_eq!(da.degree().unwrap(), a.degree().unwrap() + 1);
            }
        }
    }
}
