use equivar_core::chernweil::{connection_independence, verify_curvature_contractions, verify_weil_curvature};
use equivar_core::lie::check_ad_invariance;
use equivar_core::ratlin::{int, kernel_basis, quotient_basis, rank, rat, Echelon, SparseVec};
use equivar_core::sdga::{builtin, BUILTIN_NAMES};
use equivar_core::{
    CartanElement, Connection, EquivariantComplex, InvariantPolynomial, LieAlgebraData, Polynomial, Rat, RatMatrix,
    SDgaModel, WeilModelElement,
};
use proptest::prelude::*;

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-9i64..10, 1i64..5).prop_map(|(n, d)| rat(n, d))
}

fn arb_matrix() -> impl Strategy<Value = RatMatrix> {
    (1usize..5, 1usize..6).prop_flat_map(|(r, c)| {
        // small entries with plenty of zeros so that ranks vary
        prop::collection::vec(prop::collection::vec(prop_oneof![3 => Just(int(0)), 2 => arb_rat()], c), r)
            .prop_map(|rows| RatMatrix::from_rows(&rows))
    })
}

fn algebras() -> Vec<LieAlgebraData> {
    vec![
        LieAlgebraData::u1(),
        LieAlgebraData::abelian(2),
        LieAlgebraData::su2(),
        LieAlgebraData::from_upper_triples(2, &[(0, 1, 1, int(1))]).unwrap(),
    ]
}

fn bracket(lie: &LieAlgebraData, v: &[Rat], w: &[Rat]) -> Vec<Rat> {
    lie.bracket(v, w).unwrap()
}

fn flat(c: Rat) -> Connection {
    let m = builtin("flat_circle_over_circle").unwrap();
    let b = m.bundle().unwrap();
    let p = b.model();
    let theta = SparseVec::from_pairs([(p.find("beta").unwrap(), int(1)), (p.find("alpha").unwrap(), c)]);
    Connection::new(b, vec![theta]).unwrap()
}

fn x_pow(n: u32) -> InvariantPolynomial {
    InvariantPolynomial::new(Polynomial::var(1, 0).pow(n), &LieAlgebraData::u1()).unwrap()
}

fn models() -> Vec<SDgaModel> {
    let mut out: Vec<SDgaModel> = BUILTIN_NAMES.iter().map(|n| builtin(n).unwrap().sdga().clone()).collect();
    out.push(builtin("point").unwrap().with_lie(LieAlgebraData::su2()).unwrap().sdga().clone());
    out
}

fn casimir() -> Polynomial {
    let x = |i| Polynomial::var(3, i);
    &(&(&x(0) * &x(0)) + &(&x(1) * &x(1))) + &(&x(2) * &x(2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_nullity(m in arb_matrix()) {
        let ker = kernel_basis(&m);
        prop_assert_eq!(rank(&m) + ker.len(), m.cols());
        for v in &ker {
            prop_assert!(m.mul_vec(v).unwrap().iter().all(|x| *x == int(0)));
        }
        prop_assert_eq!(kernel_basis(&m), ker);
    }

    #[test]
    fn quotient_representatives_independent(m in arb_matrix(), picks in prop::collection::vec(any::<bool>(), 6)) {
        let cycles: Vec<Vec<Rat>> = (0..m.cols()).map(|c| m.column(c)).collect();
        let boundaries: Vec<Vec<Rat>> =
            cycles.iter().zip(&picks).filter(|(_, keep)| **keep).map(|(v, _)| v.clone()).collect();
        let q = quotient_basis(&cycles, &boundaries).unwrap();
        let all = RatMatrix::from_columns(m.rows(), &cycles);
        let bd = if boundaries.is_empty() { 0 } else { rank(&RatMatrix::from_columns(m.rows(), &boundaries)) };
        prop_assert_eq!(q.dimension, rank(&all) - bd);
        let mut span = Echelon::new(m.rows());
        for b in &boundaries {
            span.insert(b);
        }
        for r in &q.representatives {
            prop_assert!(span.insert(r));
        }
        prop_assert_eq!(quotient_basis(&cycles, &boundaries).unwrap(), q);
    }

    #[test]
    fn bracket_satisfies_jacobi(which in 0usize..4, raw in prop::collection::vec(arb_rat(), 9)) {
        let lie = &algebras()[which];
        let n = lie.dim();
        let (x, y, z) = (&raw[0..n], &raw[3..3 + n], &raw[6..6 + n]);
        let terms = [
            bracket(lie, x, &bracket(lie, y, z)),
            bracket(lie, y, &bracket(lie, z, x)),
            bracket(lie, z, &bracket(lie, x, y)),
        ];
        for ((a, b), c) in terms[0].iter().zip(&terms[1]).zip(&terms[2]) {
            prop_assert_eq!(a + b + c, int(0));
        }
        prop_assert!(bracket(lie, x, x).iter().all(|c| *c == int(0)));
    }

    #[test]
    fn invariance_closed_under_sums_and_products(a in prop::collection::vec(arb_rat(), 3), b in prop::collection::vec(arb_rat(), 3)) {
        let su2 = LieAlgebraData::su2();
        let c = casimir();
        let poly = |k: &[Rat]| {
            let mut p = Polynomial::constant(3, k[0].clone());
            p = &p + &c.scale(&k[1]);
            &p + &c.pow(2).scale(&k[2])
        };
        let (f, g) = (poly(&a), poly(&b));
        prop_assert!(check_ad_invariance(&f, &su2).unwrap());
        prop_assert!(check_ad_invariance(&(&f + &g), &su2).unwrap());
        prop_assert!(check_ad_invariance(&(&f * &g), &su2).unwrap());
        let x1 = Polynomial::var(3, 0);
        if !a[1].eq(&int(0)) || !a[2].eq(&int(0)) {
            prop_assert!(!check_ad_invariance(&(&f + &x1), &su2).unwrap());
        }
    }

    #[test]
    fn curvature_identities_on_flat_family(c in arb_rat()) {
        let conn = flat(c.clone());
        prop_assert!(verify_curvature_contractions(&conn).passed());
        prop_assert!(verify_weil_curvature(&conn).unwrap().passed());
        let f = conn.chern_weil_form(&x_pow(1)).unwrap();
        let cx = f.complex();
        prop_assert!(cx.cartan_d(f.form()).is_zero());
        let at_two = f.evaluate_at(&[int(2)]).unwrap();
        prop_assert_eq!(at_two, SparseVec::unit(f.base().model().find("1").unwrap()).scaled(&(-int(2) * c)));
    }

    #[test]
    fn independence_on_flat_family(c in arb_rat(), d in arb_rat(), n in 1u32..3) {
        let rep = connection_independence(&x_pow(n), &flat(c.clone()), &flat(d.clone())).unwrap();
        let probe = flat(int(0)).chern_weil_form(&x_pow(n)).unwrap();
        let p = rep.primitive.as_ref().expect("exact difference");
        prop_assert_eq!(probe.complex().cartan_d(p), rep.difference.clone());
        if c == d {
            prop_assert!(rep.difference.is_zero());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mathai_quillen_on_random_elements(which in 0usize..7, k in 0u32..5, coeffs in prop::collection::vec(arb_rat(), 16)) {
        let model = models().swap_remove(which);
        let cx = EquivariantComplex::new(model, 4).unwrap();
        let mut a = CartanElement::zero();
        for (b, c) in cx.invariant_basis(k).unwrap().iter().zip(&coeffs) {
            a = a.plus(&b.scaled(c));
        }
        let w = cx.mq_to_weil(&a);
        prop_assert!(cx.is_basic(&w).is_basic());
        prop_assert_eq!(cx.mq_to_cartan(&w), a.clone());
        prop_assert_eq!(cx.total_d(&w), cx.mq_to_weil(&cx.cartan_d(&a)).tensor().clone());
        prop_assert!(cx.cartan_d(&cx.cartan_d(&a)).is_zero());

        let mut x = WeilModelElement::zero();
        for (b, c) in cx.basic_basis(k).unwrap().iter().zip(&coeffs) {
            x = x.plus(&b.scaled(c));
        }
        prop_assert_eq!(cx.mq_to_weil(&cx.mq_to_cartan(&x)), x);
    }
}

#[test]
fn cartan_and_weil_dimensions_agree_on_builtins() {
    for model in models() {
        let cx = EquivariantComplex::new(model, 8).unwrap();
        let cartan = cx.cohomology_dimensions().unwrap();
        assert_eq!(cartan, cx.weil_cohomology_dimensions().unwrap());
        assert_eq!(cartan[0], 1);
        for k in 0..=8 {
            assert!(cx.mq_classes_agree(k).unwrap());
        }
    }
}

#[test]
fn abelian_invariants_are_everything() {
    for name in BUILTIN_NAMES {
        let cx = EquivariantComplex::new(builtin(name).unwrap().sdga().clone(), 4).unwrap();
        for k in 0..=4 {
            let span = cx.cartan_spanning_set(k).unwrap();
            let inv = cx.invariant_basis(k).unwrap();
            let invariant_part = span.iter().filter(|a| cx.is_invariant(a.tensor())).count();
            assert_eq!(inv.len(), invariant_part, "{name} in degree {k}");
        }
    }
}
