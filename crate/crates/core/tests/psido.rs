use gdcalc::random::{operator, poly, rng, PolyShape};
use gdcalc::rational::sign_pow;
use gdcalc::{DiffPoly, Error, Generator, PsiDO};
use proptest::prelude::*;

fn gens() -> Vec<Generator> {
    vec![Generator::u(1), Generator::u(2)]
}

const SMALL: PolyShape = PolyShape {
    terms: 2,
    degree: 2,
    order: 1,
};

fn u(k: u32) -> DiffPoly {
    DiffPoly::var(Generator::u(1).var(k))
}

#[test]
fn d_past_coefficient() {
    let c = PsiDO::d().compose(&PsiDO::coeff_op(u(0)), -4).unwrap();
    assert_eq!(c, PsiDO::from_terms([(1, u(0)), (0, u(1))], None));
}

#[test]
fn inverse_past_coefficient() {
    // ∂⁻¹ u = Σ (-1)^j u^(j) ∂^(-1-j)
    let c = PsiDO::d_pow(-1)
        .compose(&PsiDO::coeff_op(u(0)), -5)
        .unwrap();
    assert_eq!(c.exact_floor(), Some(-5));
    for j in 0..5 {
        assert_eq!(c.coeff(-1 - j), u(j as u32).scale(&sign_pow(j)));
    }
}

#[test]
fn residue_of_square_root_example() {
    // (∂ + u∂⁻¹)² = ∂² + 2u + u'∂⁻¹ + ...
    let a = PsiDO::from_terms([(1, DiffPoly::one()), (-1, u(0))], None);
    let sq = a.compose(&a, -1).unwrap();
    assert_eq!(sq.coeff(2), DiffPoly::one());
    assert_eq!(sq.coeff(0), u(0).scale(&gdcalc::rational::int(2)));
    assert_eq!(sq.residue().unwrap(), u(1));
}

#[test]
fn truncated_information_is_refused() {
    let a = PsiDO::d_pow(-1)
        .compose(&PsiDO::coeff_op(u(0)), -2)
        .unwrap();
    let err = a.compose(&PsiDO::d_pow(3), -3).unwrap_err();
    assert!(
        matches!(err, Error::InsufficientDepth { achievable: 1, .. }),
        "{err}"
    );
    assert_eq!(
        a.compose(&PsiDO::d_pow(3), 1).unwrap().exact_floor(),
        Some(1)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn associativity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = operator(&mut r, &gens(), 1, -1, SMALL);
        let b = operator(&mut r, &gens(), 1, -1, SMALL);
        let c = operator(&mut r, &gens(), 1, -1, SMALL);
        let lhs = a.compose(&b, -5).unwrap().compose(&c, -4).unwrap();
        let rhs = a.compose(&b.compose(&c, -5).unwrap(), -4).unwrap();
        prop_assert!(lhs.agrees_with(&rhs), "{:?}", lhs.diff_report(&rhs));
    }

    #[test]
    fn trace_is_cyclic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = operator(&mut r, &gens(), 2, -1, SMALL);
        let b = operator(&mut r, &gens(), 1, -2, SMALL);
        let ab = a.compose(&b, -1).unwrap().trace().unwrap();
        let ba = b.compose(&a, -1).unwrap().trace().unwrap();
        prop_assert!(ab.equivalent(&ba));
    }

    #[test]
    fn differential_operators_close(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = operator(&mut r, &gens(), 2, 0, SMALL);
        let b = operator(&mut r, &gens(), 2, 0, SMALL);
        let ab = a.compose(&b, 0).unwrap();
        prop_assert!(ab.is_differential());
        prop_assert!(ab.is_complete());
        let v = operator(&mut r, &gens(), -1, -2, SMALL);
        let w = operator(&mut r, &gens(), -1, -2, SMALL);
        prop_assert!(v.compose(&w, -6).unwrap().order().is_none_or(|k| k <= -2));
    }

    #[test]
    fn splitting(seed in any::<u64>()) {
        let a = operator(&mut rng(seed), &gens(), 2, -2, SMALL);
        prop_assert_eq!(a.proj_plus().add(&a.proj_minus()), a.clone());
        prop_assert!(a.proj_plus().is_differential());
        prop_assert!(a.proj_minus().order().is_none_or(|k| k < 0));
    }

    #[test]
    fn adjoint(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = operator(&mut r, &gens(), 2, 0, SMALL);
        let q = operator(&mut r, &gens(), 2, 0, SMALL);
        prop_assert_eq!(p.formal_adjoint().unwrap().formal_adjoint().unwrap(), p.clone());
        let lhs = p.compose(&q, 0).unwrap().formal_adjoint().unwrap();
        let rhs = q.formal_adjoint().unwrap().compose(&p.formal_adjoint().unwrap(), 0).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn apply_matches_composition(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = operator(&mut r, &gens(), 2, 0, SMALL);
        let q = operator(&mut r, &gens(), 2, 0, SMALL);
        let f = poly(&mut r, &gens(), SMALL);
        let pq = p.compose(&q, 0).unwrap();
        prop_assert_eq!(pq.apply(&f).unwrap(), p.apply(&q.apply(&f).unwrap()).unwrap());
    }

    #[test]
    fn depth_independence(seed in any::<u64>(), extra in 0i64..3) {
        let mut r = rng(seed);
        let a = operator(&mut r, &gens(), 1, -1, SMALL);
        let b = operator(&mut r, &gens(), 1, -1, SMALL);
        let shallow = a.compose(&b, -2).unwrap();
        let deep = a.compose(&b, -2 - extra).unwrap();
        prop_assert!(shallow.agrees_with(&deep));
        prop_assert_eq!(shallow.residue().unwrap(), deep.residue().unwrap());
        prop_assert_eq!(PsiDO::from_json(&deep.to_json()), Some(deep));
    }
}
