use gdcalc::miura::{
    factor_product, factor_verify, free_table, induced_table, iterated_table, kw_verify,
    miura_expand,
};
use gdcalc::random::{poly, rng, PolyShape};
use gdcalc::{DiffPoly, Generator, PsiDO, Settings, Sign};
use proptest::prelude::*;

fn phi(i: u32) -> DiffPoly {
    DiffPoly::gen(Generator::phi(i))
}

#[test]
fn two_factor_image() {
    // (∂ + φ1)(∂ + φ2) = ∂² + (φ1 + φ2)∂ + φ1φ2 + φ2'
    let img = miura_expand(2);
    let l = img.lax().to_psido();
    assert_eq!(l.coeff(2), DiffPoly::one());
    assert_eq!(l.coeff(1), &phi(1) + &phi(2));
    assert_eq!(
        l.coeff(0),
        &(&phi(1) * &phi(2)) + &DiffPoly::var(Generator::phi(2).var(1))
    );
    assert_eq!(factor_product(&[Generator::phi(1), Generator::phi(2)]), l);
}

#[test]
fn free_table_is_diagonal() {
    let t = free_table(3);
    for i in 1..=3 {
        for j in 1..=3 {
            let want = if i == j { PsiDO::d() } else { PsiDO::zero() };
            assert_eq!(t.entry(i, j), &want);
        }
    }
}

#[test]
fn kw_small_orders() {
    for n in 1..=2 {
        let v = kw_verify(n, &Settings::default()).unwrap();
        assert!(v.passed(), "n = {n}: {:?}", v.first_failure());
    }
}

#[test]
fn kw_rejects_flipped_sign() {
    assert!(!kw_verify(1, &Settings::with_sign(Sign::Plus))
        .unwrap()
        .passed());
}

#[test]
fn iterated_equals_direct() {
    assert_eq!(
        iterated_table(2, &Settings::default()).unwrap(),
        induced_table(2).unwrap()
    );
}

#[test]
fn factorization_small() {
    let v = factor_verify(1, 1, &Settings::default()).unwrap();
    assert!(v.passed(), "{:?}", v.first_failure());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pull_back_is_a_differential_homomorphism(seed in any::<u64>(), n in 1usize..=3) {
        let img = miura_expand(n);
        let gs: Vec<_> = (1..=n as u32).map(Generator::u).collect();
        let mut r = rng(seed);
        let shape = PolyShape { terms: 2, degree: 2, order: 1 };
        let p = poly(&mut r, &gs, shape);
        let q = poly(&mut r, &gs, shape);
        prop_assert_eq!(img.pull_back(&(&p * &q)), &img.pull_back(&p) * &img.pull_back(&q));
        prop_assert_eq!(img.pull_back(&(&p + &q)), &img.pull_back(&p) + &img.pull_back(&q));
        prop_assert_eq!(img.pull_back(&p.total_derivative()), img.pull_back(&p).total_derivative());
    }
}
