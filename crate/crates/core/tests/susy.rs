use gdcalc::random::{rng, super_operator, super_poly, PolyShape};
use gdcalc::rational::int;
use gdcalc::susy::bracket::{super_family, super_kw_verify_with, super_two_forms, variation_check};
use gdcalc::susy::{
    is_exact, super_kw_verify, super_miura, super_mult_check, Parity, RelativeSigns, SVar,
    SuperCotangent, SuperDiffPoly, SuperFunctional, SuperGen, SuperLax, SuperPsiDO,
};
use gdcalc::Settings;
use proptest::prelude::*;

const SMALL: PolyShape = PolyShape {
    terms: 2,
    degree: 2,
    order: 1,
};

fn gens() -> Vec<SuperGen> {
    vec![SuperGen::u(1), SuperGen::u(2)]
}

fn parity(bit: bool) -> Parity {
    Parity::of(bit as i64)
}

fn phi(i: u32, k: u32) -> SuperDiffPoly {
    SuperDiffPoly::var(SuperGen::phi(i).var(k))
}

#[test]
fn odd_variables_anticommute() {
    let a = SuperGen::phi(1).var(0);
    let b = SuperGen::phi(2).var(0);
    assert_eq!(
        SuperDiffPoly::product(&[a, b]),
        -SuperDiffPoly::product(&[b, a])
    );
    assert!(SuperDiffPoly::product(&[a, a]).is_zero());
    let even: SVar = SuperGen::phi(1).var(1);
    assert_eq!(even.parity(), Parity::Even);
    assert_eq!(
        SuperDiffPoly::product(&[a, even]),
        SuperDiffPoly::product(&[even, a])
    );
}

#[test]
fn miura_two_factors() {
    let l = super_miura(2);
    assert_eq!(l.coeffs()[0], &phi(1, 0) - &phi(2, 0));
    assert_eq!(l.coeffs()[1], &phi(2, 1) + &(&phi(1, 0) * &phi(2, 0)));
}

#[test]
fn berezin_exactness_examples() {
    // Φ DΦ is not D-exact; D(Φ1 Φ2) is
    assert!(!is_exact(&(&phi(1, 0) * &phi(1, 1))));
    assert!(is_exact(&(&phi(1, 0) * &phi(2, 0)).d()));
}

#[test]
fn kw_and_negative_control() {
    for n in 1..=2 {
        let v = super_kw_verify(n, &Settings::default()).unwrap();
        assert!(v.passed(), "n = {n}: {:?}", v.first_failure());
    }
    let flipped = super_kw_verify_with(2, &Settings::default(), RelativeSigns::Flipped).unwrap();
    assert!(!flipped.passed());
}

#[test]
fn multiplicativity_small() {
    let v = super_mult_check(1, 1, &Settings::default()).unwrap();
    assert!(v.passed(), "{:?}", v.first_failure());
}

#[test]
fn variation_oracle() {
    let l = SuperLax::generic(2);
    for (name, f) in super_family(2) {
        assert!(variation_check(&f, &l).unwrap(), "{name}");
    }
}

#[test]
fn functional_parity_is_shifted() {
    let f = SuperFunctional::new(SuperDiffPoly::gen(SuperGen::u(2)));
    assert_eq!(f.parity(), Some(Parity::Odd));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn d_squares_to_derivative(seed in any::<u64>(), odd in any::<bool>()) {
        let p = super_poly(&mut rng(seed), &gens(), parity(odd), SMALL);
        prop_assert_eq!(p.d().d(), p.total_derivative());
    }

    #[test]
    fn graded_leibniz(seed in any::<u64>(), oa in any::<bool>(), ob in any::<bool>()) {
        let mut r = rng(seed);
        let a = super_poly(&mut r, &gens(), parity(oa), SMALL);
        let b = super_poly(&mut r, &gens(), parity(ob), SMALL);
        let rhs = &(&a.d() * &b) + &(&a * &b.d()).sign_by(parity(oa));
        prop_assert_eq!((&a * &b).d(), rhs);
    }

    #[test]
    fn graded_commutativity(seed in any::<u64>(), oa in any::<bool>(), ob in any::<bool>()) {
        let mut r = rng(seed);
        let a = super_poly(&mut r, &gens(), parity(oa), SMALL);
        let b = super_poly(&mut r, &gens(), parity(ob), SMALL);
        prop_assert_eq!(&a * &b, (&b * &a).sign_by(parity(oa && ob)));
    }

    #[test]
    fn euler_kills_exact(seed in any::<u64>(), odd in any::<bool>()) {
        let h = super_poly(&mut rng(seed), &gens(), parity(odd), SMALL);
        let p = h.d();
        for g in gens() {
            prop_assert!(p.euler(&g).is_zero());
        }
        prop_assert!(is_exact(&p));
    }

    #[test]
    fn composition_associative(seed in any::<u64>(), bits in 0u8..8) {
        let mut r = rng(seed);
        let ps: Vec<_> = (0..3).map(|k| parity(bits >> k & 1 == 1)).collect();
        let a = super_operator(&mut r, &gens(), ps[0], 1, -1, SMALL);
        let b = super_operator(&mut r, &gens(), ps[1], 1, -1, SMALL);
        let c = super_operator(&mut r, &gens(), ps[2], 1, -1, SMALL);
        let lhs = a.compose(&b, -5).unwrap().compose(&c, -4).unwrap();
        let rhs = a.compose(&b.compose(&c, -5).unwrap(), -4).unwrap();
        prop_assert!(lhs.agrees_with(&rhs), "{:?}", lhs.diff_report(&rhs));
        prop_assert_eq!(lhs.parity(), ps[0] + ps[1] + ps[2]);
    }

    #[test]
    fn supertrace_graded_cyclic(seed in any::<u64>(), oa in any::<bool>(), ob in any::<bool>()) {
        let mut r = rng(seed);
        let a = super_operator(&mut r, &gens(), parity(oa), 2, -1, SMALL);
        let b = super_operator(&mut r, &gens(), parity(ob), 1, -2, SMALL);
        let ab = a.compose(&b, -1).unwrap().str_trace().unwrap();
        let ba = b.compose(&a, -1).unwrap().str_trace().unwrap();
        prop_assert!(ab.equivalent(&ba.scale(&parity(oa && ob).sign())));
    }

    #[test]
    fn inverse_of_d(seed in any::<u64>(), odd in any::<bool>()) {
        let a = super_operator(&mut rng(seed), &gens(), parity(odd), 1, -1, SMALL);
        let back = SuperPsiDO::d_pow(-1).compose(&SuperPsiDO::d().compose(&a, -5).unwrap(), -4).unwrap();
        prop_assert!(back.agrees_with(&a));
    }

    #[test]
    fn two_forms_agree(seed in any::<u64>(), n in 1usize..=2, ox in any::<bool>()) {
        let mut r = rng(seed);
        let shape = PolyShape { terms: 2, degree: 1, order: 1 };
        let l = SuperLax::from_coeffs(
            (1..=n).map(|i| super_poly(&mut r, &gens(), Parity::of(i as i64), shape)).collect(),
        ).unwrap();
        let x = SuperCotangent::new(
            (1..=n).map(|i| super_poly(&mut r, &gens(), parity(ox) + Parity::of(i as i64), shape)).collect(),
        );
        let (main, alt) = super_two_forms(&l, &x, &Settings::default()).unwrap();
        prop_assert!(main.agrees_with(&alt));
    }

    #[test]
    fn scaling_is_linear(seed in any::<u64>(), odd in any::<bool>(), c in -4i64..=4) {
        let a = super_operator(&mut rng(seed), &gens(), parity(odd), 1, -1, SMALL);
        let twice = a.add(&a.scale(&int(c))).unwrap();
        prop_assert_eq!(twice, a.scale(&int(c + 1)));
    }
}
