use gdcalc::adler::{
    adler_map, adler_two_forms, extract_table, gd_bracket, gradient, rmatrix_bracket, skew_check,
};
use gdcalc::families;
use gdcalc::random::{lax, poly, rng, PolyShape};
use gdcalc::{CotangentVec, DiffPoly, Generator, LaxOp, LocalFunctional, PsiDO, Settings, Sign};
use proptest::prelude::*;

const SMALL: PolyShape = PolyShape {
    terms: 2,
    degree: 1,
    order: 1,
};

fn gens() -> Vec<Generator> {
    vec![Generator::u(1), Generator::u(2)]
}

#[test]
fn base_case_is_d() {
    let t = extract_table(&LaxOp::generic(1), &Settings::default()).unwrap();
    assert_eq!(t.entry(1, 1), &PsiDO::d());
    let flipped = extract_table(&LaxOp::generic(1), &Settings::with_sign(Sign::Plus)).unwrap();
    assert_eq!(flipped.entry(1, 1), &PsiDO::d().neg());
}

#[test]
fn table_json_round_trip() {
    let t = extract_table(&LaxOp::generic(2), &Settings::default()).unwrap();
    assert_eq!(
        gdcalc::BracketTable::from_json(&t.to_json()),
        Some(t.clone())
    );
    assert!(t.skew_defect().is_none());
    assert!(t.to_text().starts_with("J[1][1] = "));
}

#[test]
fn gradient_of_trace_functional() {
    // ∫u_1 on n=2: δ/δu_1 = 1
    let f = LocalFunctional::new(DiffPoly::gen(Generator::u(1)));
    let x = gradient(&f, &LaxOp::generic(2)).unwrap();
    assert_eq!(x.n(), 2);
    assert!(x.comps().iter().any(|c| c == &DiffPoly::one()));
}

#[test]
fn skew_on_basic_family() {
    let v = skew_check(
        &families::basic(2),
        &LaxOp::generic(2),
        &Settings::default(),
    )
    .unwrap();
    assert!(v.passed(), "{:?}", v.first_failure());
}

#[test]
fn rmatrix_is_twice_gd_on_a_pair() {
    let fam = families::gd2();
    let l = LaxOp::generic(2);
    let (f, g) = (&fam[0].1, &fam[fam.len() - 1].1);
    let gd = gd_bracket(f, g, &l, &Settings::default()).unwrap();
    let r = rmatrix_bracket(f, g, &l).unwrap();
    assert!(r.equivalent(&gd.scale(&gdcalc::rational::int(2))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn map_is_linear_and_differential(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let l = lax(&mut r, &gens(), n, SMALL);
        let x = CotangentVec::new((0..n).map(|_| poly(&mut r, &gens(), SMALL)).collect());
        let y = CotangentVec::new((0..n).map(|_| poly(&mut r, &gens(), SMALL)).collect());
        let c = gdcalc::rational::int(3);
        let combo = CotangentVec::new(x.comps().iter().zip(y.comps()).map(|(a, b)| a.scale(&c) + b.clone()).collect());
        let s = Settings::default();
        let lhs = adler_map(&l, &combo, &s).unwrap();
        let rhs = adler_map(&l, &x, &s).unwrap().scale(&c).add(&adler_map(&l, &y, &s).unwrap());
        prop_assert_eq!(&lhs, &rhs);
        prop_assert!(lhs.is_differential());
        prop_assert!(lhs.order().is_none_or(|k| k < n as i64));
    }

    #[test]
    fn two_forms_agree(seed in any::<u64>(), n in 1usize..=3, plus in any::<bool>()) {
        let mut r = rng(seed);
        let l = lax(&mut r, &gens(), n, SMALL);
        let x = CotangentVec::new((0..n).map(|_| poly(&mut r, &gens(), SMALL)).collect());
        let s = Settings::with_sign(if plus { Sign::Plus } else { Sign::Minus });
        prop_assert!(adler_two_forms(&l, &x, &s).unwrap().agree());
    }

    #[test]
    fn bracket_skew_and_table_form(seed in any::<u64>()) {
        let mut r = rng(seed);
        let l = LaxOp::generic(2);
        let gs = l.generators().unwrap();
        let shape = PolyShape { terms: 2, degree: 2, order: 1 };
        let f = LocalFunctional::new(poly(&mut r, &gs, shape));
        let g = LocalFunctional::new(poly(&mut r, &gs, shape));
        let s = Settings::default();
        let fg = gd_bracket(&f, &g, &l, &s).unwrap();
        let gf = gd_bracket(&g, &f, &l, &s).unwrap();
        prop_assert!(fg.add(&gf).is_zero());
        let table = extract_table(&l, &s).unwrap();
        prop_assert!(table.bracket(&f, &g, &gs).unwrap().equivalent(&fg));
    }

    #[test]
    fn depth_extra_changes_nothing(seed in any::<u64>(), extra in 1u32..=2) {
        let mut r = rng(seed);
        let l = lax(&mut r, &gens(), 2, SMALL);
        let x = CotangentVec::new((0..2).map(|_| poly(&mut r, &gens(), SMALL)).collect());
        let base = adler_map(&l, &x, &Settings::default()).unwrap();
        let deep = adler_map(&l, &x, &Settings { depth_extra: extra, ..Settings::default() }).unwrap();
        prop_assert_eq!(base, deep);
    }
}
