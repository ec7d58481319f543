//! Seeded random polynomials and operators, and the invariant battery run by
//! `gdcalc verify invariants`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adler::{adler_map, adler_two_forms, CotangentVec, LaxOp, Settings};
use crate::diffring::{is_total_derivative, DiffPoly, Generator, LocalFunctional, Monomial};
use crate::psido::PsiDO;
use crate::rational;
use crate::report::{CheckResult, Verification};
use crate::susy::bracket::{super_two_forms, SuperCotangent, SuperLax};
use crate::susy::{Parity, SVar, SuperDiffPoly, SuperGen, SuperPsiDO};
use crate::Result;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape limits for random polynomials.
#[derive(Clone, Copy, Debug)]
pub struct PolyShape {
    pub terms: usize,
    pub degree: u32,
    pub order: u32,
}

impl Default for PolyShape {
    fn default() -> Self {
        PolyShape {
            terms: 3,
            degree: 2,
            order: 2,
        }
    }
}

fn coeff(rng: &mut impl Rng) -> rational::Rational {
    let mut c = 0;
    while c == 0 {
        c = rng.gen_range(-3..=3);
    }
    rational::int(c)
}

pub fn poly(rng: &mut impl Rng, gens: &[Generator], shape: PolyShape) -> DiffPoly {
    let mut p = DiffPoly::zero();
    for _ in 0..rng.gen_range(1..=shape.terms) {
        let deg = rng.gen_range(0..=shape.degree);
        let factors: Vec<_> = (0..deg)
            .map(|_| {
                let g = *gens.choose(rng).expect("generators");
                (g.var(rng.gen_range(0..=shape.order)), 1)
            })
            .collect();
        p.add_term(Monomial::from_factors(factors), coeff(rng));
    }
    p
}

/// Complete operator with powers in `bottom..=top`.
pub fn operator(
    rng: &mut impl Rng,
    gens: &[Generator],
    top: i64,
    bottom: i64,
    shape: PolyShape,
) -> PsiDO {
    PsiDO::from_terms((bottom..=top).map(|k| (k, poly(rng, gens, shape))), None)
}

pub fn lax(rng: &mut impl Rng, gens: &[Generator], n: usize, shape: PolyShape) -> LaxOp {
    LaxOp::from_coeffs((0..n).map(|_| poly(rng, gens, shape)).collect())
}

/// Random super polynomial of the requested parity.
pub fn super_poly(
    rng: &mut impl Rng,
    gens: &[SuperGen],
    parity: Parity,
    shape: PolyShape,
) -> SuperDiffPoly {
    let mut p = SuperDiffPoly::zero();
    for _ in 0..6 * shape.terms {
        if p.len() >= shape.terms {
            break;
        }
        let deg = rng.gen_range(0..=shape.degree);
        let seq: Vec<SVar> = (0..deg)
            .map(|_| {
                gens.choose(rng)
                    .expect("generators")
                    .var(rng.gen_range(0..=shape.order))
            })
            .collect();
        let t = SuperDiffPoly::product(&seq);
        let keep = t.terms().next().is_some_and(|(m, _)| m.parity() == parity);
        if keep {
            p += t.scale(&coeff(rng));
        }
    }
    p
}

/// Homogeneous complete super operator of parity `parity`, powers in
/// `bottom..=top`.
pub fn super_operator(
    rng: &mut impl Rng,
    gens: &[SuperGen],
    parity: Parity,
    top: i64,
    bottom: i64,
    shape: PolyShape,
) -> SuperPsiDO {
    let terms: Vec<_> = (bottom..=top)
        .map(|k| (k, super_poly(rng, gens, parity + Parity::of(k), shape)))
        .collect();
    SuperPsiDO::new(terms, None, parity).expect("homogeneous by construction")
}

fn bose_gens() -> Vec<Generator> {
    vec![Generator::u(1), Generator::u(2)]
}

fn super_gens() -> Vec<SuperGen> {
    vec![SuperGen::u(1), SuperGen::u(2)]
}

struct Tally {
    name: &'static str,
    failure: Option<String>,
    trials: usize,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            failure: None,
            trials: 0,
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.trials += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    fn finish(self) -> CheckResult {
        match self.failure {
            None => CheckResult::new(self.name, true, format!("{} trials", self.trials)),
            Some(f) => CheckResult::new(self.name, false, f),
        }
    }
}

/// Randomized property checks over `trials` seeded cases. `settings.depth_extra`
/// deepens every truncation floor.
pub fn invariants(seed: u64, trials: usize, settings: &Settings) -> Result<Verification> {
    let d = settings.depth_extra as i64;
    let mut r = rng(seed);
    let gens = bose_gens();
    let shape = PolyShape::default();
    let small = PolyShape {
        terms: 2,
        degree: 1,
        order: 1,
    };

    let mut canon = Tally::new("diffring: canonical form is idempotent");
    let mut leibniz = Tally::new("diffring: total derivative is a derivation");
    let mut euler = Tally::new("diffring: variational derivative kills total derivatives");
    let mut equiv = Tally::new("diffring: functional equality is an equivalence compatible with +");
    let mut assoc = Tally::new("psido: composition is associative");
    let mut inverse = Tally::new("psido: d^-1 d = d d^-1 = 1");
    let mut trace = Tally::new("psido: Tr AB = Tr BA");
    let mut depth = Tally::new("psido: results independent of requested depth");
    let mut split = Tally::new("psido: splitting and closure of the subalgebras");
    let mut adjoint = Tally::new("psido: adjoint is involutive and anti-multiplicative");
    let mut linear = Tally::new("adler: map is linear and differential");
    let mut twoform = Tally::new("adler: two forms agree for random L, X");
    let mut sshift = Tally::new("super: D∘D is the ∂ shift");
    let mut sassoc = Tally::new("super: composition is associative");
    let mut strace = Tally::new("super: Str AB = (-1)^{|A||B|} Str BA");
    let mut koszul = Tally::new("super: Koszul sign is independent of the reordering path");
    let mut sparity = Tally::new("super: parity bookkeeping");
    let mut stwo = Tally::new("super: two forms agree");

    for t in 0..trials {
        let p = poly(&mut r, &gens, shape);
        let q = poly(&mut r, &gens, shape);
        let h = poly(&mut r, &gens, shape);

        let rebuilt = DiffPoly::from_terms(p.terms().map(|(m, c)| (c.clone(), m.clone())));
        let json = DiffPoly::from_json(&p.to_json());
        canon.record(rebuilt == p && json.as_ref() == Some(&p), || {
            format!("trial {t}: {p}")
        });

        let lhs = (&p * &q).total_derivative();
        let rhs = &(&p.total_derivative() * &q) + &(&p * &q.total_derivative());
        leibniz.record(lhs == rhs, || format!("trial {t}: p = {p}, q = {q}"));

        let dp = p.total_derivative();
        euler.record(
            gens.iter().all(|g| dp.variational_derivative(g).is_zero()) && is_total_derivative(&dp),
            || format!("trial {t}: p = {p}"),
        );

        let f = LocalFunctional::new(p.clone());
        let g = LocalFunctional::new(&p + &h.total_derivative());
        let k = LocalFunctional::new(&(&p + &h.total_derivative()) - &q.total_derivative());
        let e = LocalFunctional::new(q.clone());
        let ok = f.equivalent(&f)
            && f.equivalent(&g)
            && g.equivalent(&f)
            && g.equivalent(&k)
            && f.equivalent(&k)
            && f.add(&e).equivalent(&g.add(&e));
        equiv.record(ok, || format!("trial {t}: p = {p}"));

        let a = operator(&mut r, &gens, 1, -1, small);
        let b = operator(&mut r, &gens, 1, -1, small);
        let c = operator(&mut r, &gens, 0, -1, small);
        let fl = -3 - d;
        let ab_c = a.compose(&b, fl - 1)?.compose(&c, fl)?;
        let a_bc = a.compose(&b.compose(&c, fl - 1)?, fl)?;
        assoc.record(ab_c.agrees_with(&a_bc), || {
            format!("trial {t}: A = {a}, B = {b}, C = {c}")
        });

        let inv = PsiDO::d_pow(-1);
        let ok = inv.compose(&PsiDO::d(), fl)?.agrees_with(&PsiDO::one())
            && PsiDO::d().compose(&inv, fl)?.agrees_with(&PsiDO::one());
        inverse.record(ok, || format!("floor {fl}"));

        let tab = a.compose(&b, -1 - d)?.trace()?;
        let tba = b.compose(&a, -1 - d)?.trace()?;
        trace.record(tab.equivalent(&tba), || {
            format!("trial {t}: A = {a}, B = {b}")
        });

        let deep = a.compose(&b, fl - 1)?;
        let shallow = a.compose(&b, fl)?;
        let ok = deep.agrees_with(&shallow)
            && deep.residue()? == shallow.residue()?
            && deep.proj_plus() == shallow.proj_plus();
        depth.record(ok, || format!("trial {t}: A = {a}, B = {b}"));

        let ok = a.proj_plus().add(&a.proj_minus()) == a
            && a.proj_plus().proj_plus() == a.proj_plus()
            && a.proj_minus().proj_minus() == a.proj_minus()
            && a.proj_plus().compose(&b.proj_plus(), 0)?.is_differential()
            && a.proj_minus()
                .compose(&b.proj_minus(), fl)?
                .order()
                .is_none_or(|k| k < 0);
        split.record(ok, || format!("trial {t}: A = {a}"));

        let p1 = operator(&mut r, &gens, 2, 0, shape);
        let p2 = operator(&mut r, &gens, 1, 0, shape);
        let ok = p1.formal_adjoint()?.formal_adjoint()? == p1
            && p1.compose(&p2, 0)?.formal_adjoint()?
                == p2.formal_adjoint()?.compose(&p1.formal_adjoint()?, 0)?;
        adjoint.record(ok, || format!("trial {t}: P = {p1}, Q = {p2}"));

        let n = 1 + t % 3;
        let l = lax(&mut r, &gens, n, small);
        let x = CotangentVec::new((0..n).map(|_| poly(&mut r, &gens, small)).collect());
        let y = CotangentVec::new((0..n).map(|_| poly(&mut r, &gens, small)).collect());
        let xy = CotangentVec::new(
            x.comps()
                .iter()
                .zip(y.comps())
                .map(|(a, b)| a + b)
                .collect(),
        );
        let jx = adler_map(&l, &x, settings)?;
        let jy = adler_map(&l, &y, settings)?;
        let jxy = adler_map(&l, &xy, settings)?;
        linear.record(jxy == jx.add(&jy) && jxy.is_differential(), || {
            format!("trial {t}: n = {n}")
        });
        twoform.record(adler_two_forms(&l, &x, settings)?.agree(), || {
            format!("trial {t}: n = {n}")
        });

        let sg = super_gens();
        let pa = Parity::of(r.gen_range(0..2));
        let pb = Parity::of(r.gen_range(0..2));
        let pc = Parity::of(r.gen_range(0..2));
        let sa = super_operator(&mut r, &sg, pa, 1, -1, small);
        let sb = super_operator(&mut r, &sg, pb, 1, -1, small);
        let sc = super_operator(&mut r, &sg, pc, 0, -1, small);

        let dd = SuperPsiDO::d().compose(&SuperPsiDO::d().compose(&sa, fl - 1)?, fl)?;
        let d2 = SuperPsiDO::d_pow(2).compose(&sa, fl)?;
        sshift.record(
            dd.agrees_with(&d2) && d2.agrees_with(&shift_oracle(&sa, fl)),
            || format!("trial {t}: A = {sa}"),
        );

        let l3 = sa.compose(&sb, fl - 1)?.compose(&sc, fl)?;
        let r3 = sa.compose(&sb.compose(&sc, fl - 1)?, fl)?;
        sassoc.record(l3.agrees_with(&r3), || {
            format!("trial {t}: A = {sa}, B = {sb}, C = {sc}")
        });

        let sab = sa.compose(&sb, -1 - d)?.str_trace()?;
        let sba = sb.compose(&sa, -1 - d)?.str_trace()?;
        strace.record(sab.equivalent(&sba.scale(&(pa * pb).sign())), || {
            format!("trial {t}: A = {sa}, B = {sb}")
        });

        let mut seq: Vec<SVar> = (0..4)
            .map(|_| sg.choose(&mut r).expect("gens").var(r.gen_range(0..3)))
            .collect();
        let first = SuperDiffPoly::product(&seq);
        seq.shuffle(&mut r);
        let shuffled = SuperDiffPoly::product(&seq);
        let stepwise = seq.iter().fold(SuperDiffPoly::one(), |acc, v| {
            &acc * &SuperDiffPoly::var(*v)
        });
        // the permuted product equals ±first; its sign must match the stepwise one
        koszul.record(
            shuffled == stepwise && (shuffled == first || shuffled == -&first),
            || format!("trial {t}: {seq:?}"),
        );

        let prod = sa.compose(&sb, fl)?;
        sparity.record(
            prod.parity() == pa + pb && sab.parity().is_none_or(|p| sab.is_zero() || p == pa + pb),
            || format!("trial {t}"),
        );

        let sn = 1 + t % 2;
        let sl = SuperLax::from_coeffs(
            (1..=sn)
                .map(|i| super_poly(&mut r, &sg, Parity::of(i as i64), small))
                .collect(),
        )?;
        let px = Parity::of(r.gen_range(0..2));
        let sx = SuperCotangent::new(
            (1..=sn)
                .map(|i| super_poly(&mut r, &sg, px + Parity::of(i as i64), small))
                .collect(),
        );
        let (main, alt) = super_two_forms(&sl, &sx, settings)?;
        stwo.record(main.agrees_with(&alt), || {
            format!("trial {t}: L order {sn}")
        });
    }

    let mut out = Verification::new();
    for tally in [
        canon, leibniz, euler, equiv, assoc, inverse, trace, depth, split, adjoint, linear,
        twoform, sshift, sassoc, strace, koszul, sparity, stwo,
    ] {
        out.push(tally.finish());
    }
    Ok(out)
}

/// `D^2 ∘ A` from the ordinary Leibniz rule `∂ ∘ f = f' + f ∂`.
fn shift_oracle(a: &SuperPsiDO, floor: i64) -> SuperPsiDO {
    let mut terms = Vec::new();
    for (k, c) in a.terms() {
        terms.push((k, c.total_derivative()));
        terms.push((k + 2, c.clone()));
    }
    SuperPsiDO::new(terms, Some(floor), a.parity()).expect("homogeneous")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_passes() {
        let v = invariants(7, 6, &Settings::default()).unwrap();
        assert!(v.passed(), "{:?}", v.first_failure());
    }

    #[test]
    fn seeded_is_deterministic() {
        let a = poly(&mut rng(3), &bose_gens(), PolyShape::default());
        let b = poly(&mut rng(3), &bose_gens(), PolyShape::default());
        assert_eq!(a, b);
    }
}
