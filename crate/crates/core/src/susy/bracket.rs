//! Graded Lax operators `L = D^n + Σ U_i D^{n-i}`, the super Adler map, the
//! graded bracket `{F, G}(L) = -(-1)^{|F|+|G|+|L|} Str J_L(dF) dG`, the super
//! Miura map and the two-factor identities.
//!
//! Conventions (all asserted by the tests):
//! * `|U_i| = i mod 2`, so `|L| = n mod 2`; the Miura fields `Φ_i` are odd.
//! * Berezin integration is odd: `|∫_B f| = |f| + 1`, `|Str P| = |P|`.
//! * Variations are even, so `|δL| = |L|`, and the gradient
//!   `dF = Σ D^{i-n-1} ∘ x_i` has `x_i = (-1)^{n+i} E_{U_i}(f)`, which makes
//!   `δF = -(-1)^{|δL|+|F|} Str δL dF` hold identically.
//! * The free bracket of the Miura fields is
//!   `{F, G} = Σ_k ε_k ∫_B (D E_{Φ_k} f)(E_{Φ_k} g)`, `ε_k = (-1)^{n+k}`: each
//!   factor carries the order-one bracket, and consecutive factors differ by
//!   the relative sign `(-1)^{|A|} = -1` of the two-factor formula.

use super::op::SuperPsiDO;
use super::ring::{Parity, SuperDiffPoly, SuperFunctional, SuperGen};
use crate::adler::{Settings, Sign};
use crate::diffring::Family;
use crate::exec;
use crate::rational::{self, Rational};
use crate::report::{CheckResult, Verification};
use crate::{Error, Result};
use serde_json::Value;

/// Monic `D^n + Σ_{i=1}^n c_i D^{n-i}` with `|c_i| = i mod 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperLax {
    coeffs: Vec<SuperDiffPoly>,
}

impl SuperLax {
    pub fn generic(n: usize) -> Self {
        Self::generic_in(Family::U, n)
    }

    pub fn generic_in(family: Family, n: usize) -> Self {
        assert!(n >= 1, "Lax operators have order >= 1");
        SuperLax {
            coeffs: (1..=n as u32)
                .map(|i| SuperDiffPoly::gen(SuperGen::lax(family, i)))
                .collect(),
        }
    }

    pub fn from_coeffs(coeffs: Vec<SuperDiffPoly>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument(
                "Lax operators have order >= 1".into(),
            ));
        }
        for (i, c) in coeffs.iter().enumerate() {
            if c.grade().parity_or(Parity::of(i as i64 + 1)) != Some(Parity::of(i as i64 + 1)) {
                return Err(Error::Inhomogeneous(format!("coefficient {} = {c}", i + 1)));
            }
        }
        Ok(SuperLax { coeffs })
    }

    pub fn from_op(op: &SuperPsiDO) -> Result<Self> {
        let n = op.order().unwrap_or(0);
        if !op.is_differential() || n < 1 || op.coeff(n) != SuperDiffPoly::one() {
            return Err(Error::InvalidArgument(format!(
                "not a monic super operator of order >= 1: {op}"
            )));
        }
        Self::from_coeffs((1..=n).map(|i| op.coeff(n - i)).collect())
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.n() as i64)
    }

    pub fn coeffs(&self) -> &[SuperDiffPoly] {
        &self.coeffs
    }

    pub fn generators(&self) -> Result<Vec<SuperGen>> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let vars = c.vars();
                match (vars.len(), vars.iter().next()) {
                    (1, Some(v)) if v.order == 0 && *c == SuperDiffPoly::var(*v) => Ok(v.gen),
                    _ => Err(Error::NotGeneric(i + 1)),
                }
            })
            .collect()
    }

    pub fn to_op(&self) -> SuperPsiDO {
        let n = self.n() as i64;
        SuperPsiDO::new(
            std::iter::once((n, SuperDiffPoly::one())).chain(
                self.coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (n - 1 - i as i64, c.clone())),
            ),
            None,
            self.parity(),
        )
        .expect("homogeneous by construction")
    }
}

/// `X = Σ D^{i-n-1} ∘ x_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperCotangent {
    comps: Vec<SuperDiffPoly>,
}

impl SuperCotangent {
    pub fn new(comps: Vec<SuperDiffPoly>) -> Self {
        SuperCotangent { comps }
    }

    pub fn comps(&self) -> &[SuperDiffPoly] {
        &self.comps
    }

    pub fn map(&self, f: impl Fn(&SuperDiffPoly) -> SuperDiffPoly) -> SuperCotangent {
        SuperCotangent {
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn to_op(&self, floor: i64) -> Result<SuperPsiDO> {
        let n = self.comps.len() as i64;
        let mut acc: Option<SuperPsiDO> = None;
        for (i, x) in self.comps.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let k = i as i64 - n;
            let term = SuperPsiDO::d_pow(k).compose(&SuperPsiDO::coeff_op(x.clone())?, floor)?;
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        Ok(acc.unwrap_or_else(|| SuperPsiDO::zero(Parity::Even).truncate(floor)))
    }
}

fn homogeneous(f: &SuperFunctional) -> Result<Parity> {
    f.parity()
        .ok_or_else(|| Error::Inhomogeneous(format!("functional {f}")))
}

/// `d_L F` with `x_i = (-1)^{n+i} E_{U_i}(f)`.
pub fn super_gradient(f: &SuperFunctional, l: &SuperLax) -> Result<SuperCotangent> {
    homogeneous(f)?;
    let n = l.n() as i64;
    let gens = l.generators()?;
    Ok(SuperCotangent::new(
        gens.iter()
            .enumerate()
            .map(|(i, g)| f.gradient(g).sign_by(Parity::of(n + i as i64 + 1)))
            .collect(),
    ))
}

/// `sign · [(LY)₊L − L(YL)₊]`.
pub fn super_adler_apply(l: &SuperPsiDO, y: &SuperPsiDO, sign: Sign) -> Result<SuperPsiDO> {
    let ly = l.compose(y, 0)?.proj_plus();
    let yl = y.compose(l, 0)?.proj_plus();
    let out = ly.compose(l, 0)?.sub(&l.compose(&yl, 0)?)?;
    if !out.is_differential() {
        return Err(Error::NotDifferential(out.to_text()));
    }
    Ok(out.scale(&sign.rational()))
}

pub fn super_adler(l: &SuperLax, x: &SuperCotangent, settings: &Settings) -> Result<SuperPsiDO> {
    let n = l.n() as i64;
    super_adler_apply(
        &l.to_op(),
        &x.to_op(-n - settings.depth_extra as i64)?,
        settings.sign,
    )
}

/// Main form and alternate form `sign · [L(XL)₋ − (LX)₋L]` (exact down to
/// `-depth_extra`).
pub fn super_two_forms(
    l: &SuperLax,
    x: &SuperCotangent,
    settings: &Settings,
) -> Result<(SuperPsiDO, SuperPsiDO)> {
    let n = l.n() as i64;
    let d = settings.depth_extra as i64;
    let lp = l.to_op();
    let xp = x.to_op(-2 * n - d)?;
    let main = super_adler_apply(&lp, &xp, settings.sign)?;
    let lx = lp.compose(&xp, -n - d)?;
    let xl = xp.compose(&lp, -n - d)?;
    let alt = lp
        .compose(&xl.proj_minus(), -d)?
        .sub(&lx.proj_minus().compose(&lp, -d)?)?
        .scale(&settings.sign.rational());
    Ok((main, alt))
}

/// `Str J_L(d F) ∘ d G` on a generic operator.
pub fn super_pairing(
    f: &SuperFunctional,
    g: &SuperFunctional,
    l: &SuperLax,
    settings: &Settings,
) -> Result<SuperFunctional> {
    let n = l.n() as i64;
    let d = settings.depth_extra as i64;
    let xf = super_gradient(f, l)?.to_op(-n - d)?;
    let xg = super_gradient(g, l)?.to_op(-n - d)?;
    let j = super_adler_apply(&l.to_op(), &xf, settings.sign)?;
    j.compose(&xg, -1 - d)?.str_trace()
}

/// `{F, G}(L) = -(-1)^{|F|+|G|+|L|} Str J_L(dF) dG`.
pub fn super_gd_bracket(
    f: &SuperFunctional,
    g: &SuperFunctional,
    l: &SuperLax,
    settings: &Settings,
) -> Result<SuperFunctional> {
    let pf = homogeneous(f)?;
    let pg = homogeneous(g)?;
    let s = (pf + pg + l.parity()).sign();
    Ok(super_pairing(f, g, l, settings)?.scale(&-s))
}

/// Per-factor signs of the free bracket.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelativeSigns {
    /// `ε_k = (-1)^{n+k}`.
    Alternating,
    /// Negative control: `ε_k = (-1)^{n+1}` for every `k`.
    Flipped,
}

impl RelativeSigns {
    pub fn epsilon(self, n: usize, k: usize) -> Rational {
        match self {
            RelativeSigns::Alternating => rational::sign_pow((n + k) as i64),
            RelativeSigns::Flipped => rational::sign_pow(n as i64 + 1),
        }
    }
}

/// `Σ_k ε_k ∫_B (D E_{Φ_k} f)(E_{Φ_k} g)` over the odd fields `phis`.
pub fn free_bracket(
    f: &SuperFunctional,
    g: &SuperFunctional,
    phis: &[SuperGen],
    signs: RelativeSigns,
) -> SuperFunctional {
    let n = phis.len();
    let mut acc = SuperDiffPoly::zero();
    for (k, phi) in phis.iter().enumerate() {
        let ef = f.gradient(phi);
        if ef.is_zero() {
            continue;
        }
        let eg = g.gradient(phi);
        acc += (&ef.d() * &eg).scale(&signs.epsilon(n, k + 1));
    }
    SuperFunctional::new(acc)
}

/// Coefficients `U_i(Φ)` of `(D + Φ1)…(D + Φn)`.
pub fn super_miura(n: usize) -> SuperLax {
    assert!(n >= 1, "Miura factorization needs n >= 1");
    let mut acc = SuperPsiDO::one();
    for i in 1..=n as u32 {
        let factor = SuperPsiDO::d()
            .add(&SuperPsiDO::coeff_op(SuperDiffPoly::gen(SuperGen::phi(i))).expect("odd field"))
            .expect("odd operator");
        acc = acc.compose(&factor, 0).expect("differential product");
    }
    SuperLax::from_op(&acc).expect("monic product")
}

fn replace_lax(
    target: Family,
    images: &[SuperDiffPoly],
) -> impl Fn(&SuperGen) -> Option<SuperDiffPoly> + '_ {
    move |g| {
        (g.family == target && (1..=images.len()).contains(&(g.index as usize)))
            .then(|| images[g.index as usize - 1].clone())
    }
}

fn probe_x() -> SuperGen {
    SuperGen::even(Family::X, 1)
}

fn probe_y() -> SuperGen {
    SuperGen::even(Family::Y, 1)
}

/// Reads `T` off `∫_B X·T(Y)`: computes `E_X` of the density and collects the
/// coefficients of `D^k Y` written on the right.
pub fn read_probe(bracket: &SuperFunctional) -> Result<SuperPsiDO> {
    let ty = bracket.gradient(&probe_x());
    let y = probe_y();
    let top = ty
        .vars()
        .iter()
        .filter(|v| v.gen == y)
        .map(|v| v.order)
        .max();
    let mut terms = Vec::new();
    for k in 0..=top.unwrap_or(0) {
        let c = ty.right_partial(&y.var(k));
        if c.vars().iter().any(|v| v.gen == y || v.gen == probe_x()) {
            return Err(Error::NonLinear {
                power: k as i64,
                detail: c.to_text(),
            });
        }
        terms.push((k as i64, c));
    }
    SuperPsiDO::from_terms(terms, None)
}

fn probe_functionals(coeffs: &[SuperDiffPoly]) -> (Vec<SuperFunctional>, Vec<SuperFunctional>) {
    let x = SuperDiffPoly::gen(probe_x());
    let y = SuperDiffPoly::gen(probe_y());
    (
        coeffs
            .iter()
            .map(|u| SuperFunctional::new(&x * u))
            .collect(),
        coeffs
            .iter()
            .map(|u| SuperFunctional::new(&y * u))
            .collect(),
    )
}

/// Table `T_ij` with `{∫_B X U_i, ∫_B Y U_j} = ∫_B X T_ij(Y)` under the
/// graded bracket of a generic order-`n` operator.
pub fn adler_probe_table(n: usize, settings: &Settings) -> Result<Vec<Vec<SuperPsiDO>>> {
    let l = SuperLax::generic(n);
    let (fs, gs) = probe_functionals(l.coeffs());
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let vals = exec::try_map(&cells, |&(i, j)| {
        read_probe(&super_gd_bracket(&fs[i], &gs[j], &l, settings)?)
    })?;
    Ok(regroup(n, vals))
}

/// The same table for `U_i(Φ)` under the free bracket.
pub fn free_probe_table(n: usize, signs: RelativeSigns) -> Result<Vec<Vec<SuperPsiDO>>> {
    let m = super_miura(n);
    let phis: Vec<SuperGen> = (1..=n as u32).map(SuperGen::phi).collect();
    let (fs, gs) = probe_functionals(m.coeffs());
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let vals = exec::try_map(&cells, |&(i, j)| {
        read_probe(&free_bracket(&fs[i], &gs[j], &phis, signs))
    })?;
    Ok(regroup(n, vals))
}

fn regroup<T>(n: usize, vals: Vec<T>) -> Vec<Vec<T>> {
    let mut it = vals.into_iter();
    (0..n)
        .map(|_| (0..n).map(|_| it.next().expect("cell")).collect())
        .collect()
}

pub fn super_kw_verify(n: usize, settings: &Settings) -> Result<Verification> {
    super_kw_verify_with(n, settings, RelativeSigns::Alternating)
}

/// Adler probe table with `U ↦ U(Φ)` against the free-bracket probe table.
pub fn super_kw_verify_with(
    n: usize,
    settings: &Settings,
    signs: RelativeSigns,
) -> Result<Verification> {
    let m = super_miura(n);
    let lhs = adler_probe_table(n, settings)?;
    let rhs = free_probe_table(n, signs)?;
    let sub = replace_lax(Family::U, m.coeffs());
    let mut out = Verification::new();
    for i in 0..n {
        for j in 0..n {
            let pulled = lhs[i][j].map_coeffs(|c| c.substitute(&sub))?;
            let name = format!("super kw n={n} ({signs:?}) T[{}][{}]", i + 1, j + 1);
            out.push(match pulled.diff_report(&rhs[i][j]) {
                None => CheckResult::new(name, true, pulled.to_text()),
                Some(d) => CheckResult::new(name, false, d),
            });
        }
    }
    let table = |t: &[Vec<SuperPsiDO>]| {
        Value::Array(
            t.iter()
                .map(|row| Value::Array(row.iter().map(SuperPsiDO::to_json).collect()))
                .collect(),
        )
    };
    out.artifact("adler_probe_table", table(&lhs));
    out.artifact("free_probe_table", table(&rhs));
    out.artifact(
        "miura",
        Value::Array(m.coeffs().iter().map(SuperDiffPoly::to_json).collect()),
    );
    Ok(out)
}

/// Functionals of a generic order-`n` graded operator used by the
/// multiplicativity checks.
pub fn super_family(n: usize) -> Vec<(String, SuperFunctional)> {
    let u = |i: u32, k: u32| SuperDiffPoly::var(SuperGen::u(i).var(k));
    let n = n as u32;
    let mut out = vec![
        ("∫_B U1".to_string(), SuperFunctional::new(u(1, 0))),
        (
            "∫_B U1*U1^[1]".to_string(),
            SuperFunctional::new(&u(1, 0) * &u(1, 1)),
        ),
    ];
    if n >= 2 {
        out.push((format!("∫_B U{n}"), SuperFunctional::new(u(n, 0))));
        out.push((
            format!("∫_B U1*U{n}"),
            SuperFunctional::new(&u(1, 0) * &u(n, 0)),
        ));
        out.push((
            format!("∫_B U1^[1]*U{n}"),
            SuperFunctional::new(&u(1, 1) * &u(n, 0)),
        ));
    }
    out
}

struct SuperFactorization {
    a: SuperLax,
    b: SuperLax,
    product: SuperLax,
}

impl SuperFactorization {
    fn symbolic(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidArgument("factor orders must be >= 1".into()));
        }
        let a = SuperLax::generic_in(Family::A, p);
        let b = SuperLax::generic_in(Family::B, q);
        let product = SuperLax::from_op(&a.to_op().compose(&b.to_op(), 0)?)?;
        Ok(SuperFactorization { a, b, product })
    }

    fn pull_back(&self, f: &SuperFunctional) -> SuperFunctional {
        f.substitute(replace_lax(Family::U, self.product.coeffs()))
    }
}

fn window(op: &SuperPsiDO, k: usize) -> SuperPsiDO {
    op.proj_minus().truncate(-(k as i64))
}

/// Two-factor identities for `L = AB`, `A` of order `p`, `B` of order `q`:
/// the gradient relations `d_A F = (-1)^{|A|+|L|} B d_L F` and
/// `d_B F = (-1)^{|A||F|} d_L F A` on the pairing ranges, and
/// `{F,G}(AB) = -(-1)^{|F|+|G|+|L|} (S_A + (-1)^{|A|} S_B)` with
/// `S_X = Str J_X(d_X F) d_X G`. The same relation with the relative sign
/// flipped must fail somewhere in the family.
pub fn super_mult_check(p: usize, q: usize, settings: &Settings) -> Result<Verification> {
    let fac = SuperFactorization::symbolic(p, q)?;
    let n = p + q;
    let lu = SuperLax::generic(n);
    let (pa, pl) = (fac.a.parity(), fac.product.parity());
    let d = settings.depth_extra as i64;
    let fx = -(n as i64) - d;
    let (ap, bp) = (fac.a.to_op(), fac.b.to_op());
    let family = super_family(n);
    let sub = replace_lax(Family::U, fac.product.coeffs());
    let mut out = Verification::new();

    let grads = exec::try_map(&family, |(name, f)| {
        let pf = homogeneous(f)?;
        let dl = super_gradient(f, &lu)?
            .map(|c| c.substitute(&sub))
            .to_op(fx)?;
        let fp = fac.pull_back(f);
        let da = window(&super_gradient(&fp, &fac.a)?.to_op(-(p as i64))?, p);
        let db = window(&super_gradient(&fp, &fac.b)?.to_op(-(q as i64))?, q);
        let via_b = window(&bp.compose(&dl, fx + q as i64)?, p).scale(&(pa + pl).sign());
        let via_a = window(&dl.compose(&ap, fx + p as i64)?, q).scale(&(pa * pf).sign());
        let ok = da.agrees_with(&via_b) && db.agrees_with(&via_a);
        let detail = [da.diff_report(&via_b), db.diff_report(&via_a)]
            .into_iter()
            .flatten()
            .collect::<Vec<_>>()
            .join("\n");
        Ok::<_, Error>(CheckResult::new(
            format!("super gradients ({p},{q}) {name}"),
            ok,
            detail,
        ))
    })?;
    for c in grads {
        out.push(c);
    }

    let pairs = crate::families::pairs(&family);
    let rows = exec::try_map(&pairs, |((nf, f), (ng, g))| {
        let lhs = super_gd_bracket(f, g, &lu, settings)?.substitute(&sub);
        let (fp, gp) = (fac.pull_back(f), fac.pull_back(g));
        let sa = super_pairing(&fp, &gp, &fac.a, settings)?;
        let sb = super_pairing(&fp, &gp, &fac.b, settings)?;
        let pre = -(homogeneous(f)? + homogeneous(g)? + pl).sign();
        let rhs = sa.add(&sb.scale(&pa.sign())).scale(&pre);
        let flipped = sa.sub(&sb.scale(&pa.sign())).scale(&pre);
        Ok::<_, Error>((format!("{{{nf}, {ng}}}"), lhs, rhs, flipped))
    })?;
    let mut control_hit = false;
    for (name, lhs, rhs, flipped) in &rows {
        let ok = lhs.equivalent(rhs);
        out.push(CheckResult::new(
            format!("super bracket ({p},{q}) {name}"),
            ok,
            if ok {
                lhs.to_string()
            } else {
                format!("lhs {lhs}\nrhs {rhs}")
            },
        ));
        control_hit |= !lhs.equivalent(flipped);
    }
    out.push(CheckResult::new(
        format!("super bracket ({p},{q}) flipped relative sign is rejected"),
        control_hit,
        format!("|A| = {pa}"),
    ));
    Ok(out)
}

/// `δF` computed by direct substitution `U_i ↦ U_i + V_i` against
/// `-(-1)^{|δL|+|F|} Str δL dF`.
pub fn variation_check(f: &SuperFunctional, l: &SuperLax) -> Result<bool> {
    let gens = l.generators()?;
    let n = l.n();
    let vs: Vec<SuperGen> = gens
        .iter()
        .map(|g| SuperGen::new(Family::V, g.index, g.parity))
        .collect();
    let direct = f
        .rep()
        .substitute(|g| {
            gens.iter()
                .position(|h| h == g)
                .map(|i| &SuperDiffPoly::gen(*g) + &SuperDiffPoly::gen(vs[i]))
        })
        .linear_in(Family::V);
    let dl = SuperPsiDO::new(
        vs.iter()
            .enumerate()
            .map(|(i, v)| ((n - 1 - i) as i64, SuperDiffPoly::gen(*v))),
        None,
        l.parity(),
    )?;
    let x = super_gradient(f, l)?.to_op(-(n as i64))?;
    let s = (l.parity() + homogeneous(f)?).sign();
    let paired = dl.compose(&x, -1)?.str_trace()?.scale(&-s);
    Ok(SuperFunctional::new(direct).equivalent(&paired))
}
