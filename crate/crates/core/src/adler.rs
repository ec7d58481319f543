//! The Adler map `J_L(X) = (LX)₊L − L(XL)₊`, the Gel'fand–Dickey operator table
//! `J_ij`, brackets of local functionals (trace form, table form and the
//! R-matrix form with `R = P₊ − P₋`), and the multiplicativity identity
//! `J_AB(X) = A·J_B(XA) + J_A(BX)·B`.
//!
//! Orientation: the sign flag multiplies the Adler map. The default
//! [`Sign::Minus`] evaluates `L(XL)₊ − (LX)₊L`, for which the order-one table
//! is `J = +∂`.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::diffring::{DiffPoly, Family, Generator, LocalFunctional, Monomial};
use crate::exec;
use crate::families::NamedFunctional;
use crate::psido::PsiDO;
use crate::rational::{self, Rational};
use crate::report::{CheckResult, Verification};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Sign {
    Plus,
    #[default]
    Minus,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn rational(self) -> Rational {
        rational::int(self.as_i64())
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Sign> {
        match s.trim() {
            "+1" | "1" | "+" => Ok(Sign::Plus),
            "-1" | "-" => Ok(Sign::Minus),
            other => Err(Error::InvalidArgument(format!(
                "sign must be +1 or -1, got {other:?}"
            ))),
        }
    }
}

/// Orientation and extra Volterra depth used by every computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Settings {
    pub sign: Sign,
    /// Extra powers of `∂^{-1}` carried beyond the minimum needed.
    pub depth_extra: u32,
}

impl Settings {
    pub fn with_sign(sign: Sign) -> Self {
        Settings {
            sign,
            depth_extra: 0,
        }
    }

    fn extra(&self) -> i64 {
        self.depth_extra as i64
    }
}

/// A monic Lax operator `∂^n + Σ_{i=1}^n c_i ∂^{n-i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaxOp {
    coeffs: Vec<DiffPoly>,
}

impl LaxOp {
    /// `∂^n + Σ u_i ∂^{n-i}` with symbolic `u_i`.
    pub fn generic(n: usize) -> Self {
        Self::generic_in(Family::U, n)
    }

    pub fn generic_in(family: Family, n: usize) -> Self {
        assert!(n >= 1, "Lax operators have order >= 1");
        LaxOp {
            coeffs: (1..=n as u32)
                .map(|i| DiffPoly::gen(Generator::new(family, i)))
                .collect(),
        }
    }

    pub fn from_coeffs(coeffs: Vec<DiffPoly>) -> Self {
        assert!(!coeffs.is_empty(), "Lax operators have order >= 1");
        LaxOp { coeffs }
    }

    /// Reads a monic differential operator of order `n >= 1` as a Lax operator.
    pub fn from_psido(op: &PsiDO) -> Result<Self> {
        if !op.is_differential() {
            return Err(Error::NotDifferential(op.to_text()));
        }
        let n = op.order().unwrap_or(0);
        if n < 1 || op.coeff(n) != DiffPoly::one() {
            return Err(Error::InvalidArgument(format!(
                "not a monic operator of order >= 1: {op}"
            )));
        }
        Ok(LaxOp {
            coeffs: (1..=n).map(|i| op.coeff(n - i)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[DiffPoly] {
        &self.coeffs
    }

    /// The coefficient generators, when every coefficient is a bare generator.
    pub fn generators(&self) -> Result<Vec<Generator>> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut vars = c.vars().into_iter();
                match (vars.next(), vars.next()) {
                    (Some(v), None) if v.order == 0 && *c == DiffPoly::var(v) => Ok(v.gen),
                    _ => Err(Error::NotGeneric(i + 1)),
                }
            })
            .collect()
    }

    pub fn to_psido(&self) -> PsiDO {
        let n = self.n() as i64;
        PsiDO::from_terms(
            std::iter::once((n, DiffPoly::one())).chain(
                self.coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (n - 1 - i as i64, c.clone())),
            ),
            None,
        )
    }
}

/// `X = Σ_{i=1}^n ∂^{i-n-1} ∘ x_i`, with `∂`-powers to the left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CotangentVec {
    comps: Vec<DiffPoly>,
}

impl CotangentVec {
    pub fn new(comps: Vec<DiffPoly>) -> Self {
        CotangentVec { comps }
    }

    /// Components are the generators `x_1..x_n`.
    pub fn symbolic(n: usize) -> Self {
        CotangentVec {
            comps: (1..=n as u32)
                .map(|i| DiffPoly::gen(Generator::x(i)))
                .collect(),
        }
    }

    pub fn zero(n: usize) -> Self {
        CotangentVec {
            comps: vec![DiffPoly::zero(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[DiffPoly] {
        &self.comps
    }

    pub fn map(&self, f: impl Fn(&DiffPoly) -> DiffPoly) -> CotangentVec {
        CotangentVec {
            comps: self.comps.iter().map(f).collect(),
        }
    }

    /// Normal-ordered expansion, exact for powers `>= floor`.
    pub fn to_psido(&self, floor: i64) -> PsiDO {
        let n = self.n() as i64;
        let mut acc = PsiDO::from_terms([], Some(floor));
        for (i, x) in self.comps.iter().enumerate() {
            let k = i as i64 + 1 - n - 1;
            let term = PsiDO::d_pow(k)
                .compose(&PsiDO::coeff_op(x.clone()), floor)
                .expect("complete inputs");
            acc = acc.add(&term);
        }
        acc
    }
}

/// `sign · [(LY)₊L − L(YL)₊]` for a complete differential `L` and any `Y`
/// known down to `-order(L)`.
pub fn adler_apply(l: &PsiDO, y: &PsiDO, sign: Sign) -> Result<PsiDO> {
    let ly = l.compose(y, 0)?.proj_plus();
    let yl = y.compose(l, 0)?.proj_plus();
    let out = ly.compose(l, 0)?.sub(&l.compose(&yl, 0)?);
    debug_assert!(out.is_complete());
    if !out.is_differential() {
        return Err(Error::NotDifferential(out.to_text()));
    }
    Ok(out.scale(&sign.rational()))
}

/// The Adler map on a cotangent vector.
pub fn adler_map(l: &LaxOp, x: &CotangentVec, settings: &Settings) -> Result<PsiDO> {
    let n = l.n() as i64;
    let xp = x.to_psido(-n - settings.extra());
    adler_apply(&l.to_psido(), &xp, settings.sign)
}

/// Both printed forms of the Adler map, evaluated independently.
#[derive(Clone, Debug)]
pub struct TwoForms {
    /// `sign · [(LX)₊L − L(XL)₊]`, complete.
    pub main: PsiDO,
    /// `sign · [L(XL)₋ − (LX)₋L]`, exact down to `-depth_extra`.
    pub alternate: PsiDO,
}

impl TwoForms {
    pub fn agree(&self) -> bool {
        self.main.agrees_with(&self.alternate)
    }
}

pub fn adler_two_forms(l: &LaxOp, x: &CotangentVec, settings: &Settings) -> Result<TwoForms> {
    let n = l.n() as i64;
    let d = settings.extra();
    let lp = l.to_psido();
    let xp = x.to_psido(-2 * n - d);
    let main = adler_apply(&lp, &xp, settings.sign)?;
    let lx = lp.compose(&xp, -n - d)?;
    let xl = xp.compose(&lp, -n - d)?;
    let alt = lp
        .compose(&xl.proj_minus(), -d)?
        .sub(&lx.proj_minus().compose(&lp, -d)?)
        .scale(&settings.sign.rational());
    Ok(TwoForms {
        main,
        alternate: alt,
    })
}

/// The `n × n` table of differential operators `J_ij` with
/// `J_L(X) = Σ_{i,j} (J_ij · x_j) ∂^{n-i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketTable {
    pub n: usize,
    /// Orientation of the Adler map the table came from; `None` for tables
    /// built another way (e.g. pushed forward through a Miura map).
    pub sign: Option<Sign>,
    entries: Vec<Vec<PsiDO>>,
}

impl BracketTable {
    pub fn new(sign: Option<Sign>, entries: Vec<Vec<PsiDO>>) -> Self {
        let n = entries.len();
        assert!(entries.iter().all(|r| r.len() == n), "table must be square");
        BracketTable { n, sign, entries }
    }

    /// 1-based entry access.
    pub fn entry(&self, i: usize, j: usize) -> &PsiDO {
        &self.entries[i - 1][j - 1]
    }

    pub fn entries(&self) -> &[Vec<PsiDO>] {
        &self.entries
    }

    pub fn map_coeffs(&self, f: impl Fn(&DiffPoly) -> DiffPoly + Sync + Send) -> BracketTable {
        let cells: Vec<(usize, usize)> = (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .collect();
        let mapped = exec::map(&cells, |&(i, j)| self.entries[i][j].map_coeffs(&f));
        let mut it = mapped.into_iter();
        let entries = (0..self.n)
            .map(|_| (0..self.n).map(|_| it.next().expect("cell")).collect())
            .collect();
        BracketTable {
            n: self.n,
            sign: self.sign,
            entries,
        }
    }

    /// First entry violating `(J_ji)† = −J_ij`.
    pub fn skew_defect(&self) -> Option<(usize, usize, String)> {
        for i in 1..=self.n {
            for j in 1..=self.n {
                let adj = self
                    .entry(j, i)
                    .formal_adjoint()
                    .expect("differential entry");
                let neg = self.entry(i, j).neg();
                if let Some(d) = adj.diff_report(&neg) {
                    return Some((i, j, d));
                }
            }
        }
        None
    }

    /// First entry where the tables differ, with a term-level diff.
    pub fn diff(&self, other: &BracketTable) -> Option<String> {
        if self.n != other.n {
            return Some(format!("size mismatch: {} vs {}", self.n, other.n));
        }
        for i in 1..=self.n {
            for j in 1..=self.n {
                if let Some(d) = self.entry(i, j).diff_report(other.entry(i, j)) {
                    return Some(format!("entry J[{i}][{j}]:\n{d}"));
                }
            }
        }
        None
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "sign": self.sign.map(Sign::as_i64),
            "entries": self.entries.iter().map(|row| {
                row.iter().map(PsiDO::to_json).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &Value) -> Option<BracketTable> {
        let sign = match value.get("sign")? {
            Value::Null => None,
            v => Some(match v.as_i64()? {
                1 => Sign::Plus,
                -1 => Sign::Minus,
                _ => return None,
            }),
        };
        let mut entries = Vec::new();
        for row in value.get("entries")?.as_array()? {
            let mut r = Vec::new();
            for e in row.as_array()? {
                r.push(PsiDO::from_json(e)?);
            }
            entries.push(r);
        }
        let n = value.get("n")?.as_u64()? as usize;
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(BracketTable { n, sign, entries })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 1..=self.n {
            for j in 1..=self.n {
                out.push_str(&format!("J[{i}][{j}] = {}\n", self.entry(i, j)));
            }
        }
        out
    }

    /// Table-form bracket `Σ_{i,j} ∫ (δF/δg_i) · J_ij(δG/δg_j)`.
    pub fn bracket(
        &self,
        f: &LocalFunctional,
        g: &LocalFunctional,
        gens: &[Generator],
    ) -> Result<LocalFunctional> {
        let df: Vec<DiffPoly> = gens.iter().map(|v| f.gradient(v)).collect();
        let dg: Vec<DiffPoly> = gens.iter().map(|v| g.gradient(v)).collect();
        let mut acc = DiffPoly::zero();
        for (fi, row) in df.iter().zip(&self.entries) {
            if fi.is_zero() {
                continue;
            }
            for (gj, op) in dg.iter().zip(row) {
                if gj.is_zero() {
                    continue;
                }
                acc += fi * &op.apply(gj)?;
            }
        }
        Ok(LocalFunctional::new(acc))
    }
}

impl fmt::Display for BracketTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn is_x(g: &Generator) -> bool {
    g.family == Family::X
}

/// Reads `J_ij` off the Adler map evaluated on symbolic `x_1..x_n`.
pub fn extract_table(l: &LaxOp, settings: &Settings) -> Result<BracketTable> {
    let n = l.n();
    let j = adler_map(l, &CotangentVec::symbolic(n), settings)?;
    let mut entries = vec![vec![Vec::<(i64, DiffPoly)>::new(); n]; n];
    for (power, coeff) in j.terms() {
        if power < 0 || power >= n as i64 {
            return Err(Error::UnexpectedPower(power));
        }
        let i = n - power as usize; // ∂^{n-i}
        for (m, c) in coeff.terms() {
            let xs: Vec<_> = m.factors().iter().filter(|(v, _)| is_x(&v.gen)).collect();
            let (xv, rest) = match xs.as_slice() {
                [(v, 1)] => (
                    *v,
                    Monomial::from_factors(
                        m.factors().iter().copied().filter(|(w, _)| !is_x(&w.gen)),
                    ),
                ),
                _ => {
                    return Err(Error::NonLinear {
                        power,
                        detail: format!("{}*{m}", rational::to_text(c)),
                    })
                }
            };
            let jdx = xv.gen.index as usize;
            if jdx == 0 || jdx > n {
                return Err(Error::NonLinear {
                    power,
                    detail: format!("unexpected generator {}", xv.gen),
                });
            }
            entries[i - 1][jdx - 1].push((xv.order as i64, DiffPoly::term(c.clone(), rest)));
        }
    }
    let entries = entries
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|t| PsiDO::from_terms(t, None))
                .collect()
        })
        .collect();
    Ok(BracketTable::new(Some(settings.sign), entries))
}

/// `dF = Σ ∂^{i-n-1} ∘ δF/δu_i` for a generic Lax operator.
pub fn gradient(f: &LocalFunctional, l: &LaxOp) -> Result<CotangentVec> {
    let gens = l.generators()?;
    Ok(CotangentVec::new(
        gens.iter().map(|g| f.gradient(g)).collect(),
    ))
}

/// Second Gel'fand–Dickey bracket in trace form.
///
/// With the cotangent ordering `∂^{i-n-1}∘x_i`, `Tr J_L(dF)∘dG` equals the
/// table-form bracket `{G, F}`; the value returned is its negative, so that
/// `gd_bracket(F, G) = Σ ∫ δF/δu_i · J_ij(δG/δu_j)` for the same `sign`.
pub fn gd_bracket(
    f: &LocalFunctional,
    g: &LocalFunctional,
    l: &LaxOp,
    settings: &Settings,
) -> Result<LocalFunctional> {
    let n = l.n() as i64;
    let d = settings.extra();
    let xf = gradient(f, l)?.to_psido(-n - d);
    let xg = gradient(g, l)?.to_psido(-n - d);
    let j = adler_apply(&l.to_psido(), &xf, settings.sign)?;
    let tr = j.compose(&xg, -1 - d)?.trace()?;
    Ok(tr.neg())
}

fn r_matrix(y: &PsiDO) -> PsiDO {
    y.proj_plus().sub(&y.proj_minus())
}

/// `Tr dF·L·R(dG·L) − Tr L·dF·R(L·dG)` with `R = P₊ − P₋`.
pub fn rmatrix_bracket(
    f: &LocalFunctional,
    g: &LocalFunctional,
    l: &LaxOp,
) -> Result<LocalFunctional> {
    rmatrix_bracket_with(f, g, l, &Settings::default())
}

pub fn rmatrix_bracket_with(
    f: &LocalFunctional,
    g: &LocalFunctional,
    l: &LaxOp,
    settings: &Settings,
) -> Result<LocalFunctional> {
    let n = l.n() as i64;
    let d = settings.extra();
    let fx = -2 * n - d;
    let lp = l.to_psido();
    let xf = gradient(f, l)?.to_psido(fx);
    let xg = gradient(g, l)?.to_psido(fx);
    let first = xf
        .compose(&lp, fx + n)?
        .compose(&r_matrix(&xg.compose(&lp, fx + n)?), -1 - d)?
        .trace()?;
    let second = lp
        .compose(&xf, fx + n)?
        .compose(&r_matrix(&lp.compose(&xg, fx + n)?), -1 - d)?
        .trace()?;
    Ok(first.sub(&second))
}

/// The constant `c` with `r ≡ c·g`, read off a leading variational
/// coefficient of `g`; `None` when `g ≡ 0`. Callers must still confirm
/// `r − c·g ≡ 0`.
pub fn proportionality(r: &LocalFunctional, g: &LocalFunctional) -> Option<Rational> {
    for v in g.rep().generators() {
        let eg = g.gradient(&v);
        let lead = eg.terms().next().map(|(m, c)| (m.clone(), c.clone()));
        if let Some((m, c)) = lead {
            return Some(r.gradient(&v).coefficient(&m) / c);
        }
    }
    None
}

/// Compares the R-matrix bracket with `gd_bracket` over all pairs of a family
/// and extracts the common factor.
pub fn rmatrix_factor(
    family: &[NamedFunctional],
    l: &LaxOp,
    settings: &Settings,
) -> Result<Verification> {
    let pairs = crate::families::pairs(family);
    let results = exec::try_map(&pairs, |((nf, f), (ng, g))| {
        let r = rmatrix_bracket_with(f, g, l, settings)?;
        let b = gd_bracket(f, g, l, settings)?;
        Ok::<_, Error>((format!("{{{nf}, {ng}}}"), r, b))
    })?;
    let mut out = Verification::new();
    let mut factor: Option<Rational> = None;
    for (name, r, b) in &results {
        if let Some(c) = proportionality(r, b) {
            factor.get_or_insert(c);
        }
        let _ = name;
    }
    for (name, r, b) in &results {
        let (ok, detail) = match &factor {
            Some(c) => {
                let ok = r.equivalent(&b.scale(c));
                (ok, format!("R = {r}, GD = {b}"))
            }
            None => (r.is_zero(), format!("R = {r}, GD = {b}")),
        };
        out.push(CheckResult::new(format!("rmatrix {name}"), ok, detail));
    }
    let nonzero = results.iter().any(|(_, _, b)| !b.is_zero());
    out.push(CheckResult::new(
        "rmatrix uniform factor exists",
        factor.is_some() && nonzero,
        match &factor {
            Some(c) => format!("c = {}", rational::to_text(c)),
            None => "every GD bracket in the family vanished".to_string(),
        },
    ));
    out.artifact(
        "factor",
        factor
            .as_ref()
            .map(|c| Value::String(rational::to_text(c)))
            .unwrap_or(Value::Null),
    );
    Ok(out)
}

/// `gd_bracket(F, G) + gd_bracket(G, F) ≡ 0` over all pairs (including `F = G`).
pub fn skew_check(
    family: &[NamedFunctional],
    l: &LaxOp,
    settings: &Settings,
) -> Result<Verification> {
    let mut cases = Vec::new();
    for i in 0..family.len() {
        for j in i..family.len() {
            cases.push((i, j));
        }
    }
    let checks = exec::try_map(&cases, |&(i, j)| {
        let (nf, f) = &family[i];
        let (ng, g) = &family[j];
        let fg = gd_bracket(f, g, l, settings)?;
        let gf = gd_bracket(g, f, l, settings)?;
        let sum = fg.add(&gf);
        Ok::<_, Error>(CheckResult::new(
            format!("skew {{{nf}, {ng}}}"),
            sum.is_zero(),
            format!("{{F,G}} = {fg}"),
        ))
    })?;
    Ok(Verification {
        checks,
        ..Default::default()
    })
}

/// Trace form against table form over all pairs.
pub fn table_consistency(
    family: &[NamedFunctional],
    l: &LaxOp,
    settings: &Settings,
) -> Result<Verification> {
    let table = extract_table(l, settings)?;
    let gens = l.generators()?;
    let mut cases = Vec::new();
    for i in 0..family.len() {
        for j in 0..family.len() {
            cases.push((i, j));
        }
    }
    let checks = exec::try_map(&cases, |&(i, j)| {
        let (nf, f) = &family[i];
        let (ng, g) = &family[j];
        let tr = gd_bracket(f, g, l, settings)?;
        let tb = table.bracket(f, g, &gens)?;
        Ok::<_, Error>(CheckResult::new(
            format!("table/trace {{{nf}, {ng}}}"),
            tr.equivalent(&tb),
            format!("trace {tr}, table {tb}"),
        ))
    })?;
    Ok(Verification {
        checks,
        ..Default::default()
    })
}

/// Cyclic sum `{F,{G,H}} + {G,{H,F}} + {H,{F,G}} ≡ 0` over all triples.
pub fn jacobi_check(
    family: &[NamedFunctional],
    l: &LaxOp,
    settings: &Settings,
) -> Result<Verification> {
    let k = family.len();
    let pair_idx: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .collect();
    let inner = exec::try_map(&pair_idx, |&(i, j)| {
        gd_bracket(&family[i].1, &family[j].1, l, settings)
    })?;
    let lookup = |i: usize, j: usize| -> &LocalFunctional {
        let pos = pair_idx.iter().position(|&p| p == (i, j)).expect("pair");
        &inner[pos]
    };
    let mut triples = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                triples.push((a, b, c));
            }
        }
    }
    let checks = exec::try_map(&triples, |&(a, b, c)| {
        let t1 = gd_bracket(&family[a].1, lookup(b, c), l, settings)?;
        let t2 = gd_bracket(&family[b].1, lookup(c, a), l, settings)?;
        let t3 = gd_bracket(&family[c].1, lookup(a, b), l, settings)?;
        let sum = t1.add(&t2).add(&t3);
        let zero = sum.is_zero();
        let detail = if zero {
            format!("cyclic sum {sum} is a total derivative")
        } else {
            format!("cyclic sum {sum}")
        };
        Ok::<_, Error>(CheckResult::new(
            format!("jacobi ({}, {}, {})", family[a].0, family[b].0, family[c].0),
            zero,
            detail,
        ))
    })?;
    Ok(Verification {
        checks,
        ..Default::default()
    })
}

/// Symbolic factors `A = ∂^p + Σ a_i ∂^{p-i}`, `B = ∂^q + Σ b_i ∂^{q-i}` and
/// the coefficients `u_i(a, b)` of `L = AB`.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub a: LaxOp,
    pub b: LaxOp,
    pub product: LaxOp,
}

impl Factorization {
    pub fn symbolic(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidArgument("factor orders must be >= 1".into()));
        }
        let a = LaxOp::generic_in(Family::A, p);
        let b = LaxOp::generic_in(Family::B, q);
        let prod = a.to_psido().compose(&b.to_psido(), 0)?;
        Ok(Factorization {
            a,
            b,
            product: LaxOp::from_psido(&prod)?,
        })
    }

    /// Substitution `u_i ↦ u_i(a, b)`.
    pub fn pull_back(&self, p: &DiffPoly) -> DiffPoly {
        let coeffs = self.product.coeffs();
        p.substitute(|g| {
            (g.family == Family::U && (g.index as usize) <= coeffs.len())
                .then(|| coeffs[g.index as usize - 1].clone())
        })
    }
}

/// Verifies `J_AB(X) = A·J_B(XA) + J_A(BX)·B` for symbolic `A`, `B`, `X`, and
/// its functional form
/// `{F, G}_n(AB) = {F, G}_p(A) + {F, G}_q(B)` over the `small` family.
pub fn multiplicativity_check(p: usize, q: usize, settings: &Settings) -> Result<Verification> {
    let fac = Factorization::symbolic(p, q)?;
    let mut out = Verification::new();
    out.push(multiplicativity_identity(
        &fac,
        &CotangentVec::symbolic(p + q),
        settings,
    )?);

    let n = p + q;
    let lu = LaxOp::generic(n);
    let family = crate::families::small(n);
    let pairs = crate::families::pairs(&family);
    let checks = exec::try_map(&pairs, |((nf, f), (ng, g))| {
        let lhs = gd_bracket(f, g, &lu, settings)?.substitute(|v| {
            (v.family == Family::U).then(|| fac.product.coeffs()[v.index as usize - 1].clone())
        });
        let fp = LocalFunctional::new(fac.pull_back(f.rep()));
        let gp = LocalFunctional::new(fac.pull_back(g.rep()));
        let rhs =
            gd_bracket(&fp, &gp, &fac.a, settings)?.add(&gd_bracket(&fp, &gp, &fac.b, settings)?);
        let ok = lhs.equivalent(&rhs);
        Ok::<_, Error>(CheckResult::new(
            format!("multiplicative bracket ({p},{q}) {{{nf}, {ng}}}"),
            ok,
            if ok {
                String::new()
            } else {
                format!("lhs {lhs}\nrhs {rhs}")
            },
        ))
    })?;
    for c in checks {
        out.push(c);
    }
    Ok(out)
}

/// The operator identity for one cotangent vector `X` of order `p + q`.
pub fn multiplicativity_identity(
    fac: &Factorization,
    x: &CotangentVec,
    settings: &Settings,
) -> Result<CheckResult> {
    let (p, q) = (fac.a.n() as i64, fac.b.n() as i64);
    let n = p + q;
    let fx = -n - settings.extra();
    let xp = x.to_psido(fx);
    let (ap, bp, lp) = (fac.a.to_psido(), fac.b.to_psido(), fac.product.to_psido());
    let lhs = adler_apply(&lp, &xp, settings.sign)?;
    let xa = xp.compose(&ap, fx + p)?;
    let bx = bp.compose(&xp, fx + q)?;
    let rhs = ap
        .compose(&adler_apply(&bp, &xa, settings.sign)?, 0)?
        .add(&adler_apply(&ap, &bx, settings.sign)?.compose(&bp, 0)?);
    let name = format!("J_AB(X) = A J_B(XA) + J_A(BX) B for (p,q) = ({p},{q})");
    Ok(match lhs.diff_report(&rhs) {
        None => CheckResult::new(name, true, format!("{} terms", lhs.terms().count())),
        Some(d) => CheckResult::new(name, false, d),
    })
}

/// `d(λ*_A F) = dF·A` and `d(ϱ*_B F) = B·dF` on the pairing range, with the
/// left sides computed by varying the pulled-back functional directly.
pub fn gradient_pullback_check(
    p: usize,
    q: usize,
    family: &[NamedFunctional],
    settings: &Settings,
) -> Result<Verification> {
    let fac = Factorization::symbolic(p, q)?;
    let n = p + q;
    let lu = LaxOp::generic(n);
    let d = settings.extra();
    let fx = -(n as i64) - d;
    let (ap, bp) = (fac.a.to_psido(), fac.b.to_psido());
    let checks = exec::try_map(family, |(name, f)| {
        let dl = gradient(f, &lu)?.map(|c| fac.pull_back(c)).to_psido(fx);
        let fp = LocalFunctional::new(fac.pull_back(f.rep()));
        let window = |op: &PsiDO, k: usize| op.proj_minus().truncate(-(k as i64));

        let left = window(&dl.compose(&ap, fx + p as i64)?, q);
        let db = window(&gradient(&fp, &fac.b)?.to_psido(-(q as i64)), q);
        let right = window(&bp.compose(&dl, fx + q as i64)?, p);
        let da = window(&gradient(&fp, &fac.a)?.to_psido(-(p as i64)), p);
        let ok = left.agrees_with(&db) && right.agrees_with(&da);
        let detail = [left.diff_report(&db), right.diff_report(&da)]
            .into_iter()
            .flatten()
            .collect::<Vec<_>>()
            .join("\n");
        Ok::<_, Error>(CheckResult::new(
            format!("gradient pullback ({p},{q}) {name}"),
            ok,
            detail,
        ))
    })?;
    Ok(Verification {
        checks,
        ..Default::default()
    })
}

/// Sanity constant: a bracket of a constant functional vanishes.
pub fn constant_functional(c: i64) -> LocalFunctional {
    LocalFunctional::new(DiffPoly::constant(rational::int(c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn var(g: Generator, k: u32) -> DiffPoly {
        DiffPoly::var(g.var(k))
    }

    #[test]
    fn base_case_orientation() {
        let l = LaxOp::generic_in(Family::Phi, 1);
        let x = CotangentVec::symbolic(1);
        let minus = adler_map(&l, &x, &Settings::default()).unwrap();
        assert_eq!(minus, PsiDO::coeff_op(var(Generator::x(1), 1)));
        let plus = adler_map(&l, &x, &Settings::with_sign(Sign::Plus)).unwrap();
        assert_eq!(plus, PsiDO::coeff_op(-var(Generator::x(1), 1)));
    }

    #[test]
    fn zero_cotangent() {
        let l = LaxOp::generic(3);
        assert!(adler_map(&l, &CotangentVec::zero(3), &Settings::default())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn order_two_table() {
        let t = extract_table(&LaxOp::generic(2), &Settings::default()).unwrap();
        assert_eq!(t.entry(1, 1), &PsiDO::monomial(DiffPoly::int(2), 1));
        let want21 = PsiDO::from_terms(
            [(2, DiffPoly::one()), (1, DiffPoly::gen(Generator::u(1)))],
            None,
        );
        assert_eq!(t.entry(2, 1), &want21);
        assert!(t.skew_defect().is_none());
    }

    #[test]
    fn order_one_table() {
        let t = extract_table(&LaxOp::generic(1), &Settings::default()).unwrap();
        assert_eq!(t.entry(1, 1), &PsiDO::d());
    }

    #[test]
    fn gradient_examples() {
        let l = LaxOp::generic(2);
        let f = LocalFunctional::new(DiffPoly::gen(Generator::u(2)));
        assert_eq!(
            gradient(&f, &l).unwrap(),
            CotangentVec::new(vec![DiffPoly::zero(), DiffPoly::one()])
        );
        let sq = LocalFunctional::new(DiffPoly::gen(Generator::u(1)).pow(2));
        assert_eq!(
            gradient(&sq, &l).unwrap(),
            CotangentVec::new(vec![
                DiffPoly::gen(Generator::u(1)).scale(&int(2)),
                DiffPoly::zero()
            ])
        );
        let h = LocalFunctional::new(var(Generator::u(2), 1).pow(2).scale(&frac(1, 2)));
        assert_eq!(
            gradient(&h, &l).unwrap(),
            CotangentVec::new(vec![DiffPoly::zero(), -var(Generator::u(2), 2)])
        );
        // X = ∂^{-1} for F = ∫u2
        let xp = gradient(&f, &l).unwrap().to_psido(-4);
        assert_eq!(xp, PsiDO::d_pow(-1).truncate(-4));
    }

    #[test]
    fn bracket_examples() {
        let s = Settings::default();
        let l2 = LaxOp::generic(2);
        let u2 = LocalFunctional::new(DiffPoly::gen(Generator::u(2)));
        assert!(gd_bracket(&u2, &u2, &l2, &s).unwrap().is_zero());
        let c = constant_functional(5);
        assert!(gd_bracket(&u2, &c, &l2, &s).unwrap().is_zero());

        let l1 = LaxOp::generic_in(Family::Phi, 1);
        let phi = DiffPoly::gen(Generator::phi(1));
        let half = LocalFunctional::new(phi.pow(2).scale(&frac(1, 2)));
        let lin = LocalFunctional::new(phi.clone());
        assert!(gd_bracket(&half, &half, &l1, &s).unwrap().is_zero());
        let b = gd_bracket(&lin, &half, &l1, &s).unwrap();
        assert!(b.is_zero());
        let sq = LocalFunctional::new(phi.pow(2));
        let cube = LocalFunctional::new(phi.pow(3));
        // 2phi * 6 phi phi' = ∂(4 phi^3)
        assert!(gd_bracket(&sq, &cube, &l1, &s).unwrap().is_zero());
        // ∫ 3phi^2 ∂(-phi'') = -3 ∫ phi'^3
        let kin = LocalFunctional::new(var(Generator::phi(1), 1).pow(2).scale(&frac(1, 2)));
        let w = gd_bracket(&cube, &kin, &l1, &s).unwrap();
        let want = LocalFunctional::new(var(Generator::phi(1), 1).pow(3).scale(&int(-3)));
        assert!(w.equivalent(&want), "{w}");
    }

    #[test]
    fn rmatrix_factor_is_two() {
        let l = LaxOp::generic(2);
        let f = LocalFunctional::new(DiffPoly::gen(Generator::u(2)));
        let g =
            LocalFunctional::new(&DiffPoly::gen(Generator::u(1)) * &DiffPoly::gen(Generator::u(2)));
        let r = rmatrix_bracket(&f, &g, &l).unwrap();
        let b = gd_bracket(&f, &g, &l, &Settings::default()).unwrap();
        assert!(!b.is_zero());
        assert_eq!(proportionality(&r, &b), Some(int(2)));
        assert!(r.equivalent(&b.scale(&int(2))));
        assert!(rmatrix_bracket(&f, &f, &l).unwrap().is_zero());
        assert!(rmatrix_bracket(&f, &constant_functional(1), &l)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn multiplicativity_small() {
        let v = multiplicativity_check(1, 1, &Settings::default()).unwrap();
        assert!(v.passed(), "{:?}", v.first_failure());
        let fac = Factorization::symbolic(1, 2).unwrap();
        let zero =
            multiplicativity_identity(&fac, &CotangentVec::zero(3), &Settings::default()).unwrap();
        assert!(zero.passed);
    }

    #[test]
    fn json_table_round_trip() {
        let t = extract_table(&LaxOp::generic(2), &Settings::default()).unwrap();
        assert_eq!(BracketTable::from_json(&t.to_json()), Some(t));
    }

    #[test]
    fn sign_parsing() {
        assert_eq!("+1".parse::<Sign>().unwrap(), Sign::Plus);
        assert_eq!("-1".parse::<Sign>().unwrap(), Sign::Minus);
        assert!("2".parse::<Sign>().is_err());
    }

    #[test]
    fn from_psido_requires_monic() {
        let bad = PsiDO::monomial(DiffPoly::int(2), 2);
        assert!(LaxOp::from_psido(&bad).is_err());
        assert!(LaxOp::generic(2).generators().is_ok());
        let l = LaxOp::from_coeffs(vec![DiffPoly::gen(Generator::u(1)).pow(2)]);
        assert_eq!(l.generators(), Err(Error::NotGeneric(1)));
    }
}
