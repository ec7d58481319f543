//! Miura factorization `L = (∂ + φ1)(∂ + φ2)…(∂ + φn)`, Fréchet matrices of
//! differential-polynomial maps, push-forward of brackets, and the
//! Kupershmidt–Wilson comparison against the Adler table.

use serde_json::{json, Value};

use crate::adler::{extract_table, BracketTable, Factorization, LaxOp, Settings};
use crate::diffring::{DiffPoly, Family, Generator};
use crate::exec;
use crate::psido::PsiDO;
use crate::report::{CheckResult, Verification};
use crate::Result;

/// Coefficients `u_i(φ)` of `∏ (∂ + φ_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiuraImage {
    pub n: usize,
    pub u_of_phi: Vec<DiffPoly>,
}

impl MiuraImage {
    /// `u_i ↦ u_i(φ)` as a substitution for generators of family `u`.
    pub fn substitution(&self) -> impl Fn(&Generator) -> Option<DiffPoly> + '_ {
        move |g| {
            (g.family == Family::U && (1..=self.n).contains(&(g.index as usize)))
                .then(|| self.u_of_phi[g.index as usize - 1].clone())
        }
    }

    pub fn pull_back(&self, p: &DiffPoly) -> DiffPoly {
        p.substitute(self.substitution())
    }

    pub fn lax(&self) -> LaxOp {
        LaxOp::from_coeffs(self.u_of_phi.clone())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "u": self.u_of_phi.iter().map(DiffPoly::to_json).collect::<Vec<_>>(),
        })
    }
}

fn linear_factor(g: Generator) -> PsiDO {
    PsiDO::d().add(&PsiDO::coeff_op(DiffPoly::gen(g)))
}

/// Product of `∂ + g` over `gens`, composed left to right.
pub fn factor_product(gens: &[Generator]) -> PsiDO {
    gens.iter().fold(PsiDO::one(), |acc, &g| {
        acc.compose(&linear_factor(g), 0)
            .expect("complete differential operators")
    })
}

pub fn miura_expand(n: usize) -> MiuraImage {
    miura_expand_from(1, n)
}

/// Miura image over `φ_first, …, φ_{first+n-1}`.
pub fn miura_expand_from(first: u32, n: usize) -> MiuraImage {
    assert!(n >= 1, "Miura factorization needs n >= 1");
    let gens: Vec<Generator> = (first..first + n as u32).map(Generator::phi).collect();
    let l = LaxOp::from_psido(&factor_product(&gens)).expect("monic product");
    MiuraImage {
        n,
        u_of_phi: l.coeffs().to_vec(),
    }
}

/// Linearization matrix `D_ik = Σ_a ∂u_i/∂g_k^(a) ∘ ∂^a` of a map
/// `g ↦ (u_1(g), …, u_r(g))` with respect to the source generators `g_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrechetMatrix {
    pub sources: Vec<Generator>,
    entries: Vec<Vec<PsiDO>>,
}

impl FrechetMatrix {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.sources.len()
    }

    /// 1-based entry access.
    pub fn entry(&self, i: usize, k: usize) -> &PsiDO {
        &self.entries[i - 1][k - 1]
    }

    /// `δu_i = Σ_k D_ik(δg_k)`.
    pub fn apply(&self, variation: &[DiffPoly]) -> Result<Vec<DiffPoly>> {
        self.entries
            .iter()
            .map(|row| {
                let mut acc = DiffPoly::zero();
                for (d, v) in row.iter().zip(variation) {
                    acc += d.apply(v)?;
                }
                Ok(acc)
            })
            .collect()
    }

    pub fn map_coeffs(&self, f: impl Fn(&DiffPoly) -> DiffPoly) -> FrechetMatrix {
        FrechetMatrix {
            sources: self.sources.clone(),
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(|e| e.map_coeffs(&f)).collect())
                .collect(),
        }
    }
}

pub fn frechet_of(polys: &[DiffPoly], sources: &[Generator]) -> FrechetMatrix {
    let entries = exec::map(polys, |u| {
        sources
            .iter()
            .map(|&g| {
                let terms = u
                    .vars()
                    .into_iter()
                    .filter(|v| v.gen == g)
                    .map(|v| (v.order as i64, u.partial(&v)));
                PsiDO::from_terms(terms, None)
            })
            .collect()
    });
    FrechetMatrix {
        sources: sources.to_vec(),
        entries,
    }
}

pub fn frechet(img: &MiuraImage) -> FrechetMatrix {
    let sources: Vec<Generator> = (1..=img.n as u32).map(Generator::phi).collect();
    frechet_of(&img.u_of_phi, &sources)
}

/// `J_ij = Σ_{k,l} D_ik ∘ S_kl ∘ (D_jl)†` for a source bracket `S`.
pub fn pushforward(d: &FrechetMatrix, source: &BracketTable) -> Result<BracketTable> {
    assert_eq!(
        d.cols(),
        source.n,
        "source table size must match the Fréchet matrix"
    );
    let r = d.rows();
    let adj: Vec<Vec<PsiDO>> = d
        .entries
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| e.formal_adjoint())
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    // D_ik ∘ S_kl, once per (i, l)
    let ds: Vec<Vec<PsiDO>> = exec::try_map(&d.entries, |row| {
        (1..=source.n)
            .map(|l| {
                let mut acc = PsiDO::zero();
                for (k, dik) in row.iter().enumerate() {
                    let s = source.entry(k + 1, l);
                    if dik.is_zero() || s.is_zero() {
                        continue;
                    }
                    acc = acc.add(&dik.compose(s, 0)?);
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let cells: Vec<(usize, usize)> = (0..r).flat_map(|i| (0..r).map(move |j| (i, j))).collect();
    let vals = exec::try_map(&cells, |&(i, j)| {
        let mut acc = PsiDO::zero();
        for l in 0..source.n {
            if ds[i][l].is_zero() || adj[j][l].is_zero() {
                continue;
            }
            acc = acc.add(&ds[i][l].compose(&adj[j][l], 0)?);
        }
        Ok(acc)
    })?;
    let mut it = vals.into_iter();
    let entries = (0..r)
        .map(|_| (0..r).map(|_| it.next().expect("cell")).collect())
        .collect();
    Ok(BracketTable::new(None, entries))
}

/// `diag(∂, …, ∂)` of size `n`.
pub fn free_table(n: usize) -> BracketTable {
    let entries = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { PsiDO::d() } else { PsiDO::zero() })
                .collect()
        })
        .collect();
    BracketTable::new(None, entries)
}

/// Push-forward of the free bracket `{φ_i, φ_j} = δ_ij δ'` through the Miura map.
pub fn induced_table(n: usize) -> Result<BracketTable> {
    pushforward(&frechet(&miura_expand(n)), &free_table(n))
}

fn compare_tables(label: &str, lhs: &BracketTable, rhs: &BracketTable) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for i in 1..=lhs.n {
        for j in 1..=lhs.n {
            let name = format!("{label} J[{i}][{j}]");
            out.push(match lhs.entry(i, j).diff_report(rhs.entry(i, j)) {
                None => CheckResult::new(name, true, lhs.entry(i, j).to_text()),
                Some(d) => CheckResult::new(name, false, d),
            });
        }
    }
    out
}

/// Substitutes `u ↦ u(φ)` into the Adler table and compares it entrywise with
/// the induced free-field table. Also checks skew-adjointness of the induced
/// table.
pub fn kw_verify(n: usize, settings: &Settings) -> Result<Verification> {
    let img = miura_expand(n);
    let adler = extract_table(&LaxOp::generic(n), settings)?;
    let pulled = adler.map_coeffs(|c| img.pull_back(c));
    let induced = induced_table(n)?;
    let mut out = Verification::new();
    for c in compare_tables(&format!("kw n={n}"), &pulled, &induced) {
        out.push(c);
    }
    out.push(match induced.skew_defect() {
        None => CheckResult::pass(format!("kw n={n} induced table is skew")),
        Some((i, j, d)) => CheckResult::new(
            format!("kw n={n} induced table is skew"),
            false,
            format!("entry ({i},{j}):\n{d}"),
        ),
    });
    out.artifact("adler_table", adler.to_json());
    out.artifact("induced_table", induced.to_json());
    out.artifact("miura", img.to_json());
    Ok(out)
}

/// Adler table of order `p + q` pulled back along `u ↦ u(a, b)` against the
/// push-forward of `J^(p)(a) ⊕ J^(q)(b)` through the two-block Fréchet matrix.
pub fn factor_verify(p: usize, q: usize, settings: &Settings) -> Result<Verification> {
    let fac = Factorization::symbolic(p, q)?;
    let mut sources = fac.a.generators()?;
    sources.extend(fac.b.generators()?);
    let d = frechet_of(fac.product.coeffs(), &sources);
    let block = block_diagonal(
        &extract_table(&fac.a, settings)?,
        &extract_table(&fac.b, settings)?,
    );
    let pushed = pushforward(&d, &block)?;
    let pulled = extract_table(&LaxOp::generic(p + q), settings)?.map_coeffs(|c| fac.pull_back(c));
    let mut out = Verification::new();
    for c in compare_tables(&format!("factor ({p},{q})"), &pulled, &pushed) {
        out.push(c);
    }
    Ok(out)
}

pub fn block_diagonal(a: &BracketTable, b: &BracketTable) -> BracketTable {
    let n = a.n + b.n;
    let mut entries = vec![vec![PsiDO::zero(); n]; n];
    for (i, row) in a.entries().iter().enumerate() {
        entries[i][..a.n].clone_from_slice(row);
    }
    for (i, row) in b.entries().iter().enumerate() {
        entries[a.n + i][a.n..].clone_from_slice(row);
    }
    BracketTable::new(None, entries)
}

/// The induced table over `φ_first..` obtained by peeling one linear factor
/// at a time: `L = (∂ + a1) · B` with `J^(1)(a1) ⊕ J^(n-1)(b)` pushed forward.
/// The innermost block is `J^(1) = ∂` from the Adler map itself.
pub fn iterated_table(n: usize, settings: &Settings) -> Result<BracketTable> {
    iterated_from(1, n, settings)
}

fn iterated_from(first: u32, n: usize, settings: &Settings) -> Result<BracketTable> {
    let phi = |g: &Generator, k: u32| -> Option<DiffPoly> {
        (g.family == Family::A && g.index == 1).then(|| DiffPoly::gen(Generator::phi(k)))
    };
    let base = extract_table(&LaxOp::generic_in(Family::A, 1), settings)?;
    if n == 1 {
        return Ok(base.map_coeffs(|c| c.substitute(|g| phi(g, first))));
    }
    let fac = Factorization::symbolic(1, n - 1)?;
    let inner = iterated_from(first + 1, n - 1, settings)?;
    let tail = miura_expand_from(first + 1, n - 1);
    let to_phi = |c: &DiffPoly| {
        c.substitute(|g| match g.family {
            Family::A => phi(g, first),
            Family::B => Some(tail.u_of_phi[g.index as usize - 1].clone()),
            _ => None,
        })
    };
    let mut sources = fac.a.generators()?;
    sources.extend(fac.b.generators()?);
    let d = frechet_of(fac.product.coeffs(), &sources).map_coeffs(to_phi);
    let block = block_diagonal(
        &base.map_coeffs(|c| c.substitute(|g| phi(g, first))),
        &inner,
    );
    pushforward(&d, &block)
}
