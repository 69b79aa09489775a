//! Generating sets, Dress generating sets and induction coefficients.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::bqgr::bqgr;
use crate::error::{Error, Result};
use crate::gset::{gset_of_family, hyper_p_closure, hyper_p_set, Family, GMap, GSet};
use crate::mackey::{GreenRingData, MackeyData};
use crate::zlocal::{self, is_surjective_localized, prime_factors, AbelianInvariants, IntMatrix, Locale};

/// Cokernel of `M(X) -> M(•)` together with a verdict in one locale.
#[derive(Clone, Debug, Serialize)]
pub struct GenerationReport {
    pub locale: Locale,
    pub set: Vec<String>,
    pub surjective: bool,
    pub cokernel: AbelianInvariants,
    pub cokernel_text: String,
}

/// `f_*: M(X) -> M(•)` for `f: X -> •`, with the relations of `M(•)`
/// appended on the right.
pub fn induction_to_point(m: &MackeyData, x: &GSet) -> Result<IntMatrix> {
    let f = GMap::to_point(x);
    let mat = m.covariant(&f)?;
    Ok(mat.hstack(m.value(m.group().whole_class()).relations()))
}

fn generation(m: &MackeyData, x: &GSet, locale: Locale) -> Result<GenerationReport> {
    let mat = induction_to_point(m, x)?;
    let rep = is_surjective_localized(&mat, locale);
    let g = m.group();
    let surjective = match locale {
        Locale::Generic => {
            let order = BigInt::from(g.order());
            rep.surjective && rep.bad_primes.iter().all(|&p| (&order % p).is_zero())
        }
        _ => rep.surjective,
    };
    Ok(GenerationReport {
        locale,
        set: x.orbits().iter().map(|&c| g.class(c).name.clone()).collect(),
        surjective,
        cokernel_text: rep.cokernel.to_string(),
        cokernel: rep.cokernel,
    })
}

/// Is `G(X) -> G(•)` surjective integrally or after localizing at `p`?
/// The generic locale asks for a finite cokernel whose order only
/// involves primes dividing `|G|`.
pub fn is_generating(r: &GreenRingData, x: &GSet, locale: Locale) -> Result<GenerationReport> {
    generation(r.mackey(), x, locale)
}

#[derive(Clone, Debug, Serialize)]
pub struct DressReport {
    pub functor: String,
    pub group: String,
    pub set: Vec<String>,
    /// One entry per prime dividing `|G|`, tested on the hyper_p closure.
    pub per_prime: Vec<PrimeVerdict>,
    /// Covers every prime not dividing `|G|` at once.
    pub generic: GenerationReport,
    pub overall: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimeVerdict {
    pub prime: u64,
    pub report: GenerationReport,
}

/// The Dress condition on a Green ring: `G(hyper_p-X) -> G(•)` surjective
/// at every prime. Primes dividing `|G|` are tested individually; for the
/// others the hyper_p closure changes nothing, and one integral cokernel
/// computation decides all of them.
pub fn is_dress_generating(r: &GreenRingData, x: &GSet) -> Result<DressReport> {
    dress_on(r.mackey(), x)
}

/// The Dress condition for a Mackey functor, decided on the quotient
/// `A_M` of the Burnside ring acting on it.
pub fn is_dress_generating_mackey(m: &MackeyData, x: &GSet) -> Result<DressReport> {
    let q = bqgr(m)?;
    let mut rep = dress_on(q.ring.mackey(), x)?;
    rep.functor = m.name().to_string();
    Ok(rep)
}

fn dress_on(m: &MackeyData, x: &GSet) -> Result<DressReport> {
    let g = m.group();
    let primes = prime_factors(&BigInt::from(g.order()));
    let per_prime = primes
        .iter()
        .map(|&p| Ok(PrimeVerdict { prime: p, report: generation(m, &hyper_p_set(x, p), Locale::Prime(p))? }))
        .collect::<Result<Vec<_>>>()?;
    let generic = generation(m, x, Locale::Generic)?;
    let overall = generic.surjective && per_prime.iter().all(|v| v.report.surjective);
    Ok(DressReport {
        functor: m.name().to_string(),
        group: g.name().to_string(),
        set: x.orbits().iter().map(|&c| g.class(c).name.clone()).collect(),
        per_prime,
        generic,
        overall,
    })
}

/// Outcome of the `K(Y) + I(Y)` test.
#[derive(Clone, Debug, Serialize)]
pub struct CoverReport {
    pub prime: u64,
    pub kernel_rank: usize,
    pub image_rank: usize,
    pub cokernel: String,
    pub holds: bool,
}

/// With `K(Y)` the kernel of restriction `M(•) -> M(Y)` and `I(Y)` the
/// image of induction from the hyper_p closure of `Y`, test
/// `K(Y) + I(Y) = M(•)` after localizing at `p`.
pub fn kernel_image_cover_check(m: &MackeyData, y: &GSet, p: u64) -> Result<CoverReport> {
    m.ensure_mackey()?;
    let g = m.group();
    let top = g.whole_class();
    let rel = m.value(top).relations().clone();
    let res = m.contravariant(&GMap::to_point(y))?;
    let ylat = m.evaluate(y).relation_lattice();
    let kernel = zlocal::preimage(&res, &ylat);
    let ind = m.covariant(&GMap::to_point(&hyper_p_set(y, p)))?;
    let image = zlocal::image(&ind.hstack(&rel));
    let sum = kernel.basis().hstack(image.basis()).hstack(&rel);
    let rep = is_surjective_localized(&sum, Locale::Prime(p));
    Ok(CoverReport {
        prime: p,
        kernel_rank: kernel.rank(),
        image_rank: image.rank(),
        cokernel: rep.cokernel.to_string(),
        holds: rep.surjective,
    })
}

/// An exact rational serialized as `{num, den}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RationalExport {
    #[serde(with = "crate::zlocal::int_serde")]
    pub num: BigInt,
    #[serde(with = "crate::zlocal::int_serde")]
    pub den: BigInt,
}

impl From<&BigRational> for RationalExport {
    fn from(q: &BigRational) -> Self {
        RationalExport { num: q.numer().clone(), den: q.denom().clone() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Coefficient {
    pub class: String,
    #[serde(skip)]
    pub class_index: usize,
    #[serde(skip)]
    pub value: BigRational,
    pub coefficient: RationalExport,
}

/// `x = Σ_H a_H Ind_H^G Res_G^H x` on `M(•) ⊗ Z_(p)`.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientTable {
    pub functor: String,
    pub group: String,
    pub prime: u64,
    pub family: Vec<String>,
    pub coefficients: Vec<Coefficient>,
    pub verified: bool,
}

impl CoefficientTable {
    pub fn denominators_prime_to_p(&self) -> bool {
        let values: Vec<BigRational> = self.coefficients.iter().map(|c| c.value.clone()).collect();
        zlocal::is_p_local(&values, self.prime)
    }
}

/// `Σ_H a_H Ind_H^G Res_G^H` on `M(•)` as a rational matrix, one entry per
/// coefficient.
pub fn coefficient_operator(m: &MackeyData, table: &CoefficientTable) -> Vec<Vec<BigRational>> {
    let g = m.group();
    let top = g.whole_class();
    let n = m.value(top).gens();
    let mut out = vec![vec![BigRational::zero(); n]; n];
    for c in &table.coefficients {
        if c.value.is_zero() {
            continue;
        }
        // Local classes of G are the global classes.
        let l = (0..g.local_classes(top).len()).find(|&l| g.local_classes(top)[l].global_class == c.class_index).expect("local class of G");
        let inc = m.inclusion(top, l);
        let a = inc.ind.mul(&inc.res);
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                let v = a.get(i, j);
                if !v.is_zero() {
                    *e += &c.value * BigRational::from_integer(v.clone());
                }
            }
        }
    }
    out
}

/// Solve `1 ≡ Σ_{H ∈ F} a_H [G/H]` modulo `I_M(•)` with `a_H ∈ Z_(p)`, the
/// first solution in the Smith basis, and verify the induction formula on
/// `M(•)`.
pub fn induction_coefficients(m: &MackeyData, f: &Family, p: u64) -> Result<CoefficientTable> {
    let g = m.group();
    if hyper_p_closure(f, p).members() != f.members() {
        return Err(Error::FamilyNotClosed { prime: p });
    }
    let x = gset_of_family(f);
    let top = g.whole_class();
    let q = bqgr(m)?;
    let ideal = &q.ideal;
    let gen = generation(q.ring.mackey(), &x, Locale::Prime(p))?;
    if !gen.surjective {
        return Err(Error::GenerationFails { prime: p, cokernel: gen.cokernel_text });
    }
    // Columns: [G/H] for H ∈ F in A(•), then I_M(•).
    let locals = g.local_classes(top);
    let members: Vec<usize> = f.members().iter().copied().collect();
    let na = locals.len();
    let mut cols: Vec<Vec<BigInt>> = members
        .iter()
        .map(|&c| {
            let mut v = vec![BigInt::zero(); na];
            let l = (0..na).find(|&l| locals[l].global_class == c).expect("local class of G");
            v[l] = BigInt::one();
            v
        })
        .collect();
    cols.extend(ideal.basis(top).columns());
    let mat = IntMatrix::from_columns(na, &cols);
    let one = q.ring.unit(top).to_vec();
    let sol = zlocal::solve_localized(&mat, &one, Some(p)).map_err(|e| Error::Infeasible(e.to_string()))?;
    let coefficients = members
        .iter()
        .zip(&sol)
        .map(|(&c, a)| Coefficient { class: g.class(c).name.clone(), class_index: c, value: a.clone(), coefficient: a.into() })
        .collect();
    let mut table = CoefficientTable {
        functor: m.name().to_string(),
        group: g.name().to_string(),
        prime: p,
        family: f.names(),
        coefficients,
        verified: false,
    };
    table.verified = verify_coefficients(m, &table);
    Ok(table)
}

/// `Σ a_H Ind_H Res_H` equals the identity on `M(•) ⊗ Z_(p)`: exactly when
/// `M(•)` is free, up to relations otherwise.
pub fn verify_coefficients(m: &MackeyData, table: &CoefficientTable) -> bool {
    if !table.denominators_prime_to_p() {
        return false;
    }
    let op = coefficient_operator(m, table);
    let n = op.len();
    let top = m.group().whole_class();
    let mut diff = op;
    for (i, row) in diff.iter_mut().enumerate() {
        row[i] -= BigRational::one();
    }
    if diff.iter().all(|r| r.iter().all(Zero::is_zero)) {
        return true;
    }
    if m.value(top).is_free() {
        return false;
    }
    // Clear denominators (prime to p) and test columns p-locally.
    let den = diff.iter().flatten().fold(BigInt::one(), |acc, q| num_integer::Integer::lcm(&acc, q.denom()));
    let lat = m.relation_lattice(top);
    (0..n).all(|j| {
        let col: Vec<BigInt> = (0..n).map(|i| (&diff[i][j] * BigRational::from_integer(den.clone())).to_integer()).collect();
        lat.contains_p_local(&col, table.prime)
    })
}

/// Same as [`induction_coefficients`], for a Green ring's underlying functor.
pub fn induction_coefficients_green(r: &GreenRingData, f: &Family, p: u64) -> Result<CoefficientTable> {
    induction_coefficients(r.mackey(), f, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::group_from_spec;
    use crate::mackey::{burnside_functor, perm_char_green_ring};

    #[test]
    fn c2_free_orbit() {
        let g = group_from_spec("C2").unwrap();
        let b = burnside_functor(&g);
        let x = GSet::free(&g);
        let integral = is_generating(&b, &x, Locale::Integral).unwrap();
        assert!(!integral.surjective);
        assert_eq!(integral.cokernel_text, "Z");
        let d = is_dress_generating(&b, &x).unwrap();
        assert!(d.per_prime.iter().all(|v| v.report.surjective));
        assert!(!d.generic.surjective);
        assert!(!d.overall);
    }

    #[test]
    fn point_generates() {
        let g = group_from_spec("S3").unwrap();
        let b = burnside_functor(&g);
        assert!(is_dress_generating(&b, &GSet::point(&g)).unwrap().overall);
    }

    #[test]
    fn s3_perm_char_cyclic() {
        let g = group_from_spec("S3").unwrap();
        let p = perm_char_green_ring(&g);
        let x = gset_of_family(&Family::cyclic(&g));
        assert!(is_generating(&p, &hyper_p_set(&x, 2), Locale::Prime(2)).unwrap().surjective);
        assert!(is_dress_generating(&p, &x).unwrap().overall);
    }

    #[test]
    fn s3_coefficients() {
        let g = group_from_spec("S3").unwrap();
        let p = perm_char_green_ring(&g);
        let f = Family::p_hyperelementary(&g, 2);
        let t = induction_coefficients(p.mackey(), &f, 2).unwrap();
        assert!(t.verified);
        assert!(t.denominators_prime_to_p());
    }

    #[test]
    fn unclosed_family_refused() {
        let g = group_from_spec("S3").unwrap();
        let p = perm_char_green_ring(&g);
        let f = Family::trivial(&g);
        assert!(matches!(induction_coefficients(p.mackey(), &f, 2), Err(Error::FamilyNotClosed { prime: 2 })));
    }
}
