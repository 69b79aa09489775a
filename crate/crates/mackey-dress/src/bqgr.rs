//! The ideal `I_M` of Burnside elements acting trivially on a Mackey
//! functor, and the quotient Green ring `A_M = A / I_M`.
//!
//! `I_M` is a sub-bifunctor of `A`, so `I_M(S)` is the direct sum of its
//! values on the orbits of `S`; it suffices to compute it on transitive
//! sites, and there the test maps can be taken transitive as well.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::gset::{transitive_maps, GSet};
use crate::mackey::{self, burnside_functor, AbGroupPresentation, GreenRingData, MackeyData, PresentationExport};
use crate::zlocal::{self, IntMatrix, Lattice};

/// `I_M(G/H)` per class, as a lattice basis in `A(G/H)`.
#[derive(Clone, Debug)]
pub struct GreenIdeal {
    functor: String,
    group: Arc<Group>,
    bases: Vec<IntMatrix>,
}

impl GreenIdeal {
    pub fn functor(&self) -> &str {
        &self.functor
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn basis(&self, c: usize) -> &IntMatrix {
        &self.bases[c]
    }

    pub fn rank(&self, c: usize) -> usize {
        self.bases[c].cols()
    }

    pub fn lattice(&self, c: usize) -> Lattice {
        Lattice::from_basis(self.bases[c].clone())
    }

    pub fn contains(&self, c: usize, a: &[BigInt]) -> bool {
        self.lattice(c).contains(a)
    }

    pub fn is_zero(&self) -> bool {
        self.bases.iter().all(|b| b.cols() == 0)
    }

    /// Basis of `I_M(S)` inside `A(S)`, orbit by orbit.
    pub fn on_site(&self, s: &GSet) -> IntMatrix {
        let blocks: Vec<IntMatrix> = s.orbits().iter().map(|&c| self.bases[c].clone()).collect();
        IntMatrix::block_diag(&blocks)
    }
}

/// Replace `basis` by the part of its span on which `cond` vanishes in
/// `Z^rows / rel`.
fn narrow(basis: &IntMatrix, cond: &IntMatrix, rel: Option<&Lattice>) -> IntMatrix {
    let c = cond.mul(basis);
    if c.is_zero() {
        return basis.clone();
    }
    let k = match rel {
        None => zlocal::kernel(&c),
        Some(l) => zlocal::preimage(&c, l),
    };
    basis.mul(k.basis())
}

/// `I_M(G/H_c)`: elements `a` with `ind_φ(a)` and `res_ψ(a)` acting as zero
/// for every transitive `φ` out of and `ψ` into `G/H_c`.
fn ideal_on_class(m: &MackeyData, a: &MackeyData, c: usize) -> IntMatrix {
    let g = m.group();
    let n = g.class_count();
    let mut basis = IntMatrix::identity(a.value(c).gens());
    // (source, target, element, covariant); the identity first, as it
    // usually cuts the most.
    let mut tests = vec![(c, c, g.identity(), true)];
    for k in (0..n).filter(|&k| g.class_le(c, k)) {
        tests.extend(transitive_maps(g, c, k).into_iter().filter(|&el| k != c || el != g.identity()).map(|el| (c, k, el, true)));
    }
    for j in (0..n).filter(|&j| g.class_le(j, c)) {
        tests.extend(transitive_maps(g, j, c).into_iter().map(|el| (j, c, el, false)));
    }
    for (h, k0, el, covariant) in tests {
        let (k, map) = if covariant { (k0, a.transitive(h, k0, el).lower.clone()) } else { (h, a.transitive(h, k0, el).upper.clone()) };
        let gens = m.value(k).gens();
        let rel = if m.value(k).is_free() { None } else { Some(m.relation_lattice(k)) };
        // Largest generators first: for rings the unit tends to sit last.
        for v in (0..gens).rev() {
            let mut e = vec![BigInt::zero(); gens];
            e[v] = BigInt::one();
            let cols: Vec<Vec<BigInt>> = m
                .inclusions(k)
                .iter()
                .map(|inc| inc.ind.mul_vec(&inc.res.mul_vec(&e)))
                .collect();
            let w = IntMatrix::from_columns(gens, &cols);
            basis = narrow(&basis, &w.mul(&map), rel);
            if basis.cols() == 0 {
                return basis;
            }
        }
    }
    zlocal::Lattice::span(&basis).basis().clone()
}

/// `I_M` on every transitive site. Refuses pre-functors and anything that
/// fails validation.
pub fn green_ideal(m: &MackeyData) -> Result<GreenIdeal> {
    m.ensure_mackey()?;
    let a = burnside_functor(m.group());
    Ok(green_ideal_with(m, a.mackey()))
}

fn green_ideal_with(m: &MackeyData, a: &MackeyData) -> GreenIdeal {
    use rayon::prelude::*;
    let n = m.group().class_count();
    let bases = (0..n).into_par_iter().map(|c| ideal_on_class(m, a, c)).collect();
    GreenIdeal { functor: m.name().to_string(), group: m.group().clone(), bases }
}

/// Basis of `I_M(S)` in `A(S)`.
pub fn ideal_i_m(m: &MackeyData, s: &GSet) -> Result<IntMatrix> {
    if !Arc::ptr_eq(s.group(), m.group()) {
        return Err(Error::GroupMismatch);
    }
    Ok(green_ideal(m)?.on_site(s))
}

/// The quotient `A_M` with its defining ideal.
pub struct BqgrData {
    pub ideal: GreenIdeal,
    pub ring: GreenRingData,
}

#[derive(Serialize)]
pub struct BqgrClassExport {
    pub class: String,
    pub burnside_rank: usize,
    pub ideal_rank: usize,
    pub quotient: PresentationExport,
    pub elementary_divisors: Vec<String>,
}

#[derive(Serialize)]
pub struct BqgrExport {
    pub functor: String,
    pub group: String,
    pub classes: Vec<BqgrClassExport>,
}

/// `A_M = A / I_M` on transitive sites, with the Burnside structure maps
/// and product.
pub fn bqgr(m: &MackeyData) -> Result<BqgrData> {
    m.ensure_mackey()?;
    let a = burnside_functor(m.group());
    let ideal = green_ideal_with(m, a.mackey());
    let ring = quotient_by_ideal(&a, &ideal, &format!("bqgr({})", m.name()))?;
    Ok(BqgrData { ideal, ring })
}

fn quotient_by_ideal(a: &GreenRingData, ideal: &GreenIdeal, name: &str) -> Result<GreenRingData> {
    let am = a.mackey();
    let g = am.group();
    let n = g.class_count();
    let values = (0..n).map(|c| AbGroupPresentation::new(am.value(c).gens(), ideal.basis(c).clone())).collect::<Result<Vec<_>>>()?;
    let inclusions = (0..n).map(|k| am.inclusions(k).to_vec()).collect();
    let con = (0..n).map(|h| am.conjugations(h).clone()).collect();
    let base = MackeyData::new(g, name, values, inclusions, con, false)?;
    let units = (0..n).map(|c| a.unit(c).to_vec()).collect();
    let tables: Vec<_> = (0..n).map(|c| a.product_table(c).clone()).collect();
    GreenRingData::new(Arc::new(base), units, Arc::new(move |c| tables[c].clone()))
}

impl BqgrData {
    /// Quotient `A(S) / I_M(S)`.
    pub fn evaluate(&self, s: &GSet) -> AbGroupPresentation {
        self.ring.mackey().evaluate(s)
    }

    pub fn export(&self) -> BqgrExport {
        let m = self.ring.mackey();
        let g = m.group();
        BqgrExport {
            functor: self.ideal.functor().to_string(),
            group: g.name().to_string(),
            classes: (0..g.class_count())
                .map(|c| {
                    let inv = m.value(c).invariants();
                    BqgrClassExport {
                        class: g.class(c).name.clone(),
                        burnside_rank: m.value(c).gens(),
                        ideal_rank: self.ideal.rank(c),
                        quotient: m.value(c).export(),
                        elementary_divisors: inv.torsion.iter().map(|t| t.to_string()).collect(),
                    }
                })
                .collect(),
        }
    }

    /// Product table of `A_M(G/H_c)` on the Burnside basis; entries are
    /// representatives modulo the ideal.
    pub fn multiplication_table(&self, c: usize) -> Vec<Vec<Vec<String>>> {
        self.ring.product_table(c).iter().map(|row| row.iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect()).collect()
    }
}

/// Columns `e_j · 1` for the basis `e_j` of `A(G/H_c)`.
pub fn unit_map_matrix(r: &GreenRingData, c: usize) -> IntMatrix {
    let m = r.mackey();
    let cols: Vec<Vec<BigInt>> = (0..m.inclusions(c).len())
        .map(|l| {
            let inc = m.inclusion(c, l);
            inc.ind.mul_vec(&inc.res.mul_vec(r.unit(c)))
        })
        .collect();
    IntMatrix::from_columns(m.value(c).gens(), &cols)
}

/// Kernel of `a ↦ a·1` on `A(G/H_c)` (modulo the relations of the value).
pub fn unit_map_kernel(r: &GreenRingData, c: usize) -> Lattice {
    let m = r.mackey();
    zlocal::preimage(&unit_map_matrix(r, c), m.relation_lattice(c))
}

/// The sub-Green ring `{a·1}` together with its lattice bases.
pub struct UnitImage {
    pub bases: Vec<IntMatrix>,
    pub ring: GreenRingData,
}

pub fn image_of_unit_map(r: &GreenRingData) -> Result<UnitImage> {
    let m = r.mackey();
    let n = m.group().class_count();
    let bases: Vec<IntMatrix> =
        (0..n).map(|c| zlocal::image(&unit_map_matrix(r, c).hstack(m.value(c).relations())).basis().clone()).collect();
    let ring = mackey::sub_green_ring(r, &format!("im_unit({})", r.name()), bases.clone())?;
    Ok(UnitImage { bases, ring })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::group_from_spec;
    use crate::mackey::{perm_char_green_ring, zero_functor, PermChar};

    #[test]
    fn burnside_ideal_is_zero() {
        let g = group_from_spec("S3").unwrap();
        let b = burnside_functor(&g);
        assert!(green_ideal(b.mackey()).unwrap().is_zero());
    }

    #[test]
    fn zero_functor_kills_everything() {
        let g = group_from_spec("S3").unwrap();
        let z = zero_functor(&g);
        let q = bqgr(z.mackey()).unwrap();
        for c in 0..g.class_count() {
            assert!(q.ring.mackey().value(c).invariants().is_zero());
        }
    }

    #[test]
    fn perm_char_s3_point() {
        let g = group_from_spec("S3").unwrap();
        let p = perm_char_green_ring(&g);
        let q = bqgr(p.mackey()).unwrap();
        let top = g.whole_class();
        assert_eq!(q.ideal.rank(top), 1);
        assert_eq!(q.ring.mackey().value(top).invariants().free_rank, 3);
        // Same lattice as the kernel of the character map.
        let ker = zlocal::kernel(&mackey::character_matrix(&g, top));
        assert!(ker.same_as(&q.ideal.lattice(top)));
        let _ = PermChar::build(&g);
    }

    #[test]
    fn pre_functor_refused() {
        let g = group_from_spec("C2").unwrap();
        let o = mackey::Orientation::parse(&g, "trivial-kernel").unwrap();
        let s = mackey::signed_pre_functor(&g, &o);
        assert!(matches!(green_ideal(&s), Err(Error::NotMackey(_))));
    }
}
