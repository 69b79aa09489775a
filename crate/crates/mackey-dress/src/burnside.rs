//! The Burnside ring `A(S)` of G-sets over a base `S`.
//!
//! A transitive G-set over `S` is determined by an orbit `G/H_i` of `S` and
//! a subgroup `L ≤ H_i` up to `H_i`-conjugacy (the isotropy at a point over
//! the base point). So the basis of `A(S)` is indexed by pairs
//! `(orbit, local class)`, orbit by orbit.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::gset::{pullback, GMap, GSet};
use crate::mackey::MackeyData;
use crate::zlocal::IntMatrix;

/// Basis element of `A(S)`: `G ×_{H_i} (H_i/L)` over orbit `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitOverS {
    pub orbit: usize,
    /// Local class of `L` inside the orbit's class representative.
    pub local: usize,
    /// Global class of `L`.
    pub class: usize,
}

pub fn basis(s: &GSet) -> Vec<OrbitOverS> {
    let g = s.group();
    let mut out = Vec::new();
    for o in 0..s.orbit_count() {
        for (l, lc) in g.local_classes(s.orbit_class(o)).iter().enumerate() {
            out.push(OrbitOverS { orbit: o, local: l, class: lc.global_class });
        }
    }
    out
}

/// Start of each orbit's block in the basis, plus the total rank.
pub fn basis_offsets(s: &GSet) -> Vec<usize> {
    let g = s.group();
    let mut off = vec![0];
    for o in 0..s.orbit_count() {
        let last = *off.last().unwrap();
        off.push(last + g.local_classes(s.orbit_class(o)).len());
    }
    off
}

pub fn rank(s: &GSet) -> usize {
    *basis_offsets(s).last().unwrap()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BurnsideElement {
    site: GSet,
    coeffs: Vec<BigInt>,
}

#[derive(Serialize)]
pub struct BurnsideExport {
    pub basis: Vec<OrbitOverS>,
    pub coefficients: Vec<String>,
}

impl BurnsideElement {
    pub fn zero(site: &GSet) -> Self {
        BurnsideElement { site: site.clone(), coeffs: vec![BigInt::zero(); rank(site)] }
    }

    pub fn from_coeffs(site: &GSet, coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.len() != rank(site) {
            return Err(Error::Shape(format!("A(S) has rank {}, got {} coefficients", rank(site), coeffs.len())));
        }
        Ok(BurnsideElement { site: site.clone(), coeffs })
    }

    pub fn basis_element(site: &GSet, idx: usize) -> Self {
        let mut e = Self::zero(site);
        e.coeffs[idx] = BigInt::one();
        e
    }

    /// `1_S = [S = S]`.
    pub fn unit(site: &GSet) -> Self {
        decompose(&GMap::identity(site))
    }

    pub fn site(&self) -> &GSet {
        &self.site
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_site(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(BurnsideElement { site: self.site.clone(), coeffs })
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        BurnsideElement { site: self.site.clone(), coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    fn same_site(&self, other: &Self) -> Result<()> {
        if self.site != other.site {
            return Err(Error::SiteMismatch("Burnside elements over different sites".into()));
        }
        Ok(())
    }

    fn add_scaled(&mut self, other: &Self, c: &BigInt) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * c;
        }
    }

    pub fn export(&self) -> BurnsideExport {
        BurnsideExport { basis: basis(&self.site), coefficients: self.coeffs.iter().map(|c| c.to_string()).collect() }
    }
}

/// The structure map `G/R -> S` of a basis element.
pub fn basis_map(s: &GSet, b: &OrbitOverS) -> GMap {
    let g = s.group();
    let lc = &g.local_classes(s.orbit_class(b.orbit))[b.local];
    let (r, y) = g.class_of(&lc.subgroup);
    // y⁻¹ L y = R, so eR ↦ y⁻¹H_i is well defined.
    GMap::new_unchecked(&GSet::transitive(g, r), s, vec![(b.orbit, g.inv(y))])
}

/// Class of `[X --f--> S]` in `A(S)`.
pub fn decompose(f: &GMap) -> BurnsideElement {
    let s = f.target();
    let x = f.source();
    let g = s.group();
    let off = basis_offsets(s);
    let mut coeffs = vec![BigInt::zero(); *off.last().unwrap()];
    for o in 0..x.orbit_count() {
        let (i, el) = f.image(o);
        let l = local_image(g, x.orbit_class(o), s.orbit_class(i), el);
        coeffs[off[i] + l] += 1;
    }
    BurnsideElement { site: s.clone(), coeffs }
}

/// Local class of `g⁻¹ R g` inside `H` for a map `G/R -> G/H`.
fn local_image(g: &Group, r: usize, h: usize, el: usize) -> usize {
    let conj: Vec<usize> = g.rep(r).elements().iter().map(|&a| g.conj(a, el)).collect();
    let mask = crate::group::ElementSet::from_elements(g.order(), &conj);
    g.local_class_of(h, &mask).0
}

/// Covariant map `A(S) -> A(T)` along `φ: S -> T`.
pub fn induce(a: &BurnsideElement, phi: &GMap) -> Result<BurnsideElement> {
    if a.site != *phi.source() {
        return Err(Error::SiteMismatch("induce: element not over the source of the map".into()));
    }
    let mut out = BurnsideElement::zero(phi.target());
    for (b, c) in basis(&a.site).iter().zip(&a.coeffs) {
        if c.is_zero() {
            continue;
        }
        out.add_scaled(&decompose(&basis_map(&a.site, b).then(phi)?), c);
    }
    Ok(out)
}

/// Contravariant map `A(T) -> A(S)` along `φ: S -> T`, by pullback.
pub fn restrict(a: &BurnsideElement, phi: &GMap) -> Result<BurnsideElement> {
    if a.site != *phi.target() {
        return Err(Error::SiteMismatch("restrict: element not over the target of the map".into()));
    }
    let mut out = BurnsideElement::zero(phi.source());
    for (b, c) in basis(&a.site).iter().zip(&a.coeffs) {
        if c.is_zero() {
            continue;
        }
        let pb = pullback(phi, &basis_map(&a.site, b))?;
        out.add_scaled(&decompose(&pb.left), c);
    }
    Ok(out)
}

/// Product of two basis elements: the fiber product over `S`.
pub fn basis_product(s: &GSet, u: &OrbitOverS, v: &OrbitOverS) -> BurnsideElement {
    if u.orbit != v.orbit {
        return BurnsideElement::zero(s);
    }
    let bu = basis_map(s, u);
    let pb = pullback(&bu, &basis_map(s, v)).expect("common target");
    decompose(&pb.left.then(&bu).expect("composable"))
}

pub fn multiply(a: &BurnsideElement, b: &BurnsideElement) -> Result<BurnsideElement> {
    a.same_site(b)?;
    let s = &a.site;
    let bs = basis(s);
    let mut out = BurnsideElement::zero(s);
    for (i, ci) in a.coeffs.iter().enumerate() {
        if ci.is_zero() {
            continue;
        }
        for (j, cj) in b.coeffs.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            out.add_scaled(&basis_product(s, &bs[i], &bs[j]), &(ci * cj));
        }
    }
    Ok(out)
}

/// Matrix of `induce(-, φ)` in the bases of `A(S)`, `A(T)`.
pub fn induce_matrix(phi: &GMap) -> IntMatrix {
    let s = phi.source();
    let cols: Vec<Vec<BigInt>> = (0..rank(s))
        .map(|i| induce(&BurnsideElement::basis_element(s, i), phi).expect("matching site").coeffs)
        .collect();
    IntMatrix::from_columns(rank(phi.target()), &cols)
}

/// Matrix of `restrict(-, φ)`.
pub fn restrict_matrix(phi: &GMap) -> IntMatrix {
    let t = phi.target();
    let cols: Vec<Vec<BigInt>> = (0..rank(t))
        .map(|i| restrict(&BurnsideElement::basis_element(t, i), phi).expect("matching site").coeffs)
        .collect();
    IntMatrix::from_columns(rank(phi.source()), &cols)
}

/// Table of marks: row `K`, column `H`, entry `|(G/K)^H|`. Lower
/// triangular in the canonical class order.
pub fn table_of_marks(g: &Group) -> &Vec<Vec<u64>> {
    g.marks_cache().get_or_init(|| {
        let n = g.class_count();
        (0..n)
            .map(|k| {
                let ks = g.rep(k);
                let reps = &g.cosets(k).reps;
                (0..n)
                    .map(|h| {
                        if !g.class_le(h, k) {
                            return 0;
                        }
                        let hs = g.rep(h);
                        reps.iter().filter(|&&x| hs.elements().iter().all(|&a| ks.contains(g.conj(a, x)))).count() as u64
                    })
                    .collect()
            })
            .collect()
    })
}

/// Marks of an element of `A(•)`, indexed by subgroup class.
pub fn marks(a: &BurnsideElement) -> Result<Vec<BigInt>> {
    let s = a.site();
    if s.orbit_count() != 1 || s.orbit_class(0) != s.group().whole_class() {
        return Err(Error::SiteMismatch("marks are defined on A(•)".into()));
    }
    let g = s.group();
    let tom = table_of_marks(g);
    // Local classes of G are the global classes, in the same order.
    let n = g.class_count();
    Ok((0..n).map(|h| (0..n).map(|k| &a.coeffs[k] * BigInt::from(tom[k][h])).sum()).collect())
}

/// Marks of `A(H)` for the representative `H` of class `c`: row `L`,
/// column `L'` over the local classes, entry `|(H/L)^{L'}|`.
pub fn local_marks(g: &Group, c: usize) -> Vec<Vec<u64>> {
    let h = g.rep(c);
    let locals = g.local_classes(c);
    locals
        .iter()
        .map(|l| {
            let ls = &l.subgroup;
            let mut reps: Vec<usize> = Vec::new();
            let mut seen = crate::group::ElementSet::empty(g.order());
            for &x in h.elements() {
                if seen.contains(x) {
                    continue;
                }
                reps.push(x);
                for &a in ls.elements() {
                    seen.insert(g.mul(x, a));
                }
            }
            locals
                .iter()
                .map(|m| {
                    reps.iter().filter(|&&x| m.subgroup.elements().iter().all(|&a| ls.contains(g.conj(a, x)))).count()
                        as u64
                })
                .collect()
        })
        .collect()
}

/// The universal action of `A(S)` on `M(S)`.
pub fn act(a: &BurnsideElement, m: &MackeyData, x: &[BigInt]) -> Result<Vec<BigInt>> {
    if !Arc::ptr_eq(a.site().group(), m.group()) {
        return Err(Error::GroupMismatch);
    }
    let mat = m.action_matrix(a)?;
    if x.len() != mat.cols() {
        return Err(Error::Shape("element does not lie in M(S)".into()));
    }
    Ok(mat.mul_vec(x))
}
