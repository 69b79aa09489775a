//! Amitsur complexes, homotopies from Burnside elements, and repair of
//! filtered pseudo-complexes.
//!
//! `Am_0 = Y` and `Am_r = X × Am_{r-1}`. The face `d_i: Am_r -> Am_{r-1}`
//! forgets the `i`-th factor of `X`, so `d_0` is the projection and
//! `d_i = 1 × d_{i-1}`. Boundaries are `∂_r = Σ_i (-1)^i (d_i)_*`, or the
//! contravariant sum for the cohomological variant.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::burnside::{self, BurnsideElement};
use crate::config::Caps;
use crate::error::{Error, Result};
use crate::gset::{product, GMap, GSet, Pullback};
use crate::mackey::{Direction, MackeyData};
use crate::zlocal::{self, AbelianInvariants, IntMatrix, Lattice, Locale};

/// The G-sets `Am_0, …, Am_n` with their faces.
pub struct AmitsurSets {
    x: GSet,
    levels: Vec<GSet>,
    /// `products[r]` presents `Am_r` as `X × Am_{r-1}`, for `r ≥ 1`.
    products: Vec<Option<Pullback>>,
    /// `faces[r][i] = d_i: Am_r -> Am_{r-1}`.
    faces: Vec<Vec<GMap>>,
}

impl AmitsurSets {
    pub fn build(x: &GSet, y: &GSet, n: usize) -> Result<Self> {
        let caps = Caps::from_env();
        if n > caps.max_degree {
            return Err(Error::DegreeCap { degree: n, cap: caps.max_degree });
        }
        if x.group() != y.group() {
            return Err(Error::GroupMismatch);
        }
        let mut points = y.size();
        for _ in 0..n {
            points = points.saturating_mul(x.size());
            if points > caps.max_points {
                return Err(Error::PointCap { points, cap: caps.max_points });
            }
        }
        let mut levels = vec![y.clone()];
        let mut products: Vec<Option<Pullback>> = vec![None];
        let mut faces: Vec<Vec<GMap>> = vec![Vec::new()];
        for r in 1..=n {
            let p = product(x, &levels[r - 1]);
            let mut fr = vec![p.right.clone()];
            for i in 1..r {
                let inner = &faces[r - 1][i - 1];
                let below = products[r - 1].as_ref().expect("Am_{r-1} is a product for r ≥ 2");
                let images = (0..p.set.orbit_count())
                    .map(|o| {
                        let b = p.set.base_point(o);
                        let t = below.point_of_pair(p.left.apply(b), inner.apply(p.right.apply(b))).expect("fiber point");
                        let tgt = &levels[r - 1];
                        (tgt.locate(t).0, tgt.coset_element(t))
                    })
                    .collect();
                fr.push(GMap::new_unchecked(&p.set, &levels[r - 1], images));
            }
            levels.push(p.set.clone());
            products.push(Some(p));
            faces.push(fr);
        }
        Ok(AmitsurSets { x: x.clone(), levels, products, faces })
    }

    pub fn degree(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, r: usize) -> &GSet {
        &self.levels[r]
    }

    pub fn face(&self, r: usize, i: usize) -> &GMap {
        &self.faces[r][i]
    }

    /// Failures of `d_i d_j = d_{j-1} d_i` for `i < j`, as `(r, i, j)`.
    pub fn simplicial_defects(&self) -> Vec<(usize, usize, usize)> {
        let mut bad = Vec::new();
        for r in 2..=self.degree() {
            for j in 0..r {
                for i in 0..j {
                    let s = &self.levels[r];
                    let same = (0..s.orbit_count()).all(|o| {
                        let b = s.base_point(o);
                        self.faces[r - 1][i].apply(self.faces[r][j].apply(b)) == self.faces[r - 1][j - 1].apply(self.faces[r][i].apply(b))
                    });
                    if !same {
                        bad.push((r, i, j));
                    }
                }
            }
        }
        bad
    }

    /// `e: Z × Am_r -> X × Am_r`, `(z, w) ↦ (α(z), w)`, with the projection
    /// `g: Z × Am_r -> Am_r`.
    fn homotopy_maps(&self, alpha: &GMap, r: usize) -> (GMap, GMap) {
        let q = product(alpha.source(), &self.levels[r]);
        let up = self.products[r + 1].as_ref().expect("Am_{r+1} is a product");
        let images = (0..q.set.orbit_count())
            .map(|o| {
                let b = q.set.base_point(o);
                let t = up.point_of_pair(alpha.apply(q.left.apply(b)), q.right.apply(b)).expect("fiber point");
                let tgt = &self.levels[r + 1];
                (tgt.locate(t).0, tgt.coset_element(t))
            })
            .collect();
        let e = GMap::new_unchecked(&q.set, &self.levels[r + 1], images);
        (e, q.right)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Homological,
    Cohomological,
}

/// A descending filtration `F_0 = C ⊇ F_1 ⊇ …`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Filtration {
    /// `F_i C_r` is spanned by the coordinates of weight at least `i`, and
    /// `F_depth = 0`.
    Coordinate { depth: usize, weights: Vec<Vec<usize>> },
    /// `F_i = p^i C`.
    PrimePower { prime: u64 },
}

/// Chain groups `C_0 … C_N` with boundaries and an optional contraction.
///
/// Homological: `boundary[r]` is `∂_{r+1}: C_{r+1} -> C_r` and
/// `contraction[r]` is `s_r: C_r -> C_{r+1}`. Cohomological: `boundary[r]`
/// is `δ_r: C_r -> C_{r+1}` and `contraction[r]` is `h_r: C_{r+1} -> C_r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainData {
    pub variant: Variant,
    pub ranks: Vec<usize>,
    /// Relations per chain group; absent when all groups are free.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<Vec<IntMatrix>>,
    pub boundary: Vec<IntMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction: Option<Vec<IntMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filtration: Option<Filtration>,
}

impl ChainData {
    pub fn top_degree(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn validate_shapes(&self) -> Result<()> {
        let n = self.top_degree();
        if self.boundary.len() != n {
            return Err(Error::Shape(format!("{} boundaries for top degree {n}", self.boundary.len())));
        }
        for (r, b) in self.boundary.iter().enumerate() {
            let want = match self.variant {
                Variant::Homological => (self.ranks[r], self.ranks[r + 1]),
                Variant::Cohomological => (self.ranks[r + 1], self.ranks[r]),
            };
            if b.shape() != want {
                return Err(Error::Shape(format!("boundary {r} has shape {:?}, expected {want:?}", b.shape())));
            }
        }
        if let Some(s) = &self.contraction {
            if s.len() != n {
                return Err(Error::Shape("one contraction map per boundary".into()));
            }
            for (r, m) in s.iter().enumerate() {
                let want = match self.variant {
                    Variant::Homological => (self.ranks[r + 1], self.ranks[r]),
                    Variant::Cohomological => (self.ranks[r], self.ranks[r + 1]),
                };
                if m.shape() != want {
                    return Err(Error::Shape(format!("contraction {r} has shape {:?}, expected {want:?}", m.shape())));
                }
            }
        }
        if let Some(rel) = &self.relations {
            if rel.len() != self.ranks.len() || rel.iter().zip(&self.ranks).any(|(m, &n)| m.rows() != n) {
                return Err(Error::Shape("one relation matrix per chain group".into()));
            }
        }
        if let Some(Filtration::Coordinate { weights, depth }) = &self.filtration {
            if weights.len() != self.ranks.len() || weights.iter().zip(&self.ranks).any(|(w, &n)| w.len() != n || w.iter().any(|&x| x >= *depth)) {
                return Err(Error::Shape("one weight below the depth per coordinate".into()));
            }
        }
        Ok(())
    }

    fn relation_lattice(&self, r: usize) -> Option<Lattice> {
        self.relations.as_ref().map(|rel| Lattice::span(&rel[r]))
    }

    fn vanishes(&self, r: usize, m: &IntMatrix) -> bool {
        m.is_zero() || self.relation_lattice(r).is_some_and(|l| m.columns().iter().all(|c| l.contains(c)))
    }

    /// Nonzero compositions of consecutive boundaries, keyed by the lower
    /// index `r` of `∂_r ∂_{r+1}` (homological) or `δ_{r} δ_{r-1}`.
    pub fn composition_defects(&self) -> Vec<(usize, IntMatrix)> {
        let mut out = Vec::new();
        for r in 1..self.boundary.len() {
            let (m, target) = match self.variant {
                Variant::Homological => (self.boundary[r - 1].mul(&self.boundary[r]), r - 1),
                Variant::Cohomological => (self.boundary[r].mul(&self.boundary[r - 1]), r + 1),
            };
            if !self.vanishes(target, &m) {
                out.push((r, m));
            }
        }
        out
    }

    pub fn is_complex(&self) -> bool {
        self.composition_defects().is_empty()
    }

    /// Same as [`composition_defects`](Self::composition_defects) after
    /// reducing modulo `q`.
    pub fn composition_defects_mod(&self, q: &BigInt) -> Vec<usize> {
        self.composition_defects().into_iter().filter(|(_, m)| !m.reduce_mod(q).is_zero()).map(|(r, _)| r).collect()
    }
}

/// An Amitsur complex with the G-sets it was built from.
pub struct AmitsurComplex {
    pub sets: AmitsurSets,
    pub chain: ChainData,
    pub functor: String,
}

/// `M(Am_r(X, Y))` for `r ≤ n` with alternating face sums.
pub fn amitsur_complex(m: &MackeyData, x: &GSet, y: &GSet, n: usize, variant: Variant) -> Result<AmitsurComplex> {
    if x.group() != m.group() || y.group() != m.group() {
        return Err(Error::GroupMismatch);
    }
    let sets = AmitsurSets::build(x, y, n)?;
    let direction = match variant {
        Variant::Homological => Direction::Covariant,
        Variant::Cohomological => Direction::Contravariant,
    };
    let values: Vec<_> = (0..=n).map(|r| m.evaluate(sets.level(r))).collect();
    let mut boundary = Vec::with_capacity(n);
    for r in 1..=n {
        let mut acc: Option<IntMatrix> = None;
        for i in 0..r {
            let mut f = m.map(sets.face(r, i), direction)?;
            if i % 2 == 1 {
                f = f.neg();
            }
            acc = Some(match acc {
                None => f,
                Some(a) => a.add(&f),
            });
        }
        boundary.push(acc.expect("r ≥ 1 faces"));
    }
    let relations = if values.iter().all(|v| v.is_free()) { None } else { Some(values.iter().map(|v| v.relations().clone()).collect()) };
    let chain = ChainData { variant, ranks: values.iter().map(|v| v.gens()).collect(), relations, boundary, contraction: None, filtration: None };
    Ok(AmitsurComplex { sets, chain, functor: m.name().to_string() })
}

/// `s_r(a) = Σ_b a_b (e_r)_* (g_r)^*` over the basis `b = (Z, α)` of `A(X)`
/// (homological), or `Σ_b a_b (g_r)_* (e_r)^*` (cohomological).
pub fn homotopy_from_element(m: &MackeyData, cx: &AmitsurComplex, a: &BurnsideElement) -> Result<Vec<IntMatrix>> {
    if a.site() != &cx.sets.x {
        return Err(Error::SiteMismatch("the Burnside element must live over X".into()));
    }
    let n = cx.sets.degree();
    let basis = burnside::basis(a.site());
    let mut out = Vec::with_capacity(n);
    for r in 0..n {
        let (rows, cols) = match cx.chain.variant {
            Variant::Homological => (cx.chain.ranks[r + 1], cx.chain.ranks[r]),
            Variant::Cohomological => (cx.chain.ranks[r], cx.chain.ranks[r + 1]),
        };
        let mut acc = IntMatrix::zeros(rows, cols);
        for (b, c) in basis.iter().zip(a.coeffs()) {
            if c.is_zero() {
                continue;
            }
            let alpha = burnside::basis_map(a.site(), b);
            let (e, g) = cx.sets.homotopy_maps(&alpha, r);
            let piece = match cx.chain.variant {
                Variant::Homological => m.covariant(&e)?.mul(&m.contravariant(&g)?),
                Variant::Cohomological => m.covariant(&g)?.mul(&m.contravariant(&e)?),
            };
            acc.add_assign_scaled(&piece, c);
        }
        out.push(acc);
    }
    Ok(out)
}

/// `∂_{r+1} s_r + s_{r-1} ∂_r - ρ_r` for `r < n`, where `ρ_r` is the action
/// of `p_*(a)` pulled back to `Am_r` (homological variant).
pub fn homotopy_defects(m: &MackeyData, cx: &AmitsurComplex, a: &BurnsideElement, s: &[IntMatrix]) -> Result<Vec<IntMatrix>> {
    if cx.chain.variant != Variant::Homological {
        return Err(Error::Shape("defect identity is stated for the homological variant".into()));
    }
    let pushed = burnside::induce(a, &GMap::to_point(a.site()))?;
    let bd = &cx.chain.boundary;
    let n = cx.sets.degree();
    let mut out = Vec::with_capacity(n);
    for r in 0..n {
        let level = cx.sets.level(r);
        let rho = m.action_matrix(&burnside::restrict(&pushed, &GMap::to_point(level))?)?;
        let mut d = bd[r].mul(&s[r]);
        if r > 0 {
            d = d.add(&s[r - 1].mul(&bd[r - 1]));
        }
        out.push(d.sub(&rho));
    }
    Ok(out)
}

// Exactness ------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct DegreeHomology {
    pub degree: usize,
    pub homology: String,
    pub invariants: AbelianInvariants,
    pub vanishes: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactnessReport {
    pub variant: Variant,
    pub locale: Locale,
    pub degrees: Vec<DegreeHomology>,
    pub exact: bool,
}

/// Homology by Smith normal form at the requested degrees, each below the
/// top degree.
pub fn check_exactness(c: &ChainData, degrees: &[usize], locale: Locale) -> Result<ExactnessReport> {
    c.validate_shapes()?;
    let defects = c.composition_defects();
    if !defects.is_empty() {
        return Err(Error::NotComplex(format!("boundary compositions nonzero at {:?}", defects.iter().map(|d| d.0).collect::<Vec<_>>())));
    }
    let n = c.top_degree();
    let mut out = Vec::with_capacity(degrees.len());
    for &r in degrees {
        if r >= n {
            return Err(Error::Shape(format!("homology at degree {r} needs maps beyond the top degree {n}")));
        }
        let rel = c.relation_lattice(r).unwrap_or_else(|| Lattice::zero(c.ranks[r]));
        let (out_map, in_map, out_target) = match c.variant {
            Variant::Homological => (if r == 0 { None } else { Some(&c.boundary[r - 1]) }, Some(&c.boundary[r]), r.wrapping_sub(1)),
            Variant::Cohomological => (Some(&c.boundary[r]), if r == 0 { None } else { Some(&c.boundary[r - 1]) }, r + 1),
        };
        let cycles = match out_map {
            None => Lattice::full(c.ranks[r]),
            Some(d) => {
                let tl = c.relation_lattice(out_target).unwrap_or_else(|| Lattice::zero(d.rows()));
                zlocal::preimage(d, &tl)
            }
        };
        let boundaries = match in_map {
            None => rel,
            Some(d) => zlocal::image(d).sum(&rel),
        };
        let inv = cycles.quotient_invariants(&boundaries).ok_or_else(|| Error::NotComplex(format!("boundaries exceed cycles at degree {r}")))?;
        let vanishes = match locale {
            Locale::Integral => inv.is_zero(),
            Locale::Prime(p) => inv.vanishes_at(p),
            Locale::Generic => inv.is_finite(),
        };
        out.push(DegreeHomology { degree: r, homology: inv.to_string(), invariants: inv, vanishes });
    }
    let exact = out.iter().all(|d| d.vanishes);
    Ok(ExactnessReport { variant: c.variant, locale, degrees: out, exact })
}

// Repair ------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeCertificate {
    pub degree: usize,
    /// The boundaries into and out of this degree compose to zero.
    pub boundary_squared_zero: bool,
    /// `s_{r-1} ∂_r + ∂_{r+1} s_r = 1`.
    pub contraction_identity: bool,
    /// `∂_{r+1} s_r ∂_{r+1} = ∂_{r+1}`.
    pub retract: bool,
    /// Least `j` with `u^j = 0` for `ψ_r = 1 + u`.
    pub nilpotency: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairResult {
    pub variant: Variant,
    /// Arithmetic modulus, absent for exact integers.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_int")]
    pub modulus: Option<BigInt>,
    pub boundary: Vec<IntMatrix>,
    pub contraction: Vec<IntMatrix>,
    pub certificate: Vec<DegreeCertificate>,
    pub first_boundary_unchanged: bool,
    /// Degrees whose boundary (into that degree from above) or contraction
    /// changed.
    pub changed_degrees: Vec<usize>,
}

mod opt_int {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => crate::zlocal::int_serde::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "crate::zlocal::int_serde")] BigInt);
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}

impl RepairResult {
    pub fn certified(&self) -> bool {
        self.first_boundary_unchanged && self.certificate.iter().all(|c| c.boundary_squared_zero && c.contraction_identity && c.retract)
    }

    /// The repaired data with the original variant.
    pub fn to_chain(&self, ranks: &[usize]) -> ChainData {
        ChainData {
            variant: self.variant,
            ranks: ranks.to_vec(),
            relations: None,
            boundary: self.boundary.clone(),
            contraction: Some(self.contraction.clone()),
            filtration: None,
        }
    }
}

struct Arith<'a> {
    modulus: Option<&'a BigInt>,
}

impl Arith<'_> {
    fn red(&self, m: IntMatrix) -> IntMatrix {
        match self.modulus {
            Some(q) => m.reduce_mod(q),
            None => m,
        }
    }

    fn mul(&self, a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
        self.red(a.mul(b))
    }

    fn is_zero(&self, m: &IntMatrix) -> bool {
        self.red(m.clone()).is_zero()
    }

    fn eq(&self, a: &IntMatrix, b: &IntMatrix) -> bool {
        self.is_zero(&a.sub(b))
    }
}

type CoordinateWeights = Option<(usize, Vec<Vec<usize>>)>;

/// Homological form: `(∂_1 … ∂_N, s_0 … s_{N-1}, weights)` with weights
/// reversed for transposed cochain data.
fn homological_form(c: &ChainData) -> Result<(Vec<IntMatrix>, Vec<IntMatrix>, CoordinateWeights)> {
    let s = c.contraction.clone().ok_or_else(|| Error::NotContracted("no contraction supplied".into()))?;
    let coord = match &c.filtration {
        Some(Filtration::Coordinate { depth, weights }) => Some((*depth, weights.clone())),
        _ => None,
    };
    Ok(match c.variant {
        Variant::Homological => (c.boundary.clone(), s, coord),
        Variant::Cohomological => (
            c.boundary.iter().map(IntMatrix::transpose).collect(),
            s.iter().map(IntMatrix::transpose).collect(),
            coord.map(|(d, w)| (d, w.into_iter().map(|v| v.into_iter().map(|x| d - 1 - x).collect()).collect())),
        ),
    })
}

/// `Σ (−u)^j` with `u^index = 0`, or `None` if `u^bound ≠ 0`.
fn geometric_inverse(ar: &Arith, u: &IntMatrix, bound: usize) -> Option<(IntMatrix, usize)> {
    let n = u.rows();
    let mut inv = IntMatrix::identity(n);
    let neg = ar.red(u.neg());
    let mut power = IntMatrix::identity(n);
    for j in 1..=bound.max(1) {
        power = ar.mul(&power, &neg);
        if ar.is_zero(&power) {
            return Some((inv, j));
        }
        inv = ar.red(inv.add(&power));
    }
    None
}

fn check_graded(ar: &Arith, bd: &[IntMatrix], s: &[IntMatrix], ranks: &[usize], coord: &Option<(usize, Vec<Vec<usize>>)>) -> Result<()> {
    let n = bd.len();
    let weight = |r: usize, i: usize| coord.as_ref().map_or(0, |(_, w)| w[r][i]);
    // Filtration preserved: no entry lowers the weight.
    if coord.is_some() {
        let check = |m: &IntMatrix, rr: usize, cr: usize, what: &str| -> Result<()> {
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    if weight(rr, i) < weight(cr, j) && !m.get(i, j).is_zero() {
                        return Err(Error::Shape(format!("{what} does not preserve the filtration at ({i}, {j})")));
                    }
                }
            }
            Ok(())
        };
        for r in 0..n {
            check(&bd[r], r, r + 1, &format!("boundary {}", r + 1))?;
            check(&s[r], r + 1, r, &format!("contraction {r}"))?;
        }
    }
    let graded = |m: &IntMatrix, rr: usize, cr: usize| -> IntMatrix {
        let mut g = m.clone();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if weight(rr, i) != weight(cr, j) {
                    g.set(i, j, 0);
                }
            }
        }
        g
    };
    for r in 0..n {
        if r + 1 < n && !ar.is_zero(&graded(&bd[r].mul(&bd[r + 1]), r, r + 2)) {
            return Err(Error::NotContracted(format!("graded ∂∂ ≠ 0 at degree {r}")));
        }
        let mut id = bd[r].mul(&s[r]);
        if r > 0 {
            id = id.add(&s[r - 1].mul(&bd[r - 1]));
        }
        if !ar.eq(&graded(&id, r, r), &IntMatrix::identity(ranks[r])) {
            return Err(Error::NotContracted(format!("graded s∂ + ∂s ≠ 1 at degree {r}")));
        }
    }
    Ok(())
}

fn repair_core(c: &ChainData, modulus: Option<&BigInt>, depth_bound: usize) -> Result<RepairResult> {
    c.validate_shapes()?;
    if c.relations.is_some() {
        return Err(Error::Shape("repair needs free chain groups".into()));
    }
    let ar = Arith { modulus };
    let (bd0, s0, coord) = homological_form(c)?;
    let bd: Vec<IntMatrix> = bd0.into_iter().map(|m| ar.red(m)).collect();
    let s: Vec<IntMatrix> = s0.into_iter().map(|m| ar.red(m)).collect();
    let ranks = &c.ranks;
    // Prime-power filtrations are contracted on the associated graded
    // exactly when everything is contracted modulo p.
    let graded_modulus = match &c.filtration {
        Some(Filtration::PrimePower { prime }) => Some(BigInt::from(*prime)),
        _ => modulus.cloned(),
    };
    check_graded(&Arith { modulus: graded_modulus.as_ref() }, &bd, &s, ranks, &coord)?;
    let n = bd.len();
    let mut nd: Vec<IntMatrix> = Vec::with_capacity(n);
    let mut ns: Vec<IntMatrix> = Vec::with_capacity(n);
    let mut nilpotency = Vec::with_capacity(n);
    if n > 0 {
        nd.push(bd[0].clone());
    }
    for r in 0..n {
        if r >= 1 {
            // ∂'_{r+1} = ∂_{r+1} − s'_{r−1} ∂'_r ∂_{r+1}
            let corr = ar.mul(&ar.mul(&ns[r - 1], &nd[r - 1]), &bd[r]);
            nd.push(ar.red(bd[r].sub(&corr)));
        }
        // ψ_r = s'_{r−1} ∂'_r + ∂'_{r+1} s_r
        let mut psi = ar.mul(&nd[r], &s[r]);
        if r >= 1 {
            psi = ar.red(psi.add(&ar.mul(&ns[r - 1], &nd[r - 1])));
        }
        let u = ar.red(psi.sub(&IntMatrix::identity(ranks[r])));
        let (inv, idx) = geometric_inverse(&ar, &u, depth_bound).ok_or(Error::NotNilpotent { index: r })?;
        nilpotency.push(idx);
        ns.push(ar.mul(&s[r], &inv));
    }
    let mut certificate = Vec::with_capacity(n);
    for r in 0..n {
        let squared = r + 1 >= n || ar.is_zero(&nd[r].mul(&nd[r + 1]));
        let mut id = nd[r].mul(&ns[r]);
        if r > 0 {
            id = id.add(&ns[r - 1].mul(&nd[r - 1]));
        }
        let contraction_identity = ar.eq(&id, &IntMatrix::identity(ranks[r]));
        let retract = ar.eq(&nd[r].mul(&ns[r]).mul(&nd[r]), &nd[r]);
        certificate.push(DegreeCertificate { degree: r, boundary_squared_zero: squared, contraction_identity, retract, nilpotency: nilpotency[r] });
    }
    let first_boundary_unchanged = n == 0 || nd[0] == bd[0];
    let changed_degrees = (0..n).filter(|&r| nd[r] != bd[r] || ns[r] != s[r]).collect();
    let (boundary, contraction) = match c.variant {
        Variant::Homological => (nd, ns),
        Variant::Cohomological => (nd.iter().map(IntMatrix::transpose).collect(), ns.iter().map(IntMatrix::transpose).collect()),
    };
    Ok(RepairResult { variant: c.variant, modulus: modulus.cloned(), boundary, contraction, certificate, first_boundary_unchanged, changed_degrees })
}

/// Repair a pseudo-complex whose filtration has a genuinely contracted
/// associated graded: exact integer arithmetic, `ψ_r` inverted by its
/// finite geometric series.
pub fn repair_pseudo_complex(c: &ChainData) -> Result<RepairResult> {
    let bound = match &c.filtration {
        Some(Filtration::Coordinate { depth, .. }) => *depth,
        Some(Filtration::PrimePower { .. }) => {
            return Err(Error::NotNilpotent { index: 0 });
        }
        None => 1,
    };
    repair_core(c, None, bound)
}

/// Repair modulo `p^k` for the filtration `F_i = p^i C`.
pub fn repair_filtered_truncated(c: &ChainData, k: u32) -> Result<RepairResult> {
    let p = match &c.filtration {
        Some(Filtration::PrimePower { prime }) => *prime,
        _ => return Err(Error::Shape("truncated repair needs a prime-power filtration".into())),
    };
    if k == 0 {
        return Err(Error::Shape("truncation exponent must be at least 1".into()));
    }
    let q = num_traits::pow(BigInt::from(p), k as usize);
    repair_core(c, Some(&q), k as usize)
}

/// The Amitsur pre-complex at `(X, •)` with the contraction built from
/// the identity of `A(X)`, filtered by powers of `p`.
pub fn amitsur_pseudo_complex(m: &MackeyData, x: &GSet, n: usize, p: u64) -> Result<ChainData> {
    let y = GSet::point(m.group());
    let cx = amitsur_complex(m, x, &y, n, Variant::Homological)?;
    let one = BurnsideElement::unit(x);
    let s = homotopy_from_element(m, &cx, &one)?;
    let mut chain = cx.chain;
    chain.contraction = Some(s);
    chain.filtration = Some(Filtration::PrimePower { prime: p });
    Ok(chain)
}

/// `∂_1 s_0 = 1` after reduction: `M(Y)` splits off `M(X × Y)`.
pub fn splits_first_boundary(r: &RepairResult) -> bool {
    let Some(b) = r.boundary.first() else { return true };
    let s = &r.contraction[0];
    let prod = match r.variant {
        Variant::Homological => b.mul(s),
        Variant::Cohomological => s.mul(b),
    };
    let d = prod.sub(&IntMatrix::identity(prod.rows()));
    match &r.modulus {
        Some(q) => d.reduce_mod(q).is_zero(),
        None => d.is_zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::group_from_spec;
    use crate::mackey::{burnside_functor, signed_pre_functor, Orientation};

    #[test]
    fn point_complex_is_contractible() {
        let g = group_from_spec("S3").unwrap();
        let b = burnside_functor(&g);
        let pt = GSet::point(&g);
        let cx = amitsur_complex(b.mackey(), &pt, &pt, 3, Variant::Homological).unwrap();
        assert!(cx.chain.is_complex());
        assert!(check_exactness(&cx.chain, &[0, 1, 2], Locale::Integral).unwrap().exact);
        assert!(cx.sets.simplicial_defects().is_empty());
    }

    #[test]
    fn c2_free_orbit_not_generating() {
        let g = group_from_spec("C2").unwrap();
        let b = burnside_functor(&g);
        let cx = amitsur_complex(b.mackey(), &GSet::free(&g), &GSet::point(&g), 2, Variant::Homological).unwrap();
        let rep = check_exactness(&cx.chain, &[0], Locale::Integral).unwrap();
        assert!(!rep.exact);
        assert_eq!(rep.degrees[0].homology, "Z");
    }

    #[test]
    fn homotopy_defect_vanishes_for_mackey() {
        let g = group_from_spec("S3").unwrap();
        let b = burnside_functor(&g);
        let x = GSet::from_orbits(&g, vec![1, 2]);
        let cx = amitsur_complex(b.mackey(), &x, &GSet::point(&g), 2, Variant::Homological).unwrap();
        let a = BurnsideElement::basis_element(&x, 1);
        let s = homotopy_from_element(b.mackey(), &cx, &a).unwrap();
        for d in homotopy_defects(b.mackey(), &cx, &a, &s).unwrap() {
            assert!(d.is_zero());
        }
    }

    #[test]
    fn signed_c2_defects_are_even() {
        let g = group_from_spec("C2").unwrap();
        let m = signed_pre_functor(&g, &Orientation::parse(&g, "trivial-kernel").unwrap());
        let x = GSet::from_orbits(&g, vec![0, 1]);
        let cx = amitsur_complex(&m, &x, &GSet::point(&g), 3, Variant::Homological).unwrap();
        assert!(!cx.chain.is_complex());
        assert!(cx.chain.composition_defects_mod(&BigInt::from(2)).is_empty());
    }

    #[test]
    fn genuine_contraction_is_fixed() {
        // 0 <- Z <-1- Z <-0- Z <-1- Z
        let c = ChainData {
            variant: Variant::Homological,
            ranks: vec![1, 1, 1, 1],
            relations: None,
            boundary: vec![IntMatrix::identity(1), IntMatrix::zeros(1, 1), IntMatrix::identity(1)],
            contraction: Some(vec![IntMatrix::identity(1), IntMatrix::zeros(1, 1), IntMatrix::identity(1)]),
            filtration: None,
        };
        let r = repair_pseudo_complex(&c).unwrap();
        assert!(r.certified());
        assert_eq!(r.boundary, c.boundary);
        assert_eq!(Some(r.contraction.clone()), c.contraction);
        assert!(r.changed_degrees.is_empty());
    }

    #[test]
    fn two_step_fixture_mod_4() {
        // C_r = Z^2, ∂ correct mod 2 with a single defect entry 2.
        let c = ChainData {
            variant: Variant::Homological,
            ranks: vec![2, 2, 2],
            relations: None,
            boundary: vec![IntMatrix::identity(2), IntMatrix::from_rows(&[vec![0, 2], vec![0, 0]])],
            contraction: Some(vec![IntMatrix::identity(2), IntMatrix::zeros(2, 2)]),
            filtration: Some(Filtration::PrimePower { prime: 2 }),
        };
        assert!(!c.is_complex());
        let r = repair_filtered_truncated(&c, 2).unwrap();
        assert!(r.certified());
        assert!(r.first_boundary_unchanged);
        assert!(r.boundary[0].mul(&r.boundary[1]).reduce_mod(&BigInt::from(4)).is_zero());
    }
}
