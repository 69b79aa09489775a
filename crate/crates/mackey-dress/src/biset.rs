//! Bifree bisets between subgroups of a fixed group, their balanced
//! products, the reversal involution `τ`, and the functor `j` from G-maps
//! to bisets.
//!
//! A transitive `(H₂, H₁)`-biset is determined up to isomorphism by the
//! stabilizer `K = {(l, r) : l·x = x·r}` of a point, up to conjugation in
//! `H₂ × H₁`. It is bifree exactly when `K` is the graph
//! `{(f(a), a) : a ∈ A}` of a monomorphism `f: A → H₂` defined on some
//! `A ≤ H₁`. The canonical form of `K` is its lexicographically smallest
//! conjugate, listed as sorted pairs.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{ElementSet, Group, Subgroup};
use crate::gset::GMap;
use crate::mackey::{inclusion_data, MackeyData, Orientation, ValidationReport, AbGroupPresentation, Inclusion};
use crate::zlocal::IntMatrix;

/// Position of each group element inside `s`, or `usize::MAX`.
fn positions(g: &Group, s: &Subgroup) -> Vec<usize> {
    let mut pos = vec![usize::MAX; g.order()];
    for (i, &e) in s.elements().iter().enumerate() {
        pos[e] = i;
    }
    pos
}

type CanonKey = (Subgroup, Subgroup, Vec<(usize, usize)>);

type CanonCache = Mutex<HashMap<CanonKey, Vec<(usize, usize)>>>;

fn canon_cache() -> &'static CanonCache {
    static CACHE: OnceLock<CanonCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn canonical_graph(g: &Group, left: &Subgroup, right: &Subgroup, mut pairs: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    pairs.sort_unstable();
    let key = (left.clone(), right.clone(), pairs);
    if let Some(c) = canon_cache().lock().expect("cache lock").get(&key) {
        return c.clone();
    }
    let pairs = &key.2;
    let mut best = pairs.clone();
    let mut buf = Vec::with_capacity(pairs.len());
    for &u in left.elements() {
        for &v in right.elements() {
            buf.clear();
            buf.extend(pairs.iter().map(|&(l, r)| (g.conj(l, u), g.conj(r, v))));
            buf.sort_unstable();
            if buf < best {
                std::mem::swap(&mut best, &mut buf);
            }
        }
    }
    canon_cache().lock().expect("cache lock").insert(key, best.clone());
    best
}

/// A transitive bifree `(left, right)`-biset in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BifreeBiset {
    left: Subgroup,
    right: Subgroup,
    graph: Vec<(usize, usize)>,
}

impl BifreeBiset {
    /// From the stabilizer of a point, given as all its pairs.
    pub fn from_graph(g: &Group, left: &Subgroup, right: &Subgroup, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.iter().any(|&(l, r)| !left.contains(l) || !right.contains(r)) {
            return Err(Error::Shape("graph is not inside left × right".into()));
        }
        let closed = pairs.contains(&(g.identity(), g.identity()))
            && pairs.iter().all(|&(a, b)| pairs.iter().all(|&(c, d)| pairs.contains(&(g.mul(a, c), g.mul(b, d)))));
        if !closed {
            return Err(Error::Shape("graph is not a subgroup".into()));
        }
        let e = g.identity();
        if pairs.iter().any(|&(l, r)| (l == e) != (r == e)) {
            return Err(Error::NotBifree(format!("stabilizer {pairs:?} meets a factor")));
        }
        let graph = canonical_graph(g, left, right, pairs);
        Ok(BifreeBiset { left: left.clone(), right: right.clone(), graph })
    }

    /// From `A ≤ right` and the images `f(a) ∈ left`, listed as `(a, f(a))`.
    pub fn from_monomorphism(g: &Group, left: &Subgroup, right: &Subgroup, map: &[(usize, usize)]) -> Result<Self> {
        let domain: Vec<usize> = map.iter().map(|p| p.0).collect();
        let a = g.subgroup_from_elements(&domain).ok_or_else(|| Error::Shape("domain is not a subgroup".into()))?;
        if !a.is_subgroup_of(right) || a.order() != map.len() {
            return Err(Error::Shape("domain must be a subgroup of the right group, each element once".into()));
        }
        let f: HashMap<usize, usize> = map.iter().copied().collect();
        let hom = map.iter().all(|&(x, fx)| map.iter().all(|&(y, fy)| f[&g.mul(x, y)] == g.mul(fx, fy)));
        if !hom {
            return Err(Error::NotHomomorphism("biset graph map".into()));
        }
        Self::from_graph(g, left, right, map.iter().map(|&(a, fa)| (fa, a)).collect())
    }

    /// `_H H _H`.
    pub fn identity(g: &Group, h: &Subgroup) -> Self {
        Self::from_graph(g, h, h, h.elements().iter().map(|&a| (a, a)).collect()).expect("diagonal is bifree")
    }

    pub fn left(&self) -> &Subgroup {
        &self.left
    }

    pub fn right(&self) -> &Subgroup {
        &self.right
    }

    pub fn graph(&self) -> &[(usize, usize)] {
        &self.graph
    }

    /// `A ≤ right`, sorted.
    pub fn domain(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.graph.iter().map(|p| p.1).collect();
        d.sort_unstable();
        d
    }

    /// `(a, f(a))` sorted by `a`.
    pub fn monomorphism(&self) -> Vec<(usize, usize)> {
        let mut m: Vec<(usize, usize)> = self.graph.iter().map(|&(l, r)| (r, l)).collect();
        m.sort_unstable();
        m
    }

    /// Number of points: `|left|·|right| / |A|`.
    pub fn size(&self) -> usize {
        self.left.order() * self.right.order() / self.graph.len()
    }

    /// Reverse the actions: `h₁·x·h₂ := h₂⁻¹ x h₁⁻¹`.
    pub fn tau(&self, g: &Group) -> Self {
        let pairs = self.graph.iter().map(|&(l, r)| (r, l)).collect();
        Self::from_graph(g, &self.right, &self.left, pairs).expect("transpose of a bifree graph")
    }

    pub fn concrete(&self, g: &Group) -> ConcreteBiset {
        ConcreteBiset::from_graph(g, &self.left, &self.right, &self.graph)
    }

    pub fn export(&self, g: &Group) -> BisetExport {
        BisetExport {
            left_group: export_subgroup(g, &self.left),
            right_group: export_subgroup(g, &self.right),
            domain_subgroup: self.domain().iter().map(|&a| g.label(a).to_string()).collect(),
            monomorphism: self.monomorphism().iter().map(|&(a, b)| [g.label(a).to_string(), g.label(b).to_string()]).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SubgroupExport {
    pub class: String,
    pub elements: Vec<String>,
}

fn export_subgroup(g: &Group, s: &Subgroup) -> SubgroupExport {
    SubgroupExport { class: g.class(g.class_of(s).0).name.clone(), elements: s.elements().iter().map(|&a| g.label(a).to_string()).collect() }
}

#[derive(Clone, Debug, Serialize)]
pub struct BisetExport {
    pub left_group: SubgroupExport,
    pub right_group: SubgroupExport,
    pub domain_subgroup: Vec<String>,
    pub monomorphism: Vec<[String; 2]>,
}

/// A biset with explicit point set and action tables.
#[derive(Clone, Debug)]
pub struct ConcreteBiset {
    left: Subgroup,
    right: Subgroup,
    size: usize,
    /// `lact[i][p] = left[i]·p`.
    lact: Vec<Vec<usize>>,
    /// `ract[j][p] = p·right[j]`.
    ract: Vec<Vec<usize>>,
}

impl ConcreteBiset {
    /// `(left × right)/K` with `l·(u, v)K·r = (lu, r⁻¹v)K`.
    fn from_graph(g: &Group, left: &Subgroup, right: &Subgroup, graph: &[(usize, usize)]) -> Self {
        let (lp, rp) = (positions(g, left), positions(g, right));
        let nr = right.order();
        let idx = |u: usize, v: usize| lp[u] * nr + rp[v];
        let mut coset = vec![usize::MAX; left.order() * nr];
        let mut reps = Vec::new();
        for &u in left.elements() {
            for &v in right.elements() {
                if coset[idx(u, v)] != usize::MAX {
                    continue;
                }
                let id = reps.len();
                reps.push((u, v));
                for &(a, b) in graph {
                    coset[idx(g.mul(u, a), g.mul(v, b))] = id;
                }
            }
        }
        let lact = left.elements().iter().map(|&l| reps.iter().map(|&(u, v)| coset[idx(g.mul(l, u), v)]).collect()).collect();
        let ract = right.elements().iter().map(|&r| reps.iter().map(|&(u, v)| coset[idx(u, g.mul(g.inv(r), v))]).collect()).collect();
        ConcreteBiset { left: left.clone(), right: right.clone(), size: reps.len(), lact, ract }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Orbit representatives of the right action and, for each point `p`,
    /// `(t, j)` with `p = t·right[j]`. Requires a free right action.
    fn right_transversal(&self) -> (Vec<usize>, Vec<(usize, usize)>) {
        let mut of = vec![(usize::MAX, 0); self.size];
        let mut reps = Vec::new();
        for p in 0..self.size {
            if of[p].0 != usize::MAX {
                continue;
            }
            let t = reps.len();
            reps.push(p);
            for (j, act) in self.ract.iter().enumerate() {
                of[act[p]] = (t, j);
            }
        }
        (reps, of)
    }

    fn left_transversal(&self) -> (Vec<usize>, Vec<(usize, usize)>) {
        let mut of = vec![(usize::MAX, 0); self.size];
        let mut reps = Vec::new();
        for p in 0..self.size {
            if of[p].0 != usize::MAX {
                continue;
            }
            let t = reps.len();
            reps.push(p);
            for (i, act) in self.lact.iter().enumerate() {
                of[act[p]] = (t, i);
            }
        }
        (reps, of)
    }

    /// Stabilizer pairs `(l, r)` with `l·p = p·r`.
    fn stabilizer(&self, p: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (j, ra) in self.ract.iter().enumerate() {
            for (i, la) in self.lact.iter().enumerate() {
                if la[p] == ra[p] {
                    out.push((self.left.elements()[i], self.right.elements()[j]));
                }
            }
        }
        out
    }

    /// Decompose into transitive bifree bisets.
    pub fn decompose(&self, g: &Group) -> Result<BisetMorphism> {
        let mut seen = vec![false; self.size];
        let mut out = BisetMorphism::zero(&self.right, &self.left);
        for p in 0..self.size {
            if seen[p] {
                continue;
            }
            let mut stack = vec![p];
            seen[p] = true;
            while let Some(q) = stack.pop() {
                for act in self.lact.iter().chain(&self.ract) {
                    let nq = act[q];
                    if !seen[nq] {
                        seen[nq] = true;
                        stack.push(nq);
                    }
                }
            }
            let b = BifreeBiset::from_graph(g, &self.left, &self.right, self.stabilizer(p))?;
            out.add_term(b, 1);
        }
        Ok(out)
    }
}

/// A Z-linear combination of transitive bifree `(target, source)`-bisets:
/// a morphism `source → target` in the biset category.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BisetMorphism {
    source: Subgroup,
    target: Subgroup,
    terms: BTreeMap<BifreeBiset, i64>,
}

impl BisetMorphism {
    pub fn zero(source: &Subgroup, target: &Subgroup) -> Self {
        BisetMorphism { source: source.clone(), target: target.clone(), terms: BTreeMap::new() }
    }

    pub fn from_biset(b: BifreeBiset) -> Self {
        let mut m = Self::zero(b.right(), b.left());
        m.add_term(b, 1);
        m
    }

    pub fn identity(g: &Group, h: &Subgroup) -> Self {
        Self::from_biset(BifreeBiset::identity(g, h))
    }

    pub fn source(&self) -> &Subgroup {
        &self.source
    }

    pub fn target(&self) -> &Subgroup {
        &self.target
    }

    pub fn terms(&self) -> &BTreeMap<BifreeBiset, i64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, b: BifreeBiset, c: i64) {
        debug_assert!(b.left() == &self.target && b.right() == &self.source);
        let e = self.terms.entry(b).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.retain(|_, v| *v != 0);
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::GroupMismatch);
        }
        let mut out = self.clone();
        for (b, &c) in &other.terms {
            out.add_term(b.clone(), c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: i64) -> Self {
        let mut out = Self::zero(&self.source, &self.target);
        if c != 0 {
            out.terms = self.terms.iter().map(|(b, &v)| (b.clone(), v * c)).collect();
        }
        out
    }

    pub fn tau(&self, g: &Group) -> Self {
        let mut out = Self::zero(&self.target, &self.source);
        for (b, &c) in &self.terms {
            out.add_term(b.tau(g), c);
        }
        out
    }

    pub fn export(&self, g: &Group) -> BisetMorphismExport {
        BisetMorphismExport {
            source: export_subgroup(g, &self.source),
            target: export_subgroup(g, &self.target),
            terms: self.terms.iter().map(|(b, &c)| BisetTermExport { coefficient: c, biset: b.export(g) }).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BisetTermExport {
    pub coefficient: i64,
    pub biset: BisetExport,
}

#[derive(Clone, Debug, Serialize)]
pub struct BisetMorphismExport {
    pub source: SubgroupExport,
    pub target: SubgroupExport,
    pub terms: Vec<BisetTermExport>,
}

/// `X ×_{H₂} Y` for transitive `X: H₂ → H₃` and `Y: H₁ → H₂`.
fn product_of_bisets(g: &Group, x: &BifreeBiset, y: &BifreeBiset) -> Result<BisetMorphism> {
    let cx = x.concrete(g);
    let cy = y.concrete(g);
    // Y is left-free: y = h·t for a unique transversal point t.
    let (ts, of) = cy.left_transversal();
    let nt = ts.len();
    let point = |px: usize, py: usize| {
        let (t, i) = of[py];
        cx.ract[i][px] * nt + t
    };
    let size = cx.size * nt;
    let lact = cx.lact.iter().map(|la| (0..size).map(|p| la[p / nt] * nt + p % nt).collect()).collect();
    let ract = cy.ract.iter().map(|ra| (0..size).map(|p| point(p / nt, ra[ts[p % nt]])).collect()).collect();
    let z = ConcreteBiset { left: x.left.clone(), right: y.right.clone(), size, lact, ract };
    z.decompose(g)
}

/// Composition `x ∘ y` in the biset category.
pub fn balanced_product(g: &Group, x: &BisetMorphism, y: &BisetMorphism) -> Result<BisetMorphism> {
    if x.source != y.target {
        return Err(Error::GroupMismatch);
    }
    let mut out = BisetMorphism::zero(&y.source, &x.target);
    for (bx, &cx) in &x.terms {
        for (by, &cy) in &y.terms {
            let p = product_of_bisets(g, bx, by)?;
            for (b, c) in p.terms {
                out.add_term(b, c * cx * cy);
            }
        }
    }
    Ok(out)
}

/// `H/K × X` with `h₁(hK, x)h₂ = (h₁hK, h₁xh₂)`, decomposed into
/// transitive pieces. Pieces that fail to be bifree are reported.
pub fn perm_biset_product(g: &Group, k: &Subgroup, x: &BifreeBiset) -> Result<BisetMorphism> {
    let h = x.left();
    if x.right() != h || !k.is_subgroup_of(h) {
        return Err(Error::GroupMismatch);
    }
    let cx = x.concrete(g);
    // Left cosets of K in H, by smallest element.
    let coset_of = |a: usize| k.elements().iter().map(|&b| g.mul(a, b)).min().expect("nonempty");
    let mut reps: Vec<usize> = h.elements().iter().map(|&a| coset_of(a)).collect();
    reps.sort_unstable();
    reps.dedup();
    let cpos: HashMap<usize, usize> = reps.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let n = cx.size;
    let size = reps.len() * n;
    let lact = h
        .elements()
        .iter()
        .enumerate()
        .map(|(i, &l)| (0..size).map(|p| cpos[&coset_of(g.mul(l, reps[p / n]))] * n + cx.lact[i][p % n]).collect())
        .collect();
    let ract = cx.ract.iter().map(|ra| (0..size).map(|p| (p / n) * n + ra[p % n]).collect()).collect();
    let z = ConcreteBiset { left: h.clone(), right: h.clone(), size, lact, ract };
    z.decompose(g)
}

/// `j_*(f)` for `f: G/H → G/K`, `eH ↦ gK`: the biset `_K K_{g⁻¹Hg}` with
/// `H` acting on the right through `h ↦ g⁻¹hg`.
pub fn j_lower_transitive(g: &Group, h: &Subgroup, k: &Subgroup, el: usize) -> Result<BifreeBiset> {
    if !h.elements().iter().all(|&a| k.contains(g.conj(a, el))) {
        return Err(Error::Shape(format!("{} does not conjugate the source into the target", g.label(el))));
    }
    BifreeBiset::from_graph(g, k, h, h.elements().iter().map(|&a| (g.conj(a, el), a)).collect())
}

/// `j^*(f) = τ(j_*(f))`.
pub fn j_upper_transitive(g: &Group, h: &Subgroup, k: &Subgroup, el: usize) -> Result<BifreeBiset> {
    Ok(j_lower_transitive(g, h, k, el)?.tau(g))
}

/// `j` on a map of arbitrary G-sets: matrices of biset morphisms, indexed
/// `[target orbit][source orbit]` for `j_*` and transposed for `j^*`.
#[derive(Clone, Debug)]
pub struct BisetMatrix {
    pub entries: Vec<Vec<BisetMorphism>>,
}

pub fn j_lower(f: &GMap) -> BisetMatrix {
    let g = f.source().group();
    let (s, t) = (f.source(), f.target());
    let mut entries: Vec<Vec<BisetMorphism>> = (0..t.orbit_count())
        .map(|to| (0..s.orbit_count()).map(|so| BisetMorphism::zero(g.rep(s.orbit_class(so)), g.rep(t.orbit_class(to)))).collect())
        .collect();
    for so in 0..s.orbit_count() {
        let (to, el) = f.image(so);
        let b = j_lower_transitive(g, g.rep(s.orbit_class(so)), g.rep(t.orbit_class(to)), el).expect("G-map data is valid");
        entries[to][so] = BisetMorphism::from_biset(b);
    }
    BisetMatrix { entries }
}

pub fn j_upper(f: &GMap) -> BisetMatrix {
    let g = f.source().group();
    let lower = j_lower(f);
    let rows = f.source().orbit_count();
    let cols = f.target().orbit_count();
    BisetMatrix { entries: (0..rows).map(|i| (0..cols).map(|j| lower.entries[j][i].tau(g)).collect()).collect() }
}

pub fn j(f: &GMap) -> (BisetMatrix, BisetMatrix) {
    (j_lower(f), j_upper(f))
}

/// Every transitive bifree `(left, right)`-biset, each once.
pub fn transitive_bisets(g: &Group, left: &Subgroup, right: &Subgroup) -> Vec<BifreeBiset> {
    let mut out = std::collections::BTreeSet::new();
    for a in g.all_subgroups().iter().filter(|a| a.is_subgroup_of(right)) {
        for map in monomorphisms(g, a, left) {
            out.insert(BifreeBiset::from_monomorphism(g, left, right, &map).expect("monomorphism graph"));
        }
    }
    out.into_iter().collect()
}

/// Injective homomorphisms `a → target`, as `(x, f(x))` lists.
fn monomorphisms(g: &Group, a: &Subgroup, target: &Subgroup) -> Vec<Vec<(usize, usize)>> {
    let mut gens = Vec::new();
    let mut span = g.trivial();
    for &x in a.elements() {
        if !span.contains(x) {
            gens.push(x);
            span = g.closure(&gens);
        }
    }
    let mut out = Vec::new();
    let mut choice = vec![0usize; gens.len()];
    let t = target.elements();
    loop {
        let imgs: Vec<usize> = choice.iter().map(|&i| t[i]).collect();
        if let Some(map) = extend_hom(g, &gens, &imgs) {
            let mut seen: Vec<usize> = map.values().copied().collect();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() == a.order() {
                let mut v: Vec<(usize, usize)> = map.into_iter().collect();
                v.sort_unstable();
                out.push(v);
            }
        }
        // Next tuple of generator images.
        let mut i = 0;
        loop {
            if i == choice.len() {
                return out;
            }
            choice[i] += 1;
            if choice[i] < t.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn extend_hom(g: &Group, gens: &[usize], imgs: &[usize]) -> Option<HashMap<usize, usize>> {
    let e = g.identity();
    let mut map = HashMap::from([(e, e)]);
    let mut queue = vec![e];
    let mut i = 0;
    while i < queue.len() {
        let x = queue[i];
        let fx = map[&x];
        for (&s, &fs) in gens.iter().zip(imgs) {
            let y = g.mul(x, s);
            let fy = g.mul(fx, fs);
            match map.get(&y) {
                Some(&v) if v != fy => return None,
                Some(_) => {}
                None => {
                    map.insert(y, fy);
                    queue.push(y);
                }
            }
        }
        i += 1;
    }
    Some(map)
}

// Functors on bisets ---------------------------------------------------------------

/// Additive data on transitive bifree bisets between class representatives.
/// `el` is the element of the G-map the biset came from, so that
/// pre-functors depending on it can be expressed.
pub trait BisetFixture: Sync {
    fn name(&self) -> String;
    fn rank(&self, g: &Group, class: usize) -> usize;
    /// Matrix `F(right class) → F(left class)`.
    fn apply(&self, g: &Group, x: &BifreeBiset, el: usize) -> IntMatrix;
}

fn class_of_rep(g: &Group, s: &Subgroup) -> usize {
    let (c, _) = g.class_of(s);
    assert!(g.rep(c) == s, "bisets between class representatives");
    c
}

/// `H ↦ A(H)` with `X` acting by `X ×_H -`.
pub struct BurnsideFixture;

impl BisetFixture for BurnsideFixture {
    fn name(&self) -> String {
        "burnside".into()
    }

    fn rank(&self, g: &Group, class: usize) -> usize {
        g.local_classes(class).len()
    }

    fn apply(&self, g: &Group, x: &BifreeBiset, _el: usize) -> IntMatrix {
        let (c2, c1) = (class_of_rep(g, x.left()), class_of_rep(g, x.right()));
        let cx = x.concrete(g);
        let (ts, of) = cx.right_transversal();
        let h1 = x.right();
        let rp = positions(g, h1);
        let locals = g.local_classes(c1);
        let mut m = IntMatrix::zeros(g.local_classes(c2).len(), locals.len());
        for (col, lc) in locals.iter().enumerate() {
            // H₁/L by smallest coset element.
            let l = &lc.subgroup;
            let coset_of = |a: usize| l.elements().iter().map(|&b| g.mul(a, b)).min().expect("nonempty");
            let mut reps: Vec<usize> = h1.elements().iter().map(|&a| coset_of(a)).collect();
            reps.sort_unstable();
            reps.dedup();
            let cpos: HashMap<usize, usize> = reps.iter().enumerate().map(|(i, &r)| (r, i)).collect();
            let nc = reps.len();
            // Points (t, c) of X ×_{H₁} H₁/L; l·(t, c) = (t', r·c) when l·t = t'·r.
            let size = ts.len() * nc;
            let act = |i: usize, p: usize| {
                let (t, c) = (p / nc, p % nc);
                let (t2, j) = of[cx.lact[i][ts[t]]];
                let r = h1.elements()[j];
                debug_assert!(rp[r] == j);
                t2 * nc + cpos[&coset_of(g.mul(r, reps[c]))]
            };
            let mut seen = vec![false; size];
            for p in 0..size {
                if seen[p] {
                    continue;
                }
                let mut stab = Vec::new();
                for (i, &le) in x.left().elements().iter().enumerate() {
                    let q = act(i, p);
                    seen[q] = true;
                    if q == p {
                        stab.push(le);
                    }
                }
                let (row, _) = g.local_class_of(c2, &ElementSet::from_elements(g.order(), &stab));
                m.add_at(row, col, &BigInt::from(1));
            }
        }
        m
    }
}

pub struct ZeroFixture;

impl BisetFixture for ZeroFixture {
    fn name(&self) -> String {
        "zero".into()
    }

    fn rank(&self, _g: &Group, _class: usize) -> usize {
        0
    }

    fn apply(&self, _g: &Group, _x: &BifreeBiset, _el: usize) -> IntMatrix {
        IntMatrix::zeros(0, 0)
    }
}

/// `Z` everywhere, `X ↦ ω(el)·|X/H₁|`. With `ω` trivial this is the
/// fixed-point functor; otherwise it twists inner conjugations.
pub struct SignedFixture(pub Orientation);

impl BisetFixture for SignedFixture {
    fn name(&self) -> String {
        if self.0.is_trivial() { "signed(trivial)".into() } else { "signed".into() }
    }

    fn rank(&self, _g: &Group, _class: usize) -> usize {
        1
    }

    fn apply(&self, _g: &Group, x: &BifreeBiset, el: usize) -> IntMatrix {
        IntMatrix::scalar(1, self.0.at(el) as i64 * (x.left().order() / x.graph().len()) as i64)
    }
}

/// Compose a fixture with `j` and tabulate the resulting pre-functor.
pub fn mackey_via_j(g: &Arc<Group>, fixture: &dyn BisetFixture) -> Result<MackeyData> {
    let n = g.class_count();
    let values = (0..n).map(|c| AbGroupPresentation::free(fixture.rank(g, c))).collect();
    let mut inclusions = Vec::with_capacity(n);
    for k in 0..n {
        let mut row = Vec::new();
        for l in 0..g.local_classes(k).len() {
            let (r, el) = inclusion_data(g, k, l);
            let lower = j_lower_transitive(g, g.rep(r), g.rep(k), el)?;
            let ind = fixture.apply(g, &lower, el);
            let res = fixture.apply(g, &lower.tau(g), el);
            row.push(Inclusion { class: r, element: el, ind, res });
        }
        inclusions.push(row);
    }
    let mut con = Vec::with_capacity(n);
    for h in 0..n {
        let rep = g.rep(h);
        let mut table = BTreeMap::new();
        for x in g.normalizer(rep) {
            table.insert(x, fixture.apply(g, &j_lower_transitive(g, rep, rep, x)?, x));
        }
        con.push(table);
    }
    MackeyData::new(g, format!("j*{}", fixture.name()), values, inclusions, con, false)
}

/// Validation report of `F ∘ j`.
pub fn mackey_via_j_check(g: &Arc<Group>, fixture: &dyn BisetFixture) -> Result<ValidationReport> {
    mackey_via_j(g, fixture)?.validate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::group_from_spec;
    use crate::mackey::burnside_functor;

    #[test]
    fn identity_is_unit() {
        let g = group_from_spec("S3").unwrap();
        for h in g.all_subgroups() {
            for k in g.all_subgroups() {
                for x in transitive_bisets(&g, k, h) {
                    let xm = BisetMorphism::from_biset(x.clone());
                    assert_eq!(balanced_product(&g, &BisetMorphism::identity(&g, k), &xm).unwrap(), xm);
                    assert_eq!(balanced_product(&g, &xm, &BisetMorphism::identity(&g, h)).unwrap(), xm);
                    assert_eq!(x.tau(&g).tau(&g), x);
                }
            }
        }
    }

    #[test]
    fn tau_of_conjugation_biset() {
        let g = group_from_spec("S3").unwrap();
        let c3 = g.rep(g.parse_class("C3").unwrap()).clone();
        let s3 = g.whole();
        let x = j_lower_transitive(&g, &c3, &s3, g.identity()).unwrap();
        let t = x.tau(&g);
        assert_eq!(t.left(), &c3);
        assert_eq!(t.right(), &s3);
        let direct = BifreeBiset::from_graph(&g, &c3, &s3, c3.elements().iter().map(|&a| (a, a)).collect()).unwrap();
        assert_eq!(t, direct);
    }

    #[test]
    fn non_bifree_rejected() {
        let g = group_from_spec("C2").unwrap();
        let c2 = g.whole();
        let pairs = vec![(0, 0), (1, 0)];
        assert!(matches!(BifreeBiset::from_graph(&g, &c2, &c2, pairs), Err(Error::NotBifree(_))));
    }

    #[test]
    fn burnside_via_j_matches() {
        let g = group_from_spec("S3").unwrap();
        let m = mackey_via_j(&g, &BurnsideFixture).unwrap();
        let b = burnside_functor(&g);
        for k in 0..g.class_count() {
            for l in 0..g.local_classes(k).len() {
                assert_eq!(m.inclusion(k, l).ind, b.mackey().inclusion(k, l).ind);
                assert_eq!(m.inclusion(k, l).res, b.mackey().inclusion(k, l).res);
            }
            for (&x, c) in b.mackey().conjugations(k) {
                assert_eq!(m.conjugation(k, x), c);
            }
        }
        assert!(m.validate().unwrap().is_empty());
    }

    #[test]
    fn perm_product_sizes() {
        let g = group_from_spec("S3").unwrap();
        let h = g.whole();
        let id = BifreeBiset::identity(&g, &h);
        let whole = perm_biset_product(&g, &h, &id).unwrap();
        assert_eq!(whole, BisetMorphism::from_biset(id.clone()));
        let free = perm_biset_product(&g, &g.trivial(), &id).unwrap();
        let points: i64 = free.terms().iter().map(|(b, &c)| c * b.size() as i64).sum();
        assert_eq!(points, 36);
    }
}
