//! Finite left G-sets, G-maps, pullbacks and families of subgroups.
//!
//! A G-set is a list of transitive orbits, each a copy of `G/H` for a class
//! representative `H`. Point `(orbit, coset)` stands for `x·H` in that
//! orbit, where `x` is the smallest element of the coset. The base point of
//! each orbit is the coset `eH`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{spec_err, Error, Result};
use crate::group::{ElementSet, Group, Subgroup};

#[derive(Clone)]
pub struct GSet {
    group: Arc<Group>,
    orbits: Vec<usize>,
    offsets: Vec<usize>,
}

impl fmt::Debug for GSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GSet[")?;
        for (i, (c, m)) in self.orbit_types().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}:{}", self.group.class(*c).name, m)?;
        }
        write!(f, "]")
    }
}

impl PartialEq for GSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.group, &other.group) && self.orbits == other.orbits
    }
}

impl Eq for GSet {}

/// JSON export of a G-set.
#[derive(Serialize)]
pub struct GSetExport {
    pub orbits: Vec<OrbitTypeExport>,
    pub points: usize,
}

#[derive(Serialize)]
pub struct OrbitTypeExport {
    pub class: usize,
    pub name: String,
    pub multiplicity: usize,
}

impl GSet {
    /// Orbits of the given classes, in the given order.
    pub fn from_orbits(group: &Arc<Group>, orbits: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(orbits.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &c in &orbits {
            assert!(c < group.class_count(), "class index out of range");
            acc += group.class_index(c);
            offsets.push(acc);
        }
        GSet { group: group.clone(), orbits, offsets }
    }

    /// Orbit types `(class, multiplicity)`, sorted by class.
    pub fn from_types(group: &Arc<Group>, types: &[(usize, usize)]) -> Self {
        let mut t = types.to_vec();
        t.sort_unstable();
        let orbits = t.iter().flat_map(|&(c, m)| std::iter::repeat_n(c, m)).collect();
        Self::from_orbits(group, orbits)
    }

    pub fn empty(group: &Arc<Group>) -> Self {
        Self::from_orbits(group, Vec::new())
    }

    /// The one-point G-set `G/G`.
    pub fn point(group: &Arc<Group>) -> Self {
        Self::from_orbits(group, vec![group.whole_class()])
    }

    /// The free orbit `G/e`.
    pub fn free(group: &Arc<Group>) -> Self {
        Self::from_orbits(group, vec![group.trivial_class()])
    }

    pub fn transitive(group: &Arc<Group>, class: usize) -> Self {
        Self::from_orbits(group, vec![class])
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn orbits(&self) -> &[usize] {
        &self.orbits
    }

    pub fn orbit_count(&self) -> usize {
        self.orbits.len()
    }

    pub fn orbit_class(&self, o: usize) -> usize {
        self.orbits[o]
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn size(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn orbit_types(&self) -> Vec<(usize, usize)> {
        let mut counts: std::collections::BTreeMap<usize, usize> = Default::default();
        for &c in &self.orbits {
            *counts.entry(c).or_default() += 1;
        }
        counts.into_iter().collect()
    }

    /// Same orbit types (isomorphic as G-sets).
    pub fn equivalent(&self, other: &GSet) -> bool {
        Arc::ptr_eq(&self.group, &other.group) && self.orbit_types() == other.orbit_types()
    }

    pub fn contains_point_orbit(&self) -> bool {
        self.orbits.contains(&self.group.whole_class())
    }

    pub fn point_of(&self, orbit: usize, coset: usize) -> usize {
        self.offsets[orbit] + coset
    }

    pub fn base_point(&self, orbit: usize) -> usize {
        self.offsets[orbit]
    }

    pub fn locate(&self, p: usize) -> (usize, usize) {
        let o = self.offsets.partition_point(|&off| off <= p) - 1;
        (o, p - self.offsets[o])
    }

    /// Smallest `x` with `p = x · base_point(orbit of p)`.
    pub fn coset_element(&self, p: usize) -> usize {
        let (o, c) = self.locate(p);
        self.group.cosets(self.orbits[o]).reps[c]
    }

    #[inline]
    pub fn act(&self, x: usize, p: usize) -> usize {
        let (o, c) = self.locate(p);
        self.offsets[o] + self.group.act_on_coset(self.orbits[o], x, c)
    }

    pub fn stabilizer(&self, p: usize) -> Subgroup {
        let (o, _) = self.locate(p);
        let x = self.coset_element(p);
        // Stab(xH) = x H x⁻¹
        self.group.conjugate(self.group.rep(self.orbits[o]), self.group.inv(x))
    }

    /// Materialized action table `[element][point]`.
    pub fn action_table(&self) -> Vec<Vec<usize>> {
        self.group.elements().map(|x| (0..self.size()).map(|p| self.act(x, p)).collect()).collect()
    }

    /// `self ⊔ other`, orbits of `self` first.
    pub fn disjoint_union(&self, other: &GSet) -> GSet {
        let mut orbits = self.orbits.clone();
        orbits.extend_from_slice(&other.orbits);
        GSet::from_orbits(&self.group, orbits)
    }

    pub fn export(&self) -> GSetExport {
        GSetExport {
            orbits: self
                .orbit_types()
                .into_iter()
                .map(|(c, m)| OrbitTypeExport { class: c, name: self.group.class(c).name.clone(), multiplicity: m })
                .collect(),
            points: self.size(),
        }
    }
}

/// A G-map, recorded orbit by orbit: orbit `o` of the source (class `H`) goes
/// to `g·K` in a target orbit (class `K`), with `g⁻¹ H g ≤ K` and `g` the
/// smallest element of `gK`.
#[derive(Clone, PartialEq, Eq)]
pub struct GMap {
    source: GSet,
    target: GSet,
    images: Vec<(usize, usize)>,
}

impl fmt::Debug for GMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GMap{:?}->{:?}{:?}", self.source, self.target, self.images)
    }
}

/// JSON export of a G-map.
#[derive(Serialize)]
pub struct GMapExport {
    pub source: GSetExport,
    pub target: GSetExport,
    /// Per source orbit: target orbit and coset representative.
    pub images: Vec<(usize, usize)>,
}

impl GMap {
    /// Build a map from per-orbit data, canonicalizing representatives.
    pub fn new(source: &GSet, target: &GSet, images: Vec<(usize, usize)>) -> Result<GMap> {
        if !Arc::ptr_eq(source.group(), target.group()) {
            return Err(Error::GroupMismatch);
        }
        if images.len() != source.orbit_count() {
            return Err(Error::Shape("one image per source orbit".into()));
        }
        let g = source.group().clone();
        let mut canon = Vec::with_capacity(images.len());
        for (o, &(t, x)) in images.iter().enumerate() {
            if t >= target.orbit_count() || x >= g.order() {
                return Err(Error::Shape("image out of range".into()));
            }
            let h = g.rep(source.orbit_class(o));
            let k = g.rep(target.orbit_class(t));
            if !h.elements().iter().all(|&a| k.contains(g.conj(a, x))) {
                return Err(Error::SiteMismatch(format!("orbit {o}: g⁻¹Hg is not contained in K")));
            }
            canon.push((t, canonical_rep(&g, target.orbit_class(t), x)));
        }
        Ok(GMap { source: source.clone(), target: target.clone(), images: canon })
    }

    pub(crate) fn new_unchecked(source: &GSet, target: &GSet, images: Vec<(usize, usize)>) -> GMap {
        let g = source.group().clone();
        let images = images.into_iter().map(|(t, x)| (t, canonical_rep(&g, target.orbit_class(t), x))).collect();
        GMap { source: source.clone(), target: target.clone(), images }
    }

    /// Map determined by the images of the orbit base points.
    pub fn from_base_images(source: &GSet, target: &GSet, points: &[usize]) -> Result<GMap> {
        let images = points
            .iter()
            .map(|&p| {
                let (o, _) = target.locate(p);
                (o, target.coset_element(p))
            })
            .collect();
        GMap::new(source, target, images)
    }

    pub fn identity(s: &GSet) -> GMap {
        GMap { source: s.clone(), target: s.clone(), images: (0..s.orbit_count()).map(|o| (o, 0)).collect() }
    }

    /// The unique map to the one-point G-set.
    pub fn to_point(s: &GSet) -> GMap {
        let pt = GSet::point(s.group());
        GMap { source: s.clone(), target: pt, images: vec![(0, 0); s.orbit_count()] }
    }

    pub fn source(&self) -> &GSet {
        &self.source
    }

    pub fn target(&self) -> &GSet {
        &self.target
    }

    pub fn images(&self) -> &[(usize, usize)] {
        &self.images
    }

    pub fn image(&self, orbit: usize) -> (usize, usize) {
        self.images[orbit]
    }

    pub fn apply(&self, p: usize) -> usize {
        let (o, _) = self.source.locate(p);
        let x = self.source.coset_element(p);
        let (t, g) = self.images[o];
        let grp = self.source.group();
        let k = self.target.orbit_class(t);
        self.target.point_of(t, grp.cosets(k).coset_of[grp.mul(x, g)])
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &GMap) -> Result<GMap> {
        if self.target != other.source {
            return Err(Error::SiteMismatch("composition of non-composable maps".into()));
        }
        let g = self.source.group();
        let images = self
            .images
            .iter()
            .map(|&(t, a)| {
                let (u, b) = other.images[t];
                (u, g.mul(a, b))
            })
            .collect();
        Ok(GMap::new_unchecked(&self.source, &other.target, images))
    }

    /// Checks `f(x·s) = x·f(s)` on all points.
    pub fn is_equivariant(&self) -> bool {
        let g = self.source.group();
        (0..self.source.size()).all(|p| g.elements().all(|x| self.apply(self.source.act(x, p)) == self.target.act(x, self.apply(p))))
    }

    pub fn export(&self) -> GMapExport {
        GMapExport { source: self.source.export(), target: self.target.export(), images: self.images.clone() }
    }
}

/// Smallest element of `x·K_c`.
pub fn canonical_rep(g: &Group, c: usize, x: usize) -> usize {
    let t = g.cosets(c);
    t.reps[t.coset_of[x]]
}

/// Every G-map `s -> t`, in lexicographic order of per-orbit choices.
pub fn all_gmaps(s: &GSet, t: &GSet) -> Vec<GMap> {
    let g = s.group();
    let choices: Vec<Vec<(usize, usize)>> = (0..s.orbit_count())
        .map(|o| {
            let h = g.rep(s.orbit_class(o));
            let mut v = Vec::new();
            for to in 0..t.orbit_count() {
                let kc = t.orbit_class(to);
                let k = g.rep(kc);
                for &x in &g.cosets(kc).reps {
                    if h.elements().iter().all(|&a| k.contains(g.conj(a, x))) {
                        v.push((to, x));
                    }
                }
            }
            v
        })
        .collect();
    if choices.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; choices.len()];
    loop {
        let images = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        out.push(GMap { source: s.clone(), target: t.clone(), images });
        let mut k = idx.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Maps between transitive G-sets `G/H -> G/K`: the canonical `g` with
/// `g⁻¹ H g ≤ K`.
pub fn transitive_maps(g: &Group, h: usize, k: usize) -> Vec<usize> {
    let hs = g.rep(h);
    let ks = g.rep(k);
    g.cosets(k).reps.iter().copied().filter(|&x| hs.elements().iter().all(|&a| ks.contains(g.conj(a, x)))).collect()
}

/// First map `s -> t` found, if any.
pub fn some_gmap(s: &GSet, t: &GSet) -> Option<GMap> {
    let g = s.group();
    let mut images = Vec::with_capacity(s.orbit_count());
    for o in 0..s.orbit_count() {
        let h = s.orbit_class(o);
        let found = (0..t.orbit_count()).find_map(|to| transitive_maps(g, h, t.orbit_class(to)).first().map(|&x| (to, x)))?;
        images.push(found);
    }
    Some(GMap { source: s.clone(), target: t.clone(), images })
}

/// Fiber product `S ×_T U` with its projections.
pub struct Pullback {
    pub set: GSet,
    pub left: GMap,
    pub right: GMap,
    /// Per source orbit of `S`: fiber point `u` -> (orbit of `P`, `h ∈ H`
    /// with `u = h·u0`).
    fibers: Vec<HashMap<usize, (usize, usize)>>,
    /// Per orbit of `P`: the conjugator `y` with base point `y⁻¹·(s0, u0)`.
    conjugators: Vec<usize>,
}

impl Pullback {
    /// Point of `P` over `(s, u)`, if `f(s) = g(u)`.
    pub fn point_of_pair(&self, s: usize, u: usize) -> Option<usize> {
        let src = self.left.target();
        let g = src.group();
        let (o, _) = src.locate(s);
        let x = src.coset_element(s);
        let v = self.right.target().act(g.inv(x), u);
        let &(po, h) = self.fibers[o].get(&v)?;
        // (s, u) = x h y · base
        let y = self.conjugators[po];
        let z = g.mul(g.mul(x, h), y);
        let rc = self.set.orbit_class(po);
        Some(self.set.point_of(po, g.cosets(rc).coset_of[z]))
    }
}

/// Pullback of `f: S -> T` and `g: U -> T`. Orbits of the pullback over an
/// orbit `G/H` of `S` are the `H`-orbits on the fiber of `g` over the image
/// of `eH`; each is enumerated point by point.
pub fn pullback(f: &GMap, g: &GMap) -> Result<Pullback> {
    if f.target() != g.target() {
        return Err(Error::SiteMismatch("pullback needs a common target".into()));
    }
    let s = f.source();
    let u = g.source();
    let grp = s.group().clone();
    let mut fiber_of: HashMap<usize, Vec<usize>> = HashMap::new();
    for p in 0..u.size() {
        fiber_of.entry(g.apply(p)).or_default().push(p);
    }
    let mut orbits = Vec::new();
    let mut left_images = Vec::new();
    let mut right_points = Vec::new();
    let mut conjugators = Vec::new();
    let mut fibers = Vec::with_capacity(s.orbit_count());
    for o in 0..s.orbit_count() {
        let h = grp.rep(s.orbit_class(o));
        let t0 = f.apply(s.base_point(o));
        let fiber = fiber_of.get(&t0).cloned().unwrap_or_default();
        let mut info: HashMap<usize, (usize, usize)> = HashMap::with_capacity(fiber.len());
        for &u0 in &fiber {
            if info.contains_key(&u0) {
                continue;
            }
            let po = orbits.len();
            let mut stab = Vec::new();
            for &x in h.elements() {
                let v = u.act(x, u0);
                if v == u0 {
                    stab.push(x);
                }
                info.entry(v).or_insert((po, x));
            }
            let l = ElementSet::from_elements(grp.order(), &stab);
            let (c, y) = grp.class_of_mask(&l);
            let yi = grp.inv(y);
            orbits.push(c);
            left_images.push((o, yi));
            right_points.push(u.act(yi, u0));
            conjugators.push(yi);
        }
        fibers.push(info);
    }
    let set = GSet::from_orbits(&grp, orbits);
    let left = GMap::new_unchecked(&set, s, left_images);
    let right_images = right_points
        .iter()
        .map(|&p| {
            let (ro, _) = u.locate(p);
            (ro, u.coset_element(p))
        })
        .collect();
    let right = GMap::new_unchecked(&set, u, right_images);
    Ok(Pullback { set, left, right, fibers, conjugators })
}

/// `S × U` as the pullback over the point.
pub fn product(s: &GSet, u: &GSet) -> Pullback {
    pullback(&GMap::to_point(s), &GMap::to_point(u)).expect("maps to a point share a target")
}

// Families ---------------------------------------------------------------

/// A family of subgroups: a set of classes closed under subgroups.
#[derive(Clone, PartialEq, Eq)]
pub struct Family {
    group: Arc<Group>,
    members: BTreeSet<usize>,
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.members.iter().map(|&c| self.group.class(c).name.as_str()).collect();
        write!(f, "Family{names:?}")
    }
}

impl Family {
    /// Smallest family containing the given classes.
    pub fn generated_by(group: &Arc<Group>, classes: impl IntoIterator<Item = usize>) -> Family {
        let gens: Vec<usize> = classes.into_iter().collect();
        let members = (0..group.class_count()).filter(|&c| gens.iter().any(|&d| group.class_le(c, d))).collect();
        Family { group: group.clone(), members }
    }

    /// Family of all classes satisfying a subgroup-closed predicate.
    pub fn by_predicate(group: &Arc<Group>, pred: impl Fn(&Subgroup) -> bool) -> Family {
        let gens: Vec<usize> = (0..group.class_count()).filter(|&c| pred(group.rep(c))).collect();
        Family::generated_by(group, gens)
    }

    /// Accept an explicit member set only if it is closed under subgroups.
    pub fn from_members(group: &Arc<Group>, members: BTreeSet<usize>) -> Option<Family> {
        let f = Family { group: group.clone(), members };
        f.is_closed().then_some(f)
    }

    pub fn all(group: &Arc<Group>) -> Family {
        Family::generated_by(group, [group.whole_class()])
    }

    pub fn trivial(group: &Arc<Group>) -> Family {
        Family::generated_by(group, [group.trivial_class()])
    }

    pub fn cyclic(group: &Arc<Group>) -> Family {
        Family::by_predicate(group, |h| group.is_cyclic(h))
    }

    pub fn p_elementary(group: &Arc<Group>, p: u64) -> Family {
        Family::by_predicate(group, |h| group.is_p_elementary(h, p))
    }

    pub fn hyperelementary(group: &Arc<Group>) -> Family {
        Family::by_predicate(group, |h| group.is_hyperelementary(h))
    }

    pub fn p_hyperelementary(group: &Arc<Group>, p: u64) -> Family {
        Family::by_predicate(group, |h| group.is_p_hyperelementary(h, p))
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn contains(&self, c: usize) -> bool {
        self.members.contains(&c)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.members.iter().all(|&d| (0..self.group.class_count()).all(|c| !self.group.class_le(c, d) || self.members.contains(&c)))
    }

    /// Members not contained in another member.
    pub fn maximal_classes(&self) -> Vec<usize> {
        self.members
            .iter()
            .copied()
            .filter(|&c| !self.members.iter().any(|&d| d != c && self.group.class_le(c, d)))
            .collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.members.iter().map(|&c| self.group.class(c).name.clone()).collect()
    }
}

/// `X(F)`: one orbit `G/H` per maximal class of `F`.
pub fn gset_of_family(f: &Family) -> GSet {
    GSet::from_orbits(f.group(), f.maximal_classes())
}

/// Family generated by the isotropy subgroups of `s`.
pub fn family_of(s: &GSet) -> Family {
    Family::generated_by(s.group(), s.orbits().iter().copied())
}

/// `{H : O^p(H) ∈ F}`.
pub fn hyper_p_closure(f: &Family, p: u64) -> Family {
    let g = f.group();
    let members = (0..g.class_count())
        .filter(|&c| {
            let o = g.o_p(g.rep(c), p);
            f.contains(g.class_of(&o).0)
        })
        .collect();
    Family { group: g.clone(), members }
}

pub fn hyper_p_set(x: &GSet, p: u64) -> GSet {
    gset_of_family(&hyper_p_closure(&family_of(x), p))
}

/// Parse a family keyword (`all`, `trivial`, `cyclic`, `elementary:p`,
/// `hyperelementary`, `p-hyperelementary:p`) or a comma list of class names
/// generating a family.
pub fn parse_family(group: &Arc<Group>, spec: &str) -> Result<Family> {
    let mut classes = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match keyword_family(group, item, spec)? {
            Some(f) => classes.extend(f.members),
            None => {
                let name = item.split(':').next().unwrap();
                let c = group.parse_class(name).ok_or_else(|| spec_err(spec, format!("unknown class `{name}`")))?;
                classes.push(c);
            }
        }
    }
    Ok(Family::generated_by(group, classes))
}

fn prime_arg(item: &str, spec: &str) -> Result<u64> {
    let p: u64 = item.parse().map_err(|_| spec_err(spec, format!("bad prime `{item}`")))?;
    if !crate::zlocal::is_prime(p) {
        return Err(spec_err(spec, format!("{p} is not prime")));
    }
    Ok(p)
}

fn keyword_family(group: &Arc<Group>, item: &str, spec: &str) -> Result<Option<Family>> {
    Ok(Some(match item {
        "all" | "point" => Family::all(group),
        "free" | "trivial" => Family::trivial(group),
        "cyclic" => Family::cyclic(group),
        "hyperelementary" => Family::hyperelementary(group),
        _ => {
            if let Some(p) = item.strip_prefix("elementary:") {
                Family::p_elementary(group, prime_arg(p, spec)?)
            } else if let Some(p) = item.strip_prefix("p-hyperelementary:") {
                Family::p_hyperelementary(group, prime_arg(p, spec)?)
            } else {
                return Ok(None);
            }
        }
    }))
}

/// Parse a G-set: comma list of `Class:mult` (or `Class`), or the keywords
/// `point`, `free`, `cyclic`, `elementary:p`, `hyperelementary`,
/// `p-hyperelementary:p`, `all`, each contributing `X(F)`.
pub fn parse_gset(group: &Arc<Group>, spec: &str) -> Result<GSet> {
    let mut orbits = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item {
            "point" => orbits.push(group.whole_class()),
            "free" => orbits.push(group.trivial_class()),
            _ => match keyword_family(group, item, spec)? {
                Some(f) => orbits.extend(f.maximal_classes()),
                None => {
                    let (name, mult) = match item.rsplit_once(':') {
                        Some((n, m)) => (n, m.parse::<usize>().map_err(|_| spec_err(spec, format!("bad multiplicity in `{item}`")))?),
                        None => (item, 1),
                    };
                    let c = group.parse_class(name).ok_or_else(|| spec_err(spec, format!("unknown class `{name}`")))?;
                    orbits.extend(std::iter::repeat_n(c, mult));
                }
            },
        }
    }
    Ok(GSet::from_orbits(group, orbits))
}
