//! Finite groups as multiplication tables, their subgroup lattices and
//! conjugacy classes of subgroups.
//!
//! Conventions used throughout the crate:
//! * conjugation is `H^g = g⁻¹ H g`;
//! * left cosets `gH` are represented by their smallest element;
//! * a subgroup class is represented by the lexicographically smallest
//!   sorted element set among its conjugates, and classes are ordered by
//!   `(order, element set)`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_integer::Integer;
use serde::Serialize;

use crate::config::Caps;
use crate::error::{spec_err, Error, Result};

/// Fixed-size bitset over element indices; hashable key for subgroups.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementSet {
    words: Vec<u64>,
}

impl ElementSet {
    pub fn empty(n: usize) -> Self {
        ElementSet { words: vec![0; n.div_ceil(64).max(1)] }
    }

    pub fn from_elements(n: usize, elems: &[usize]) -> Self {
        let mut s = Self::empty(n);
        for &e in elems {
            s.insert(e);
        }
        s
    }

    pub fn insert(&mut self, e: usize) -> bool {
        let (w, b) = (e / 64, e % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    pub fn contains(&self, e: usize) -> bool {
        self.words[e / 64] & (1 << (e % 64)) != 0
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersect(&self, other: &ElementSet) -> ElementSet {
        ElementSet { words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.count());
        for (w, &word) in self.words.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push(w * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }
}

/// A subgroup, stored as its sorted element indices plus a membership mask.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup {
    elements: Vec<usize>,
    mask: ElementSet,
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subgroup{:?}", self.elements)
    }
}

impl Subgroup {
    fn from_mask(mask: ElementSet) -> Self {
        Subgroup { elements: mask.to_vec(), mask }
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn mask(&self) -> &ElementSet {
        &self.mask
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.mask.contains(e)
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.mask.is_subset(&other.mask)
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }
}

/// One conjugacy class of subgroups.
#[derive(Clone, Debug)]
pub struct SubgroupClass {
    pub index: usize,
    pub representative: Subgroup,
    pub normalizer_order: usize,
    /// Number of conjugates.
    pub size: usize,
    /// Short structural name, disambiguated within the group.
    pub name: String,
    members: Vec<usize>,
}

/// Left cosets `gH` of a class representative.
#[derive(Clone, Debug)]
pub struct CosetTable {
    /// Smallest element of each coset, increasing.
    pub reps: Vec<usize>,
    /// Coset index of each group element.
    pub coset_of: Vec<usize>,
}

/// A conjugacy class of subgroups *inside* a class representative `H`,
/// taken up to `H`-conjugacy.
#[derive(Clone, Debug)]
pub struct LocalClass {
    pub subgroup: Subgroup,
    pub global_class: usize,
}

#[derive(Clone, Debug)]
struct LocalLattice {
    classes: Vec<LocalClass>,
    /// Subgroup of `H` -> (local class, `k ∈ H` with `k⁻¹ L k` canonical).
    lookup: HashMap<ElementSet, (usize, usize)>,
}

#[derive(Debug)]
struct Lattice {
    subgroups: Vec<Subgroup>,
    lookup: HashMap<ElementSet, usize>,
    sub_class: Vec<usize>,
    /// `y` with `y⁻¹ L y` equal to the class representative.
    sub_conj: Vec<usize>,
    classes: Vec<SubgroupClass>,
    le: Vec<Vec<bool>>,
    cosets: Vec<CosetTable>,
    local: Vec<LocalLattice>,
}

/// A finite group given by its full multiplication table.
pub struct Group {
    name: String,
    order: usize,
    mult: Vec<usize>,
    inv: Vec<usize>,
    labels: Vec<String>,
    elem_orders: Vec<usize>,
    lattice: Lattice,
    marks: OnceLock<Vec<Vec<u64>>>,
}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group({}, order {})", self.name, self.order)
    }
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.mult == other.mult && self.labels == other.labels
    }
}

impl Eq for Group {}

/// JSON export of a group.
#[derive(Serialize)]
pub struct GroupExport {
    pub name: String,
    pub order: usize,
    pub identity: usize,
    pub labels: Vec<String>,
    pub table: Vec<Vec<usize>>,
}

/// JSON export of one subgroup class.
#[derive(Serialize)]
pub struct ClassExport {
    pub index: usize,
    pub name: String,
    pub order: usize,
    pub normalizer_order: usize,
    pub conjugates: usize,
    pub representative: Vec<usize>,
}

impl Group {
    /// Validate a table and build the subgroup lattice.
    pub fn from_table(name: &str, mult: Vec<usize>, labels: Vec<String>, caps: &Caps) -> Result<Arc<Group>> {
        let n = labels.len();
        if n == 0 || mult.len() != n * n {
            return Err(Error::NotAGroup("table shape".into()));
        }
        if n > caps.max_order {
            return Err(Error::OrderCap { order: n, cap: caps.max_order });
        }
        if mult.iter().any(|&x| x >= n) {
            return Err(Error::NotAGroup("entry out of range".into()));
        }
        let id = (0..n)
            .find(|&e| (0..n).all(|x| mult[e * n + x] == x && mult[x * n + e] == x))
            .ok_or_else(|| Error::NotAGroup("no identity".into()))?;
        if id != 0 {
            return Err(Error::NotAGroup("identity must be element 0".into()));
        }
        let mut inv = vec![usize::MAX; n];
        for a in 0..n {
            let b = (0..n).find(|&b| mult[a * n + b] == id).ok_or_else(|| Error::NotAGroup(format!("element {a} has no inverse")))?;
            if mult[b * n + a] != id {
                return Err(Error::NotAGroup(format!("one-sided inverse for {a}")));
            }
            inv[a] = b;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = mult[a * n + b];
                for c in 0..n {
                    if mult[ab * n + c] != mult[a * n + mult[b * n + c]] {
                        return Err(Error::NotAGroup(format!("associativity fails at ({a},{b},{c})")));
                    }
                }
            }
        }
        let mut elem_orders = vec![0; n];
        for a in 0..n {
            let (mut x, mut k) = (a, 1);
            while x != id {
                x = mult[x * n + a];
                k += 1;
            }
            elem_orders[a] = k;
        }
        let mut g = Group {
            name: name.to_string(),
            order: n,
            mult,
            inv,
            labels,
            elem_orders,
            lattice: Lattice::placeholder(),
            marks: OnceLock::new(),
        };
        g.lattice = Lattice::build(&g, caps)?;
        Ok(Arc::new(g))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    /// `g⁻¹ a g`.
    #[inline]
    pub fn conj(&self, a: usize, g: usize) -> usize {
        self.mul(self.mul(self.inv[g], a), g)
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn element_order(&self, a: usize) -> usize {
        self.elem_orders[a]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    /// Element by index or by label.
    pub fn parse_element(&self, s: &str) -> Option<usize> {
        let s = s.trim();
        if let Ok(i) = s.parse::<usize>() {
            return (i < self.order).then_some(i);
        }
        self.labels.iter().position(|l| l == s)
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn export(&self) -> GroupExport {
        GroupExport {
            name: self.name.clone(),
            order: self.order,
            identity: 0,
            labels: self.labels.clone(),
            table: (0..self.order).map(|a| (0..self.order).map(|b| self.mul(a, b)).collect()).collect(),
        }
    }

    // Subgroups ---------------------------------------------------------

    pub fn whole(&self) -> Subgroup {
        Subgroup::from_mask(ElementSet::from_elements(self.order, &(0..self.order).collect::<Vec<_>>()))
    }

    pub fn trivial(&self) -> Subgroup {
        Subgroup::from_mask(ElementSet::from_elements(self.order, &[0]))
    }

    /// Subgroup generated by `gens`.
    pub fn closure(&self, gens: &[usize]) -> Subgroup {
        let mut mask = ElementSet::from_elements(self.order, &[0]);
        let mut elems = vec![0];
        let mut i = 0;
        while i < elems.len() {
            let x = elems[i];
            for &s in gens {
                let y = self.mul(x, s);
                if mask.insert(y) {
                    elems.push(y);
                }
            }
            i += 1;
        }
        Subgroup::from_mask(mask)
    }

    /// Subgroup from an element list, if it is one.
    pub fn subgroup_from_elements(&self, elems: &[usize]) -> Option<Subgroup> {
        if elems.iter().any(|&e| e >= self.order) {
            return None;
        }
        let mask = ElementSet::from_elements(self.order, elems);
        if !mask.contains(0) {
            return None;
        }
        let list = mask.to_vec();
        for &a in &list {
            if !mask.contains(self.inv(a)) {
                return None;
            }
            for &b in &list {
                if !mask.contains(self.mul(a, b)) {
                    return None;
                }
            }
        }
        Some(Subgroup::from_mask(mask))
    }

    /// `g⁻¹ H g`.
    pub fn conjugate(&self, h: &Subgroup, g: usize) -> Subgroup {
        let mut mask = ElementSet::empty(self.order);
        for &x in &h.elements {
            mask.insert(self.conj(x, g));
        }
        Subgroup::from_mask(mask)
    }

    pub fn intersection(&self, a: &Subgroup, b: &Subgroup) -> Subgroup {
        Subgroup::from_mask(a.mask.intersect(&b.mask))
    }

    pub fn normalizer(&self, h: &Subgroup) -> Vec<usize> {
        (0..self.order).filter(|&g| h.elements.iter().all(|&x| h.contains(self.conj(x, g)))).collect()
    }

    pub fn is_normal_in(&self, n: &Subgroup, h: &Subgroup) -> bool {
        n.is_subgroup_of(h) && h.elements.iter().all(|&g| n.elements.iter().all(|&x| n.contains(self.conj(x, g))))
    }

    pub fn is_cyclic(&self, h: &Subgroup) -> bool {
        h.elements.iter().any(|&x| self.elem_orders[x] == h.order())
    }

    pub fn is_subgroup_abelian(&self, h: &Subgroup) -> bool {
        h.elements.iter().all(|&a| h.elements.iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn center(&self, h: &Subgroup) -> Subgroup {
        let z: Vec<usize> =
            h.elements.iter().copied().filter(|&a| h.elements.iter().all(|&b| self.mul(a, b) == self.mul(b, a))).collect();
        Subgroup::from_mask(ElementSet::from_elements(self.order, &z))
    }

    // Lattice -----------------------------------------------------------

    /// All conjugacy classes, in canonical order.
    pub fn subgroup_classes(&self) -> &[SubgroupClass] {
        &self.lattice.classes
    }

    pub fn class(&self, c: usize) -> &SubgroupClass {
        &self.lattice.classes[c]
    }

    pub fn class_count(&self) -> usize {
        self.lattice.classes.len()
    }

    pub fn rep(&self, c: usize) -> &Subgroup {
        &self.lattice.classes[c].representative
    }

    pub fn class_order(&self, c: usize) -> usize {
        self.rep(c).order()
    }

    /// Index of the class of the whole group (always the last one).
    pub fn whole_class(&self) -> usize {
        self.lattice.classes.len() - 1
    }

    pub fn trivial_class(&self) -> usize {
        0
    }

    pub fn all_subgroups(&self) -> &[Subgroup] {
        &self.lattice.subgroups
    }

    /// Class of `l` and `y` with `y⁻¹ l y` equal to the representative.
    pub fn class_of(&self, l: &Subgroup) -> (usize, usize) {
        self.class_of_mask(&l.mask)
    }

    pub fn class_of_mask(&self, mask: &ElementSet) -> (usize, usize) {
        let i = *self.lattice.lookup.get(mask).expect("not a subgroup of this group");
        (self.lattice.sub_class[i], self.lattice.sub_conj[i])
    }

    /// Conjugates of class `c`, as subgroups.
    pub fn class_members(&self, c: usize) -> impl Iterator<Item = &Subgroup> {
        self.lattice.classes[c].members.iter().map(|&i| &self.lattice.subgroups[i])
    }

    /// Is some conjugate of class `c` contained in the representative of `d`?
    pub fn class_le(&self, c: usize, d: usize) -> bool {
        self.lattice.le[c][d]
    }

    pub fn cosets(&self, c: usize) -> &CosetTable {
        &self.lattice.cosets[c]
    }

    /// Index of `[G : H_c]`.
    pub fn class_index(&self, c: usize) -> usize {
        self.order / self.class_order(c)
    }

    /// `x · (coset i of H_c)`.
    #[inline]
    pub fn act_on_coset(&self, c: usize, x: usize, coset: usize) -> usize {
        let t = &self.lattice.cosets[c];
        t.coset_of[self.mul(x, t.reps[coset])]
    }

    /// Classes of subgroups of the representative of `c`, up to conjugacy
    /// inside it.
    pub fn local_classes(&self, c: usize) -> &[LocalClass] {
        &self.lattice.local[c].classes
    }

    /// For a subgroup `l` of the representative `H` of `c`: its local class
    /// and `k ∈ H` with `k⁻¹ l k` the canonical local representative.
    pub fn local_class_of(&self, c: usize, l: &ElementSet) -> (usize, usize) {
        *self.lattice.local[c].lookup.get(l).expect("not a subgroup of the class representative")
    }

    /// Index of the local class `H` itself inside `H`.
    pub fn local_top(&self, c: usize) -> usize {
        self.lattice.local[c].classes.len() - 1
    }

    pub fn class_export(&self) -> Vec<ClassExport> {
        self.lattice
            .classes
            .iter()
            .map(|c| ClassExport {
                index: c.index,
                name: c.name.clone(),
                order: c.representative.order(),
                normalizer_order: c.normalizer_order,
                conjugates: c.size,
                representative: c.representative.elements.clone(),
            })
            .collect()
    }

    /// Class by name (see [`SubgroupClass::name`]) or `#index`.
    pub fn parse_class(&self, s: &str) -> Option<usize> {
        let s = s.trim();
        if let Some(i) = s.strip_prefix('#') {
            return i.parse().ok().filter(|&i| i < self.class_count());
        }
        self.lattice.classes.iter().position(|c| c.name == s)
    }

    pub(crate) fn marks_cache(&self) -> &OnceLock<Vec<Vec<u64>>> {
        &self.marks
    }

    // p-local structure -------------------------------------------------

    /// `O^p(H)`: the subgroup generated by the elements of order prime to
    /// `p`, which is the smallest normal subgroup with p-group quotient.
    pub fn o_p(&self, h: &Subgroup, p: u64) -> Subgroup {
        let gens: Vec<usize> =
            h.elements.iter().copied().filter(|&x| (self.elem_orders[x] as u64).gcd(&p) == 1).collect();
        self.closure(&gens)
    }

    /// `H` has a normal cyclic subgroup of order prime to `p` with p-group
    /// quotient. Such a subgroup must be `O^p(H)`.
    pub fn is_p_hyperelementary(&self, h: &Subgroup, p: u64) -> bool {
        let c = self.o_p(h, p);
        (c.order() as u64).gcd(&p) == 1 && self.is_cyclic(&c)
    }

    pub fn is_hyperelementary(&self, h: &Subgroup) -> bool {
        if h.is_trivial() {
            return true;
        }
        crate::zlocal::prime_factors(&(h.order() as u64).into()).into_iter().any(|p| self.is_p_hyperelementary(h, p))
    }

    /// Direct product of a cyclic p'-group and a p-group.
    pub fn is_p_elementary(&self, h: &Subgroup, p: u64) -> bool {
        if !self.is_p_hyperelementary(h, p) {
            return false;
        }
        let c = self.o_p(h, p);
        c.elements.iter().all(|&a| h.elements.iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn is_p_group(&self, h: &Subgroup, p: u64) -> bool {
        is_power_of(h.order() as u64, p)
    }
}

pub(crate) fn is_power_of(mut n: u64, p: u64) -> bool {
    while n > 1 && n.is_multiple_of(p) {
        n /= p;
    }
    n == 1
}

impl Lattice {
    fn placeholder() -> Self {
        Lattice {
            subgroups: Vec::new(),
            lookup: HashMap::new(),
            sub_class: Vec::new(),
            sub_conj: Vec::new(),
            classes: Vec::new(),
            le: Vec::new(),
            cosets: Vec::new(),
            local: Vec::new(),
        }
    }

    fn build(g: &Group, caps: &Caps) -> Result<Self> {
        let n = g.order;
        // Layered generation: extend each subgroup by one cyclic subgroup.
        let mut cyclic: Vec<(usize, ElementSet)> = Vec::new();
        let mut seen_cyclic: HashMap<ElementSet, ()> = HashMap::new();
        for x in 0..n {
            let c = g.closure(&[x]);
            if seen_cyclic.insert(c.mask.clone(), ()).is_none() {
                cyclic.push((x, c.mask));
            }
        }
        let mut subgroups: Vec<(Subgroup, Vec<usize>)> = vec![(g.trivial(), Vec::new())];
        let mut lookup: HashMap<ElementSet, usize> = HashMap::new();
        lookup.insert(subgroups[0].0.mask.clone(), 0);
        let mut queue: VecDeque<usize> = VecDeque::from([0]);
        while let Some(i) = queue.pop_front() {
            let (h, gens) = subgroups[i].clone();
            for (x, cmask) in &cyclic {
                if cmask.is_subset(&h.mask) {
                    continue;
                }
                let mut ngens = gens.clone();
                ngens.push(*x);
                let j = g.closure(&ngens);
                if !lookup.contains_key(&j.mask) {
                    if subgroups.len() >= caps.max_subgroups {
                        return Err(Error::SubgroupCap { cap: caps.max_subgroups });
                    }
                    lookup.insert(j.mask.clone(), subgroups.len());
                    queue.push_back(subgroups.len());
                    subgroups.push((j, ngens));
                }
            }
        }
        let raw: Vec<Subgroup> = subgroups.into_iter().map(|(s, _)| s).collect();

        // Conjugacy classes.
        let mut class_of_raw = vec![usize::MAX; raw.len()];
        let mut groups: Vec<(Subgroup, Vec<usize>)> = Vec::new();
        for i in 0..raw.len() {
            if class_of_raw[i] != usize::MAX {
                continue;
            }
            let mut members: Vec<usize> = Vec::new();
            for y in 0..n {
                let c = g.conjugate(&raw[i], y);
                let j = lookup[&c.mask];
                if class_of_raw[j] == usize::MAX {
                    class_of_raw[j] = groups.len();
                    members.push(j);
                }
            }
            let rep = members.iter().map(|&j| raw[j].clone()).min_by(|a, b| a.elements.cmp(&b.elements)).unwrap();
            groups.push((rep, members));
        }
        let mut order: Vec<usize> = (0..groups.len()).collect();
        order.sort_by(|&a, &b| {
            let (ra, rb) = (&groups[a].0, &groups[b].0);
            (ra.order(), &ra.elements).cmp(&(rb.order(), &rb.elements))
        });

        let mut subgroups_sorted: Vec<Subgroup> = Vec::with_capacity(raw.len());
        let mut sub_class = Vec::with_capacity(raw.len());
        let mut classes: Vec<SubgroupClass> = Vec::with_capacity(groups.len());
        for (ci, &gi) in order.iter().enumerate() {
            let (rep, members) = &groups[gi];
            let mut ms: Vec<&Subgroup> = members.iter().map(|&j| &raw[j]).collect();
            ms.sort_by(|a, b| a.elements.cmp(&b.elements));
            let mut idx = Vec::new();
            for m in ms {
                idx.push(subgroups_sorted.len());
                subgroups_sorted.push(m.clone());
                sub_class.push(ci);
            }
            classes.push(SubgroupClass {
                index: ci,
                representative: rep.clone(),
                normalizer_order: n / members.len(),
                size: members.len(),
                name: String::new(),
                members: idx,
            });
        }
        let lookup: HashMap<ElementSet, usize> =
            subgroups_sorted.iter().enumerate().map(|(i, s)| (s.mask.clone(), i)).collect();
        let sub_conj: Vec<usize> = subgroups_sorted
            .iter()
            .zip(&sub_class)
            .map(|(l, &c)| {
                let rep = &classes[c].representative;
                (0..n).find(|&y| l.elements.iter().all(|&x| rep.contains(g.conj(x, y)))).unwrap()
            })
            .collect();

        let k = classes.len();
        let mut le = vec![vec![false; k]; k];
        for (d, cls) in classes.iter().enumerate() {
            for (s, &c) in subgroups_sorted.iter().zip(&sub_class) {
                if s.is_subgroup_of(&cls.representative) {
                    le[c][d] = true;
                }
            }
        }

        let cosets = classes
            .iter()
            .map(|cls| {
                let h = &cls.representative;
                let mut coset_of = vec![usize::MAX; n];
                let mut reps = Vec::new();
                for x in 0..n {
                    if coset_of[x] != usize::MAX {
                        continue;
                    }
                    for &y in &h.elements {
                        coset_of[g.mul(x, y)] = reps.len();
                    }
                    reps.push(x);
                }
                CosetTable { reps, coset_of }
            })
            .collect();

        let local = classes
            .iter()
            .map(|cls| {
                let h = &cls.representative;
                let subs: Vec<usize> = (0..subgroups_sorted.len()).filter(|&i| subgroups_sorted[i].is_subgroup_of(h)).collect();
                let mut canon_of: HashMap<ElementSet, (Subgroup, usize)> = HashMap::new();
                for &i in &subs {
                    let l = &subgroups_sorted[i];
                    let mut best: Option<(Subgroup, usize)> = None;
                    for &kk in &h.elements {
                        let c = g.conjugate(l, kk);
                        if best.as_ref().is_none_or(|(b, _)| c.elements < b.elements) {
                            best = Some((c, kk));
                        }
                    }
                    canon_of.insert(l.mask.clone(), best.unwrap());
                }
                let mut reps: Vec<Subgroup> = Vec::new();
                for (c, _) in canon_of.values() {
                    if !reps.contains(c) {
                        reps.push(c.clone());
                    }
                }
                reps.sort_by(|a, b| (a.order(), &a.elements).cmp(&(b.order(), &b.elements)));
                let classes_local: Vec<LocalClass> = reps
                    .iter()
                    .map(|s| LocalClass { subgroup: s.clone(), global_class: sub_class[lookup[&s.mask]] })
                    .collect();
                let lookup_local = canon_of
                    .into_iter()
                    .map(|(m, (c, kk))| {
                        let li = reps.iter().position(|r| *r == c).unwrap();
                        (m, (li, kk))
                    })
                    .collect();
                LocalLattice { classes: classes_local, lookup: lookup_local }
            })
            .collect();

        let mut lat = Lattice { subgroups: subgroups_sorted, lookup, sub_class, sub_conj, classes, le, cosets, local };
        lat.assign_names(g);
        Ok(lat)
    }

    fn assign_names(&mut self, g: &Group) {
        let base: Vec<String> = self.classes.iter().map(|c| structure_name(g, &c.representative)).collect();
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for b in &base {
            *counts.entry(b.as_str()).or_default() += 1;
        }
        let mut used: HashMap<&str, usize> = HashMap::new();
        let names: Vec<String> = base
            .iter()
            .map(|b| {
                if counts[b.as_str()] == 1 {
                    b.clone()
                } else {
                    let k = used.entry(b.as_str()).or_default();
                    *k += 1;
                    format!("{b}{}", suffix(*k))
                }
            })
            .collect();
        for (c, name) in self.classes.iter_mut().zip(names) {
            c.name = name;
        }
    }
}

fn suffix(k: usize) -> String {
    // a, b, ..., z, aa, ab, ...
    let mut k = k;
    let mut s = Vec::new();
    while k > 0 {
        k -= 1;
        s.push((b'a' + (k % 26) as u8) as char);
        k /= 26;
    }
    s.iter().rev().collect()
}

/// Best-effort isomorphism-type name used only for labelling classes.
fn structure_name(g: &Group, h: &Subgroup) -> String {
    let n = h.order();
    if n == 1 {
        return "e".into();
    }
    if g.is_cyclic(h) {
        return format!("C{n}");
    }
    if g.is_subgroup_abelian(h) {
        let inv = abelian_invariants(g, h);
        if inv == [2, 2] {
            return "V4".into();
        }
        return inv.iter().map(|d| format!("C{d}")).collect::<Vec<_>>().join("x");
    }
    if is_dihedral(g, h) {
        return if n == 6 { "S3".into() } else { format!("D{}", n / 2) };
    }
    let orders: Vec<usize> = h.elements.iter().map(|&x| g.element_order(x)).collect();
    let involutions = orders.iter().filter(|&&o| o == 2).count();
    let trivial_center = g.center(h).is_trivial();
    match n {
        8 if involutions == 1 => "Q8".into(),
        12 if trivial_center => "A4".into(),
        24 if trivial_center => "S4".into(),
        60 if orders.iter().all(|o| [1, 2, 3, 5].contains(o)) => "A5".into(),
        120 if trivial_center && orders.contains(&6) && orders.contains(&4) => "S5".into(),
        _ => format!("G{n}"),
    }
}

fn is_dihedral(g: &Group, h: &Subgroup) -> bool {
    let n = h.order();
    if n < 6 || n % 2 == 1 {
        return false;
    }
    let half = n / 2;
    h.elements.iter().filter(|&&r| g.element_order(r) == half).any(|&r| {
        let c = g.closure(&[r]);
        h.elements.iter().any(|&s| !c.contains(s) && g.element_order(s) == 2 && g.conj(r, s) == g.inv(r))
    })
}

/// Invariant factors `d_1 | d_2 | ...` of an abelian subgroup.
fn abelian_invariants(g: &Group, h: &Subgroup) -> Vec<usize> {
    let n = h.order() as u64;
    let mut per_prime: Vec<Vec<usize>> = Vec::new();
    for p in crate::zlocal::prime_factors(&n.into()) {
        // counts[k] = #{x : x^(p^k) = 1}
        let mut exps = Vec::new();
        let mut prev = 1usize;
        let mut pk = 1usize;
        loop {
            pk *= p as usize;
            let cnt = h.elements.iter().filter(|&&x| pk.is_multiple_of(g.element_order(x))).count();
            if cnt == prev {
                break;
            }
            let mut ratio = cnt / prev;
            let mut e = 0;
            while ratio > 1 {
                ratio /= p as usize;
                e += 1;
            }
            exps.push(e);
            prev = cnt;
        }
        // exps[k] = number of cyclic factors of order >= p^(k+1)
        let factors = exps.first().copied().unwrap_or(0);
        let mut powers = vec![1usize; factors];
        for e in exps {
            for pw in powers.iter_mut().take(e) {
                *pw *= p as usize;
            }
        }
        per_prime.push(powers);
    }
    let len = per_prime.iter().map(Vec::len).max().unwrap_or(0);
    let mut inv = vec![1usize; len];
    for powers in per_prime {
        // powers is decreasing; align with the largest factors at the end.
        for (i, pw) in powers.iter().enumerate() {
            inv[len - 1 - i] *= pw;
        }
    }
    inv
}

// Specs -----------------------------------------------------------------

/// A permutation on `0..n`, stored as images.
type Perm = Vec<usize>;

fn compose(a: &Perm, b: &Perm) -> Perm {
    // (a ∘ b)(i) = a(b(i))
    b.iter().map(|&i| a[i]).collect()
}

fn cycle_label(p: &Perm) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        let mut cyc = vec![start + 1];
        seen[start] = true;
        let mut x = p[start];
        while x != start {
            seen[x] = true;
            cyc.push(x + 1);
            x = p[x];
        }
        out.push('(');
        out.push_str(&cyc.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
        out.push(')');
    }
    if out.is_empty() { "()".into() } else { out }
}

fn parse_cycles(s: &str, spec: &str) -> Result<Vec<Vec<usize>>> {
    let mut cycles = Vec::new();
    let mut rest = s.trim();
    if rest.is_empty() || rest == "()" {
        return Ok(cycles);
    }
    while !rest.is_empty() {
        let open = rest.strip_prefix('(').ok_or_else(|| spec_err(spec, "expected `(`"))?;
        let close = open.find(')').ok_or_else(|| spec_err(spec, "unbalanced parenthesis"))?;
        let body = &open[..close];
        let points: Vec<usize> = body
            .split([' ', ','])
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|_| spec_err(spec, format!("bad point `{t}`"))))
            .collect::<Result<_>>()?;
        if points.contains(&0) {
            return Err(spec_err(spec, "points are numbered from 1"));
        }
        let mut uniq = points.clone();
        uniq.sort_unstable();
        uniq.dedup();
        if uniq.len() != points.len() {
            return Err(spec_err(spec, "repeated point in a cycle"));
        }
        cycles.push(points);
        rest = open[close + 1..].trim_start();
    }
    Ok(cycles)
}

fn perm_from_cycles(cycles: &[Vec<usize>], degree: usize) -> Perm {
    let mut p: Perm = (0..degree).collect();
    // Cycles compose right to left, as usual.
    for cyc in cycles.iter().rev() {
        let mut c: Perm = (0..degree).collect();
        for (i, &x) in cyc.iter().enumerate() {
            c[x - 1] = cyc[(i + 1) % cyc.len()] - 1;
        }
        p = compose(&c, &p);
    }
    p
}

/// Close permutation generators into a group. Elements are sorted by their
/// image tuples, so the identity comes first and the order does not depend
/// on how the generators are listed.
pub fn group_from_permutations(name: &str, gens: &[Perm], degree: usize, caps: &Caps) -> Result<Arc<Group>> {
    let id: Perm = (0..degree).collect();
    let mut all: HashMap<Perm, ()> = HashMap::new();
    all.insert(id.clone(), ());
    let mut list = vec![id];
    let mut i = 0;
    while i < list.len() {
        for s in gens {
            let y = compose(&list[i], s);
            if !all.contains_key(&y) {
                if list.len() >= caps.max_order {
                    return Err(Error::OrderCap { order: list.len() + 1, cap: caps.max_order });
                }
                all.insert(y.clone(), ());
                list.push(y);
            }
        }
        i += 1;
    }
    list.sort();
    let index: HashMap<&Perm, usize> = list.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let n = list.len();
    let mut mult = vec![0; n * n];
    for a in 0..n {
        for b in 0..n {
            mult[a * n + b] = index[&compose(&list[a], &list[b])];
        }
    }
    let labels = list.iter().map(cycle_label).collect();
    Group::from_table(name, mult, labels, caps)
}

fn quaternion_group(caps: &Caps) -> Result<Arc<Group>> {
    // Elements (sign, unit) with unit in {1, i, j, k}.
    let labels: Vec<String> = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"].iter().map(|s| s.to_string()).collect();
    let unit_mul = |a: usize, b: usize| -> (bool, usize) {
        // returns (negate, unit) for units 0=1,1=i,2=j,3=k
        match (a, b) {
            (0, x) | (x, 0) => (false, x),
            (x, y) if x == y => (true, 0),
            (1, 2) => (false, 3),
            (2, 1) => (true, 3),
            (2, 3) => (false, 1),
            (3, 2) => (true, 1),
            (3, 1) => (false, 2),
            (1, 3) => (true, 2),
            _ => unreachable!(),
        }
    };
    let mut mult = vec![0; 64];
    for a in 0..8 {
        for b in 0..8 {
            let (sa, ua) = (a % 2 == 1, a / 2);
            let (sb, ub) = (b % 2 == 1, b / 2);
            let (neg, u) = unit_mul(ua, ub);
            let sign = sa ^ sb ^ neg;
            mult[a * 8 + b] = 2 * u + usize::from(sign);
        }
    }
    Group::from_table("Q8", mult, labels, caps)
}

fn cycle(points: std::ops::RangeInclusive<usize>) -> Vec<usize> {
    points.collect()
}

/// Parse a catalog name or a `;`-separated list of permutations in cycle
/// notation. Catalog: `Cn`, `Dn` (dihedral of order 2n), `Q8`, `Sn`, `An`
/// for n ≤ 5, and `E_p^k` (elementary abelian of order p^k).
pub fn group_from_spec(spec: &str) -> Result<Arc<Group>> {
    group_from_spec_with_caps(spec, &Caps::from_env())
}

pub fn group_from_spec_with_caps(spec: &str, caps: &Caps) -> Result<Arc<Group>> {
    let s = spec.trim();
    if s.starts_with('(') {
        let mut cyc_lists = Vec::new();
        for part in s.split(';') {
            cyc_lists.push(parse_cycles(part, spec)?);
        }
        let degree = cyc_lists.iter().flatten().flatten().copied().max().unwrap_or(1);
        let gens: Vec<Perm> = cyc_lists.iter().map(|c| perm_from_cycles(c, degree)).collect();
        return group_from_permutations(s, &gens, degree, caps);
    }
    let num = |prefix: &str| -> Option<usize> { s.strip_prefix(prefix).and_then(|r| r.parse().ok()) };
    if s == "Q8" {
        return quaternion_group(caps);
    }
    if let Some(rest) = s.strip_prefix('E') {
        let rest = rest.strip_prefix('_').unwrap_or(rest);
        let (p, k) = rest.split_once('^').ok_or_else(|| spec_err(spec, "expected E_p^k"))?;
        let p: usize = p.parse().map_err(|_| spec_err(spec, "bad prime"))?;
        let k: usize = k.parse().map_err(|_| spec_err(spec, "bad exponent"))?;
        if !crate::zlocal::is_prime(p as u64) {
            return Err(spec_err(spec, "p must be prime"));
        }
        if k == 0 {
            return Err(spec_err(spec, "k must be positive"));
        }
        let order = (p as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        if order > caps.max_order as u128 {
            return Err(Error::OrderCap { order: order.min(usize::MAX as u128) as usize, cap: caps.max_order });
        }
        let gens: Vec<Perm> = (0..k).map(|i| perm_from_cycles(&[cycle(i * p + 1..=i * p + p)], p * k)).collect();
        return group_from_permutations(s, &gens, p * k, caps);
    }
    if let Some(n) = num("C") {
        if n == 0 {
            return Err(spec_err(spec, "order must be positive"));
        }
        if n > caps.max_order {
            return Err(Error::OrderCap { order: n, cap: caps.max_order });
        }
        let gens = vec![perm_from_cycles(&[cycle(1..=n)], n)];
        return group_from_permutations(s, &gens, n, caps);
    }
    if let Some(n) = num("D") {
        if n == 0 {
            return Err(spec_err(spec, "n must be positive"));
        }
        if 2 * n > caps.max_order {
            return Err(Error::OrderCap { order: 2 * n, cap: caps.max_order });
        }
        let gens = match n {
            1 => vec![perm_from_cycles(&[vec![1, 2]], 2)],
            2 => vec![perm_from_cycles(&[vec![1, 2]], 4), perm_from_cycles(&[vec![3, 4]], 4)],
            _ => {
                let rot = perm_from_cycles(&[cycle(1..=n)], n);
                let refl: Vec<Vec<usize>> = (1..=n / 2).filter(|&i| i != n + 1 - i).map(|i| vec![i, n + 1 - i]).collect();
                vec![rot, perm_from_cycles(&refl, n)]
            }
        };
        let degree = gens[0].len();
        return group_from_permutations(s, &gens, degree, caps);
    }
    if let Some(n) = num("S") {
        if n == 0 || n > 5 {
            return Err(spec_err(spec, "Sn is catalogued for 1 ≤ n ≤ 5"));
        }
        let gens = if n == 1 {
            vec![vec![0]]
        } else {
            vec![perm_from_cycles(&[vec![1, 2]], n), perm_from_cycles(&[cycle(1..=n)], n)]
        };
        return group_from_permutations(s, &gens, n, caps);
    }
    if let Some(n) = num("A") {
        if n == 0 || n > 5 {
            return Err(spec_err(spec, "An is catalogued for 1 ≤ n ≤ 5"));
        }
        let gens: Vec<Perm> =
            if n < 3 { vec![(0..n).collect()] } else { (3..=n).map(|k| perm_from_cycles(&[vec![1, 2, k]], n)).collect() };
        return group_from_permutations(s, &gens, n, caps);
    }
    Err(spec_err(spec, "unknown group; expected Cn, Dn, Q8, Sn, An, E_p^k or permutation generators"))
}

/// Every catalog group of order at most `max_order`, smallest parameters
/// first.
pub fn catalog_specs(max_order: usize) -> Vec<String> {
    let mut out = Vec::new();
    for n in 1..=max_order {
        out.push(format!("C{n}"));
    }
    for n in 1..=max_order / 2 {
        out.push(format!("D{n}"));
    }
    if max_order >= 8 {
        out.push("Q8".into());
    }
    let fact = [1usize, 1, 2, 6, 24, 120];
    for n in 1..=5 {
        if fact[n] <= max_order {
            out.push(format!("S{n}"));
        }
        if fact[n].div_ceil(2).max(1) <= max_order {
            out.push(format!("A{n}"));
        }
    }
    for p in 2..=max_order as u64 {
        if !crate::zlocal::is_prime(p) {
            continue;
        }
        let mut k = 1;
        while (p as usize).pow(k) <= max_order {
            out.push(format!("E_{p}^{k}"));
            k += 1;
        }
    }
    out
}
