//! Tabulated Mackey functors, pre-functors and Green rings.
//!
//! A functor is stored on transitive G-sets only: a value `M(G/H)` per
//! subgroup class, the induction/restriction pair for each inclusion
//! `G/L -> G/K` of a local class representative `L ≤ K`, and the
//! conjugation `(c_x)_*` for `x ∈ N(H)`, where `c_x(eH) = xH`. A general
//! map `G/H -> G/K`, `eH ↦ gK`, factors as an inclusion after a
//! conjugation; maps between arbitrary G-sets are assembled orbitwise.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::burnside::{self, BurnsideElement};
use crate::error::{spec_err, Error, Result};
use crate::group::{ElementSet, Group};
use crate::gset::{canonical_rep, transitive_maps, GMap, GSet};
use crate::zlocal::{self, cokernel, AbelianInvariants, IntMatrix, Lattice};

// Presentations -----------------------------------------------------------

/// `Z^gens / span(relations)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbGroupPresentation {
    gens: usize,
    relations: IntMatrix,
}

#[derive(Serialize)]
pub struct PresentationExport {
    pub generators: usize,
    pub relations: Vec<Vec<String>>,
    pub free_rank: usize,
    pub torsion: Vec<String>,
}

impl AbGroupPresentation {
    pub fn free(n: usize) -> Self {
        AbGroupPresentation { gens: n, relations: IntMatrix::zeros(n, 0) }
    }

    pub fn new(gens: usize, relations: IntMatrix) -> Result<Self> {
        if relations.rows() != gens {
            return Err(Error::Shape(format!("relation matrix has {} rows, expected {gens}", relations.rows())));
        }
        Ok(AbGroupPresentation { gens, relations })
    }

    pub fn gens(&self) -> usize {
        self.gens
    }

    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    pub fn is_free(&self) -> bool {
        self.relations.is_zero()
    }

    pub fn invariants(&self) -> AbelianInvariants {
        cokernel(&self.relations)
    }

    pub fn relation_lattice(&self) -> Lattice {
        Lattice::span(&self.relations)
    }

    pub fn direct_sum(parts: &[&AbGroupPresentation]) -> Self {
        let blocks: Vec<IntMatrix> = parts.iter().map(|p| p.relations.clone()).collect();
        let gens = parts.iter().map(|p| p.gens).sum();
        AbGroupPresentation { gens, relations: IntMatrix::block_diag(&blocks) }
    }

    pub fn export(&self) -> PresentationExport {
        let inv = self.invariants();
        PresentationExport {
            generators: self.gens,
            relations: self.relations.transpose().to_string_rows(),
            free_rank: inv.free_rank,
            torsion: inv.torsion.iter().map(|t| t.to_string()).collect(),
        }
    }
}

impl fmt::Display for AbGroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.invariants())
    }
}

// Tabulated functors --------------------------------------------------------

/// Induction and restriction along `G/R -> G/K`, `eR ↦ element·K`, whose
/// image stabilizer is the local class representative.
#[derive(Clone, Debug)]
pub struct Inclusion {
    pub class: usize,
    pub element: usize,
    pub ind: IntMatrix,
    pub res: IntMatrix,
}

/// Covariant and contravariant matrices of one transitive map.
#[derive(Clone, Debug)]
pub struct TransitiveMaps {
    pub lower: IntMatrix,
    pub upper: IntMatrix,
}

pub struct MackeyData {
    group: Arc<Group>,
    name: String,
    values: Vec<AbGroupPresentation>,
    inclusions: Vec<Vec<Inclusion>>,
    con: Vec<BTreeMap<usize, IntMatrix>>,
    pre_only: bool,
    relation_lattices: Vec<OnceLock<Lattice>>,
    local_actions: Vec<OnceLock<Vec<IntMatrix>>>,
    verdict: OnceLock<std::result::Result<(), String>>,
    maps: RwLock<HashMap<(usize, usize, usize), Arc<TransitiveMaps>>>,
}

impl fmt::Debug for MackeyData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MackeyData({} on {})", self.name, self.group.name())
    }
}

/// `(class of L, y⁻¹)` for the local class `ℓ` of `K`, where `y⁻¹ L y` is
/// the global representative.
pub fn inclusion_data(g: &Group, k: usize, l: usize) -> (usize, usize) {
    let lc = &g.local_classes(k)[l];
    let (r, y) = g.class_of(&lc.subgroup);
    (r, g.inv(y))
}

/// Smallest element of each coset of `H` in `N(H)`.
pub fn normalizer_cosets(g: &Group, h: usize) -> Vec<usize> {
    g.normalizer(g.rep(h)).into_iter().filter(|&x| canonical_rep(g, h, x) == x).collect()
}

impl MackeyData {
    /// Assemble and shape-check tabulated data. `con[h]` must contain at
    /// least the smallest element of every coset of `H` in `N(H)`.
    pub fn new(
        group: &Arc<Group>,
        name: impl Into<String>,
        values: Vec<AbGroupPresentation>,
        inclusions: Vec<Vec<Inclusion>>,
        con: Vec<BTreeMap<usize, IntMatrix>>,
        pre_only: bool,
    ) -> Result<Self> {
        let g = group;
        let n = g.class_count();
        if values.len() != n || inclusions.len() != n || con.len() != n {
            return Err(Error::Shape("one value, inclusion list and conjugation table per class".into()));
        }
        for k in 0..n {
            let locals = g.local_classes(k);
            if inclusions[k].len() != locals.len() {
                return Err(Error::Shape(format!("class {k}: one inclusion per local class")));
            }
            for (l, inc) in inclusions[k].iter().enumerate() {
                let (r, el) = inclusion_data(g, k, l);
                if inc.class != r || inc.element != el {
                    return Err(Error::Shape(format!("class {k}, local {l}: inclusion data is not canonical")));
                }
                if inc.ind.shape() != (values[k].gens, values[r].gens) || inc.res.shape() != (values[r].gens, values[k].gens) {
                    return Err(Error::Shape(format!("class {k}, local {l}: matrix shapes do not match values")));
                }
            }
            for &x in &normalizer_cosets(g, k) {
                if !con[k].contains_key(&x) {
                    return Err(Error::Shape(format!("class {k}: missing conjugation by {}", g.label(x))));
                }
            }
            let rep = g.rep(k);
            for (&x, m) in &con[k] {
                let normal = rep.elements().iter().all(|&a| rep.contains(g.conj(a, x)));
                if !normal {
                    return Err(Error::Shape(format!("class {k}: {} does not normalize", g.label(x))));
                }
                if m.shape() != (values[k].gens, values[k].gens) {
                    return Err(Error::Shape(format!("class {k}: conjugation matrix shape")));
                }
            }
        }
        Ok(MackeyData {
            group: group.clone(),
            name: name.into(),
            values,
            inclusions,
            con,
            pre_only,
            relation_lattices: (0..n).map(|_| OnceLock::new()).collect(),
            local_actions: (0..n).map(|_| OnceLock::new()).collect(),
            verdict: OnceLock::new(),
            maps: RwLock::new(HashMap::new()),
        })
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Declared as a pre-functor only (axioms not expected to hold).
    pub fn is_pre_only(&self) -> bool {
        self.pre_only
    }

    pub fn value(&self, c: usize) -> &AbGroupPresentation {
        &self.values[c]
    }

    pub fn values(&self) -> &[AbGroupPresentation] {
        &self.values
    }

    pub fn inclusion(&self, k: usize, l: usize) -> &Inclusion {
        &self.inclusions[k][l]
    }

    pub fn inclusions(&self, k: usize) -> &[Inclusion] {
        &self.inclusions[k]
    }

    pub fn conjugations(&self, h: usize) -> &BTreeMap<usize, IntMatrix> {
        &self.con[h]
    }

    /// `(c_x)_*` on `M(G/H)` for `x ∈ N(H)`.
    pub fn conjugation(&self, h: usize, x: usize) -> &IntMatrix {
        self.con[h].get(&x).or_else(|| self.con[h].get(&canonical_rep(&self.group, h, x))).expect("element normalizes H")
    }

    pub fn relation_lattice(&self, c: usize) -> &Lattice {
        self.relation_lattices[c].get_or_init(|| self.values[c].relation_lattice())
    }

    pub fn all_free(&self) -> bool {
        self.values.iter().all(AbGroupPresentation::is_free)
    }

    /// Columns of `a - b` vanish in `M(G/H_c)`.
    pub fn equal_in(&self, c: usize, a: &IntMatrix, b: &IntMatrix) -> bool {
        if a == b {
            return true;
        }
        if self.values[c].is_free() {
            return false;
        }
        let lat = self.relation_lattice(c);
        a.sub(b).columns().iter().all(|v| lat.contains(v))
    }

    pub fn vector_vanishes(&self, c: usize, v: &[BigInt]) -> bool {
        v.iter().all(Zero::is_zero) || (!self.values[c].is_free() && self.relation_lattice(c).contains(v))
    }

    /// Local class of `el⁻¹ H el` in `K` and `n ∈ N(H)` with
    /// `f_el = ι_ℓ ∘ c_n`.
    pub fn factor(&self, h: usize, k: usize, el: usize) -> (usize, usize) {
        let g = &self.group;
        let l: Vec<usize> = g.rep(h).elements().iter().map(|&a| g.conj(a, el)).collect();
        let (ell, kk) = g.local_class_of(k, &ElementSet::from_elements(g.order(), &l));
        let inc = &self.inclusions[k][ell];
        debug_assert_eq!(inc.class, h);
        let y = g.inv(inc.element);
        (ell, g.mul(g.mul(el, kk), y))
    }

    fn compute_transitive(&self, h: usize, k: usize, el: usize) -> TransitiveMaps {
        let g = &self.group;
        let (ell, n) = self.factor(h, k, el);
        let inc = &self.inclusions[k][ell];
        let down = self.conjugation(h, n);
        let up = self.conjugation(h, g.inv(n));
        let lower = if down.is_identity() { inc.ind.clone() } else { inc.ind.mul(down) };
        let upper = if up.is_identity() { inc.res.clone() } else { up.mul(&inc.res) };
        TransitiveMaps { lower, upper }
    }

    /// Matrices of `G/H -> G/K`, `eH ↦ el·K`.
    pub fn transitive(&self, h: usize, k: usize, el: usize) -> Arc<TransitiveMaps> {
        let el = canonical_rep(&self.group, k, el);
        let key = (h, k, el);
        if let Some(m) = self.maps.read().unwrap().get(&key) {
            return m.clone();
        }
        let m = Arc::new(self.compute_transitive(h, k, el));
        self.maps.write().unwrap().entry(key).or_insert(m).clone()
    }

    /// Start of each orbit's coordinates in `M(S)`.
    pub fn value_offsets(&self, s: &GSet) -> Vec<usize> {
        let mut off = vec![0];
        for &c in s.orbits() {
            off.push(off.last().unwrap() + self.values[c].gens);
        }
        off
    }

    pub fn evaluate(&self, s: &GSet) -> AbGroupPresentation {
        let parts: Vec<&AbGroupPresentation> = s.orbits().iter().map(|&c| &self.values[c]).collect();
        AbGroupPresentation::direct_sum(&parts)
    }

    fn check_group(&self, s: &GSet) -> Result<()> {
        if !Arc::ptr_eq(s.group(), &self.group) {
            return Err(Error::GroupMismatch);
        }
        Ok(())
    }

    /// `f_*: M(S) -> M(T)`.
    pub fn covariant(&self, f: &GMap) -> Result<IntMatrix> {
        self.check_group(f.source())?;
        let (s, t) = (f.source(), f.target());
        let so = self.value_offsets(s);
        let to = self.value_offsets(t);
        let mut m = IntMatrix::zeros(*to.last().unwrap(), *so.last().unwrap());
        for o in 0..s.orbit_count() {
            let (ti, el) = f.image(o);
            let tm = self.transitive(s.orbit_class(o), t.orbit_class(ti), el);
            m.add_block(to[ti], so[o], &tm.lower);
        }
        Ok(m)
    }

    /// `f^*: M(T) -> M(S)`.
    pub fn contravariant(&self, f: &GMap) -> Result<IntMatrix> {
        self.check_group(f.source())?;
        let (s, t) = (f.source(), f.target());
        let so = self.value_offsets(s);
        let to = self.value_offsets(t);
        let mut m = IntMatrix::zeros(*so.last().unwrap(), *to.last().unwrap());
        for o in 0..s.orbit_count() {
            let (ti, el) = f.image(o);
            let tm = self.transitive(s.orbit_class(o), t.orbit_class(ti), el);
            m.add_block(so[o], to[ti], &tm.upper);
        }
        Ok(m)
    }

    pub fn map(&self, f: &GMap, direction: Direction) -> Result<IntMatrix> {
        match direction {
            Direction::Covariant => self.covariant(f),
            Direction::Contravariant => self.contravariant(f),
        }
    }

    /// `ind_ℓ ∘ res_ℓ` on `M(G/H_c)` for each local class.
    pub fn local_actions(&self, c: usize) -> &[IntMatrix] {
        self.local_actions[c].get_or_init(|| self.inclusions[c].iter().map(|inc| inc.ind.mul(&inc.res)).collect())
    }

    /// `Σ_ℓ b_ℓ ind_ℓ res_ℓ v` for `b ∈ A(G/H_c)`, `v ∈ M(G/H_c)`.
    pub fn act_vector(&self, c: usize, b: &[BigInt], v: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.values[c].gens];
        for (inc, bl) in self.inclusions[c].iter().zip(b) {
            if bl.is_zero() {
                continue;
            }
            let w = inc.ind.mul_vec(&inc.res.mul_vec(v));
            for (o, x) in out.iter_mut().zip(w) {
                *o += bl * x;
            }
        }
        out
    }

    /// Validate once and remember the verdict; pre-functors are refused
    /// without running the check.
    pub fn ensure_mackey(&self) -> Result<()> {
        if self.pre_only {
            return Err(Error::NotMackey(format!("{} is declared a pre-functor", self.name)));
        }
        let v = self.verdict.get_or_init(|| match self.validate() {
            Ok(r) if r.is_mackey => Ok(()),
            Ok(r) => Err(format!(
                "{} fails the axioms: {} conjugation, {} pullback, {} additivity failures",
                self.name,
                r.inner_defects.len(),
                r.square_failures.len(),
                r.union_failures.len()
            )),
            Err(e) => Err(e.to_string()),
        });
        v.clone().map_err(Error::NotMackey)
    }

    /// Matrix of the `A(S)`-action of `a` on `M(S)`.
    pub fn action_matrix(&self, a: &BurnsideElement) -> Result<IntMatrix> {
        let s = a.site();
        self.check_group(s)?;
        let vo = self.value_offsets(s);
        let bo = burnside::basis_offsets(s);
        let mut m = IntMatrix::zeros(*vo.last().unwrap(), *vo.last().unwrap());
        for o in 0..s.orbit_count() {
            let acts = self.local_actions(s.orbit_class(o));
            let n = self.values[s.orbit_class(o)].gens;
            let mut block = IntMatrix::zeros(n, n);
            for (l, act) in acts.iter().enumerate() {
                let c = &a.coeffs()[bo[o] + l];
                if !c.is_zero() {
                    block.add_assign_scaled(act, c);
                }
            }
            m.set_block(vo[o], vo[o], &block);
        }
        Ok(m)
    }

    pub fn export(&self) -> FunctorExport {
        FunctorExport {
            name: self.name.clone(),
            group: self.group.name().to_string(),
            pre_only: self.pre_only,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(c, v)| ValueExport { class: self.group.class(c).name.clone(), value: v.export() })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Covariant,
    Contravariant,
}

#[derive(Serialize)]
pub struct FunctorExport {
    pub name: String,
    pub group: String,
    pub pre_only: bool,
    pub values: Vec<ValueExport>,
}

#[derive(Serialize)]
pub struct ValueExport {
    pub class: String,
    pub value: PresentationExport,
}

pub fn evaluate(m: &MackeyData, s: &GSet) -> AbGroupPresentation {
    m.evaluate(s)
}

// Sparse fast path for validation -----------------------------------------

/// Column-major sparse integer matrix with 128-bit entries.
#[derive(Clone, Debug)]
struct Sparse {
    rows: usize,
    cols: Vec<Vec<(u32, i128)>>,
}

impl Sparse {
    fn from_dense(m: &IntMatrix) -> Option<Sparse> {
        let mut cols = vec![Vec::new(); m.cols()];
        for (j, col) in cols.iter_mut().enumerate() {
            for i in 0..m.rows() {
                let v = m.get(i, j);
                if !v.is_zero() {
                    col.push((i as u32, v.to_i128()?));
                }
            }
        }
        Some(Sparse { rows: m.rows(), cols })
    }

    fn is_identity(&self) -> bool {
        self.rows == self.cols.len() && self.cols.iter().enumerate().all(|(j, c)| c.len() == 1 && c[0] == (j as u32, 1))
    }

    fn mul(&self, other: &Sparse) -> Option<Sparse> {
        if other.is_identity() {
            return Some(self.clone());
        }
        if self.is_identity() {
            return Some(other.clone());
        }
        let mut acc = vec![0i128; self.rows];
        let mut touched = Vec::new();
        let mut cols = Vec::with_capacity(other.cols.len());
        for bc in &other.cols {
            for &(r, v) in bc {
                for &(r2, w) in &self.cols[r as usize] {
                    let slot = &mut acc[r2 as usize];
                    if *slot == 0 {
                        touched.push(r2);
                    }
                    *slot = slot.checked_add(w.checked_mul(v)?)?;
                }
            }
            touched.sort_unstable();
            let mut col = Vec::new();
            for &r in &touched {
                let v = std::mem::take(&mut acc[r as usize]);
                if v != 0 {
                    col.push((r, v));
                }
            }
            touched.clear();
            cols.push(col);
        }
        Some(Sparse { rows: self.rows, cols })
    }

    /// `acc += sign · self · other`, `acc` dense column-major.
    fn mul_acc(&self, other: &Sparse, acc: &mut [i128], sign: i128) -> Option<()> {
        for (c, bc) in other.cols.iter().enumerate() {
            for &(r, v) in bc {
                for &(r2, w) in &self.cols[r as usize] {
                    let slot = &mut acc[c * self.rows + r2 as usize];
                    *slot = slot.checked_add(w.checked_mul(v)?.checked_mul(sign)?)?;
                }
            }
        }
        Some(())
    }

    fn to_dense(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.rows, self.cols.len());
        for (j, c) in self.cols.iter().enumerate() {
            for &(i, v) in c {
                m.set(i as usize, j, BigInt::from(v));
            }
        }
        m
    }
}

fn dense_from_acc(rows: usize, cols: usize, acc: &[i128]) -> IntMatrix {
    let mut m = IntMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let v = acc[j * rows + i];
            if v != 0 {
                m.set(i, j, BigInt::from(v));
            }
        }
    }
    m
}

fn overflow() -> Error {
    Error::Shape("structure matrix entries exceed the 128-bit validation range".into())
}

// Validation ----------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct MapDesc {
    pub source: String,
    pub target: String,
    pub element: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SquareFailure {
    /// `f: G/H -> G/K`.
    pub left: MapDesc,
    /// `g: G/J -> G/K`.
    pub right: MapDesc,
    /// Per pullback orbit: projections to `G/H` and to `G/J`.
    pub pullback: Vec<(MapDesc, MapDesc)>,
    /// `g^* f_*`.
    pub restrict_after_induce: Vec<Vec<String>>,
    /// `Σ (p_J)_* (p_H)^*`.
    pub induce_after_restrict: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InnerDefect {
    pub class: String,
    pub element: String,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnionFailure {
    pub first: String,
    pub second: String,
    pub identity: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub functor: String,
    pub group: String,
    pub is_mackey: bool,
    pub squares_checked: usize,
    pub unions_checked: usize,
    pub inner_defects: Vec<InnerDefect>,
    pub square_failures: Vec<SquareFailure>,
    pub union_failures: Vec<UnionFailure>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.inner_defects.is_empty() && self.square_failures.is_empty() && self.union_failures.is_empty()
    }
}

struct SparseMaps {
    lower: Sparse,
    upper: Sparse,
}

/// Check (M1) on every pullback square of transitive maps, (M2) on every
/// union of two orbits, and triviality of inner conjugations.
pub fn validate_mackey(m: &MackeyData) -> Result<ValidationReport> {
    m.validate()
}

impl MackeyData {
    fn sparse_maps(&self, h: usize, k: usize, el: usize) -> Option<SparseMaps> {
        let tm = self.compute_transitive(h, k, el);
        Some(SparseMaps { lower: Sparse::from_dense(&tm.lower)?, upper: Sparse::from_dense(&tm.upper)? })
    }

    fn desc(&self, h: usize, k: usize, el: usize) -> MapDesc {
        let g = &self.group;
        MapDesc { source: g.class(h).name.clone(), target: g.class(k).name.clone(), element: g.label(el).to_string() }
    }

    /// Does a dense column-major accumulator vanish in `M(G/H_c)`?
    fn acc_vanishes(&self, c: usize, rows: usize, cols: usize, acc: &[i128]) -> bool {
        if acc.iter().all(|&v| v == 0) {
            return true;
        }
        if self.values[c].is_free() {
            return false;
        }
        let lat = self.relation_lattice(c);
        (0..cols).all(|j| {
            let v: Vec<BigInt> = (0..rows).map(|i| BigInt::from(acc[j * rows + i])).collect();
            lat.contains(&v)
        })
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        let g = self.group.clone();
        let n = g.class_count();

        let mut inner_defects = Vec::new();
        for h in 0..n {
            for &x in g.rep(h).elements() {
                let m = self.conjugation(h, x);
                if !self.equal_in(h, m, &IntMatrix::identity(self.values[h].gens)) {
                    inner_defects.push(InnerDefect {
                        class: g.class(h).name.clone(),
                        element: g.label(x).to_string(),
                        matrix: m.to_string_rows(),
                    });
                }
            }
        }

        // Every transitive map, grouped by target class.
        let into: Vec<Vec<(usize, usize)>> = (0..n)
            .map(|k| (0..n).filter(|&h| g.class_le(h, k)).flat_map(|h| transitive_maps(&g, h, k).into_iter().map(move |e| (h, e))).collect())
            .collect();
        let keys: Vec<(usize, usize, usize)> =
            into.iter().enumerate().flat_map(|(k, v)| v.iter().map(move |&(h, e)| (h, k, e))).collect();
        let built: Vec<Option<SparseMaps>> = keys.par_iter().map(|&(h, k, e)| self.sparse_maps(h, k, e)).collect();
        let mut sparse: HashMap<(usize, usize, usize), SparseMaps> = HashMap::with_capacity(keys.len());
        for (key, m) in keys.iter().zip(built) {
            sparse.insert(*key, m.ok_or_else(overflow)?);
        }
        // Fibers over each K-coset of every map G/J -> G/K.
        let fibers: HashMap<(usize, usize, usize), Vec<Vec<u32>>> = keys
            .par_iter()
            .map(|&(j, k, e)| {
                let mut f = vec![Vec::new(); g.class_index(k)];
                let kc = &g.cosets(k).coset_of;
                for (c, &z) in g.cosets(j).reps.iter().enumerate() {
                    f[kc[g.mul(z, e)]].push(c as u32);
                }
                ((j, k, e), f)
            })
            .collect();

        let jobs: Vec<(usize, usize)> = (0..n).flat_map(|k| (0..into[k].len()).map(move |i| (k, i))).collect();
        let results: Vec<Result<(usize, Vec<SquareFailure>)>> = jobs
            .par_iter()
            .map(|&(k, i)| {
                let (h, e1) = into[k][i];
                let f = &sparse[&(h, k, e1)];
                let c0 = g.cosets(k).coset_of[e1];
                let hs = g.rep(h);
                let mut fails = Vec::new();
                for &(j, e2) in &into[k] {
                    let gm = &sparse[&(j, k, e2)];
                    let rows = self.values[j].gens;
                    let cols = self.values[h].gens;
                    let mut acc = vec![0i128; rows * cols];
                    gm.upper.mul_acc(&f.lower, &mut acc, 1).ok_or_else(overflow)?;
                    let mut visited = vec![false; g.class_index(j)];
                    let mut legs = Vec::new();
                    for &u0 in &fibers[&(j, k, e2)][c0] {
                        let u0 = u0 as usize;
                        if visited[u0] {
                            continue;
                        }
                        let mut stab = Vec::new();
                        for &x in hs.elements() {
                            let v = g.act_on_coset(j, x, u0);
                            visited[v] = true;
                            if v == u0 {
                                stab.push(x);
                            }
                        }
                        let (r, y) = g.class_of_mask(&ElementSet::from_elements(g.order(), &stab));
                        let yi = g.inv(y);
                        let p1 = canonical_rep(&g, h, yi);
                        let p2 = canonical_rep(&g, j, g.mul(yi, g.cosets(j).reps[u0]));
                        let a = &sparse[&(r, j, p2)];
                        let b = &sparse[&(r, h, p1)];
                        a.lower.mul_acc(&b.upper, &mut acc, -1).ok_or_else(overflow)?;
                        legs.push((r, p1, p2));
                    }
                    if !self.acc_vanishes(j, rows, cols, &acc) {
                        let lhs = gm.upper.mul(&f.lower).ok_or_else(overflow)?.to_dense();
                        let rhs = lhs.sub(&dense_from_acc(rows, cols, &acc));
                        fails.push(SquareFailure {
                            left: self.desc(h, k, e1),
                            right: self.desc(j, k, e2),
                            pullback: legs.iter().map(|&(r, p1, p2)| (self.desc(r, h, p1), self.desc(r, j, p2))).collect(),
                            restrict_after_induce: lhs.to_string_rows(),
                            induce_after_restrict: rhs.to_string_rows(),
                        });
                    }
                }
                Ok((into[k].len(), fails))
            })
            .collect();
        let mut squares_checked = 0;
        let mut square_failures = Vec::new();
        for r in results {
            let (c, f) = r?;
            squares_checked += c;
            square_failures.extend(f);
        }

        let (unions_checked, union_failures) = self.check_unions(&sparse)?;
        let mut report = ValidationReport {
            functor: self.name.clone(),
            group: g.name().to_string(),
            is_mackey: false,
            squares_checked,
            unions_checked,
            inner_defects,
            square_failures,
            union_failures,
        };
        report.is_mackey = report.is_empty();
        Ok(report)
    }

    /// For `S = G/H ⊔ G/J` with embeddings `i₁, i₂`: `i_a^* i_b_* = δ_ab`
    /// and `Σ i_a_* i_a^* = 1`, with the maps assembled as for any G-set.
    fn check_unions(&self, sparse: &HashMap<(usize, usize, usize), SparseMaps>) -> Result<(usize, Vec<UnionFailure>)> {
        let g = &self.group;
        let n = g.class_count();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
        let results: Vec<Result<Vec<UnionFailure>>> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let s = GSet::from_orbits(g, vec![a, b]);
                let parts = [GSet::transitive(g, a), GSet::transitive(g, b)];
                let emb: Vec<GMap> = parts.iter().enumerate().map(|(i, p)| GMap::new_unchecked(p, &s, vec![(i, 0)])).collect();
                let lower: Vec<Sparse> = emb.iter().map(|f| assemble(self, f, sparse, Direction::Covariant)).collect::<Option<_>>().ok_or_else(overflow)?;
                let upper: Vec<Sparse> = emb.iter().map(|f| assemble(self, f, sparse, Direction::Contravariant)).collect::<Option<_>>().ok_or_else(overflow)?;
                let mut fails = Vec::new();
                let classes = [a, b];
                for x in 0..2 {
                    for y in 0..2 {
                        let rows = self.values[classes[x]].gens;
                        let cols = self.values[classes[y]].gens;
                        let mut acc = vec![0i128; rows * cols];
                        upper[x].mul_acc(&lower[y], &mut acc, 1).ok_or_else(overflow)?;
                        if x == y {
                            for i in 0..rows {
                                acc[i * rows + i] -= 1;
                            }
                        }
                        if !self.acc_vanishes(classes[x], rows, cols, &acc) {
                            fails.push(UnionFailure {
                                first: g.class(a).name.clone(),
                                second: g.class(b).name.clone(),
                                identity: format!("i{}^* i{}_* = {}", x + 1, y + 1, if x == y { "1" } else { "0" }),
                            });
                        }
                    }
                }
                let total = self.values[a].gens + self.values[b].gens;
                let mut acc = vec![0i128; total * total];
                for x in 0..2 {
                    lower[x].mul_acc(&upper[x], &mut acc, 1).ok_or_else(overflow)?;
                }
                for i in 0..total {
                    acc[i * total + i] -= 1;
                }
                let split = self.values[a].gens;
                let ok = (0..total).all(|j| {
                    let col = &acc[j * total..(j + 1) * total];
                    let top: Vec<i128> = col[..split].to_vec();
                    let bottom: Vec<i128> = col[split..].to_vec();
                    self.acc_vanishes(a, split, 1, &top) && self.acc_vanishes(b, total - split, 1, &bottom)
                });
                if !ok {
                    fails.push(UnionFailure {
                        first: g.class(a).name.clone(),
                        second: g.class(b).name.clone(),
                        identity: "i1_* i1^* + i2_* i2^* = 1".into(),
                    });
                }
                Ok(fails)
            })
            .collect();
        let mut out = Vec::new();
        for r in results {
            out.extend(r?);
        }
        Ok((pairs.len(), out))
    }
}

/// Sparse matrix of a G-map, assembled orbit by orbit.
fn assemble(m: &MackeyData, f: &GMap, sparse: &HashMap<(usize, usize, usize), SparseMaps>, d: Direction) -> Option<Sparse> {
    let (s, t) = (f.source(), f.target());
    let so = m.value_offsets(s);
    let to = m.value_offsets(t);
    let (rows, ncols, ro, co) = match d {
        Direction::Covariant => (*to.last().unwrap(), *so.last().unwrap(), &to, &so),
        Direction::Contravariant => (*so.last().unwrap(), *to.last().unwrap(), &so, &to),
    };
    let mut cols = vec![Vec::new(); ncols];
    for o in 0..s.orbit_count() {
        let (ti, el) = f.image(o);
        let key = (s.orbit_class(o), t.orbit_class(ti), el);
        let sm = sparse.get(&key)?;
        let (block, r0, c0) = match d {
            Direction::Covariant => (&sm.lower, ro[ti], co[o]),
            Direction::Contravariant => (&sm.upper, ro[o], co[ti]),
        };
        for (j, c) in block.cols.iter().enumerate() {
            cols[c0 + j].extend(c.iter().map(|&(i, v)| ((r0 + i as usize) as u32, v)));
        }
    }
    for c in &mut cols {
        c.sort_unstable();
    }
    Some(Sparse { rows, cols })
}

// Green rings ---------------------------------------------------------------

/// `table[i][j]` is the product of generators `i` and `j`.
pub type ProductTable = Vec<Vec<Vec<BigInt>>>;
pub type ProductRule = Arc<dyn Fn(usize) -> ProductTable + Send + Sync>;

/// A Mackey functor with a bilinear product and unit on each value.
pub struct GreenRingData {
    base: Arc<MackeyData>,
    units: Vec<Vec<BigInt>>,
    tables: Vec<OnceLock<ProductTable>>,
    rule: ProductRule,
}

impl fmt::Debug for GreenRingData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GreenRingData({:?})", self.base)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GreenReport {
    pub checks: usize,
    pub associativity: usize,
    pub commutativity: usize,
    pub unit: usize,
    pub unit_restriction: usize,
    pub restriction_multiplicative: usize,
    pub frobenius_left: usize,
    pub frobenius_right: usize,
    pub conjugation_multiplicative: usize,
    pub samples: Vec<String>,
}

impl GreenReport {
    pub fn failures(&self) -> usize {
        self.associativity
            + self.commutativity
            + self.unit
            + self.unit_restriction
            + self.restriction_multiplicative
            + self.frobenius_left
            + self.frobenius_right
            + self.conjugation_multiplicative
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    fn fail(&mut self, what: impl FnOnce(&mut Self) -> &mut usize, msg: impl FnOnce() -> String) {
        *what(self) += 1;
        if self.samples.len() < 20 {
            let m = msg();
            self.samples.push(m);
        }
    }
}

fn unit_vector(n: usize, i: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); n];
    v[i] = BigInt::one();
    v
}

fn vsub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl GreenRingData {
    pub fn new(base: Arc<MackeyData>, units: Vec<Vec<BigInt>>, rule: ProductRule) -> Result<Self> {
        let n = base.group().class_count();
        if units.len() != n || units.iter().enumerate().any(|(c, u)| u.len() != base.value(c).gens()) {
            return Err(Error::Shape("one unit vector per class".into()));
        }
        Ok(GreenRingData { base, units, tables: (0..n).map(|_| OnceLock::new()).collect(), rule })
    }

    pub fn mackey(&self) -> &Arc<MackeyData> {
        &self.base
    }

    pub fn group(&self) -> &Arc<Group> {
        self.base.group()
    }

    pub fn name(&self) -> &str {
        self.base.name()
    }

    pub fn unit(&self, c: usize) -> &[BigInt] {
        &self.units[c]
    }

    pub fn product_table(&self, c: usize) -> &ProductTable {
        self.tables[c].get_or_init(|| (self.rule)(c))
    }

    pub fn multiply(&self, c: usize, x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
        let t = self.product_table(c);
        let n = self.base.value(c).gens();
        let mut out = vec![BigInt::zero(); n];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let c = xi * yj;
                for (o, t) in out.iter_mut().zip(&t[i][j]) {
                    if !t.is_zero() {
                        *o += &c * t;
                    }
                }
            }
        }
        out
    }

    /// Product on `M(S)`, orbit by orbit.
    pub fn multiply_on(&self, s: &GSet, x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
        let off = self.base.value_offsets(s);
        let mut out = Vec::with_capacity(*off.last().unwrap());
        for (o, &c) in s.orbits().iter().enumerate() {
            out.extend(self.multiply(c, &x[off[o]..off[o + 1]], &y[off[o]..off[o + 1]]));
        }
        out
    }

    pub fn unit_on(&self, s: &GSet) -> Vec<BigInt> {
        s.orbits().iter().flat_map(|&c| self.units[c].iter().cloned()).collect()
    }

    /// Associativity, commutativity and unitality on all generator
    /// triples, and compatibility with every transitive map: units and
    /// products restrict, both Frobenius identities, conjugations are ring
    /// maps.
    pub fn validate_green(&self) -> GreenReport {
        let m = &self.base;
        let g = m.group().clone();
        let n = g.class_count();
        let mut rep = GreenReport::default();
        for c in 0..n {
            let r = m.value(c).gens();
            let e: Vec<Vec<BigInt>> = (0..r).map(|i| unit_vector(r, i)).collect();
            let one = self.unit(c).to_vec();
            for i in 0..r {
                rep.checks += 2;
                if !m.vector_vanishes(c, &vsub(&self.multiply(c, &one, &e[i]), &e[i])) {
                    rep.fail(|r| &mut r.unit, || format!("{}: 1·e{i}", g.class(c).name));
                }
                if !m.vector_vanishes(c, &vsub(&self.multiply(c, &e[i], &one), &e[i])) {
                    rep.fail(|r| &mut r.unit, || format!("{}: e{i}·1", g.class(c).name));
                }
                for j in 0..r {
                    let ij = self.multiply(c, &e[i], &e[j]);
                    rep.checks += 1;
                    if !m.vector_vanishes(c, &vsub(&ij, &self.multiply(c, &e[j], &e[i]))) {
                        rep.fail(|r| &mut r.commutativity, || format!("{}: e{i}e{j}", g.class(c).name));
                    }
                    for k in 0..r {
                        rep.checks += 1;
                        let l = self.multiply(c, &ij, &e[k]);
                        let rr = self.multiply(c, &e[i], &self.multiply(c, &e[j], &e[k]));
                        if !m.vector_vanishes(c, &vsub(&l, &rr)) {
                            rep.fail(|r| &mut r.associativity, || format!("{}: (e{i}e{j})e{k}", g.class(c).name));
                        }
                    }
                }
            }
            for (&x, conj) in m.conjugations(c) {
                rep.checks += 1;
                if !m.vector_vanishes(c, &vsub(&conj.mul_vec(&one), &one)) {
                    rep.fail(|r| &mut r.unit_restriction, || format!("{}: c_{} 1", g.class(c).name, g.label(x)));
                }
                for i in 0..r {
                    for j in 0..r {
                        rep.checks += 1;
                        let l = conj.mul_vec(&self.multiply(c, &e[i], &e[j]));
                        let rr = self.multiply(c, &conj.mul_vec(&e[i]), &conj.mul_vec(&e[j]));
                        if !m.vector_vanishes(c, &vsub(&l, &rr)) {
                            rep.fail(|r| &mut r.conjugation_multiplicative, || format!("{}: c_{} e{i}e{j}", g.class(c).name, g.label(x)));
                        }
                    }
                }
            }
        }
        for k in 0..n {
            for h in (0..n).filter(|&h| g.class_le(h, k)) {
                for el in transitive_maps(&g, h, k) {
                    let tm = m.transitive(h, k, el);
                    let what = || format!("{} -> {} via {}", g.class(h).name, g.class(k).name, g.label(el));
                    let (rk, rh) = (m.value(k).gens(), m.value(h).gens());
                    rep.checks += 1;
                    if !m.vector_vanishes(h, &vsub(&tm.upper.mul_vec(self.unit(k)), self.unit(h))) {
                        rep.fail(|r| &mut r.unit_restriction, what);
                    }
                    for i in 0..rk {
                        let x = unit_vector(rk, i);
                        let rx = tm.upper.mul_vec(&x);
                        for j in 0..rk {
                            rep.checks += 1;
                            let y = unit_vector(rk, j);
                            let l = tm.upper.mul_vec(&self.multiply(k, &x, &y));
                            let r = self.multiply(h, &rx, &tm.upper.mul_vec(&y));
                            if !m.vector_vanishes(h, &vsub(&l, &r)) {
                                rep.fail(|r| &mut r.restriction_multiplicative, what);
                            }
                        }
                        for j in 0..rh {
                            rep.checks += 2;
                            let y = unit_vector(rh, j);
                            let l = tm.lower.mul_vec(&self.multiply(h, &rx, &y));
                            let r = self.multiply(k, &x, &tm.lower.mul_vec(&y));
                            if !m.vector_vanishes(k, &vsub(&l, &r)) {
                                rep.fail(|r| &mut r.frobenius_left, what);
                            }
                            let l = tm.lower.mul_vec(&self.multiply(h, &y, &rx));
                            let r = self.multiply(k, &tm.lower.mul_vec(&y), &x);
                            if !m.vector_vanishes(k, &vsub(&l, &r)) {
                                rep.fail(|r| &mut r.frobenius_right, what);
                            }
                        }
                    }
                }
            }
        }
        rep
    }
}

// Built-in functors ---------------------------------------------------------

/// The Burnside Green ring: `A(G/H)`, with maps and products computed from
/// G-sets over the base.
pub fn burnside_functor(g: &Arc<Group>) -> GreenRingData {
    let n = g.class_count();
    let values = (0..n).map(|c| AbGroupPresentation::free(g.local_classes(c).len())).collect();
    let inclusions: Vec<Vec<Inclusion>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let target = GSet::transitive(g, k);
            (0..g.local_classes(k).len())
                .map(|l| {
                    let (r, el) = inclusion_data(g, k, l);
                    let f = GMap::new_unchecked(&GSet::transitive(g, r), &target, vec![(0, el)]);
                    Inclusion { class: r, element: el, ind: burnside::induce_matrix(&f), res: burnside::restrict_matrix(&f) }
                })
                .collect()
        })
        .collect();
    let con: Vec<BTreeMap<usize, IntMatrix>> = (0..n)
        .into_par_iter()
        .map(|h| {
            let s = GSet::transitive(g, h);
            normalizer_cosets(g, h)
                .into_iter()
                .map(|x| (x, burnside::induce_matrix(&GMap::new_unchecked(&s, &s, vec![(0, x)]))))
                .collect()
        })
        .collect();
    let base = MackeyData::new(g, "burnside", values, inclusions, con, false).expect("Burnside data is well formed");
    let units = (0..n).map(|c| BurnsideElement::unit(&GSet::transitive(g, c)).coeffs().to_vec()).collect();
    let grp = g.clone();
    let rule: ProductRule = Arc::new(move |c| {
        let s = GSet::transitive(&grp, c);
        let b = burnside::basis(&s);
        b.iter().map(|u| b.iter().map(|v| burnside::basis_product(&s, u, v).coeffs().to_vec()).collect()).collect()
    });
    GreenRingData::new(Arc::new(base), units, rule).expect("units match values")
}

/// Characters of the basis of `A(H_c)` at the cyclic local classes:
/// row per cyclic local class, column per basis element.
pub fn character_matrix(g: &Group, c: usize) -> IntMatrix {
    let lm = burnside::local_marks(g, c);
    let cyclic: Vec<usize> = (0..lm.len()).filter(|&l| g.is_cyclic(&g.local_classes(c)[l].subgroup)).collect();
    let rows: Vec<Vec<u64>> = cyclic.iter().map(|&lam| lm.iter().map(|row| row[lam]).collect()).collect();
    IntMatrix::from_rows_with_cols(&rows, lm.len()).expect("rectangular")
}

/// Quotient of the Burnside Green ring by the kernel of the permutation
/// character map, with the projection.
pub struct PermChar {
    pub burnside: GreenRingData,
    pub ring: GreenRingData,
    pub projection: MackeyHom,
}

pub fn perm_char_green_ring(g: &Arc<Group>) -> GreenRingData {
    PermChar::build(g).ring
}

impl PermChar {
    pub fn build(g: &Arc<Group>) -> PermChar {
        let burnside = burnside_functor(g);
        let n = g.class_count();
        let split: Vec<(IntMatrix, IntMatrix)> =
            (0..n).into_par_iter().map(|c| zlocal::quotient_by_saturated(&zlocal::kernel(&character_matrix(g, c)))).collect();
        let ring = quotient_green_ring(&burnside, &split, "permchar");
        let pis = split.iter().map(|(p, _)| p.clone()).collect();
        let projection = MackeyHom::new(burnside.mackey().clone(), ring.mackey().clone(), pis).expect("shapes match");
        PermChar { burnside, ring, projection }
    }
}

/// Green ring on `π(value)` given surjections `π_c` with sections `σ_c`
/// whose kernels form a Green ideal.
fn quotient_green_ring(src: &GreenRingData, split: &[(IntMatrix, IntMatrix)], name: &str) -> GreenRingData {
    let m = src.mackey();
    let g = m.group().clone();
    let n = g.class_count();
    let values = split.iter().map(|(p, _)| AbGroupPresentation::free(p.rows())).collect();
    let inclusions = (0..n)
        .map(|k| {
            m.inclusions(k)
                .iter()
                .map(|inc| Inclusion {
                    class: inc.class,
                    element: inc.element,
                    ind: split[k].0.mul(&inc.ind).mul(&split[inc.class].1),
                    res: split[inc.class].0.mul(&inc.res).mul(&split[k].1),
                })
                .collect()
        })
        .collect();
    let con = (0..n)
        .map(|h| m.conjugations(h).iter().map(|(&x, c)| (x, split[h].0.mul(c).mul(&split[h].1))).collect())
        .collect();
    let base = MackeyData::new(&g, name, values, inclusions, con, m.is_pre_only()).expect("quotient data is well formed");
    let units = (0..n).map(|c| split[c].0.mul_vec(src.unit(c))).collect();
    let split = split.to_vec();
    let src_tables: Vec<ProductTable> = (0..n).map(|c| src.product_table(c).clone()).collect();
    let src_gens: Vec<usize> = (0..n).map(|c| m.value(c).gens()).collect();
    let rule: ProductRule = Arc::new(move |c| {
        let (pi, sigma) = &split[c];
        let k = pi.rows();
        let cols = sigma.columns();
        let mult = |x: &[BigInt], y: &[BigInt]| -> Vec<BigInt> {
            let mut out = vec![BigInt::zero(); src_gens[c]];
            for (i, xi) in x.iter().enumerate() {
                for (j, yj) in y.iter().enumerate() {
                    if xi.is_zero() || yj.is_zero() {
                        continue;
                    }
                    let s = xi * yj;
                    for (o, t) in out.iter_mut().zip(&src_tables[c][i][j]) {
                        *o += &s * t;
                    }
                }
            }
            out
        };
        (0..k).map(|i| (0..k).map(|j| pi.mul_vec(&mult(&cols[i], &cols[j]))).collect()).collect()
    });
    GreenRingData::new(Arc::new(base), units, rule).expect("units match values")
}

/// A homomorphism `ω: G -> {±1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orientation {
    signs: Vec<i8>,
}

impl Orientation {
    pub fn trivial(g: &Group) -> Self {
        Orientation { signs: vec![1; g.order()] }
    }

    /// `ω` with the given kernel, which must be normal of index 1 or 2.
    pub fn from_kernel(g: &Group, class: usize) -> Result<Self> {
        let k = g.rep(class);
        let idx = g.class_index(class);
        if idx > 2 || !g.is_normal_in(k, &g.whole()) {
            return Err(Error::NotHomomorphism(format!("{} is not a normal subgroup of index ≤ 2", g.class(class).name)));
        }
        Ok(Orientation { signs: g.elements().map(|x| if k.contains(x) { 1 } else { -1 }).collect() })
    }

    /// Parity of permutation elements, read from their cycle labels.
    pub fn sign(g: &Group) -> Result<Self> {
        let mut signs = Vec::with_capacity(g.order());
        for x in g.elements() {
            let l = g.label(x);
            if !l.starts_with('(') {
                return Err(Error::NotHomomorphism("sign needs a permutation group".into()));
            }
            let transpositions: usize =
                l.split(')').filter(|c| !c.trim().is_empty()).map(|c| c.trim_start_matches('(').split_whitespace().count().saturating_sub(1)).sum();
            signs.push(if transpositions.is_multiple_of(2) { 1 } else { -1 });
        }
        let o = Orientation { signs };
        o.check(g)?;
        Ok(o)
    }

    pub fn from_signs(g: &Group, signs: Vec<i8>) -> Result<Self> {
        if signs.len() != g.order() || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::NotHomomorphism("one sign ±1 per element".into()));
        }
        let o = Orientation { signs };
        o.check(g)?;
        Ok(o)
    }

    /// `trivial`, `trivial-kernel`, `sign`, or the name of the kernel class.
    pub fn parse(g: &Group, spec: &str) -> Result<Self> {
        match spec.trim() {
            "trivial" => Ok(Self::trivial(g)),
            "sign" => Self::sign(g),
            "trivial-kernel" => Self::from_kernel(g, g.trivial_class()),
            other => {
                let c = g.parse_class(other).ok_or_else(|| spec_err(spec, "unknown kernel class"))?;
                Self::from_kernel(g, c)
            }
        }
    }

    fn check(&self, g: &Group) -> Result<()> {
        for a in g.elements() {
            for b in g.elements() {
                if self.signs[g.mul(a, b)] != self.signs[a] * self.signs[b] {
                    return Err(Error::NotHomomorphism(format!("ω({}·{}) ≠ ω({})ω({})", g.label(a), g.label(b), g.label(a), g.label(b))));
                }
            }
        }
        Ok(())
    }

    pub fn at(&self, x: usize) -> i8 {
        self.signs[x]
    }

    pub fn is_trivial(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }
}

/// Value `Z` everywhere; restriction along the stored inclusion with
/// element `y` is `ω(y)`, induction `ω(y)·[K:L]`, conjugation by `x` is
/// `ω(x)`, stored for every element of the normalizer.
pub fn signed_pre_functor(g: &Arc<Group>, omega: &Orientation) -> MackeyData {
    let n = g.class_count();
    let one = |v: i64| IntMatrix::scalar(1, v);
    let values = (0..n).map(|_| AbGroupPresentation::free(1)).collect();
    let inclusions = (0..n)
        .map(|k| {
            (0..g.local_classes(k).len())
                .map(|l| {
                    let (r, el) = inclusion_data(g, k, l);
                    let s = omega.at(el) as i64;
                    let index = (g.class_order(k) / g.class_order(r)) as i64;
                    Inclusion { class: r, element: el, ind: one(s * index), res: one(s) }
                })
                .collect()
        })
        .collect();
    let con = (0..n).map(|h| g.normalizer(g.rep(h)).into_iter().map(|x| (x, one(omega.at(x) as i64))).collect()).collect();
    let name = if omega.is_trivial() { "signed(trivial)" } else { "signed" };
    MackeyData::new(g, name, values, inclusions, con, !omega.is_trivial()).expect("signed data is well formed")
}

/// `Z^copies` at every class: restriction the identity, induction the
/// index, componentwise product with unit all ones.
pub fn fixed_point_green_ring(g: &Arc<Group>, copies: usize) -> GreenRingData {
    let n = g.class_count();
    let values = (0..n).map(|_| AbGroupPresentation::free(copies)).collect();
    let inclusions = (0..n)
        .map(|k| {
            (0..g.local_classes(k).len())
                .map(|l| {
                    let (r, el) = inclusion_data(g, k, l);
                    let index = g.class_order(k) / g.class_order(r);
                    Inclusion { class: r, element: el, ind: IntMatrix::scalar(copies, index), res: IntMatrix::identity(copies) }
                })
                .collect()
        })
        .collect();
    let con = (0..n).map(|h| normalizer_cosets(g, h).into_iter().map(|x| (x, IntMatrix::identity(copies))).collect()).collect();
    let base = MackeyData::new(g, format!("fixed-point^{copies}"), values, inclusions, con, false).expect("well formed");
    let units = (0..n).map(|_| vec![BigInt::one(); copies]).collect();
    let rule: ProductRule =
        Arc::new(move |_| (0..copies).map(|i| (0..copies).map(|j| if i == j { unit_vector(copies, i) } else { vec![BigInt::zero(); copies] }).collect()).collect());
    GreenRingData::new(Arc::new(base), units, rule).expect("units match values")
}

/// The zero Green ring.
pub fn zero_functor(g: &Arc<Group>) -> GreenRingData {
    let n = g.class_count();
    let values = (0..n).map(|_| AbGroupPresentation::free(0)).collect();
    let inclusions = (0..n)
        .map(|k| {
            (0..g.local_classes(k).len())
                .map(|l| {
                    let (r, el) = inclusion_data(g, k, l);
                    Inclusion { class: r, element: el, ind: IntMatrix::zeros(0, 0), res: IntMatrix::zeros(0, 0) }
                })
                .collect()
        })
        .collect();
    let con = (0..n).map(|h| normalizer_cosets(g, h).into_iter().map(|x| (x, IntMatrix::zeros(0, 0))).collect()).collect();
    let base = MackeyData::new(g, "zero", values, inclusions, con, false).expect("well formed");
    GreenRingData::new(Arc::new(base), vec![Vec::new(); n], Arc::new(|_| Vec::new())).expect("empty units")
}

// Homomorphisms --------------------------------------------------------------

/// A family of matrices `θ_H: M(G/H) -> N(G/H)`.
pub struct MackeyHom {
    source: Arc<MackeyData>,
    target: Arc<MackeyData>,
    components: Vec<IntMatrix>,
}

impl MackeyHom {
    pub fn new(source: Arc<MackeyData>, target: Arc<MackeyData>, components: Vec<IntMatrix>) -> Result<Self> {
        if !Arc::ptr_eq(source.group(), target.group()) {
            return Err(Error::GroupMismatch);
        }
        let n = source.group().class_count();
        if components.len() != n {
            return Err(Error::Shape("one component per class".into()));
        }
        for (c, m) in components.iter().enumerate() {
            if m.shape() != (target.value(c).gens(), source.value(c).gens()) {
                return Err(Error::Shape(format!("component {c} has the wrong shape")));
            }
        }
        Ok(MackeyHom { source, target, components })
    }

    pub fn identity(m: &Arc<MackeyData>) -> Self {
        Self::scalar(m, 1)
    }

    pub fn scalar(m: &Arc<MackeyData>, c: i64) -> Self {
        let comps = m.values().iter().map(|v| IntMatrix::scalar(v.gens(), c)).collect();
        MackeyHom { source: m.clone(), target: m.clone(), components: comps }
    }

    pub fn source(&self) -> &Arc<MackeyData> {
        &self.source
    }

    pub fn target(&self) -> &Arc<MackeyData> {
        &self.target
    }

    pub fn component(&self, c: usize) -> &IntMatrix {
        &self.components[c]
    }

    /// Failures of compatibility with relations, inclusions and
    /// conjugations.
    pub fn check_natural(&self) -> Vec<String> {
        let (s, t) = (&self.source, &self.target);
        let g = s.group();
        let mut bad = Vec::new();
        for c in 0..g.class_count() {
            let img = self.components[c].mul(s.value(c).relations());
            if !t.equal_in(c, &img, &IntMatrix::zeros(img.rows(), img.cols())) {
                bad.push(format!("{}: relations not preserved", g.class(c).name));
            }
            for (l, (a, b)) in s.inclusions(c).iter().zip(t.inclusions(c)).enumerate() {
                let r = a.class;
                if !t.equal_in(c, &self.components[c].mul(&a.ind), &b.ind.mul(&self.components[r])) {
                    bad.push(format!("{}: induction from local class {l}", g.class(c).name));
                }
                if !t.equal_in(r, &self.components[r].mul(&a.res), &b.res.mul(&self.components[c])) {
                    bad.push(format!("{}: restriction to local class {l}", g.class(c).name));
                }
            }
            let mut elems: Vec<usize> = s.conjugations(c).keys().chain(t.conjugations(c).keys()).copied().collect();
            elems.sort_unstable();
            elems.dedup();
            for x in elems {
                if !t.equal_in(c, &self.components[c].mul(s.conjugation(c, x)), &t.conjugation(c, x).mul(&self.components[c])) {
                    bad.push(format!("{}: conjugation by {}", g.class(c).name, g.label(x)));
                }
            }
        }
        bad
    }

    pub fn is_natural(&self) -> bool {
        self.check_natural().is_empty()
    }

    fn require_natural(&self) -> Result<()> {
        let bad = self.check_natural();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::NotNatural(bad.join("; ")))
        }
    }

    pub fn kernel(&self) -> Result<MackeyData> {
        self.require_natural()?;
        let (s, t) = (&self.source, &self.target);
        let bases = (0..self.components.len()).map(|c| zlocal::preimage(&self.components[c], t.relation_lattice(c)).basis().clone()).collect();
        sub_functor(s, &format!("ker({})", s.name()), bases)
    }

    pub fn image(&self) -> Result<MackeyData> {
        self.require_natural()?;
        let t = &self.target;
        let bases = (0..self.components.len()).map(|c| zlocal::image(&self.components[c].hstack(t.value(c).relations())).basis().clone()).collect();
        sub_functor(t, &format!("im({})", self.source.name()), bases)
    }

    pub fn cokernel(&self) -> Result<MackeyData> {
        self.require_natural()?;
        let t = &self.target;
        let g = t.group();
        let values = (0..self.components.len())
            .map(|c| {
                let l = zlocal::image(&self.components[c].hstack(t.value(c).relations()));
                AbGroupPresentation::new(t.value(c).gens(), l.basis().clone())
            })
            .collect::<Result<Vec<_>>>()?;
        let inclusions = (0..g.class_count()).map(|k| t.inclusions(k).to_vec()).collect();
        let con = (0..g.class_count()).map(|h| t.conjugations(h).clone()).collect();
        MackeyData::new(g, format!("coker({})", self.source.name()), values, inclusions, con, t.is_pre_only())
    }
}

/// Kernel, image and cokernel of a natural transformation.
pub fn hom_kernel_image(theta: &MackeyHom) -> Result<(MackeyData, MackeyData, MackeyData)> {
    Ok((theta.kernel()?, theta.image()?, theta.cokernel()?))
}

/// Sub-bifunctor with value the span of the columns of `bases[c]`, which
/// must contain the relations of `M(G/H_c)`.
pub fn sub_functor(m: &MackeyData, name: &str, bases: Vec<IntMatrix>) -> Result<MackeyData> {
    let g = m.group();
    let n = g.class_count();
    let not_closed = || Error::NotNatural("a structure map leaves the sub-bifunctor".into());
    let coords = |c: usize, v: &IntMatrix| zlocal::coordinates_in(&bases[c], v).ok_or_else(not_closed);
    let mut inclusions = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = Vec::new();
        for inc in m.inclusions(k) {
            let r = inc.class;
            v.push(Inclusion {
                class: r,
                element: inc.element,
                ind: coords(k, &inc.ind.mul(&bases[r]))?,
                res: coords(r, &inc.res.mul(&bases[k]))?,
            });
        }
        inclusions.push(v);
    }
    let mut con = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for h in 0..n {
        let mut t = BTreeMap::new();
        for (&x, c) in m.conjugations(h) {
            t.insert(x, coords(h, &c.mul(&bases[h]))?);
        }
        con.push(t);
        let rel = zlocal::coordinates_in(&bases[h], m.value(h).relations())
            .ok_or_else(|| Error::Shape("sub-bifunctor must contain the relations".into()))?;
        values.push(AbGroupPresentation::new(bases[h].cols(), rel)?);
    }
    MackeyData::new(g, name, values, inclusions, con, m.is_pre_only())
}

/// Sub-Green ring on the column spans of `bases`, which must contain the
/// relations and the units and be closed under products.
pub fn sub_green_ring(r: &GreenRingData, name: &str, bases: Vec<IntMatrix>) -> Result<GreenRingData> {
    let base = sub_functor(r.mackey(), name, bases.clone())?;
    let n = bases.len();
    let mut units = Vec::with_capacity(n);
    let mut tables = Vec::with_capacity(n);
    let not_closed = || Error::NotNatural("products or units leave the sub-ring".into());
    for c in 0..n {
        let b = &bases[c];
        let u = zlocal::coordinates_in(b, &IntMatrix::column_vector(r.unit(c))).ok_or_else(not_closed)?;
        units.push(u.col(0));
        let cols = b.columns();
        let mut t = Vec::with_capacity(cols.len());
        for x in &cols {
            let products: Vec<Vec<BigInt>> = cols.iter().map(|y| r.multiply(c, x, y)).collect();
            let stacked = IntMatrix::from_columns(b.rows(), &products);
            let co = zlocal::coordinates_in(b, &stacked).ok_or_else(not_closed)?;
            t.push(co.columns());
        }
        tables.push(t);
    }
    GreenRingData::new(Arc::new(base), units, Arc::new(move |c| tables[c].clone()))
}

/// Largest absolute entry over all stored matrices.
pub fn max_entry(m: &MackeyData) -> BigInt {
    let mut best = BigInt::zero();
    let mut see = |x: &IntMatrix| {
        for i in 0..x.rows() {
            for j in 0..x.cols() {
                let a = x.get(i, j).abs();
                if a > best {
                    best = a;
                }
            }
        }
    };
    for k in 0..m.group().class_count() {
        for inc in m.inclusions(k) {
            see(&inc.ind);
            see(&inc.res);
        }
        for c in m.conjugations(k).values() {
            see(c);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::group_from_spec;

    #[test]
    fn burnside_values() {
        let g = group_from_spec("S3").unwrap();
        let b = burnside_functor(&g);
        assert_eq!(b.mackey().evaluate(&GSet::point(&g)).gens(), 4);
        assert_eq!(b.mackey().evaluate(&GSet::empty(&g)).gens(), 0);
    }

    #[test]
    fn transitive_matches_direct_burnside() {
        let g = group_from_spec("S3").unwrap();
        let b = burnside_functor(&g);
        let m = b.mackey();
        for k in 0..g.class_count() {
            for h in 0..g.class_count() {
                for el in transitive_maps(&g, h, k) {
                    let f = GMap::new(&GSet::transitive(&g, h), &GSet::transitive(&g, k), vec![(0, el)]).unwrap();
                    let tm = m.transitive(h, k, el);
                    assert_eq!(tm.lower, burnside::induce_matrix(&f));
                    assert_eq!(tm.upper, burnside::restrict_matrix(&f));
                }
            }
        }
    }

    #[test]
    fn validation_verdicts() {
        let g = group_from_spec("S3").unwrap();
        assert!(validate_mackey(burnside_functor(&g).mackey()).unwrap().is_mackey);
        assert!(validate_mackey(zero_functor(&g).mackey()).unwrap().is_mackey);
        let c2 = group_from_spec("C2").unwrap();
        let bad = signed_pre_functor(&c2, &Orientation::parse(&c2, "trivial-kernel").unwrap());
        let r = validate_mackey(&bad).unwrap();
        assert!(!r.is_mackey);
        assert_eq!(r.inner_defects.len(), 1);
        assert_eq!(r.inner_defects[0].class, "C2");
        let good = signed_pre_functor(&c2, &Orientation::trivial(&c2));
        assert!(validate_mackey(&good).unwrap().is_mackey);
    }

    #[test]
    fn perm_char_ranks() {
        let c2 = group_from_spec("C2").unwrap();
        assert_eq!(perm_char_green_ring(&c2).mackey().value(c2.whole_class()).gens(), 2);
        let s3 = group_from_spec("S3").unwrap();
        let p = PermChar::build(&s3);
        assert_eq!(p.ring.mackey().value(s3.whole_class()).gens(), 3);
        assert!(p.projection.is_natural());
        assert!(validate_mackey(p.ring.mackey()).unwrap().is_mackey);
        assert!(p.ring.validate_green().passed());
    }

    #[test]
    fn cokernel_of_two() {
        let c2 = group_from_spec("C2").unwrap();
        let b = burnside_functor(&c2);
        let two = MackeyHom::scalar(b.mackey(), 2);
        let (k, i, c) = hom_kernel_image(&two).unwrap();
        assert_eq!(k.value(1).gens(), 0);
        assert_eq!(i.value(1).invariants().free_rank, 2);
        let inv = c.value(1).invariants();
        assert_eq!((inv.free_rank, inv.torsion.len()), (0, 2));
        assert!(validate_mackey(&c).unwrap().is_mackey);
    }
}
