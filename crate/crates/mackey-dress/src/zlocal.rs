//! Exact integer linear algebra over `Z` and its localizations `Z_(p)`.
//!
//! Everything here works with arbitrary-precision integers. The Smith normal
//! form drives kernels, images, cokernels and the p-local solver.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Where a surjectivity or solvability question is asked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locale {
    /// Over the integers.
    Integral,
    /// Over `Z_(p)`.
    Prime(u64),
    /// Over `Z_(p)` for every prime outside a finite reported set.
    Generic,
}

impl fmt::Display for Locale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Locale::Integral => write!(f, "integral"),
            Locale::Prime(p) => write!(f, "p={p}"),
            Locale::Generic => write!(f, "generic"),
        }
    }
}

/// Serde for `BigInt`: a JSON number when it fits in `i64`, a decimal
/// string otherwise. Both forms are accepted on input.
pub mod int_serde {
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Small(i64),
        Big(String),
    }

    fn to_repr(x: &BigInt) -> Repr {
        match x.to_i64() {
            Some(v) => Repr::Small(v),
            None => Repr::Big(x.to_string()),
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<BigInt, E> {
        match r {
            Repr::Small(v) => Ok(BigInt::from(v)),
            Repr::Big(s) => s.parse().map_err(|_| E::custom(format!("not an integer: {s}"))),
        }
    }

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        to_repr(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(x: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
            x.iter().map(to_repr).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
            Vec::<Repr>::deserialize(d)?.into_iter().map(from_repr).collect()
        }
    }

    pub mod rows {
        use super::*;

        pub fn serialize<S: Serializer>(x: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
            x.iter().map(|r| r.iter().map(to_repr).collect::<Vec<_>>()).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
            Vec::<Vec<Repr>>::deserialize(d)?.into_iter().map(|r| r.into_iter().map(from_repr).collect()).collect()
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    #[serde(with = "int_serde::rows")]
    entries: Vec<Vec<BigInt>>,
}

impl Serialize for IntMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixRepr { rows: self.rows, cols: self.cols, entries: (0..self.rows).map(|i| self.row(i)).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = MatrixRepr::deserialize(d)?;
        if r.entries.len() != r.rows || r.entries.iter().any(|row| row.len() != r.cols) {
            return Err(serde::de::Error::custom("matrix entries do not match its shape"));
        }
        Ok(IntMatrix { rows: r.rows, cols: r.cols, data: r.entries.into_iter().flatten().collect() })
    }
}

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn scalar(n: usize, c: impl Into<BigInt>) -> Self {
        let c = c.into();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_rows_with_cols(rows, c)
            .unwrap_or_else(|| panic!("ragged rows in IntMatrix::from_rows ({r} rows)"))
    }

    /// Like `from_rows` but with an explicit column count, so that empty row
    /// lists still carry a shape.
    pub fn from_rows_with_cols<T: Into<BigInt> + Clone>(rows: &[Vec<T>], cols: usize) -> Option<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return None;
            }
            data.extend(row.iter().cloned().map(Into::into));
        }
        Some(IntMatrix { rows: rows.len(), cols, data })
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, v) in col.iter().enumerate() {
                m.data[i * m.cols + j] = v.clone();
            }
        }
        m
    }

    pub fn column_vector(v: &[BigInt]) -> Self {
        Self::from_columns(v.len(), &[v.to_vec()])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: impl Into<BigInt>) {
        self.data[i * self.cols + j] = v.into();
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: &BigInt) {
        self.data[i * self.cols + j] += v;
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<BigInt>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let v = self.get(i, j);
                    if i == j { v.is_one() } else { v.is_zero() }
                })
            })
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    /// Product skipping zero entries; the structure maps we multiply are
    /// mostly sparse.
    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul: {:?} * {:?}", self.shape(), other.shape());
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    if !b.is_zero() {
                        *d += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "shape mismatch in mul_vec");
        (0..self.rows)
            .map(|i| {
                let mut acc = BigInt::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc += a * x;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in add");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        IntMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in sub");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        IntMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, c: &BigInt) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn add_assign_scaled(&mut self, other: &IntMatrix, c: &BigInt) {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in add_assign_scaled");
        if c.is_zero() {
            return;
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if !b.is_zero() {
                *a += b * c;
            }
        }
    }

    /// Entries reduced into `[0, modulus)`.
    pub fn reduce_mod(&self, modulus: &BigInt) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.mod_floor(modulus)).collect(),
        }
    }

    pub fn hstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows, "row mismatch in hstack");
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[i * out.cols + j] = self.get(i, j).clone();
            }
            for j in 0..other.cols {
                out.data[i * out.cols + self.cols + j] = other.get(i, j).clone();
            }
        }
        out
    }

    pub fn vstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols, "column mismatch in vstack");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        IntMatrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn block_diag(blocks: &[IntMatrix]) -> IntMatrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &IntMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.data[(r0 + i) * self.cols + c0 + j] = block.get(i, j).clone();
            }
        }
    }

    pub fn add_block(&mut self, r0: usize, c0: usize, block: &IntMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                let v = block.get(i, j);
                if !v.is_zero() {
                    self.data[(r0 + i) * self.cols + c0 + j] += v;
                }
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> IntMatrix {
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out.data[i * cols + j] = self.get(r0 + i, c0 + j).clone();
            }
        }
        out
    }

    pub fn select_columns(&self, idx: &[usize]) -> IntMatrix {
        let mut out = Self::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (jj, &j) in idx.iter().enumerate() {
                out.data[i * idx.len() + jj] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> IntMatrix {
        let mut out = Self::zeros(idx.len(), self.cols);
        for (ii, &i) in idx.iter().enumerate() {
            for j in 0..self.cols {
                out.data[ii * self.cols + j] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> IntMatrix {
        let mut acc = Self::identity(self.rows);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Entries as `i64`, or `None` if some entry does not fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_i64()).collect())
            .collect()
    }

    /// Entries as decimal strings; used for JSON output so that huge values
    /// survive round trips.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect()).collect()
    }

    /// Determinant by fraction-free elimination (Bareiss).
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += c * row[src]
    fn row_axpy(&mut self, dst: usize, src: usize, c: &BigInt) {
        for j in 0..self.cols {
            let v = self.data[src * self.cols + j].clone();
            if !v.is_zero() {
                self.data[dst * self.cols + j] += v * c;
            }
        }
    }

    /// col[dst] += c * col[src]
    fn col_axpy(&mut self, dst: usize, src: usize, c: &BigInt) {
        for i in 0..self.rows {
            let v = self.data[i * self.cols + src].clone();
            if !v.is_zero() {
                self.data[i * self.cols + dst] += v * c;
            }
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = &mut self.data[r * self.cols + j];
            *v = -std::mem::take(v);
        }
    }
}

/// Smith normal form `U * m * V = D`.
#[derive(Clone, Debug)]
pub struct Snf {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    /// Nonzero diagonal entries, positive, each dividing the next.
    pub diagonal: Vec<BigInt>,
}

impl Snf {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }
}

/// Smith normal form with deterministic pivoting: the pivot is the entry of
/// smallest absolute value in the active block, ties broken by row-major
/// position.
pub fn snf(m: &IntMatrix) -> Snf {
    let (r, c) = m.shape();
    let mut a = m.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);
    let mut t = 0;
    while t < r.min(c) {
        let Some((pi, pj)) = smallest_entry(&a, t) else { break };
        a.swap_rows(t, pi);
        u.swap_rows(t, pi);
        a.swap_cols(t, pj);
        v.swap_cols(t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..r {
                if a.get(i, t).is_zero() {
                    continue;
                }
                let q = -(a.get(i, t) / a.get(t, t));
                if !q.is_zero() {
                    a.row_axpy(i, t, &q);
                    u.row_axpy(i, t, &q);
                }
                if !a.get(i, t).is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..c {
                if a.get(t, j).is_zero() {
                    continue;
                }
                let q = -(a.get(t, j) / a.get(t, t));
                if !q.is_zero() {
                    a.col_axpy(j, t, &q);
                    v.col_axpy(j, t, &q);
                }
                if !a.get(t, j).is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                // A remainder smaller than the pivot survived; move the
                // smallest entry of row/column t into the pivot slot.
                let (pi, pj) = smallest_in_cross(&a, t);
                a.swap_rows(t, pi);
                u.swap_rows(t, pi);
                a.swap_cols(t, pj);
                v.swap_cols(t, pj);
                continue;
            }
            let pivot = a.get(t, t).clone();
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !(a.get(i, j) % &pivot).is_zero()));
            match bad {
                Some(i) => {
                    let one = BigInt::one();
                    a.row_axpy(t, i, &one);
                    u.row_axpy(t, i, &one);
                }
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    let diagonal = (0..r.min(c)).map(|i| a.get(i, i).clone()).take_while(|d| !d.is_zero()).collect();
    Snf { u, d: a, v, diagonal }
}

fn smallest_entry(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(BigInt, usize, usize)> = None;
    for i in t..a.rows {
        for j in t..a.cols {
            let x = a.get(i, j);
            if x.is_zero() {
                continue;
            }
            let ab = x.abs();
            if best.as_ref().is_none_or(|(b, _, _)| ab < *b) {
                best = Some((ab, i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

fn smallest_in_cross(a: &IntMatrix, t: usize) -> (usize, usize) {
    let mut best = (a.get(t, t).abs(), t, t);
    for i in t + 1..a.rows {
        let x = a.get(i, t);
        if !x.is_zero() && x.abs() < best.0 {
            best = (x.abs(), i, t);
        }
    }
    for j in t + 1..a.cols {
        let x = a.get(t, j);
        if !x.is_zero() && x.abs() < best.0 {
            best = (x.abs(), t, j);
        }
    }
    (best.1, best.2)
}

pub fn rank(m: &IntMatrix) -> usize {
    snf(m).rank()
}

/// Invariants of a finitely generated abelian group `Z^free ⊕ ⊕ Z/d_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianInvariants {
    pub free_rank: usize,
    /// Torsion coefficients greater than one, each dividing the next.
    #[serde(with = "int_serde::vec")]
    pub torsion: Vec<BigInt>,
}

impl AbelianInvariants {
    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    /// Order of the torsion part.
    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().fold(BigInt::one(), |acc, d| acc * d)
    }

    /// Zero after tensoring with `Z_(p)`.
    pub fn vanishes_at(&self, p: u64) -> bool {
        let p = BigInt::from(p);
        self.free_rank == 0 && self.torsion.iter().all(|d| !(d % &p).is_zero())
    }

    pub fn torsion_primes(&self) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::new();
        for d in &self.torsion {
            for p in prime_factors(d) {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn torsion_strings(&self) -> Vec<String> {
        self.torsion.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.free_rank == 1 {
            parts.push("Z".into());
        } else if self.free_rank > 1 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() { write!(f, "0") } else { write!(f, "{}", parts.join(" + ")) }
    }
}

/// Cokernel of `m: Z^cols -> Z^rows`.
pub fn cokernel(m: &IntMatrix) -> AbelianInvariants {
    let s = snf(m);
    AbelianInvariants {
        free_rank: m.rows() - s.rank(),
        torsion: s.diagonal.iter().filter(|d| !d.is_one()).cloned().collect(),
    }
}

/// Outcome of a localized surjectivity test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurjectivityReport {
    pub locale: Locale,
    pub surjective: bool,
    pub cokernel: AbelianInvariants,
    /// Primes at which the map fails to be surjective when the cokernel is
    /// finite (generic locale only; empty otherwise).
    pub bad_primes: Vec<u64>,
}

pub fn is_surjective_localized(m: &IntMatrix, locale: Locale) -> SurjectivityReport {
    let cok = cokernel(m);
    let (surjective, bad_primes) = match locale {
        Locale::Integral => (cok.is_zero(), Vec::new()),
        Locale::Prime(p) => (cok.vanishes_at(p), Vec::new()),
        Locale::Generic => (cok.is_finite(), if cok.is_finite() { cok.torsion_primes() } else { Vec::new() }),
    };
    SurjectivityReport { locale, surjective, cokernel: cok, bad_primes }
}

/// Why a localized linear system has no solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Infeasibility {
    /// Index of the failing row after the Smith change of basis.
    pub row: usize,
    /// Elementary divisor at that row (zero past the rank).
    #[serde(with = "int_serde")]
    pub divisor: BigInt,
    /// Transformed right-hand side entry at that row.
    #[serde(with = "int_serde")]
    pub rhs: BigInt,
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {}: {} * y = {} has no admissible solution", self.row, self.divisor, self.rhs)
    }
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(x: &BigInt, p: u64) -> u32 {
    assert!(!x.is_zero(), "valuation of zero");
    let p = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    while (&x % &p).is_zero() {
        x /= &p;
        v += 1;
    }
    v
}

/// Solve `m x = b` with `x` rational and denominators prime to `p`, or
/// integral when `p` is `None`. Free coordinates are set to zero, so the
/// answer is the first solution in the Smith basis.
pub fn solve_localized(m: &IntMatrix, b: &[BigInt], p: Option<u64>) -> Result<Vec<BigRational>, Infeasibility> {
    assert_eq!(m.rows(), b.len(), "right-hand side length mismatch");
    let s = snf(m);
    solve_with_snf(&s, m.cols(), b, p)
}

pub(crate) fn solve_with_snf(
    s: &Snf,
    cols: usize,
    b: &[BigInt],
    p: Option<u64>,
) -> Result<Vec<BigRational>, Infeasibility> {
    let c = s.u.mul_vec(b);
    let k = s.rank();
    let mut y = vec![BigRational::zero(); cols];
    for (i, ci) in c.iter().enumerate() {
        if i >= k {
            if !ci.is_zero() {
                return Err(Infeasibility { row: i, divisor: BigInt::zero(), rhs: ci.clone() });
            }
            continue;
        }
        let d = &s.diagonal[i];
        let admissible = match p {
            None => (ci % d).is_zero(),
            Some(p) => ci.is_zero() || valuation(ci, p) >= valuation(d, p),
        };
        if !admissible {
            return Err(Infeasibility { row: i, divisor: d.clone(), rhs: ci.clone() });
        }
        y[i] = BigRational::new(ci.clone(), d.clone());
    }
    Ok((0..cols)
        .map(|r| {
            let mut acc = BigRational::zero();
            for (j, yj) in y.iter().enumerate() {
                let vj = s.v.get(r, j);
                if !vj.is_zero() && !yj.is_zero() {
                    acc += yj * BigRational::from_integer(vj.clone());
                }
            }
            acc
        })
        .collect())
}

/// True when every denominator is prime to `p`.
pub fn is_p_local(x: &[BigRational], p: u64) -> bool {
    let p = BigInt::from(p);
    x.iter().all(|q| !(q.denom() % &p).is_zero())
}

/// `m x` for a rational vector.
pub fn apply_rational(m: &IntMatrix, x: &[BigRational]) -> Vec<BigRational> {
    (0..m.rows())
        .map(|i| {
            let mut acc = BigRational::zero();
            for (j, xj) in x.iter().enumerate() {
                let a = m.get(i, j);
                if !a.is_zero() {
                    acc += xj * BigRational::from_integer(a.clone());
                }
            }
            acc
        })
        .collect()
}

/// A sublattice of `Z^ambient` given by a basis (the columns of `basis`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    basis: IntMatrix,
}

impl Lattice {
    pub fn zero(ambient: usize) -> Self {
        Lattice { basis: IntMatrix::zeros(ambient, 0) }
    }

    pub fn full(ambient: usize) -> Self {
        Lattice { basis: IntMatrix::identity(ambient) }
    }

    /// Lattice spanned by the columns of `gens`.
    pub fn span(gens: &IntMatrix) -> Self {
        let s = snf(gens);
        let mv = gens.mul(&s.v);
        let idx: Vec<usize> = (0..s.rank()).collect();
        Lattice { basis: mv.select_columns(&idx) }
    }

    pub fn ambient(&self) -> usize {
        self.basis.rows()
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    /// Lattice with the given columns as basis; they must be independent.
    pub fn from_basis(basis: IntMatrix) -> Self {
        debug_assert_eq!(rank(&basis), basis.cols());
        Lattice { basis }
    }

    pub fn sum(&self, other: &Lattice) -> Lattice {
        Lattice::span(&self.basis.hstack(&other.basis))
    }

    pub fn intersection(&self, other: &Lattice) -> Lattice {
        let stacked = self.basis.hstack(&other.basis.neg());
        let ker = kernel(&stacked);
        let coeffs = ker.basis.block(0, 0, self.rank(), ker.rank());
        Lattice::span(&self.basis.mul(&coeffs))
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        solve_localized(&self.basis, v, None).is_ok()
    }

    pub fn contains_p_local(&self, v: &[BigInt], p: u64) -> bool {
        solve_localized(&self.basis, v, Some(p)).is_ok()
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        let s = snf(&self.basis);
        other.basis.columns().iter().all(|c| solve_with_snf(&s, self.rank(), c, None).is_ok())
    }

    /// Invariants of `self / sub`; `None` if `sub` is not contained in `self`.
    pub fn quotient_invariants(&self, sub: &Lattice) -> Option<AbelianInvariants> {
        let s = snf(&self.basis);
        let mut coords = Vec::with_capacity(sub.rank());
        for c in sub.basis.columns() {
            let x = solve_with_snf(&s, self.rank(), &c, None).ok()?;
            coords.push(x.into_iter().map(|q| q.to_integer()).collect::<Vec<_>>());
        }
        Some(cokernel(&IntMatrix::from_columns(self.rank(), &coords)))
    }

    /// Same lattice as a set.
    pub fn same_as(&self, other: &Lattice) -> bool {
        self.ambient() == other.ambient() && self.contains_lattice(other) && other.contains_lattice(self)
    }

    /// Image under `m`.
    pub fn image(&self, m: &IntMatrix) -> Lattice {
        Lattice::span(&m.mul(&self.basis))
    }
}

/// Integer kernel of `m`, as a saturated lattice.
pub fn kernel(m: &IntMatrix) -> Lattice {
    let s = snf(m);
    let idx: Vec<usize> = (s.rank()..m.cols()).collect();
    Lattice { basis: s.v.select_columns(&idx) }
}

/// Image of `m` as a lattice.
pub fn image(m: &IntMatrix) -> Lattice {
    Lattice::span(m)
}

/// `{x : m x ∈ target}`.
pub fn preimage(m: &IntMatrix, target: &Lattice) -> Lattice {
    let stacked = m.hstack(&target.basis.neg());
    let ker = kernel(&stacked);
    Lattice::span(&ker.basis.block(0, 0, m.cols(), ker.rank()))
}

/// Integral solution of `m x = b`, if one exists.
pub fn solve_integral(m: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    let x = solve_localized(m, b, None).ok()?;
    Some(x.into_iter().map(|q| q.to_integer()).collect())
}

/// Coordinates `X` with `basis · X = cols`, if every column lies in the
/// span of `basis`.
pub fn coordinates_in(basis: &IntMatrix, cols: &IntMatrix) -> Option<IntMatrix> {
    let s = snf(basis);
    let mut out = Vec::with_capacity(cols.cols());
    for c in cols.columns() {
        let x = solve_with_snf(&s, basis.cols(), &c, None).ok()?;
        out.push(x.into_iter().map(|q| q.to_integer()).collect::<Vec<_>>());
    }
    Some(IntMatrix::from_columns(basis.cols(), &out))
}

/// For a saturated sublattice `K ⊆ Z^n` of rank `k`: a surjection
/// `π: Z^n -> Z^(n-k)` with kernel `K` and a section `σ` with `π σ = 1`.
pub fn quotient_by_saturated(sub: &Lattice) -> (IntMatrix, IntMatrix) {
    let n = sub.ambient();
    let k = sub.rank();
    let s = snf(sub.basis());
    assert!(s.diagonal.iter().all(|d| d.is_one()), "sublattice is not saturated");
    let rows: Vec<usize> = (k..n).collect();
    let pi = s.u.select_rows(&rows);
    let sigma = coordinates_in(&pi, &IntMatrix::identity(n - k)).expect("rows of a unimodular matrix");
    (pi, sigma)
}

/// Distinct prime factors by trial division.
pub fn prime_factors(n: &BigInt) -> Vec<u64> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p = 2u64;
    while BigInt::from(p) * BigInt::from(p) <= n {
        let bp = BigInt::from(p);
        if (&n % &bp).is_zero() {
            out.push(p);
            while (&n % &bp).is_zero() {
                n /= &bp;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > BigInt::one() {
        out.push(n.to_u64().expect("prime factor beyond u64"));
    }
    out
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && prime_factors(&BigInt::from(p)) == vec![p]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    fn check_snf(a: &IntMatrix) -> Snf {
        let s = snf(a);
        assert_eq!(s.u.mul(a).mul(&s.v), s.d);
        assert!(s.u.determinant().abs().is_one());
        assert!(s.v.determinant().abs().is_one());
        for w in s.diagonal.windows(2) {
            assert!((&w[1] % &w[0]).is_zero());
        }
        s
    }

    #[test]
    fn snf_identity_and_zero() {
        let s = check_snf(&IntMatrix::identity(3));
        assert!(s.u.is_identity() && s.v.is_identity() && s.d.is_identity());
        let z = check_snf(&IntMatrix::zeros(2, 3));
        assert!(z.d.is_zero());
        assert_eq!(z.rank(), 0);
    }

    #[test]
    fn snf_diag_2_3() {
        let s = check_snf(&m(&[vec![2, 0], vec![0, 3]]));
        assert_eq!(s.diagonal, vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn surjectivity_examples() {
        let one = m(&[vec![1]]);
        for loc in [Locale::Integral, Locale::Prime(2), Locale::Generic] {
            assert!(is_surjective_localized(&one, loc).surjective);
        }
        let two = m(&[vec![2]]);
        assert!(is_surjective_localized(&two, Locale::Prime(3)).surjective);
        assert!(!is_surjective_localized(&two, Locale::Prime(2)).surjective);
        assert!(!is_surjective_localized(&two, Locale::Integral).surjective);
        let g = is_surjective_localized(&two, Locale::Generic);
        assert!(g.surjective);
        assert_eq!(g.bad_primes, vec![2]);
        assert!(is_surjective_localized(&m(&[vec![2, 3]]), Locale::Integral).surjective);
    }

    #[test]
    fn solve_examples() {
        let two = m(&[vec![2]]);
        let x = solve_localized(&two, &[BigInt::from(1)], Some(3)).unwrap();
        assert_eq!(x, vec![BigRational::new(1.into(), 2.into())]);
        let err = solve_localized(&two, &[BigInt::from(1)], Some(2)).unwrap_err();
        assert_eq!(err.divisor, BigInt::from(2));
    }

    #[test]
    fn lattice_ops() {
        let a = Lattice::span(&m(&[vec![2, 0], vec![0, 1]]));
        let b = Lattice::span(&m(&[vec![1, 0], vec![0, 2]]));
        assert!(a.sum(&b).same_as(&Lattice::full(2)));
        let i = a.intersection(&b);
        assert!(i.same_as(&Lattice::span(&m(&[vec![2, 0], vec![0, 2]]))));
        let q = Lattice::full(2).quotient_invariants(&i).unwrap();
        assert_eq!(q.torsion, vec![BigInt::from(2), BigInt::from(2)]);
        let k = kernel(&m(&[vec![1, 1, 1]]));
        assert_eq!(k.rank(), 2);
    }

    #[test]
    fn factors() {
        assert_eq!(prime_factors(&BigInt::from(360)), vec![2, 3, 5]);
        assert!(is_prime(59) && !is_prime(57));
    }
}
