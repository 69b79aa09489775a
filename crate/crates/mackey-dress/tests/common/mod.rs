#![allow(dead_code)]

use mackey_dress::amitsur::{ChainData, Filtration, Variant};
use mackey_dress::zlocal::IntMatrix;
use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random unimodular `n × n` matrix and its inverse, from elementary moves.
fn unimodular(rng: &mut ChaCha8Rng, n: usize) -> (IntMatrix, IntMatrix) {
    let mut p = IntMatrix::identity(n);
    let mut q = IntMatrix::identity(n);
    if n < 2 {
        return (p, q);
    }
    for _ in 0..2 * n {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i == j {
            continue;
        }
        let c: i64 = rng.gen_range(-2..=2);
        let mut e = IntMatrix::identity(n);
        e.set(i, j, c);
        let mut einv = IntMatrix::identity(n);
        einv.set(i, j, -c);
        p = e.mul(&p);
        q = q.mul(&einv);
    }
    (p, q)
}

/// A filtered pseudo-complex whose associated graded is contracted: per
/// weight a direct sum of `Z → Z` pieces in a scrambled basis, then
/// weight-raising noise on `∂` and `s`.
pub fn fixture(rng: &mut ChaCha8Rng, perturb: bool) -> ChainData {
    let top: usize = rng.gen_range(1..=3);
    let depth: usize = rng.gen_range(1..=3);
    // disks[r][w]: pieces C_{r+1} -> C_r of weight w.
    let mut disks = vec![vec![0usize; depth]; top];
    let mut ranks = vec![0usize; top + 1];
    for r in 0..top {
        for slot in disks[r].iter_mut() {
            let k = rng.gen_range(0..=1);
            if ranks[r] + k <= 8 && ranks[r + 1] + k <= 8 {
                *slot = k;
                ranks[r] += k;
                ranks[r + 1] += k;
            }
        }
    }
    // Weights of the coordinates in each degree: tops of the disks from
    // below, then bottoms of the disks above.
    let mut weights: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    let mut bd: Vec<IntMatrix> = (0..top).map(|r| IntMatrix::zeros(ranks[r], ranks[r + 1])).collect();
    let mut s: Vec<IntMatrix> = (0..top).map(|r| IntMatrix::zeros(ranks[r + 1], ranks[r])).collect();
    let mut lower_pos = vec![0usize; top + 1];
    // Degree r coordinates: first the tops of disks r-1, then bottoms of disks r.
    for r in 0..=top {
        let from_above = if r > 0 { disks[r - 1].iter().sum::<usize>() } else { 0 };
        lower_pos[r] = from_above;
        if r > 0 {
            for (w, &k) in disks[r - 1].iter().enumerate() {
                weights[r].extend(std::iter::repeat_n(w, k));
            }
        }
        if r < top {
            for (w, &k) in disks[r].iter().enumerate() {
                weights[r].extend(std::iter::repeat_n(w, k));
            }
        }
    }
    for r in 0..top {
        let n = disks[r].iter().sum::<usize>();
        for i in 0..n {
            let bottom = lower_pos[r] + i;
            let above = i;
            bd[r].set(bottom, above, 1);
            s[r].set(above, bottom, 1);
        }
    }
    // Scramble each weight block of each degree.
    let mut change: Vec<(IntMatrix, IntMatrix)> = Vec::new();
    for r in 0..=top {
        let n = ranks[r];
        let mut p = IntMatrix::identity(n);
        let mut q = IntMatrix::identity(n);
        for w in 0..depth {
            let idx: Vec<usize> = (0..n).filter(|&i| weights[r][i] == w).collect();
            let (pw, qw) = unimodular(rng, idx.len());
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    p.set(i, j, pw.get(a, b).clone());
                    q.set(i, j, qw.get(a, b).clone());
                }
            }
        }
        change.push((p, q));
    }
    for r in 0..top {
        bd[r] = change[r].0.mul(&bd[r]).mul(&change[r + 1].1);
        s[r] = change[r + 1].0.mul(&s[r]).mul(&change[r].1);
    }
    if perturb {
        for r in 0..top {
            let up = |a: &[usize], b: &[usize]| -> Vec<(usize, usize)> {
                (0..a.len()).flat_map(|i| (0..b.len()).map(move |j| (i, j))).filter(|&(i, j)| a[i] > b[j]).collect()
            };
            let eb = up(&weights[r], &weights[r + 1]);
            let es = up(&weights[r + 1], &weights[r]);
            for _ in 0..rng.gen_range(1..=4) {
                if !eb.is_empty() {
                    let (i, j) = eb[rng.gen_range(0..eb.len())];
                    bd[r].add_at(i, j, &BigInt::from(rng.gen_range(-3i64..=3)));
                }
                if !es.is_empty() {
                    let (i, j) = es[rng.gen_range(0..es.len())];
                    s[r].add_at(i, j, &BigInt::from(rng.gen_range(-3i64..=3)));
                }
            }
        }
    }
    ChainData {
        variant: Variant::Homological,
        ranks,
        relations: None,
        boundary: bd,
        contraction: Some(s),
        filtration: Some(Filtration::Coordinate { depth, weights }),
    }
}

pub fn cohomological(c: &ChainData) -> ChainData {
    let Some(Filtration::Coordinate { depth, weights }) = &c.filtration else { unreachable!() };
    ChainData {
        variant: Variant::Cohomological,
        ranks: c.ranks.clone(),
        relations: None,
        boundary: c.boundary.iter().map(IntMatrix::transpose).collect(),
        contraction: c.contraction.as_ref().map(|s| s.iter().map(IntMatrix::transpose).collect()),
        filtration: Some(Filtration::Coordinate { depth: *depth, weights: weights.iter().map(|w| w.iter().map(|x| depth - 1 - x).collect()).collect() }),
    }
}

/// Certificates recomputed here in homological form.
pub fn check_homological(ranks: &[usize], bd: &[IntMatrix], s: &[IntMatrix]) {
    let n = bd.len();
    for r in 0..n {
        if r + 1 < n {
            assert!(bd[r].mul(&bd[r + 1]).is_zero(), "∂∂ at {r}");
        }
        let mut id = bd[r].mul(&s[r]);
        if r > 0 {
            id = id.add(&s[r - 1].mul(&bd[r - 1]));
        }
        assert!(id.is_identity() && id.rows() == ranks[r], "s∂ + ∂s at {r}");
        assert_eq!(bd[r].mul(&s[r]).mul(&bd[r]), bd[r], "∂s∂ at {r}");
    }
}

/// Command lines covering every subcommand, seeds fixed.
pub const CLI_RUNS: &[&[&str]] = &[
    &["group", "S3"],
    &["subgroups", "S4"],
    &["tom", "A4"],
    &["mackey", "validate", "--functor", "burnside", "--group", "S4"],
    &["mackey", "validate", "--functor", "permchar", "--group", "S3", "--green"],
    &["mackey", "validate", "--functor", "signed", "--group", "C2", "--omega", "trivial-kernel"],
    &["bqgr", "--functor", "permchar", "--group", "S3"],
    &["dress", "check", "--functor", "permchar", "--group", "A5", "--set", "cyclic"],
    &["dress", "check", "--functor", "burnside", "--group", "C2", "--set", "free"],
    &["dress", "coefficients", "--functor", "permchar", "--group", "S4", "--family", "p-hyperelementary:2", "--prime", "2"],
    &["dress", "cover", "--functor", "burnside", "--group", "S4", "--set", "cyclic", "--prime", "3"],
    &["amitsur", "--functor", "permchar", "--group", "S3", "--set", "cyclic"],
    &["amitsur", "--functor", "burnside", "--group", "S3", "--set", "cyclic", "--variant", "co"],
    &["amitsur", "--functor", "signed", "--group", "S3", "--omega", "sign", "--set", "C2", "--repair", "--prime", "2", "--mod2k", "3"],
    &["biset", "compose", "--group", "S4", "lower:C2a->D4@()", "upper:C2a->D4@()"],
    &["biset", "tau", "--group", "S3", "lower:e->C2@()"],
    &["biset", "j", "--group", "S4", "--map", "C2a->D4@()"],
    &["biset", "check", "--group", "D4", "--fixture", "signed", "--omega", "sign"],
    &["biset", "associativity", "--group", "S4", "--samples", "30", "--seed", "9"],
];
