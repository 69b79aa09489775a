//! End-to-end acceptance: one PASS/FAIL line per check.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use mackey_dress::amitsur::*;
use mackey_dress::biset::*;
use mackey_dress::bqgr::{bqgr, unit_map_kernel};
use mackey_dress::burnside::{self, table_of_marks, BurnsideElement};
use mackey_dress::dress::*;
use mackey_dress::group::{catalog_specs, group_from_spec, Group, Subgroup};
use mackey_dress::gset::{gset_of_family, hyper_p_set, parse_gset, transitive_maps, Family, GMap, GSet};
use mackey_dress::mackey::*;
use mackey_dress::zlocal::{self, IntMatrix, Locale};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

type Outcome = Result<String, String>;
type Check<'a> = (&'static str, Box<dyn FnOnce() -> Outcome + 'a>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(t: Instant, limit: u64, what: &str) -> Result<Duration, String> {
    let e = t.elapsed();
    ensure!(e < Duration::from_secs(limit), "{what} took {e:?}, limit {limit} s");
    Ok(e)
}

// Brute-force subgroup lattice and marks, independent of the library's
// class machinery.

fn closure(g: &Group, gens: &[usize]) -> Vec<usize> {
    let mut seen = BTreeSet::from([g.identity()]);
    let mut queue: VecDeque<usize> = VecDeque::from([g.identity()]);
    while let Some(a) = queue.pop_front() {
        for &x in gens {
            let b = g.mul(a, x);
            if seen.insert(b) {
                queue.push_back(b);
            }
        }
    }
    seen.into_iter().collect()
}

fn brute_subgroups(g: &Group) -> Vec<Vec<usize>> {
    let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut frontier: Vec<Vec<usize>> = vec![vec![g.identity()]];
    all.insert(frontier[0].clone());
    while let Some(h) = frontier.pop() {
        for x in g.elements() {
            if h.binary_search(&x).is_err() {
                let mut gens = h.clone();
                gens.push(x);
                let k = closure(g, &gens);
                if all.insert(k.clone()) {
                    frontier.push(k);
                }
            }
        }
    }
    all.into_iter().collect()
}

fn conj_set(g: &Group, h: &[usize], x: usize) -> Vec<usize> {
    let mut v: Vec<usize> = h.iter().map(|&a| g.conj(a, x)).collect();
    v.sort_unstable();
    v
}

fn brute_classes(g: &Group) -> (usize, Vec<Vec<usize>>) {
    let subs = brute_subgroups(g);
    let mut seen = HashSet::new();
    let mut reps = Vec::new();
    for h in &subs {
        if seen.contains(h) {
            continue;
        }
        for x in g.elements() {
            seen.insert(conj_set(g, h, x));
        }
        reps.push(h.clone());
    }
    (subs.len(), reps)
}

fn brute_marks(g: &Group, k: &[usize], h: &[usize]) -> u64 {
    let mut cosets: BTreeSet<Vec<usize>> = BTreeSet::new();
    for x in g.elements() {
        let mut c: Vec<usize> = k.iter().map(|&a| g.mul(x, a)).collect();
        c.sort_unstable();
        cosets.insert(c);
    }
    cosets
        .iter()
        .filter(|c| {
            h.iter().all(|&a| {
                let mut d: Vec<usize> = c.iter().map(|&y| g.mul(a, y)).collect();
                d.sort_unstable();
                &&d == c
            })
        })
        .count() as u64
}

fn marks_match_brute_force() -> Outcome {
    let t = Instant::now();
    let mut notes = Vec::new();
    for spec in ["C2", "S3", "A4", "S4"] {
        let g = group_from_spec(spec).map_err(|e| e.to_string())?;
        let (count, reps) = brute_classes(&g);
        ensure!(reps.len() == g.class_count(), "{spec}: {} classes, oracle {}", g.class_count(), reps.len());
        ensure!(count == g.all_subgroups().len(), "{spec}: subgroup count");
        let idx: Vec<usize> = reps.iter().map(|r| g.class_of(&g.subgroup_from_elements(r).unwrap()).0).collect();
        let tom = table_of_marks(&g);
        for (a, k) in reps.iter().enumerate() {
            for (b, h) in reps.iter().enumerate() {
                let want = brute_marks(&g, k, h);
                ensure!(tom[idx[a]][idx[b]] == want, "{spec}: mark of {} on {}", g.class(idx[b]).name, g.class(idx[a]).name);
            }
        }
        notes.push(format!("{spec}:{}", reps.len()));
    }
    let s4 = group_from_spec("S4").unwrap();
    ensure!(s4.class_count() == 11, "S4 has {} classes", s4.class_count());
    let e = within(t, 5, "tables of marks")?;
    Ok(format!("classes {} in {e:.2?}", notes.join(" ")))
}

fn burnside_is_mackey(burnsides: &[(String, GreenRingData)]) -> Outcome {
    let mut squares = 0;
    for (spec, b) in burnsides {
        let t = Instant::now();
        let r = validate_mackey(b.mackey()).map_err(|e| e.to_string())?;
        ensure!(r.is_mackey && r.is_empty(), "{spec}: report not empty");
        ensure!(r.squares_checked > 0 && r.unions_checked > 0, "{spec}: nothing checked");
        squares += r.squares_checked;
        if spec == "A5" {
            within(t, 60, "A5 validation")?;
        }
    }
    Ok(format!("{} groups, {squares} squares", burnsides.len()))
}

fn green_axioms() -> Outcome {
    let mut checks = 0;
    for spec in ["S3", "S4"] {
        let g = group_from_spec(spec).unwrap();
        for r in [burnside_functor(&g), perm_char_green_ring(&g)] {
            let rep = r.validate_green();
            ensure!(rep.passed() && rep.failures() == 0, "{spec} {}: {:?}", r.name(), rep.samples);
            ensure!(rep.frobenius_left == 0 && rep.frobenius_right == 0 && rep.unit_restriction == 0 && rep.associativity == 0, "{spec}");
            checks += rep.checks;
        }
    }
    Ok(format!("{checks} identities"))
}

fn burnside_quotients(burnsides: &[(String, GreenRingData)]) -> Outcome {
    for (spec, b) in burnsides {
        let q = bqgr(b.mackey()).map_err(|e| e.to_string())?;
        ensure!(q.ideal.is_zero(), "{spec}: I_A nonzero");
    }
    for spec in ["S3", "S4"] {
        let g = group_from_spec(spec).unwrap();
        let p = perm_char_green_ring(&g);
        let q = bqgr(p.mackey()).map_err(|e| e.to_string())?;
        for c in 0..g.class_count() {
            let ideal = q.ideal.lattice(c);
            ensure!(ideal.same_as(&unit_map_kernel(&p, c)), "{spec} {}: lattice differs from unit kernel", g.class(c).name);
            ensure!(ideal.same_as(&zlocal::kernel(&character_matrix(&g, c))), "{spec} {}: lattice differs from character kernel", g.class(c).name);
        }
    }
    Ok(format!("{} Burnside quotients zero; permchar S3, S4 match", burnsides.len()))
}

fn dress_verdicts() -> Outcome {
    let t = Instant::now();
    let a5 = group_from_spec("A5").unwrap();
    let p = perm_char_green_ring(&a5);
    let r = is_dress_generating(&p, &gset_of_family(&Family::cyclic(&a5))).map_err(|e| e.to_string())?;
    let primes: BTreeSet<u64> = r.per_prime.iter().map(|v| v.prime).collect();
    ensure!(r.overall, "A5 permchar cyclic not generating");
    ensure!([2, 3, 5].iter().all(|q| primes.contains(q)), "primes {primes:?}");
    ensure!(r.per_prime.iter().all(|v| v.report.surjective) && r.generic.surjective, "a local verdict failed");
    let c2 = group_from_spec("C2").unwrap();
    let b = burnside_functor(&c2);
    let free = GSet::free(&c2);
    let r = is_dress_generating(&b, &free).map_err(|e| e.to_string())?;
    ensure!(!r.overall, "C2 Burnside free generating");
    let z = is_generating(&b, &free, Locale::Integral).map_err(|e| e.to_string())?;
    ensure!(z.cokernel.free_rank == 1 && z.cokernel.torsion.is_empty(), "cokernel {}", z.cokernel_text);
    let e = within(t, 30, "dress verdicts")?;
    Ok(format!("primes {primes:?} true, C2 cokernel {} in {e:.2?}", z.cokernel_text))
}

fn quotient_preserves_verdicts() -> Outcome {
    let grid: &[(&str, &str, &str)] = &[
        ("C2", "burnside", "free"),
        ("C2", "burnside", "point"),
        ("C2", "permchar", "free"),
        ("C3", "burnside", "free"),
        ("C4", "fixed", "free"),
        ("C6", "burnside", "free"),
        ("S3", "burnside", "free"),
        ("S3", "burnside", "cyclic"),
        ("S3", "permchar", "free"),
        ("S3", "fixed", "C2"),
        ("D4", "burnside", "cyclic"),
        ("A4", "burnside", "cyclic"),
        ("A4", "permchar", "cyclic"),
        ("S4", "burnside", "cyclic"),
        ("S4", "permchar", "cyclic"),
        ("S4", "permchar", "free"),
        ("A5", "burnside", "cyclic"),
    ];
    let mut verdicts = BTreeMap::new();
    for &(spec, functor, set) in grid {
        let g = group_from_spec(spec).unwrap();
        let r = match functor {
            "burnside" => burnside_functor(&g),
            "permchar" => perm_char_green_ring(&g),
            _ => fixed_point_green_ring(&g, 1),
        };
        let x = parse_gset(&g, set).map_err(|e| e.to_string())?;
        let lhs = is_dress_generating(&r, &x).map_err(|e| e.to_string())?.overall;
        let q = bqgr(r.mackey()).map_err(|e| e.to_string())?;
        let rhs = is_dress_generating(&q.ring, &x).map_err(|e| e.to_string())?.overall;
        ensure!(lhs == rhs, "{spec} {functor} {set}: {lhs} vs {rhs}");
        *verdicts.entry(lhs).or_insert(0) += 1;
    }
    ensure!(verdicts.len() == 2, "only one verdict value {verdicts:?}");
    Ok(format!("{} instances, verdicts {verdicts:?}", grid.len()))
}

/// `Σ a_H Ind∘Res` on `M(•)` recomputed from the functor's own maps.
fn coefficient_sum(m: &MackeyData, table: &CoefficientTable) -> Vec<Vec<BigRational>> {
    let g = m.group();
    let n = m.value(g.whole_class()).gens();
    let mut sum = vec![vec![BigRational::zero(); n]; n];
    for c in &table.coefficients {
        let f = GMap::to_point(&GSet::transitive(g, c.class_index));
        let op = m.covariant(&f).unwrap().mul(&m.contravariant(&f).unwrap());
        for (i, row) in sum.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e += &c.value * BigRational::from_integer(op.get(i, j).clone());
            }
        }
    }
    sum
}

fn induction_coefficients_check() -> Outcome {
    let mut notes = Vec::new();
    for spec in ["S4", "A5"] {
        let t = Instant::now();
        let g = group_from_spec(spec).unwrap();
        let p = perm_char_green_ring(&g);
        let table = induction_coefficients(p.mackey(), &Family::p_hyperelementary(&g, 2), 2).map_err(|e| e.to_string())?;
        ensure!(table.verified, "{spec}: not verified");
        ensure!(table.coefficients.iter().all(|c| c.value.denom() % 2u32 == BigInt::one()), "{spec}: even denominator");
        let sum = coefficient_sum(p.mackey(), &table);
        for (i, row) in sum.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let want = if i == j { BigRational::one() } else { BigRational::zero() };
                ensure!(*e == want, "{spec}: entry ({i},{j}) is {e}");
            }
        }
        let e = within(t, 60, spec)?;
        notes.push(format!("{spec} {} terms {e:.2?}", table.coefficients.len()));
    }
    Ok(notes.join(", "))
}

fn cover_check() -> Outcome {
    let g = group_from_spec("S4").unwrap();
    let b = burnside_functor(&g);
    let y = gset_of_family(&Family::cyclic(&g));
    let mut notes = Vec::new();
    for p in [2, 3] {
        let r = kernel_image_cover_check(b.mackey(), &y, p).map_err(|e| e.to_string())?;
        ensure!(r.holds, "p = {p}: fails, cokernel {}", r.cokernel);
        notes.push(format!("p={p} ker {} im {}", r.kernel_rank, r.image_rank));
    }
    Ok(notes.join(", "))
}

fn amitsur_exactness() -> Outcome {
    let mut exact = 0;
    for spec in ["C2", "C3", "C4", "S3", "D4", "A4", "S4"] {
        let g = group_from_spec(spec).unwrap();
        let rings = [burnside_functor(&g), perm_char_green_ring(&g), fixed_point_green_ring(&g, 1), fixed_point_green_ring(&g, 2), zero_functor(&g)];
        for r in &rings {
            for set in ["point", "free", "cyclic", "elementary:2", "hyperelementary", "free,point"] {
                let x = parse_gset(&g, set).map_err(|e| e.to_string())?;
                if !is_generating(r, &x, Locale::Integral).map_err(|e| e.to_string())?.surjective {
                    continue;
                }
                for v in [Variant::Homological, Variant::Cohomological] {
                    let cx = amitsur_complex(r.mackey(), &x, &GSet::point(&g), 3, v).map_err(|e| e.to_string())?;
                    let rep = check_exactness(&cx.chain, &[0, 1, 2], Locale::Integral).map_err(|e| e.to_string())?;
                    ensure!(rep.exact, "{spec} {} {set} {v:?} not exact", r.name());
                    exact += 1;
                }
            }
        }
    }
    let g = group_from_spec("C2").unwrap();
    let m = signed_pre_functor(&g, &Orientation::parse(&g, "trivial-kernel").unwrap());
    let cx = amitsur_complex(&m, &GSet::free(&g), &GSet::point(&g), 3, Variant::Homological).map_err(|e| e.to_string())?;
    ensure!(!cx.chain.is_complex(), "signed C2 is a complex");
    ensure!(cx.chain.composition_defects_mod(&BigInt::from(2)).is_empty(), "signed C2 defect odd");
    Ok(format!("{exact} exact complexes; signed C2 ∂∂ ≠ 0, ≡ 0 mod 2"))
}

fn repair_suite() -> Outcome {
    // (a) genuine complexes pass through unchanged.
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..30 {
        let c = common::fixture(&mut rng, false);
        let r = repair_pseudo_complex(&c).map_err(|e| e.to_string())?;
        ensure!(Some(&r.contraction) == c.contraction.as_ref() && r.boundary == c.boundary, "fixture changed");
    }
    for spec in ["C2", "S3"] {
        let g = group_from_spec(spec).unwrap();
        let b = burnside_functor(&g);
        let x = parse_gset(&g, "free,point").unwrap();
        let cx = amitsur_complex(b.mackey(), &x, &GSet::point(&g), 3, Variant::Homological).map_err(|e| e.to_string())?;
        let top = g.whole_class();
        let idx = burnside::basis(&x).iter().position(|o| x.orbit_class(o.orbit) == top && o.class == top).unwrap();
        let s = homotopy_from_element(b.mackey(), &cx, &BurnsideElement::basis_element(&x, idx)).map_err(|e| e.to_string())?;
        let mut c = cx.chain.clone();
        c.contraction = Some(s);
        let r = repair_pseudo_complex(&c).map_err(|e| e.to_string())?;
        ensure!(r.certified() && r.changed_degrees.is_empty(), "{spec}: Amitsur contraction changed");
        ensure!(Some(&r.contraction) == c.contraction.as_ref() && r.boundary == c.boundary, "{spec}: not idempotent");
    }
    // (b) seeded filtered pseudo-complexes.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut changed = 0;
    for k in 0..120 {
        let c = common::fixture(&mut rng, true);
        ensure!(c.ranks.iter().all(|&r| r <= 8), "rank cap");
        let input = if k % 4 == 3 { common::cohomological(&c) } else { c.clone() };
        let r = repair_pseudo_complex(&input).map_err(|e| format!("fixture {k}: {e}"))?;
        ensure!(r.certified() && r.first_boundary_unchanged && r.boundary[0] == input.boundary[0], "fixture {k}");
        let (bd, s): (Vec<IntMatrix>, Vec<IntMatrix>) = match input.variant {
            Variant::Homological => (r.boundary.clone(), r.contraction.clone()),
            Variant::Cohomological => (r.boundary.iter().map(IntMatrix::transpose).collect(), r.contraction.iter().map(IntMatrix::transpose).collect()),
        };
        catch_unwind(|| common::check_homological(&c.ranks, &bd, &s)).map_err(|_| format!("fixture {k}: certificate recheck"))?;
        if !r.changed_degrees.is_empty() {
            changed += 1;
        }
    }
    // (c) M(•) mod 2^k splits off M(X × •).
    let mut demos = Vec::new();
    let cases: [(&str, &str, Option<&str>); 3] = [("C2", "trivial-kernel", None), ("C2", "trivial-kernel", Some("free,point")), ("S3", "sign", None)];
    for (spec, om, set) in cases {
        let g = group_from_spec(spec).unwrap();
        let m = signed_pre_functor(&g, &Orientation::parse(&g, om).unwrap());
        let x = match set {
            Some(s) => parse_gset(&g, s).unwrap(),
            None => hyper_p_set(&GSet::free(&g), 2),
        };
        let c = amitsur_pseudo_complex(&m, &x, 3, 2).map_err(|e| e.to_string())?;
        for k in 1..=3 {
            let r = repair_filtered_truncated(&c, k).map_err(|e| format!("{spec} {set:?} k={k}: {e}"))?;
            ensure!(r.certified() && splits_first_boundary(&r), "{spec} {set:?} k={k} not split");
        }
        demos.push(format!("{spec}{}", if c.is_complex() { "" } else { "*" }));
    }
    Ok(format!("120 fixtures ({changed} repaired), demos {} for k=1..3", demos.join(" ")))
}

fn composed(g: &Group, x: &BifreeBiset, y: &BifreeBiset) -> BisetMorphism {
    balanced_product(g, &BisetMorphism::from_biset(x.clone()), &BisetMorphism::from_biset(y.clone())).unwrap()
}

fn associative(g: &Group, x: &BifreeBiset, y: &BifreeBiset, z: &BifreeBiset) -> bool {
    let (xm, ym, zm) = (BisetMorphism::from_biset(x.clone()), BisetMorphism::from_biset(y.clone()), BisetMorphism::from_biset(z.clone()));
    let l = balanced_product(g, &balanced_product(g, &xm, &ym).unwrap(), &zm).unwrap();
    let r = balanced_product(g, &xm, &balanced_product(g, &ym, &zm).unwrap()).unwrap();
    l == r
}

fn pick(g: &Group, rng: &mut ChaCha8Rng, left: &Subgroup, right: &Subgroup) -> BifreeBiset {
    let all = transitive_bisets(g, left, right);
    all[rng.gen_range(0..all.len())].clone()
}

fn biset_suite() -> Outcome {
    let s3 = group_from_spec("S3").unwrap();
    let subs = s3.all_subgroups().to_vec();
    let mut exhaustive = 0;
    for h1 in &subs {
        for h2 in &subs {
            let ys = transitive_bisets(&s3, h2, h1);
            for h3 in &subs {
                let xs = transitive_bisets(&s3, h3, h2);
                for h4 in &subs {
                    for w in &transitive_bisets(&s3, h4, h3) {
                        for x in &xs {
                            for y in &ys {
                                ensure!(associative(&s3, w, x, y), "S3 associativity");
                                exhaustive += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    let g = group_from_spec("S4").unwrap();
    let reps: Vec<Subgroup> = (0..g.class_count()).map(|c| g.rep(c).clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let hs: Vec<&Subgroup> = (0..4).map(|_| &reps[rng.gen_range(0..reps.len())]).collect();
        let (x, y, z) = (pick(&g, &mut rng, hs[3], hs[2]), pick(&g, &mut rng, hs[2], hs[1]), pick(&g, &mut rng, hs[1], hs[0]));
        ensure!(associative(&g, &x, &y, &z), "S4 associativity");
        ensure!(x.tau(&g).tau(&g) == x, "τ² ≠ id");
        ensure!(composed(&g, &x, &y).tau(&g) == composed(&g, &y.tau(&g), &x.tau(&g)), "τ not anti-multiplicative");
    }
    let n = g.class_count();
    let chains: Vec<(usize, usize, usize)> =
        (0..n).flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c)))).filter(|&(a, b, c)| g.class_le(a, b) && g.class_le(b, c)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let (h, k, l) = chains[rng.gen_range(0..chains.len())];
        let (m1, m2) = (transitive_maps(&g, h, k), transitive_maps(&g, k, l));
        let (e1, e2) = (m1[rng.gen_range(0..m1.len())], m2[rng.gen_range(0..m2.len())]);
        let f1 = j_lower_transitive(&g, g.rep(h), g.rep(k), e1).unwrap();
        let f2 = j_lower_transitive(&g, g.rep(k), g.rep(l), e2).unwrap();
        let direct = j_lower_transitive(&g, g.rep(h), g.rep(l), g.mul(e1, e2)).unwrap();
        ensure!(composed(&g, &f2, &f1) == BisetMorphism::from_biset(direct), "j not functorial");
    }
    // Composition of restriction-type bisets along H1 ≤ H2 ≤ H3.
    let h1 = g.rep(g.parse_class("C2a").unwrap()).clone();
    let h2 = g.rep(g.parse_class("D4").unwrap()).clone();
    let h3 = g.whole();
    let g1 = *transitive_maps(&g, g.class_of(&h1).0, g.class_of(&h2).0).last().unwrap();
    let g2 = g.elements().find(|&x| x != g.identity()).unwrap();
    let x = j_lower_transitive(&g, &h2, &h3, g2).unwrap();
    let y = j_lower_transitive(&g, &h1, &h2, g1).unwrap();
    let z = j_lower_transitive(&g, &h1, &h3, g.mul(g1, g2)).unwrap();
    ensure!(composed(&g, &x, &y) == BisetMorphism::from_biset(z), "explicit composition");
    for spec in ["C2", "S3", "D4"] {
        let g = group_from_spec(spec).unwrap();
        ensure!(mackey_via_j_check(&g, &BurnsideFixture).map_err(|e| e.to_string())?.is_empty(), "{spec}: Burnside fixture");
    }
    let mut signed = 0;
    for (spec, om) in [("C2", "trivial-kernel"), ("S3", "sign"), ("D4", "sign")] {
        let g = group_from_spec(spec).unwrap();
        let omega = Orientation::parse(&g, om).unwrap();
        let r = mackey_via_j_check(&g, &SignedFixture(omega.clone())).map_err(|e| e.to_string())?;
        let got: BTreeSet<(String, String)> = r.inner_defects.iter().map(|d| (d.class.clone(), d.element.clone())).collect();
        let want: BTreeSet<(String, String)> = (0..g.class_count())
            .flat_map(|c| g.rep(c).elements().iter().filter(|&&x| omega.at(x) == -1).map(|&x| (g.class(c).name.clone(), g.label(x).to_string())).collect::<Vec<_>>())
            .collect();
        ensure!(!want.is_empty() && got == want, "{spec}: signed defects {got:?}");
        signed += got.len();
    }
    Ok(format!("{exhaustive} S3 triples, 200 S4 triples, 100 j pairs, {signed} signed defects"))
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_mackey-dress");
    for args in common::CLI_RUNS {
        let run = || Command::new(bin).args(*args).arg("--exit-zero").output().map_err(|e| e.to_string());
        let (a, b) = (run()?, run()?);
        ensure!(a.status.success(), "{args:?} exited {:?}: {}", a.status.code(), String::from_utf8_lossy(&a.stderr));
        ensure!(a.stdout == b.stdout && !a.stdout.is_empty(), "{args:?} differs between runs");
        serde_json::from_slice::<serde_json::Value>(&a.stdout).map_err(|e| format!("{args:?}: {e}"))?;
    }
    Ok(format!("{} commands byte-identical", common::CLI_RUNS.len()))
}

fn outcome(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panic: {}", msg.unwrap_or_default()))
    })
}

fn main() {
    let t = Instant::now();
    let burnsides: Vec<(String, GreenRingData)> = catalog_specs(60)
        .into_iter()
        .map(|s| {
            let g: Arc<Group> = group_from_spec(&s).unwrap();
            (s, burnside_functor(&g))
        })
        .collect();
    let checks: Vec<Check<'_>> = vec![
        ("tables of marks", Box::new(marks_match_brute_force)),
        ("Burnside functors are Mackey", Box::new(|| burnside_is_mackey(&burnsides))),
        ("Green axioms", Box::new(green_axioms)),
        ("Burnside quotients", Box::new(|| burnside_quotients(&burnsides))),
        ("Dress verdicts", Box::new(dress_verdicts)),
        ("verdicts agree with the quotient", Box::new(quotient_preserves_verdicts)),
        ("induction coefficients", Box::new(induction_coefficients_check)),
        ("kernel plus image cover", Box::new(cover_check)),
        ("Amitsur exactness", Box::new(amitsur_exactness)),
        ("repair", Box::new(repair_suite)),
        ("biset calculus", Box::new(biset_suite)),
        ("CLI determinism", Box::new(cli_determinism)),
    ];
    let mut failed = 0;
    let mut out = std::io::stdout().lock();
    for (i, (name, f)) in checks.into_iter().enumerate() {
        let start = Instant::now();
        let line = match outcome(f) {
            Ok(note) => format!("PASS {:>2} {name}: {note} [{:.2?}]", i + 1, start.elapsed()),
            Err(why) => {
                failed += 1;
                format!("FAIL {:>2} {name}: {why}", i + 1)
            }
        };
        let _ = writeln!(out, "{line}");
        let _ = out.flush();
    }
    let _ = writeln!(out, "acceptance: {} of 12 passed in {:.2?}", 12 - failed, t.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
