use std::collections::BTreeSet;

use mackey_dress::biset::*;
use mackey_dress::group::{group_from_spec, Group, Subgroup};
use mackey_dress::gset::transitive_maps;
use mackey_dress::mackey::Orientation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reps(g: &Group) -> Vec<Subgroup> {
    (0..g.class_count()).map(|c| g.rep(c).clone()).collect()
}

fn compose(g: &Group, x: &BifreeBiset, y: &BifreeBiset) -> BisetMorphism {
    balanced_product(g, &BisetMorphism::from_biset(x.clone()), &BisetMorphism::from_biset(y.clone())).unwrap()
}

fn assoc_holds(g: &Group, x: &BifreeBiset, y: &BifreeBiset, z: &BifreeBiset) -> bool {
    let (xm, ym, zm) = (BisetMorphism::from_biset(x.clone()), BisetMorphism::from_biset(y.clone()), BisetMorphism::from_biset(z.clone()));
    let left = balanced_product(g, &balanced_product(g, &xm, &ym).unwrap(), &zm).unwrap();
    let right = balanced_product(g, &xm, &balanced_product(g, &ym, &zm).unwrap()).unwrap();
    left == right
}

#[test]
fn associativity_exhaustive_s3() {
    let g = group_from_spec("S3").unwrap();
    let subs = g.all_subgroups().to_vec();
    let mut triples = 0;
    for h1 in &subs {
        for h2 in &subs {
            let ys = transitive_bisets(&g, h2, h1);
            for h3 in &subs {
                let xs = transitive_bisets(&g, h3, h2);
                for h4 in &subs {
                    let ws = transitive_bisets(&g, h4, h3);
                    for w in &ws {
                        for x in &xs {
                            for y in &ys {
                                assert!(assoc_holds(&g, w, x, y));
                                triples += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(triples > 1000, "{triples}");
}

fn random_biset(g: &Group, rng: &mut ChaCha8Rng, left: &Subgroup, right: &Subgroup) -> BifreeBiset {
    let all = transitive_bisets(g, left, right);
    all[rng.gen_range(0..all.len())].clone()
}

#[test]
fn associativity_sampled_s4() {
    let g = group_from_spec("S4").unwrap();
    let subs = reps(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let hs: Vec<&Subgroup> = (0..4).map(|_| &subs[rng.gen_range(0..subs.len())]).collect();
        let x = random_biset(&g, &mut rng, hs[3], hs[2]);
        let y = random_biset(&g, &mut rng, hs[2], hs[1]);
        let z = random_biset(&g, &mut rng, hs[1], hs[0]);
        assert!(assoc_holds(&g, &x, &y, &z));
    }
}

#[test]
fn tau_is_an_anti_involution() {
    let g = group_from_spec("S4").unwrap();
    let subs = reps(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let hs: Vec<&Subgroup> = (0..3).map(|_| &subs[rng.gen_range(0..subs.len())]).collect();
        let x = random_biset(&g, &mut rng, hs[2], hs[1]);
        let y = random_biset(&g, &mut rng, hs[1], hs[0]);
        assert_eq!(x.tau(&g).tau(&g), x);
        let lhs = compose(&g, &x, &y).tau(&g);
        let rhs = compose(&g, &y.tau(&g), &x.tau(&g));
        assert_eq!(lhs, rhs);
    }
    let id = BisetMorphism::identity(&g, &g.whole());
    assert_eq!(id.tau(&g), id);
}

#[test]
fn classification_round_trip() {
    let g = group_from_spec("S3").unwrap();
    for h1 in g.all_subgroups() {
        for h2 in g.all_subgroups() {
            let all = transitive_bisets(&g, h2, h1);
            let distinct: BTreeSet<_> = all.iter().collect();
            assert_eq!(distinct.len(), all.len());
            for x in &all {
                let again = BifreeBiset::from_monomorphism(&g, h2, h1, &x.monomorphism()).unwrap();
                assert_eq!(&again, x);
                let concrete = x.concrete(&g);
                assert_eq!(concrete.size(), x.size());
                assert_eq!(concrete.decompose(&g).unwrap(), BisetMorphism::from_biset(x.clone()));
            }
        }
    }
}

#[test]
fn j_is_functorial_on_s4() {
    let g = group_from_spec("S4").unwrap();
    let n = g.class_count();
    let chains: Vec<(usize, usize, usize)> =
        (0..n).flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c)))).filter(|&(a, b, c)| g.class_le(a, b) && g.class_le(b, c)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let (h, k, l) = chains[rng.gen_range(0..chains.len())];
        let m1 = transitive_maps(&g, h, k);
        let m2 = transitive_maps(&g, k, l);
        let (e1, e2) = (m1[rng.gen_range(0..m1.len())], m2[rng.gen_range(0..m2.len())]);
        let f1 = j_lower_transitive(&g, g.rep(h), g.rep(k), e1).unwrap();
        let f2 = j_lower_transitive(&g, g.rep(k), g.rep(l), e2).unwrap();
        let direct = j_lower_transitive(&g, g.rep(h), g.rep(l), g.mul(e1, e2)).unwrap();
        assert_eq!(compose(&g, &f2, &f1), BisetMorphism::from_biset(direct.clone()));
        // j^* = τ∘j_* and it is contravariant.
        let up = j_upper_transitive(&g, g.rep(h), g.rep(l), g.mul(e1, e2)).unwrap();
        assert_eq!(up, direct.tau(&g));
        assert_eq!(compose(&g, &f1.tau(&g), &f2.tau(&g)), BisetMorphism::from_biset(up));
    }
}

#[test]
fn j_ignores_coset_representative() {
    let g = group_from_spec("S4").unwrap();
    for h in 0..g.class_count() {
        for k in (0..g.class_count()).filter(|&k| g.class_le(h, k)) {
            for el in transitive_maps(&g, h, k) {
                let base = j_lower_transitive(&g, g.rep(h), g.rep(k), el).unwrap();
                for &kk in g.rep(k).elements() {
                    assert_eq!(j_lower_transitive(&g, g.rep(h), g.rep(k), g.mul(el, kk)).unwrap(), base);
                }
            }
        }
    }
}

#[test]
fn explicit_composition_law() {
    // _{H3}(H3)_{g2⁻¹H2g2} ×_{H2} _{H2}(H2)_{g1⁻¹H1g1} ≅ _{H3}(H3)_{(g1g2)⁻¹H1(g1g2)}
    let g = group_from_spec("S4").unwrap();
    let h1 = g.rep(g.parse_class("C2a").unwrap()).clone();
    let h2 = g.rep(g.parse_class("D4").unwrap()).clone();
    let h3 = g.whole();
    let g1 = transitive_maps(&g, g.class_of(&h1).0, g.class_of(&h2).0).into_iter().next_back().unwrap();
    let g2 = g.elements().find(|&x| h2.elements().iter().all(|&a| h3.contains(g.conj(a, x))) && x != g.identity()).unwrap();
    let x = j_lower_transitive(&g, &h2, &h3, g2).unwrap();
    let y = j_lower_transitive(&g, &h1, &h2, g1).unwrap();
    let z = j_lower_transitive(&g, &h1, &h3, g.mul(g1, g2)).unwrap();
    assert_eq!(compose(&g, &x, &y), BisetMorphism::from_biset(z));
}

#[test]
fn perm_product_matches_orbit_count() {
    let g = group_from_spec("S4").unwrap();
    let h = g.rep(g.parse_class("D4").unwrap()).clone();
    let id = BifreeBiset::identity(&g, &h);
    for k in g.all_subgroups().iter().filter(|k| k.is_subgroup_of(&h)) {
        let out = perm_biset_product(&g, k, &id).unwrap();
        let points: i64 = out.terms().iter().map(|(b, &c)| c * b.size() as i64).sum();
        assert_eq!(points as usize, h.order() / k.order() * id.size());
        let orbits: i64 = out.terms().values().sum();
        // Brute-force orbit count on the materialized set.
        let concrete: usize = {
            let mut seen = std::collections::HashSet::new();
            let mut count = 0;
            let cos = |a: usize| k.elements().iter().map(|&b| g.mul(a, b)).min().unwrap();
            for &a in h.elements() {
                for &x in h.elements() {
                    if seen.contains(&(cos(a), x)) {
                        continue;
                    }
                    count += 1;
                    for &l in h.elements() {
                        for &r in h.elements() {
                            seen.insert((cos(g.mul(l, a)), g.mul(g.mul(l, x), r)));
                        }
                    }
                }
            }
            count
        };
        assert_eq!(orbits as usize, concrete);
    }
}

#[test]
fn mackey_via_j_fixtures() {
    for spec in ["S3", "C2", "D4"] {
        let g = group_from_spec(spec).unwrap();
        assert!(mackey_via_j_check(&g, &BurnsideFixture).unwrap().is_empty());
        assert!(mackey_via_j_check(&g, &ZeroFixture).unwrap().is_empty());
        assert!(mackey_via_j_check(&g, &SignedFixture(Orientation::trivial(&g))).unwrap().is_empty());
    }
    for (spec, om) in [("C2", "trivial-kernel"), ("S3", "sign"), ("D4", "sign")] {
        let g = group_from_spec(spec).unwrap();
        let omega = Orientation::parse(&g, om).unwrap();
        let r = mackey_via_j_check(&g, &SignedFixture(omega.clone())).unwrap();
        let got: BTreeSet<(String, String)> = r.inner_defects.iter().map(|d| (d.class.clone(), d.element.clone())).collect();
        let want: BTreeSet<(String, String)> = (0..g.class_count())
            .flat_map(|c| g.rep(c).elements().iter().filter(|&&x| omega.at(x) == -1).map(move |&x| (c, x)).collect::<Vec<_>>())
            .map(|(c, x)| (g.class(c).name.clone(), g.label(x).to_string()))
            .collect();
        assert!(!want.is_empty());
        assert_eq!(got, want, "{spec}");
    }
}
