//! Balanced products, reversal and the functor j on transitive G-maps.
//!
//! cargo run --example biset_calculus

use mackey_dress::biset::{balanced_product, j_lower_transitive, mackey_via_j_check, BisetMorphism, SignedFixture};
use mackey_dress::group::group_from_spec;
use mackey_dress::gset::transitive_maps;
use mackey_dress::mackey::Orientation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = group_from_spec("S4")?;
    let (h, k, l) = (g.parse_class("C2a").unwrap(), g.parse_class("D4").unwrap(), g.whole_class());
    let e1 = transitive_maps(&g, h, k)[0];
    let e2 = transitive_maps(&g, k, l)[0];
    let f1 = j_lower_transitive(&g, g.rep(h), g.rep(k), e1)?;
    let f2 = j_lower_transitive(&g, g.rep(k), g.rep(l), e2)?;
    let product = balanced_product(&g, &BisetMorphism::from_biset(f2.clone()), &BisetMorphism::from_biset(f1.clone()))?;
    let direct = j_lower_transitive(&g, g.rep(h), g.rep(l), g.mul(e1, e2))?;
    println!("j(f2)∘j(f1) = j(f2∘f1): {}", product == BisetMorphism::from_biset(direct));
    let square = balanced_product(&g, &BisetMorphism::from_biset(f1.tau(&g)), &BisetMorphism::from_biset(f1.clone()))?;
    println!("τ(j f1)∘j f1 has {} transitive terms", square.terms().len());
    println!("{}", serde_json::to_string_pretty(&f1.export(&g))?);
    let d4 = group_from_spec("D4")?;
    let r = mackey_via_j_check(&d4, &SignedFixture(Orientation::parse(&d4, "sign")?))?;
    println!("signed fixture on D4: {} inner defects", r.inner_defects.len());
    Ok(())
}
